//! Plain-file image artifacts: binary PGM/PPM writers and grayscale input
//! decoding for the analysis tools.

use crate::error::{CoreError, Result};
use crate::orientation::OrientationMap;
use crate::tensor::Tensor;
use std::path::Path;

/// Serialize a binary (P5) grayscale PGM.
pub fn pgm_bytes(width: usize, height: usize, pixels: &[u8]) -> Result<Vec<u8>> {
    if pixels.len() != width * height {
        return Err(CoreError::ShapeMismatch(format!(
            "PGM payload {} != {width}x{height}",
            pixels.len()
        )));
    }
    let mut bytes = format!("P5\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(pixels);
    Ok(bytes)
}

/// Write a binary (P5) grayscale PGM.
pub fn write_pgm(path: impl AsRef<Path>, width: usize, height: usize, pixels: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let bytes = pgm_bytes(width, height, pixels)?;
    std::fs::write(path, bytes).map_err(|e| CoreError::io(path.display().to_string(), e))
}

/// Serialize a binary (P6) RGB PPM; `rgb` is interleaved, 3 bytes per pixel.
pub fn ppm_bytes(width: usize, height: usize, rgb: &[u8]) -> Result<Vec<u8>> {
    if rgb.len() != width * height * 3 {
        return Err(CoreError::ShapeMismatch(format!(
            "PPM payload {} != 3x{width}x{height}",
            rgb.len()
        )));
    }
    let mut bytes = format!("P6\n{width} {height}\n255\n").into_bytes();
    bytes.extend_from_slice(rgb);
    Ok(bytes)
}

/// Write a binary (P6) RGB PPM; `rgb` is interleaved, 3 bytes per pixel.
pub fn write_ppm(path: impl AsRef<Path>, width: usize, height: usize, rgb: &[u8]) -> Result<()> {
    let path = path.as_ref();
    let bytes = ppm_bytes(width, height, rgb)?;
    std::fs::write(path, bytes).map_err(|e| CoreError::io(path.display().to_string(), e))
}

/// Map unit-interval values to 8-bit gray, clamping out-of-range inputs.
pub fn gray_from_unit(values: &[f32]) -> Vec<u8> {
    values
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect()
}

/// Decode any supported image file to a [1,1,H,W] tensor in [0,1].
pub fn read_grayscale(path: impl AsRef<Path>) -> Result<Tensor> {
    let path = path.as_ref();
    let img = image::open(path).map_err(|e| CoreError::ImageDecode {
        path: path.display().to_string(),
        message: e.to_string(),
    })?;
    luma_to_tensor(img)
}

/// Decode an in-memory image (PNG, PGM, ...) to a [1,1,H,W] tensor in [0,1].
pub fn grayscale_from_bytes(bytes: &[u8]) -> Result<Tensor> {
    let img = image::load_from_memory(bytes).map_err(|e| CoreError::ImageDecode {
        path: "<memory>".into(),
        message: e.to_string(),
    })?;
    luma_to_tensor(img)
}

fn luma_to_tensor(img: image::DynamicImage) -> Result<Tensor> {
    let img = img.to_luma8();
    let (w, h) = (img.width() as usize, img.height() as usize);
    let data: Vec<f32> = img.into_raw().iter().map(|&b| f32::from(b) / 255.0).collect();
    Tensor::from_vec(&[1, 1, h, w], data)
}

/// HSV → RGB with h, s, v all in [0, 1]; h wraps.
pub fn hsv_to_rgb(h: f32, s: f32, v: f32) -> [u8; 3] {
    let h = (h.rem_euclid(1.0)) * 6.0;
    let sector = h.floor() as i32 % 6;
    let f = h - h.floor();
    let p = v * (1.0 - s);
    let q = v * (1.0 - s * f);
    let t = v * (1.0 - s * (1.0 - f));
    let (r, g, b) = match sector {
        0 => (v, t, p),
        1 => (q, v, p),
        2 => (p, v, t),
        3 => (p, q, v),
        4 => (t, p, v),
        _ => (v, p, q),
    };
    [
        (r * 255.0).round() as u8,
        (g * 255.0).round() as u8,
        (b * 255.0).round() as u8,
    ]
}

/// Render an orientation map as interleaved RGB: hue encodes the angle,
/// degenerate (no-orientation) pixels are black.
pub fn orientation_rgb(map: &OrientationMap) -> Vec<u8> {
    let h = map.theta.dim(0);
    let w = map.theta.dim(1);
    let mut rgb = Vec::with_capacity(h * w * 3);
    for r in 0..h {
        for c in 0..w {
            let px = match map.theta_at(r, c) {
                Some(theta) => hsv_to_rgb(theta / std::f32::consts::TAU, 1.0, 1.0),
                None => [0, 0, 0],
            };
            rgb.extend_from_slice(&px);
        }
    }
    rgb
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pgm_round_trips_through_decoder() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.pgm");
        let pixels: Vec<u8> = (0..12).map(|i| (i * 20) as u8).collect();
        write_pgm(&path, 4, 3, &pixels).unwrap();
        let back = image::open(&path).unwrap().to_luma8();
        assert_eq!(back.width(), 4);
        assert_eq!(back.height(), 3);
        assert_eq!(back.into_raw(), pixels);
    }

    #[test]
    fn ppm_round_trips_through_decoder() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.ppm");
        let rgb: Vec<u8> = (0..2 * 2 * 3).map(|i| (i * 17) as u8).collect();
        write_ppm(&path, 2, 2, &rgb).unwrap();
        let back = image::open(&path).unwrap().to_rgb8();
        assert_eq!(back.into_raw(), rgb);
    }

    #[test]
    fn payload_size_is_checked() {
        let dir = tempfile::tempdir().unwrap();
        assert!(write_pgm(dir.path().join("x.pgm"), 3, 3, &[0; 8]).is_err());
        assert!(write_ppm(dir.path().join("x.ppm"), 2, 2, &[0; 11]).is_err());
    }

    #[test]
    fn gray_mapping_clamps_and_scales() {
        assert_eq!(gray_from_unit(&[0.0, 1.0, 0.5, -2.0, 7.0]), vec![0, 255, 128, 0, 255]);
    }

    #[test]
    fn read_grayscale_recovers_written_values() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g.pgm");
        write_pgm(&path, 2, 2, &[0, 51, 102, 255]).unwrap();
        let t = read_grayscale(&path).unwrap();
        assert_eq!(t.shape(), &[1, 1, 2, 2]);
        assert_eq!(t.data()[0], 0.0);
        assert!((t.data()[1] - 0.2).abs() < 1e-6);
        assert_eq!(t.data()[3], 1.0);
    }

    #[test]
    fn missing_image_reports_decode_error() {
        assert!(matches!(
            read_grayscale("/nonexistent/nothing.png"),
            Err(CoreError::ImageDecode { .. })
        ));
    }

    #[test]
    fn bytes_decode_matches_file_decode() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("m.pgm");
        write_pgm(&path, 3, 1, &[0, 128, 255]).unwrap();
        let from_file = read_grayscale(&path).unwrap();
        let from_bytes = grayscale_from_bytes(&std::fs::read(&path).unwrap()).unwrap();
        assert_eq!(from_file.data(), from_bytes.data());
        assert!(matches!(
            grayscale_from_bytes(b"not an image"),
            Err(CoreError::ImageDecode { .. })
        ));
    }

    #[test]
    fn hsv_primaries() {
        assert_eq!(hsv_to_rgb(0.0, 1.0, 1.0), [255, 0, 0]);
        assert_eq!(hsv_to_rgb(1.0 / 3.0, 1.0, 1.0), [0, 255, 0]);
        assert_eq!(hsv_to_rgb(2.0 / 3.0, 1.0, 1.0), [0, 0, 255]);
        assert_eq!(hsv_to_rgb(0.5, 0.0, 0.0), [0, 0, 0]);
        // Hue wraps.
        assert_eq!(hsv_to_rgb(1.0, 1.0, 1.0), hsv_to_rgb(0.0, 1.0, 1.0));
    }

    #[test]
    fn orientation_rendering_blacks_out_degenerate_pixels() {
        use crate::orientation::OrientationMap;
        let theta = Tensor::from_vec(&[1, 2], vec![0.0, 1.0]).unwrap();
        let map = OrientationMap {
            theta,
            regular: vec![true, false],
        };
        let rgb = orientation_rgb(&map);
        assert_eq!(&rgb[..3], &[255, 0, 0]);
        assert_eq!(&rgb[3..], &[0, 0, 0]);
    }
}
