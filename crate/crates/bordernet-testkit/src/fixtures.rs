//! Deterministic synthetic inputs for tests.

use bordernet_core::Tensor;
use rand::RngCore;
use rand_chacha::ChaCha8Rng;
use std::io::Result;
use std::path::Path;

/// Random tensor whose entries are exact multiples of 1/256 in [-1, 1].
///
/// Values on this grid are exactly representable in f32, and products of
/// two of them are too, so a well-ordered f32 accumulation and an f64 one
/// agree bit-for-bit on small reductions. Comparisons against definition
/// oracles can then use tight absolute tolerances without floating-point
/// noise muddying the verdict.
pub fn grid_valued(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let mut t = Tensor::zeros(shape);
    for v in t.data_mut() {
        let k = (rng.next_u32() % 513) as i32 - 256;
        *v = k as f32 / 256.0;
    }
    t
}

/// Same grid restricted to [0, 1), for image-like inputs.
pub fn unit_grid_valued(rng: &mut ChaCha8Rng, shape: &[usize]) -> Tensor {
    let mut t = Tensor::zeros(shape);
    for v in t.data_mut() {
        *v = (rng.next_u32() % 256) as f32 / 256.0;
    }
    t
}

/// Write an IDX image/label pair with caller-defined contents.
///
/// `pixel(i, r, c)` supplies the byte for pixel (r, c) of image `i`;
/// `label(i)` the class of image `i`.
pub fn write_idx_pair(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    n: usize,
    height: usize,
    width: usize,
    pixel: impl Fn(usize, usize, usize) -> u8,
    label: impl Fn(usize) -> u8,
) -> Result<()> {
    let mut img = Vec::with_capacity(16 + n * height * width);
    img.extend_from_slice(&0x0000_0803u32.to_be_bytes());
    img.extend_from_slice(&(n as u32).to_be_bytes());
    img.extend_from_slice(&(height as u32).to_be_bytes());
    img.extend_from_slice(&(width as u32).to_be_bytes());
    for i in 0..n {
        for r in 0..height {
            for c in 0..width {
                img.push(pixel(i, r, c));
            }
        }
    }
    let mut lbl = Vec::with_capacity(8 + n);
    lbl.extend_from_slice(&0x0000_0801u32.to_be_bytes());
    lbl.extend_from_slice(&(n as u32).to_be_bytes());
    lbl.extend((0..n).map(&label));
    std::fs::write(images_path, img)?;
    std::fs::write(labels_path, lbl)?;
    Ok(())
}

/// A small digit-like test set: image `i` carries a bright vertical bar
/// whose column encodes the label `i % 10`. Linearly separable, so even a
/// briefly trained network scores well on it.
pub fn write_separable_idx(
    images_path: impl AsRef<Path>,
    labels_path: impl AsRef<Path>,
    n: usize,
) -> Result<()> {
    write_idx_pair(
        images_path,
        labels_path,
        n,
        28,
        28,
        |i, r, c| {
            let class = i % 10;
            if (4..24).contains(&r) && c == 2 + 2 * class {
                255
            } else {
                0
            }
        },
        |i| (i % 10) as u8,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use bordernet_core::mnist::{load_idx, Split};
    use bordernet_core::rng::stream_rng;

    #[test]
    fn grid_values_sit_exactly_on_the_lattice() {
        let mut rng = stream_rng(0, 0);
        let t = grid_valued(&mut rng, &[64]);
        for &v in t.iter() {
            let scaled = f64::from(v) * 256.0;
            assert_eq!(scaled, scaled.round());
            assert!((-1.0..=1.0).contains(&v));
        }
        let u = unit_grid_valued(&mut rng, &[64]);
        assert!(u.iter().all(|&v| (0.0..1.0).contains(&v)));
    }

    #[test]
    fn idx_fixture_loads_back() {
        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("imgs");
        let lp = dir.path().join("lbls");
        write_idx_pair(&ip, &lp, 3, 4, 5, |i, r, c| (i + r + c) as u8, |i| i as u8).unwrap();
        let ds = load_idx(&ip, &lp, Split::Train).unwrap();
        assert_eq!(ds.len(), 3);
        assert_eq!(ds.height(), 4);
        assert_eq!(ds.width(), 5);
        assert_eq!(ds.labels, vec![0, 1, 2]);
        assert!((ds.image(2)[0] - 2.0 / 255.0).abs() < 1e-7);
    }

    #[test]
    fn separable_set_encodes_labels_in_bar_position() {
        let dir = tempfile::tempdir().unwrap();
        let ip = dir.path().join("imgs");
        let lp = dir.path().join("lbls");
        write_separable_idx(&ip, &lp, 20).unwrap();
        let ds = load_idx(&ip, &lp, Split::Train).unwrap();
        // Image 7 (label 7) is bright exactly in column 16.
        let img = ds.image(7);
        assert_eq!(img[10 * 28 + 16], 1.0);
        assert_eq!(img[10 * 28 + 15], 0.0);
        assert_eq!(ds.labels[7], 7);
    }
}
