//! 2-D convolution (cross-correlation convention, stride 1, zero padding).
//!
//! The forward pass lowers each image to a column matrix (im2col) and runs a
//! single GEMM per image; the backward pass reuses the same lowering for the
//! kernel gradient and scatters a GEMM result back (col2im) for the input
//! gradient. Accumulation order is fixed, so results are bit-reproducible.

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;

struct ConvGeometry {
    batch: usize,
    c_in: usize,
    h: usize,
    w: usize,
    c_out: usize,
    kh: usize,
    kw: usize,
    h_out: usize,
    w_out: usize,
    pad: usize,
}

fn geometry(input: &Tensor, kernels: &Tensor, pad: usize) -> Result<ConvGeometry> {
    if input.rank() != 4 || kernels.rank() != 4 {
        return Err(CoreError::ShapeMismatch(format!(
            "conv2d expects rank-4 input and kernels, got {:?} and {:?}",
            input.shape(),
            kernels.shape()
        )));
    }
    let (batch, c_in, h, w) = (input.dim(0), input.dim(1), input.dim(2), input.dim(3));
    let (c_out, kc_in, kh, kw) = (
        kernels.dim(0),
        kernels.dim(1),
        kernels.dim(2),
        kernels.dim(3),
    );
    if kc_in != c_in {
        return Err(CoreError::ShapeMismatch(format!(
            "kernel expects {} input channels, input has {}",
            kc_in, c_in
        )));
    }
    if kh > h + 2 * pad || kw > w + 2 * pad {
        return Err(CoreError::ShapeMismatch(format!(
            "kernel {}x{} larger than padded input {}x{}",
            kh,
            kw,
            h + 2 * pad,
            w + 2 * pad
        )));
    }
    Ok(ConvGeometry {
        batch,
        c_in,
        h,
        w,
        c_out,
        kh,
        kw,
        h_out: h + 2 * pad - kh + 1,
        w_out: w + 2 * pad - kw + 1,
        pad,
    })
}

/// Lower one image into `cols` with rows indexed by (c, ky, kx) and columns by
/// (oy, ox). Out-of-bounds taps are zero.
fn im2col(image: &[f32], g: &ConvGeometry, cols: &mut [f32]) {
    let patch = g.h_out * g.w_out;
    debug_assert_eq!(cols.len(), g.c_in * g.kh * g.kw * patch);
    for c in 0..g.c_in {
        let plane = &image[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..g.kh {
            for kx in 0..g.kw {
                let row = ((c * g.kh + ky) * g.kw + kx) * patch;
                for oy in 0..g.h_out {
                    let dst = &mut cols[row + oy * g.w_out..row + (oy + 1) * g.w_out];
                    let iy = oy as isize + ky as isize - g.pad as isize;
                    if iy < 0 || iy >= g.h as isize {
                        dst.fill(0.0);
                        continue;
                    }
                    let iy = iy as usize;
                    // ox maps to ix = ox + kx - pad; copy the in-bounds run.
                    let ox_lo = g.pad.saturating_sub(kx);
                    let ox_hi = (g.w + g.pad - kx).min(g.w_out);
                    dst[..ox_lo.min(g.w_out)].fill(0.0);
                    if ox_lo < ox_hi {
                        let ix_lo = ox_lo + kx - g.pad;
                        dst[ox_lo..ox_hi]
                            .copy_from_slice(&plane[iy * g.w + ix_lo..iy * g.w + ix_lo + (ox_hi - ox_lo)]);
                    }
                    if ox_hi < g.w_out {
                        dst[ox_hi.max(ox_lo)..].fill(0.0);
                    }
                }
            }
        }
    }
}

/// Reverse of `im2col`: accumulate column gradients back onto the image.
fn col2im(cols: &[f32], g: &ConvGeometry, image: &mut [f32]) {
    let patch = g.h_out * g.w_out;
    for c in 0..g.c_in {
        let plane = &mut image[c * g.h * g.w..(c + 1) * g.h * g.w];
        for ky in 0..g.kh {
            for kx in 0..g.kw {
                let row = ((c * g.kh + ky) * g.kw + kx) * patch;
                for oy in 0..g.h_out {
                    let iy = oy as isize + ky as isize - g.pad as isize;
                    if iy < 0 || iy >= g.h as isize {
                        continue;
                    }
                    let iy = iy as usize;
                    let ox_lo = g.pad.saturating_sub(kx);
                    let ox_hi = (g.w + g.pad - kx).min(g.w_out);
                    if ox_lo >= ox_hi {
                        continue;
                    }
                    let ix_lo = ox_lo + kx - g.pad;
                    let src = &cols[row + oy * g.w_out + ox_lo..row + oy * g.w_out + ox_hi];
                    let dst = &mut plane[iy * g.w + ix_lo..iy * g.w + ix_lo + src.len()];
                    for (d, s) in dst.iter_mut().zip(src) {
                        *d += *s;
                    }
                }
            }
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn sgemm(
    m: usize,
    k: usize,
    n: usize,
    a: &[f32],
    rsa: isize,
    csa: isize,
    b: &[f32],
    rsb: isize,
    csb: isize,
    beta: f32,
    c: &mut [f32],
    rsc: isize,
    csc: isize,
) {
    unsafe {
        matrixmultiply::sgemm(
            m,
            k,
            n,
            1.0,
            a.as_ptr(),
            rsa,
            csa,
            b.as_ptr(),
            rsb,
            csb,
            beta,
            c.as_mut_ptr(),
            rsc,
            csc,
        );
    }
}

/// Cross-correlate `input` (N,C_in,H,W) with `kernels` (C_out,C_in,kH,kW).
///
/// Output is (N, C_out, H + 2·pad − kH + 1, W + 2·pad − kW + 1); `bias`, when
/// present, is one value per output channel.
pub fn conv2d_forward(
    input: &Tensor,
    kernels: &Tensor,
    bias: Option<&Tensor>,
    pad: usize,
) -> Result<Tensor> {
    let g = geometry(input, kernels, pad)?;
    if let Some(b) = bias {
        if b.len() != g.c_out {
            return Err(CoreError::ShapeMismatch(format!(
                "bias has {} entries, kernels have {} output channels",
                b.len(),
                g.c_out
            )));
        }
    }
    let patch = g.h_out * g.w_out;
    let k = g.c_in * g.kh * g.kw;
    let mut out = Tensor::zeros(&[g.batch, g.c_out, g.h_out, g.w_out]);
    let mut cols = vec![0.0f32; k * patch];
    let image_len = g.c_in * g.h * g.w;
    let out_len = g.c_out * patch;
    for n in 0..g.batch {
        im2col(&input.data()[n * image_len..(n + 1) * image_len], &g, &mut cols);
        let dst = &mut out.data_mut()[n * out_len..(n + 1) * out_len];
        sgemm(
            g.c_out,
            k,
            patch,
            kernels.data(),
            k as isize,
            1,
            &cols,
            patch as isize,
            1,
            0.0,
            dst,
            patch as isize,
            1,
        );
        if let Some(b) = bias {
            for c in 0..g.c_out {
                let bv = b.data()[c];
                for v in &mut dst[c * patch..(c + 1) * patch] {
                    *v += bv;
                }
            }
        }
    }
    out.ensure_finite("conv2d_forward")?;
    Ok(out)
}

/// Adjoints of [`conv2d_forward`] with respect to input, kernels and bias.
///
/// `upstream` must have the forward output shape; the bias gradient is always
/// returned (callers of bias-free convolutions just drop it).
pub fn conv2d_backward(
    upstream: &Tensor,
    saved_input: &Tensor,
    kernels: &Tensor,
    pad: usize,
) -> Result<(Tensor, Tensor, Tensor)> {
    let g = geometry(saved_input, kernels, pad)?;
    let expected = [g.batch, g.c_out, g.h_out, g.w_out];
    if upstream.shape() != expected {
        return Err(CoreError::ShapeMismatch(format!(
            "upstream gradient has shape {:?}, forward output is {:?}",
            upstream.shape(),
            expected
        )));
    }
    let patch = g.h_out * g.w_out;
    let k = g.c_in * g.kh * g.kw;
    let image_len = g.c_in * g.h * g.w;
    let out_len = g.c_out * patch;

    let mut grad_input = Tensor::zeros(saved_input.shape());
    let mut grad_kernels = Tensor::zeros(kernels.shape());
    let mut grad_bias = Tensor::zeros(&[g.c_out]);

    let mut cols = vec![0.0f32; k * patch];
    let mut grad_cols = vec![0.0f32; k * patch];
    let mut bias_acc = vec![0.0f64; g.c_out];

    for n in 0..g.batch {
        let up = &upstream.data()[n * out_len..(n + 1) * out_len];

        // dL/dK += up · colsᵀ
        im2col(
            &saved_input.data()[n * image_len..(n + 1) * image_len],
            &g,
            &mut cols,
        );
        sgemm(
            g.c_out,
            patch,
            k,
            up,
            patch as isize,
            1,
            &cols,
            1,
            patch as isize,
            1.0,
            grad_kernels.data_mut(),
            k as isize,
            1,
        );

        // dL/dcols = Kᵀ · up, then scatter back onto the image.
        sgemm(
            k,
            g.c_out,
            patch,
            kernels.data(),
            1,
            k as isize,
            up,
            patch as isize,
            1,
            0.0,
            &mut grad_cols,
            patch as isize,
            1,
        );
        col2im(
            &grad_cols,
            &g,
            &mut grad_input.data_mut()[n * image_len..(n + 1) * image_len],
        );

        for c in 0..g.c_out {
            let mut s = 0.0f64;
            for v in &up[c * patch..(c + 1) * patch] {
                s += f64::from(*v);
            }
            bias_acc[c] += s;
        }
    }
    for (dst, acc) in grad_bias.data_mut().iter_mut().zip(&bias_acc) {
        *dst = *acc as f32;
    }

    grad_input.ensure_finite("conv2d_backward grad_input")?;
    grad_kernels.ensure_finite("conv2d_backward grad_kernels")?;
    Ok((grad_input, grad_kernels, grad_bias))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::filter_bank::{make_oriented_filter, Orientation};

    #[test]
    fn all_ones_3x3_sums_to_nine() {
        let input = Tensor::filled(&[1, 1, 3, 3], 1.0);
        let kernel = Tensor::filled(&[1, 1, 3, 3], 1.0);
        let out = conv2d_forward(&input, &kernel, None, 0).unwrap();
        assert_eq!(out.shape(), &[1, 1, 1, 1]);
        assert_eq!(out.data()[0], 9.0);
    }

    #[test]
    fn identity_kernel_passes_input_through() {
        let input =
            Tensor::from_vec(&[1, 1, 2, 3], vec![1.0, -2.0, 3.0, 0.5, 0.0, 4.0]).unwrap();
        let kernel = Tensor::from_vec(&[1, 1, 1, 1], vec![1.0]).unwrap();
        let out = conv2d_forward(&input, &kernel, None, 0).unwrap();
        assert_eq!(out.data(), input.data());
        assert_eq!(out.shape(), input.shape());
    }

    #[test]
    fn impulse_response_is_reflected_kernel() {
        // Centered impulse in a 5x5 image, 7x7 horizontal stripe, pad 3:
        // out(oy,ox) = k(5-oy, 5-ox), the kernel reflected about its center
        // windowed to the output extent.
        let mut input = Tensor::zeros(&[1, 1, 5, 5]);
        let c = input.offset4(0, 0, 2, 2);
        input.data_mut()[c] = 1.0;
        let filt = make_oriented_filter(Orientation::Horizontal, 7, 3).unwrap();
        let kernel = filt.reshape(&[1, 1, 7, 7]).unwrap();
        let out = conv2d_forward(&input, &kernel, None, 3).unwrap();
        assert_eq!(out.shape(), &[1, 1, 5, 5]);
        for oy in 0..5 {
            for ox in 0..5 {
                assert_eq!(out.at4(0, 0, oy, ox), filt.at2(5 - oy, 5 - ox));
            }
        }
    }

    #[test]
    fn channel_mismatch_is_rejected() {
        let input = Tensor::zeros(&[1, 2, 4, 4]);
        let kernel = Tensor::zeros(&[3, 1, 3, 3]);
        let err = conv2d_forward(&input, &kernel, None, 0).unwrap_err();
        assert!(matches!(err, CoreError::ShapeMismatch(_)));
    }

    #[test]
    fn kernel_larger_than_padded_input_is_rejected() {
        let input = Tensor::zeros(&[1, 1, 3, 3]);
        let kernel = Tensor::zeros(&[1, 1, 5, 5]);
        assert!(conv2d_forward(&input, &kernel, None, 0).is_err());
        assert!(conv2d_forward(&input, &kernel, None, 1).is_ok());
    }

    #[test]
    fn zero_upstream_gives_zero_gradients() {
        let input = Tensor::filled(&[2, 1, 4, 4], 0.3);
        let kernel = Tensor::filled(&[2, 1, 3, 3], -0.1);
        let out = conv2d_forward(&input, &kernel, None, 1).unwrap();
        let upstream = Tensor::zeros(out.shape());
        let (gi, gk, gb) = conv2d_backward(&upstream, &input, &kernel, 1).unwrap();
        assert!(gi.iter().all(|&v| v == 0.0));
        assert!(gk.iter().all(|&v| v == 0.0));
        assert!(gb.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn backward_is_linear_in_upstream() {
        let mut rng = crate::rng::stream_rng(11, 0);
        let input = Tensor::from_vec(
            &[1, 2, 5, 5],
            (0..50).map(|_| crate::rng::next_symmetric_f32(&mut rng, 1.0)).collect(),
        )
        .unwrap();
        let kernel = Tensor::from_vec(
            &[3, 2, 3, 3],
            (0..54).map(|_| crate::rng::next_symmetric_f32(&mut rng, 1.0)).collect(),
        )
        .unwrap();
        let out = conv2d_forward(&input, &kernel, None, 1).unwrap();
        let g1 = Tensor::from_vec(
            out.shape(),
            (0..out.len()).map(|_| crate::rng::next_symmetric_f32(&mut rng, 1.0)).collect(),
        )
        .unwrap();
        let g2 = Tensor::from_vec(g1.shape(), g1.iter().map(|v| 2.0 * v).collect()).unwrap();
        let (gi1, gk1, gb1) = conv2d_backward(&g1, &input, &kernel, 1).unwrap();
        let (gi2, gk2, gb2) = conv2d_backward(&g2, &input, &kernel, 1).unwrap();
        for (a, b) in gi1.iter().zip(gi2.iter()) {
            assert!((2.0 * a - b).abs() <= 1e-5);
        }
        for (a, b) in gk1.iter().zip(gk2.iter()) {
            assert!((2.0 * a - b).abs() <= 1e-4);
        }
        for (a, b) in gb1.iter().zip(gb2.iter()) {
            assert!((2.0 * a - b).abs() <= 1e-4);
        }
    }

    #[test]
    fn upstream_shape_is_validated() {
        let input = Tensor::zeros(&[1, 1, 4, 4]);
        let kernel = Tensor::zeros(&[1, 1, 3, 3]);
        let bad = Tensor::zeros(&[1, 1, 4, 4]);
        assert!(conv2d_backward(&bad, &input, &kernel, 0).is_err());
    }
}
