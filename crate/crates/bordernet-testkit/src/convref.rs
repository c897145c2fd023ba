//! Convolution written directly from its definition.

use bordernet_core::Tensor;

/// Quadruple-loop cross-correlation with zero padding, accumulating in f64.
///
/// Shapes follow the engine's convention: input [N, C_in, H, W], kernels
/// [C_out, C_in, kH, kW], optional bias [C_out]. Panics on malformed shapes
/// — this is test scaffolding, not an API.
pub fn conv2d_reference(
    input: &Tensor,
    kernels: &Tensor,
    bias: Option<&Tensor>,
    pad: usize,
) -> Tensor {
    assert_eq!(input.rank(), 4, "input must be 4-D");
    assert_eq!(kernels.rank(), 4, "kernels must be 4-D");
    let (n, c_in, h, w) = (input.dim(0), input.dim(1), input.dim(2), input.dim(3));
    let (c_out, kc, kh, kw) = (
        kernels.dim(0),
        kernels.dim(1),
        kernels.dim(2),
        kernels.dim(3),
    );
    assert_eq!(c_in, kc, "channel mismatch");
    let h_out = h + 2 * pad + 1 - kh;
    let w_out = w + 2 * pad + 1 - kw;

    let mut out = Tensor::zeros(&[n, c_out, h_out, w_out]);
    for img in 0..n {
        for co in 0..c_out {
            for oy in 0..h_out {
                for ox in 0..w_out {
                    let mut acc = bias.map_or(0.0f64, |b| f64::from(b.data()[co]));
                    for ci in 0..c_in {
                        for ky in 0..kh {
                            for kx in 0..kw {
                                // Position in the padded frame, then back to
                                // input coordinates; out-of-range reads are
                                // the zero padding.
                                let iy = oy + ky;
                                let ix = ox + kx;
                                if iy < pad || ix < pad {
                                    continue;
                                }
                                let (iy, ix) = (iy - pad, ix - pad);
                                if iy >= h || ix >= w {
                                    continue;
                                }
                                acc += f64::from(input.at4(img, ci, iy, ix))
                                    * f64::from(kernels.at4(co, ci, ky, kx));
                            }
                        }
                    }
                    let off = out.offset4(img, co, oy, ox);
                    out.data_mut()[off] = acc as f32;
                }
            }
        }
    }
    out
}
