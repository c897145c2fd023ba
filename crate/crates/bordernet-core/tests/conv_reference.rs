//! The GEMM-backed convolution against a quadruple-loop reference.
//!
//! Inputs and kernels are lattice-valued (multiples of 1/256) so both
//! implementations compute exactly representable sums; any disagreement
//! above 1e-5 is a logic bug, not float noise.

use bordernet_core::filter_bank::{make_oriented_filter_bank, normalize_l1};
use bordernet_core::ops::conv2d_forward;
use bordernet_core::rng::stream_rng;
use bordernet_core::Tensor;
use bordernet_testkit::convref::conv2d_reference;
use bordernet_testkit::fixtures::grid_valued;
use rand::Rng;

const TOL: f64 = 1e-5;

fn max_abs_diff(a: &Tensor, b: &Tensor) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter()
        .zip(b.iter())
        .map(|(&x, &y)| (f64::from(x) - f64::from(y)).abs())
        .fold(0.0, f64::max)
}

#[test]
fn gemm_convolution_matches_reference_on_random_shapes() {
    let mut rng = stream_rng(0xCAFE, 1);
    for case in 0..50 {
        let n = rng.gen_range(1..=2);
        let c_in = rng.gen_range(1..=3);
        let c_out = rng.gen_range(1..=4);
        let h = rng.gen_range(1..=9);
        let w = rng.gen_range(1..=9);
        let kh = rng.gen_range(1..=h.min(5));
        let kw = rng.gen_range(1..=w.min(5));
        let pad = rng.gen_range(0..=3);
        let with_bias = rng.gen_bool(0.5);

        let input = grid_valued(&mut rng, &[n, c_in, h, w]);
        let kernels = grid_valued(&mut rng, &[c_out, c_in, kh, kw]);
        let bias = grid_valued(&mut rng, &[c_out]);
        let bias_opt = with_bias.then_some(&bias);

        let fast = conv2d_forward(&input, &kernels, bias_opt, pad).unwrap();
        let slow = conv2d_reference(&input, &kernels, bias_opt, pad);
        let diff = max_abs_diff(&fast, &slow);
        assert!(
            diff <= TOL,
            "case {case} shape {:?} kernel {:?} pad {pad} bias {with_bias}: max diff {diff}",
            input.shape(),
            kernels.shape()
        );
    }
}

#[test]
fn oriented_bank_convolution_matches_reference_on_images() {
    let mut rng = stream_rng(0xCAFE, 2);
    let bank = normalize_l1(&make_oriented_filter_bank()).unwrap();
    let image = bordernet_testkit::fixtures::unit_grid_valued(&mut rng, &[2, 1, 28, 28]);
    for filter in &bank.kernels {
        let fast = conv2d_forward(&image, filter, None, 3).unwrap();
        let slow = conv2d_reference(&image, filter, None, 3);
        assert_eq!(fast.shape(), [2, 1, 28, 28]);
        assert!(max_abs_diff(&fast, &slow) <= TOL);
    }
}

#[test]
fn stride_one_same_padding_preserves_spatial_size() {
    let input = Tensor::zeros(&[1, 1, 28, 28]);
    let kernels = Tensor::zeros(&[1, 1, 7, 7]);
    let out = conv2d_forward(&input, &kernels, None, 3).unwrap();
    assert_eq!(out.shape(), [1, 1, 28, 28]);
}
