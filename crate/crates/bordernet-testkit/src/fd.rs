//! Central finite-difference gradient estimation and comparison.

use bordernet_core::Tensor;

/// Estimate d f / d x[i] for every coordinate by central differences with
/// step `h` (applied in f32, the storage precision of the engine).
pub fn central_difference_grad(
    f: &mut dyn FnMut(&Tensor) -> f64,
    x: &Tensor,
    h: f32,
) -> Vec<f64> {
    let mut grad = Vec::with_capacity(x.len());
    let mut probe = x.clone();
    for i in 0..x.len() {
        let original = probe.data()[i];
        probe.data_mut()[i] = original + h;
        let plus = f(&probe);
        probe.data_mut()[i] = original - h;
        let minus = f(&probe);
        probe.data_mut()[i] = original;
        grad.push((plus - minus) / (2.0 * f64::from(h)));
    }
    grad
}

/// One analytic/numeric pair that failed the tolerance.
#[derive(Debug, Clone, Copy)]
pub struct GradMismatch {
    pub index: usize,
    pub analytic: f64,
    pub numeric: f64,
}

/// First coordinate where the analytic gradient disagrees with the numeric
/// estimate: the pair passes if the absolute difference is under
/// `abs_floor`, or the relative error against the larger magnitude is under
/// `rel_tol`.
pub fn find_gradient_mismatch(
    analytic: &[f32],
    numeric: &[f64],
    rel_tol: f64,
    abs_floor: f64,
) -> Option<GradMismatch> {
    assert_eq!(analytic.len(), numeric.len(), "gradient length mismatch");
    for (index, (&a, &n)) in analytic.iter().zip(numeric).enumerate() {
        let a = f64::from(a);
        let diff = (a - n).abs();
        if diff <= abs_floor {
            continue;
        }
        if diff <= rel_tol * a.abs().max(n.abs()) {
            continue;
        }
        return Some(GradMismatch {
            index,
            analytic: a,
            numeric: n,
        });
    }
    None
}
