//! Softmax cross-entropy over class logits.

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;

/// Mean cross-entropy of softmax(logits) against integer labels, plus the
/// gradient with respect to the logits.
///
/// The softmax is max-subtracted for stability and the per-row sums are
/// accumulated in f64. The gradient is (softmax − onehot) / N.
pub fn softmax_cross_entropy(logits: &Tensor, labels: &[u8]) -> Result<(f64, Tensor)> {
    if logits.rank() != 2 {
        return Err(CoreError::ShapeMismatch(format!(
            "softmax_cross_entropy expects [N,K] logits, got {:?}",
            logits.shape()
        )));
    }
    let (n, k) = (logits.dim(0), logits.dim(1));
    if labels.len() != n {
        return Err(CoreError::ShapeMismatch(format!(
            "{} logit rows but {} labels",
            n,
            labels.len()
        )));
    }
    let mut grad = Tensor::zeros(&[n, k]);
    let inv_n = 1.0f64 / n as f64;
    let mut loss_acc = 0.0f64;
    for (row, (&label, grow)) in logits
        .data()
        .chunks_exact(k)
        .zip(labels.iter().zip(grad.data_mut().chunks_exact_mut(k)))
    {
        let label = label as usize;
        if label >= k {
            return Err(CoreError::LabelOutOfRange { label, classes: k });
        }
        let max = row.iter().copied().fold(f32::NEG_INFINITY, f32::max);
        let mut sum = 0.0f64;
        for &z in row {
            sum += f64::from(z - max).exp();
        }
        let log_sum = sum.ln();
        loss_acc += log_sum - f64::from(row[label] - max);
        for (j, (&z, g)) in row.iter().zip(grow.iter_mut()).enumerate() {
            let p = f64::from(z - max).exp() / sum;
            let target = if j == label { 1.0 } else { 0.0 };
            *g = ((p - target) * inv_n) as f32;
        }
    }
    grad.ensure_finite("softmax_cross_entropy grad")?;
    let loss = loss_acc * inv_n;
    if !loss.is_finite() {
        return Err(CoreError::NonFinite("softmax_cross_entropy loss".into()));
    }
    Ok((loss, grad))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_logits_cost_ln_k() {
        let logits = Tensor::filled(&[4, 10], 0.37);
        let labels = [0u8, 3, 7, 9];
        let (loss, _) = softmax_cross_entropy(&logits, &labels).unwrap();
        assert!((loss - 10.0f64.ln()).abs() < 1e-9, "loss = {loss}");
    }

    #[test]
    fn concentrated_logits_drive_loss_to_zero() {
        let mut logits = Tensor::zeros(&[1, 10]);
        logits.data_mut()[4] = 60.0;
        let (loss, _) = softmax_cross_entropy(&logits, &[4]).unwrap();
        assert!(loss < 1e-12, "loss = {loss}");
    }

    #[test]
    fn out_of_range_label_is_rejected() {
        let logits = Tensor::zeros(&[1, 10]);
        assert!(matches!(
            softmax_cross_entropy(&logits, &[10]),
            Err(CoreError::LabelOutOfRange { .. })
        ));
    }

    #[test]
    fn implied_softmax_rows_sum_to_one() {
        let mut rng = crate::rng::stream_rng(5, 0);
        let logits = Tensor::from_vec(
            &[6, 10],
            (0..60).map(|_| crate::rng::next_symmetric_f32(&mut rng, 4.0)).collect(),
        )
        .unwrap();
        let labels = [1u8, 2, 3, 4, 5, 6];
        let (_, grad) = softmax_cross_entropy(&logits, &labels).unwrap();
        // softmax = grad * N + onehot
        for (i, row) in grad.data().chunks_exact(10).enumerate() {
            let mut sum = 0.0f64;
            for (j, &g) in row.iter().enumerate() {
                let p = f64::from(g) * 6.0 + if j == labels[i] as usize { 1.0 } else { 0.0 };
                assert!(p >= 0.0, "negative probability {p}");
                sum += p;
            }
            assert!((sum - 1.0).abs() < 1e-5, "row {i} sums to {sum}");
        }
    }

    #[test]
    fn huge_logits_stay_finite() {
        let logits = Tensor::from_vec(&[1, 3], vec![1e30f32, -1e30, 0.0]).unwrap();
        let (loss, grad) = softmax_cross_entropy(&logits, &[1]).unwrap();
        assert!(loss.is_finite());
        assert!(grad.all_finite());
    }
}
