//! Parameters and the ADAM optimizer.

use crate::error::{CoreError, Result};
use crate::tensor::Tensor;

/// A value tensor with its gradient buffer and a trainable flag.
///
/// Frozen parameters keep their value bit-identical across optimizer steps;
/// their gradient buffer still exists so backward passes stay uniform.
#[derive(Debug, Clone)]
pub struct Parameter {
    pub name: String,
    pub value: Tensor,
    pub gradient: Tensor,
    pub trainable: bool,
}

impl Parameter {
    pub fn new(name: impl Into<String>, value: Tensor, trainable: bool) -> Self {
        let gradient = Tensor::zeros(value.shape());
        Parameter {
            name: name.into(),
            value,
            gradient,
            trainable,
        }
    }

    pub fn zero_grad(&mut self) {
        self.gradient.data_mut().fill(0.0);
    }
}

/// ADAM state: hyperparameters, step counter, and one moment pair per
/// parameter slot.
#[derive(Debug, Clone)]
pub struct AdamState {
    pub learning_rate: f32,
    pub beta1: f32,
    pub beta2: f32,
    pub epsilon: f32,
    pub step_count: u64,
    first_moment: Vec<Tensor>,
    second_moment: Vec<Tensor>,
}

impl AdamState {
    /// Defaults beyond the learning rate: beta1 0.9, beta2 0.999, eps 1e-8.
    pub fn new(learning_rate: f32, params: &[Parameter]) -> Self {
        AdamState::with_betas(learning_rate, 0.9, 0.999, 1e-8, params)
    }

    pub fn with_betas(
        learning_rate: f32,
        beta1: f32,
        beta2: f32,
        epsilon: f32,
        params: &[Parameter],
    ) -> Self {
        AdamState {
            learning_rate,
            beta1,
            beta2,
            epsilon,
            step_count: 0,
            first_moment: params.iter().map(|p| Tensor::zeros(p.value.shape())).collect(),
            second_moment: params.iter().map(|p| Tensor::zeros(p.value.shape())).collect(),
        }
    }
}

/// One ADAM update with bias correction over every trainable parameter.
///
/// Frozen parameters are untouched. All gradients (trainable or not) are
/// zeroed afterwards, ready for the next batch.
pub fn adam_step(params: &mut [Parameter], state: &mut AdamState) -> Result<()> {
    if params.len() != state.first_moment.len() {
        return Err(CoreError::ShapeMismatch(format!(
            "optimizer state built for {} parameters, got {}",
            state.first_moment.len(),
            params.len()
        )));
    }
    state.step_count += 1;
    let t = state.step_count as i32;
    let bias1 = 1.0 - state.beta1.powi(t);
    let bias2 = 1.0 - state.beta2.powi(t);
    for (i, p) in params.iter_mut().enumerate() {
        if p.trainable {
            if p.gradient.shape() != p.value.shape() {
                return Err(CoreError::ShapeMismatch(format!(
                    "parameter {} gradient shape {:?} != value shape {:?}",
                    p.name,
                    p.gradient.shape(),
                    p.value.shape()
                )));
            }
            let m = state.first_moment[i].data_mut();
            let v = state.second_moment[i].data_mut();
            let g = p.gradient.data();
            let w = p.value.data_mut();
            for j in 0..w.len() {
                m[j] = state.beta1 * m[j] + (1.0 - state.beta1) * g[j];
                v[j] = state.beta2 * v[j] + (1.0 - state.beta2) * g[j] * g[j];
                let m_hat = m[j] / bias1;
                let v_hat = v[j] / bias2;
                w[j] -= state.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
            }
        }
        p.zero_grad();
    }
    Ok(())
}
