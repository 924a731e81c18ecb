//! Adam with bias correction.

use thiserror::Error;

use super::layers::Parameter;
use super::tensor::Tensor;

#[derive(Debug, Error)]
pub enum AdamError {
    #[error("adam step before any backward pass populated gradients")]
    NoGradients,
    #[error("parameter count changed between steps: had {had}, got {got}")]
    ParameterMismatch { had: usize, got: usize },
}

#[derive(Debug, Clone)]
pub struct AdamState {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub step: u64,
    first_moment: Vec<Tensor>,
    second_moment: Vec<Tensor>,
}

impl AdamState {
    pub fn new(lr: f64) -> Self {
        AdamState {
            lr,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            step: 0,
            first_moment: Vec::new(),
            second_moment: Vec::new(),
        }
    }

    /// Apply one update from the accumulated gradients. Parameter order must
    /// stay fixed across calls.
    pub fn step(&mut self, params: &mut [&mut Parameter]) -> Result<(), AdamError> {
        if params.iter().all(|p| p.grad.data().iter().all(|g| *g == 0.0)) && self.step == 0 {
            return Err(AdamError::NoGradients);
        }
        if self.first_moment.is_empty() {
            self.first_moment = params.iter().map(|p| Tensor::zeros(p.value.shape())).collect();
            self.second_moment = self.first_moment.clone();
        } else if self.first_moment.len() != params.len() {
            return Err(AdamError::ParameterMismatch {
                had: self.first_moment.len(),
                got: params.len(),
            });
        }
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step as i32);
        for (idx, p) in params.iter_mut().enumerate() {
            let m = self.first_moment[idx].data_mut();
            let v = self.second_moment[idx].data_mut();
            let grads = p.grad.data();
            let values = p.value.data_mut();
            for k in 0..values.len() {
                let g = grads[k];
                m[k] = self.beta1 * m[k] + (1.0 - self.beta1) * g;
                v[k] = self.beta2 * v[k] + (1.0 - self.beta2) * g * g;
                let m_hat = m[k] / bc1;
                let v_hat = v[k] / bc2;
                values[k] -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn param(values: Vec<f64>) -> Parameter {
        let n = values.len();
        Parameter::new("w", Tensor::from_vec(&[n], values).unwrap())
    }

    #[test]
    fn first_step_is_signed_learning_rate() {
        let mut p = param(vec![1.0, -2.0]);
        p.grad.data_mut()[0] = 0.3;
        p.grad.data_mut()[1] = -0.7;
        let mut adam = AdamState::new(0.01);
        adam.step(&mut [&mut p]).unwrap();
        // Bias-corrected first step: update ~ -lr * sign(g).
        assert!((p.value.data()[0] - (1.0 - 0.01)).abs() < 1e-6);
        assert!((p.value.data()[1] - (-2.0 + 0.01)).abs() < 1e-6);
    }

    #[test]
    fn zero_gradient_leaves_parameters_unchanged() {
        let mut p = param(vec![0.5, 1.5]);
        p.grad.data_mut()[0] = 1.0;
        let mut adam = AdamState::new(0.01);
        adam.step(&mut [&mut p]).unwrap();
        let after_first = p.value.data().to_vec();
        // Second component never saw a gradient: unchanged.
        assert_eq!(after_first[1], 1.5);
        p.zero_grad();
        adam.step(&mut [&mut p]).unwrap();
        // With m = v = decayed state and zero grad the first component moves
        // slightly (momentum), but the untouched one must stay put.
        assert_eq!(p.value.data()[1], 1.5);
    }

    #[test]
    fn descends_a_quadratic() {
        // f(w) = w^2, grad = 2w.
        let mut p = param(vec![3.0]);
        let mut adam = AdamState::new(0.05);
        let f = |w: f64| w * w;
        let start = f(p.value.data()[0]);
        for _ in 0..2 {
            p.zero_grad();
            p.grad.data_mut()[0] = 2.0 * p.value.data()[0];
            adam.step(&mut [&mut p]).unwrap();
        }
        assert!(f(p.value.data()[0]) < start);
    }

    #[test]
    fn step_without_gradients_errors() {
        let mut p = param(vec![1.0]);
        let mut adam = AdamState::new(0.01);
        assert!(adam.step(&mut [&mut p]).is_err());
    }
}
