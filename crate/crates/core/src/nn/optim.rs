//! Adam and AdamW over enumerated parameter tensors.

use serde::{Deserialize, Serialize};

use crate::nn::Tensor;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerAlgorithm {
    /// Classic Adam; weight decay enters the gradient (L2).
    Adam,
    /// Decoupled weight decay.
    AdamW,
}

/// Moment state is keyed by parameter position, so callers must always
/// enumerate parameters in the same order.
#[derive(Debug)]
pub struct Optimizer {
    pub algorithm: OptimizerAlgorithm,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epsilon: f64,
    beta1: f64,
    beta2: f64,
    step_count: u64,
    moments: Vec<(Vec<f64>, Vec<f64>)>,
}

impl Optimizer {
    pub fn new(
        algorithm: OptimizerAlgorithm,
        learning_rate: f64,
        weight_decay: f64,
        epsilon: f64,
    ) -> Self {
        Optimizer {
            algorithm,
            learning_rate,
            weight_decay,
            epsilon,
            beta1: 0.9,
            beta2: 0.999,
            step_count: 0,
            moments: Vec::new(),
        }
    }

    pub fn step(&mut self, params: &mut [&mut Tensor]) {
        if self.moments.is_empty() {
            self.moments = params
                .iter()
                .map(|p| (vec![0.0; p.len()], vec![0.0; p.len()]))
                .collect();
        }
        assert_eq!(self.moments.len(), params.len(), "parameter set changed");
        self.step_count += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step_count as i32);
        let bc2 = 1.0 - self.beta2.powi(self.step_count as i32);

        for (param, (m, v)) in params.iter_mut().zip(self.moments.iter_mut()) {
            for i in 0..param.len() {
                let mut grad = param.g[i];
                if self.algorithm == OptimizerAlgorithm::Adam && self.weight_decay > 0.0 {
                    grad += self.weight_decay * param.v[i];
                }
                m[i] = self.beta1 * m[i] + (1.0 - self.beta1) * grad;
                v[i] = self.beta2 * v[i] + (1.0 - self.beta2) * grad * grad;
                let m_hat = m[i] / bc1;
                let v_hat = v[i] / bc2;
                let mut update = self.learning_rate * m_hat / (v_hat.sqrt() + self.epsilon);
                if self.algorithm == OptimizerAlgorithm::AdamW && self.weight_decay > 0.0 {
                    update += self.learning_rate * self.weight_decay * param.v[i];
                }
                param.v[i] -= update;
            }
        }
    }
}

/// Euclidean norm over all gradients.
pub fn global_grad_norm(params: &[&mut Tensor]) -> f64 {
    params
        .iter()
        .map(|p| p.g.iter().map(|g| g * g).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

/// Scale gradients so their global norm is at most `max_norm`. Returns
/// the pre-clip norm.
pub fn clip_global_norm(params: &mut [&mut Tensor], max_norm: f64) -> f64 {
    let norm = global_grad_norm(params);
    if norm > max_norm && norm > 0.0 {
        let scale = max_norm / norm;
        for p in params.iter_mut() {
            for g in p.g.iter_mut() {
                *g *= scale;
            }
        }
    }
    norm
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Minimize (x-3)^2 by hand-fed gradients.
    #[test]
    fn adam_converges_on_a_parabola() {
        let mut t = Tensor::zeros(1, 1);
        let mut opt = Optimizer::new(OptimizerAlgorithm::Adam, 0.1, 0.0, 1e-8);
        for _ in 0..500 {
            t.g[0] = 2.0 * (t.v[0] - 3.0);
            opt.step(&mut [&mut t]);
        }
        assert!((t.v[0] - 3.0).abs() < 1e-3);
    }

    #[test]
    fn adamw_decay_shrinks_weights_without_gradient() {
        let mut t = Tensor::zeros(1, 1);
        t.v[0] = 1.0;
        let mut opt = Optimizer::new(OptimizerAlgorithm::AdamW, 0.01, 0.1, 1e-8);
        for _ in 0..10 {
            t.zero_grad();
            opt.step(&mut [&mut t]);
        }
        assert!(t.v[0] < 1.0);
        assert!(t.v[0] > 0.9);
    }

    #[test]
    fn clipping_caps_the_norm() {
        let mut a = Tensor::zeros(1, 2);
        a.g = vec![3.0, 4.0];
        let norm = clip_global_norm(&mut [&mut a], 1.0);
        assert!((norm - 5.0).abs() < 1e-12);
        let after = (a.g[0] * a.g[0] + a.g[1] * a.g[1]).sqrt();
        assert!((after - 1.0).abs() < 1e-12);
    }
}
