//! Sequence classifier for the fine-tuned-backend baselines: backend
//! states, mean pooling over tokens, and a single linear output layer.
//! In fine-tune mode the backend's adapter parameters train with the
//! task; in frozen mode only the output layer moves.

use rand::SeedableRng;

use crate::encoding::{EncoderMode, TokenEncoder};
use crate::error::{Error, Result};
use crate::nn::{self, Linear, Tensor};

pub struct SequenceClassifier {
    pub backend: Box<dyn TokenEncoder>,
    pub output: Linear,
}

pub struct SequenceCache {
    pooled: Vec<f64>,
    rows: Option<Vec<usize>>,
    token_count: usize,
    pub probs: Vec<f64>,
    label: usize,
}

impl SequenceClassifier {
    pub fn new(backend: Box<dyn TokenEncoder>, num_classes: usize, seed: u64) -> Self {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        let output = Linear::new(backend.hidden_width(), num_classes, &mut rng);
        SequenceClassifier { backend, output }
    }

    pub fn num_classes(&self) -> usize {
        self.output.output_size()
    }

    fn pool(&self, text: &str) -> (Vec<f64>, usize) {
        let states = self.backend.encode(text);
        let xs = states.unmasked_states();
        let width = self.backend.hidden_width();
        let mut pooled = vec![0.0; width];
        for x in &xs {
            for (p, v) in pooled.iter_mut().zip(x) {
                *p += v;
            }
        }
        let n = xs.len().max(1);
        pooled.iter_mut().for_each(|p| *p /= n as f64);
        (pooled, n)
    }

    pub fn forward_eval(&self, text: &str) -> Vec<f64> {
        let (pooled, _) = self.pool(text);
        nn::softmax(&self.output.forward(&pooled))
    }

    pub fn forward_train(&self, text: &str, label: usize) -> Result<(f64, SequenceCache)> {
        if label >= self.num_classes() {
            return Err(Error::InvalidClass {
                index: label,
                num_classes: self.num_classes(),
            });
        }
        let (pooled, token_count) = self.pool(text);
        let probs = nn::softmax(&self.output.forward(&pooled));
        let loss = nn::cross_entropy(&probs, label);
        let rows = match self.backend.mode() {
            EncoderMode::FineTune => self.backend.token_rows(text),
            EncoderMode::FrozenFeatures => None,
        };
        Ok((
            loss,
            SequenceCache {
                pooled,
                rows,
                token_count,
                probs,
                label,
            },
        ))
    }

    pub fn backward(&mut self, cache: &SequenceCache) {
        let d_logits = nn::softmax_xent_backward(&cache.probs, cache.label);
        let mut d_pooled = vec![0.0; cache.pooled.len()];
        self.output.backward(&cache.pooled, &d_logits, &mut d_pooled);

        if let Some(rows) = &cache.rows {
            if rows.is_empty() {
                return;
            }
            let scale = 1.0 / cache.token_count as f64;
            let mut adapters = self.backend.adapter_params();
            if let Some(table) = adapters.first_mut() {
                let width = table.cols;
                for &row in rows {
                    let base = row * width;
                    for (c, d) in d_pooled.iter().enumerate() {
                        table.g[base + c] += d * scale;
                    }
                }
            }
        }
    }

    /// Parameters the optimizer may move, honoring the backend mode.
    pub fn trainable_params(&mut self) -> Vec<&mut Tensor> {
        let mut p = Vec::new();
        if self.backend.mode() == EncoderMode::FineTune {
            p.extend(self.backend.adapter_params());
        }
        p.extend(self.output.params());
        p
    }

    pub fn zero_grads(&mut self) {
        for p in self.trainable_params() {
            p.zero_grad();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::HashEmbeddingBackend;

    fn classifier(mode: EncoderMode) -> SequenceClassifier {
        let backend = HashEmbeddingBackend::new("hash-8", 8, 16, 32, 3, mode);
        SequenceClassifier::new(Box::new(backend), 3, 5)
    }

    #[test]
    fn probabilities_normalize() {
        let c = classifier(EncoderMode::FrozenFeatures);
        let p = c.forward_eval("lost 5lb in week one");
        assert_eq!(p.len(), 3);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn finetune_moves_adapter_frozen_does_not() {
        use crate::nn::{Optimizer, OptimizerAlgorithm};
        for (mode, expect_change) in [
            (EncoderMode::FineTune, true),
            (EncoderMode::FrozenFeatures, false),
        ] {
            let mut c = classifier(mode);
            let before: Vec<f64> = c.backend.adapter_params()[0].v.clone();
            let mut opt = Optimizer::new(OptimizerAlgorithm::AdamW, 2e-5, 0.01, 1e-8);
            for _ in 0..3 {
                c.zero_grads();
                let (_, cache) = c.forward_train("keto breakfast today", 0).unwrap();
                c.backward(&cache);
                opt.step(&mut c.trainable_params());
            }
            let after: Vec<f64> = c.backend.adapter_params()[0].v.clone();
            assert_eq!(before != after, expect_change, "mode {mode:?}");
        }
    }

    #[test]
    fn adapter_gradients_match_finite_differences() {
        let mut c = classifier(EncoderMode::FineTune);
        let text = "morning yoga flow";
        let label = 2;

        c.zero_grads();
        let (_, cache) = c.forward_train(text, label).unwrap();
        c.backward(&cache);

        // collect analytic grads on used rows
        let rows = c.backend.token_rows(text).unwrap();
        let width = c.backend.hidden_width();
        let eps = 1e-6;
        for &row in &rows {
            for col in 0..width {
                let idx = row * width + col;
                let analytic = c.backend.adapter_params()[0].g[idx];
                let orig = c.backend.adapter_params()[0].v[idx];
                c.backend.adapter_params()[0].v[idx] = orig + eps;
                let up = nn::cross_entropy(&c.forward_eval(text), label);
                c.backend.adapter_params()[0].v[idx] = orig - eps;
                let dn = nn::cross_entropy(&c.forward_eval(text), label);
                c.backend.adapter_params()[0].v[idx] = orig;
                let numeric = (up - dn) / (2.0 * eps);
                let rel = (analytic - numeric).abs()
                    / analytic.abs().max(numeric.abs()).max(1e-6);
                assert!(rel < 1e-4, "row {row} col {col}");
            }
        }
    }

    #[test]
    fn empty_text_still_classifies() {
        let c = classifier(EncoderMode::FineTune);
        let p = c.forward_eval("");
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}
