//! Context-aware attention pooling: score each timestep against a learned
//! context vector, softmax-normalize, and return the weighted sum.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::{softmax, Linear, Tensor};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttentionPool {
    /// Projects a hidden state into score space (attn × input, plus bias).
    pub score: Linear,
    /// Learned context vector, length attn.
    pub context: Tensor,
}

pub struct AttentionCache {
    states: Vec<Vec<f64>>,
    activations: Vec<Vec<f64>>, // tanh(score(h_t))
    pub weights: Vec<f64>,
}

impl AttentionPool {
    pub fn new(input: usize, attention_size: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (attention_size as f64).sqrt();
        AttentionPool {
            score: Linear::new(input, attention_size, rng),
            context: Tensor::uniform(1, attention_size, bound, rng),
        }
    }

    pub fn input_size(&self) -> usize {
        self.score.input_size()
    }

    /// Pool masked sequence states: masked timesteps take no weight.
    pub fn pool_states(
        &self,
        states: &crate::encoding::SequenceStates,
    ) -> crate::error::Result<(Vec<f64>, Vec<f64>)> {
        let unmasked = states.unmasked_states();
        if unmasked.is_empty() {
            return Err(crate::error::Error::AllMasked);
        }
        let (out, cache) = self.forward(&unmasked);
        Ok((out, cache.weights))
    }

    /// Pool a sequence into one vector. Weights are a softmax over
    /// `context · tanh(W h_t + b)`.
    pub fn forward(&self, states: &[Vec<f64>]) -> (Vec<f64>, AttentionCache) {
        assert!(!states.is_empty(), "attention over an empty sequence");
        let mut activations = Vec::with_capacity(states.len());
        let mut scores = Vec::with_capacity(states.len());
        for h in states {
            let z = self.score.forward(h);
            let a: Vec<f64> = z.iter().map(|v| v.tanh()).collect();
            let s: f64 = a.iter().zip(&self.context.v).map(|(x, u)| x * u).sum();
            activations.push(a);
            scores.push(s);
        }
        let weights = softmax(&scores);
        let width = states[0].len();
        let mut out = vec![0.0; width];
        for (w, h) in weights.iter().zip(states) {
            for (o, x) in out.iter_mut().zip(h) {
                *o += w * x;
            }
        }
        (
            out,
            AttentionCache {
                states: states.to_vec(),
                activations,
                weights,
            },
        )
    }

    /// Accumulates parameter grads; returns the gradient on each state.
    pub fn backward(&mut self, cache: &AttentionCache, d_out: &[f64]) -> Vec<Vec<f64>> {
        let steps = cache.states.len();
        let width = cache.states[0].len();
        let mut d_states = vec![vec![0.0; width]; steps];

        // through the weighted sum: dα_t = d_out · h_t, dh_t += α_t d_out
        let mut d_weights = vec![0.0; steps];
        for t in 0..steps {
            d_weights[t] = d_out
                .iter()
                .zip(&cache.states[t])
                .map(|(d, h)| d * h)
                .sum();
            for (dh, d) in d_states[t].iter_mut().zip(d_out) {
                *dh += cache.weights[t] * d;
            }
        }

        // softmax backward: de_t = α_t (dα_t − Σ_s α_s dα_s)
        let dot: f64 = cache
            .weights
            .iter()
            .zip(&d_weights)
            .map(|(w, d)| w * d)
            .sum();
        for t in 0..steps {
            let d_score = cache.weights[t] * (d_weights[t] - dot);
            // through score_t = context · a_t
            let a = &cache.activations[t];
            let mut dz = vec![0.0; a.len()];
            for k in 0..a.len() {
                self.context.g[k] += d_score * a[k];
                dz[k] = d_score * self.context.v[k] * (1.0 - a[k] * a[k]);
            }
            self.score
                .backward(&cache.states[t], &dz, &mut d_states[t]);
        }
        d_states
    }

    pub fn params(&mut self) -> Vec<&mut Tensor> {
        let mut p = self.score.params();
        p.push(&mut self.context);
        p
    }
}
