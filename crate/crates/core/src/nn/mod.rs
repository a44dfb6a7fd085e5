//! Minimal dense neural-net kernels: parameter tensors, linear maps,
//! recurrent stacks, attention pooling, dropout, and Adam-family
//! optimizers. Everything is f64 and single-threaded so runs are
//! bit-reproducible under a fixed seed; backward passes are written by
//! hand and checked against central finite differences in the tests.

mod attention;
mod dropout;
mod lstm;
mod optim;

pub use attention::{AttentionCache, AttentionPool};
pub use dropout::{apply_mask, dropout_mask};
pub use lstm::{BiLstmLayer, LstmStack, StackCache};
pub use optim::{clip_global_norm, global_grad_norm, Optimizer, OptimizerAlgorithm};

use rand::Rng;
use serde::{Deserialize, Serialize};

/// A dense parameter matrix (row-major) with a gradient buffer.
///
/// Gradients are not serialized; call [`Tensor::init_grad`] after
/// deserializing a checkpoint.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Tensor {
    pub rows: usize,
    pub cols: usize,
    pub v: Vec<f64>,
    #[serde(skip)]
    pub g: Vec<f64>,
}

impl PartialEq for Tensor {
    fn eq(&self, other: &Self) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.v == other.v
    }
}

impl Tensor {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Tensor {
            rows,
            cols,
            v: vec![0.0; rows * cols],
            g: vec![0.0; rows * cols],
        }
    }

    /// Uniform init in ±bound.
    pub fn uniform(rows: usize, cols: usize, bound: f64, rng: &mut impl Rng) -> Self {
        let mut t = Tensor::zeros(rows, cols);
        for x in t.v.iter_mut() {
            *x = rng.gen_range(-bound..bound);
        }
        t
    }

    pub fn len(&self) -> usize {
        self.v.len()
    }

    pub fn is_empty(&self) -> bool {
        self.v.is_empty()
    }

    pub fn init_grad(&mut self) {
        self.g = vec![0.0; self.v.len()];
    }

    pub fn zero_grad(&mut self) {
        self.g.iter_mut().for_each(|x| *x = 0.0);
    }

    #[inline]
    pub fn at(&self, row: usize, col: usize) -> f64 {
        self.v[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        &self.v[row * self.cols..(row + 1) * self.cols]
    }

    /// y += W x
    pub fn matvec_add(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.cols);
        debug_assert_eq!(y.len(), self.rows);
        for (r, yr) in y.iter_mut().enumerate() {
            let row = self.row(r);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            *yr += acc;
        }
    }

    /// x_grad += W^T dy
    pub fn matvec_t_add(&self, dy: &[f64], x_grad: &mut [f64]) {
        debug_assert_eq!(dy.len(), self.rows);
        debug_assert_eq!(x_grad.len(), self.cols);
        for (r, d) in dy.iter().enumerate() {
            let row = self.row(r);
            for (xg, w) in x_grad.iter_mut().zip(row) {
                *xg += w * d;
            }
        }
    }

    /// dW += dy ⊗ x
    pub fn accumulate_outer(&mut self, dy: &[f64], x: &[f64]) {
        debug_assert_eq!(dy.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (r, d) in dy.iter().enumerate() {
            let base = r * self.cols;
            for (c, xv) in x.iter().enumerate() {
                self.g[base + c] += d * xv;
            }
        }
    }
}

/// Affine map with uniform ±1/√fan_in init.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Linear {
    pub w: Tensor,
    pub b: Tensor,
}

impl Linear {
    pub fn new(input: usize, output: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (input as f64).sqrt();
        Linear {
            w: Tensor::uniform(output, input, bound, rng),
            b: Tensor::uniform(1, output, bound, rng),
        }
    }

    /// Identity weights, zero bias; square only.
    pub fn identity(n: usize) -> Self {
        let mut w = Tensor::zeros(n, n);
        for i in 0..n {
            w.v[i * n + i] = 1.0;
        }
        Linear {
            w,
            b: Tensor::zeros(1, n),
        }
    }

    pub fn input_size(&self) -> usize {
        self.w.cols
    }

    pub fn output_size(&self) -> usize {
        self.w.rows
    }

    pub fn forward(&self, x: &[f64]) -> Vec<f64> {
        let mut y = self.b.v.clone();
        self.w.matvec_add(x, &mut y);
        y
    }

    /// Accumulates parameter grads and adds the input gradient into `dx`.
    pub fn backward(&mut self, x: &[f64], dy: &[f64], dx: &mut [f64]) {
        self.w.accumulate_outer(dy, x);
        for (bg, d) in self.b.g.iter_mut().zip(dy) {
            *bg += d;
        }
        self.w.matvec_t_add(dy, dx);
    }

    pub fn params(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.w, &mut self.b]
    }
}

/// Numerically stable softmax.
pub fn softmax(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|z| (z - max).exp()).collect();
    let sum: f64 = exps.iter().sum();
    exps.iter().map(|e| e / sum).collect()
}

/// −log p[gold], with probabilities clamped at 1e-12 before the log.
pub fn cross_entropy(probs: &[f64], gold: usize) -> f64 {
    -probs[gold].max(1e-12).ln()
}

/// Gradient of cross-entropy∘softmax with respect to the logits.
pub fn softmax_xent_backward(probs: &[f64], gold: usize) -> Vec<f64> {
    let mut d = probs.to_vec();
    d[gold] -= 1.0;
    d
}

pub fn relu(x: &[f64]) -> Vec<f64> {
    x.iter().map(|v| v.max(0.0)).collect()
}

/// dx += dy ⊙ 1[x > 0]
pub fn relu_backward(x: &[f64], dy: &[f64], dx: &mut [f64]) {
    for ((xv, d), out) in x.iter().zip(dy).zip(dx.iter_mut()) {
        if *xv > 0.0 {
            *out += d;
        }
    }
}
