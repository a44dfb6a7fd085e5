//! Stacked bidirectional LSTM with full backpropagation through time.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::nn::dropout::{apply_mask, dropout_mask};
use crate::nn::Tensor;

/// One LSTM direction. Gate layout in the 4h axis is [input, forget,
/// cell, output].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmDirection {
    pub hidden: usize,
    pub w: Tensor, // 4h × input
    pub u: Tensor, // 4h × h
    pub b: Tensor, // 1 × 4h
}

#[derive(Debug, Default)]
pub struct DirectionCache {
    xs: Vec<Vec<f64>>,
    gate_i: Vec<Vec<f64>>,
    gate_f: Vec<Vec<f64>>,
    gate_g: Vec<Vec<f64>>,
    gate_o: Vec<Vec<f64>>,
    cell: Vec<Vec<f64>>,
    tanh_cell: Vec<Vec<f64>>,
    hidden_states: Vec<Vec<f64>>,
}

impl DirectionCache {
    fn len(&self) -> usize {
        self.xs.len()
    }

    fn hidden_at(&self, t: usize) -> &[f64] {
        &self.hidden_states[t]
    }
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

impl LstmDirection {
    pub fn new(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        let bound = 1.0 / (hidden as f64).sqrt();
        LstmDirection {
            hidden,
            w: Tensor::uniform(4 * hidden, input, bound, rng),
            u: Tensor::uniform(4 * hidden, hidden, bound, rng),
            b: Tensor::uniform(1, 4 * hidden, bound, rng),
        }
    }

    /// Process `xs` in the given order from zero initial state.
    pub fn forward(&self, xs: &[Vec<f64>]) -> DirectionCache {
        let h = self.hidden;
        let mut cache = DirectionCache::default();
        let mut prev_h = vec![0.0; h];
        let mut prev_c = vec![0.0; h];
        for x in xs {
            let mut z = self.b.v.clone();
            self.w.matvec_add(x, &mut z);
            self.u.matvec_add(&prev_h, &mut z);

            let mut gi = vec![0.0; h];
            let mut gf = vec![0.0; h];
            let mut gg = vec![0.0; h];
            let mut go = vec![0.0; h];
            let mut c = vec![0.0; h];
            let mut tc = vec![0.0; h];
            let mut hh = vec![0.0; h];
            for k in 0..h {
                gi[k] = sigmoid(z[k]);
                gf[k] = sigmoid(z[h + k]);
                gg[k] = z[2 * h + k].tanh();
                go[k] = sigmoid(z[3 * h + k]);
                c[k] = gf[k] * prev_c[k] + gi[k] * gg[k];
                tc[k] = c[k].tanh();
                hh[k] = go[k] * tc[k];
            }
            cache.xs.push(x.clone());
            cache.gate_i.push(gi);
            cache.gate_f.push(gf);
            cache.gate_g.push(gg);
            cache.gate_o.push(go);
            prev_c = c.clone();
            cache.cell.push(c);
            cache.tanh_cell.push(tc);
            prev_h = hh.clone();
            cache.hidden_states.push(hh);
        }
        cache
    }

    /// Backpropagate through time. `dh_out[t]` is the gradient arriving at
    /// h_t from the layer output; `d_last_h` is an extra gradient on the
    /// final processed hidden state. Returns input gradients per step.
    pub fn backward(
        &mut self,
        cache: &DirectionCache,
        dh_out: &[Vec<f64>],
        d_last_h: Option<&[f64]>,
    ) -> Vec<Vec<f64>> {
        let h = self.hidden;
        let steps = cache.len();
        let mut dxs = vec![vec![0.0; self.w.cols]; steps];
        let mut dh_next = vec![0.0; h];
        let mut dc_next = vec![0.0; h];
        if let Some(d) = d_last_h {
            dh_next.copy_from_slice(d);
        }

        for t in (0..steps).rev() {
            let gi = &cache.gate_i[t];
            let gf = &cache.gate_f[t];
            let gg = &cache.gate_g[t];
            let go = &cache.gate_o[t];
            let tc = &cache.tanh_cell[t];
            let prev_c: &[f64] = if t == 0 { &[] } else { &cache.cell[t - 1] };
            let prev_h: &[f64] = if t == 0 { &[] } else { cache.hidden_at(t - 1) };

            let mut dz = vec![0.0; 4 * h];
            let mut dc = vec![0.0; h];
            for k in 0..h {
                let dh = dh_out[t][k] + dh_next[k];
                let d_o = dh * tc[k];
                dc[k] = dh * go[k] * (1.0 - tc[k] * tc[k]) + dc_next[k];
                let pc = if t == 0 { 0.0 } else { prev_c[k] };
                let d_i = dc[k] * gg[k];
                let d_f = dc[k] * pc;
                let d_g = dc[k] * gi[k];
                dz[k] = d_i * gi[k] * (1.0 - gi[k]);
                dz[h + k] = d_f * gf[k] * (1.0 - gf[k]);
                dz[2 * h + k] = d_g * (1.0 - gg[k] * gg[k]);
                dz[3 * h + k] = d_o * go[k] * (1.0 - go[k]);
            }

            self.w.accumulate_outer(&dz, &cache.xs[t]);
            if t > 0 {
                self.u.accumulate_outer(&dz, prev_h);
            }
            for (bg, d) in self.b.g.iter_mut().zip(&dz) {
                *bg += d;
            }
            self.w.matvec_t_add(&dz, &mut dxs[t]);

            dh_next.iter_mut().for_each(|x| *x = 0.0);
            self.u.matvec_t_add(&dz, &mut dh_next);
            for k in 0..h {
                dc_next[k] = dc[k] * gf[k];
            }
        }
        dxs
    }

    pub fn params(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.w, &mut self.u, &mut self.b]
    }
}

/// Forward + backward directions over one layer; output width is 2h.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BiLstmLayer {
    pub fwd: LstmDirection,
    pub bwd: LstmDirection,
}

pub struct BiLayerCache {
    fwd: DirectionCache,
    bwd: DirectionCache, // over the reversed sequence
    steps: usize,
}

impl BiLstmLayer {
    pub fn new(input: usize, hidden: usize, rng: &mut impl Rng) -> Self {
        BiLstmLayer {
            fwd: LstmDirection::new(input, hidden, rng),
            bwd: LstmDirection::new(input, hidden, rng),
        }
    }

    pub fn hidden(&self) -> usize {
        self.fwd.hidden
    }

    /// Returns per-step outputs `[h_fwd_t, h_bwd_t]` and the cache.
    pub fn forward(&self, xs: &[Vec<f64>]) -> (Vec<Vec<f64>>, BiLayerCache) {
        let steps = xs.len();
        let reversed: Vec<Vec<f64>> = xs.iter().rev().cloned().collect();
        let fwd = self.fwd.forward(xs);
        let bwd = self.bwd.forward(&reversed);
        let h = self.hidden();
        let mut outs = Vec::with_capacity(steps);
        for t in 0..steps {
            let mut o = Vec::with_capacity(2 * h);
            o.extend_from_slice(fwd.hidden_at(t));
            o.extend_from_slice(bwd.hidden_at(steps - 1 - t));
            outs.push(o);
        }
        (outs, BiLayerCache { fwd, bwd, steps })
    }

    /// Last forward state concatenated with last backward state (the
    /// backward direction's state after consuming the whole sequence).
    pub fn final_state(&self, cache: &BiLayerCache) -> Vec<f64> {
        let mut out = Vec::with_capacity(2 * self.hidden());
        out.extend_from_slice(cache.fwd.hidden_at(cache.steps - 1));
        out.extend_from_slice(cache.bwd.hidden_at(cache.steps - 1));
        out
    }

    /// `d_outs[t]` is the gradient on the concatenated output;
    /// `d_final` an extra gradient on the final state.
    pub fn backward(
        &mut self,
        cache: &BiLayerCache,
        d_outs: &[Vec<f64>],
        d_final: Option<&[f64]>,
    ) -> Vec<Vec<f64>> {
        let h = self.hidden();
        let steps = cache.steps;
        let mut d_fwd = vec![vec![0.0; h]; steps];
        let mut d_bwd = vec![vec![0.0; h]; steps]; // in bwd processing order
        for t in 0..steps {
            d_fwd[t].copy_from_slice(&d_outs[t][..h]);
            d_bwd[steps - 1 - t].copy_from_slice(&d_outs[t][h..]);
        }
        let (df, db) = match d_final {
            Some(d) => (Some(&d[..h]), Some(&d[h..])),
            None => (None, None),
        };
        let dx_fwd = self.fwd.backward(&cache.fwd, &d_fwd, df);
        let dx_bwd_rev = self.bwd.backward(&cache.bwd, &d_bwd, db);

        let mut dxs = dx_fwd;
        for t in 0..steps {
            let rev = &dx_bwd_rev[steps - 1 - t];
            for (a, b) in dxs[t].iter_mut().zip(rev) {
                *a += b;
            }
        }
        dxs
    }

    pub fn params(&mut self) -> Vec<&mut Tensor> {
        let mut p = self.fwd.params();
        p.extend(self.bwd.params());
        p
    }
}

/// Stacked bidirectional recurrence with dropout on layer inputs during
/// training (the input dropout covers the backend embedding; the
/// inter-layer masks cover the stack).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LstmStack {
    pub layers: Vec<BiLstmLayer>,
    pub dropout: f64,
}

pub struct StackCache {
    layer_caches: Vec<BiLayerCache>,
    /// Dropout masks applied to each layer's input sequence (empty when
    /// evaluating).
    input_masks: Vec<Vec<Vec<f64>>>,
}

impl LstmStack {
    pub fn new(input: usize, hidden: usize, layers: usize, dropout: f64, rng: &mut impl Rng) -> Self {
        assert!(layers >= 1, "stack needs at least one layer");
        let mut v = Vec::with_capacity(layers);
        v.push(BiLstmLayer::new(input, hidden, rng));
        for _ in 1..layers {
            v.push(BiLstmLayer::new(2 * hidden, hidden, rng));
        }
        LstmStack {
            layers: v,
            dropout,
        }
    }

    pub fn hidden(&self) -> usize {
        self.layers[0].hidden()
    }

    /// Output width of the stack (and of its final state).
    pub fn output_width(&self) -> usize {
        2 * self.hidden()
    }

    /// Run the stack. With `train` set, dropout masks are sampled from
    /// `rng` for every layer input.
    pub fn forward(
        &self,
        xs: &[Vec<f64>],
        train: bool,
        rng: &mut impl Rng,
    ) -> (Vec<Vec<f64>>, Vec<f64>, StackCache) {
        let mut cache = StackCache {
            layer_caches: Vec::with_capacity(self.layers.len()),
            input_masks: Vec::with_capacity(self.layers.len()),
        };
        let mut current: Vec<Vec<f64>> = xs.to_vec();
        for layer in &self.layers {
            let masks: Vec<Vec<f64>> = if train && self.dropout > 0.0 {
                current
                    .iter_mut()
                    .map(|x| {
                        let m = dropout_mask(x.len(), self.dropout, rng);
                        apply_mask(x, &m);
                        m
                    })
                    .collect()
            } else {
                Vec::new()
            };
            let (outs, layer_cache) = layer.forward(&current);
            cache.input_masks.push(masks);
            cache.layer_caches.push(layer_cache);
            current = outs;
        }
        let final_state = self
            .layers
            .last()
            .unwrap()
            .final_state(cache.layer_caches.last().unwrap());
        (current, final_state, cache)
    }

    /// `d_outs` is the gradient on the last layer's per-step outputs (may
    /// be all zeros when only the final state feeds the loss); `d_final`
    /// the gradient on the final state.
    pub fn backward(
        &mut self,
        cache: &StackCache,
        d_outs: &[Vec<f64>],
        d_final: Option<&[f64]>,
    ) -> Vec<Vec<f64>> {
        let mut d_current: Vec<Vec<f64>> = d_outs.to_vec();
        let mut d_final = d_final.map(|d| d.to_vec());
        for (li, layer) in self.layers.iter_mut().enumerate().rev() {
            let mut dxs = layer.backward(
                &cache.layer_caches[li],
                &d_current,
                d_final.take().as_deref(),
            );
            let masks = &cache.input_masks[li];
            if !masks.is_empty() {
                for (dx, m) in dxs.iter_mut().zip(masks) {
                    apply_mask(dx, m);
                }
            }
            d_current = dxs;
        }
        d_current
    }

    pub fn params(&mut self) -> Vec<&mut Tensor> {
        self.layers.iter_mut().flat_map(|l| l.params()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;

    fn toy_inputs(steps: usize, width: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
        (0..steps)
            .map(|_| (0..width).map(|_| rng.gen_range(-1.0..1.0)).collect())
            .collect()
    }

    #[test]
    fn output_and_final_shapes() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let stack = LstmStack::new(5, 7, 2, 0.0, &mut rng);
        let xs = toy_inputs(4, 5, 3);
        let (outs, final_state, _) = stack.forward(&xs, false, &mut rng);
        assert_eq!(outs.len(), 4);
        assert!(outs.iter().all(|o| o.len() == 14));
        assert_eq!(final_state.len(), 14);
    }

    #[test]
    fn reported_hidden_size_yields_width_600() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(0);
        let stack = LstmStack::new(768, 300, 2, 0.5, &mut rng);
        assert_eq!(stack.output_width(), 600);
    }

    #[test]
    fn single_step_final_equals_output() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(4);
        let stack = LstmStack::new(3, 5, 2, 0.0, &mut rng);
        let xs = toy_inputs(1, 3, 8);
        let (outs, final_state, _) = stack.forward(&xs, false, &mut rng);
        assert_eq!(outs[0], final_state);
    }

    /// Full finite-difference check of the stacked BiLSTM: loss is a fixed
    /// linear probe of the final state; every parameter must match.
    #[test]
    fn final_state_gradients_match_finite_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(11);
        let mut stack = LstmStack::new(3, 4, 2, 0.0, &mut rng);
        let xs = toy_inputs(3, 3, 12);
        let probe: Vec<f64> = (0..8).map(|i| 0.3 - 0.07 * i as f64).collect();

        let (_, final_state, cache) = stack.forward(&xs, false, &mut rng);
        let d_outs = vec![vec![0.0; 8]; xs.len()];
        stack.backward(&cache, &d_outs, Some(&probe));
        let _ = final_state;

        let loss = |stack: &LstmStack, rng: &mut rand::rngs::StdRng| -> f64 {
            let (_, fs, _) = stack.forward(&xs, false, rng);
            fs.iter().zip(&probe).map(|(a, b)| a * b).sum()
        };

        let eps = 1e-6;
        let mut max_rel = 0.0f64;
        let n_params = stack.params().len();
        for pi in 0..n_params {
            let plen = stack.params()[pi].len();
            for idx in 0..plen {
                let analytic = stack.params()[pi].g[idx];
                let orig = stack.params()[pi].v[idx];
                stack.params()[pi].v[idx] = orig + eps;
                let up = loss(&stack, &mut rng);
                stack.params()[pi].v[idx] = orig - eps;
                let dn = loss(&stack, &mut rng);
                stack.params()[pi].v[idx] = orig;
                let numeric = (up - dn) / (2.0 * eps);
                if (analytic - numeric).abs() > 1e-9 {
                    let rel = (analytic - numeric).abs()
                        / analytic.abs().max(numeric.abs()).max(1e-6);
                    max_rel = max_rel.max(rel);
                }
            }
        }
        assert!(max_rel < 1e-4, "max relative error {max_rel}");
    }

    /// Same check but through the per-step outputs (attention path).
    #[test]
    fn sequence_output_gradients_match_finite_differences() {
        let mut rng = rand::rngs::StdRng::seed_from_u64(21);
        let mut stack = LstmStack::new(2, 3, 2, 0.0, &mut rng);
        let xs = toy_inputs(4, 2, 22);
        let probes: Vec<Vec<f64>> = (0..4)
            .map(|t| (0..6).map(|i| 0.2 * ((t + i) as f64).sin()).collect())
            .collect();

        let (_, _, cache) = stack.forward(&xs, false, &mut rng);
        stack.backward(&cache, &probes, None);

        let loss = |stack: &LstmStack, rng: &mut rand::rngs::StdRng| -> f64 {
            let (outs, _, _) = stack.forward(&xs, false, rng);
            outs.iter()
                .zip(&probes)
                .map(|(o, p)| o.iter().zip(p).map(|(a, b)| a * b).sum::<f64>())
                .sum()
        };

        let eps = 1e-6;
        let n_params = stack.params().len();
        for pi in 0..n_params {
            let plen = stack.params()[pi].len();
            for idx in 0..plen {
                let analytic = stack.params()[pi].g[idx];
                let orig = stack.params()[pi].v[idx];
                stack.params()[pi].v[idx] = orig + eps;
                let up = loss(&stack, &mut rng);
                stack.params()[pi].v[idx] = orig - eps;
                let dn = loss(&stack, &mut rng);
                stack.params()[pi].v[idx] = orig;
                let numeric = (up - dn) / (2.0 * eps);
                let rel = (analytic - numeric).abs()
                    / analytic.abs().max(numeric.abs()).max(1e-6);
                assert!(rel < 1e-4, "param {pi}[{idx}]: {analytic} vs {numeric}");
            }
        }
    }
}
