//! The joint multiview model: per-view encoders, fusion, and head, with
//! hand-written backward passes for every trainable component.
//!
//! Backends stay frozen inside this model; their states arrive
//! precomputed in [`EncodedExample`]. Missing description/location/tweets
//! produce an all-zeros view vector; users outside the mention network
//! arrive as an all-zeros projection input.

use std::collections::BTreeMap;
use std::path::Path;

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::encoding::{SequenceStates, TokenEncoder, View, ViewRepresentation};
use crate::error::{Error, Result};
use crate::model::{ClassifierHead, FusionConfig, HeadCache, HeadVariant, ViewWidths};
use crate::nn::{
    self, apply_mask, dropout_mask, AttentionCache, AttentionPool, Linear, LstmStack, StackCache,
    Tensor,
};

/// Everything needed to build a [`JointModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointModelConfig {
    /// Views the model owns encoders for, in fusion order.
    pub views: Vec<View>,
    /// Views that actually reach the head; subset of `views`.
    pub active_views: Vec<View>,
    pub num_classes: usize,
    pub head: HeadVariant,
    /// Recurrent hidden size per direction (text views pool to 2× this).
    pub text_hidden: usize,
    pub lstm_layers: usize,
    pub attention_size: usize,
    /// Backend state width for description/location.
    pub short_input_width: usize,
    /// Backend state width for the tweet document.
    pub long_input_width: usize,
    /// Node-embedding dimension entering the projection.
    pub network_input_width: usize,
    pub network_projection: usize,
    pub first_layer_size: usize,
    pub dropout: f64,
    pub init_seed: u64,
}

impl Default for JointModelConfig {
    fn default() -> Self {
        JointModelConfig {
            views: View::INPUTS.to_vec(),
            active_views: View::INPUTS.to_vec(),
            num_classes: 3,
            head: HeadVariant::TwoLayer,
            text_hidden: 300,
            lstm_layers: 2,
            attention_size: 300,
            short_input_width: 768,
            long_input_width: 768,
            network_input_width: 300,
            network_projection: 150,
            first_layer_size: 600,
            dropout: 0.5,
            init_seed: 0,
        }
    }
}

impl JointModelConfig {
    pub fn validate(&self) -> Result<()> {
        let canon = |views: &[View]| -> Result<()> {
            if views.is_empty() {
                return Err(Error::InvalidConfig("view list is empty".into()));
            }
            let mut sorted = views.to_vec();
            sorted.sort();
            sorted.dedup();
            if sorted != views {
                return Err(Error::InvalidConfig(
                    "views must be unique and in fusion order".into(),
                ));
            }
            if views.contains(&View::Fused) {
                return Err(Error::InvalidConfig("fused is not an input view".into()));
            }
            Ok(())
        };
        canon(&self.views)?;
        canon(&self.active_views)?;
        for v in &self.active_views {
            if !self.views.contains(v) {
                return Err(Error::InvalidConfig(format!(
                    "active view {v} has no encoder in this model"
                )));
            }
        }
        if self.text_hidden == 0 || self.lstm_layers == 0 {
            return Err(Error::InvalidConfig("recurrent sizes must be >= 1".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("need at least two classes".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig("dropout must be in [0,1)".into()));
        }
        Ok(())
    }

    pub fn widths(&self) -> ViewWidths {
        ViewWidths {
            description: 2 * self.text_hidden,
            location: 2 * self.text_hidden,
            tweets: 2 * self.text_hidden,
            network: self.network_projection,
        }
    }

    pub fn fusion(&self) -> FusionConfig {
        FusionConfig {
            active_views: self.active_views.clone(),
            first_layer_size: self.first_layer_size,
            num_classes: self.num_classes,
            dropout: self.dropout,
        }
    }

    pub fn fused_width(&self) -> usize {
        self.widths().fused_width(&self.active_views)
    }
}

/// Precomputed backend states for one user. `None` text fields mean the
/// user has no such field; the view then contributes exact zeros.
#[derive(Debug, Clone)]
pub struct EncodedExample {
    pub user_id: String,
    pub description: Option<SequenceStates>,
    pub location: Option<SequenceStates>,
    pub tweets: Option<SequenceStates>,
    /// Node embedding, or exact zeros when the user is outside the table.
    pub network_input: Option<Vec<f64>>,
    pub label: Option<usize>,
}

impl EncodedExample {
    pub fn unlabeled(user_id: impl Into<String>) -> Self {
        EncodedExample {
            user_id: user_id.into(),
            description: None,
            location: None,
            tweets: None,
            network_input: None,
            label: None,
        }
    }

    fn states_for(&self, view: View) -> Option<&SequenceStates> {
        match view {
            View::Description => self.description.as_ref(),
            View::Location => self.location.as_ref(),
            View::Tweets => self.tweets.as_ref(),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JointModel {
    pub config: JointModelConfig,
    pub description_encoder: Option<LstmStack>,
    pub location_encoder: Option<LstmStack>,
    pub tweets_encoder: Option<LstmStack>,
    pub tweets_attention: Option<AttentionPool>,
    pub network_projection: Option<Linear>,
    pub head: ClassifierHead,
}

enum ViewCache {
    /// Missing data: the view emitted exact zeros and takes no gradient.
    Zero,
    Text {
        stack: StackCache,
        steps: usize,
        attention: Option<AttentionCache>,
        rep_mask: Option<Vec<f64>>,
    },
    Network {
        input: Vec<f64>,
        rep_mask: Option<Vec<f64>>,
    },
}

pub struct TrainCache {
    view_caches: BTreeMap<View, ViewCache>,
    fused_mask: Option<Vec<f64>>,
    head_cache: HeadCache,
    label: usize,
    pub probs: Vec<f64>,
}

impl JointModel {
    pub fn new(config: JointModelConfig) -> Result<Self> {
        config.validate()?;
        let mut rng = rand::rngs::StdRng::seed_from_u64(config.init_seed);
        let has = |v: View| config.views.contains(&v);

        let description_encoder = has(View::Description).then(|| {
            LstmStack::new(
                config.short_input_width,
                config.text_hidden,
                config.lstm_layers,
                config.dropout,
                &mut rng,
            )
        });
        let location_encoder = has(View::Location).then(|| {
            LstmStack::new(
                config.short_input_width,
                config.text_hidden,
                config.lstm_layers,
                config.dropout,
                &mut rng,
            )
        });
        let tweets_encoder = has(View::Tweets).then(|| {
            LstmStack::new(
                config.long_input_width,
                config.text_hidden,
                config.lstm_layers,
                config.dropout,
                &mut rng,
            )
        });
        let tweets_attention = has(View::Tweets)
            .then(|| AttentionPool::new(2 * config.text_hidden, config.attention_size, &mut rng));
        let network_projection = has(View::Network).then(|| {
            Linear::new(
                config.network_input_width,
                config.network_projection,
                &mut rng,
            )
        });
        let head = ClassifierHead::new(
            config.head,
            config.fused_width(),
            config.first_layer_size,
            config.num_classes,
            &mut rng,
        );
        Ok(JointModel {
            config,
            description_encoder,
            location_encoder,
            tweets_encoder,
            tweets_attention,
            network_projection,
            head,
        })
    }

    fn stack_for(&self, view: View) -> Option<&LstmStack> {
        match view {
            View::Description => self.description_encoder.as_ref(),
            View::Location => self.location_encoder.as_ref(),
            View::Tweets => self.tweets_encoder.as_ref(),
            _ => None,
        }
    }

    /// One view's representation plus its backward cache.
    fn view_forward(
        &self,
        view: View,
        example: &EncodedExample,
        train: bool,
        rng: &mut impl Rng,
    ) -> Result<(Vec<f64>, ViewCache)> {
        let widths = self.config.widths();
        let width = widths.of(view);
        if view == View::Network {
            let projection = self
                .network_projection
                .as_ref()
                .ok_or_else(|| Error::MissingView("network".into()))?;
            let input = example
                .network_input
                .clone()
                .unwrap_or_else(|| vec![0.0; self.config.network_input_width]);
            if input.len() != self.config.network_input_width {
                return Err(Error::WidthMismatch {
                    what: "network input".into(),
                    expected: self.config.network_input_width,
                    got: input.len(),
                });
            }
            let mut rep = projection.forward(&input);
            let rep_mask = if train && self.config.dropout > 0.0 {
                let m = dropout_mask(rep.len(), self.config.dropout, rng);
                apply_mask(&mut rep, &m);
                Some(m)
            } else {
                None
            };
            return Ok((rep, ViewCache::Network { input, rep_mask }));
        }

        let stack = self
            .stack_for(view)
            .ok_or_else(|| Error::MissingView(view.name().into()))?;
        let states = match example.states_for(view) {
            Some(s) => s,
            None => return Ok((vec![0.0; width], ViewCache::Zero)),
        };
        let expected_input = match view {
            View::Tweets => self.config.long_input_width,
            _ => self.config.short_input_width,
        };
        if states.width() != expected_input {
            return Err(Error::WidthMismatch {
                what: format!("{view} backend states"),
                expected: expected_input,
                got: states.width(),
            });
        }
        let xs = states.unmasked_states();
        let (outs, final_state, stack_cache) = stack.forward(&xs, train, rng);
        let (mut rep, attention) = if view == View::Tweets {
            let pool = self.tweets_attention.as_ref().expect("tweets attention");
            let (pooled, cache) = pool.forward(&outs);
            (pooled, Some(cache))
        } else {
            (final_state, None)
        };
        let rep_mask = if train && self.config.dropout > 0.0 {
            let m = dropout_mask(rep.len(), self.config.dropout, rng);
            apply_mask(&mut rep, &m);
            Some(m)
        } else {
            None
        };
        Ok((
            rep,
            ViewCache::Text {
                stack: stack_cache,
                steps: xs.len(),
                attention,
                rep_mask,
            },
        ))
    }

    /// Training forward pass: returns the example loss and the caches the
    /// backward pass consumes.
    pub fn forward_train(
        &self,
        example: &EncodedExample,
        rng: &mut impl Rng,
    ) -> Result<(f64, TrainCache)> {
        let label = example
            .label
            .ok_or_else(|| Error::InvalidConfig("training example has no label".into()))?;
        if label >= self.config.num_classes {
            return Err(Error::InvalidClass {
                index: label,
                num_classes: self.config.num_classes,
            });
        }
        let mut view_caches = BTreeMap::new();
        let mut fused = Vec::with_capacity(self.config.fused_width());
        for &view in &self.config.active_views {
            let (rep, cache) = self.view_forward(view, example, true, rng)?;
            fused.extend_from_slice(&rep);
            view_caches.insert(view, cache);
        }
        let fused_mask = if self.config.dropout > 0.0 {
            let m = dropout_mask(fused.len(), self.config.dropout, rng);
            apply_mask(&mut fused, &m);
            Some(m)
        } else {
            None
        };
        let head_cache = self
            .head
            .forward(&fused, true, self.config.dropout, rng)?;
        let probs = head_cache.probs.clone();
        let loss = nn::cross_entropy(&probs, label);
        Ok((
            loss,
            TrainCache {
                view_caches,
                fused_mask,
                head_cache,
                label,
                probs,
            },
        ))
    }

    /// Accumulate gradients for one example.
    pub fn backward(&mut self, cache: &TrainCache) {
        let d_logits = nn::softmax_xent_backward(&cache.probs, cache.label);
        let mut d_fused = vec![0.0; self.config.fused_width()];
        self.head.backward(&cache.head_cache, &d_logits, &mut d_fused);
        if let Some(mask) = &cache.fused_mask {
            apply_mask(&mut d_fused, mask);
        }

        let widths = self.config.widths();
        let mut offset = 0;
        for &view in &self.config.active_views.clone() {
            let width = widths.of(view);
            let d_rep = &d_fused[offset..offset + width];
            offset += width;
            let view_cache = cache.view_caches.get(&view).expect("cache per active view");
            match view_cache {
                ViewCache::Zero => {}
                ViewCache::Network { input, rep_mask } => {
                    let mut d = d_rep.to_vec();
                    if let Some(m) = rep_mask {
                        apply_mask(&mut d, m);
                    }
                    let projection = self.network_projection.as_mut().expect("projection");
                    let mut d_input = vec![0.0; input.len()];
                    projection.backward(input, &d, &mut d_input);
                }
                ViewCache::Text {
                    stack,
                    steps,
                    attention,
                    rep_mask,
                } => {
                    let mut d = d_rep.to_vec();
                    if let Some(m) = rep_mask {
                        apply_mask(&mut d, m);
                    }
                    match view {
                        View::Tweets => {
                            let pool = self.tweets_attention.as_mut().expect("attention");
                            let attn_cache = attention.as_ref().expect("attention cache");
                            let d_outs = pool.backward(attn_cache, &d);
                            let encoder = self.tweets_encoder.as_mut().expect("tweets stack");
                            encoder.backward(stack, &d_outs, None);
                        }
                        View::Description | View::Location => {
                            let zero_outs =
                                vec![vec![0.0; 2 * self.config.text_hidden]; *steps];
                            let encoder = match view {
                                View::Description => {
                                    self.description_encoder.as_mut().expect("des stack")
                                }
                                _ => self.location_encoder.as_mut().expect("loc stack"),
                            };
                            encoder.backward(stack, &zero_outs, Some(&d));
                        }
                        _ => unreachable!("text cache for non-text view"),
                    }
                }
            }
        }
    }

    /// Evaluation-mode probabilities (dropout off) plus the loss when the
    /// example is labeled.
    pub fn forward_eval(&self, example: &EncodedExample) -> Result<(Vec<f64>, Option<f64>)> {
        let mut throwaway = rand::rngs::mock::StepRng::new(0, 0);
        let mut fused = Vec::with_capacity(self.config.fused_width());
        for &view in &self.config.active_views {
            let (rep, _) = self.view_forward(view, example, false, &mut throwaway)?;
            fused.extend_from_slice(&rep);
        }
        let probs = self.head.forward_probs(&fused)?;
        let loss = example
            .label
            .map(|label| nn::cross_entropy(&probs, label));
        Ok((probs, loss))
    }

    /// Per-view representations in evaluation mode; the zero-fallback
    /// inspection surface.
    pub fn view_vectors(
        &self,
        example: &EncodedExample,
    ) -> Result<BTreeMap<View, ViewRepresentation>> {
        let mut throwaway = rand::rngs::mock::StepRng::new(0, 0);
        let mut out = BTreeMap::new();
        for &view in &self.config.views {
            let (rep, _) = self.view_forward(view, example, false, &mut throwaway)?;
            out.insert(view, ViewRepresentation::new(view, rep));
        }
        Ok(out)
    }

    /// Encode raw text through one text view's path (evaluation mode).
    pub fn encode_view(
        &self,
        text: &str,
        view: View,
        backend: &dyn TokenEncoder,
    ) -> Result<ViewRepresentation> {
        if !view.is_text() {
            return Err(Error::InvalidConfig(format!(
                "encode_view handles text views, not {view}"
            )));
        }
        let mut example = EncodedExample::unlabeled("adhoc");
        let states = backend.encode(text);
        match view {
            View::Description => example.description = Some(states),
            View::Location => example.location = Some(states),
            View::Tweets => example.tweets = Some(states),
            _ => unreachable!(),
        }
        let mut throwaway = rand::rngs::mock::StepRng::new(0, 0);
        let (rep, _) = self.view_forward(view, &example, false, &mut throwaway)?;
        Ok(ViewRepresentation::new(view, rep))
    }

    /// All trainable tensors in a fixed order.
    pub fn params(&mut self) -> Vec<&mut Tensor> {
        let mut p = Vec::new();
        if let Some(s) = &mut self.description_encoder {
            p.extend(s.params());
        }
        if let Some(s) = &mut self.location_encoder {
            p.extend(s.params());
        }
        if let Some(s) = &mut self.tweets_encoder {
            p.extend(s.params());
        }
        if let Some(a) = &mut self.tweets_attention {
            p.extend(a.params());
        }
        if let Some(l) = &mut self.network_projection {
            p.extend(l.params());
        }
        p.extend(self.head.params());
        p
    }

    /// The tensors belonging to one view's encoder.
    pub fn params_for_view(&mut self, view: View) -> Vec<&mut Tensor> {
        match view {
            View::Description => self
                .description_encoder
                .as_mut()
                .map(|s| s.params())
                .unwrap_or_default(),
            View::Location => self
                .location_encoder
                .as_mut()
                .map(|s| s.params())
                .unwrap_or_default(),
            View::Tweets => {
                let mut p = self
                    .tweets_encoder
                    .as_mut()
                    .map(|s| s.params())
                    .unwrap_or_default();
                if let Some(a) = &mut self.tweets_attention {
                    p.extend(a.params());
                }
                p
            }
            View::Network => self
                .network_projection
                .as_mut()
                .map(|l| l.params())
                .unwrap_or_default(),
            View::Fused => Vec::new(),
        }
    }

    pub fn zero_grads(&mut self) {
        for p in self.params() {
            p.zero_grad();
        }
    }

    /// Copy of all parameter values, for checkpoint/restore in memory.
    pub fn snapshot(&mut self) -> Vec<Vec<f64>> {
        self.params().iter().map(|t| t.v.clone()).collect()
    }

    pub fn restore(&mut self, snapshot: &[Vec<f64>]) {
        let mut params = self.params();
        assert_eq!(params.len(), snapshot.len(), "snapshot shape mismatch");
        for (p, s) in params.iter_mut().zip(snapshot) {
            p.v.copy_from_slice(s);
        }
    }

    /// Stable hash of all parameter bits; used to prove isolation.
    pub fn params_digest(&mut self) -> u64 {
        let mut h = 0xcbf29ce484222325u64;
        for p in self.params() {
            for x in &p.v {
                for b in x.to_bits().to_le_bytes() {
                    h ^= b as u64;
                    h = h.wrapping_mul(0x100000001b3);
                }
            }
        }
        h
    }
}

/// On-disk model: parameters, configuration, and backend names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub backends: BTreeMap<View, String>,
    /// Whether retweet bodies joined the tweet document at training time.
    #[serde(default = "default_true")]
    pub include_retweets: bool,
    pub model: JointModel,
}

fn default_true() -> bool {
    true
}

pub fn save_checkpoint(checkpoint: &Checkpoint, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string(checkpoint).expect("checkpoint serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_checkpoint(path: impl AsRef<Path>) -> Result<Checkpoint> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let mut checkpoint: Checkpoint =
        serde_json::from_str(&text).map_err(|e| Error::parse(&display, 1, e.to_string()))?;
    for p in checkpoint.model.params() {
        p.init_grad();
    }
    Ok(checkpoint)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::encoding::{build_backend, BackendRole, EncoderMode};

    pub(crate) fn tiny_config() -> JointModelConfig {
        JointModelConfig {
            text_hidden: 4,
            lstm_layers: 2,
            attention_size: 5,
            short_input_width: 6,
            long_input_width: 6,
            network_input_width: 7,
            network_projection: 3,
            first_layer_size: 8,
            dropout: 0.0,
            init_seed: 17,
            ..JointModelConfig::default()
        }
    }

    fn example_with_everything(backend_width: usize) -> EncodedExample {
        let states = |tokens: usize, seed: u64| {
            let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
            SequenceStates::dense(
                (0..tokens)
                    .map(|_| (0..backend_width).map(|_| rng.gen_range(-0.5..0.5)).collect())
                    .collect(),
            )
            .unwrap()
        };
        EncodedExample {
            user_id: "u".into(),
            description: Some(states(3, 1)),
            location: Some(states(2, 2)),
            tweets: Some(states(5, 3)),
            network_input: Some((0..7).map(|i| 0.1 * i as f64).collect()),
            label: Some(1),
        }
    }

    #[test]
    fn full_model_shapes() {
        let model = JointModel::new(tiny_config()).unwrap();
        let example = example_with_everything(6);
        let (probs, loss) = model.forward_eval(&example).unwrap();
        assert_eq!(probs.len(), 3);
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        assert!(loss.unwrap() > 0.0);
        let views = model.view_vectors(&example).unwrap();
        assert_eq!(views[&View::Description].width(), 8);
        assert_eq!(views[&View::Tweets].width(), 8);
        assert_eq!(views[&View::Network].width(), 3);
    }

    #[test]
    fn missing_text_views_are_exact_zeros() {
        let model = JointModel::new(tiny_config()).unwrap();
        let mut example = example_with_everything(6);
        example.description = None;
        example.location = None;
        let views = model.view_vectors(&example).unwrap();
        assert!(views[&View::Description].vector().iter().all(|x| *x == 0.0));
        assert!(views[&View::Location].vector().iter().all(|x| *x == 0.0));
        assert!(views[&View::Tweets].vector().iter().any(|x| *x != 0.0));
    }

    #[test]
    fn absent_network_user_projects_the_zero_vector() {
        let model = JointModel::new(tiny_config()).unwrap();
        let mut example = example_with_everything(6);
        example.network_input = Some(vec![0.0; 7]);
        let views = model.view_vectors(&example).unwrap();
        // affine map of zeros equals the bias
        let projection = model.network_projection.as_ref().unwrap();
        assert_eq!(views[&View::Network].vector(), &projection.b.v[..]);
    }

    #[test]
    fn identity_projection_passes_input_through() {
        let mut config = tiny_config();
        config.network_input_width = 3;
        config.network_projection = 3;
        let mut model = JointModel::new(config).unwrap();
        model.network_projection = Some(Linear::identity(3));
        let mut example = EncodedExample::unlabeled("u");
        example.network_input = Some(vec![0.5, -1.0, 2.0]);
        let views = model.view_vectors(&example).unwrap();
        assert_eq!(views[&View::Network].vector(), &[0.5, -1.0, 2.0]);
    }

    #[test]
    fn attention_path_differs_from_final_state_path() {
        let model = JointModel::new(tiny_config()).unwrap();
        let backend = build_backend(
            "hash-6",
            BackendRole::ShortText,
            EncoderMode::FrozenFeatures,
        )
        .unwrap();
        let text = "morning flow with breath and balance";
        let des = model
            .encode_view(text, View::Description, backend.as_ref())
            .unwrap();
        let twts = model.encode_view(text, View::Tweets, backend.as_ref()).unwrap();
        assert_eq!(des.width(), twts.width());
        assert_ne!(des.vector(), twts.vector());
    }

    /// Finite-difference check through the whole joint model.
    #[test]
    fn joint_gradients_match_finite_differences() {
        let mut model = JointModel::new(tiny_config()).unwrap();
        let example = example_with_everything(6);
        let mut rng = rand::rngs::StdRng::seed_from_u64(0);

        model.zero_grads();
        let (_, cache) = model.forward_train(&example, &mut rng).unwrap();
        model.backward(&cache);

        let loss_of = |model: &JointModel| -> f64 {
            let (probs, _) = model.forward_eval(&example).unwrap();
            nn::cross_entropy(&probs, 1)
        };
        let eps = 1e-6;
        let n_params = model.params().len();
        let mut checked = 0usize;
        for pi in 0..n_params {
            let plen = model.params()[pi].len();
            // sample a few indices per tensor: the full sweep lives in the
            // per-module tests
            for idx in (0..plen).step_by(7) {
                let analytic = model.params()[pi].g[idx];
                let orig = model.params()[pi].v[idx];
                model.params()[pi].v[idx] = orig + eps;
                let up = loss_of(&model);
                model.params()[pi].v[idx] = orig - eps;
                let dn = loss_of(&model);
                model.params()[pi].v[idx] = orig;
                let numeric = (up - dn) / (2.0 * eps);
                let rel = (analytic - numeric).abs()
                    / analytic.abs().max(numeric.abs()).max(1e-6);
                assert!(rel < 1e-4, "param {pi}[{idx}]: {analytic} vs {numeric}");
                checked += 1;
            }
        }
        assert!(checked > 100);
    }

    #[test]
    fn inactive_views_receive_zero_gradient() {
        let mut config = tiny_config();
        config.active_views = vec![View::Description];
        let mut model = JointModel::new(config).unwrap();
        let example = example_with_everything(6);
        let mut rng = rand::rngs::StdRng::seed_from_u64(1);

        model.zero_grads();
        let (_, cache) = model.forward_train(&example, &mut rng).unwrap();
        model.backward(&cache);

        for view in [View::Location, View::Tweets, View::Network] {
            for p in model.params_for_view(view) {
                assert!(p.g.iter().all(|g| *g == 0.0), "{view} got gradient");
            }
        }
        let des_grads: f64 = model
            .params_for_view(View::Description)
            .iter()
            .map(|p| p.g.iter().map(|g| g.abs()).sum::<f64>())
            .sum();
        assert!(des_grads > 0.0);
    }

    #[test]
    fn eval_is_deterministic_with_dropout_configured() {
        let mut config = tiny_config();
        config.dropout = 0.5;
        let model = JointModel::new(config).unwrap();
        let example = example_with_everything(6);
        let (p1, _) = model.forward_eval(&example).unwrap();
        let (p2, _) = model.forward_eval(&example).unwrap();
        assert_eq!(p1, p2);
    }

    #[test]
    fn checkpoint_round_trips() {
        let mut model = JointModel::new(tiny_config()).unwrap();
        let example = example_with_everything(6);
        let (probs_before, _) = model.forward_eval(&example).unwrap();

        let mut backends = BTreeMap::new();
        backends.insert(View::Description, "hash-6".to_string());
        backends.insert(View::Location, "hash-6".to_string());
        backends.insert(View::Tweets, "hash-6@4096".to_string());
        let f = tempfile::NamedTempFile::new().unwrap();
        save_checkpoint(
            &Checkpoint {
                backends: backends.clone(),
                include_retweets: true,
                model: model.clone(),
            },
            f.path(),
        )
        .unwrap();
        let mut loaded = load_checkpoint(f.path()).unwrap();
        assert_eq!(loaded.backends, backends);
        let (probs_after, _) = loaded.model.forward_eval(&example).unwrap();
        assert_eq!(probs_before, probs_after);
        // grads are usable after load
        let mut rng = rand::rngs::StdRng::seed_from_u64(2);
        let (_, cache) = loaded.model.forward_train(&example, &mut rng).unwrap();
        loaded.model.backward(&cache);
        let _ = model.params_digest();
    }
}
