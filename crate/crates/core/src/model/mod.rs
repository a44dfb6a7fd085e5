//! Fusion of view representations and the classification head.

mod finetune;
mod joint;

pub use finetune::SequenceClassifier;
pub use joint::{
    load_checkpoint, save_checkpoint, Checkpoint, EncodedExample, JointModel, JointModelConfig,
};

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::encoding::{View, ViewRepresentation};
use crate::error::{Error, Result};
use crate::nn::{self, Linear, Tensor};

/// Configured width of each input view's representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewWidths {
    pub description: usize,
    pub location: usize,
    pub tweets: usize,
    pub network: usize,
}

impl Default for ViewWidths {
    fn default() -> Self {
        // text views: 2 × hidden 300; network: projection 150
        ViewWidths {
            description: 600,
            location: 600,
            tweets: 600,
            network: 150,
        }
    }
}

impl ViewWidths {
    pub fn of(&self, view: View) -> usize {
        match view {
            View::Description => self.description,
            View::Location => self.location,
            View::Tweets => self.tweets,
            View::Network => self.network,
            View::Fused => panic!("fused width is derived from the active set"),
        }
    }

    pub fn fused_width(&self, active: &[View]) -> usize {
        active.iter().map(|v| self.of(*v)).sum()
    }
}

/// Which views fuse, in what order, and how the head is shaped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionConfig {
    /// Subset of the four input views; always kept in fusion order.
    pub active_views: Vec<View>,
    /// First classifier layer width (two-layer head only).
    pub first_layer_size: usize,
    pub num_classes: usize,
    /// Dropout rate used throughout the model.
    pub dropout: f64,
}

impl FusionConfig {
    pub fn new(active_views: Vec<View>, num_classes: usize) -> Result<Self> {
        let cfg = FusionConfig {
            active_views,
            first_layer_size: 600,
            num_classes,
            dropout: 0.5,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.active_views.is_empty() {
            return Err(Error::InvalidConfig("active_views is empty".into()));
        }
        let mut sorted = self.active_views.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != self.active_views {
            return Err(Error::InvalidConfig(
                "active_views must be unique and in fusion order (description, location, tweets, network)"
                    .into(),
            ));
        }
        if self.active_views.contains(&View::Fused) {
            return Err(Error::InvalidConfig("fused is not an input view".into()));
        }
        if self.num_classes < 2 {
            return Err(Error::InvalidConfig("need at least two classes".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(Error::InvalidConfig("dropout must be in [0,1)".into()));
        }
        Ok(())
    }
}

/// Concatenate the active views in fusion order.
pub fn fuse(
    views: &BTreeMap<View, ViewRepresentation>,
    config: &FusionConfig,
    widths: &ViewWidths,
) -> Result<ViewRepresentation> {
    config.validate()?;
    let mut out = Vec::with_capacity(widths.fused_width(&config.active_views));
    for view in &config.active_views {
        let rep = views
            .get(view)
            .ok_or_else(|| Error::MissingView(view.name().into()))?;
        let expected = widths.of(*view);
        if rep.width() != expected {
            return Err(Error::WidthMismatch {
                what: format!("view {view}"),
                expected,
                got: rep.width(),
            });
        }
        out.extend_from_slice(rep.vector());
    }
    Ok(ViewRepresentation::new(View::Fused, out))
}

/// One- or two-layer classification head.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HeadVariant {
    /// Softmax over a single affine map of the fused vector.
    OneLayer,
    /// Affine + rectifier, dropout, then the output affine map.
    TwoLayer,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassifierHead {
    pub variant: HeadVariant,
    pub layer1: Option<Linear>,
    pub layer2: Linear,
}

pub struct HeadCache {
    input: Vec<f64>,
    pre_activation: Option<Vec<f64>>,
    activated: Option<Vec<f64>>,
    inner_mask: Option<Vec<f64>>,
    pub probs: Vec<f64>,
}

impl ClassifierHead {
    pub fn new(
        variant: HeadVariant,
        fused_width: usize,
        first_layer_size: usize,
        num_classes: usize,
        rng: &mut impl Rng,
    ) -> Self {
        match variant {
            HeadVariant::OneLayer => ClassifierHead {
                variant,
                layer1: None,
                layer2: Linear::new(fused_width, num_classes, rng),
            },
            HeadVariant::TwoLayer => ClassifierHead {
                variant,
                layer1: Some(Linear::new(fused_width, first_layer_size, rng)),
                layer2: Linear::new(first_layer_size, num_classes, rng),
            },
        }
    }

    pub fn input_width(&self) -> usize {
        match &self.layer1 {
            Some(l1) => l1.input_size(),
            None => self.layer2.input_size(),
        }
    }

    pub fn num_classes(&self) -> usize {
        self.layer2.output_size()
    }

    /// Evaluation-mode probabilities (dropout disabled).
    pub fn forward_probs(&self, fused: &[f64]) -> Result<Vec<f64>> {
        let mut throwaway = rand::rngs::mock::StepRng::new(0, 0);
        Ok(self.forward(fused, false, 0.0, &mut throwaway)?.probs)
    }

    pub fn forward(
        &self,
        fused: &[f64],
        train: bool,
        dropout: f64,
        rng: &mut impl Rng,
    ) -> Result<HeadCache> {
        if fused.len() != self.input_width() {
            return Err(Error::WidthMismatch {
                what: "classifier input".into(),
                expected: self.input_width(),
                got: fused.len(),
            });
        }
        match &self.layer1 {
            None => {
                let logits = self.layer2.forward(fused);
                Ok(HeadCache {
                    input: fused.to_vec(),
                    pre_activation: None,
                    activated: None,
                    inner_mask: None,
                    probs: nn::softmax(&logits),
                })
            }
            Some(l1) => {
                let pre = l1.forward(fused);
                let mut act = nn::relu(&pre);
                let inner_mask = if train && dropout > 0.0 {
                    let m = nn::dropout_mask(act.len(), dropout, rng);
                    nn::apply_mask(&mut act, &m);
                    Some(m)
                } else {
                    None
                };
                let logits = self.layer2.forward(&act);
                Ok(HeadCache {
                    input: fused.to_vec(),
                    pre_activation: Some(pre),
                    activated: Some(act),
                    inner_mask,
                    probs: nn::softmax(&logits),
                })
            }
        }
    }

    /// Backward from the logit gradient; adds the input gradient into
    /// `d_fused`.
    pub fn backward(&mut self, cache: &HeadCache, d_logits: &[f64], d_fused: &mut [f64]) {
        match &mut self.layer1 {
            None => {
                self.layer2.backward(&cache.input, d_logits, d_fused);
            }
            Some(l1) => {
                let act = cache.activated.as_ref().expect("two-layer cache");
                let pre = cache.pre_activation.as_ref().expect("two-layer cache");
                let mut d_act = vec![0.0; act.len()];
                self.layer2.backward(act, d_logits, &mut d_act);
                if let Some(mask) = &cache.inner_mask {
                    nn::apply_mask(&mut d_act, mask);
                }
                let mut d_pre = vec![0.0; pre.len()];
                nn::relu_backward(pre, &d_act, &mut d_pre);
                l1.backward(&cache.input, &d_pre, d_fused);
            }
        }
    }

    pub fn params(&mut self) -> Vec<&mut Tensor> {
        let mut p = Vec::new();
        if let Some(l1) = &mut self.layer1 {
            p.extend(l1.params());
        }
        p.extend(self.layer2.params());
        p
    }
}

/// Probability vector for a fused representation (evaluation mode).
pub fn classify(fused: &ViewRepresentation, head: &ClassifierHead) -> Result<Vec<f64>> {
    head.forward_probs(fused.vector())
}

/// −log p[gold]; batch reductions average this per example.
pub fn cross_entropy_loss(probabilities: &[f64], gold: usize) -> Result<f64> {
    if gold >= probabilities.len() {
        return Err(Error::InvalidClass {
            index: gold,
            num_classes: probabilities.len(),
        });
    }
    Ok(nn::cross_entropy(probabilities, gold))
}

/// Argmax with ties broken toward the lowest index.
pub fn predict(probabilities: &[f64]) -> usize {
    let mut best = 0;
    for (i, p) in probabilities.iter().enumerate().skip(1) {
        if *p > probabilities[best] {
            best = i;
        }
    }
    best
}
