//! View vocabulary, per-token sequence states, and pluggable text
//! encoder backends.
//!
//! Real contextual encoders are consumed behind [`TokenEncoder`]; the
//! crate ships two offline implementations so the whole pipeline runs
//! with no downloaded models: a hash-embedding backend (deterministic
//! pseudo-random vectors keyed by token hash, optionally trainable) and
//! a static word-vector backend that can load a `token v1 v2 ...` table.

mod hash_backend;
mod static_backend;

pub use hash_backend::HashEmbeddingBackend;
pub use static_backend::StaticVectorBackend;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::Tensor;

/// One information source about a user. Variant order fixes the fusion
/// concatenation order.
#[derive(
    Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "lowercase")]
pub enum View {
    Description,
    Location,
    Tweets,
    Network,
    Fused,
}

impl View {
    /// The four input views in fusion order.
    pub const INPUTS: [View; 4] = [View::Description, View::Location, View::Tweets, View::Network];

    pub const TEXT: [View; 3] = [View::Description, View::Location, View::Tweets];

    pub fn name(self) -> &'static str {
        match self {
            View::Description => "description",
            View::Location => "location",
            View::Tweets => "tweets",
            View::Network => "network",
            View::Fused => "fused",
        }
    }

    pub fn is_text(self) -> bool {
        matches!(self, View::Description | View::Location | View::Tweets)
    }
}

impl std::fmt::Display for View {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Whether the backend's own parameters train with the task.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EncoderMode {
    FrozenFeatures,
    FineTune,
}

/// Per-token encoder outputs: a T × width matrix plus a validity mask.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceStates {
    states: Vec<Vec<f64>>,
    mask: Vec<bool>,
    width: usize,
}

impl SequenceStates {
    pub fn new(states: Vec<Vec<f64>>, mask: Vec<bool>) -> Result<Self> {
        if states.is_empty() || states.len() != mask.len() {
            return Err(Error::LengthMismatch {
                left: states.len(),
                right: mask.len(),
            });
        }
        if !mask.iter().any(|m| *m) {
            return Err(Error::AllMasked);
        }
        let width = states[0].len();
        for s in &states {
            if s.len() != width {
                return Err(Error::WidthMismatch {
                    what: "sequence state".into(),
                    expected: width,
                    got: s.len(),
                });
            }
            if s.iter().any(|x| !x.is_finite()) {
                return Err(Error::InvalidConfig("non-finite sequence state".into()));
            }
        }
        Ok(SequenceStates {
            states,
            mask,
            width,
        })
    }

    /// All timesteps valid.
    pub fn dense(states: Vec<Vec<f64>>) -> Result<Self> {
        let mask = vec![true; states.len()];
        SequenceStates::new(states, mask)
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn states(&self) -> &[Vec<f64>] {
        &self.states
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    /// Only the unmasked timesteps, in order. Recurrent encoders and
    /// attention operate on this view, so masked padding cannot affect
    /// their outputs.
    pub fn unmasked_states(&self) -> Vec<Vec<f64>> {
        self.states
            .iter()
            .zip(&self.mask)
            .filter(|(_, m)| **m)
            .map(|(s, _)| s.clone())
            .collect()
    }
}

/// A fixed-width dense vector for one view.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViewRepresentation {
    pub view: View,
    vector: Vec<f64>,
}

impl ViewRepresentation {
    pub fn new(view: View, vector: Vec<f64>) -> Self {
        ViewRepresentation { view, vector }
    }

    pub fn zeros(view: View, width: usize) -> Self {
        ViewRepresentation {
            view,
            vector: vec![0.0; width],
        }
    }

    pub fn width(&self) -> usize {
        self.vector.len()
    }

    pub fn vector(&self) -> &[f64] {
        &self.vector
    }

    pub fn into_vector(self) -> Vec<f64> {
        self.vector
    }
}

/// A pretrained (or stand-in) per-token text encoder.
///
/// Implementations own their tokenizer. `encode` must truncate inputs
/// beyond `max_tokens` from the tail and map empty text to a single
/// zero-state timestep.
pub trait TokenEncoder {
    fn name(&self) -> &str;
    fn hidden_width(&self) -> usize;
    fn max_tokens(&self) -> usize;
    fn mode(&self) -> EncoderMode;
    fn encode(&self, text: &str) -> SequenceStates;

    /// Embedding-table rows used per timestep, aligned with `encode`'s
    /// output; `None` when the backend has no trainable rows.
    fn token_rows(&self, _text: &str) -> Option<Vec<usize>> {
        None
    }

    /// Trainable adapter parameters (empty when frozen or stateless).
    fn adapter_params(&mut self) -> Vec<&mut Tensor> {
        Vec::new()
    }
}

/// Default token budget per backend role.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BackendRole {
    /// Description/location class: 512 tokens.
    ShortText,
    /// Concatenated-tweet documents: 4096 tokens.
    LongDocument,
}

impl BackendRole {
    pub fn default_max_tokens(self) -> usize {
        match self {
            BackendRole::ShortText => 512,
            BackendRole::LongDocument => 4096,
        }
    }
}

/// Build a backend from its config name.
///
/// Recognized forms:
/// - `hash-<width>`            hash-embedding backend, role's token budget
/// - `hash-<width>@<max>`      explicit token budget
/// - `static-<width>`          stateless pseudo-random static vectors
/// - `static:<path>`           static vectors loaded from a text table
pub fn build_backend(
    name: &str,
    role: BackendRole,
    mode: EncoderMode,
) -> Result<Box<dyn TokenEncoder>> {
    build_backend_with_budget(name, role, mode, None)
}

/// [`build_backend`] with an explicit token budget overriding both the
/// role default and any `@max` suffix in the name.
pub fn build_backend_with_budget(
    name: &str,
    role: BackendRole,
    mode: EncoderMode,
    budget: Option<usize>,
) -> Result<Box<dyn TokenEncoder>> {
    if let Some(rest) = name.strip_prefix("hash-") {
        let (width, max_tokens) = parse_width_max(rest, role, name)?;
        return Ok(Box::new(HashEmbeddingBackend::new(
            name,
            width,
            budget.unwrap_or(max_tokens),
            4096,
            0x9a17,
            mode,
        )));
    }
    if let Some(path) = name.strip_prefix("static:") {
        let backend = StaticVectorBackend::from_file(
            name,
            path,
            budget.unwrap_or(role.default_max_tokens()),
            mode,
        )?;
        return Ok(Box::new(backend));
    }
    if let Some(rest) = name.strip_prefix("static-") {
        let (width, max_tokens) = parse_width_max(rest, role, name)?;
        return Ok(Box::new(StaticVectorBackend::pseudo(
            name,
            width,
            budget.unwrap_or(max_tokens),
            0x57a7,
            mode,
        )));
    }
    Err(Error::BackendUnavailable {
        name: name.into(),
        reason: "unrecognized backend name".into(),
    })
}

fn parse_width_max(rest: &str, role: BackendRole, name: &str) -> Result<(usize, usize)> {
    let bad = || Error::BackendUnavailable {
        name: name.into(),
        reason: "expected <width> or <width>@<max_tokens>".into(),
    };
    match rest.split_once('@') {
        Some((w, m)) => Ok((
            w.parse().map_err(|_| bad())?,
            m.parse().map_err(|_| bad())?,
        )),
        None => Ok((rest.parse().map_err(|_| bad())?, role.default_max_tokens())),
    }
}

/// Shared encode path for whitespace-tokenizing backends.
pub(crate) fn states_from_tokens(
    text: &str,
    max_tokens: usize,
    width: usize,
    vector_of: impl Fn(&str) -> Vec<f64>,
) -> SequenceStates {
    let tokens: Vec<&str> = text.split_whitespace().take(max_tokens).collect();
    if tokens.is_empty() {
        // empty text flows through the encoders as one zero timestep
        return SequenceStates::dense(vec![vec![0.0; width]]).expect("single zero state");
    }
    let states: Vec<Vec<f64>> = tokens.iter().map(|t| vector_of(t)).collect();
    SequenceStates::dense(states).expect("finite token states")
}
