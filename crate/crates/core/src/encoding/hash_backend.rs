//! Offline test backend: a bucketed embedding table whose rows are
//! deterministic pseudo-random vectors, so any token maps to the same
//! vector on every machine with no model download. In fine-tune mode the
//! table rows are trainable adapter parameters.

use crate::encoding::{states_from_tokens, EncoderMode, SequenceStates, TokenEncoder};
use crate::graph::{fnv1a_init, fnv1a_str};
use crate::nn::Tensor;

#[derive(Debug, Clone)]
pub struct HashEmbeddingBackend {
    name: String,
    width: usize,
    max_tokens: usize,
    buckets: usize,
    mode: EncoderMode,
    pub table: Tensor,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl HashEmbeddingBackend {
    pub fn new(
        name: impl Into<String>,
        width: usize,
        max_tokens: usize,
        buckets: usize,
        seed: u64,
        mode: EncoderMode,
    ) -> Self {
        let mut table = Tensor::zeros(buckets, width);
        for (i, x) in table.v.iter_mut().enumerate() {
            let bits = splitmix64(seed ^ (i as u64));
            *x = bits as f64 / u64::MAX as f64 - 0.5;
        }
        HashEmbeddingBackend {
            name: name.into(),
            width,
            max_tokens,
            buckets,
            mode,
            table,
        }
    }

    pub fn bucket_of(&self, token: &str) -> usize {
        (fnv1a_str(fnv1a_init(), token) % self.buckets as u64) as usize
    }

    pub fn buckets(&self) -> usize {
        self.buckets
    }
}

impl TokenEncoder for HashEmbeddingBackend {
    fn name(&self) -> &str {
        &self.name
    }

    fn hidden_width(&self) -> usize {
        self.width
    }

    fn max_tokens(&self) -> usize {
        self.max_tokens
    }

    fn mode(&self) -> EncoderMode {
        self.mode
    }

    fn encode(&self, text: &str) -> SequenceStates {
        states_from_tokens(text, self.max_tokens, self.width, |tok| {
            self.table.row(self.bucket_of(tok)).to_vec()
        })
    }

    fn token_rows(&self, text: &str) -> Option<Vec<usize>> {
        Some(
            text.split_whitespace()
                .take(self.max_tokens)
                .map(|t| self.bucket_of(t))
                .collect(),
        )
    }

    fn adapter_params(&mut self) -> Vec<&mut Tensor> {
        vec![&mut self.table]
    }
}
