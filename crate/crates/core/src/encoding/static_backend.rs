//! Non-contextual token-vector backend: the same vector for a token at
//! every position. Loads a `token v1 v2 ...` text table (optionally with
//! a `count dim` header line), or generates pseudo-random vectors per
//! token when no table is available so the suite runs offline.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::encoding::{states_from_tokens, EncoderMode, SequenceStates, TokenEncoder};
use crate::error::{Error, Result};
use crate::graph::{fnv1a_init, fnv1a_str};

#[derive(Debug, Clone)]
enum Source {
    Table(BTreeMap<String, Vec<f64>>),
    Pseudo { seed: u64 },
}

#[derive(Debug, Clone)]
pub struct StaticVectorBackend {
    name: String,
    width: usize,
    max_tokens: usize,
    mode: EncoderMode,
    source: Source,
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}

impl StaticVectorBackend {
    pub fn pseudo(
        name: impl Into<String>,
        width: usize,
        max_tokens: usize,
        seed: u64,
        mode: EncoderMode,
    ) -> Self {
        StaticVectorBackend {
            name: name.into(),
            width,
            max_tokens,
            mode,
            source: Source::Pseudo { seed },
        }
    }

    pub fn from_file(
        name: impl Into<String>,
        path: impl AsRef<Path>,
        max_tokens: usize,
        mode: EncoderMode,
    ) -> Result<Self> {
        let name = name.into();
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::BackendUnavailable {
            name: name.clone(),
            reason: format!("{}: {e}", path.display()),
        })?;
        let display = path.display().to_string();
        let mut table = BTreeMap::new();
        let mut width = None;
        for (i, line) in BufReader::new(file).lines().enumerate() {
            let lineno = i + 1;
            let line = line.map_err(|e| Error::io(&display, e))?;
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split_whitespace();
            let token = parts.next().unwrap().to_string();
            let values: Vec<f64> = parts
                .map(|p| {
                    p.parse::<f64>()
                        .map_err(|e| Error::parse(&display, lineno, e.to_string()))
                })
                .collect::<Result<_>>()?;
            // word2vec-style `count dim` header line
            if lineno == 1 && values.len() == 1 && token.parse::<usize>().is_ok() {
                continue;
            }
            match width {
                None => width = Some(values.len()),
                Some(w) if w != values.len() => {
                    return Err(Error::parse(
                        &display,
                        lineno,
                        format!("vector width {} != {w}", values.len()),
                    ))
                }
                _ => {}
            }
            table.insert(token, values);
        }
        let width = width.ok_or_else(|| Error::BackendUnavailable {
            name: name.clone(),
            reason: "vector table is empty".into(),
        })?;
        Ok(StaticVectorBackend {
            name,
            width,
            max_tokens,
            mode,
            source: Source::Table(table),
        })
    }

    fn vector_of(&self, token: &str) -> Vec<f64> {
        match &self.source {
            // out-of-vocabulary tokens map to zeros
            Source::Table(table) => table
                .get(token)
                .cloned()
                .unwrap_or_else(|| vec![0.0; self.width]),
            Source::Pseudo { seed } => {
                let base = fnv1a_str(fnv1a_init(), token) ^ seed;
                (0..self.width)
                    .map(|i| splitmix64(base ^ (i as u64)) as f64 / u64::MAX as f64 - 0.5)
                    .collect()
            }
        }
    }
}

impl TokenEncoder for StaticVectorBackend {
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
        states_from_tokens(text, self.max_tokens, self.width, |tok| self.vector_of(tok))
    }
}
