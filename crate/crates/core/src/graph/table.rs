//! Trained node-embedding tables and their on-disk cache format.

use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{MentionGraph, WalkConfig};

/// Map from user id to a fixed-width dense vector.
///
/// Users absent from the graph (or filtered by `min_count`) are absent
/// here; [`NetworkEmbeddingTable::input_or_zeros`] supplies the all-zeros
/// fallback the downstream projection expects.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkEmbeddingTable {
    dimension: usize,
    graph_hash: u64,
    config_hash: u64,
    vectors: BTreeMap<String, Vec<f64>>,
}

impl NetworkEmbeddingTable {
    pub fn new(dimension: usize, graph_hash: u64, config_hash: u64) -> Self {
        NetworkEmbeddingTable {
            dimension,
            graph_hash,
            config_hash,
            vectors: BTreeMap::new(),
        }
    }

    pub fn insert(&mut self, user_id: String, vector: Vec<f64>) -> Result<()> {
        if vector.len() != self.dimension {
            return Err(Error::WidthMismatch {
                what: format!("embedding for {user_id}"),
                expected: self.dimension,
                got: vector.len(),
            });
        }
        self.vectors.insert(user_id, vector);
        Ok(())
    }

    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn len(&self) -> usize {
        self.vectors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vectors.is_empty()
    }

    pub fn contains(&self, user_id: &str) -> bool {
        self.vectors.contains_key(user_id)
    }

    pub fn get(&self, user_id: &str) -> Option<&[f64]> {
        self.vectors.get(user_id).map(|v| v.as_slice())
    }

    /// The projection input for a user: their vector, or exact zeros when
    /// they never entered the mention network.
    pub fn input_or_zeros(&self, user_id: &str) -> Vec<f64> {
        self.get(user_id)
            .map(|v| v.to_vec())
            .unwrap_or_else(|| vec![0.0; self.dimension])
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &Vec<f64>)> {
        self.vectors.iter()
    }

    pub fn graph_hash(&self) -> u64 {
        self.graph_hash
    }

    pub fn config_hash(&self) -> u64 {
        self.config_hash
    }
}

/// Cosine similarity; zero when either vector has zero norm.
pub fn cosine(a: &[f64], b: &[f64]) -> f64 {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na: f64 = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb: f64 = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        0.0
    } else {
        dot / (na * nb)
    }
}

/// Write a table as a text file: a header carrying the dimension and the
/// (graph, config) hashes, then one `user_id\tfloats...` line per node.
/// Floats use the shortest round-trip decimal form.
pub fn save_embedding_table(table: &NetworkEmbeddingTable, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let mut out = std::fs::File::create(path).map_err(|e| Error::io(&display, e))?;
    let mut buf = format!(
        "#network-embedding v1 dim={} graph={:016x} config={:016x}\n",
        table.dimension, table.graph_hash, table.config_hash
    );
    for (id, vec) in table.iter() {
        if id.contains('\t') || id.contains('\n') {
            return Err(Error::InvalidConfig(format!(
                "user id {id:?} cannot be stored in the table format"
            )));
        }
        buf.push_str(id);
        buf.push('\t');
        for (i, x) in vec.iter().enumerate() {
            if i > 0 {
                buf.push(' ');
            }
            buf.push_str(&format!("{x}"));
        }
        buf.push('\n');
    }
    out.write_all(buf.as_bytes())
        .map_err(|e| Error::io(&display, e))
}

pub fn load_embedding_table(path: impl AsRef<Path>) -> Result<NetworkEmbeddingTable> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let file = std::fs::File::open(path).map_err(|e| Error::io(&display, e))?;
    let mut lines = BufReader::new(file).lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::parse(&display, 1, "empty table file"))?;
    let header = header.map_err(|e| Error::io(&display, e))?;
    let (dim, graph_hash, config_hash) = parse_header(&header)
        .ok_or_else(|| Error::parse(&display, 1, "malformed table header"))?;

    let mut table = NetworkEmbeddingTable::new(dim, graph_hash, config_hash);
    for (i, line) in lines {
        let lineno = i + 1;
        let line = line.map_err(|e| Error::io(&display, e))?;
        if line.is_empty() {
            continue;
        }
        let (id, rest) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(&display, lineno, "missing tab separator"))?;
        let vector: Vec<f64> = rest
            .split(' ')
            .map(|tok| {
                tok.parse::<f64>()
                    .map_err(|e| Error::parse(&display, lineno, e.to_string()))
            })
            .collect::<Result<_>>()?;
        table.insert(id.to_string(), vector)?;
    }
    Ok(table)
}

fn parse_header(line: &str) -> Option<(usize, u64, u64)> {
    let rest = line.strip_prefix("#network-embedding v1 ")?;
    let mut dim = None;
    let mut graph = None;
    let mut config = None;
    for part in rest.split_whitespace() {
        if let Some(v) = part.strip_prefix("dim=") {
            dim = v.parse().ok();
        } else if let Some(v) = part.strip_prefix("graph=") {
            graph = u64::from_str_radix(v, 16).ok();
        } else if let Some(v) = part.strip_prefix("config=") {
            config = u64::from_str_radix(v, 16).ok();
        }
    }
    Some((dim?, graph?, config?))
}

/// Load a cached table when its header hashes match the graph and config;
/// otherwise train, write the cache, and return the fresh table.
pub fn load_or_train(
    graph: &MentionGraph,
    config: &WalkConfig,
    cache_path: Option<&Path>,
) -> Result<NetworkEmbeddingTable> {
    if let Some(path) = cache_path {
        if path.exists() {
            if let Ok(table) = load_embedding_table(path) {
                if table.graph_hash() == graph.structure_hash()
                    && table.config_hash() == config.config_hash()
                {
                    return Ok(table);
                }
            }
        }
    }
    let walks = crate::graph::generate_walks(graph, config);
    let table = crate::graph::train_node_embeddings(graph, &walks, config)?;
    if let Some(path) = cache_path {
        save_embedding_table(&table, path)?;
    }
    Ok(table)
}
