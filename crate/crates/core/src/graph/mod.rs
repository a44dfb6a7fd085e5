//! Undirected, unweighted user interaction graph and node embeddings.
//!
//! An edge links two corpus users when either one @-mentions or retweets
//! the other. Node vectors come from biased random walks fed to a
//! skip-gram trainer with negative sampling.

mod skipgram;
mod table;
mod walks;

pub use skipgram::train_node_embeddings;
pub use table::{
    cosine, load_embedding_table, load_or_train, save_embedding_table, NetworkEmbeddingTable,
};
pub use walks::{generate_walks, Walk, WalkConfig};

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::Corpus;
use crate::error::{Error, Result};

/// Undirected, unweighted interaction graph over corpus users.
///
/// Nodes are stored as sorted ids; adjacency lists hold sorted indices,
/// so iteration order is stable everywhere.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MentionGraph {
    ids: Vec<String>,
    index: BTreeMap<String, usize>,
    adjacency: Vec<Vec<usize>>,
    edge_count: usize,
}

impl MentionGraph {
    pub fn new(mut node_ids: Vec<String>, edges: &[(String, String)]) -> Result<Self> {
        node_ids.sort();
        node_ids.dedup();
        let index: BTreeMap<String, usize> = node_ids
            .iter()
            .enumerate()
            .map(|(i, id)| (id.clone(), i))
            .collect();
        let mut adjacency = vec![Vec::new(); node_ids.len()];
        let mut graph = MentionGraph {
            ids: node_ids,
            index,
            adjacency: Vec::new(),
            edge_count: 0,
        };
        let mut edge_count = 0;
        for (a, b) in edges {
            let (&ia, &ib) = match (graph.index.get(a), graph.index.get(b)) {
                (Some(x), Some(y)) => (x, y),
                _ => {
                    return Err(Error::InvalidConfig(format!(
                        "edge ({a},{b}) references an unknown node"
                    )))
                }
            };
            if ia == ib {
                continue;
            }
            if !adjacency[ia].contains(&ib) {
                adjacency[ia].push(ib);
                adjacency[ib].push(ia);
                edge_count += 1;
            }
        }
        for neighbors in &mut adjacency {
            neighbors.sort_unstable();
        }
        graph.adjacency = adjacency;
        graph.edge_count = edge_count;
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    pub fn node_ids(&self) -> &[String] {
        &self.ids
    }

    pub fn id_of(&self, node: usize) -> &str {
        &self.ids[node]
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub fn neighbors(&self, node: usize) -> &[usize] {
        &self.adjacency[node]
    }

    pub fn degree(&self, node: usize) -> usize {
        self.adjacency[node].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adjacency[a].binary_search(&b).is_ok()
    }

    pub fn has_edge_ids(&self, a: &str, b: &str) -> bool {
        match (self.index_of(a), self.index_of(b)) {
            (Some(x), Some(y)) => self.has_edge(x, y),
            _ => false,
        }
    }

    /// Edges as sorted (id, id) pairs with id_a < id_b.
    pub fn edge_list(&self) -> Vec<(String, String)> {
        let mut edges = Vec::with_capacity(self.edge_count);
        for (a, neighbors) in self.adjacency.iter().enumerate() {
            for &b in neighbors {
                if a < b {
                    edges.push((self.ids[a].clone(), self.ids[b].clone()));
                }
            }
        }
        edges
    }

    /// FNV-1a hash over the sorted node and edge lists; keys embedding caches.
    pub fn structure_hash(&self) -> u64 {
        let mut h = fnv1a_init();
        for id in &self.ids {
            h = fnv1a_str(h, id);
            h = fnv1a_str(h, "\u{1}");
        }
        for (a, b) in self.edge_list() {
            h = fnv1a_str(h, &a);
            h = fnv1a_str(h, "\u{2}");
            h = fnv1a_str(h, &b);
            h = fnv1a_str(h, "\u{3}");
        }
        h
    }
}

/// Build the interaction graph: nodes are all corpus users; an edge {a,b}
/// exists iff either user mentions the other. Mentions of users outside
/// the corpus and self-mentions are ignored.
pub fn build_mention_graph(corpus: &Corpus) -> MentionGraph {
    let node_ids: Vec<String> = corpus.user_ids().into_iter().map(str::to_owned).collect();
    let mut edges = Vec::new();
    for rec in corpus.records() {
        for target in &rec.mentions {
            if target == &rec.user_id || !corpus.contains(target) {
                continue;
            }
            edges.push((rec.user_id.clone(), target.clone()));
        }
    }
    MentionGraph::new(node_ids, &edges).expect("edges reference corpus users")
}

#[derive(Serialize, Deserialize)]
struct GraphFile {
    nodes: Vec<String>,
    edges: Vec<(String, String)>,
}

/// Write the graph as a JSON document of sorted nodes and edges.
pub fn save_graph(graph: &MentionGraph, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = GraphFile {
        nodes: graph.node_ids().to_vec(),
        edges: graph.edge_list(),
    };
    let text = serde_json::to_string_pretty(&file).expect("graph serializes");
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_graph(path: impl AsRef<Path>) -> Result<MentionGraph> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let file: GraphFile =
        serde_json::from_str(&text).map_err(|e| Error::parse(&display, 1, e.to_string()))?;
    MentionGraph::new(file.nodes, &file.edges)
}

pub(crate) fn fnv1a_init() -> u64 {
    0xcbf29ce484222325
}

pub(crate) fn fnv1a_str(mut h: u64, s: &str) -> u64 {
    for b in s.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

pub(crate) fn fnv1a_u64(mut h: u64, v: u64) -> u64 {
    for b in v.to_le_bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    h
}

/// splitmix64; used to derive independent per-source walk seeds.
pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
    z ^ (z >> 31)
}
