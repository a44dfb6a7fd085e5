//! Second-order biased random walks.

use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::graph::{fnv1a_init, fnv1a_str, fnv1a_u64, splitmix64, MentionGraph};

/// Walk and skip-gram hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkConfig {
    /// Embedding size.
    pub dimension: usize,
    /// Walks started from each source node.
    pub walks_per_source: usize,
    /// Nodes per walk, including the source.
    pub walk_length: usize,
    /// Skip-gram context window.
    pub window_size: usize,
    /// Minimum walk occurrences for a node to receive a vector.
    pub min_count: usize,
    /// Return bias: higher values discourage stepping back to the
    /// previous node.
    pub return_param: f64,
    /// In-out bias: higher values keep the walk close to the source.
    pub inout_param: f64,
    pub seed: u64,
    /// Negatives drawn per positive pair.
    pub negative_samples: usize,
    /// Passes over the walk corpus.
    pub epochs: usize,
    /// Initial learning rate, decayed linearly over training.
    pub initial_learning_rate: f64,
}

impl Default for WalkConfig {
    fn default() -> Self {
        WalkConfig {
            dimension: 300,
            walks_per_source: 10,
            walk_length: 80,
            window_size: 10,
            min_count: 1,
            return_param: 1.0,
            inout_param: 1.0,
            seed: 0,
            negative_samples: 5,
            epochs: 5,
            initial_learning_rate: 0.025,
        }
    }
}

impl WalkConfig {
    pub fn validate(&self) -> crate::error::Result<()> {
        if self.dimension == 0
            || self.walks_per_source == 0
            || self.walk_length == 0
            || self.window_size == 0
            || self.min_count == 0
        {
            return Err(crate::error::Error::InvalidConfig(
                "walk counts and sizes must be >= 1".into(),
            ));
        }
        if self.return_param <= 0.0 || self.inout_param <= 0.0 {
            return Err(crate::error::Error::InvalidConfig(
                "return and in-out parameters must be positive".into(),
            ));
        }
        Ok(())
    }

    /// Hash of every field that affects the trained table; keys caches.
    pub fn config_hash(&self) -> u64 {
        let mut h = fnv1a_init();
        for v in [
            self.dimension as u64,
            self.walks_per_source as u64,
            self.walk_length as u64,
            self.window_size as u64,
            self.min_count as u64,
            self.seed,
            self.negative_samples as u64,
            self.epochs as u64,
        ] {
            h = fnv1a_u64(h, v);
        }
        for v in [
            self.return_param,
            self.inout_param,
            self.initial_learning_rate,
        ] {
            h = fnv1a_u64(h, v.to_bits());
        }
        h
    }
}

/// One random walk: node indices into the graph, starting at the source.
pub type Walk = Vec<usize>;

/// Generate `walks_per_source` walks from every node, sorted by source.
///
/// Each source draws from its own generator seeded by (seed, node id), so
/// the output is independent of traversal order. Isolated nodes yield
/// length-1 walks.
pub fn generate_walks(graph: &MentionGraph, config: &WalkConfig) -> Vec<Walk> {
    let mut walks = Vec::with_capacity(graph.node_count() * config.walks_per_source);
    for source in 0..graph.node_count() {
        let node_seed = splitmix64(config.seed ^ fnv1a_str(fnv1a_init(), graph.id_of(source)));
        let mut rng = rand::rngs::StdRng::seed_from_u64(node_seed);
        for _ in 0..config.walks_per_source {
            walks.push(single_walk(graph, source, config, &mut rng));
        }
    }
    walks
}

fn single_walk(
    graph: &MentionGraph,
    source: usize,
    config: &WalkConfig,
    rng: &mut impl Rng,
) -> Walk {
    let mut walk = Vec::with_capacity(config.walk_length);
    walk.push(source);
    if graph.degree(source) == 0 {
        return walk;
    }
    while walk.len() < config.walk_length {
        let current = *walk.last().unwrap();
        let neighbors = graph.neighbors(current);
        if neighbors.is_empty() {
            break;
        }
        let next = if walk.len() == 1 {
            // first step: uniform over neighbors
            neighbors[rng.gen_range(0..neighbors.len())]
        } else {
            let previous = walk[walk.len() - 2];
            biased_step(graph, previous, neighbors, config, rng)
        };
        walk.push(next);
    }
    walk
}

/// Sample the next node with the second-order scheme: weight 1/p back to
/// the previous node, 1 to common neighbors of the previous node, 1/q
/// otherwise.
fn biased_step(
    graph: &MentionGraph,
    previous: usize,
    neighbors: &[usize],
    config: &WalkConfig,
    rng: &mut impl Rng,
) -> usize {
    let mut weights = Vec::with_capacity(neighbors.len());
    let mut total = 0.0;
    for &n in neighbors {
        let w = if n == previous {
            1.0 / config.return_param
        } else if graph.has_edge(n, previous) {
            1.0
        } else {
            1.0 / config.inout_param
        };
        total += w;
        weights.push(w);
    }
    let mut target = rng.gen_range(0.0..total);
    for (i, w) in weights.iter().enumerate() {
        if target < *w {
            return neighbors[i];
        }
        target -= w;
    }
    *neighbors.last().unwrap()
}
