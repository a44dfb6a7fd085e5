//! Skip-gram with negative sampling over random-walk corpora.

use rand::{Rng, SeedableRng};

use crate::error::{Error, Result};
use crate::graph::table::NetworkEmbeddingTable;
use crate::graph::{splitmix64, MentionGraph, Walk, WalkConfig};

/// Train node vectors from walks. Every node appearing at least
/// `min_count` times across the walks receives a vector of
/// `config.dimension` entries.
pub fn train_node_embeddings(
    graph: &MentionGraph,
    walks: &[Walk],
    config: &WalkConfig,
) -> Result<NetworkEmbeddingTable> {
    config.validate()?;
    if walks.is_empty() {
        return Err(Error::EmptyWalks);
    }

    // vocabulary: nodes meeting min_count, in node-index order
    let mut counts = vec![0usize; graph.node_count()];
    for walk in walks {
        for &node in walk {
            counts[node] += 1;
        }
    }
    let vocab: Vec<usize> = (0..graph.node_count())
        .filter(|&n| counts[n] >= config.min_count)
        .collect();
    let mut vocab_index = vec![usize::MAX; graph.node_count()];
    for (vi, &node) in vocab.iter().enumerate() {
        vocab_index[node] = vi;
    }
    let v = vocab.len();
    let d = config.dimension;
    if v == 0 {
        return Err(Error::EmptyWalks);
    }

    let mut rng = rand::rngs::StdRng::seed_from_u64(splitmix64(config.seed ^ 0x5357_4735));
    let mut input = vec![0.0f64; v * d];
    for x in input.iter_mut() {
        *x = (rng.gen::<f64>() - 0.5) / d as f64;
    }
    let mut output = vec![0.0f64; v * d];

    // unigram^0.75 cumulative distribution for negative sampling
    let mut cumulative = Vec::with_capacity(v);
    let mut acc = 0.0;
    for &node in &vocab {
        acc += (counts[node] as f64).powf(0.75);
        cumulative.push(acc);
    }
    let total_mass = acc;

    let total_tokens: usize = walks.iter().map(|w| w.len()).sum::<usize>() * config.epochs;
    let mut processed = 0usize;
    let min_lr = config.initial_learning_rate * 1e-4;
    let mut grad = vec![0.0f64; d];

    for _ in 0..config.epochs {
        for walk in walks {
            for (i, &center) in walk.iter().enumerate() {
                processed += 1;
                let center_vi = vocab_index[center];
                if center_vi == usize::MAX {
                    continue;
                }
                let lr = (config.initial_learning_rate
                    * (1.0 - processed as f64 / total_tokens as f64))
                    .max(min_lr);
                let reach = rng.gen_range(1..=config.window_size);
                let lo = i.saturating_sub(reach);
                let hi = (i + reach).min(walk.len() - 1);
                for j in lo..=hi {
                    if j == i {
                        continue;
                    }
                    let context_vi = vocab_index[walk[j]];
                    if context_vi == usize::MAX {
                        continue;
                    }
                    sgns_step(
                        &mut input,
                        &mut output,
                        &mut grad,
                        center_vi,
                        context_vi,
                        d,
                        lr,
                        config.negative_samples,
                        &cumulative,
                        total_mass,
                        &mut rng,
                    );
                }
            }
        }
    }

    let mut table = NetworkEmbeddingTable::new(d, graph.structure_hash(), config.config_hash());
    for (vi, &node) in vocab.iter().enumerate() {
        let row = input[vi * d..(vi + 1) * d].to_vec();
        debug_assert!(row.iter().all(|x| x.is_finite()));
        table.insert(graph.id_of(node).to_string(), row)?;
    }
    Ok(table)
}

/// One positive pair plus its negative samples; updates the input row of
/// the center and the output rows of the targets.
#[allow(clippy::too_many_arguments)]
fn sgns_step(
    input: &mut [f64],
    output: &mut [f64],
    grad: &mut [f64],
    center: usize,
    context: usize,
    d: usize,
    lr: f64,
    negatives: usize,
    cumulative: &[f64],
    total_mass: f64,
    rng: &mut impl Rng,
) {
    grad.iter_mut().for_each(|g| *g = 0.0);
    let center_row = center * d;
    for k in 0..=negatives {
        let (target, label) = if k == 0 {
            (context, 1.0)
        } else {
            let mut neg = sample_cumulative(cumulative, total_mass, rng);
            // resample a few times rather than loop forever on tiny vocabs
            for _ in 0..8 {
                if neg != context {
                    break;
                }
                neg = sample_cumulative(cumulative, total_mass, rng);
            }
            if neg == context {
                continue;
            }
            (neg, 0.0)
        };
        let target_row = target * d;
        let mut dot = 0.0;
        for x in 0..d {
            dot += input[center_row + x] * output[target_row + x];
        }
        let score = 1.0 / (1.0 + (-dot).exp());
        let g = (label - score) * lr;
        for x in 0..d {
            grad[x] += g * output[target_row + x];
            output[target_row + x] += g * input[center_row + x];
        }
    }
    for x in 0..d {
        input[center_row + x] += grad[x];
    }
}

fn sample_cumulative(cumulative: &[f64], total_mass: f64, rng: &mut impl Rng) -> usize {
    let u = rng.gen_range(0.0..total_mass);
    match cumulative.binary_search_by(|c| c.partial_cmp(&u).unwrap()) {
        Ok(i) => (i + 1).min(cumulative.len() - 1),
        Err(i) => i.min(cumulative.len() - 1),
    }
}
