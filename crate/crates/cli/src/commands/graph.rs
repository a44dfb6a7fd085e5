use std::path::PathBuf;

use anyhow::Context;
use clap::Subcommand;

use viewfuse_core::corpus::{load_corpus, CorpusFormat};
use viewfuse_core::graph::{
    build_mention_graph, generate_walks, load_graph, save_embedding_table, save_graph,
    train_node_embeddings, WalkConfig,
};

#[derive(Subcommand)]
pub enum GraphCommand {
    /// Build the mention graph from a corpus
    Build {
        corpus: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print node and edge counts
    Stats { graph: PathBuf },
    /// Train node embeddings over biased random walks
    Embed {
        graph: PathBuf,
        #[arg(long, default_value_t = 300)]
        dim: usize,
        #[arg(long, default_value_t = 10)]
        walks: usize,
        #[arg(long, default_value_t = 80)]
        length: usize,
        #[arg(long, default_value_t = 10)]
        window: usize,
        #[arg(long, default_value_t = 1)]
        min_count: usize,
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        #[arg(long, default_value_t = 1.0)]
        q: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(command: GraphCommand) -> anyhow::Result<()> {
    match command {
        GraphCommand::Build { corpus, out } => {
            let corpus = load_corpus(&corpus, CorpusFormat::Jsonl)?;
            let graph = build_mention_graph(&corpus);
            save_graph(&graph, &out)?;
            println!(
                "{} nodes, {} edges -> {}",
                graph.node_count(),
                graph.edge_count(),
                out.display()
            );
            Ok(())
        }
        GraphCommand::Stats { graph } => {
            let graph = load_graph(&graph)?;
            let isolated = (0..graph.node_count())
                .filter(|&n| graph.degree(n) == 0)
                .count();
            println!("nodes: {}", graph.node_count());
            println!("edges: {}", graph.edge_count());
            println!("isolated nodes: {isolated}");
            Ok(())
        }
        GraphCommand::Embed {
            graph,
            dim,
            walks,
            length,
            window,
            min_count,
            p,
            q,
            seed,
            out,
        } => {
            let graph = load_graph(&graph)?;
            let config = WalkConfig {
                dimension: dim,
                walks_per_source: walks,
                walk_length: length,
                window_size: window,
                min_count,
                return_param: p,
                inout_param: q,
                seed,
                ..WalkConfig::default()
            };
            let walk_list = generate_walks(&graph, &config);
            let table = train_node_embeddings(&graph, &walk_list, &config)
                .context("training node embeddings")?;
            save_embedding_table(&table, &out)?;
            println!(
                "{} vectors of dim {} -> {}",
                table.len(),
                table.dimension(),
                out.display()
            );
            Ok(())
        }
    }
}
