mod commands;

use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "viewfuse",
    about = "Multiview social-media user profiling: corpus tools, mention-graph embeddings, experiment suite, and corpus analytics",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Corpus validation and splitting
    Corpus {
        #[command(subcommand)]
        command: commands::corpus::CorpusCommand,
    },
    /// Mention-graph construction, stats, and node embeddings
    Graph {
        #[command(subcommand)]
        command: commands::graph::GraphCommand,
    },
    /// Train one configured experiment
    Train(commands::train::TrainArgs),
    /// Evaluate a checkpoint with a confusion breakdown
    Eval(commands::eval::EvalArgs),
    /// Run or inspect the experiment suite
    Suite {
        #[command(subcommand)]
        command: commands::suite::SuiteCommand,
    },
    /// Hashtag, term, and location analytics
    Analyze {
        #[command(subcommand)]
        command: commands::analyze::AnalyzeCommand,
    },
    /// Emit a deterministic synthetic corpus
    Synthetic(commands::synthetic::SyntheticArgs),
}

fn main() -> anyhow::Result<()> {
    let cli = Cli::parse();
    match cli.command {
        Command::Corpus { command } => commands::corpus::run(command),
        Command::Graph { command } => commands::graph::run(command),
        Command::Train(args) => commands::train::run(args),
        Command::Eval(args) => commands::eval::run(args),
        Command::Suite { command } => commands::suite::run(command),
        Command::Analyze { command } => commands::analyze::run(command),
        Command::Synthetic(args) => commands::synthetic::run(args),
    }
}
