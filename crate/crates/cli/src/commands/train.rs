use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::Args;

use viewfuse_core::corpus::{load_corpus, split_corpus, CorpusFormat};
use viewfuse_core::encoding::View;
use viewfuse_core::experiments::{load_configs, run_experiment_full, SuiteShared};
use viewfuse_core::graph::save_embedding_table;
use viewfuse_core::model::save_checkpoint;

#[derive(Args)]
pub struct TrainArgs {
    /// Experiment file (TOML, one or more [[experiment]] blocks)
    #[arg(long)]
    pub config: PathBuf,
    /// Corpus file (JSONL)
    #[arg(long)]
    pub corpus: PathBuf,
    /// Experiment to run when the file holds several
    #[arg(long)]
    pub name: Option<String>,
    /// Override the experiment seed (also drives the split)
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory for report, trace, and checkpoint
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run(args: TrainArgs) -> anyhow::Result<()> {
    let configs = load_configs(&args.config)?;
    let mut config = match (&args.name, configs.len()) {
        (Some(name), _) => configs
            .iter()
            .find(|c| &c.name == name)
            .cloned()
            .with_context(|| format!("no experiment named `{name}` in the file"))?,
        (None, 1) => configs.into_iter().next().unwrap(),
        (None, n) => bail!("config file holds {n} experiments; pick one with --name"),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
        config.optimizer.seed = seed;
    }

    let corpus = load_corpus(&args.corpus, CorpusFormat::Jsonl)?;
    let splits = split_corpus(&corpus, config.seed)?;
    std::fs::create_dir_all(&args.out)
        .with_context(|| format!("creating {}", args.out.display()))?;

    let mut shared = SuiteShared::new(&corpus);
    let (result, checkpoint) = run_experiment_full(&config, &corpus, &splits, &mut shared)?;

    std::fs::write(
        args.out.join("splits.json"),
        serde_json::to_string_pretty(&splits)?,
    )?;
    std::fs::write(
        args.out.join("report.json"),
        serde_json::to_string_pretty(&result.report)?,
    )?;
    std::fs::write(args.out.join("trace.csv"), result.trace.to_csv())?;
    if let Some(checkpoint) = checkpoint {
        save_checkpoint(&checkpoint, args.out.join("checkpoint.json"))?;
    }
    if config.active_views.contains(&View::Network) {
        // the table evaluation needs later, derived exactly as in training
        let table = shared.table_for(&config.walk)?;
        save_embedding_table(table, args.out.join("emb.tbl"))?;
    }

    println!(
        "{}: test accuracy {:.3}, macro-f1 {:.3} (epoch {}{})",
        result.name,
        result.report.accuracy,
        result.report.macro_f1,
        result.trace.selected_epoch,
        if result.trace.stopped_early {
            ", early stop"
        } else {
            ""
        }
    );
    println!(
        "{}",
        result
            .report
            .render_table(&result.task.class_names())
    );
    println!("artifacts in {}", args.out.display());
    Ok(())
}
