use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Args, ValueEnum};

use viewfuse_core::corpus::{load_corpus, CorpusFormat, SplitAssignment, Task};
use viewfuse_core::encoding::{build_backend, BackendRole, EncoderMode, TokenEncoder, View};
use viewfuse_core::eval::confusion_report;
use viewfuse_core::experiments::encode_examples;
use viewfuse_core::graph::load_embedding_table;
use viewfuse_core::model::{load_checkpoint, predict};
use viewfuse_core::train::evaluate_model;

#[derive(Clone, Copy, ValueEnum)]
pub enum SplitChoice {
    Train,
    Val,
    Test,
    /// Every labeled record in the corpus
    All,
}

#[derive(Args)]
pub struct EvalArgs {
    /// Trained model checkpoint (from `train`)
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long)]
    pub corpus: PathBuf,
    #[arg(long, value_parser = super::suite_task_parser, default_value = "user_type")]
    pub task: Task,
    /// Split file from `corpus split` or a run directory
    #[arg(long)]
    pub splits: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = SplitChoice::All)]
    pub split: SplitChoice,
    /// Node-embedding table (required when the model uses the network
    /// view; `train` writes one next to the checkpoint)
    #[arg(long)]
    pub emb: Option<PathBuf>,
    /// Write `user_id,class` predictions here
    #[arg(long)]
    pub predictions_out: Option<PathBuf>,
}

pub fn run(args: EvalArgs) -> anyhow::Result<()> {
    let checkpoint = load_checkpoint(&args.checkpoint)?;
    let model = checkpoint.model;
    let corpus = load_corpus(&args.corpus, CorpusFormat::Jsonl)?;

    let ids: Vec<String> = match (&args.splits, args.split) {
        (None, SplitChoice::All) | (Some(_), SplitChoice::All) => {
            corpus.labeled_ids().into_iter().map(str::to_owned).collect()
        }
        (Some(path), choice) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            let splits: SplitAssignment = serde_json::from_str(&text)?;
            match choice {
                SplitChoice::Train => splits.train_ids,
                SplitChoice::Val => splits.val_ids,
                SplitChoice::Test => splits.test_ids,
                SplitChoice::All => unreachable!(),
            }
        }
        (None, _) => bail!("--split needs --splits <file>"),
    };

    let mut backends: BTreeMap<View, Box<dyn TokenEncoder>> = BTreeMap::new();
    for (&view, name) in &checkpoint.backends {
        let role = if view == View::Tweets {
            BackendRole::LongDocument
        } else {
            BackendRole::ShortText
        };
        backends.insert(view, build_backend(name, role, EncoderMode::FrozenFeatures)?);
    }

    let table = if model.config.active_views.contains(&View::Network) {
        let path = args
            .emb
            .as_ref()
            .context("this model uses the network view; pass --emb <table>")?;
        let table = load_embedding_table(path)?;
        if table.dimension() != model.config.network_input_width {
            bail!(
                "embedding table dim {} != model input width {}",
                table.dimension(),
                model.config.network_input_width
            );
        }
        Some(table)
    } else {
        None
    };

    let examples = encode_examples(
        &corpus,
        &ids,
        args.task,
        &model.config.active_views,
        &backends,
        table.as_ref(),
        checkpoint.include_retweets,
    )?;
    if examples.is_empty() {
        bail!("no labeled examples with activity tweets among the selected ids");
    }

    let (loss, report) = evaluate_model(&model, &examples)?;
    let class_names = args.task.class_names();
    println!("examples: {}  mean loss: {loss:.4}", report.n);
    print!("{}", report.render_table(&class_names));

    println!(
        "\ncorrectly predicted {} of {} users; {} misclassifications",
        report.correct(),
        report.n,
        report.errors()
    );
    for breakdown in confusion_report(&report, &class_names) {
        if breakdown.misclassified_as.is_empty() {
            println!(
                "{}: all {} correct",
                breakdown.gold_class, breakdown.total
            );
        } else {
            let detail: Vec<String> = breakdown
                .misclassified_as
                .iter()
                .map(|(class, n)| format!("{n} as {class}"))
                .collect();
            println!(
                "{}: {} correct of {}, misclassified {}",
                breakdown.gold_class,
                breakdown.correct,
                breakdown.total,
                detail.join(", ")
            );
        }
    }

    if let Some(out) = args.predictions_out {
        let mut csv = String::from("user_id,class\n");
        for example in &examples {
            let (probs, _) = model.forward_eval(example)?;
            csv.push_str(&format!(
                "{},{}\n",
                example.user_id,
                class_names[predict(&probs)]
            ));
        }
        std::fs::write(&out, csv).with_context(|| format!("writing {}", out.display()))?;
        println!("predictions -> {}", out.display());
    }
    Ok(())
}
