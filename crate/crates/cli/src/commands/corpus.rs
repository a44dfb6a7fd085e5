use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use clap::Subcommand;

use viewfuse_core::corpus::{load_corpus, split_corpus, CorpusFormat, Task};

#[derive(Subcommand)]
pub enum CorpusCommand {
    /// Load a corpus and print its shape, or fail on invariant violations
    Validate { path: PathBuf },
    /// Shuffle labeled records into 60/20/20 train/val/test id lists
    Split {
        path: PathBuf,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

pub fn run(command: CorpusCommand) -> anyhow::Result<()> {
    match command {
        CorpusCommand::Validate { path } => {
            let corpus = load_corpus(&path, CorpusFormat::Jsonl)
                .with_context(|| format!("validating {}", path.display()))?;
            println!("activity: {}", corpus.activity_name);
            println!("keywords: {}", corpus.keyword_set.join(", "));
            println!("records: {}", corpus.len());
            for task in [Task::UserType, Task::Motivation] {
                let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
                for rec in corpus.records() {
                    if let Some(c) = task.label_of(rec) {
                        *counts.entry(task.class_names()[c]).or_insert(0) += 1;
                    }
                }
                let labeled: usize = counts.values().sum();
                let detail: Vec<String> = counts
                    .iter()
                    .map(|(name, n)| format!("{name} {n}"))
                    .collect();
                println!("{task} labeled: {labeled} ({})", detail.join(", "));
            }
            let with_desc = corpus
                .records()
                .iter()
                .filter(|r| r.description.is_some())
                .count();
            let with_loc = corpus
                .records()
                .iter()
                .filter(|r| r.location.is_some())
                .count();
            let with_tweets = corpus
                .records()
                .iter()
                .filter(|r| !r.activity_tweets.is_empty())
                .count();
            println!("with description: {with_desc}, location: {with_loc}, tweets: {with_tweets}");
            println!("ok");
            Ok(())
        }
        CorpusCommand::Split { path, seed, out } => {
            let corpus = load_corpus(&path, CorpusFormat::Jsonl)?;
            let split = split_corpus(&corpus, seed)?;
            std::fs::write(&out, serde_json::to_string_pretty(&split)?)
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "train {} / val {} / test {} -> {}",
                split.train_ids.len(),
                split.val_ids.len(),
                split.test_ids.len(),
                out.display()
            );
            Ok(())
        }
    }
}
