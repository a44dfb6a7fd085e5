use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::Context;
use clap::Subcommand;

use viewfuse_core::analysis::{
    class_geo_distribution, class_term_frequency, geo_distribution_csv, geocode_locations,
    gold_labels, top_hashtags, OfflineGazetteer,
};
use viewfuse_core::corpus::{load_corpus, CorpusFormat, Task};

#[derive(Subcommand)]
pub enum AnalyzeCommand {
    /// Top-k hashtags over all activity tweets
    Hashtags {
        corpus: PathBuf,
        #[arg(long, default_value_t = 20)]
        k: usize,
    },
    /// Most frequent terms in one class's tweets (wordcloud data)
    Terms {
        corpus: PathBuf,
        #[arg(long)]
        class: String,
        #[arg(long, value_parser = super::suite_task_parser, default_value = "user_type")]
        task: Task,
        /// Terms to exclude, comma-separated (defaults to the corpus
        /// keyword set)
        #[arg(long)]
        filter: Option<String>,
        #[arg(long, default_value_t = 50)]
        k: usize,
        /// Optional `user_id,class` CSV of predictions to group by
        /// instead of gold labels
        #[arg(long)]
        predictions: Option<PathBuf>,
    },
    /// Geocoded per-place user/tweet counts for one class
    Geo {
        corpus: PathBuf,
        #[arg(long)]
        class: String,
        #[arg(long, value_parser = super::suite_task_parser, default_value = "user_type")]
        task: Task,
        #[arg(long)]
        out: PathBuf,
    },
}

fn prediction_labels(path: &PathBuf) -> anyhow::Result<BTreeMap<String, String>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut labels = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() || (i == 0 && line.starts_with("user_id")) {
            continue;
        }
        let (id, class) = line
            .split_once(',')
            .with_context(|| format!("{}:{}: expected user_id,class", path.display(), i + 1))?;
        labels.insert(id.trim().to_string(), class.trim().to_string());
    }
    Ok(labels)
}

pub fn run(command: AnalyzeCommand) -> anyhow::Result<()> {
    match command {
        AnalyzeCommand::Hashtags { corpus, k } => {
            let corpus = load_corpus(&corpus, CorpusFormat::Jsonl)?;
            print!("{}", top_hashtags(&corpus, k).to_csv());
            Ok(())
        }
        AnalyzeCommand::Terms {
            corpus,
            class,
            task,
            filter,
            k,
            predictions,
        } => {
            let corpus = load_corpus(&corpus, CorpusFormat::Jsonl)?;
            let labels = match predictions {
                Some(path) => prediction_labels(&path)?,
                None => gold_labels(&corpus, task),
            };
            let filter: Vec<String> = match filter {
                Some(f) => f.split(',').map(|s| s.trim().to_string()).collect(),
                None => corpus.keyword_set.clone(),
            };
            let table = class_term_frequency(&corpus, &labels, &class, &filter, k)?;
            print!("{}", table.to_csv());
            Ok(())
        }
        AnalyzeCommand::Geo {
            corpus,
            class,
            task,
            out,
        } => {
            let corpus = load_corpus(&corpus, CorpusFormat::Jsonl)?;
            let gazetteer = OfflineGazetteer::bundled();
            let (points, unresolved) = geocode_locations(&corpus, &gazetteer);
            let labels = gold_labels(&corpus, task);
            let rows = class_geo_distribution(&points, &labels, &class);
            let csv = geo_distribution_csv(&rows, &corpus);
            std::fs::write(&out, &csv)
                .with_context(|| format!("writing {}", out.display()))?;
            println!(
                "{} places, {} resolved users, {} unresolved strings -> {}",
                rows.len(),
                rows.iter().map(|r| r.user_count).sum::<usize>(),
                unresolved.len(),
                out.display()
            );
            Ok(())
        }
    }
}
