use std::path::PathBuf;

use anyhow::{bail, Context};
use clap::{Subcommand, ValueEnum};

use viewfuse_core::corpus::{load_corpus, split_corpus, CorpusFormat, Task};
use viewfuse_core::experiments::{
    builtin_suite, load_configs, run_suite, save_configs, smoke_suite, SuiteResult,
};

#[derive(Clone, Copy, ValueEnum)]
pub enum Preset {
    /// Reported hyperparameters (hidden 300, 10 epochs, 300-d walks)
    Full,
    /// Tiny widths and two epochs; minutes instead of hours
    Smoke,
}

#[derive(Subcommand)]
pub enum SuiteCommand {
    /// Train and evaluate every configuration on one split
    Run {
        #[arg(long)]
        corpus: PathBuf,
        #[arg(long, value_parser = parse_task, default_value = "user_type")]
        task: Task,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Preset::Full)]
        preset: Preset,
        /// Custom experiment file overriding the built-in suite
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the comparison table for a finished run
    Table { results: PathBuf },
}

fn parse_task(s: &str) -> Result<Task, String> {
    Task::parse(s).ok_or_else(|| format!("unknown task `{s}` (user_type | motivation)"))
}

pub fn run(command: SuiteCommand) -> anyhow::Result<()> {
    match command {
        SuiteCommand::Run {
            corpus,
            task,
            seed,
            preset,
            config,
            out,
        } => {
            let corpus = load_corpus(&corpus, CorpusFormat::Jsonl)?;
            let configs = match config {
                Some(path) => load_configs(&path)?,
                None => match preset {
                    Preset::Full => builtin_suite(task, seed),
                    Preset::Smoke => smoke_suite(task, seed),
                },
            };
            if configs.is_empty() {
                bail!("no experiments configured");
            }
            let splits = split_corpus(&corpus, seed)?;
            let result = run_suite(&configs, &corpus, &splits);

            std::fs::create_dir_all(&out)
                .with_context(|| format!("creating {}", out.display()))?;
            std::fs::write(
                out.join("splits.json"),
                serde_json::to_string_pretty(&splits)?,
            )?;
            save_configs(&configs, out.join("configs.toml"))?;
            std::fs::write(
                out.join("summary.json"),
                serde_json::to_string_pretty(&result)?,
            )?;
            for run in &result.runs {
                if let Ok(res) = &run.outcome {
                    let dir = out.join(&run.name);
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(
                        dir.join("report.json"),
                        serde_json::to_string_pretty(&res.report)?,
                    )?;
                    std::fs::write(dir.join("trace.csv"), res.trace.to_csv())?;
                }
            }
            let table = result.render_table();
            std::fs::write(out.join("table.txt"), &table)?;
            print!("{table}");
            println!("artifacts in {}", out.display());
            Ok(())
        }
        SuiteCommand::Table { results } => {
            let path = results.join("summary.json");
            let text = std::fs::read_to_string(&path)
                .with_context(|| format!("reading {}", path.display()))?;
            let result: SuiteResult = serde_json::from_str(&text)?;
            print!("{}", result.render_table());
            Ok(())
        }
    }
}
