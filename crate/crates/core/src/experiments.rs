//! Declarative experiment configurations and the suite runner.
//!
//! The built-in suite holds the twelve baselines plus the full joint
//! model: the four single-view models, the three fine-tuned-backend
//! baselines, the four partial fusions, the static-vector joint model,
//! and the full model. Configs round-trip through a TOML file with one
//! `[[experiment]]` block each.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::corpus::{
    concat_activity_tweets_filtered, preprocess_text, Corpus, SplitAssignment, Task,
};
use crate::encoding::{build_backend, BackendRole, EncoderMode, TokenEncoder, View};
use crate::error::{Error, Result};
use crate::eval::EvalReport;
use crate::graph::{
    build_mention_graph, generate_walks, train_node_embeddings, MentionGraph,
    NetworkEmbeddingTable, WalkConfig,
};
use crate::model::{EncodedExample, HeadVariant, JointModel, JointModelConfig};
use crate::train::{
    evaluate_model, finetuned_predictions, train, train_finetuned_baseline, OptimizerConfig,
    SelectionMetric, TrainingTrace,
};

/// One named model configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub task: Task,
    pub seed: u64,
    pub active_views: Vec<View>,
    /// Backend name per text view (see `encoding::build_backend`).
    pub backends: BTreeMap<View, String>,
    pub encoder_mode: EncoderMode,
    pub head: HeadVariant,
    pub optimizer: OptimizerConfig,
    pub text_hidden: usize,
    pub lstm_layers: usize,
    pub attention_size: usize,
    pub network_projection: usize,
    pub first_layer_size: usize,
    pub dropout: f64,
    pub walk: WalkConfig,
    pub early_stopping: bool,
    pub selection: SelectionMetric,
    /// Whether retweet bodies join the concatenated tweet document.
    pub include_retweets: bool,
    /// Token budget override for fine-tuned baselines.
    pub max_sentence_length: Option<usize>,
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        if self.name.is_empty() {
            return Err(Error::InvalidConfig("experiment name is empty".into()));
        }
        let mut sorted = self.active_views.clone();
        sorted.sort();
        sorted.dedup();
        if sorted != self.active_views || self.active_views.is_empty() {
            return Err(Error::InvalidConfig(format!(
                "{}: active_views must be unique and in fusion order",
                self.name
            )));
        }
        for v in &self.active_views {
            if v.is_text() && !self.backends.contains_key(v) {
                return Err(Error::InvalidConfig(format!(
                    "{}: no backend named for text view {v}",
                    self.name
                )));
            }
        }
        if self.encoder_mode == EncoderMode::FineTune
            && (self.active_views.len() != 1 || !self.active_views[0].is_text())
        {
            return Err(Error::InvalidConfig(format!(
                "{}: fine-tuned baselines take exactly one text view",
                self.name
            )));
        }
        self.optimizer.validate()?;
        self.walk.validate()?;
        Ok(())
    }

    fn backend_for(&self, view: View) -> Result<Box<dyn TokenEncoder>> {
        let name = self
            .backends
            .get(&view)
            .ok_or_else(|| Error::MissingView(view.name().into()))?;
        let role = if view == View::Tweets {
            BackendRole::LongDocument
        } else {
            BackendRole::ShortText
        };
        build_backend(name, role, EncoderMode::FrozenFeatures)
    }

    /// Model configuration implied by this experiment, with backend
    /// widths resolved.
    pub fn joint_model_config(&self) -> Result<JointModelConfig> {
        let mut short_width = 0;
        let mut long_width = 0;
        for &view in &self.active_views {
            if view.is_text() {
                let backend = self.backend_for(view)?;
                if view == View::Tweets {
                    long_width = backend.hidden_width();
                } else if short_width == 0 {
                    short_width = backend.hidden_width();
                } else if short_width != backend.hidden_width() {
                    return Err(Error::InvalidConfig(format!(
                        "{}: description/location backends disagree on width",
                        self.name
                    )));
                }
            }
        }
        Ok(JointModelConfig {
            views: self.active_views.clone(),
            active_views: self.active_views.clone(),
            num_classes: self.task.num_classes(),
            head: self.head,
            text_hidden: self.text_hidden,
            lstm_layers: self.lstm_layers,
            attention_size: self.attention_size,
            short_input_width: short_width.max(1),
            long_input_width: long_width.max(1),
            network_input_width: self.walk.dimension,
            network_projection: self.network_projection,
            first_layer_size: self.first_layer_size,
            dropout: self.dropout,
            init_seed: mix(self.seed, 0x6d0de1),
        })
    }
}

fn mix(seed: u64, salt: u64) -> u64 {
    let mut x = seed ^ salt.wrapping_mul(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn experiment_seed(base: u64, name: &str) -> u64 {
    let mut h = 0xcbf29ce484222325u64;
    for b in name.as_bytes() {
        h ^= *b as u64;
        h = h.wrapping_mul(0x100000001b3);
    }
    // configs serialize to TOML, whose integers are i64
    mix(base, h) & (i64::MAX as u64)
}

const SHORT_BACKEND: &str = "hash-768";
const STATIC_BACKEND: &str = "static-300";

fn text_backends(name: &str) -> BTreeMap<View, String> {
    let mut map = BTreeMap::new();
    map.insert(View::Description, name.to_string());
    map.insert(View::Location, name.to_string());
    map.insert(View::Tweets, name.to_string());
    map
}

/// The full joint model's configuration (Adam, lr 1e-3, batch 32, hd 300,
/// 2 recurrent layers, attention 300, first layer 600).
fn joint_template(name: &str, task: Task, base_seed: u64) -> ExperimentConfig {
    ExperimentConfig {
        name: name.to_string(),
        task,
        seed: experiment_seed(base_seed, name),
        active_views: View::INPUTS.to_vec(),
        backends: text_backends(SHORT_BACKEND),
        encoder_mode: EncoderMode::FrozenFeatures,
        head: HeadVariant::TwoLayer,
        optimizer: OptimizerConfig {
            seed: experiment_seed(base_seed, name),
            ..OptimizerConfig::default()
        },
        text_hidden: 300,
        lstm_layers: 2,
        attention_size: 300,
        network_projection: 150,
        first_layer_size: 600,
        dropout: 0.5,
        walk: WalkConfig {
            seed: base_seed,
            ..WalkConfig::default()
        },
        early_stopping: true,
        selection: SelectionMetric::ValLoss,
        include_retweets: true,
        max_sentence_length: None,
    }
}

/// All thirteen built-in configurations in reporting order.
pub fn builtin_suite(task: Task, seed: u64) -> Vec<ExperimentConfig> {
    let seed = seed & (i64::MAX as u64);
    let single = |name: &str, view: View| {
        let mut cfg = joint_template(name, task, seed);
        cfg.active_views = vec![view];
        cfg.head = HeadVariant::OneLayer;
        if view == View::Network {
            // Table row: hidden dimension 150 is the projection width
            cfg.network_projection = 150;
        }
        cfg
    };
    let finetuned = |name: &str, view: View| {
        let mut cfg = joint_template(name, task, seed);
        cfg.active_views = vec![view];
        cfg.encoder_mode = EncoderMode::FineTune;
        cfg.head = HeadVariant::OneLayer;
        cfg.optimizer = OptimizerConfig {
            seed: experiment_seed(seed, name),
            ..OptimizerConfig::finetune_defaults()
        };
        cfg.early_stopping = false;
        cfg
    };
    let fusion = |name: &str, views: &[View]| {
        let mut cfg = joint_template(name, task, seed);
        cfg.active_views = views.to_vec();
        cfg
    };

    let mut static_joint = joint_template("static_joint", task, seed);
    static_joint.backends = text_backends(STATIC_BACKEND);

    vec![
        single("description", View::Description),
        single("location", View::Location),
        single("tweets", View::Tweets),
        single("network", View::Network),
        finetuned("des_bf", View::Description),
        finetuned("loc_bf", View::Location),
        finetuned("twts_bf", View::Tweets),
        fusion("des_loc", &[View::Description, View::Location]),
        fusion("des_net", &[View::Description, View::Network]),
        fusion(
            "des_loc_twt",
            &[View::Description, View::Location, View::Tweets],
        ),
        fusion(
            "des_loc_net",
            &[View::Description, View::Location, View::Network],
        ),
        static_joint,
        fusion("full", &View::INPUTS),
    ]
}

/// The built-in suite shrunk to smoke-test scale: tiny widths, two
/// epochs, small walks. Same thirteen configurations.
pub fn smoke_suite(task: Task, seed: u64) -> Vec<ExperimentConfig> {
    let mut configs = builtin_suite(task, seed);
    for cfg in &mut configs {
        cfg.backends = match cfg.backends.get(&View::Description).map(String::as_str) {
            Some(s) if s.starts_with("static") => text_backends("static-16"),
            _ => text_backends("hash-16"),
        };
        cfg.text_hidden = 8;
        cfg.attention_size = 8;
        cfg.network_projection = 8;
        cfg.first_layer_size = 16;
        cfg.dropout = 0.2;
        cfg.walk = WalkConfig {
            dimension: 16,
            walks_per_source: 4,
            walk_length: 8,
            window_size: 3,
            epochs: 2,
            seed,
            ..WalkConfig::default()
        };
        cfg.optimizer.batch_size = 8;
        cfg.optimizer.max_epochs = if cfg.encoder_mode == EncoderMode::FineTune {
            1
        } else {
            2
        };
    }
    configs
}

/// Encode a split's records into model-ready examples. Records without a
/// task label or without activity tweets are skipped.
pub fn encode_examples(
    corpus: &Corpus,
    ids: &[String],
    task: Task,
    views: &[View],
    backends: &BTreeMap<View, Box<dyn TokenEncoder>>,
    table: Option<&NetworkEmbeddingTable>,
    include_retweets: bool,
) -> Result<Vec<EncodedExample>> {
    let mut out = Vec::with_capacity(ids.len());
    for id in ids {
        let record = match corpus.get(id) {
            Some(r) => r,
            None => continue,
        };
        let label = match task.label_of(record) {
            Some(l) => l,
            None => continue,
        };
        if record.activity_tweets.is_empty() {
            continue;
        }
        let mut example = EncodedExample::unlabeled(id.clone());
        example.label = Some(label);
        for &view in views {
            match view {
                View::Description => {
                    example.description = record
                        .description
                        .as_ref()
                        .map(|text| backends[&view].encode(&preprocess_text(text)));
                }
                View::Location => {
                    example.location = record
                        .location
                        .as_ref()
                        .map(|text| backends[&view].encode(&preprocess_text(text)));
                }
                View::Tweets => {
                    let doc = concat_activity_tweets_filtered(record, include_retweets)?;
                    example.tweets = Some(backends[&view].encode(&doc));
                }
                View::Network => {
                    let table = table.ok_or_else(|| {
                        Error::InvalidConfig("network view needs an embedding table".into())
                    })?;
                    example.network_input = Some(table.input_or_zeros(id));
                }
                View::Fused => unreachable!(),
            }
        }
        out.push(example);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentResult {
    pub name: String,
    pub task: Task,
    pub report: EvalReport,
    pub trace: TrainingTrace,
    pub wall_seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRun {
    pub name: String,
    pub outcome: std::result::Result<ExperimentResult, String>,
}

/// One result per configured experiment, in configuration order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteResult {
    pub task: Task,
    pub runs: Vec<ExperimentRun>,
}

/// One run's deterministic payload: its name plus either the report and
/// trace, or the error string.
pub type DeterministicRun = (String, std::result::Result<(EvalReport, TrainingTrace), String>);

impl SuiteResult {
    /// Everything except wall-clock timing; two runs with the same seeds
    /// must agree on this bit for bit.
    pub fn deterministic_view(&self) -> Vec<DeterministicRun> {
        self.runs
            .iter()
            .map(|r| {
                (
                    r.name.clone(),
                    r.outcome
                        .as_ref()
                        .map(|res| (res.report.clone(), res.trace.clone()))
                        .map_err(|e| e.clone()),
                )
            })
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&ExperimentResult> {
        self.runs
            .iter()
            .find(|r| r.name == name)
            .and_then(|r| r.outcome.as_ref().ok())
    }

    /// Aligned comparison table in configuration order.
    pub fn render_table(&self) -> String {
        let mut out = format!(
            "{:<14} {:>9} {:>9} {:>6} {:>8}\n",
            "model", "accuracy", "macro-f1", "epoch", "seconds"
        );
        for run in &self.runs {
            match &run.outcome {
                Ok(res) => out.push_str(&format!(
                    "{:<14} {:>9.3} {:>9.3} {:>6} {:>8.1}\n",
                    run.name,
                    res.report.accuracy,
                    res.report.macro_f1,
                    res.trace.selected_epoch,
                    res.wall_seconds
                )),
                Err(e) => out.push_str(&format!("{:<14} ERROR: {e}\n", run.name)),
            }
        }
        out
    }
}

/// Per-corpus state shared across a suite: the mention graph and one
/// embedding table per distinct walk configuration.
pub struct SuiteShared {
    pub graph: MentionGraph,
    tables: BTreeMap<u64, NetworkEmbeddingTable>,
}

impl SuiteShared {
    pub fn new(corpus: &Corpus) -> Self {
        SuiteShared {
            graph: build_mention_graph(corpus),
            tables: BTreeMap::new(),
        }
    }

    pub fn table_for(&mut self, walk: &WalkConfig) -> Result<&NetworkEmbeddingTable> {
        let key = walk.config_hash();
        if !self.tables.contains_key(&key) {
            let walks = generate_walks(&self.graph, walk);
            let table = train_node_embeddings(&self.graph, &walks, walk)?;
            self.tables.insert(key, table);
        }
        Ok(&self.tables[&key])
    }
}

/// Train and evaluate one experiment on the given split.
pub fn run_experiment(
    config: &ExperimentConfig,
    corpus: &Corpus,
    splits: &SplitAssignment,
    shared: &mut SuiteShared,
) -> Result<ExperimentResult> {
    run_experiment_full(config, corpus, splits, shared).map(|(result, _)| result)
}

/// Like [`run_experiment`], also returning a checkpoint for joint
/// experiments (fine-tuned baselines produce no checkpoint).
pub fn run_experiment_full(
    config: &ExperimentConfig,
    corpus: &Corpus,
    splits: &SplitAssignment,
    shared: &mut SuiteShared,
) -> Result<(ExperimentResult, Option<crate::model::Checkpoint>)> {
    config.validate()?;
    let started = Instant::now();

    if config.encoder_mode == EncoderMode::FineTune {
        let field = config.active_views[0];
        let mut opt = config.optimizer.clone();
        opt.seed = config.seed;
        let backend_name = &config.backends[&field];
        let (model, trace) = train_finetuned_baseline(
            field,
            corpus,
            splits,
            config.task,
            backend_name,
            &opt,
            config.max_sentence_length,
        )?;
        let (gold, predicted) =
            finetuned_predictions(&model, field, corpus, &splits.test_ids, config.task)?;
        let report = crate::eval::evaluate(&gold, &predicted, config.task.num_classes())?;
        return Ok((
            ExperimentResult {
                name: config.name.clone(),
                task: config.task,
                report,
                trace,
                wall_seconds: started.elapsed().as_secs_f64(),
            },
            None,
        ));
    }

    let mut backends: BTreeMap<View, Box<dyn TokenEncoder>> = BTreeMap::new();
    for &view in &config.active_views {
        if view.is_text() {
            backends.insert(view, config.backend_for(view)?);
        }
    }
    let table = if config.active_views.contains(&View::Network) {
        Some(shared.table_for(&config.walk)?.clone())
    } else {
        None
    };

    let encode = |ids: &[String]| {
        encode_examples(
            corpus,
            ids,
            config.task,
            &config.active_views,
            &backends,
            table.as_ref(),
            config.include_retweets,
        )
    };
    let train_set = encode(&splits.train_ids)?;
    let val_set = encode(&splits.val_ids)?;
    let test_set = encode(&splits.test_ids)?;

    let mut model = JointModel::new(config.joint_model_config()?)?;
    let mut opt = config.optimizer.clone();
    opt.seed = config.seed;
    let trace = train(
        &mut model,
        &train_set,
        &val_set,
        &opt,
        config.early_stopping,
        config.selection,
    )?;
    let (_, report) = evaluate_model(&model, &test_set)?;
    let checkpoint = crate::model::Checkpoint {
        backends: config
            .backends
            .iter()
            .filter(|(v, _)| config.active_views.contains(v))
            .map(|(v, n)| (*v, n.clone()))
            .collect(),
        include_retweets: config.include_retweets,
        model,
    };
    Ok((
        ExperimentResult {
            name: config.name.clone(),
            task: config.task,
            report,
            trace,
            wall_seconds: started.elapsed().as_secs_f64(),
        },
        Some(checkpoint),
    ))
}

/// Run every configuration on the identical split; individual failures
/// are recorded and the suite continues.
pub fn run_suite(
    configs: &[ExperimentConfig],
    corpus: &Corpus,
    splits: &SplitAssignment,
) -> SuiteResult {
    let mut shared = SuiteShared::new(corpus);
    let task = configs.first().map(|c| c.task).unwrap_or(Task::UserType);
    let runs = configs
        .iter()
        .map(|config| ExperimentRun {
            name: config.name.clone(),
            outcome: run_experiment(config, corpus, splits, &mut shared)
                .map_err(|e| e.to_string()),
        })
        .collect();
    SuiteResult { task, runs }
}

#[derive(Serialize, Deserialize)]
struct SuiteFile {
    experiment: Vec<ExperimentConfig>,
}

/// Write configs as a TOML file with one `[[experiment]]` block each.
pub fn save_configs(configs: &[ExperimentConfig], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = SuiteFile {
        experiment: configs.to_vec(),
    };
    let text = toml::to_string_pretty(&file)
        .map_err(|e| Error::InvalidConfig(format!("serialize configs: {e}")))?;
    std::fs::write(path, text).map_err(|e| Error::io(path.display().to_string(), e))
}

pub fn load_configs(path: impl AsRef<Path>) -> Result<Vec<ExperimentConfig>> {
    let path = path.as_ref();
    let display = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(&display, e))?;
    let file: SuiteFile =
        toml::from_str(&text).map_err(|e| Error::parse(&display, 1, e.to_string()))?;
    for config in &file.experiment {
        config.validate()?;
    }
    Ok(file.experiment)
}
