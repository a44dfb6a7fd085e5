//! Optimization loop, early stopping, and the fine-tuned-backend
//! baseline trainer.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::corpus::{
    concat_activity_tweets, preprocess_text, Corpus, SplitAssignment, Task, UserRecord,
};
use crate::encoding::{build_backend_with_budget, BackendRole, EncoderMode, View};
use crate::error::{Error, Result};
use crate::eval::{evaluate, EvalReport};
use crate::model::{predict, EncodedExample, JointModel, SequenceClassifier};
use crate::nn::{clip_global_norm, Optimizer, OptimizerAlgorithm};

/// Optimizer and loop hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    pub algorithm: OptimizerAlgorithm,
    pub learning_rate: f64,
    pub weight_decay: f64,
    pub epsilon: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub seed: u64,
    /// Global-norm gradient clip; `None` disables clipping.
    pub max_grad_norm: Option<f64>,
    /// Consecutive validation-loss increases tolerated before stopping.
    pub patience: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        // joint-model settings: Adam, lr 1e-3, batch 32, 10 epochs
        OptimizerConfig {
            algorithm: OptimizerAlgorithm::Adam,
            learning_rate: 1e-3,
            weight_decay: 0.0,
            epsilon: 1e-8,
            batch_size: 32,
            max_epochs: 10,
            seed: 0,
            max_grad_norm: Some(5.0),
            patience: 2,
        }
    }
}

impl OptimizerConfig {
    /// Fine-tuned-backend baseline settings: AdamW, lr 2e-5, 4 epochs.
    pub fn finetune_defaults() -> Self {
        OptimizerConfig {
            algorithm: OptimizerAlgorithm::AdamW,
            learning_rate: 2e-5,
            weight_decay: 0.01,
            epsilon: 1e-8,
            batch_size: 32,
            max_epochs: 4,
            seed: 0,
            max_grad_norm: None,
            patience: 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("learning_rate must be > 0".into()));
        }
        if self.batch_size == 0 || self.max_epochs == 0 {
            return Err(Error::InvalidConfig(
                "batch_size and max_epochs must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// How the returned checkpoint is selected under early stopping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionMetric {
    ValLoss,
    ValMacroF1,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub train_macro_f1: f64,
    pub val_loss: f64,
    pub val_accuracy: f64,
    pub val_macro_f1: f64,
}

/// Per-epoch metrics plus which epoch's parameters the model ended with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingTrace {
    pub epochs: Vec<EpochRecord>,
    pub selected_epoch: usize,
    pub stopped_early: bool,
}

impl TrainingTrace {
    /// `epoch,split,loss,accuracy,macro_f1` rows for curve plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("epoch,split,loss,accuracy,macro_f1\n");
        for e in &self.epochs {
            out.push_str(&format!(
                "{},train,{},{},{}\n",
                e.epoch, e.train_loss, e.train_accuracy, e.train_macro_f1
            ));
            out.push_str(&format!(
                "{},val,{},{},{}\n",
                e.epoch, e.val_loss, e.val_accuracy, e.val_macro_f1
            ));
        }
        out
    }

    pub fn max_train_accuracy(&self) -> f64 {
        self.epochs
            .iter()
            .map(|e| e.train_accuracy)
            .fold(0.0, f64::max)
    }
}

/// Validation-loss early stopping with best-epoch tracking.
struct EarlyStopping {
    patience: usize,
    previous: Option<f64>,
    streak: usize,
}

impl EarlyStopping {
    fn new(patience: usize) -> Self {
        EarlyStopping {
            patience,
            previous: None,
            streak: 0,
        }
    }

    /// Returns true when training should halt after this epoch.
    fn observe(&mut self, val_loss: f64) -> bool {
        if let Some(prev) = self.previous {
            if val_loss > prev {
                self.streak += 1;
            } else {
                self.streak = 0;
            }
        }
        self.previous = Some(val_loss);
        self.streak >= self.patience
    }
}

fn epoch_seed(seed: u64, epoch: usize) -> u64 {
    // splitmix over (seed, epoch) keeps epochs decorrelated but reproducible
    let mut x = seed ^ (epoch as u64).wrapping_mul(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

/// Mean loss and an [`EvalReport`] over labeled examples (dropout off).
pub fn evaluate_model(
    model: &JointModel,
    examples: &[EncodedExample],
) -> Result<(f64, EvalReport)> {
    if examples.is_empty() {
        return Err(Error::LengthMismatch { left: 0, right: 0 });
    }
    let mut gold = Vec::with_capacity(examples.len());
    let mut predicted = Vec::with_capacity(examples.len());
    let mut loss_sum = 0.0;
    for ex in examples {
        let label = ex
            .label
            .ok_or_else(|| Error::InvalidConfig(format!("{} has no label", ex.user_id)))?;
        let (probs, loss) = model.forward_eval(ex)?;
        loss_sum += loss.expect("labeled example has a loss");
        gold.push(label);
        predicted.push(predict(&probs));
    }
    let report = evaluate(&gold, &predicted, model.config.num_classes)?;
    Ok((loss_sum / examples.len() as f64, report))
}

/// Train the joint model over shuffled mini-batches.
///
/// Batches are reshuffled every epoch from a seed derived from
/// (config seed, epoch). With `early_stopping`, training halts after
/// `patience` consecutive validation-loss increases and the parameters
/// of the best epoch (per `selection`) are restored; otherwise the final
/// epoch's parameters are kept.
pub fn train(
    model: &mut JointModel,
    train_set: &[EncodedExample],
    val_set: &[EncodedExample],
    config: &OptimizerConfig,
    early_stopping: bool,
    selection: SelectionMetric,
) -> Result<TrainingTrace> {
    config.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(Error::TooFewRecords {
            need: 1,
            found: 0,
        });
    }
    let mut optimizer = Optimizer::new(
        config.algorithm,
        config.learning_rate,
        config.weight_decay,
        config.epsilon,
    );
    let mut stopper = EarlyStopping::new(config.patience);
    let mut trace = TrainingTrace {
        epochs: Vec::new(),
        selected_epoch: 0,
        stopped_early: false,
    };
    let mut best: Option<(f64, usize, Vec<Vec<f64>>)> = None;

    let mut order: Vec<usize> = (0..train_set.len()).collect();
    for epoch in 1..=config.max_epochs {
        let mut rng = rand::rngs::StdRng::seed_from_u64(epoch_seed(config.seed, epoch));
        order.shuffle(&mut rng);

        for (batch_index, batch) in order.chunks(config.batch_size).enumerate() {
            model.zero_grads();
            let mut batch_loss = 0.0;
            for &i in batch {
                let (loss, cache) = model.forward_train(&train_set[i], &mut rng)?;
                batch_loss += loss;
                model.backward(&cache);
            }
            batch_loss /= batch.len() as f64;
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_index,
                });
            }
            let scale = 1.0 / batch.len() as f64;
            let mut params = model.params();
            for p in params.iter_mut() {
                for g in p.g.iter_mut() {
                    *g *= scale;
                }
            }
            if let Some(max_norm) = config.max_grad_norm {
                clip_global_norm(&mut params, max_norm);
            }
            optimizer.step(&mut params);
        }

        let (train_loss, train_report) = evaluate_model(model, train_set)?;
        let (val_loss, val_report) = evaluate_model(model, val_set)?;
        trace.epochs.push(EpochRecord {
            epoch,
            train_loss,
            train_accuracy: train_report.accuracy,
            train_macro_f1: train_report.macro_f1,
            val_loss,
            val_accuracy: val_report.accuracy,
            val_macro_f1: val_report.macro_f1,
        });

        let score = match selection {
            SelectionMetric::ValLoss => val_loss,
            // negate so lower is always better
            SelectionMetric::ValMacroF1 => -val_report.macro_f1,
        };
        if best.as_ref().map(|(s, _, _)| score < *s).unwrap_or(true) {
            best = Some((score, epoch, model.snapshot()));
        }

        if early_stopping && stopper.observe(val_loss) {
            trace.stopped_early = true;
            break;
        }
    }

    if early_stopping {
        let (_, best_epoch, snapshot) = best.expect("at least one epoch ran");
        model.restore(&snapshot);
        trace.selected_epoch = best_epoch;
    } else {
        trace.selected_epoch = trace.epochs.len();
    }
    Ok(trace)
}

/// Padding/truncation budget per fine-tuned field.
pub fn finetune_max_tokens(field: View) -> usize {
    match field {
        View::Description => 160,
        View::Location => 50,
        View::Tweets => 500,
        _ => panic!("fine-tuned baselines cover the text fields"),
    }
}

fn field_text(record: &UserRecord, field: View) -> Option<String> {
    match field {
        View::Description => record.description.as_deref().map(preprocess_text),
        View::Location => record.location.as_deref().map(preprocess_text),
        View::Tweets => concat_activity_tweets(record).ok(),
        _ => None,
    }
}

/// Train a fine-tuned-backend baseline on one text field: the backend's
/// adapter plus a single linear output layer, AdamW at 2e-5 for 4 epochs,
/// no early stopping. Users missing the field contribute empty text.
pub fn train_finetuned_baseline(
    field: View,
    corpus: &Corpus,
    splits: &SplitAssignment,
    task: Task,
    backend_name: &str,
    config: &OptimizerConfig,
    max_tokens: Option<usize>,
) -> Result<(SequenceClassifier, TrainingTrace)> {
    if !field.is_text() {
        return Err(Error::InvalidConfig(format!(
            "cannot fine-tune on {field}"
        )));
    }
    config.validate()?;
    let backend = build_backend_with_budget(
        backend_name,
        BackendRole::ShortText,
        EncoderMode::FineTune,
        Some(max_tokens.unwrap_or_else(|| finetune_max_tokens(field))),
    )?;
    let mut model = SequenceClassifier::new(backend, task.num_classes(), config.seed);

    let collect = |ids: &[String]| -> Vec<(String, usize)> {
        ids.iter()
            .filter_map(|id| {
                let rec = corpus.get(id)?;
                let label = task.label_of(rec)?;
                Some((field_text(rec, field).unwrap_or_default(), label))
            })
            .collect()
    };
    let train_texts = collect(&splits.train_ids);
    let val_texts = collect(&splits.val_ids);
    if train_texts.is_empty() || val_texts.is_empty() {
        return Err(Error::TooFewRecords { need: 1, found: 0 });
    }
    if train_texts.iter().all(|(t, _)| t.is_empty()) {
        return Err(Error::FieldEmptyForAllUsers(field.name().into()));
    }

    let mut optimizer = Optimizer::new(
        config.algorithm,
        config.learning_rate,
        config.weight_decay,
        config.epsilon,
    );
    let eval_set = |model: &SequenceClassifier, set: &[(String, usize)]| -> Result<(f64, EvalReport)> {
        let mut gold = Vec::new();
        let mut predicted = Vec::new();
        let mut loss_sum = 0.0;
        for (text, label) in set {
            let probs = model.forward_eval(text);
            loss_sum += crate::nn::cross_entropy(&probs, *label);
            gold.push(*label);
            predicted.push(predict(&probs));
        }
        let report = evaluate(&gold, &predicted, task.num_classes())?;
        Ok((loss_sum / set.len() as f64, report))
    };

    let mut trace = TrainingTrace {
        epochs: Vec::new(),
        selected_epoch: 0,
        stopped_early: false,
    };
    let mut order: Vec<usize> = (0..train_texts.len()).collect();
    for epoch in 1..=config.max_epochs {
        let mut rng = rand::rngs::StdRng::seed_from_u64(epoch_seed(config.seed, epoch));
        order.shuffle(&mut rng);
        for (batch_index, batch) in order.chunks(config.batch_size).enumerate() {
            model.zero_grads();
            let mut batch_loss = 0.0;
            for &i in batch {
                let (text, label) = &train_texts[i];
                let (loss, cache) = model.forward_train(text, *label)?;
                batch_loss += loss;
                model.backward(&cache);
            }
            batch_loss /= batch.len() as f64;
            if !batch_loss.is_finite() {
                return Err(Error::NonFiniteLoss {
                    epoch,
                    batch: batch_index,
                });
            }
            let scale = 1.0 / batch.len() as f64;
            let mut params = model.trainable_params();
            for p in params.iter_mut() {
                for g in p.g.iter_mut() {
                    *g *= scale;
                }
            }
            optimizer.step(&mut params);
        }
        let (train_loss, train_report) = eval_set(&model, &train_texts)?;
        let (val_loss, val_report) = eval_set(&model, &val_texts)?;
        trace.epochs.push(EpochRecord {
            epoch,
            train_loss,
            train_accuracy: train_report.accuracy,
            train_macro_f1: train_report.macro_f1,
            val_loss,
            val_accuracy: val_report.accuracy,
            val_macro_f1: val_report.macro_f1,
        });
    }
    trace.selected_epoch = trace.epochs.len();
    Ok((model, trace))
}

/// Classify one text field with a trained baseline, over a set of ids.
pub fn finetuned_predictions(
    model: &SequenceClassifier,
    field: View,
    corpus: &Corpus,
    ids: &[String],
    task: Task,
) -> Result<(Vec<usize>, Vec<usize>)> {
    let mut gold = Vec::new();
    let mut predicted = Vec::new();
    for id in ids {
        let rec = match corpus.get(id) {
            Some(r) => r,
            None => continue,
        };
        let label = match task.label_of(rec) {
            Some(l) => l,
            None => continue,
        };
        let text = field_text(rec, field).unwrap_or_default();
        let probs = model.forward_eval(&text);
        gold.push(label);
        predicted.push(predict(&probs));
    }
    Ok((gold, predicted))
}
