//! Mini-batch BCE training with per-epoch metrics and best-validation-AUC
//! checkpointing, plus test-set evaluation.

mod checkpoint;
mod loss;
mod metrics;
mod optim;

use std::fmt;
use std::hint::black_box;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::dataset::Window;
use crate::error::{Error, Result};
use crate::models::{Mode, Model, ModelConfig, ModelKind};
use crate::numeric::Matrix;

pub use checkpoint::{load_checkpoint, save_checkpoint, write_atomic, Checkpoint, MAGIC, VERSION};
pub use loss::bce_loss;
pub use metrics::{accuracy, roc_auc};
pub use optim::{Optimizer, OptimizerKind, ADAM_BETA1, ADAM_BETA2, ADAM_EPS};

pub const DEFAULT_THRESHOLD: f64 = 0.5;

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub seed: u64,
    /// Probabilities are clamped to `[clamp_eps, 1 - clamp_eps]` inside the loss.
    pub clamp_eps: f64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 32,
            learning_rate: 1e-3,
            optimizer: OptimizerKind::Adam,
            seed: 0,
            clamp_eps: 1e-7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::InvalidConfig(
                "epochs and batch_size must be at least 1".into(),
            ));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig(
                "learning_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct EpochRecord {
    /// 1-based.
    pub epoch: usize,
    pub train_loss: f64,
    pub val_loss: f64,
    pub train_acc: f64,
    pub val_acc: f64,
    pub train_auc: f64,
    pub val_auc: f64,
}

pub const METRICS_HEADER: &str = "epoch,train_loss,val_loss,train_acc,val_acc,train_auc,val_auc";

/// One CSV row per epoch, values in shortest round-trip form.
pub fn metrics_csv(history: &[EpochRecord]) -> String {
    let mut out = String::from(METRICS_HEADER);
    out.push('\n');
    for r in history {
        out.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            r.epoch, r.train_loss, r.val_loss, r.train_acc, r.val_acc, r.train_auc, r.val_auc
        ));
    }
    out
}

pub fn write_metrics_csv(history: &[EpochRecord], path: &Path) -> Result<()> {
    write_atomic(path, metrics_csv(history).as_bytes())?;
    Ok(())
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub checkpoint: Checkpoint,
    pub history: Vec<EpochRecord>,
}

fn targets(windows: &[Window]) -> Vec<u8> {
    windows.iter().map(|w| w.target).collect()
}

fn has_both_classes(y: &[u8]) -> bool {
    y.contains(&0) && y.contains(&1)
}

/// Eval-mode probabilities for `windows`, scored `chunk` at a time.
pub fn predict_windows(model: &Model<f32>, windows: &[Window], chunk: usize) -> Result<Vec<f32>> {
    let mut probs = Vec::with_capacity(windows.len());
    for batch in windows.chunks(chunk.max(1)) {
        let refs: Vec<&Matrix<f32>> = batch.iter().map(|w| &w.features).collect();
        probs.extend(model.predict(&refs)?);
    }
    Ok(probs)
}

/// Trains from a seeded initialization for `cfg.epochs` epochs.
///
/// Each epoch reshuffles the training windows, steps once per mini-batch
/// (the last partial batch included) and then scores the validation set in
/// eval mode. Training metrics come from the training-mode predictions made
/// during the epoch. The returned checkpoint holds the parameters from the
/// epoch with the highest validation AUC, the earliest one on ties.
pub fn train(
    train: &[Window],
    val: &[Window],
    model_config: &ModelConfig,
    cfg: &TrainConfig,
) -> Result<TrainOutcome> {
    cfg.validate()?;
    if train.is_empty() || val.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let val_y = targets(val);
    if !has_both_classes(&val_y) {
        return Err(Error::SingleClassBatch);
    }
    let mut model = Model::<f32>::init(*model_config, cfg.seed)?;
    let mut optimizer = Optimizer::new(cfg.optimizer, cfg.learning_rate);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let eps = cfg.clamp_eps as f32;

    let mut order: Vec<usize> = (0..train.len()).collect();
    let mut history = Vec::with_capacity(cfg.epochs);
    let mut best: Option<Checkpoint> = None;

    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0f64;
        let mut seen_p = Vec::with_capacity(train.len());
        let mut seen_y = Vec::with_capacity(train.len());
        for batch in order.chunks(cfg.batch_size) {
            let refs: Vec<&Matrix<f32>> = batch.iter().map(|&i| &train[i].features).collect();
            let y: Vec<u8> = batch.iter().map(|&i| train[i].target).collect();
            let cache = model.forward_train(&refs, Mode::Train(&mut rng))?;
            let (loss, dprobs) = bce_loss(&cache.probs, &y, eps)?;
            if !loss.is_finite() {
                return Err(Error::DivergedLoss { epoch });
            }
            let grads = model.backward(&cache, &dprobs)?;
            optimizer.step(&mut model, &grads).map_err(|e| match e {
                Error::NonFiniteGradient => Error::DivergedLoss { epoch },
                other => other,
            })?;
            loss_sum += f64::from(loss) * batch.len() as f64;
            seen_p.extend_from_slice(&cache.probs);
            seen_y.extend(y);
        }

        let val_p = predict_windows(&model, val, 256)?;
        let (val_loss, _) = bce_loss(&val_p, &val_y, eps)?;
        if !val_loss.is_finite() {
            return Err(Error::DivergedLoss { epoch });
        }
        let record = EpochRecord {
            epoch,
            train_loss: loss_sum / train.len() as f64,
            val_loss: f64::from(val_loss),
            train_acc: accuracy(&seen_p, &seen_y, DEFAULT_THRESHOLD)?,
            val_acc: accuracy(&val_p, &val_y, DEFAULT_THRESHOLD)?,
            // a single-class training set has no ranking to score
            train_auc: roc_auc(&seen_p, &seen_y).unwrap_or(0.5),
            val_auc: roc_auc(&val_p, &val_y)?,
        };
        log::info!(
            "{} epoch {epoch}/{}: train loss {:.4} acc {:.4} auc {:.4} | val loss {:.4} acc {:.4} auc {:.4}",
            model_config.kind,
            cfg.epochs,
            record.train_loss,
            record.train_acc,
            record.train_auc,
            record.val_loss,
            record.val_acc,
            record.val_auc
        );
        if best
            .as_ref()
            .is_none_or(|b| record.val_auc > b.best_val_auc)
        {
            best = Some(Checkpoint {
                model: model.clone(),
                best_val_auc: record.val_auc,
                seed: cfg.seed,
                epoch,
            });
        }
        history.push(record);
    }

    Ok(TrainOutcome {
        checkpoint: best.expect("at least one epoch"),
        history,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub kind: ModelKind,
    pub windows: usize,
    pub accuracy: f64,
    /// `None` when the test windows contain a single class.
    pub auc: Option<f64>,
    /// Mean wall-clock time of one single-window eval forward pass.
    pub mean_inference_ms: f64,
}

impl EvalReport {
    pub fn auc_result(&self) -> Result<f64> {
        self.auc.ok_or(Error::SingleClassBatch)
    }
}

impl fmt::Display for EvalReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "{:<8} {:>10} {:>10} {:>18}",
            "Model", "Accuracy", "AUC", "Inference time"
        )?;
        let auc = self
            .auc
            .map_or_else(|| "n/a".to_string(), |a| format!("{:.2}%", a * 100.0));
        write!(
            f,
            "{:<8} {:>9.2}% {:>10} {:>15.3} ms",
            self.kind.as_str().to_uppercase(),
            self.accuracy * 100.0,
            auc,
            self.mean_inference_ms
        )
    }
}

/// Scores a checkpoint on held-out windows: accuracy at 0.5, AUC, and the
/// mean time of an eval forward pass over one window.
pub fn evaluate(checkpoint: &Checkpoint, test: &[Window]) -> Result<EvalReport> {
    if test.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let model = &checkpoint.model;
    let y = targets(test);
    let probs = predict_windows(model, test, 256)?;
    let acc = accuracy(&probs, &y, DEFAULT_THRESHOLD)?;
    let auc = match roc_auc(&probs, &y) {
        Ok(a) => Some(a),
        Err(Error::SingleClassBatch) => None,
        Err(e) => return Err(e),
    };

    let mut total = 0.0f64;
    for w in test {
        let start = Instant::now();
        black_box(model.predict(&[black_box(&w.features)])?);
        total += start.elapsed().as_secs_f64();
    }
    Ok(EvalReport {
        kind: model.kind(),
        windows: test.len(),
        accuracy: acc,
        auc,
        mean_inference_ms: total * 1e3 / test.len() as f64,
    })
}

/// Writes the report as a two-line CSV.
pub fn write_eval_csv(report: &EvalReport, path: &Path) -> Result<()> {
    let mut buf = Vec::new();
    writeln!(buf, "model,windows,accuracy,auc,mean_inference_ms")?;
    writeln!(
        buf,
        "{},{},{},{},{}",
        report.kind,
        report.windows,
        report.accuracy,
        report.auc.map_or_else(String::new, |a| a.to_string()),
        report.mean_inference_ms
    )?;
    write_atomic(path, &buf)?;
    Ok(())
}
