use std::fmt::Write as _;
use std::path::PathBuf;
use std::sync::Arc;
use std::time::Instant;

use intentseq_core::dataset::{
    apply_backtrack_relabel, build_windows, class_balance_stats, load_corpus_dir,
    load_reversal_table, read_landmark_rows, split_dataset, ClassBalance, SplitSpec,
};
use intentseq_core::inference::{bench_latency, predictions_csv, replay, MIN_BENCH_REPS};
use intentseq_core::models::count_params;
use intentseq_core::synthgen::{generate_corpus, CorpusParams};
use intentseq_core::training::{
    evaluate, load_checkpoint, metrics_csv, save_checkpoint, train, write_atomic, write_eval_csv,
    TrainConfig,
};
use intentseq_core::{Model, ModelConfig, ModelKind, Split, Window};
use serde::Serialize;
use serde_json::json;

use crate::args::{
    BenchArgs, Command, EvalArgs, InferArgs, PartitionArg, PrepareArgs, SplitArgs, SynthArgs,
    TrainArgs,
};
use crate::manifest::RunManifest;
use crate::{CliError, PathContext, UsageError};

type CmdResult = Result<(), CliError>;

fn invalid(flag: &str, value: impl ToString, reason: &str) -> CliError {
    CliError::Usage(UsageError::InvalidValue {
        flag: flag.to_string(),
        value: value.to_string(),
        reason: reason.to_string(),
    })
}

fn require_positive(flag: &str, v: usize) -> Result<(), CliError> {
    if v == 0 {
        return Err(invalid(flag, v, "must be at least 1"));
    }
    Ok(())
}

fn require_fraction(flag: &str, v: f64) -> Result<(), CliError> {
    if !(v > 0.0 && v < 1.0) {
        return Err(invalid(flag, v, "must lie strictly between 0 and 1"));
    }
    Ok(())
}

struct Run<'a, A: Serialize> {
    name: &'static str,
    args: &'a A,
    seeds: serde_json::Value,
    inputs: Vec<PathBuf>,
    started: Instant,
}

impl<'a, A: Serialize> Run<'a, A> {
    fn new(
        name: &'static str,
        args: &'a A,
        seeds: serde_json::Value,
        inputs: Vec<PathBuf>,
    ) -> Self {
        Run {
            name,
            args,
            seeds,
            inputs,
            started: Instant::now(),
        }
    }

    /// Writes one manifest next to each artifact.
    fn finish(&self, outputs: &[PathBuf]) -> intentseq_core::Result<()> {
        let manifest = RunManifest {
            subcommand: self.name.to_string(),
            config: serde_json::to_value(self.args).expect("arguments serialize"),
            seeds: self.seeds.clone(),
            inputs: self.inputs.clone(),
            outputs: outputs.to_vec(),
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
            wall_clock_secs: self.started.elapsed().as_secs_f64(),
        };
        for artifact in outputs {
            manifest.write_next_to(artifact)?;
        }
        Ok(())
    }
}

pub fn dispatch(command: Command) -> CmdResult {
    match command {
        Command::Synth(a) => synth(&a),
        Command::Prepare(a) => prepare(&a),
        Command::Train(a) => train_cmd(&a),
        Command::Eval(a) => eval(&a),
        Command::Infer(a) => infer(&a),
        Command::Bench(a) => bench(&a),
    }
}

fn synth(a: &SynthArgs) -> CmdResult {
    require_positive("--videos", a.videos)?;
    require_positive("--frames", a.frames)?;
    let run = Run::new("synth", a, json!({ "seed": a.seed }), vec![]);
    let params = CorpusParams {
        n_videos: a.videos,
        frames: a.frames,
        seed: a.seed,
        difficulty: a.difficulty.into(),
    };
    let manifest = generate_corpus(&params, &a.out).at(&a.out)?;
    run.finish(std::slice::from_ref(&a.out))?;
    println!(
        "wrote {} videos x {} frames ({} difficulty) to {}; positive frame fraction {:.4}",
        a.videos,
        a.frames,
        params.difficulty,
        a.out.display(),
        manifest.positive_fraction
    );
    Ok(())
}

fn check_split(s: &SplitArgs) -> Result<(), CliError> {
    require_fraction("--test", s.test_fraction)?;
    require_fraction("--val", s.val_fraction)
}

/// Loads the corpus, applies the reversal table and cuts windows.
fn load_windows(s: &SplitArgs, seq_len: usize) -> Result<Vec<Window>, CliError> {
    let mut videos = load_corpus_dir(&s.data).at(&s.data)?;
    if videos.is_empty() {
        return Err(intentseq_core::Error::EmptyDataset).at(&s.data);
    }
    if let Some(path) = &s.relabel {
        let table = load_reversal_table(path).at(path)?;
        videos = videos
            .into_iter()
            .map(|v| match table.get(&v.video_id) {
                Some(&idx) => apply_backtrack_relabel(v, idx),
                None => Ok(v),
            })
            .collect::<intentseq_core::Result<_>>()
            .at(path)?;
    }
    Ok(videos
        .iter()
        .flat_map(|v| build_windows(v, seq_len))
        .collect())
}

fn split_windows(s: &SplitArgs, seq_len: usize) -> Result<Split, CliError> {
    let spec = SplitSpec {
        test_fraction: s.test_fraction,
        val_fraction: s.val_fraction,
        seed: s.split_seed,
        granularity: s.granularity.into(),
    };
    Ok(split_dataset(load_windows(s, seq_len)?, &spec)?)
}

fn split_inputs(s: &SplitArgs) -> Vec<PathBuf> {
    let mut v = vec![s.data.clone()];
    v.extend(s.relabel.clone());
    v
}

fn balance_line(name: &str, b: &ClassBalance) -> String {
    format!(
        "{name:<6} {:>7} windows  {:>7} crossing  {:>7} not crossing  ({:.2}% crossing)",
        b.positive + b.negative,
        b.positive,
        b.negative,
        b.positive_fraction * 100.0
    )
}

fn prepare(a: &PrepareArgs) -> CmdResult {
    check_split(&a.split)?;
    require_positive("--seq-len", a.seq_len)?;
    let run = Run::new(
        "prepare",
        a,
        json!({ "split_seed": a.split.split_seed }),
        split_inputs(&a.split),
    );
    let split = split_windows(&a.split, a.seq_len)?;
    let mut csv = String::from("video_id,start,target,partition\n");
    for (name, part) in [
        ("train", &split.train),
        ("val", &split.val),
        ("test", &split.test),
    ] {
        for w in part {
            writeln!(
                csv,
                "{},{},{},{name}",
                w.source.video_id, w.source.start, w.target
            )
            .expect("string write");
        }
    }
    write_atomic(&a.out, csv.as_bytes()).at(&a.out)?;
    run.finish(std::slice::from_ref(&a.out))?;
    println!(
        "{}",
        balance_line("train", &class_balance_stats(&split.train))
    );
    println!("{}", balance_line("val", &class_balance_stats(&split.val)));
    println!(
        "{}",
        balance_line("test", &class_balance_stats(&split.test))
    );
    println!("split index written to {}", a.out.display());
    Ok(())
}

fn train_cmd(a: &TrainArgs) -> CmdResult {
    check_split(&a.split)?;
    require_positive("--epochs", a.epochs)?;
    require_positive("--batch-size", a.batch_size)?;
    require_positive("--seq-len", a.seq_len)?;
    require_positive("--hidden", a.hidden)?;
    require_positive("--layers", a.layers)?;
    require_positive("--kernel", a.kernel)?;
    if !(a.lr.is_finite() && a.lr > 0.0) {
        return Err(invalid("--lr", a.lr, "must be positive"));
    }
    if !(0.0..1.0).contains(&a.dropout) {
        return Err(invalid("--dropout", a.dropout, "must lie in [0, 1)"));
    }
    let kind: ModelKind = a.model.into();
    if kind == ModelKind::Cnn1d && a.kernel > a.seq_len {
        return Err(invalid("--kernel", a.kernel, "must not exceed --seq-len"));
    }
    let model_config = ModelConfig {
        kind,
        input_size: ModelConfig::standard(kind).input_size,
        hidden: a.hidden,
        layers: a.layers,
        kernel: a.kernel,
        dropout_p: a.dropout,
        seq_len: a.seq_len,
    };
    let cfg = TrainConfig {
        epochs: a.epochs,
        batch_size: a.batch_size,
        learning_rate: a.lr,
        optimizer: a.optimizer.into(),
        seed: a.seed,
        ..TrainConfig::default()
    };
    let run = Run::new(
        "train",
        a,
        json!({ "seed": a.seed, "split_seed": a.split.split_seed }),
        split_inputs(&a.split),
    );
    let split = split_windows(&a.split, a.seq_len)?;
    let outcome = train(&split.train, &split.val, &model_config, &cfg)?;
    save_checkpoint(&outcome.checkpoint, &a.out).at(&a.out)?;
    let mut outputs = vec![a.out.clone()];
    if let Some(path) = &a.metrics {
        write_atomic(path, metrics_csv(&outcome.history).as_bytes()).at(path)?;
        outputs.push(path.clone());
    }
    run.finish(&outputs)?;

    println!(
        "{:>5} {:>10} {:>10} {:>9} {:>9} {:>9} {:>9}",
        "epoch", "train_loss", "val_loss", "train_acc", "val_acc", "train_auc", "val_auc"
    );
    for r in &outcome.history {
        println!(
            "{:>5} {:>10.4} {:>10.4} {:>9.4} {:>9.4} {:>9.4} {:>9.4}",
            r.epoch, r.train_loss, r.val_loss, r.train_acc, r.val_acc, r.train_auc, r.val_auc
        );
    }
    println!(
        "{kind}: {} parameters, {} train / {} val windows; best epoch {} (val AUC {:.4}) saved to {}",
        count_params(&model_config)?,
        split.train.len(),
        split.val.len(),
        outcome.checkpoint.epoch,
        outcome.checkpoint.best_val_auc,
        a.out.display()
    );
    Ok(())
}

fn eval(a: &EvalArgs) -> CmdResult {
    check_split(&a.split)?;
    let mut inputs = vec![a.model.clone()];
    inputs.extend(split_inputs(&a.split));
    let run = Run::new(
        "eval",
        a,
        json!({ "split_seed": a.split.split_seed }),
        inputs,
    );
    let ckpt = load_checkpoint(&a.model).at(&a.model)?;
    let split = split_windows(&a.split, ckpt.model.config.seq_len)?;
    let windows: Vec<Window> = match a.partition {
        PartitionArg::Train => split.train,
        PartitionArg::Val => split.val,
        PartitionArg::Test => split.test,
        PartitionArg::All => split
            .train
            .into_iter()
            .chain(split.val)
            .chain(split.test)
            .collect(),
    };
    let report = evaluate(&ckpt, &windows)?;
    if let Some(out) = &a.out {
        write_eval_csv(&report, out).at(out)?;
        run.finish(std::slice::from_ref(out))?;
    }
    println!("{report}");
    println!("({} windows)", report.windows);
    Ok(())
}

fn infer(a: &InferArgs) -> CmdResult {
    let run = Run::new(
        "infer",
        a,
        json!({}),
        vec![a.model.clone(), a.input.clone()],
    );
    let ckpt = load_checkpoint(&a.model).at(&a.model)?;
    let rows = read_landmark_rows(&a.input, false).at(&a.input)?;
    let preds = replay(Arc::new(ckpt.model), &rows.coords)?;
    write_atomic(&a.out, predictions_csv(&preds).as_bytes()).at(&a.out)?;
    run.finish(std::slice::from_ref(&a.out))?;
    let crossing = preds.iter().filter(|p| p.label_predicted == 1).count();
    println!(
        "{} frames read, {} predictions ({} crossing) written to {}",
        rows.coords.len(),
        preds.len(),
        crossing,
        a.out.display()
    );
    Ok(())
}

fn bench(a: &BenchArgs) -> CmdResult {
    if a.reps < MIN_BENCH_REPS {
        return Err(invalid(
            "--reps",
            a.reps,
            &format!("must be at least {MIN_BENCH_REPS}"),
        ));
    }
    let mut inputs = Vec::new();
    let model: Model<f32> = match (&a.model, a.kind) {
        (Some(path), _) => {
            inputs.push(path.clone());
            load_checkpoint(path).at(path)?.model
        }
        (None, Some(kind)) => Model::init(ModelConfig::standard(kind.into()), a.seed)?,
        (None, None) => {
            return Err(CliError::Usage(UsageError::MissingRequired(
                "--model, --kind".into(),
            )))
        }
    };
    let run = Run::new("bench", a, json!({ "seed": a.seed }), inputs);
    let stats = bench_latency(&model, a.reps, a.seed)?;
    let ms = |d: std::time::Duration| d.as_secs_f64() * 1e3;
    if let Some(out) = &a.out {
        let summary = json!({
            "kind": model.kind().as_str(),
            "reps": stats.reps,
            "mean_ms": ms(stats.mean),
            "p50_ms": ms(stats.p50),
            "p99_ms": ms(stats.p99),
        });
        let mut bytes = serde_json::to_vec_pretty(&summary).expect("summary serializes");
        bytes.push(b'\n');
        write_atomic(out, &bytes).at(out)?;
        run.finish(std::slice::from_ref(out))?;
    }
    println!(
        "{}: {} reps, mean {:.4} ms, p50 {:.4} ms, p99 {:.4} ms",
        model.kind(),
        stats.reps,
        ms(stats.mean),
        ms(stats.p50),
        ms(stats.p99)
    );
    Ok(())
}
