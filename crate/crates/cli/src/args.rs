use std::path::PathBuf;

use clap::{ArgGroup, Args, Parser, Subcommand, ValueEnum};
use intentseq_core::dataset::Granularity;
use intentseq_core::synthgen::Difficulty;
use intentseq_core::training::OptimizerKind;
use intentseq_core::ModelKind;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "intentseq",
    version,
    about = "Pedestrian crossing-intent prediction from pose landmarks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic labeled landmark corpus
    Synth(SynthArgs),
    /// Window a corpus, split it and report class balance
    Prepare(PrepareArgs),
    /// Train a model and save its best checkpoint
    Train(TrainArgs),
    /// Score a checkpoint on a held-out partition
    Eval(EvalArgs),
    /// Stream a landmark CSV through a checkpoint
    Infer(InferArgs),
    /// Measure single-window inference latency
    Bench(BenchArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Synth(_) => "synth",
            Command::Prepare(_) => "prepare",
            Command::Train(_) => "train",
            Command::Eval(_) => "eval",
            Command::Infer(_) => "infer",
            Command::Bench(_) => "bench",
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum KindArg {
    Lstm,
    Gru,
    #[value(alias = "cnn")]
    Cnn1d,
}

impl From<KindArg> for ModelKind {
    fn from(k: KindArg) -> Self {
        match k {
            KindArg::Lstm => ModelKind::Lstm,
            KindArg::Gru => ModelKind::Gru,
            KindArg::Cnn1d => ModelKind::Cnn1d,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum DifficultyArg {
    Easy,
    Hard,
}

impl From<DifficultyArg> for Difficulty {
    fn from(d: DifficultyArg) -> Self {
        match d {
            DifficultyArg::Easy => Difficulty::Easy,
            DifficultyArg::Hard => Difficulty::Hard,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum GranularityArg {
    Window,
    Video,
}

impl From<GranularityArg> for Granularity {
    fn from(g: GranularityArg) -> Self {
        match g {
            GranularityArg::Window => Granularity::Window,
            GranularityArg::Video => Granularity::Video,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OptimizerArg {
    Adam,
    Sgd,
}

impl From<OptimizerArg> for OptimizerKind {
    fn from(o: OptimizerArg) -> Self {
        match o {
            OptimizerArg::Adam => OptimizerKind::Adam,
            OptimizerArg::Sgd => OptimizerKind::Sgd,
        }
    }
}

#[derive(Clone, Copy, Debug, Serialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum PartitionArg {
    Train,
    Val,
    Test,
    All,
}

#[derive(Debug, Args, Serialize)]
pub struct SynthArgs {
    /// Output directory for `video_<k>.csv` files and `manifest.csv`
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 60)]
    pub videos: usize,
    #[arg(long, default_value_t = 300)]
    pub frames: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = DifficultyArg::Easy)]
    pub difficulty: DifficultyArg,
}

/// How windows are cut from a corpus and partitioned.
#[derive(Clone, Debug, Args, Serialize)]
pub struct SplitArgs {
    /// Directory of landmark CSVs
    #[arg(long)]
    pub data: PathBuf,
    #[arg(long = "test", default_value_t = 0.1)]
    pub test_fraction: f64,
    /// Fraction of the non-test windows used for validation
    #[arg(long = "val", default_value_t = 0.2)]
    pub val_fraction: f64,
    #[arg(long, default_value_t = 0)]
    pub split_seed: u64,
    #[arg(long, value_enum, default_value_t = GranularityArg::Window)]
    pub granularity: GranularityArg,
    /// CSV of `video_id,reversal_index` rows applied before windowing
    #[arg(long)]
    pub relabel: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct PrepareArgs {
    #[command(flatten)]
    pub split: SplitArgs,
    /// Split index CSV to write
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 15)]
    pub seq_len: usize,
}

#[derive(Debug, Args, Serialize)]
pub struct TrainArgs {
    #[arg(long, value_enum)]
    pub model: KindArg,
    #[command(flatten)]
    pub split: SplitArgs,
    /// Checkpoint path
    #[arg(long)]
    pub out: PathBuf,
    /// Per-epoch metrics CSV
    #[arg(long)]
    pub metrics: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub epochs: usize,
    #[arg(long, default_value_t = 32)]
    pub batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, value_enum, default_value_t = OptimizerArg::Adam)]
    pub optimizer: OptimizerArg,
    /// Seed for initialization, shuffling and dropout
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 15)]
    pub seq_len: usize,
    #[arg(long, default_value_t = 50)]
    pub hidden: usize,
    #[arg(long, default_value_t = 2)]
    pub layers: usize,
    #[arg(long, default_value_t = 3)]
    pub kernel: usize,
    #[arg(long, default_value_t = 0.5)]
    pub dropout: f32,
}

#[derive(Debug, Args, Serialize)]
pub struct EvalArgs {
    /// Checkpoint path
    #[arg(long)]
    pub model: PathBuf,
    #[command(flatten)]
    pub split: SplitArgs,
    #[arg(long, value_enum, default_value_t = PartitionArg::Test)]
    pub partition: PartitionArg,
    /// Optional report CSV
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct InferArgs {
    /// Checkpoint path
    #[arg(long)]
    pub model: PathBuf,
    /// Landmark CSV to replay; a label column is ignored
    #[arg(long)]
    pub input: PathBuf,
    /// Predictions CSV to write
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args, Serialize)]
#[command(group(ArgGroup::new("source").required(true).args(["model", "kind"])))]
pub struct BenchArgs {
    /// Checkpoint to time
    #[arg(long, conflicts_with = "kind")]
    pub model: Option<PathBuf>,
    /// Time a freshly initialized standard-size model of this kind instead
    #[arg(long, value_enum)]
    pub kind: Option<KindArg>,
    #[arg(long, default_value_t = 1000)]
    pub reps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Optional JSON latency summary
    #[arg(long)]
    pub out: Option<PathBuf>,
}
