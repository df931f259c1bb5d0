use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

/// Risk-controlling calibration with labeled and imputed losses.
#[derive(Debug, Parser)]
#[command(name = "ssrcps", version, about, long_about = None)]
pub struct Cli {
    /// Seed recorded in every output; for `experiment` it replaces the
    /// config's master seed.
    #[arg(long, global = true, env = "SSRCPS_SEED")]
    pub seed: Option<u64>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Upper confidence bound on the mean of a bounded sample.
    Bound(BoundArgs),
    /// Fixed-sequence calibration over a loss table grid.
    Calibrate(CalibrateArgs),
    /// Monte-Carlo coverage experiment from a TOML or JSON config.
    Experiment(ExperimentArgs),
    /// Threshold calibration for early classification.
    #[command(subcommand)]
    Etsc(EtscCommand),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundKind {
    Cp,
    Hoeffding,
    Clt,
    Wsr,
    WsrScaled,
}

#[derive(Debug, Args, Serialize)]
pub struct BoundArgs {
    #[arg(long, value_enum)]
    pub method: BoundKind,
    /// Error level.
    #[arg(long)]
    pub delta: f64,
    /// One value per line, optional header.
    #[arg(long)]
    pub input: Option<PathBuf>,
    /// Trials, for `cp` without an input file.
    #[arg(long, requires = "k", conflicts_with = "input")]
    pub n: Option<u64>,
    /// Failures, for `cp` without an input file.
    #[arg(long, requires = "n")]
    pub k: Option<u64>,
    /// Lower end of the support.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub lo: f64,
    /// Upper end of the support.
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub hi: f64,
    /// JSON output path; stdout when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    /// Labeled losses only.
    Labeled,
    /// Block decomposition of the prediction-powered risk.
    SsGeneral,
    /// Budget split with exact binomial bounds; binary losses.
    SsBinary,
    /// Pools labeled and imputed losses. Invalid guarantee.
    Naive,
}

#[derive(Debug, Args, Serialize)]
pub struct LevelArgs {
    /// Target risk level.
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Total error level.
    #[arg(long)]
    pub delta: Option<f64>,
    /// Error level for the unlabeled bound (`ss-binary`, etsc `binary-cp`).
    #[arg(long)]
    pub delta1: Option<f64>,
    /// Error level for the rectifier bound (`ss-binary`, etsc `binary-cp`).
    #[arg(long)]
    pub delta2: Option<f64>,
}

#[derive(Debug, Args, Serialize)]
pub struct CalibrateArgs {
    #[arg(long, value_enum, default_value = "labeled")]
    pub mode: CalibrationMode,
    /// True losses of the labeled rows (`sample_id` plus one column per grid point).
    #[arg(long)]
    pub labeled: PathBuf,
    /// Imputed losses of the labeled rows.
    #[arg(long, required_if_eq_any = [("mode", "ss-general"), ("mode", "ss-binary")])]
    pub imputed: Option<PathBuf>,
    /// Imputed losses of the unlabeled rows.
    #[arg(long, required_if_eq_any = [("mode", "ss-general"), ("mode", "ss-binary"), ("mode", "naive")])]
    pub unlabeled: Option<PathBuf>,
    /// Bound family. Labeled mode defaults to `cp` on binary tables and `wsr`
    /// otherwise; `ss-general` defaults to `wsr`.
    #[arg(long, value_enum)]
    pub bound: Option<BoundKind>,
    /// Power parameter for `ss-general`: `one`, `clt-inline`, `wsr-split` or a number.
    #[arg(long, default_value = "one", allow_negative_numbers = true)]
    pub lambda: String,
    /// Fraction of both sets held out to tune lambda in `wsr-split`.
    #[arg(long, default_value_t = 0.1)]
    pub tuning_fraction: f64,
    /// Shuffle unlabeled rows with the seed before forming blocks.
    #[arg(long)]
    pub shuffle: bool,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct ExperimentArgs {
    /// Experiment config (TOML, or JSON by extension).
    #[arg(long)]
    pub config: PathBuf,
    /// Overrides the config's trial count.
    #[arg(long)]
    pub trials: Option<usize>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Directory for `<name>.json` and `<name>.csv`.
    #[arg(long, default_value = ".")]
    pub output_dir: PathBuf,
}

#[derive(Debug, Subcommand)]
pub enum EtscCommand {
    /// Stage-1 screening of candidate thresholds.
    Screen(ScreenArgs),
    /// Stage-2 calibration of a screened candidate.
    Calibrate(EtscCalibrateArgs),
    /// Halt curve and conditional risk of a threshold vector on a test set.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args, Serialize)]
pub struct ScreenArgs {
    /// Stage-1 labeled trajectories (CSV or JSON).
    #[arg(long)]
    pub stage1: PathBuf,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// Step of the threshold sweep over [0, 1].
    #[arg(long, default_value_t = 0.01)]
    pub resolution: f64,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EtscMode {
    BinaryCp,
    GeneralWsr,
    GeneralClt,
    LabeledOnly,
}

#[derive(Debug, Args, Serialize)]
pub struct EtscCalibrateArgs {
    /// Stage-2 labeled trajectories.
    #[arg(long)]
    pub stage2: PathBuf,
    /// Unlabeled trajectories with imputed labels; not needed for `labeled-only`.
    #[arg(long, required_if_eq_any = [("mode", "binary-cp"), ("mode", "general-wsr"), ("mode", "general-clt")])]
    pub unlabeled: Option<PathBuf>,
    /// Candidate vector from `etsc screen`.
    #[arg(long)]
    pub candidate: PathBuf,
    /// Stage-1 file, checked for shared sample ids.
    #[arg(long)]
    pub stage1: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "binary-cp")]
    pub mode: EtscMode,
    #[command(flatten)]
    pub levels: LevelArgs,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args, Serialize)]
pub struct EvaluateArgs {
    /// Test trajectories with true labels.
    #[arg(long)]
    pub test: PathBuf,
    /// Threshold vector (output of `etsc calibrate` or `etsc screen`, or a bare array).
    #[arg(long)]
    pub thresholds: PathBuf,
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}
