use std::fs::File;
use std::path::Path;
use std::process::ExitCode;

use serde::Serialize;
use serde_json::Value;
use ssrcps_core::etsc::{
    self, candidate_screening, check_disjoint, stage2_calibrate, EtscRiskSpec, EtscSample,
    Stage2Mode, ThresholdVector,
};
use ssrcps_core::io::read_etsc;

use crate::args::{EtscCalibrateArgs, EtscCommand, EtscMode, EvaluateArgs, ScreenArgs};
use crate::failure::{CliResult, Context, Failure, EXIT_ABSTAIN};
use crate::output::{args_hash, emit};

use super::ETSC_LEVELS;

impl From<EtscMode> for Stage2Mode {
    fn from(mode: EtscMode) -> Self {
        match mode {
            EtscMode::BinaryCp => Stage2Mode::BinaryCp,
            EtscMode::GeneralWsr => Stage2Mode::GeneralWsr,
            EtscMode::GeneralClt => Stage2Mode::GeneralClt,
            EtscMode::LabeledOnly => Stage2Mode::LabeledOnly,
        }
    }
}

pub fn run(cmd: EtscCommand, seed: u64) -> CliResult<ExitCode> {
    match cmd {
        EtscCommand::Screen(args) => screen(&args, seed),
        EtscCommand::Calibrate(args) => calibrate(&args, seed),
        EtscCommand::Evaluate(args) => evaluate(&args, seed),
    }
}

fn samples(path: &Path) -> CliResult<Vec<EtscSample>> {
    read_etsc(path).context_with(|| format!("reading {}", path.display()))
}

/// Accepts a bare array or any object with a `thresholds` field.
fn read_thresholds(path: &Path) -> CliResult<ThresholdVector> {
    let parse = || -> ssrcps_core::Result<ThresholdVector> {
        let value: Value = serde_json::from_reader(File::open(path)?)?;
        let array = match value {
            Value::Object(mut map) => map.remove("thresholds").unwrap_or(Value::Null),
            other => other,
        };
        Ok(serde_json::from_value(array)?)
    };
    parse().context_with(|| format!("reading thresholds from {}", path.display()))
}

#[derive(Serialize)]
struct ScreenReport<'a> {
    thresholds: &'a ThresholdVector,
    alpha: f64,
    resolution: f64,
    n_stage1: usize,
}

fn screen(args: &ScreenArgs, seed: u64) -> CliResult<ExitCode> {
    let stage1 = samples(&args.stage1)?;
    let alpha = args.alpha.unwrap_or(ETSC_LEVELS.alpha);
    let spec = EtscRiskSpec::new(alpha, ETSC_LEVELS.delta)?.with_resolution(args.resolution)?;
    let thresholds = candidate_screening(&stage1, &spec)?;
    eprintln!("candidate thresholds {:?}", thresholds.values());
    let report = ScreenReport {
        thresholds: &thresholds,
        alpha,
        resolution: args.resolution,
        n_stage1: stage1.len(),
    };
    emit(&report, &args_hash(args)?, seed, args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}

fn calibrate(args: &EtscCalibrateArgs, seed: u64) -> CliResult<ExitCode> {
    let mode = Stage2Mode::from(args.mode);
    let levels = args
        .levels
        .resolve(&ETSC_LEVELS, mode == Stage2Mode::BinaryCp)?;
    let mut spec = EtscRiskSpec::new(levels.alpha, levels.delta)?;
    spec.split = levels.split;
    let candidate = read_thresholds(&args.candidate)?;
    let stage2 = samples(&args.stage2)?;
    if let Some(path) = &args.stage1 {
        check_disjoint(&samples(path)?, &stage2)?;
    }
    let unlabeled = match &args.unlabeled {
        Some(path) => samples(path)?,
        None if mode == Stage2Mode::LabeledOnly => Vec::new(),
        None => {
            return Err(Failure::usage(anyhow::anyhow!(
                "--unlabeled is required in mode {mode}"
            )))
        }
    };
    let outcome = stage2_calibrate(&stage2, &unlabeled, &candidate, &spec, mode)?;
    eprintln!(
        "{mode}: accepted {} revealed vectors, thresholds {:?}",
        outcome.accepted,
        outcome.thresholds.values()
    );
    if outcome.asymptotic {
        eprintln!("note: bound is asymptotic");
    }
    emit(&outcome, &args_hash(args)?, seed, args.output.as_deref())?;
    Ok(if outcome.thresholds.is_identity() {
        ExitCode::from(EXIT_ABSTAIN)
    } else {
        ExitCode::SUCCESS
    })
}

fn evaluate(args: &EvaluateArgs, seed: u64) -> CliResult<ExitCode> {
    let test = samples(&args.test)?;
    let thresholds = read_thresholds(&args.thresholds)?;
    let evaluation = etsc::evaluate(&test, &thresholds)?;
    eprintln!(
        "t0 = {:?}, mean halt time {:.3}, max conditional risk {:.4}",
        evaluation.t0,
        evaluation.mean_halt_time,
        evaluation.max_conditional_risk()
    );
    emit(&evaluation, &args_hash(args)?, seed, args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
