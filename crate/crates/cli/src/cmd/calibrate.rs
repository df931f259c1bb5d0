use std::process::ExitCode;

use anyhow::anyhow;
use ssrcps_core::io::{read_loss_table, read_semi_supervised};
use ssrcps_core::ppi::{
    naive_augmented_calibrate, ss_binary_calibrate, ss_general_calibrate_with, PowerTuning,
    SemiSupervisedLosses,
};
use ssrcps_core::rcps::{fixed_sequence_calibrate, labeled_rcps, CalibrationOutcome, RiskSpec};
use ssrcps_core::{UcbMethod, UcbSpec};

use crate::args::{CalibrateArgs, CalibrationMode};
use crate::failure::{CliResult, Context, Failure, EXIT_ABSTAIN};
use crate::output::{args_hash, emit};

use super::CALIBRATE_LEVELS;

fn parse_lambda(text: &str, tuning_fraction: f64) -> CliResult<PowerTuning> {
    match text.trim().to_ascii_lowercase().replace('_', "-").as_str() {
        "one" | "1" => Ok(PowerTuning::FixedOne),
        "clt-inline" => Ok(PowerTuning::CltInline),
        "wsr-split" => Ok(PowerTuning::WsrSplit { tuning_fraction }),
        other => other
            .parse::<f64>()
            .ok()
            .filter(|l| l.is_finite())
            .map(|lambda| PowerTuning::Fixed { lambda })
            .ok_or_else(|| {
                Failure::usage(anyhow!(
                    "--lambda `{text}`: expected one, clt-inline, wsr-split or a number"
                ))
            }),
    }
}

fn semi_supervised(args: &CalibrateArgs) -> CliResult<SemiSupervisedLosses> {
    let imputed = args
        .imputed
        .as_ref()
        .ok_or_else(|| Failure::usage(anyhow!("--imputed is required in this mode")))?;
    let unlabeled = args
        .unlabeled
        .as_ref()
        .ok_or_else(|| Failure::usage(anyhow!("--unlabeled is required in this mode")))?;
    read_semi_supervised(&args.labeled, imputed, unlabeled)
        .context_with(|| "reading loss tables".into())
}

pub fn run(args: &CalibrateArgs, seed: u64) -> CliResult<ExitCode> {
    let levels = args
        .levels
        .resolve(&CALIBRATE_LEVELS, args.mode == CalibrationMode::SsBinary)?;
    let spec = RiskSpec::new(levels.alpha, levels.delta)?;
    let tuning = parse_lambda(&args.lambda, args.tuning_fraction)?;
    let bound = args.bound.map(UcbMethod::from);
    if args.mode == CalibrationMode::SsGeneral
        && matches!(
            bound,
            Some(UcbMethod::ClopperPearson | UcbMethod::Hoeffding)
        )
    {
        return Err(Failure::usage(anyhow!(
            "ss-general supports --bound wsr, wsr-scaled or clt"
        )));
    }

    let outcome: CalibrationOutcome = match args.mode {
        CalibrationMode::Labeled => {
            let table = read_loss_table(&args.labeled)
                .context_with(|| format!("reading {}", args.labeled.display()))?;
            match bound {
                Some(m) => fixed_sequence_calibrate(&table, spec, UcbSpec::new(m, spec.delta()))?,
                None => labeled_rcps(&table, spec)?,
            }
        }
        CalibrationMode::SsGeneral => {
            let data = semi_supervised(args)?;
            let shuffle = args.shuffle.then_some(seed);
            ss_general_calibrate_with(
                &data,
                spec,
                bound.unwrap_or(UcbMethod::Wsr),
                tuning,
                shuffle,
            )?
        }
        CalibrationMode::SsBinary => {
            let data = semi_supervised(args)?;
            let split = levels.split.expect("split resolved for ss-binary");
            ss_binary_calibrate(&data, levels.alpha, split)?
        }
        CalibrationMode::Naive => {
            eprintln!(
                "WARNING: naive mode pools imputed losses as if they were labeled. \
                 Its risk-control guarantee is INVALID; use it only as a baseline."
            );
            let table = read_loss_table(&args.labeled)
                .context_with(|| format!("reading {}", args.labeled.display()))?;
            let unlabeled = args
                .unlabeled
                .as_ref()
                .ok_or_else(|| Failure::usage(anyhow!("--unlabeled is required in naive mode")))?;
            let unl = read_loss_table(unlabeled)
                .context_with(|| format!("reading {}", unlabeled.display()))?;
            // The imputed labeled table is not used by the pooled bound.
            let data = SemiSupervisedLosses::new(table.clone(), table, unl)?;
            naive_augmented_calibrate(&data, spec)?
        }
    };

    match &outcome.selected {
        Some(label) => eprintln!(
            "selected {label} (index {}), {} bounds evaluated",
            outcome.selected_index.unwrap_or_default(),
            outcome.ucb_trace.len()
        ),
        None => eprintln!(
            "abstain: the first grid point's bound is not below alpha = {}",
            levels.alpha
        ),
    }
    if outcome.asymptotic {
        eprintln!("note: bound is asymptotic");
    }
    emit(&outcome, &args_hash(args)?, seed, args.output.as_deref())?;
    Ok(if outcome.is_abstain() {
        ExitCode::from(EXIT_ABSTAIN)
    } else {
        ExitCode::SUCCESS
    })
}
