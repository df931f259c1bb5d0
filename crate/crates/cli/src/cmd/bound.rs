use std::process::ExitCode;

use anyhow::anyhow;
use serde::Serialize;
use ssrcps_core::bounds::{clopper_pearson_ucb, BinomialCount, BoundedSample, ErrorLevel};
use ssrcps_core::io::read_values;
use ssrcps_core::{UcbMethod, UcbSpec};

use crate::args::{BoundArgs, BoundKind};
use crate::failure::{CliResult, Context, Failure};
use crate::output::{args_hash, emit};

#[derive(Serialize)]
struct BoundReport {
    method: UcbMethod,
    delta: f64,
    n: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u64>,
    support: [f64; 2],
    ucb: f64,
    asymptotic: bool,
}

pub fn run(args: &BoundArgs, seed: u64) -> CliResult<ExitCode> {
    let delta = ErrorLevel::new(args.delta)?;
    let method = UcbMethod::from(args.method);
    let report = match (&args.input, args.n, args.k) {
        (None, Some(n), Some(k)) => {
            if args.method != BoundKind::Cp {
                return Err(Failure::usage(anyhow!(
                    "--n/--k apply to --method cp only; pass --input"
                )));
            }
            let ucb = clopper_pearson_ucb(BinomialCount::new(n, k)?, delta)?;
            BoundReport {
                method,
                delta: args.delta,
                n,
                k: Some(k),
                support: [0.0, 1.0],
                ucb,
                asymptotic: false,
            }
        }
        (Some(path), _, _) => {
            let values =
                read_values(path).context_with(|| format!("reading {}", path.display()))?;
            let sample = BoundedSample::new(values, args.lo, args.hi)?;
            let ucb = UcbSpec::new(method, delta).evaluate(&sample)?;
            BoundReport {
                method,
                delta: args.delta,
                n: sample.len() as u64,
                k: sample
                    .binary_count()
                    .filter(|_| args.method == BoundKind::Cp),
                support: [args.lo, args.hi],
                ucb,
                asymptotic: method.is_asymptotic(),
            }
        }
        _ => {
            return Err(Failure::usage(anyhow!(
                "pass --input, or --n and --k with --method cp"
            )))
        }
    };
    eprintln!("{} ucb = {}", method, report.ucb);
    emit(&report, &args_hash(args)?, seed, args.output.as_deref())?;
    Ok(ExitCode::SUCCESS)
}
