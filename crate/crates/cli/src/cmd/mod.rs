mod bound;
mod calibrate;
mod etsc;
mod experiment;

use std::process::ExitCode;

use anyhow::anyhow;
use ssrcps_core::ppi::BudgetSplit;

use crate::args::{BoundKind, Cli, Command, LevelArgs};
use crate::failure::{CliResult, Failure};
use ssrcps_core::UcbMethod;

pub fn run(cli: Cli) -> CliResult<ExitCode> {
    let seed = cli.seed;
    match cli.command {
        Command::Bound(args) => bound::run(&args, seed.unwrap_or(0)),
        Command::Calibrate(args) => calibrate::run(&args, seed.unwrap_or(0)),
        Command::Experiment(args) => experiment::run(&args, seed),
        Command::Etsc(cmd) => etsc::run(cmd, seed.unwrap_or(0)),
    }
}

impl From<BoundKind> for UcbMethod {
    fn from(kind: BoundKind) -> Self {
        match kind {
            BoundKind::Cp => UcbMethod::ClopperPearson,
            BoundKind::Hoeffding => UcbMethod::Hoeffding,
            BoundKind::Clt => UcbMethod::Clt,
            BoundKind::Wsr => UcbMethod::Wsr,
            BoundKind::WsrScaled => UcbMethod::WsrScaled,
        }
    }
}

/// Level defaults for one command family.
pub struct LevelDefaults {
    pub alpha: f64,
    pub delta: f64,
    pub delta1: f64,
    pub delta2: f64,
}

/// (0.15, 0.1) with split (0.01, 0.09).
pub const CALIBRATE_LEVELS: LevelDefaults = LevelDefaults {
    alpha: 0.15,
    delta: 0.1,
    delta1: 0.01,
    delta2: 0.09,
};

/// (0.1, 0.01) with split (0.001, 0.009).
pub const ETSC_LEVELS: LevelDefaults = LevelDefaults {
    alpha: 0.1,
    delta: 0.01,
    delta1: 0.001,
    delta2: 0.009,
};

pub struct ResolvedLevels {
    pub alpha: f64,
    pub delta: f64,
    pub split: Option<BudgetSplit>,
}

impl LevelArgs {
    /// Fills omitted levels from `defaults`. The split is built only when
    /// `needs_split`; a `delta` given without its split must come with both
    /// halves.
    pub fn resolve(
        &self,
        defaults: &LevelDefaults,
        needs_split: bool,
    ) -> CliResult<ResolvedLevels> {
        let alpha = self.alpha.unwrap_or(defaults.alpha);
        let delta = self.delta.unwrap_or(defaults.delta);
        let split = if needs_split {
            let (d1, d2) = match (self.delta1, self.delta2) {
                (Some(a), Some(b)) => (a, b),
                (None, None) if self.delta.is_none() => (defaults.delta1, defaults.delta2),
                (None, None) => {
                    return Err(Failure::usage(anyhow!(
                        "--delta {delta} needs --delta1 and --delta2 with delta1 + delta2 = delta"
                    )))
                }
                (Some(a), None) => (a, delta - a),
                (None, Some(b)) => (delta - b, b),
            };
            Some(BudgetSplit::new(delta, d1, d2)?)
        } else {
            None
        };
        Ok(ResolvedLevels {
            alpha,
            delta,
            split,
        })
    }
}
