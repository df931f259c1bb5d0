//! Repeated calibration on synthetic trials and coverage summaries.

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bounds::{UcbMethod, UcbSpec};
use crate::error::{Error, Result};
use crate::etsc::{self, EtscRiskSpec, Stage2Mode};
use crate::ppi::{self, BudgetSplit, PowerTuning};
use crate::rcps::{self, CalibrationOutcome, RiskSpec};

use super::scenario::{generate_etsc, generate_losses, EtscScenario, LossScenario, ScenarioConfig};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Calibrators the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    RcpsLabeledCp,
    RcpsLabeledWsr,
    SsBinary,
    SsGeneralWsr,
    SsGeneralWsrScaled,
    SsGeneralClt,
    SsGeneralCltTuned,
    SsGeneralWsrSplit,
    NaiveAugmented,
    EtscLabeledOnly,
    EtscBinary,
    EtscGeneralWsr,
    EtscGeneralClt,
}

impl Method {
    pub const ALL: [Method; 13] = [
        Self::RcpsLabeledCp,
        Self::RcpsLabeledWsr,
        Self::SsBinary,
        Self::SsGeneralWsr,
        Self::SsGeneralWsrScaled,
        Self::SsGeneralClt,
        Self::SsGeneralCltTuned,
        Self::SsGeneralWsrSplit,
        Self::NaiveAugmented,
        Self::EtscLabeledOnly,
        Self::EtscBinary,
        Self::EtscGeneralWsr,
        Self::EtscGeneralClt,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::RcpsLabeledCp => "rcps_labeled_cp",
            Self::RcpsLabeledWsr => "rcps_labeled_wsr",
            Self::SsBinary => "ss_binary",
            Self::SsGeneralWsr => "ss_general_wsr",
            Self::SsGeneralWsrScaled => "ss_general_wsr_scaled",
            Self::SsGeneralClt => "ss_general_clt",
            Self::SsGeneralCltTuned => "ss_general_clt_tuned",
            Self::SsGeneralWsrSplit => "ss_general_wsr_split",
            Self::NaiveAugmented => "naive_augmented",
            Self::EtscLabeledOnly => "etsc_labeled_only",
            Self::EtscBinary => "etsc_binary",
            Self::EtscGeneralWsr => "etsc_general_wsr",
            Self::EtscGeneralClt => "etsc_general_clt",
        }
    }

    pub fn is_etsc(self) -> bool {
        self.stage2_mode().is_some()
    }

    pub fn needs_binary_losses(self) -> bool {
        matches!(
            self,
            Self::RcpsLabeledCp | Self::SsBinary | Self::NaiveAugmented
        )
    }

    pub fn needs_split(self) -> bool {
        matches!(self, Self::SsBinary | Self::EtscBinary)
    }

    pub fn is_asymptotic(self) -> bool {
        matches!(
            self,
            Self::SsGeneralClt | Self::SsGeneralCltTuned | Self::EtscGeneralClt
        )
    }

    pub fn is_unsafe(self) -> bool {
        self == Self::NaiveAugmented
    }

    fn stage2_mode(self) -> Option<Stage2Mode> {
        match self {
            Self::EtscLabeledOnly => Some(Stage2Mode::LabeledOnly),
            Self::EtscBinary => Some(Stage2Mode::BinaryCp),
            Self::EtscGeneralWsr => Some(Stage2Mode::GeneralWsr),
            Self::EtscGeneralClt => Some(Stage2Mode::GeneralClt),
            _ => None,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Self::ALL
            .into_iter()
            .find(|m| m.as_str() == key)
            .ok_or_else(|| Error::Parse(format!("unknown method `{s}`")))
    }
}

/// Risk and error levels of an experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Levels {
    pub alpha: f64,
    pub delta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    /// Trajectory experiments: a trial violates when some test conditional
    /// risk exceeds `alpha + test_slack`.
    #[serde(default)]
    pub test_slack: f64,
    /// Trajectory experiments: stage-1 screening resolution.
    #[serde(default = "default_resolution")]
    pub screen_resolution: f64,
}

fn default_resolution() -> f64 {
    EtscRiskSpec::DEFAULT_RESOLUTION
}

impl Levels {
    pub fn new(alpha: f64, delta: f64) -> Self {
        Self {
            alpha,
            delta,
            delta1: None,
            delta2: None,
            test_slack: 0.0,
            screen_resolution: default_resolution(),
        }
    }

    pub fn with_split(mut self, delta1: f64, delta2: f64) -> Self {
        self.delta1 = Some(delta1);
        self.delta2 = Some(delta2);
        self
    }

    fn split(&self) -> Result<Option<BudgetSplit>> {
        match (self.delta1, self.delta2) {
            (Some(d1), Some(d2)) => BudgetSplit::new(self.delta, d1, d2).map(Some),
            (None, None) => Ok(None),
            _ => Err(Error::Config(
                "delta1 and delta2 must be given together".into(),
            )),
        }
    }
}

/// A full experiment: scenario, levels, methods and trial count.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub name: String,
    pub trials: usize,
    pub methods: Vec<Method>,
    pub scenario: ScenarioConfig,
    pub levels: Levels,
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let config: Self = toml::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    /// Reads `.json` or TOML.
    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)?;
        let config: Self = if path
            .extension()
            .is_some_and(|e| e.eq_ignore_ascii_case("json"))
        {
            serde_json::from_str(&text)?
        } else {
            toml::from_str(&text)?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.methods.is_empty() {
            return Err(Error::Config("no methods requested".into()));
        }
        self.scenario.validate()?;
        RiskSpec::new(self.levels.alpha, self.levels.delta)?;
        let split = self.levels.split()?;
        if self.levels.test_slack < 0.0 || !self.levels.test_slack.is_finite() {
            return Err(Error::Config(
                "test_slack must be a nonnegative number".into(),
            ));
        }
        for &m in &self.methods {
            if m.is_etsc() != self.scenario.kind.is_etsc() {
                return Err(Error::Config(format!(
                    "method `{m}` does not apply to scenario kind {:?}",
                    self.scenario.kind
                )));
            }
            if m.needs_binary_losses() && !self.scenario.kind.is_binary() {
                return Err(Error::Config(format!("method `{m}` needs binary losses")));
            }
            if m.needs_split() && split.is_none() {
                return Err(Error::Config(format!(
                    "method `{m}` needs delta1 and delta2"
                )));
            }
        }
        Ok(())
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        crate::io::json_hash(self).expect("config serialises")
    }
}

/// One method on one trial.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub trial_index: u64,
    /// Selected grid index (loss scenarios) or number of accepted
    /// revealed vectors (trajectory scenarios).
    pub selected: Option<usize>,
    pub stop_index: usize,
    /// Known risk at the selection; 0 on abstain. For trajectories, the
    /// largest test conditional risk at or after `t0`.
    pub true_risk: f64,
    pub violated: bool,
    pub abstained: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ucb_at_selected: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pp_risk_at_selected: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub ucb_trace: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub halt_curve: Option<Vec<f64>>,
}

/// Aggregates over trials for one method.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageReport {
    pub method: Method,
    pub trials: usize,
    pub violations: usize,
    pub violation_rate: f64,
    /// `3 sqrt(delta (1 - delta) / trials)`.
    pub slack_3sigma: f64,
    /// `delta + slack_3sigma`.
    pub violation_bound: f64,
    pub mean_true_risk: f64,
    pub std_true_risk: f64,
    /// 5%, 25%, 50%, 75% and 95% quantiles of the true risk.
    pub true_risk_quantiles: [f64; 5],
    pub mean_stop_index: f64,
    pub std_stop_index: f64,
    pub abstain_rate: f64,
    pub asymptotic: bool,
    pub unsafe_guarantee: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mean_halt_curve: Option<Vec<f64>>,
    pub config_hash: String,
}

/// Per-method reports plus provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub tool_version: String,
    pub config_hash: String,
    pub seed: u64,
    pub name: String,
    pub trials: usize,
    pub scenario: ScenarioConfig,
    pub levels: Levels,
    pub reports: Vec<CoverageReport>,
}

impl ExperimentReport {
    pub fn get(&self, method: Method) -> Option<&CoverageReport> {
        self.reports.iter().find(|r| r.method == method)
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    /// One row per method.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record([
            "name",
            "method",
            "trials",
            "violations",
            "violation_rate",
            "violation_bound",
            "mean_true_risk",
            "std_true_risk",
            "q05_true_risk",
            "q50_true_risk",
            "q95_true_risk",
            "mean_stop_index",
            "std_stop_index",
            "abstain_rate",
            "asymptotic",
            "unsafe_guarantee",
            "alpha",
            "delta",
            "seed",
            "config_hash",
        ])?;
        for r in &self.reports {
            w.write_record([
                self.name.clone(),
                r.method.to_string(),
                r.trials.to_string(),
                r.violations.to_string(),
                r.violation_rate.to_string(),
                r.violation_bound.to_string(),
                r.mean_true_risk.to_string(),
                r.std_true_risk.to_string(),
                r.true_risk_quantiles[0].to_string(),
                r.true_risk_quantiles[2].to_string(),
                r.true_risk_quantiles[4].to_string(),
                r.mean_stop_index.to_string(),
                r.std_stop_index.to_string(),
                r.abstain_rate.to_string(),
                r.asymptotic.to_string(),
                r.unsafe_guarantee.to_string(),
                self.levels.alpha.to_string(),
                self.levels.delta.to_string(),
                self.seed.to_string(),
                self.config_hash.clone(),
            ])?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Io(e.into_error()))?;
        String::from_utf8(bytes).map_err(|e| Error::Parse(e.to_string()))
    }
}

/// Report plus every per-trial result, indexed `[method][trial]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRun {
    pub report: ExperimentReport,
    pub results: Vec<Vec<TrialResult>>,
}

impl ExperimentRun {
    pub fn results_for(&self, method: Method) -> Option<&[TrialResult]> {
        self.report
            .reports
            .iter()
            .position(|r| r.method == method)
            .map(|i| self.results[i].as_slice())
    }
}

fn loss_result(
    trial_index: u64,
    scenario: &LossScenario,
    outcome: CalibrationOutcome,
    alpha: f64,
) -> Result<TrialResult> {
    let selected = outcome.selected_index;
    let true_risk = selected.map_or(0.0, |i| scenario.true_risks[i]);
    Ok(TrialResult {
        trial_index,
        selected,
        stop_index: outcome.stop_index,
        true_risk,
        violated: true_risk > alpha,
        abstained: selected.is_none(),
        ucb_at_selected: selected.map(|i| outcome.ucb_trace[i]),
        pp_risk_at_selected: selected
            .map(|i| ppi::pp_risk(&scenario.data, i, 1.0))
            .transpose()?,
        ucb_trace: outcome.ucb_trace,
        halt_curve: None,
    })
}

fn run_loss_method(
    method: Method,
    scenario: &LossScenario,
    levels: &Levels,
    trial_index: u64,
) -> Result<TrialResult> {
    let spec = RiskSpec::new(levels.alpha, levels.delta)?;
    let data = &scenario.data;
    let general =
        |m: UcbMethod, tuning: PowerTuning| ppi::ss_general_calibrate(data, spec, m, tuning);
    let outcome = match method {
        Method::RcpsLabeledCp => rcps::fixed_sequence_calibrate(
            data.labeled_true(),
            spec,
            UcbSpec::new(UcbMethod::ClopperPearson, spec.delta()),
        )?,
        Method::RcpsLabeledWsr => rcps::fixed_sequence_calibrate(
            data.labeled_true(),
            spec,
            UcbSpec::new(UcbMethod::Wsr, spec.delta()),
        )?,
        Method::SsBinary => {
            let split = levels
                .split()?
                .ok_or_else(|| Error::Config("ss_binary needs a split".into()))?;
            ppi::ss_binary_calibrate(data, levels.alpha, split)?
        }
        Method::SsGeneralWsr => general(UcbMethod::Wsr, PowerTuning::FixedOne)?,
        Method::SsGeneralWsrScaled => general(UcbMethod::WsrScaled, PowerTuning::FixedOne)?,
        Method::SsGeneralClt => general(UcbMethod::Clt, PowerTuning::FixedOne)?,
        Method::SsGeneralCltTuned => general(UcbMethod::Clt, PowerTuning::CltInline)?,
        Method::SsGeneralWsrSplit => general(UcbMethod::Wsr, PowerTuning::wsr_split())?,
        Method::NaiveAugmented => ppi::naive_augmented_calibrate(data, spec)?,
        other => {
            return Err(Error::Config(format!(
                "method `{other}` needs trajectories"
            )))
        }
    };
    loss_result(trial_index, scenario, outcome, levels.alpha)
}

fn run_etsc_method(
    method: Method,
    scenario: &EtscScenario,
    candidate: &etsc::ThresholdVector,
    spec: &EtscRiskSpec,
    levels: &Levels,
    trial_index: u64,
) -> Result<TrialResult> {
    let mode = method
        .stage2_mode()
        .ok_or_else(|| Error::Config(format!("method `{method}` needs loss tables")))?;
    let out = etsc::stage2_calibrate(&scenario.stage2, &scenario.unlabeled, candidate, spec, mode)?;
    let eval = etsc::evaluate(&scenario.test, &out.thresholds)?;
    let true_risk = eval.max_conditional_risk();
    let abstained = out.thresholds.is_identity();
    Ok(TrialResult {
        trial_index,
        selected: (!abstained).then_some(out.accepted),
        stop_index: out.accepted,
        true_risk,
        violated: eval.violates(levels.alpha + levels.test_slack),
        abstained,
        ucb_at_selected: None,
        pp_risk_at_selected: None,
        ucb_trace: Vec::new(),
        halt_curve: Some(eval.halt_curve),
    })
}

/// All requested methods on one trial.
pub fn run_trial(config: &ExperimentConfig, trial_index: u64) -> Result<Vec<TrialResult>> {
    let levels = &config.levels;
    if config.scenario.kind.is_etsc() {
        let scenario = generate_etsc(&config.scenario, trial_index)?;
        let mut spec = EtscRiskSpec::new(levels.alpha, levels.delta)?
            .with_resolution(levels.screen_resolution)?;
        spec.split = levels.split()?;
        etsc::check_disjoint(&scenario.stage1, &scenario.stage2)?;
        let candidate = etsc::candidate_screening(&scenario.stage1, &spec)?;
        config
            .methods
            .iter()
            .map(|&m| run_etsc_method(m, &scenario, &candidate, &spec, levels, trial_index))
            .collect()
    } else {
        let scenario = generate_losses(&config.scenario, trial_index)?;
        config
            .methods
            .iter()
            .map(|&m| run_loss_method(m, &scenario, levels, trial_index))
            .collect()
    }
}

fn mean_std(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let n = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / n;
    let var = if n > 1.0 {
        values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1.0)
    } else {
        0.0
    };
    (mean, var.sqrt())
}

/// Linear interpolation between order statistics.
fn quantile(sorted: &[f64], p: f64) -> f64 {
    let pos = p * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (sorted[hi] - sorted[lo]) * (pos - lo as f64)
}

fn summarise(
    method: Method,
    results: &[TrialResult],
    delta: f64,
    config_hash: &str,
) -> CoverageReport {
    let trials = results.len();
    let violations = results.iter().filter(|r| r.violated).count();
    let slack = 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    let (mean_true_risk, std_true_risk) = mean_std(results.iter().map(|r| r.true_risk));
    let mut sorted: Vec<f64> = results.iter().map(|r| r.true_risk).collect();
    sorted.sort_by(f64::total_cmp);
    let (mean_stop_index, std_stop_index) = mean_std(results.iter().map(|r| r.stop_index as f64));
    let mean_halt_curve = method.is_etsc().then(|| {
        let curves: Vec<&Vec<f64>> = results
            .iter()
            .filter_map(|r| r.halt_curve.as_ref())
            .collect();
        let len = curves.first().map_or(0, |c| c.len());
        (0..len)
            .map(|t| curves.iter().map(|c| c[t]).sum::<f64>() / curves.len() as f64)
            .collect()
    });
    CoverageReport {
        method,
        trials,
        violations,
        violation_rate: violations as f64 / trials as f64,
        slack_3sigma: slack,
        violation_bound: delta + slack,
        mean_true_risk,
        std_true_risk,
        true_risk_quantiles: [0.05, 0.25, 0.5, 0.75, 0.95].map(|p| quantile(&sorted, p)),
        mean_stop_index,
        std_stop_index,
        abstain_rate: results.iter().filter(|r| r.abstained).count() as f64 / trials as f64,
        asymptotic: method.is_asymptotic(),
        unsafe_guarantee: method.is_unsafe(),
        mean_halt_curve,
        config_hash: config_hash.to_owned(),
    }
}

/// Runs every trial (in parallel on the current rayon pool) and aggregates
/// in trial order, so the report does not depend on the pool size.
pub fn run_coverage_experiment(config: &ExperimentConfig) -> Result<ExperimentRun> {
    config.validate()?;
    let per_trial: Vec<Vec<TrialResult>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| run_trial(config, t))
        .collect::<Result<_>>()?;
    let hash = config.hash();
    let mut results = vec![Vec::with_capacity(config.trials); config.methods.len()];
    for trial in per_trial {
        for (slot, r) in results.iter_mut().zip(trial) {
            slot.push(r);
        }
    }
    let reports = config
        .methods
        .iter()
        .zip(&results)
        .map(|(&m, r)| summarise(m, r, config.levels.delta, &hash))
        .collect();
    Ok(ExperimentRun {
        report: ExperimentReport {
            tool_version: TOOL_VERSION.to_owned(),
            config_hash: hash,
            seed: config.scenario.master_seed,
            name: config.name.clone(),
            trials: config.trials,
            scenario: config.scenario.clone(),
            levels: config.levels,
            reports,
        },
        results,
    })
}
