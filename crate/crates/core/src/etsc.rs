//! Early time-series classification: threshold stopping rules and their
//! calibration under the conditional accuracy-gap risk.
//!
//! A sample is halted at the first timestep whose confidence reaches that
//! step's threshold, or at the last step. The gap loss is 1 when the full
//! prediction is right and the early prediction at the halt time is wrong.

use std::collections::HashSet;
use std::fmt;

use serde::de::{self, Deserializer, SeqAccess, Visitor};
use serde::ser::{SerializeSeq, Serializer};
use serde::{Deserialize, Serialize};

use crate::bounds::{clopper_pearson_ucb, BinomialCount, ErrorLevel, UcbMethod, UcbSpec};
use crate::error::{Error, Result};
use crate::ppi::{pp_block_sample, BudgetSplit};

/// Class label.
pub type Label = u32;

/// One trajectory of per-timestep confidences and early predictions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtscSample {
    pub sample_id: String,
    pub confidence: Vec<f64>,
    pub early_pred: Vec<Label>,
    pub full_pred: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub true_label: Option<Label>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub imputed_label: Option<Label>,
}

impl EtscSample {
    pub fn new(
        sample_id: impl Into<String>,
        confidence: Vec<f64>,
        early_pred: Vec<Label>,
        full_pred: Label,
        true_label: Option<Label>,
        imputed_label: Option<Label>,
    ) -> Result<Self> {
        let sample = Self {
            sample_id: sample_id.into(),
            confidence,
            early_pred,
            full_pred,
            true_label,
            imputed_label,
        };
        sample.validate()?;
        Ok(sample)
    }

    pub fn validate(&self) -> Result<()> {
        if self.confidence.is_empty() {
            return Err(Error::Shape(format!(
                "sample {} has no timesteps",
                self.sample_id
            )));
        }
        if self.confidence.len() != self.early_pred.len() {
            return Err(Error::Shape(format!(
                "sample {} has {} confidences and {} early predictions",
                self.sample_id,
                self.confidence.len(),
                self.early_pred.len()
            )));
        }
        if let Some((index, &value)) = self
            .confidence
            .iter()
            .enumerate()
            .find(|(_, c)| !(0.0..=1.0).contains(*c))
        {
            return Err(Error::OutOfSupport {
                index,
                value,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(())
    }

    pub fn t_max(&self) -> usize {
        self.confidence.len()
    }

    fn label(&self, source: LabelSource) -> Result<Label> {
        let (label, source_name) = match source {
            LabelSource::True => (self.true_label, "true"),
            LabelSource::Imputed => (self.imputed_label, "imputed"),
        };
        label.ok_or_else(|| Error::MissingLabel {
            source_name,
            sample: self.sample_id.clone(),
        })
    }

    fn gap_at(&self, label: Label, tau: usize) -> u8 {
        u8::from(label == self.full_pred && label != self.early_pred[tau - 1])
    }
}

/// Which label a gap loss is computed against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LabelSource {
    True,
    Imputed,
}

/// Per-timestep thresholds; `+inf` disables stopping at that step.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdVector(Vec<f64>);

impl ThresholdVector {
    pub fn new(thresholds: Vec<f64>) -> Result<Self> {
        if thresholds.is_empty() {
            return Err(Error::Shape("threshold vector is empty".into()));
        }
        if let Some((index, &value)) = thresholds
            .iter()
            .enumerate()
            .find(|(_, &q)| !(q == f64::INFINITY || (0.0..=1.0).contains(&q)))
        {
            return Err(Error::OutOfSupport {
                index,
                value,
                lo: 0.0,
                hi: 1.0,
            });
        }
        Ok(Self(thresholds))
    }

    /// The rule that never stops early.
    pub fn identity(t_max: usize) -> Self {
        Self(vec![f64::INFINITY; t_max])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().all(|q| q.is_infinite())
    }
}

impl Serialize for ThresholdVector {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.0.len()))?;
        for &q in &self.0 {
            if q.is_infinite() {
                seq.serialize_element("inf")?;
            } else {
                seq.serialize_element(&q)?;
            }
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for ThresholdVector {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Entry {
            Number(f64),
            Text(String),
        }

        struct EntriesVisitor;

        impl<'de> Visitor<'de> for EntriesVisitor {
            type Value = Vec<f64>;

            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("a sequence of thresholds in [0, 1] or \"inf\"")
            }

            fn visit_seq<A: SeqAccess<'de>>(
                self,
                mut seq: A,
            ) -> std::result::Result<Vec<f64>, A::Error> {
                let mut out = Vec::new();
                while let Some(entry) = seq.next_element::<Entry>()? {
                    out.push(match entry {
                        Entry::Number(q) => q,
                        Entry::Text(s) => match s.trim().to_ascii_lowercase().as_str() {
                            "inf" | "+inf" | "infinity" => f64::INFINITY,
                            other => {
                                return Err(de::Error::custom(format!(
                                    "invalid threshold `{other}`"
                                )))
                            }
                        },
                    });
                }
                Ok(out)
            }
        }

        let values = deserializer.deserialize_seq(EntriesVisitor)?;
        ThresholdVector::new(values).map_err(de::Error::custom)
    }
}

/// Levels for the two-stage procedure.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EtscRiskSpec {
    pub alpha: f64,
    pub delta: ErrorLevel,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<BudgetSplit>,
    #[serde(default = "EtscRiskSpec::default_resolution")]
    pub screen_resolution: f64,
}

impl EtscRiskSpec {
    pub const DEFAULT_RESOLUTION: f64 = 0.01;

    fn default_resolution() -> f64 {
        Self::DEFAULT_RESOLUTION
    }

    pub fn new(alpha: f64, delta: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(Error::InvalidAlpha(alpha));
        }
        Ok(Self {
            alpha,
            delta: ErrorLevel::new(delta)?,
            split: None,
            screen_resolution: Self::DEFAULT_RESOLUTION,
        })
    }

    pub fn with_split(mut self, delta1: f64, delta2: f64) -> Result<Self> {
        self.split = Some(BudgetSplit::new(self.delta.value(), delta1, delta2)?);
        Ok(self)
    }

    pub fn with_resolution(mut self, resolution: f64) -> Result<Self> {
        if !(resolution > 0.0 && resolution < 1.0) {
            return Err(Error::Config(format!(
                "screening resolution {resolution} must lie in (0, 1)"
            )));
        }
        self.screen_resolution = resolution;
        Ok(self)
    }
}

fn check_lengths(sample: &EtscSample, q: &ThresholdVector) -> Result<()> {
    if sample.t_max() != q.len() {
        return Err(Error::Shape(format!(
            "sample {} has {} timesteps, thresholds have {}",
            sample.sample_id,
            sample.t_max(),
            q.len()
        )));
    }
    Ok(())
}

fn halt_unchecked(confidence: &[f64], q: &[f64]) -> usize {
    confidence
        .iter()
        .zip(q)
        .position(|(c, q)| c >= q)
        .map_or(confidence.len(), |t| t + 1)
}

/// First timestep (1-indexed) whose confidence reaches the threshold, or
/// `t_max`.
pub fn halt_time(sample: &EtscSample, q: &ThresholdVector) -> Result<usize> {
    check_lengths(sample, q)?;
    Ok(halt_unchecked(&sample.confidence, q.values()))
}

/// `max(1{Y = full} - 1{Y = early(tau)}, 0)` with `Y` from `source`.
pub fn gap_loss(sample: &EtscSample, source: LabelSource, q: &ThresholdVector) -> Result<u8> {
    let tau = halt_time(sample, q)?;
    Ok(sample.gap_at(sample.label(source)?, tau))
}

/// Mean gap loss over samples halted by `t`; `None` when nobody has halted.
pub fn conditional_empirical_risk(
    samples: &[EtscSample],
    source: LabelSource,
    q: &ThresholdVector,
    t: usize,
) -> Result<Option<f64>> {
    if t == 0 || t > q.len() {
        return Err(Error::IndexOutOfRange {
            index: t,
            len: q.len(),
        });
    }
    let mut halted = 0_usize;
    let mut losses = 0_usize;
    for s in samples {
        let tau = halt_time(s, q)?;
        if tau <= t {
            halted += 1;
            losses += usize::from(s.gap_at(s.label(source)?, tau));
        }
    }
    Ok((halted > 0).then(|| losses as f64 / halted as f64))
}

/// Fraction of samples halted by each timestep.
pub fn halt_curve(samples: &[EtscSample], q: &ThresholdVector) -> Result<Vec<f64>> {
    if samples.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut counts = vec![0_usize; q.len()];
    for s in samples {
        counts[halt_time(s, q)? - 1] += 1;
    }
    let total = samples.len() as f64;
    let mut cumulative = 0;
    Ok(counts
        .into_iter()
        .map(|c| {
            cumulative += c;
            cumulative as f64 / total
        })
        .collect())
}

fn common_t_max(samples: &[EtscSample]) -> Result<usize> {
    let first = samples.first().ok_or(Error::EmptySample)?;
    let t_max = first.t_max();
    for s in samples {
        s.validate()?;
        if s.t_max() != t_max {
            return Err(Error::Shape(format!(
                "sample {} has {} timesteps, expected {t_max}",
                s.sample_id,
                s.t_max()
            )));
        }
    }
    Ok(t_max)
}

/// Errors when the two labeled stages share a sample id.
pub fn check_disjoint(stage1: &[EtscSample], stage2: &[EtscSample]) -> Result<()> {
    let ids: HashSet<&str> = stage1.iter().map(|s| s.sample_id.as_str()).collect();
    match stage2.iter().find(|s| ids.contains(s.sample_id.as_str())) {
        Some(s) => Err(Error::StageOverlap(s.sample_id.clone())),
        None => Ok(()),
    }
}

/// Stage 1: for each timestep in turn, the smallest threshold on the
/// `screen_resolution` grid whose conditional empirical gap risk is at most
/// `alpha`. No guarantee is attached.
pub fn candidate_screening(stage1: &[EtscSample], spec: &EtscRiskSpec) -> Result<ThresholdVector> {
    let t_max = common_t_max(stage1)?;
    let labels = stage1
        .iter()
        .map(|s| s.label(LabelSource::True))
        .collect::<Result<Vec<_>>>()?;
    let steps = (1.0 / spec.screen_resolution).round() as usize;

    // Samples not yet halted before the current timestep.
    let mut active: Vec<usize> = (0..stage1.len()).collect();
    // Halted samples so far and their summed loss.
    let mut halted = 0_usize;
    let mut halted_loss = 0_usize;
    let mut eta = vec![f64::INFINITY; t_max];

    for t in 1..=t_max {
        let mut chosen = f64::INFINITY;
        for s in 0..=steps {
            let xi = (s as f64 * spec.screen_resolution).min(1.0);
            let (mut h, mut l) = (halted, halted_loss);
            for &i in &active {
                let sample = &stage1[i];
                if t == t_max || sample.confidence[t - 1] >= xi {
                    h += 1;
                    l += usize::from(sample.gap_at(labels[i], t));
                }
            }
            if h == 0 {
                break;
            }
            if l as f64 / h as f64 <= spec.alpha {
                chosen = xi;
                break;
            }
        }
        eta[t - 1] = chosen;
        active.retain(|&i| {
            let sample = &stage1[i];
            if t == t_max || sample.confidence[t - 1] >= chosen {
                halted += 1;
                halted_loss += usize::from(sample.gap_at(labels[i], t));
                false
            } else {
                true
            }
        });
    }
    ThresholdVector::new(eta)
}

/// Bound used to test each revealed threshold vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage2Mode {
    /// Clopper-Pearson on unlabeled imputed gaps at `delta1` plus on the
    /// clipped labeled rectifier at `delta2`.
    BinaryCp,
    /// Betting bound on the block decomposition.
    GeneralWsr,
    /// Normal-approximation bound on the block decomposition.
    GeneralClt,
    /// Clopper-Pearson on labeled gaps only.
    LabeledOnly,
}

impl Stage2Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::BinaryCp => "binary_cp",
            Self::GeneralWsr => "general_wsr",
            Self::GeneralClt => "general_clt",
            Self::LabeledOnly => "labeled_only",
        }
    }

    pub fn is_asymptotic(self) -> bool {
        self == Self::GeneralClt
    }
}

impl fmt::Display for Stage2Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Stage2Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().replace('-', "_").as_str() {
            "binary_cp" | "binary" => Ok(Self::BinaryCp),
            "general_wsr" | "wsr" => Ok(Self::GeneralWsr),
            "general_clt" | "clt" => Ok(Self::GeneralClt),
            "labeled_only" | "labeled" => Ok(Self::LabeledOnly),
            other => Err(Error::Parse(format!("unknown stage-2 mode `{other}`"))),
        }
    }
}

/// Why a revealed vector failed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopReason {
    BoundAboveAlpha,
    EmptyLabeled,
    EmptyUnlabeled,
    TooFewUnlabeled,
    TooFewLabeled,
}

/// One revealed vector and the bounds computed for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Step {
    /// Timestep whose threshold was revealed (1-indexed).
    pub revealed: usize,
    /// Bounds for `t' = revealed ..`, up to the first failure.
    pub ucbs: Vec<f64>,
    pub accepted: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stop_reason: Option<StopReason>,
}

/// Stage-2 result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stage2Outcome {
    pub thresholds: ThresholdVector,
    pub mode: Stage2Mode,
    pub alpha: f64,
    pub delta: f64,
    /// Number of revealed vectors accepted.
    pub accepted: usize,
    pub asymptotic: bool,
    pub steps: Vec<Stage2Step>,
}

/// Stage 2: reveals candidate thresholds from the last timestep backwards and
/// keeps the longest prefix of the walk whose bounds stay strictly below
/// `alpha` at every `t'` from the revealed step to `t_max`.
pub fn stage2_calibrate(
    labeled: &[EtscSample],
    unlabeled: &[EtscSample],
    candidate: &ThresholdVector,
    spec: &EtscRiskSpec,
    mode: Stage2Mode,
) -> Result<Stage2Outcome> {
    let t_max = common_t_max(labeled)?;
    if candidate.len() != t_max {
        return Err(Error::Shape(format!(
            "candidate has {} thresholds for {t_max} timesteps",
            candidate.len()
        )));
    }
    let needs_unlabeled = mode != Stage2Mode::LabeledOnly;
    if needs_unlabeled && common_t_max(unlabeled)? != t_max {
        return Err(Error::Shape(
            "labeled and unlabeled timesteps differ".into(),
        ));
    }
    let split = match (mode, spec.split) {
        (Stage2Mode::BinaryCp, Some(split)) => Some(split),
        (Stage2Mode::BinaryCp, None) => {
            return Err(Error::Config(
                "binary stage-2 mode needs delta1 and delta2".into(),
            ))
        }
        _ => None,
    };

    let y_true = labeled
        .iter()
        .map(|s| s.label(LabelSource::True))
        .collect::<Result<Vec<_>>>()?;
    let y_lab_imp = if needs_unlabeled {
        labeled
            .iter()
            .map(|s| s.label(LabelSource::Imputed))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let y_unl = if needs_unlabeled {
        unlabeled
            .iter()
            .map(|s| s.label(LabelSource::Imputed))
            .collect::<Result<Vec<_>>>()?
    } else {
        Vec::new()
    };
    let unlabeled: &[EtscSample] = if needs_unlabeled { unlabeled } else { &[] };

    let mut accepted_q = vec![f64::INFINITY; t_max];
    let mut accepted = 0;
    let mut steps = Vec::new();
    let mut tau_lab = vec![t_max; labeled.len()];
    let mut tau_unl = vec![t_max; unlabeled.len()];

    'reveal: for t in (1..=t_max).rev() {
        let mut q = accepted_q.clone();
        q[t - 1] = candidate.values()[t - 1];
        // Only step t changed, so halt times can only move down to t.
        let next_tau = |s: &EtscSample, tau: usize| {
            if t < tau && s.confidence[t - 1] >= q[t - 1] {
                t
            } else {
                tau
            }
        };
        let new_lab: Vec<usize> = labeled
            .iter()
            .zip(&tau_lab)
            .map(|(s, &tau)| next_tau(s, tau))
            .collect();
        let new_unl: Vec<usize> = unlabeled
            .iter()
            .zip(&tau_unl)
            .map(|(s, &tau)| next_tau(s, tau))
            .collect();

        let mut step = Stage2Step {
            revealed: t,
            ucbs: Vec::new(),
            accepted: false,
            stop_reason: None,
        };
        for t_prime in t..=t_max {
            let bound = match stage2_bound(
                mode, spec, split, t_prime, labeled, &new_lab, &y_true, &y_lab_imp, unlabeled,
                &new_unl, &y_unl,
            )? {
                Ok(b) => b,
                Err(reason) => {
                    step.stop_reason = Some(reason);
                    steps.push(step);
                    break 'reveal;
                }
            };
            step.ucbs.push(bound);
            if bound.is_nan() || bound >= spec.alpha {
                step.stop_reason = Some(StopReason::BoundAboveAlpha);
                steps.push(step);
                break 'reveal;
            }
        }
        step.accepted = true;
        steps.push(step);
        accepted_q = q;
        accepted += 1;
        tau_lab = new_lab;
        tau_unl = new_unl;
    }

    Ok(Stage2Outcome {
        thresholds: ThresholdVector::new(accepted_q)?,
        mode,
        alpha: spec.alpha,
        delta: spec.delta.value(),
        accepted,
        asymptotic: mode.is_asymptotic(),
        steps,
    })
}

#[allow(clippy::too_many_arguments)]
fn stage2_bound(
    mode: Stage2Mode,
    spec: &EtscRiskSpec,
    split: Option<BudgetSplit>,
    t_prime: usize,
    labeled: &[EtscSample],
    tau_lab: &[usize],
    y_true: &[Label],
    y_lab_imp: &[Label],
    unlabeled: &[EtscSample],
    tau_unl: &[usize],
    y_unl: &[Label],
) -> Result<std::result::Result<f64, StopReason>> {
    let in_i: Vec<usize> = (0..labeled.len())
        .filter(|&i| tau_lab[i] <= t_prime)
        .collect();
    if in_i.is_empty() {
        return Ok(Err(StopReason::EmptyLabeled));
    }
    let in_j: Vec<usize> = (0..unlabeled.len())
        .filter(|&j| tau_unl[j] <= t_prime)
        .collect();
    let gap_true = |i: usize| labeled[i].gap_at(y_true[i], tau_lab[i]);
    let gap_lab_imp = |i: usize| labeled[i].gap_at(y_lab_imp[i], tau_lab[i]);
    let gap_unl = |j: usize| unlabeled[j].gap_at(y_unl[j], tau_unl[j]);
    let n_i = in_i.len() as u64;

    let bound = match mode {
        Stage2Mode::LabeledOnly => {
            let k = in_i.iter().map(|&i| u64::from(gap_true(i))).sum();
            clopper_pearson_ucb(BinomialCount::new(n_i, k)?, spec.delta)?
        }
        Stage2Mode::BinaryCp => {
            if in_j.is_empty() {
                return Ok(Err(StopReason::EmptyUnlabeled));
            }
            let split = split.expect("binary mode has a split");
            let k_u = in_j.iter().map(|&j| u64::from(gap_unl(j))).sum();
            let k_r = in_i
                .iter()
                .filter(|&&i| gap_true(i) > gap_lab_imp(i))
                .count() as u64;
            clopper_pearson_ucb(BinomialCount::new(in_j.len() as u64, k_u)?, split.delta1())?
                + clopper_pearson_ucb(BinomialCount::new(n_i, k_r)?, split.delta2())?
        }
        Stage2Mode::GeneralWsr | Stage2Mode::GeneralClt => {
            if in_j.len() < in_i.len() {
                return Ok(Err(StopReason::TooFewUnlabeled));
            }
            if mode == Stage2Mode::GeneralClt && in_i.len() < 2 {
                return Ok(Err(StopReason::TooFewLabeled));
            }
            let l: Vec<f64> = in_i.iter().map(|&i| f64::from(gap_true(i))).collect();
            let lt: Vec<f64> = in_i.iter().map(|&i| f64::from(gap_lab_imp(i))).collect();
            let lu: Vec<f64> = in_j.iter().map(|&j| f64::from(gap_unl(j))).collect();
            let w = pp_block_sample(&l, &lt, &lu, 1.0)?;
            let method = if mode == Stage2Mode::GeneralWsr {
                UcbMethod::Wsr
            } else {
                UcbMethod::Clt
            };
            UcbSpec::new(method, spec.delta).evaluate(&w)?
        }
    };
    Ok(Ok(bound))
}

/// Halt curve and conditional gap risk of a rule on a labeled test set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EtscEvaluation {
    pub thresholds: ThresholdVector,
    pub halt_curve: Vec<f64>,
    /// Conditional risk at each `t`; `None` before anybody has halted.
    pub conditional_risk: Vec<Option<f64>>,
    /// First timestep with a nonempty halted set (1-indexed).
    pub t0: Option<usize>,
    pub mean_halt_time: f64,
}

impl EtscEvaluation {
    /// Largest conditional risk over `t >= t0`.
    pub fn max_conditional_risk(&self) -> f64 {
        self.conditional_risk
            .iter()
            .flatten()
            .copied()
            .fold(0.0, f64::max)
    }

    /// Whether some `t >= t0` has conditional risk above `alpha`.
    pub fn violates(&self, alpha: f64) -> bool {
        self.conditional_risk.iter().flatten().any(|&r| r > alpha)
    }
}

pub fn evaluate(test: &[EtscSample], q: &ThresholdVector) -> Result<EtscEvaluation> {
    let t_max = common_t_max(test)?;
    if q.len() != t_max {
        return Err(Error::Shape(format!(
            "thresholds have {} entries for {t_max} timesteps",
            q.len()
        )));
    }
    let mut halted = vec![0_usize; t_max];
    let mut losses = vec![0_usize; t_max];
    let mut total_tau = 0_usize;
    for s in test {
        let tau = halt_unchecked(&s.confidence, q.values());
        halted[tau - 1] += 1;
        losses[tau - 1] += usize::from(s.gap_at(s.label(LabelSource::True)?, tau));
        total_tau += tau;
    }
    let n = test.len() as f64;
    let (mut h, mut l) = (0, 0);
    let mut halt_curve = Vec::with_capacity(t_max);
    let mut conditional_risk = Vec::with_capacity(t_max);
    for t in 0..t_max {
        h += halted[t];
        l += losses[t];
        halt_curve.push(h as f64 / n);
        conditional_risk.push((h > 0).then(|| l as f64 / h as f64));
    }
    let t0 = conditional_risk
        .iter()
        .position(Option::is_some)
        .map(|t| t + 1);
    Ok(EtscEvaluation {
        thresholds: q.clone(),
        halt_curve,
        conditional_risk,
        t0,
        mean_halt_time: total_tau as f64 / n,
    })
}
