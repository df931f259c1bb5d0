//! Semi-supervised risk estimation and calibration.
//!
//! A small labeled set with true losses `L_i` and imputed losses `L~_i` is
//! combined with a large unlabeled set carrying only imputed losses `L~_j`.
//! The prediction-powered risk
//! `lambda * mean(L~_unl) + mean(L) - lambda * mean(L~_lab)` is unbiased for
//! the true risk for every `lambda`.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::bounds::{
    clopper_pearson_ucb, BinomialCount, BoundedSample, ErrorLevel, UcbMethod, UcbSpec,
};
use crate::error::{Error, Result};
use crate::rcps::{
    fixed_sequence, outcome_from_walk, CalibrationOutcome, LossTable, ParameterGrid, RiskSpec,
};

/// Labeled true losses, labeled imputed losses and unlabeled imputed losses
/// over one grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SemiSupervisedLosses {
    labeled_true: LossTable,
    labeled_imputed: LossTable,
    unlabeled_imputed: LossTable,
}

impl SemiSupervisedLosses {
    pub fn new(
        labeled_true: LossTable,
        labeled_imputed: LossTable,
        unlabeled_imputed: LossTable,
    ) -> Result<Self> {
        let labels = |t: &LossTable| t.grid().labels().map(str::to_owned).collect::<Vec<_>>();
        let grid = labels(&labeled_true);
        if labels(&labeled_imputed) != grid || labels(&unlabeled_imputed) != grid {
            return Err(Error::Shape("loss tables use different grids".into()));
        }
        if labeled_true.sample_ids() != labeled_imputed.sample_ids() {
            return Err(Error::Shape(
                "labeled true and imputed tables have different rows".into(),
            ));
        }
        Ok(Self {
            labeled_true,
            labeled_imputed,
            unlabeled_imputed,
        })
    }

    pub fn grid(&self) -> &ParameterGrid {
        self.labeled_true.grid()
    }

    /// Number of labeled rows `n`.
    pub fn n_labeled(&self) -> usize {
        self.labeled_true.n_samples()
    }

    /// Number of unlabeled rows `N`.
    pub fn n_unlabeled(&self) -> usize {
        self.unlabeled_imputed.n_samples()
    }

    pub fn labeled_true(&self) -> &LossTable {
        &self.labeled_true
    }

    pub fn labeled_imputed(&self) -> &LossTable {
        &self.labeled_imputed
    }

    pub fn unlabeled_imputed(&self) -> &LossTable {
        &self.unlabeled_imputed
    }

    fn columns(&self, index: usize) -> Result<(&[f64], &[f64], &[f64])> {
        Ok((
            self.labeled_true.column(index)?,
            self.labeled_imputed.column(index)?,
            self.unlabeled_imputed.column(index)?,
        ))
    }

    /// Splits off the first `labeled` labeled rows and `unlabeled` unlabeled
    /// rows; returns `(head, rest)`.
    fn split_at(&self, labeled: usize, unlabeled: usize) -> Result<(Self, Self)> {
        let rows = |t: &LossTable, r: std::ops::Range<usize>| t.select_rows(&r.collect::<Vec<_>>());
        let (n, big_n) = (self.n_labeled(), self.n_unlabeled());
        let head = Self::new(
            rows(&self.labeled_true, 0..labeled)?,
            rows(&self.labeled_imputed, 0..labeled)?,
            rows(&self.unlabeled_imputed, 0..unlabeled)?,
        )?;
        let rest = Self::new(
            rows(&self.labeled_true, labeled..n)?,
            rows(&self.labeled_imputed, labeled..n)?,
            rows(&self.unlabeled_imputed, unlabeled..big_n)?,
        )?;
        Ok((head, rest))
    }
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Partition of the unlabeled rows into `n` contiguous blocks of
/// `floor(N / n)` rows; the tail is dropped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub block_size: usize,
    pub used_unlabeled: usize,
    pub dropped_tail: usize,
    /// Shuffle unlabeled rows with this seed before blocking.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shuffle_seed: Option<u64>,
}

impl BlockPlan {
    pub fn new(n_labeled: usize, n_unlabeled: usize) -> Result<Self> {
        if n_labeled == 0 {
            return Err(Error::EmptySample);
        }
        let block_size = n_unlabeled / n_labeled;
        if block_size == 0 {
            return Err(Error::TooFewSamples {
                what: "block decomposition (unlabeled rows)",
                needed: n_labeled,
                got: n_unlabeled,
            });
        }
        let used_unlabeled = block_size * n_labeled;
        Ok(Self {
            block_size,
            used_unlabeled,
            dropped_tail: n_unlabeled - used_unlabeled,
            shuffle_seed: None,
        })
    }

    pub fn for_data(data: &SemiSupervisedLosses) -> Result<Self> {
        Self::new(data.n_labeled(), data.n_unlabeled())
    }

    pub fn with_shuffle(mut self, seed: u64) -> Self {
        self.shuffle_seed = Some(seed);
        self
    }

    fn unlabeled_order(&self, n_unlabeled: usize) -> Option<Vec<usize>> {
        self.shuffle_seed.map(|seed| {
            let mut order: Vec<usize> = (0..n_unlabeled).collect();
            order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
            order
        })
    }
}

/// Error budget `delta = delta1 + delta2` for the binary calibrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetSplit {
    delta1: ErrorLevel,
    delta2: ErrorLevel,
}

impl BudgetSplit {
    pub fn new(delta: f64, delta1: f64, delta2: f64) -> Result<Self> {
        let split = Self::from_parts(delta1, delta2)?;
        if (delta1 + delta2 - delta).abs() > 1e-12 {
            return Err(Error::InvalidSplit {
                delta,
                delta1,
                delta2,
            });
        }
        ErrorLevel::new(delta)?;
        Ok(split)
    }

    pub fn from_parts(delta1: f64, delta2: f64) -> Result<Self> {
        let split = Self {
            delta1: ErrorLevel::new(delta1)?,
            delta2: ErrorLevel::new(delta2)?,
        };
        ErrorLevel::new(delta1 + delta2)?;
        Ok(split)
    }

    pub fn delta1(&self) -> ErrorLevel {
        self.delta1
    }

    pub fn delta2(&self) -> ErrorLevel {
        self.delta2
    }

    pub fn total(&self) -> f64 {
        self.delta1.value() + self.delta2.value()
    }
}

/// How the power parameter `lambda` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum PowerTuning {
    /// `lambda = 1`.
    #[default]
    FixedOne,
    /// A caller-chosen constant.
    Fixed { lambda: f64 },
    /// `lambda*` per column on the full data; asymptotic validity only.
    CltInline,
    /// `lambda*` per column on a held-out fraction of both sets.
    WsrSplit { tuning_fraction: f64 },
}

impl PowerTuning {
    pub const DEFAULT_TUNING_FRACTION: f64 = 0.1;

    pub fn wsr_split() -> Self {
        Self::WsrSplit {
            tuning_fraction: Self::DEFAULT_TUNING_FRACTION,
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Self::FixedOne => "fixed_one",
            Self::Fixed { .. } => "fixed",
            Self::CltInline => "clt_inline",
            Self::WsrSplit { .. } => "wsr_split",
        }
    }
}

/// Semi-supervised fields added to a [`CalibrationOutcome`].
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SemiSupervisedInfo {
    pub lambda_mode: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub lambda_per_column: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta2: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dropped_tail: Option<usize>,
    /// Columns where the imputed losses had zero variance and `lambda*`
    /// fell back to 0.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub degenerate_lambda_columns: Vec<usize>,
}

/// Prediction-powered risk of one column.
pub fn pp_risk(data: &SemiSupervisedLosses, grid_index: usize, lambda: f64) -> Result<f64> {
    let (l, lt, lu) = data.columns(grid_index)?;
    Ok(lambda * mean(lu) + mean(l) - lambda * mean(lt))
}

/// `W_i = lambda * blockmean_i(L~_unl) + L_i - lambda * L~_i`, supported on
/// `[-|lambda|, 1 + |lambda|]`.
pub fn block_decompose(
    data: &SemiSupervisedLosses,
    grid_index: usize,
    plan: &BlockPlan,
    lambda: f64,
) -> Result<BoundedSample> {
    let (l, lt, lu) = data.columns(grid_index)?;
    let n = l.len();
    if plan.block_size == 0 || plan.block_size * n > lu.len() {
        return Err(Error::Shape(format!(
            "block plan of {} x {} does not fit {} unlabeled rows",
            n,
            plan.block_size,
            lu.len()
        )));
    }
    let order = plan.unlabeled_order(lu.len());
    let (lo, hi) = (-lambda.abs(), 1.0 + lambda.abs());
    let b = plan.block_size;
    let values = (0..n)
        .map(|i| {
            let block_sum: f64 = match &order {
                Some(order) => order[i * b..(i + 1) * b].iter().map(|&j| lu[j]).sum(),
                None => lu[i * b..(i + 1) * b].iter().sum(),
            };
            let w = lambda * (block_sum / b as f64) + l[i] - lambda * lt[i];
            w.clamp(lo, hi)
        })
        .collect();
    BoundedSample::new(values, lo, hi)
}

/// Block decomposition on raw slices: true and imputed labeled losses `l`,
/// `lt` and imputed unlabeled losses `lu`, with contiguous blocks of
/// `floor(|lu| / |l|)` rows.
pub fn pp_block_sample(l: &[f64], lt: &[f64], lu: &[f64], lambda: f64) -> Result<BoundedSample> {
    if l.len() != lt.len() {
        return Err(Error::Shape(format!(
            "{} true and {} imputed labeled losses",
            l.len(),
            lt.len()
        )));
    }
    let plan = BlockPlan::new(l.len(), lu.len())?;
    let b = plan.block_size;
    let (lo, hi) = (-lambda.abs(), 1.0 + lambda.abs());
    let values = l
        .iter()
        .zip(lt)
        .zip(lu.chunks_exact(b))
        .map(|((&li, &lti), block)| {
            let w = lambda * (block.iter().sum::<f64>() / b as f64) + li - lambda * lti;
            w.clamp(lo, hi)
        })
        .collect();
    BoundedSample::new(values, lo, hi)
}

/// `lambda*` from labeled pairs, with the variance ratio `n / N` of the
/// sample the bound will be built on. The flag reports the zero-variance
/// fallback.
fn lambda_star(l: &[f64], lt: &[f64], ratio: f64) -> Result<(f64, bool)> {
    let n = l.len();
    if n < 2 {
        return Err(Error::TooFewSamples {
            what: "lambda* estimation",
            needed: 2,
            got: n,
        });
    }
    let (ml, mt) = (mean(l), mean(lt));
    let denom = (n - 1) as f64;
    let cov = l
        .iter()
        .zip(lt)
        .map(|(a, b)| (a - ml) * (b - mt))
        .sum::<f64>()
        / denom;
    let var = lt.iter().map(|b| (b - mt) * (b - mt)).sum::<f64>() / denom;
    if var <= 0.0 {
        return Ok((0.0, true));
    }
    Ok((cov / ((1.0 + ratio) * var), false))
}

/// Variance-minimising power parameter for one column.
pub fn lambda_star_estimate(data: &SemiSupervisedLosses, grid_index: usize) -> Result<f64> {
    let (l, lt, _) = data.columns(grid_index)?;
    let ratio = data.n_labeled() as f64 / data.n_unlabeled() as f64;
    Ok(lambda_star(l, lt, ratio)?.0)
}

fn resolve_lambdas(
    tuning: PowerTuning,
    data: &SemiSupervisedLosses,
) -> Result<(SemiSupervisedLosses, Vec<f64>, Vec<usize>)> {
    let m = data.grid().len();
    match tuning {
        PowerTuning::FixedOne => Ok((data.clone(), vec![1.0; m], vec![])),
        PowerTuning::Fixed { lambda } => {
            if !lambda.is_finite() {
                return Err(Error::Config(format!("lambda = {lambda} is not finite")));
            }
            Ok((data.clone(), vec![lambda; m], vec![]))
        }
        PowerTuning::CltInline => {
            let mut lambdas = Vec::with_capacity(m);
            let mut degenerate = Vec::new();
            for c in 0..m {
                let (l, lt, _) = data.columns(c)?;
                let ratio = data.n_labeled() as f64 / data.n_unlabeled() as f64;
                let (lam, flag) = lambda_star(l, lt, ratio)?;
                lambdas.push(lam);
                if flag {
                    degenerate.push(c);
                }
            }
            Ok((data.clone(), lambdas, degenerate))
        }
        PowerTuning::WsrSplit { tuning_fraction } => {
            if !(tuning_fraction > 0.0 && tuning_fraction < 1.0) {
                return Err(Error::Config(format!(
                    "tuning fraction {tuning_fraction} must lie in (0, 1)"
                )));
            }
            let n_tune = (tuning_fraction * data.n_labeled() as f64).floor() as usize;
            let big_n_tune = (tuning_fraction * data.n_unlabeled() as f64).floor() as usize;
            if n_tune < 2 || n_tune >= data.n_labeled() {
                return Err(Error::TooFewSamples {
                    what: "the lambda tuning split",
                    needed: 2,
                    got: n_tune,
                });
            }
            let (tune, rest) = data.split_at(n_tune, big_n_tune)?;
            let ratio = rest.n_labeled() as f64 / rest.n_unlabeled() as f64;
            let mut lambdas = Vec::with_capacity(m);
            let mut degenerate = Vec::new();
            for c in 0..m {
                let (l, lt, _) = tune.columns(c)?;
                let (lam, flag) = lambda_star(l, lt, ratio)?;
                lambdas.push(lam);
                if flag {
                    degenerate.push(c);
                }
            }
            Ok((rest, lambdas, degenerate))
        }
    }
}

/// General-loss semi-supervised calibration with contiguous blocks.
pub fn ss_general_calibrate(
    data: &SemiSupervisedLosses,
    spec: RiskSpec,
    method: UcbMethod,
    tuning: PowerTuning,
) -> Result<CalibrationOutcome> {
    ss_general_calibrate_with(data, spec, method, tuning, None)
}

/// As [`ss_general_calibrate`], optionally shuffling unlabeled rows before
/// blocking.
pub fn ss_general_calibrate_with(
    data: &SemiSupervisedLosses,
    spec: RiskSpec,
    method: UcbMethod,
    tuning: PowerTuning,
    shuffle_seed: Option<u64>,
) -> Result<CalibrationOutcome> {
    if !matches!(
        method,
        UcbMethod::Wsr | UcbMethod::WsrScaled | UcbMethod::Clt
    ) {
        return Err(Error::Config(format!(
            "method `{method}` is not available for general semi-supervised calibration"
        )));
    }
    let (data, lambdas, degenerate) = resolve_lambdas(tuning, data)?;
    let mut plan = BlockPlan::for_data(&data)?;
    plan.shuffle_seed = shuffle_seed;
    let ucb = UcbSpec::new(method, spec.delta());
    let walk = fixed_sequence(data.grid().len(), spec.alpha(), |c| {
        ucb.evaluate(&block_decompose(&data, c, &plan, lambdas[c])?)
    })?;
    let asymptotic = method.is_asymptotic() || tuning == PowerTuning::CltInline;
    let mut outcome = outcome_from_walk(
        data.grid(),
        walk,
        method.as_str(),
        spec.alpha(),
        spec.delta().value(),
        asymptotic,
    );
    outcome.semi_supervised = Some(SemiSupervisedInfo {
        lambda_mode: tuning.as_str().to_owned(),
        lambda_per_column: lambdas,
        block_size: Some(plan.block_size),
        dropped_tail: Some(plan.dropped_tail),
        degenerate_lambda_columns: degenerate,
        ..Default::default()
    });
    Ok(outcome)
}

/// Count and rate of `max(L_i - L~_i, 0)` over the labeled rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClippedRectifier {
    pub count: u64,
    pub trials: u64,
}

impl ClippedRectifier {
    pub fn rate(&self) -> f64 {
        self.count as f64 / self.trials as f64
    }
}

fn binary_column(table: &LossTable, column: usize) -> Result<Vec<bool>> {
    table.binary_count(column)?;
    Ok(table.column(column)?.iter().map(|&v| v > 0.5).collect())
}

pub fn clipped_rectifier_risk(
    data: &SemiSupervisedLosses,
    grid_index: usize,
) -> Result<ClippedRectifier> {
    let l = binary_column(data.labeled_true(), grid_index)?;
    let lt = binary_column(data.labeled_imputed(), grid_index)?;
    let count = l.iter().zip(&lt).filter(|(&a, &b)| a && !b).count() as u64;
    Ok(ClippedRectifier {
        count,
        trials: l.len() as u64,
    })
}

/// Binary-loss semi-supervised calibration: a Clopper-Pearson bound on the
/// unlabeled imputed risk at `delta1` plus one on the clipped rectifier at
/// `delta2`.
pub fn ss_binary_calibrate(
    data: &SemiSupervisedLosses,
    alpha: f64,
    split: BudgetSplit,
) -> Result<CalibrationOutcome> {
    let spec = RiskSpec::new(alpha, split.total())?;
    let big_n = data.n_unlabeled() as u64;
    let walk = fixed_sequence(data.grid().len(), alpha, |c| {
        let unlabeled = BinomialCount::new(big_n, data.unlabeled_imputed().binary_count(c)?)?;
        let rect = clipped_rectifier_risk(data, c)?;
        let rect = BinomialCount::new(rect.trials, rect.count)?;
        Ok(clopper_pearson_ucb(unlabeled, split.delta1())?
            + clopper_pearson_ucb(rect, split.delta2())?)
    })?;
    let mut outcome = outcome_from_walk(
        data.grid(),
        walk,
        "ss_binary_cp",
        alpha,
        spec.delta().value(),
        false,
    );
    outcome.semi_supervised = Some(SemiSupervisedInfo {
        lambda_mode: PowerTuning::FixedOne.as_str().to_owned(),
        delta1: Some(split.delta1().value()),
        delta2: Some(split.delta2().value()),
        ..Default::default()
    });
    Ok(outcome)
}

/// Empirical moments of the rectifier `L - L~` and its positive part on
/// binary pairs, with population (1/n) normalisation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RectifierMoments {
    /// Frequency of `L = 1, L~ = 0`.
    pub p1: f64,
    /// Frequency of `L = 0, L~ = 1`.
    pub p2: f64,
    pub variance: f64,
    pub clipped_variance: f64,
}

pub fn rectifier_moments(l: &[bool], lt: &[bool]) -> Result<RectifierMoments> {
    if l.len() != lt.len() || l.is_empty() {
        return Err(Error::Shape(format!(
            "{} true and {} imputed losses",
            l.len(),
            lt.len()
        )));
    }
    let n = l.len() as f64;
    let diffs: Vec<f64> = l
        .iter()
        .zip(lt)
        .map(|(&a, &b)| f64::from(u8::from(a)) - f64::from(u8::from(b)))
        .collect();
    let pop_var = |xs: &mut dyn Iterator<Item = f64>| {
        let xs: Vec<f64> = xs.collect();
        let mean = xs.iter().sum::<f64>() / n;
        xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n
    };
    Ok(RectifierMoments {
        p1: diffs.iter().filter(|&&d| d > 0.0).count() as f64 / n,
        p2: diffs.iter().filter(|&&d| d < 0.0).count() as f64 / n,
        variance: pop_var(&mut diffs.iter().copied()),
        clipped_variance: pop_var(&mut diffs.iter().map(|d| d.max(0.0))),
    })
}

/// Pools true labeled losses with imputed unlabeled losses and treats them as
/// one labeled sample. Carries no guarantee when imputations are biased.
pub fn naive_augmented_calibrate(
    data: &SemiSupervisedLosses,
    spec: RiskSpec,
) -> Result<CalibrationOutcome> {
    let trials = (data.n_labeled() + data.n_unlabeled()) as u64;
    let walk = fixed_sequence(data.grid().len(), spec.alpha(), |c| {
        let ones =
            data.labeled_true().binary_count(c)? + data.unlabeled_imputed().binary_count(c)?;
        clopper_pearson_ucb(BinomialCount::new(trials, ones)?, spec.delta())
    })?;
    let mut outcome = outcome_from_walk(
        data.grid(),
        walk,
        "naive_augmented_cp",
        spec.alpha(),
        spec.delta().value(),
        false,
    );
    outcome.unsafe_guarantee = true;
    Ok(outcome)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(l: Vec<f64>, lt: Vec<f64>, lu: Vec<f64>) -> SemiSupervisedLosses {
        let grid = ParameterGrid::indexed(1).unwrap();
        SemiSupervisedLosses::new(
            LossTable::from_columns(grid.clone(), vec![l]).unwrap(),
            LossTable::from_columns(grid.clone(), vec![lt]).unwrap(),
            LossTable::from_columns(grid, vec![lu]).unwrap(),
        )
        .unwrap()
    }

    fn small() -> SemiSupervisedLosses {
        data(vec![1.0, 0.0], vec![1.0, 0.0], vec![0.0, 1.0, 1.0, 1.0])
    }

    #[test]
    fn pp_risk_examples() {
        let d = small();
        assert!((pp_risk(&d, 0, 1.0).unwrap() - 0.75).abs() < 1e-15);
        assert_eq!(pp_risk(&d, 0, 0.0).unwrap(), 0.5);
        assert!(pp_risk(&d, 1, 1.0).is_err());
    }

    #[test]
    fn block_examples() {
        let d = small();
        let plan = BlockPlan::for_data(&d).unwrap();
        assert_eq!((plan.block_size, plan.dropped_tail), (2, 0));
        let w = block_decompose(&d, 0, &plan, 1.0).unwrap();
        assert_eq!(w.values(), &[0.5, 1.0]);
        assert_eq!(w.support(), (-1.0, 2.0));
        let w0 = block_decompose(&d, 0, &plan, 0.0).unwrap();
        assert_eq!(w0.values(), &[1.0, 0.0]);
        assert_eq!(w0.support(), (0.0, 1.0));
    }

    #[test]
    fn tail_is_dropped() {
        let d = data(
            vec![0.0; 3],
            vec![0.0; 3],
            vec![1.0; 3].into_iter().chain([0.0; 4]).collect(),
        );
        let plan = BlockPlan::for_data(&d).unwrap();
        assert_eq!(
            (plan.block_size, plan.used_unlabeled, plan.dropped_tail),
            (2, 6, 1)
        );
        assert!(BlockPlan::new(5, 4).is_err());
    }

    #[test]
    fn shuffled_blocks_keep_the_used_mean_distribution() {
        let lu: Vec<f64> = (0..40).map(|i| (i % 2) as f64).collect();
        let d = data(vec![0.0; 10], vec![0.0; 10], lu);
        let plan = BlockPlan::for_data(&d).unwrap().with_shuffle(7);
        let a = block_decompose(&d, 0, &plan, 1.0).unwrap();
        let b = block_decompose(&d, 0, &plan, 1.0).unwrap();
        assert_eq!(a, b);
        assert!((a.mean() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn lambda_star_example() {
        let l = vec![1.0, 0.0, 1.0, 0.0, 1.0, 0.0];
        let lt = vec![1.0, 0.0, 1.0, 0.0, 0.0, 1.0];
        let d = data(l, lt, vec![0.0; 600]);
        // Cov = 0.5 / 5, Var = 1.5 / 5.
        let got = lambda_star_estimate(&d, 0).unwrap();
        assert!((got - 0.1 / (1.01 * 0.3)).abs() < 1e-12, "{got}");
        assert!((got - 0.330_033).abs() < 1e-6);
    }

    #[test]
    fn lambda_star_edges() {
        let d = data(vec![1.0, 0.0, 1.0], vec![1.0, 1.0, 1.0], vec![0.0; 300]);
        assert_eq!(lambda_star_estimate(&d, 0).unwrap(), 0.0);
        let d = data(vec![1.0], vec![1.0], vec![0.0; 3]);
        assert!(lambda_star_estimate(&d, 0).is_err());
        let l: Vec<f64> = (0..50).map(|i| ((i * 7) % 3) as f64 / 2.0).collect();
        let d = data(l.clone(), l, vec![0.0; 5_000_000 / 100]);
        assert!((lambda_star_estimate(&d, 0).unwrap() - 1.0 / 1.001).abs() < 1e-12);
    }

    #[test]
    fn clipped_rectifier_examples() {
        let d = data(vec![1.0, 0.0, 1.0], vec![0.0, 1.0, 1.0], vec![0.0; 3]);
        let r = clipped_rectifier_risk(&d, 0).unwrap();
        assert_eq!((r.count, r.trials), (1, 3));
        assert!((r.rate() - 1.0 / 3.0).abs() < 1e-15);
        let d = data(vec![0.0, 1.0], vec![1.0, 1.0], vec![0.0; 3]);
        assert_eq!(clipped_rectifier_risk(&d, 0).unwrap().count, 0);
        let d = data(vec![0.5, 1.0], vec![1.0, 1.0], vec![0.0; 3]);
        assert!(matches!(
            clipped_rectifier_risk(&d, 0),
            Err(Error::NonBinary { row: 0, .. })
        ));
    }

    #[test]
    fn binary_zero_failure_closed_form() {
        let d = data(vec![0.0; 130], vec![0.0; 130], vec![0.0; 1000]);
        let split = BudgetSplit::new(0.1, 0.01, 0.09).unwrap();
        let out = ss_binary_calibrate(&d, 0.15, split).unwrap();
        let expected = (1.0 - 0.01_f64.powf(1.0 / 1000.0)) + (1.0 - 0.09_f64.powf(1.0 / 130.0));
        assert!((out.ucb_trace[0] - expected).abs() < 1e-9);
        assert!((out.ucb_trace[0] - 0.022_946_75).abs() < 1e-8);
        assert_eq!(out.selected_index, Some(0));
        let info = out.semi_supervised.unwrap();
        assert_eq!((info.delta1, info.delta2), (Some(0.01), Some(0.09)));
    }

    #[test]
    fn split_validation() {
        assert!(BudgetSplit::new(0.1, 0.01, 0.09).is_ok());
        assert!(BudgetSplit::new(0.1, 0.02, 0.09).is_err());
        assert!(BudgetSplit::new(0.1, 0.0, 0.1).is_err());
    }

    #[test]
    fn lambda_zero_reduces_to_labeled_only() {
        let l: Vec<f64> = (0..80).map(|i| ((i * 13) % 10) as f64 / 20.0).collect();
        let lt: Vec<f64> = (0..80).map(|i| ((i * 7) % 10) as f64 / 10.0).collect();
        let d = data(l.clone(), lt, vec![0.3; 400]);
        let spec = RiskSpec::new(0.4, 0.1).unwrap();
        let ss = ss_general_calibrate(&d, spec, UcbMethod::Wsr, PowerTuning::Fixed { lambda: 0.0 })
            .unwrap();
        let lab = crate::rcps::fixed_sequence_calibrate(
            d.labeled_true(),
            spec,
            UcbSpec::new(UcbMethod::Wsr, spec.delta()),
        )
        .unwrap();
        assert_eq!(ss.ucb_trace, lab.ucb_trace);
        assert_eq!(ss.selected, lab.selected);
    }

    #[test]
    fn general_rejects_exact_only_methods() {
        let spec = RiskSpec::new(0.4, 0.1).unwrap();
        assert!(ss_general_calibrate(
            &small(),
            spec,
            UcbMethod::ClopperPearson,
            PowerTuning::FixedOne
        )
        .is_err());
    }

    #[test]
    fn wsr_split_needs_tuning_rows() {
        let spec = RiskSpec::new(0.4, 0.1).unwrap();
        let d = data(vec![0.0; 15], vec![0.0; 15], vec![0.0; 150]);
        assert!(ss_general_calibrate(&d, spec, UcbMethod::Wsr, PowerTuning::wsr_split()).is_err());
        let d = data(vec![0.0; 30], vec![0.0; 30], vec![0.0; 300]);
        let out = ss_general_calibrate(&d, spec, UcbMethod::Wsr, PowerTuning::wsr_split()).unwrap();
        let info = out.semi_supervised.unwrap();
        assert_eq!(info.block_size, Some(10));
        assert_eq!(info.degenerate_lambda_columns, vec![0]);
    }

    #[test]
    fn naive_is_marked_unsafe() {
        let d = data(vec![0.0; 10], vec![0.0; 10], vec![0.0; 100]);
        let out = naive_augmented_calibrate(&d, RiskSpec::new(0.2, 0.1).unwrap()).unwrap();
        assert!(out.unsafe_guarantee);
        let json = serde_json::to_value(&out).unwrap();
        assert_eq!(json["unsafe_guarantee"], true);
    }
}
