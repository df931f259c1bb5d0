//! Synthetic scenarios with known risk curves.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::{ChaCha20Rng, ChaCha8Rng};
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::etsc::EtscSample;
use crate::ppi::SemiSupervisedLosses;
use crate::rcps::{LossTable, ParameterGrid};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    /// Binary losses, risk curve as configured.
    MonoBinary,
    /// Binary losses, risk curve permuted by a seed-fixed permutation.
    NonmonoBinary,
    /// Losses in `[0, 1]` with the configured mean curve.
    GeneralBounded,
    /// Early-classification trajectories.
    EtscBasic,
}

impl ScenarioKind {
    pub fn is_etsc(self) -> bool {
        self == Self::EtscBasic
    }

    pub fn is_binary(self) -> bool {
        matches!(self, Self::MonoBinary | Self::NonmonoBinary)
    }
}

/// How imputed losses relate to true losses when the imputation is wrong.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ImputationRegime {
    /// `L~ = 1 - L`.
    SymmetricNoise,
    /// `L~ = 0`, so `L~ <= L` on every row.
    Optimistic,
    /// `L~ = 1`.
    Pessimistic,
}

/// True risk per grid point, in traversal order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "snake_case")]
pub enum RiskCurve {
    /// Evenly spaced from `start` at the first point to `end` at the last.
    Linear {
        start: f64,
        end: f64,
    },
    /// `floor` at the middle of the grid rising quadratically to `edge`.
    UShape {
        edge: f64,
        floor: f64,
    },
    Values {
        values: Vec<f64>,
    },
}

impl RiskCurve {
    pub fn evaluate(&self, grid_size: usize) -> Vec<f64> {
        let x = |m: usize| {
            if grid_size > 1 {
                m as f64 / (grid_size - 1) as f64
            } else {
                0.0
            }
        };
        match self {
            Self::Linear { start, end } => (0..grid_size)
                .map(|m| start + (end - start) * x(m))
                .collect(),
            Self::UShape { edge, floor } => (0..grid_size)
                .map(|m| {
                    let d = 2.0 * x(m) - 1.0;
                    floor + (edge - floor) * d * d
                })
                .collect(),
            Self::Values { values } => values.clone(),
        }
    }
}

fn default_grid_size() -> usize {
    100
}

fn default_t_max() -> usize {
    10
}

fn default_kappa() -> f64 {
    1.5
}

fn default_noise() -> f64 {
    1.0
}

/// Scenario description; every trial's data is a pure function of this and
/// the trial index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub kind: ScenarioKind,
    pub n_labeled: usize,
    pub n_unlabeled: usize,
    #[serde(default)]
    pub n_test: usize,
    #[serde(default = "default_grid_size")]
    pub grid_size: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub curve: Option<RiskCurve>,
    pub imputation_accuracy: f64,
    pub imputation_regime: ImputationRegime,
    #[serde(default)]
    pub master_seed: u64,
    /// Trajectory length.
    #[serde(default = "default_t_max")]
    pub t_max: usize,
    /// Stage-1 labeled size; defaults to `n_labeled`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub n_stage1: Option<usize>,
    /// Slope of confidence around the switch time.
    #[serde(default = "default_kappa")]
    pub kappa: f64,
    /// Standard deviation of confidence logit noise.
    #[serde(default = "default_noise")]
    pub confidence_noise: f64,
}

impl ScenarioConfig {
    /// Binary scenario with a linear curve and the remaining fields at their
    /// defaults.
    pub fn binary(
        n_labeled: usize,
        n_unlabeled: usize,
        accuracy: f64,
        regime: ImputationRegime,
    ) -> Self {
        Self {
            kind: ScenarioKind::MonoBinary,
            n_labeled,
            n_unlabeled,
            n_test: 0,
            grid_size: default_grid_size(),
            curve: Some(RiskCurve::Linear {
                start: 0.02,
                end: 0.5,
            }),
            imputation_accuracy: accuracy,
            imputation_regime: regime,
            master_seed: 0,
            t_max: default_t_max(),
            n_stage1: None,
            kappa: default_kappa(),
            confidence_noise: default_noise(),
        }
    }

    /// Trajectory scenario where the classifier imputes its own labels.
    pub fn etsc(n_labeled: usize, n_unlabeled: usize, n_test: usize, accuracy: f64) -> Self {
        Self {
            kind: ScenarioKind::EtscBasic,
            n_test,
            curve: None,
            ..Self::binary(
                n_labeled,
                n_unlabeled,
                accuracy,
                ImputationRegime::SymmetricNoise,
            )
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_labeled == 0 || self.n_unlabeled == 0 {
            return bad("n_labeled and n_unlabeled must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.imputation_accuracy) {
            return bad(format!(
                "imputation_accuracy {} must lie in [0, 1]",
                self.imputation_accuracy
            ));
        }
        if self.kind.is_etsc() {
            if self.t_max == 0 || self.n_test == 0 || self.n_stage1 == Some(0) {
                return bad("t_max, n_test and n_stage1 must be at least 1".into());
            }
            if !(self.kappa.is_finite()
                && self.confidence_noise >= 0.0
                && self.confidence_noise.is_finite())
            {
                return bad("kappa and confidence_noise must be finite, noise nonnegative".into());
            }
            return Ok(());
        }
        if self.grid_size == 0 {
            return bad("grid_size must be at least 1".into());
        }
        let Some(curve) = &self.curve else {
            return bad("loss scenarios need a risk curve".into());
        };
        let values = curve.evaluate(self.grid_size);
        if values.len() != self.grid_size {
            return bad(format!(
                "curve has {} values for grid_size {}",
                values.len(),
                self.grid_size
            ));
        }
        if let Some(v) = values.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return bad(format!("curve value {v} must lie in (0, 1)"));
        }
        Ok(())
    }

    /// True risk per grid point.
    pub fn true_risks(&self) -> Vec<f64> {
        let mut values = self
            .curve
            .as_ref()
            .map(|c| c.evaluate(self.grid_size))
            .unwrap_or_default();
        if self.kind == ScenarioKind::NonmonoBinary {
            values.shuffle(&mut ChaCha8Rng::seed_from_u64(self.master_seed));
        }
        values
    }

    pub fn stage1_size(&self) -> usize {
        self.n_stage1.unwrap_or(self.n_labeled)
    }
}

/// RNG for one trial: the master seed picks the key, the trial index the
/// stream.
pub fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Losses of one trial plus the curve they were drawn from.
#[derive(Debug, Clone, PartialEq)]
pub struct LossScenario {
    pub data: SemiSupervisedLosses,
    pub true_risks: Vec<f64>,
}

/// Trajectory sets of one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct EtscScenario {
    pub stage1: Vec<EtscSample>,
    pub stage2: Vec<EtscSample>,
    pub unlabeled: Vec<EtscSample>,
    pub test: Vec<EtscSample>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Scenario {
    Losses(LossScenario),
    Etsc(EtscScenario),
}

pub fn generate_scenario(config: &ScenarioConfig, trial_index: u64) -> Result<Scenario> {
    if config.kind.is_etsc() {
        generate_etsc(config, trial_index).map(Scenario::Etsc)
    } else {
        generate_losses(config, trial_index).map(Scenario::Losses)
    }
}

struct LossRow {
    truth: Vec<f64>,
    imputed: Vec<f64>,
}

fn loss_row<R: Rng>(rng: &mut R, config: &ScenarioConfig, risks: &[f64]) -> LossRow {
    let u: f64 = rng.random();
    let correct = rng.random_bool(config.imputation_accuracy);
    let truth: Vec<f64> = risks
        .iter()
        .map(|&r| match config.kind {
            ScenarioKind::GeneralBounded => {
                if r <= 0.5 {
                    2.0 * r * u
                } else {
                    1.0 - 2.0 * (1.0 - r) * u
                }
            }
            _ => f64::from(u8::from(u < r)),
        })
        .collect();
    let imputed = if correct {
        truth.clone()
    } else {
        truth
            .iter()
            .map(|&l| match config.imputation_regime {
                ImputationRegime::SymmetricNoise => 1.0 - l,
                ImputationRegime::Optimistic => 0.0,
                ImputationRegime::Pessimistic => 1.0,
            })
            .collect()
    };
    LossRow { truth, imputed }
}

fn transpose(rows: &[Vec<f64>], grid_size: usize) -> Vec<Vec<f64>> {
    (0..grid_size)
        .map(|m| rows.iter().map(|r| r[m]).collect())
        .collect()
}

/// Labeled then unlabeled rows, each with a shared latent uniform across the
/// grid and a shared imputation-correctness draw.
pub fn generate_losses(config: &ScenarioConfig, trial_index: u64) -> Result<LossScenario> {
    config.validate()?;
    if config.kind.is_etsc() {
        return Err(Error::Config(
            "trajectory scenario has no loss tables".into(),
        ));
    }
    let risks = config.true_risks();
    let m = risks.len();
    let mut rng = trial_rng(config.master_seed, trial_index);
    let mut lab_true = Vec::with_capacity(config.n_labeled);
    let mut lab_imp = Vec::with_capacity(config.n_labeled);
    for _ in 0..config.n_labeled {
        let row = loss_row(&mut rng, config, &risks);
        lab_true.push(row.truth);
        lab_imp.push(row.imputed);
    }
    let unl: Vec<Vec<f64>> = (0..config.n_unlabeled)
        .map(|_| loss_row(&mut rng, config, &risks).imputed)
        .collect();
    let grid = ParameterGrid::indexed(m)?;
    let lab_ids: Vec<String> = (0..config.n_labeled).map(|i| format!("l{i}")).collect();
    let unl_ids: Vec<String> = (0..config.n_unlabeled).map(|j| format!("u{j}")).collect();
    let data = SemiSupervisedLosses::new(
        LossTable::new(grid.clone(), lab_ids.clone(), transpose(&lab_true, m))?,
        LossTable::new(grid.clone(), lab_ids, transpose(&lab_imp, m))?,
        LossTable::new(grid, unl_ids, transpose(&unl, m))?,
    )?;
    Ok(LossScenario {
        data,
        true_risks: risks,
    })
}

/// `n` fresh labeled true losses for checking column means.
pub fn generate_test_losses(
    config: &ScenarioConfig,
    trial_index: u64,
    n: usize,
) -> Result<LossTable> {
    config.validate()?;
    let risks = config.true_risks();
    // A stream far from any trial index.
    let mut rng = trial_rng(config.master_seed, trial_index | (1 << 63));
    let rows: Vec<Vec<f64>> = (0..n)
        .map(|_| loss_row(&mut rng, config, &risks).truth)
        .collect();
    LossTable::from_columns(
        ParameterGrid::indexed(risks.len())?,
        transpose(&rows, risks.len()),
    )
}

fn sigmoid(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

fn trajectory<R: Rng>(
    rng: &mut R,
    config: &ScenarioConfig,
    id: String,
    labeled: bool,
) -> EtscSample {
    let noise = Normal::new(0.0, config.confidence_noise).expect("validated noise");
    let y: u32 = u32::from(rng.random_bool(0.5));
    let full = if rng.random_bool(config.imputation_accuracy) {
        y
    } else {
        1 - y
    };
    let switch = rng.random_range(1..=config.t_max);
    let mut confidence = Vec::with_capacity(config.t_max);
    let mut early = Vec::with_capacity(config.t_max);
    for t in 1..=config.t_max {
        let settled = t >= switch;
        early.push(if settled || rng.random_bool(0.5) {
            full
        } else {
            1 - full
        });
        let logit = config.kappa * (t as f64 - switch as f64 + 0.5) + noise.sample(rng);
        confidence.push(sigmoid(logit));
    }
    EtscSample {
        sample_id: id,
        confidence,
        early_pred: early,
        full_pred: full,
        true_label: labeled.then_some(y),
        imputed_label: Some(full),
    }
}

/// Binary labels; the full-sequence prediction is correct with probability
/// `imputation_accuracy` and doubles as the imputed label. Early predictions
/// match the full prediction from a uniform switch time on and are coin
/// flips before it.
pub fn generate_etsc(config: &ScenarioConfig, trial_index: u64) -> Result<EtscScenario> {
    config.validate()?;
    if !config.kind.is_etsc() {
        return Err(Error::Config("loss scenario has no trajectories".into()));
    }
    let mut rng = trial_rng(config.master_seed, trial_index);
    let mut draw = |prefix: &str, n: usize, labeled: bool| -> Vec<EtscSample> {
        (0..n)
            .map(|i| trajectory(&mut rng, config, format!("{prefix}{i}"), labeled))
            .collect()
    };
    let stage1 = draw("s1_", config.stage1_size(), true);
    let stage2 = draw("s2_", config.n_labeled, true);
    let unlabeled = draw("u", config.n_unlabeled, false);
    let test = draw("t", config.n_test, true);
    Ok(EtscScenario {
        stage1,
        stage2,
        unlabeled,
        test,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(accuracy: f64, regime: ImputationRegime) -> ScenarioConfig {
        let mut c = ScenarioConfig::binary(50, 200, accuracy, regime);
        c.grid_size = 8;
        c
    }

    #[test]
    fn perfect_imputation_copies_truth() {
        let s = generate_losses(&config(1.0, ImputationRegime::SymmetricNoise), 3).unwrap();
        assert_eq!(
            s.data.labeled_true().columns(),
            s.data.labeled_imputed().columns()
        );
    }

    #[test]
    fn zero_accuracy_symmetric_flips() {
        let s = generate_losses(&config(0.0, ImputationRegime::SymmetricNoise), 3).unwrap();
        for (l, lt) in s
            .data
            .labeled_true()
            .columns()
            .iter()
            .zip(s.data.labeled_imputed().columns())
        {
            for (a, b) in l.iter().zip(lt) {
                assert_eq!(*a, 1.0 - b);
            }
        }
    }

    #[test]
    fn optimistic_never_exceeds_truth() {
        let s = generate_losses(&config(0.6, ImputationRegime::Optimistic), 1).unwrap();
        for (l, lt) in s
            .data
            .labeled_true()
            .columns()
            .iter()
            .zip(s.data.labeled_imputed().columns())
        {
            assert!(l.iter().zip(lt).all(|(a, b)| b <= a));
        }
    }

    #[test]
    fn binary_losses_are_nested_along_a_monotone_curve() {
        let s = generate_losses(&config(0.9, ImputationRegime::SymmetricNoise), 0).unwrap();
        let cols = s.data.labeled_true().columns();
        for w in cols.windows(2) {
            assert!(w[0].iter().zip(&w[1]).all(|(a, b)| a <= b));
        }
    }

    #[test]
    fn trials_are_reproducible_and_distinct() {
        let c = config(0.8, ImputationRegime::Optimistic);
        assert_eq!(
            generate_losses(&c, 5).unwrap(),
            generate_losses(&c, 5).unwrap()
        );
        assert_ne!(
            generate_losses(&c, 5).unwrap(),
            generate_losses(&c, 6).unwrap()
        );
    }

    #[test]
    fn column_means_match_the_curve() {
        let mut c = ScenarioConfig::binary(10, 10, 0.9, ImputationRegime::Optimistic);
        c.curve = Some(RiskCurve::Values {
            values: vec![0.15, 0.4],
        });
        c.grid_size = 2;
        let t = generate_test_losses(&c, 0, 100_000).unwrap();
        let mean = t.column(0).unwrap().iter().sum::<f64>() / 1e5;
        assert!((mean - 0.15).abs() < 0.004, "{mean}");
        c.kind = ScenarioKind::GeneralBounded;
        let t = generate_test_losses(&c, 0, 100_000).unwrap();
        for (m, r) in [0.15, 0.4].into_iter().enumerate() {
            let mean = t.column(m).unwrap().iter().sum::<f64>() / 1e5;
            assert!((mean - r).abs() < 0.004, "{mean}");
        }
    }

    #[test]
    fn nonmono_permutes_the_curve() {
        let mut c = config(0.9, ImputationRegime::SymmetricNoise);
        c.kind = ScenarioKind::NonmonoBinary;
        let mut risks = c.true_risks();
        assert_ne!(risks, c.curve.as_ref().unwrap().evaluate(8));
        risks.sort_by(f64::total_cmp);
        assert_eq!(risks, c.curve.as_ref().unwrap().evaluate(8));
    }

    #[test]
    fn etsc_sets_have_requested_sizes() {
        let c = ScenarioConfig::etsc(30, 200, 50, 0.93);
        let s = generate_etsc(&c, 0).unwrap();
        assert_eq!(
            (
                s.stage1.len(),
                s.stage2.len(),
                s.unlabeled.len(),
                s.test.len()
            ),
            (30, 30, 200, 50)
        );
        assert!(s.unlabeled.iter().all(|x| x.true_label.is_none()));
        assert!(s
            .stage2
            .iter()
            .all(|x| x.imputed_label == Some(x.full_pred)));
        let last = c.t_max - 1;
        assert!(s.test.iter().all(|x| x.early_pred[last] == x.full_pred));
    }

    #[test]
    fn invalid_configs() {
        let mut c = config(0.9, ImputationRegime::Optimistic);
        c.imputation_accuracy = 1.5;
        assert!(c.validate().is_err());
        let mut c = config(0.9, ImputationRegime::Optimistic);
        c.curve = Some(RiskCurve::Linear {
            start: 0.0,
            end: 0.5,
        });
        assert!(c.validate().is_err());
        let mut c = config(0.9, ImputationRegime::Optimistic);
        c.curve = Some(RiskCurve::Values { values: vec![0.1] });
        assert!(c.validate().is_err());
    }
}
