//! Risk-controlling calibration with labeled and imputed losses.
//!
//! [`bounds`] holds the upper confidence bounds, [`rcps`] the fixed-sequence
//! calibrator, [`ppi`] the semi-supervised estimators and calibrators,
//! [`etsc`] threshold calibration for early classification, [`io`] file
//! formats and [`sim`] the synthetic harness.

pub mod bounds;
pub mod error;
pub mod etsc;
pub mod io;
pub mod ppi;
pub mod rcps;
pub mod sim;

pub use bounds::{
    binomial_cdf, clopper_pearson_ucb, clt_ucb, hoeffding_ucb, normal_quantile, wsr_ucb,
    wsr_ucb_scaled, BinomialCount, BoundedSample, ErrorLevel, UcbMethod, UcbSpec,
};
pub use error::{Error, Result};
pub use etsc::{
    candidate_screening, conditional_empirical_risk, gap_loss, halt_curve, halt_time,
    stage2_calibrate, EtscEvaluation, EtscRiskSpec, EtscSample, LabelSource, Stage2Mode,
    Stage2Outcome, ThresholdVector,
};
pub use ppi::{
    block_decompose, clipped_rectifier_risk, lambda_star_estimate, naive_augmented_calibrate,
    pp_block_sample, pp_risk, rectifier_moments, ss_binary_calibrate, ss_general_calibrate,
    BlockPlan, BudgetSplit, PowerTuning, RectifierMoments, SemiSupervisedInfo,
    SemiSupervisedLosses,
};
pub use rcps::{
    empirical_risk, fixed_sequence, fixed_sequence_calibrate, labeled_rcps, CalibrationOutcome,
    LossTable, ParameterGrid, RiskSpec,
};
