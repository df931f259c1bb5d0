//! Fixtures shared by the benchmarks.

use ssrcps_core::sim::{
    generate_etsc, generate_losses, EtscScenario, ImputationRegime, LossScenario, ScenarioConfig,
};
use ssrcps_core::BoundedSample;

/// Seed-0 binary loss tables with the default 100-point linear curve.
pub fn loss_scenario(n_labeled: usize, n_unlabeled: usize) -> LossScenario {
    let config = ScenarioConfig::binary(n_labeled, n_unlabeled, 0.81, ImputationRegime::Optimistic);
    generate_losses(&config, 0).expect("valid scenario")
}

/// Seed-0 trajectories at 93% imputation accuracy.
pub fn etsc_scenario(n_labeled: usize, n_unlabeled: usize) -> EtscScenario {
    let config = ScenarioConfig::etsc(n_labeled, n_unlabeled, 1000, 0.93);
    generate_etsc(&config, 0).expect("valid scenario")
}

/// First column of the labeled losses, as a unit-support sample.
pub fn labeled_sample(n: usize) -> BoundedSample {
    let scenario = loss_scenario(n, n);
    let column = scenario
        .data
        .labeled_true()
        .column(30)
        .expect("column exists")
        .to_vec();
    BoundedSample::unit(column).expect("losses lie in [0, 1]")
}
