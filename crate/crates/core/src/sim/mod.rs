//! Synthetic scenarios and the Monte-Carlo coverage harness.

mod experiment;
mod oracle;
mod scenario;

pub use experiment::{
    run_coverage_experiment, run_trial, CoverageReport, ExperimentConfig, ExperimentReport,
    ExperimentRun, Levels, Method, TrialResult, TOOL_VERSION,
};
pub use oracle::{brute_force_cp_oracle, ORACLE_MAX_TRIALS};
pub use scenario::{
    generate_etsc, generate_losses, generate_scenario, generate_test_losses, trial_rng,
    EtscScenario, ImputationRegime, LossScenario, RiskCurve, Scenario, ScenarioConfig,
    ScenarioKind,
};
