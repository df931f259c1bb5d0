//! Regression outcomes recorded from seed-0 scenarios after they were
//! checked against the coverage properties in the acceptance suite.

use ssrcps_core::etsc::{self, candidate_screening, stage2_calibrate, EtscRiskSpec, Stage2Mode};
use ssrcps_core::ppi::{ss_general_calibrate, PowerTuning};
use ssrcps_core::sim::{generate_etsc, generate_losses, ImputationRegime, ScenarioConfig};
use ssrcps_core::{RiskSpec, UcbMethod};

const CLT_INLINE_TRACE: [f64; 19] = [
    0.044642729772613604,
    0.05878572763040878,
    0.06183625886010307,
    0.0650303851872546,
    0.06954063569221583,
    0.08382335374837656,
    0.09589828824619132,
    0.10219904782231831,
    0.10722695008249816,
    0.10962876432394916,
    0.11357897739456381,
    0.11958344856921427,
    0.12317874484093896,
    0.12765171291665578,
    0.13138141788674843,
    0.13565506927707838,
    0.14077285764442987,
    0.14486533156955925,
    0.1593522392327216,
];

#[test]
fn mono_binary_seed0_clt_inline() {
    let config = ScenarioConfig::binary(130, 5000, 0.81, ImputationRegime::Optimistic);
    let scenario = generate_losses(&config, 0).unwrap();
    let outcome = ss_general_calibrate(
        &scenario.data,
        RiskSpec::new(0.15, 0.1).unwrap(),
        UcbMethod::Clt,
        PowerTuning::CltInline,
    )
    .unwrap();
    assert_eq!(outcome.selected.as_deref(), Some("q_18"));
    assert_eq!(outcome.selected_index, Some(17));
    assert_eq!(outcome.stop_index, 18);
    assert!(outcome.asymptotic);
    assert_eq!(outcome.ucb_trace.len(), CLT_INLINE_TRACE.len());
    for (got, want) in outcome.ucb_trace.iter().zip(CLT_INLINE_TRACE) {
        assert!((got - want).abs() <= 1e-12, "{got} vs {want}");
    }
    let info = outcome.semi_supervised.as_ref().unwrap();
    assert_eq!((info.block_size, info.dropped_tail), (Some(38), Some(60)));
    assert!((info.lambda_per_column[0] - 0.959188093691017).abs() <= 1e-12);
    assert!(scenario.true_risks[17] <= 0.15);
}

#[test]
fn etsc_basic_seed0_binary_thresholds() {
    let config = ScenarioConfig::etsc(300, 50000, 16000, 0.93);
    let scenario = generate_etsc(&config, 0).unwrap();
    let spec = EtscRiskSpec::new(0.1, 0.01)
        .unwrap()
        .with_split(0.001, 0.009)
        .unwrap();
    let candidate = candidate_screening(&scenario.stage1, &spec).unwrap();
    let out = stage2_calibrate(
        &scenario.stage2,
        &scenario.unlabeled,
        &candidate,
        &spec,
        Stage2Mode::BinaryCp,
    )
    .unwrap();
    let inf = f64::INFINITY;
    let want = [inf, inf, inf, inf, inf, inf, 0.33, 0.37, 0.27, 0.0];
    assert_eq!(out.accepted, 4);
    for (got, want) in out.thresholds.values().iter().zip(want) {
        assert!(
            *got == want || (got - want).abs() <= 1e-12,
            "{got} vs {want}"
        );
    }
    let eval = etsc::evaluate(&scenario.test, &out.thresholds).unwrap();
    assert_eq!(eval.t0, Some(7));
    assert!(!eval.violates(0.1 + 0.01));
}
