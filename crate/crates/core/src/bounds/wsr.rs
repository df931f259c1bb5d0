//! Betting-martingale upper confidence bound for a bounded mean.
//!
//! For a candidate mean `R` the capital process is
//! `K_i(R) = prod_{j <= i} (1 - nu_j (W_j - R))`, with predictable bets
//! `nu_j` built from running mean and variance estimates. `R` is rejected
//! once `max_i K_i(R)` exceeds `1 / delta`; the bound is the smallest
//! rejected `R` in `[A, B]`. Every factor is nonnegative on `[A, B]`
//! because `nu_j <= 1 / (B - A)`, and every factor is nondecreasing in
//! `R`, so the rejected set is an up-set and bisection applies.

use super::binomial::MAX_BISECTION_STEPS;
use super::{BoundedSample, ErrorLevel};
use crate::error::{Error, Result};

/// Absolute bisection tolerance on the bound.
pub const WSR_TOLERANCE: f64 = 1e-8;

/// Predictable bet sizes `nu_1 .. nu_n` for the sample.
pub fn wsr_bets(sample: &BoundedSample, delta: ErrorLevel) -> Vec<f64> {
    let values = sample.values();
    let n = values.len() as f64;
    let cap = 1.0 / sample.width();
    let log_term = 2.0 * (1.0 / delta.value()).ln();

    let mut bets = Vec::with_capacity(values.len());
    let mut sum = 0.0;
    let mut sq_dev = 0.0;
    // Prior-only variance before the first observation.
    let mut prev_var = 0.25;
    for (idx, &w) in values.iter().enumerate() {
        let i = (idx + 1) as f64;
        bets.push(cap.min((log_term / (n * prev_var)).sqrt()));
        sum += w;
        let mean = (0.5 + sum) / (1.0 + i);
        sq_dev += (w - mean) * (w - mean);
        prev_var = (0.25 + sq_dev) / (1.0 + i);
    }
    bets
}

/// Running capital `K_1(R) .. K_n(R)`.
pub fn wsr_capital(sample: &BoundedSample, bets: &[f64], candidate: f64) -> Vec<f64> {
    let mut capital = 1.0;
    sample
        .values()
        .iter()
        .zip(bets)
        .map(|(&w, &nu)| {
            capital *= 1.0 - nu * (w - candidate);
            capital
        })
        .collect()
}

fn rejects(values: &[f64], bets: &[f64], candidate: f64, log_threshold: f64) -> bool {
    let mut log_capital = 0.0;
    for (&w, &nu) in values.iter().zip(bets) {
        let factor = 1.0 - nu * (w - candidate);
        if factor <= 0.0 {
            return false;
        }
        log_capital += factor.ln();
        if log_capital > log_threshold {
            return true;
        }
    }
    false
}

/// Upper confidence bound on the mean of `sample`, valid in finite samples.
pub fn wsr_ucb(sample: &BoundedSample, delta: ErrorLevel) -> Result<f64> {
    wsr_ucb_to(sample, delta, WSR_TOLERANCE)
}

fn wsr_ucb_to(sample: &BoundedSample, delta: ErrorLevel, tolerance: f64) -> Result<f64> {
    let bets = wsr_bets(sample, delta);
    let values = sample.values();
    let log_threshold = (1.0 / delta.value()).ln();
    let (support_lo, support_hi) = sample.support();

    if !rejects(values, &bets, support_hi, log_threshold) {
        return Ok(support_hi);
    }
    if rejects(values, &bets, support_lo, log_threshold) {
        return Ok(support_lo);
    }
    let (mut lo, mut hi) = (support_lo, support_hi);
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= tolerance {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if rejects(values, &bets, mid, log_threshold) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Err(Error::NoConvergence(MAX_BISECTION_STEPS))
}

/// Same bound computed after mapping the sample affinely onto `[0, 1]`.
pub fn wsr_ucb_scaled(sample: &BoundedSample, delta: ErrorLevel) -> Result<f64> {
    let (lo, hi) = sample.support();
    let width = hi - lo;
    let unit: Vec<f64> = sample
        .values()
        .iter()
        .map(|&w| ((w - lo) / width).clamp(0.0, 1.0))
        .collect();
    let unit = BoundedSample::new(unit, 0.0, 1.0)?;
    Ok(lo + width * wsr_ucb_to(&unit, delta, WSR_TOLERANCE / width)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(d: f64) -> ErrorLevel {
        ErrorLevel::new(d).unwrap()
    }

    #[test]
    fn all_mass_at_the_top_returns_upper_support() {
        let s = BoundedSample::new(vec![1.0; 20], 0.0, 1.0).unwrap();
        assert_eq!(wsr_ucb(&s, level(0.1)).unwrap(), 1.0);
        let s = BoundedSample::new(vec![2.0; 20], -1.0, 2.0).unwrap();
        assert_eq!(wsr_ucb(&s, level(0.1)).unwrap(), 2.0);
    }

    #[test]
    fn all_zero_sample_bound_is_small() {
        let s = BoundedSample::new(vec![0.0; 500], 0.0, 1.0).unwrap();
        let ucb = wsr_ucb(&s, level(0.1)).unwrap();
        assert!(ucb > 0.0 && ucb < 0.02, "{ucb}");
    }

    #[test]
    fn first_bet_uses_prior_variance() {
        let s = BoundedSample::new(vec![0.3, 0.6, 0.1], 0.0, 1.0).unwrap();
        let bets = wsr_bets(&s, level(0.1));
        let expected = (2.0 * 10.0_f64.ln() / (3.0 * 0.25)).sqrt().min(1.0);
        assert!((bets[0] - expected).abs() < 1e-15);
    }

    #[test]
    fn scaled_matches_generalised_on_unit_support() {
        let values: Vec<f64> = (0..60).map(|i| ((i * 37) % 61) as f64 / 60.0).collect();
        let s = BoundedSample::new(values, 0.0, 1.0).unwrap();
        let a = wsr_ucb(&s, level(0.1)).unwrap();
        let b = wsr_ucb_scaled(&s, level(0.1)).unwrap();
        assert!((a - b).abs() <= 2.0 * WSR_TOLERANCE);
    }
}
