//! Slow independent reference for the exact binomial bound.

use statrs::function::gamma::ln_gamma;

use crate::bounds::{BinomialCount, ErrorLevel};

/// Largest supported trial count.
pub const ORACLE_MAX_TRIALS: u64 = 10_000;

fn direct_cdf(log_coeffs: &[f64], k: u64, n: u64, r: f64) -> f64 {
    if r <= 0.0 {
        return 1.0;
    }
    if r >= 1.0 {
        return if k >= n { 1.0 } else { 0.0 };
    }
    let (lr, lq) = (r.ln(), (-r).ln_1p());
    (0..=k)
        .map(|j| (log_coeffs[j as usize] + j as f64 * lr + (n - j) as f64 * lq).exp())
        .sum()
}

/// `sup { R : P(Binom(n, R) <= k) >= delta }` by scanning `R` on a grid of
/// step 1e-6, summing the distribution function term by term.
///
/// The scan runs at steps 1e-2, 1e-4 and 1e-6 in turn, each within the cell
/// found by the previous one; since the distribution function is
/// nonincreasing in `R` this visits the same final grid point as a full
/// 1e-6 scan. Panics beyond [`ORACLE_MAX_TRIALS`].
pub fn brute_force_cp_oracle(count: BinomialCount, delta: ErrorLevel) -> f64 {
    let (n, k) = (count.trials(), count.failures());
    assert!(
        n <= ORACLE_MAX_TRIALS,
        "oracle supports at most {ORACLE_MAX_TRIALS} trials"
    );
    if k == n {
        return 1.0;
    }
    let ln_n_fact = ln_gamma(n as f64 + 1.0);
    let log_coeffs: Vec<f64> = (0..=k)
        .map(|j| ln_n_fact - ln_gamma(j as f64 + 1.0) - ln_gamma((n - j) as f64 + 1.0))
        .collect();
    let passes = |r: f64| direct_cdf(&log_coeffs, k, n, r) >= delta.value();

    let mut base = 0.0_f64;
    for step in [1e-2, 1e-4, 1e-6] {
        let mut i = 0_u32;
        while i < 100 && passes(base + f64::from(i + 1) * step) {
            i += 1;
        }
        base += f64::from(i) * step;
    }
    base
}

#[cfg(test)]
mod tests {
    use super::*;

    fn oracle(n: u64, k: u64, d: f64) -> f64 {
        brute_force_cp_oracle(
            BinomialCount::new(n, k).unwrap(),
            ErrorLevel::new(d).unwrap(),
        )
    }

    #[test]
    fn closed_form_cases() {
        let closed = 1.0 - 0.05_f64.powf(0.1);
        assert!((oracle(10, 0, 0.05) - closed).abs() < 2e-6);
        assert!((oracle(10, 0, 0.05) - 0.258_866).abs() < 2e-6);
        assert!((oracle(1, 0, 0.5) - 0.5).abs() < 2e-6);
        assert_eq!(oracle(5, 5, 0.1), 1.0);
    }
}
