//! Binomial distribution function and the exact Clopper-Pearson upper bound.
//!
//! The point masses use Loader's saddle-point expansion, which keeps full
//! relative precision for large `n` where a plain `ln_gamma` difference
//! would cancel. The distribution function sums masses outward from `k`
//! with the ratio recurrence and stops once the remaining terms can no
//! longer change the sum.

use serde::{Deserialize, Serialize};

use super::ErrorLevel;
use crate::error::{Error, Result};

/// Absolute bisection tolerance on the Clopper-Pearson bound.
pub const CP_TOLERANCE: f64 = 1e-10;

/// Bisection iteration cap shared by every root search in this crate.
pub const MAX_BISECTION_STEPS: usize = 200;

/// `k` failures out of `n` Bernoulli trials.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BinomialCount {
    trials: u64,
    failures: u64,
}

impl BinomialCount {
    pub fn new(trials: u64, failures: u64) -> Result<Self> {
        if trials == 0 || failures > trials {
            return Err(Error::InvalidCount { trials, failures });
        }
        Ok(Self { trials, failures })
    }

    /// Converts an empirical rate into a count via `ceil(n * rate)`.
    ///
    /// `n * rate` is snapped to the nearest integer first when it lies within
    /// 1e-12 of it, so that binary losses averaged in floating point never
    /// round up by one.
    pub fn from_rate(trials: u64, rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&rate) {
            return Err(Error::InvalidProbability(rate));
        }
        let scaled = trials as f64 * rate;
        let nearest = scaled.round();
        let snapped = if (scaled - nearest).abs() <= 1e-12 {
            nearest
        } else {
            scaled.ceil()
        };
        Self::new(trials, snapped as u64)
    }

    pub fn trials(&self) -> u64 {
        self.trials
    }

    pub fn failures(&self) -> u64 {
        self.failures
    }

    pub fn rate(&self) -> f64 {
        self.failures as f64 / self.trials as f64
    }
}

// stirlerr(n) = ln(n!) - ln(sqrt(2 pi n) (n/e)^n) for n = 0..=15.
#[allow(clippy::excessive_precision)]
const STIRLERR: [f64; 16] = [
    0.0,
    0.081_061_466_795_327_258_22,
    0.041_340_695_955_409_294_094,
    0.027_677_925_684_998_339_149,
    0.020_790_672_103_765_093_112,
    0.016_644_691_189_821_192_163,
    0.013_876_128_823_070_747_999,
    0.011_896_709_945_891_770_095,
    0.010_411_265_261_972_096_497,
    0.009_255_462_182_712_732_917_7,
    0.008_330_563_433_362_871_256_5,
    0.007_573_675_487_951_840_795,
    0.006_942_840_107_209_529_865_7,
    0.006_408_994_188_004_207_068_4,
    0.005_951_370_112_758_847_735_6,
    0.005_554_733_551_962_801_371,
];

fn stirlerr(n: u64) -> f64 {
    const S0: f64 = 1.0 / 12.0;
    const S1: f64 = 1.0 / 360.0;
    const S2: f64 = 1.0 / 1260.0;
    const S3: f64 = 1.0 / 1680.0;
    const S4: f64 = 1.0 / 1188.0;
    if n <= 15 {
        return STIRLERR[n as usize];
    }
    let x = n as f64;
    let xx = x * x;
    if n > 500 {
        (S0 - S1 / xx) / x
    } else if n > 80 {
        (S0 - (S1 - S2 / xx) / xx) / x
    } else if n > 35 {
        (S0 - (S1 - (S2 - S3 / xx) / xx) / xx) / x
    } else {
        (S0 - (S1 - (S2 - (S3 - S4 / xx) / xx) / xx) / xx) / x
    }
}

/// Deviance term `x ln(x / np) + np - x`, evaluated without cancellation.
fn bd0(x: f64, np: f64) -> f64 {
    if (x - np).abs() < 0.1 * (x + np) {
        let mut v = (x - np) / (x + np);
        let mut s = (x - np) * v;
        if s.abs() < f64::MIN_POSITIVE {
            return s;
        }
        let mut ej = 2.0 * x * v;
        v *= v;
        for j in 1..1000 {
            ej *= v;
            let s1 = s + ej / f64::from(2 * j + 1);
            if s1 == s {
                return s1;
            }
            s = s1;
        }
    }
    x * (x / np).ln() + np - x
}

/// Natural log of P(Binom(n, p) = x), with `q = 1 - p` passed explicitly.
fn ln_pmf(x: u64, n: u64, p: f64, q: f64) -> f64 {
    if p == 0.0 {
        return if x == 0 { 0.0 } else { f64::NEG_INFINITY };
    }
    if q == 0.0 {
        return if x == n { 0.0 } else { f64::NEG_INFINITY };
    }
    let nf = n as f64;
    if x == 0 {
        return if p < 0.1 {
            -bd0(nf, nf * q) - nf * p
        } else {
            nf * q.ln()
        };
    }
    if x == n {
        return if q < 0.1 {
            -bd0(nf, nf * p) - nf * q
        } else {
            nf * p.ln()
        };
    }
    let xf = x as f64;
    let lc = stirlerr(n) - stirlerr(x) - stirlerr(n - x) - bd0(xf, nf * p) - bd0(nf - xf, nf * q);
    let lf = (2.0 * std::f64::consts::PI).ln() + xf.ln() + (-xf / nf).ln_1p();
    lc - 0.5 * lf
}

/// P(Binom(n, p) = x).
pub fn binomial_pmf(n: u64, x: u64, p: f64) -> f64 {
    if x > n {
        return 0.0;
    }
    ln_pmf(x, n, p, 1.0 - p).exp()
}

/// P(Binom(n, p) <= k).
pub fn binomial_cdf(count: BinomialCount, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) || p.is_nan() {
        return Err(Error::InvalidProbability(p));
    }
    Ok(cdf_unchecked(count.trials, count.failures, p))
}

pub(crate) fn cdf_unchecked(n: u64, k: u64, p: f64) -> f64 {
    if k >= n || p == 0.0 {
        return 1.0;
    }
    if p == 1.0 {
        return 0.0;
    }
    let q = 1.0 - p;
    let mode = ((n as f64 + 1.0) * p).floor() as u64;
    if k < mode {
        // Lower tail; masses shrink as j decreases from k.
        let ratio = q / p;
        let mut term = ln_pmf(k, n, p, q).exp();
        let mut sum = term;
        let mut j = k;
        while j > 0 && term > sum * 1e-17 {
            term *= j as f64 / (n - j + 1) as f64 * ratio;
            sum += term;
            j -= 1;
        }
        sum.min(1.0)
    } else {
        // Upper tail from k+1; masses shrink as j grows past the mode.
        let ratio = p / q;
        let mut j = k + 1;
        let mut term = ln_pmf(j, n, p, q).exp();
        let mut sum = term;
        while j < n && term > sum * 1e-17 {
            term *= (n - j) as f64 / (j + 1) as f64 * ratio;
            sum += term;
            j += 1;
        }
        (1.0 - sum).max(0.0)
    }
}

/// Exact one-sided upper bound `sup { R : P(Binom(n, R) <= k) >= delta }`.
///
/// Returns 1 when every trial failed. Otherwise bisects on `R`, using that
/// the distribution function is nonincreasing in `R`, and returns the upper
/// end of the final bracket.
pub fn clopper_pearson_ucb(count: BinomialCount, delta: ErrorLevel) -> Result<f64> {
    let (n, k) = (count.trials, count.failures);
    if k == n {
        return Ok(1.0);
    }
    let target = delta.value();
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    for _ in 0..MAX_BISECTION_STEPS {
        if hi - lo <= CP_TOLERANCE {
            return Ok(hi);
        }
        let mid = 0.5 * (lo + hi);
        if cdf_unchecked(n, k, mid) >= target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::NoConvergence(MAX_BISECTION_STEPS))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(d: f64) -> ErrorLevel {
        ErrorLevel::new(d).unwrap()
    }

    fn direct_cdf(n: u64, k: u64, p: f64) -> f64 {
        // Small-n oracle: exact binomial coefficients in f64.
        let mut coeff = 1.0_f64;
        let mut total = 0.0;
        for j in 0..=k {
            if j > 0 {
                coeff = coeff * (n - j + 1) as f64 / j as f64;
            }
            total += coeff * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32);
        }
        total
    }

    #[test]
    fn cdf_small_cases() {
        let c = |n, k| BinomialCount::new(n, k).unwrap();
        assert!((binomial_cdf(c(1, 0), 0.3).unwrap() - 0.7).abs() < 1e-15);
        assert_eq!(binomial_cdf(c(10, 10), 0.9).unwrap(), 1.0);
        assert!((binomial_cdf(c(20, 3), 0.2).unwrap() - 0.411_448_861_956_568_9).abs() < 1e-12);
    }

    #[test]
    fn cdf_matches_direct_sum_for_small_n() {
        for n in 1..40_u64 {
            for k in 0..=n {
                for &p in &[0.001, 0.05, 0.2, 0.37, 0.5, 0.81, 0.999] {
                    let got = cdf_unchecked(n, k, p);
                    let want = direct_cdf(n, k, p);
                    assert!(
                        (got - want).abs() < 1e-13,
                        "n={n} k={k} p={p}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn cdf_edges() {
        let c = BinomialCount::new(5, 2).unwrap();
        assert_eq!(binomial_cdf(c, 0.0).unwrap(), 1.0);
        assert_eq!(binomial_cdf(c, 1.0).unwrap(), 0.0);
        assert!(binomial_cdf(c, -0.1).is_err());
        assert!(binomial_cdf(c, 1.1).is_err());
        assert!(binomial_cdf(c, f64::NAN).is_err());
    }

    #[test]
    fn count_validation_and_rate_conversion() {
        assert!(BinomialCount::new(0, 0).is_err());
        assert!(BinomialCount::new(3, 4).is_err());
        // 0.3 * 10 is 3.0000000000000004 in floating point.
        assert_eq!(
            BinomialCount::from_rate(10, 0.1 + 0.2).unwrap().failures(),
            3
        );
        assert_eq!(BinomialCount::from_rate(10, 0.25).unwrap().failures(), 3);
        assert_eq!(BinomialCount::from_rate(7, 0.0).unwrap().failures(), 0);
    }

    #[test]
    fn clopper_pearson_examples() {
        let c = |n, k| BinomialCount::new(n, k).unwrap();
        let zero = clopper_pearson_ucb(c(10, 0), level(0.05)).unwrap();
        assert!((zero - (1.0 - 0.05_f64.powf(0.1))).abs() < 1e-8);
        assert!((zero - 0.258_866).abs() < 1e-6);
        assert_eq!(clopper_pearson_ucb(c(7, 7), level(0.3)).unwrap(), 1.0);
        // scipy.stats.beta.ppf(0.9, 4, 17)
        let ucb = clopper_pearson_ucb(c(20, 3), level(0.1)).unwrap();
        assert!((ucb - 0.304_186_811_407_478_7).abs() < 1e-9);
        assert!((cdf_unchecked(20, 3, ucb) - 0.1).abs() < 1e-8);
    }

    #[test]
    fn large_n_masses_sum_to_one() {
        for &(n, p) in &[(50_000_u64, 0.07), (200_000, 0.5), (10_000, 0.999)] {
            let total: f64 = (0..=n).map(|x| binomial_pmf(n, x, p)).sum();
            assert!((total - 1.0).abs() < 1e-12, "n={n} p={p}: {total}");
        }
    }
}
