//! One-sided upper confidence bounds for a bounded mean.
//!
//! Finite-sample bounds: Hoeffding, exact Clopper-Pearson for binary data,
//! and the betting-martingale bound (on a general `[A, B]` support or after
//! rescaling to `[0, 1]`). The CLT bound is asymptotic only and is tagged as
//! such wherever it is reported.

mod binomial;
mod normal;
mod wsr;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use binomial::{
    binomial_cdf, binomial_pmf, clopper_pearson_ucb, BinomialCount, CP_TOLERANCE,
    MAX_BISECTION_STEPS,
};
pub use normal::normal_quantile;
pub use wsr::{wsr_bets, wsr_capital, wsr_ucb, wsr_ucb_scaled, WSR_TOLERANCE};

use crate::error::{Error, Result};

/// Smallest accepted error level.
pub const MIN_DELTA: f64 = 1e-12;

/// Tolerance used when checking that a loss is 0 or 1.
pub const BINARY_TOLERANCE: f64 = 1e-9;

/// A probability of failure `delta`, `1e-12 <= delta < 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct ErrorLevel(f64);

impl ErrorLevel {
    pub fn new(delta: f64) -> Result<Self> {
        if !(MIN_DELTA..1.0).contains(&delta) {
            return Err(Error::InvalidDelta(delta));
        }
        Ok(Self(delta))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for ErrorLevel {
    type Error = Error;

    fn try_from(value: f64) -> Result<Self> {
        Self::new(value)
    }
}

impl From<ErrorLevel> for f64 {
    fn from(level: ErrorLevel) -> f64 {
        level.0
    }
}

/// Ordered i.i.d. observations with a declared support `[A, B]`.
///
/// Order matters for the betting bound, which consumes the values
/// sequentially.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundedSample {
    values: Vec<f64>,
    lo: f64,
    hi: f64,
}

impl BoundedSample {
    pub fn new(values: Vec<f64>, lo: f64, hi: f64) -> Result<Self> {
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(Error::InvalidSupport { lo, hi });
        }
        if values.is_empty() {
            return Err(Error::EmptySample);
        }
        if let Some((index, &value)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(lo..=hi).contains(*v))
        {
            return Err(Error::OutOfSupport {
                index,
                value,
                lo,
                hi,
            });
        }
        Ok(Self { values, lo, hi })
    }

    /// Sample of losses on `[0, 1]`.
    pub fn unit(values: Vec<f64>) -> Result<Self> {
        Self::new(values, 0.0, 1.0)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn support(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }

    /// Unbiased sample variance (`n - 1` denominator).
    pub fn variance(&self) -> Option<f64> {
        let n = self.values.len();
        if n < 2 {
            return None;
        }
        let mean = self.mean();
        let ss: f64 = self.values.iter().map(|v| (v - mean) * (v - mean)).sum();
        Some(ss / (n - 1) as f64)
    }

    /// Number of ones when every value is 0 or 1 up to [`BINARY_TOLERANCE`].
    pub fn binary_count(&self) -> Option<u64> {
        let mut ones = 0;
        for &v in &self.values {
            if v.abs() <= BINARY_TOLERANCE {
                continue;
            }
            if (v - 1.0).abs() <= BINARY_TOLERANCE {
                ones += 1;
            } else {
                return None;
            }
        }
        Some(ones)
    }
}

/// Bound family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UcbMethod {
    Hoeffding,
    ClopperPearson,
    Wsr,
    WsrScaled,
    Clt,
}

impl UcbMethod {
    pub fn is_asymptotic(self) -> bool {
        matches!(self, UcbMethod::Clt)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            UcbMethod::Hoeffding => "hoeffding",
            UcbMethod::ClopperPearson => "clopper_pearson",
            UcbMethod::Wsr => "wsr",
            UcbMethod::WsrScaled => "wsr_scaled",
            UcbMethod::Clt => "clt",
        }
    }
}

impl fmt::Display for UcbMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for UcbMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().replace('-', "_").as_str() {
            "hoeffding" => Ok(UcbMethod::Hoeffding),
            "cp" | "clopper_pearson" => Ok(UcbMethod::ClopperPearson),
            "wsr" => Ok(UcbMethod::Wsr),
            "wsr_scaled" => Ok(UcbMethod::WsrScaled),
            "clt" => Ok(UcbMethod::Clt),
            other => Err(Error::Config(format!("unknown bound method `{other}`"))),
        }
    }
}

/// Which bound to use and at which error level.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UcbSpec {
    pub method: UcbMethod,
    pub delta: ErrorLevel,
}

impl UcbSpec {
    pub fn new(method: UcbMethod, delta: ErrorLevel) -> Self {
        Self { method, delta }
    }

    /// Evaluates the bound on `sample`.
    ///
    /// Clopper-Pearson requires every value to be 0 or 1 after mapping the
    /// support onto `[0, 1]`; the bound is mapped back afterwards.
    pub fn evaluate(&self, sample: &BoundedSample) -> Result<f64> {
        match self.method {
            UcbMethod::Hoeffding => hoeffding_ucb(sample, self.delta),
            UcbMethod::Wsr => wsr_ucb(sample, self.delta),
            UcbMethod::WsrScaled => wsr_ucb_scaled(sample, self.delta),
            UcbMethod::Clt => clt_ucb(sample, self.delta),
            UcbMethod::ClopperPearson => {
                let (lo, hi) = sample.support();
                let unit: Vec<f64> = sample
                    .values()
                    .iter()
                    .map(|&v| (v - lo) / (hi - lo))
                    .collect();
                let unit = BoundedSample::unit(unit)?;
                let ones = unit.binary_count().ok_or_else(|| {
                    let (row, &value) = sample
                        .values()
                        .iter()
                        .enumerate()
                        .find(|(_, v)| {
                            let u = (*v - lo) / (hi - lo);
                            u.abs() > BINARY_TOLERANCE && (u - 1.0).abs() > BINARY_TOLERANCE
                        })
                        .expect("non-binary value exists");
                    Error::NonBinary {
                        row,
                        column: 0,
                        value,
                    }
                })?;
                let count = BinomialCount::new(sample.len() as u64, ones)?;
                Ok(lo + (hi - lo) * clopper_pearson_ucb(count, self.delta)?)
            }
        }
    }
}

/// `mean + (B - A) sqrt(ln(1/delta) / (2n))`. May exceed `B`.
pub fn hoeffding_ucb(sample: &BoundedSample, delta: ErrorLevel) -> Result<f64> {
    let n = sample.len() as f64;
    let margin = sample.width() * ((1.0 / delta.value()).ln() / (2.0 * n)).sqrt();
    Ok(sample.mean() + margin)
}

/// `mean + z_{1-delta} sqrt(s^2 / n)` with the unbiased sample variance.
/// Valid only asymptotically.
pub fn clt_ucb(sample: &BoundedSample, delta: ErrorLevel) -> Result<f64> {
    let variance = sample.variance().ok_or(Error::TooFewSamples {
        what: "the CLT bound",
        needed: 2,
        got: sample.len(),
    })?;
    let z = normal_quantile(1.0 - delta.value());
    Ok(sample.mean() + z * (variance / sample.len() as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(d: f64) -> ErrorLevel {
        ErrorLevel::new(d).unwrap()
    }

    #[test]
    fn error_level_range() {
        assert!(ErrorLevel::new(0.0).is_err());
        assert!(ErrorLevel::new(1.0).is_err());
        assert!(ErrorLevel::new(1e-13).is_err());
        assert!(ErrorLevel::new(f64::NAN).is_err());
        assert!(ErrorLevel::new(1e-12).is_ok());
        assert!(ErrorLevel::new(0.999_999).is_ok());
    }

    #[test]
    fn sample_validation() {
        assert!(matches!(
            BoundedSample::new(vec![], 0.0, 1.0),
            Err(Error::EmptySample)
        ));
        assert!(matches!(
            BoundedSample::new(vec![0.5], 1.0, 1.0),
            Err(Error::InvalidSupport { .. })
        ));
        assert!(matches!(
            BoundedSample::new(vec![0.5, 1.5], 0.0, 1.0),
            Err(Error::OutOfSupport { index: 1, .. })
        ));
    }

    #[test]
    fn hoeffding_examples() {
        let mut values = vec![0.0; 45];
        values.extend([1.0; 5]);
        let s = BoundedSample::unit(values).unwrap();
        let ucb = hoeffding_ucb(&s, level(0.1)).unwrap();
        assert!((ucb - 0.251_742_712_938_514_6).abs() < 1e-12);

        let zeros = BoundedSample::unit(vec![0.0; 200]).unwrap();
        let ucb = hoeffding_ucb(&zeros, level(0.05)).unwrap();
        assert!((ucb - (20.0_f64.ln() / 400.0).sqrt()).abs() < 1e-15);
        assert!((ucb - 0.086_540_919_130_114_26).abs() < 1e-12);

        let ucb = hoeffding_ucb(&s, level(1.0 - 1e-12)).unwrap();
        assert!((ucb - 0.1).abs() < 1e-6);
    }

    #[test]
    fn clt_examples() {
        // Mean 0.1, unbiased sd 0.2, n = 100.
        let mut values = Vec::new();
        let half = 0.2 * (99.0_f64 / 100.0).sqrt();
        for _ in 0..50 {
            values.push(0.1 + half);
            values.push(0.1 - half);
        }
        let s = BoundedSample::new(values, -1.0, 1.0).unwrap();
        assert!((s.variance().unwrap().sqrt() - 0.2).abs() < 1e-12);
        let ucb = clt_ucb(&s, level(0.1)).unwrap();
        assert!((ucb - 0.125_631_031_310_892).abs() < 1e-9);

        assert!((clt_ucb(&s, level(0.5)).unwrap() - s.mean()).abs() < 1e-15);

        let constant = BoundedSample::unit(vec![0.37; 12]).unwrap();
        assert!((clt_ucb(&constant, level(0.05)).unwrap() - 0.37).abs() < 1e-15);

        let single = BoundedSample::unit(vec![0.3]).unwrap();
        assert!(matches!(
            clt_ucb(&single, level(0.1)),
            Err(Error::TooFewSamples { .. })
        ));
    }

    #[test]
    fn clopper_pearson_through_spec_requires_binary() {
        let spec = UcbSpec::new(UcbMethod::ClopperPearson, level(0.1));
        let s = BoundedSample::unit(vec![0.0, 1.0, 0.5]).unwrap();
        assert!(matches!(
            spec.evaluate(&s),
            Err(Error::NonBinary { row: 2, .. })
        ));
        let s = BoundedSample::unit(vec![0.0; 10]).unwrap();
        let ucb = spec.evaluate(&s).unwrap();
        assert!((ucb - (1.0 - 0.1_f64.powf(0.1))).abs() < 1e-9);
    }

    #[test]
    fn method_names_round_trip() {
        for m in [
            UcbMethod::Hoeffding,
            UcbMethod::ClopperPearson,
            UcbMethod::Wsr,
            UcbMethod::WsrScaled,
            UcbMethod::Clt,
        ] {
            assert_eq!(m.as_str().parse::<UcbMethod>().unwrap(), m);
        }
        assert_eq!(
            "cp".parse::<UcbMethod>().unwrap(),
            UcbMethod::ClopperPearson
        );
        assert!("bentkus".parse::<UcbMethod>().is_err());
    }
}
