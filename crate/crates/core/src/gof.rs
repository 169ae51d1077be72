//! Modified Anderson–Darling test of normality.
//!
//! `A^2 = -n - (1/n) sum (2i - 1) [ln u_(i) + ln(1 - u_(n+1-i))]` with
//! `u_(i) = Phi((x_(i) - mean) / sd)`, multiplied by the small-sample factor
//! `1 + 0.75/n + 2.25/n^2` for a normal law with estimated mean and variance,
//! then compared with the upper-tail points 0.787 (5%) and 0.918 (2.5%).

use serde::{Deserialize, Serialize};

use crate::distributions::normal_cdf;
use crate::error::{Error, Result};

/// Upper 5% point of the modified statistic.
pub const CRITICAL_5PCT: f64 = 0.787;
/// Upper 2.5% point of the modified statistic.
pub const CRITICAL_2_5PCT: f64 = 0.918;
/// Smallest sample accepted when the parameters are estimated.
pub const MIN_ESTIMATED_N: usize = 5;

/// Where the statistic sits relative to the two critical points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    /// Not above the 5% point.
    Pass5pct,
    /// Above the 5% point but not above the 2.5% point.
    Pass2_5pct,
    Fail,
}

impl Comparison {
    pub fn classify(a2_modified: f64) -> Self {
        if a2_modified <= CRITICAL_5PCT {
            Comparison::Pass5pct
        } else if a2_modified <= CRITICAL_2_5PCT {
            Comparison::Pass2_5pct
        } else {
            Comparison::Fail
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReferencePoints {
    pub five_pct: f64,
    pub two_and_half_pct: f64,
}

const REFERENCE: ReferencePoints = ReferencePoints {
    five_pct: CRITICAL_5PCT,
    two_and_half_pct: CRITICAL_2_5PCT,
};

/// Whether the normal parameters came from the tested sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ParamSource {
    Estimated,
    Fixed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MadResult {
    pub n: usize,
    pub mean: f64,
    pub sd: f64,
    pub params: ParamSource,
    pub a2_raw: f64,
    pub a2_modified: f64,
    pub comparison: Comparison,
    pub reference_points: ReferencePoints,
    /// Some `u_(i)` fell to 0 or 1 in floating point and was clamped.
    pub saturated: bool,
}

/// `1 + 0.75/n + 2.25/n^2`.
pub fn modification_factor(n: usize) -> f64 {
    let n = n as f64;
    1.0 + 0.75 / n + 2.25 / (n * n)
}

/// Sample mean and standard deviation with divisor `n - 1`.
pub fn mean_sd(x: &[f64]) -> Result<(f64, f64)> {
    if x.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 observations".into()));
    }
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let ss: f64 = x.iter().map(|v| (v - mean) * (v - mean)).sum();
    let sd = (ss / (n - 1.0)).sqrt();
    if !(sd > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((mean, sd))
}

/// Anderson–Darling statistic against `N(mean, sd^2)`; also reports whether
/// any probability had to be clamped away from 0.
pub fn anderson_darling(x: &[f64], mean: f64, sd: f64) -> Result<(f64, bool)> {
    if !(sd > 0.0 && sd.is_finite()) || !mean.is_finite() {
        return Err(Error::Domain(format!(
            "need finite mean and sd > 0, got ({mean}, {sd})"
        )));
    }
    if x.is_empty() || x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("observations must be finite and non-empty".into()));
    }
    let mut z: Vec<f64> = x.iter().map(|v| (v - mean) / sd).collect();
    z.sort_by(f64::total_cmp);
    let n = z.len();
    let mut saturated = false;
    let mut log_cdf = |t: f64| {
        let p = normal_cdf(t);
        if p > 0.0 {
            p.ln()
        } else {
            saturated = true;
            f64::MIN_POSITIVE.ln()
        }
    };
    let mut s = 0.0;
    for i in 0..n {
        // ln(1 - Phi(z)) is evaluated as ln Phi(-z) to keep upper-tail accuracy.
        let lower = log_cdf(z[i]);
        let upper = log_cdf(-z[n - 1 - i]);
        s += (2 * i + 1) as f64 * (lower + upper);
    }
    Ok((-(n as f64) - s / n as f64, saturated))
}

fn result(x: &[f64], mean: f64, sd: f64, params: ParamSource) -> Result<MadResult> {
    let (a2_raw, saturated) = anderson_darling(x, mean, sd)?;
    let a2_modified = a2_raw * modification_factor(x.len());
    Ok(MadResult {
        n: x.len(),
        mean,
        sd,
        params,
        a2_raw,
        a2_modified,
        comparison: Comparison::classify(a2_modified),
        reference_points: REFERENCE,
        saturated,
    })
}

/// Test with mean and sd estimated from `x` itself.
pub fn mad_case3(x: &[f64]) -> Result<MadResult> {
    if x.len() < MIN_ESTIMATED_N {
        return Err(Error::InvalidInput(format!(
            "need at least {MIN_ESTIMATED_N} observations, got {}",
            x.len()
        )));
    }
    let (mean, sd) = mean_sd(x)?;
    result(x, mean, sd, ParamSource::Estimated)
}

/// Test against externally supplied parameters. The small-sample factor is
/// still applied so values are comparable with [`mad_case3`].
pub fn mad_known_params(x: &[f64], mean: f64, sd: f64) -> Result<MadResult> {
    if x.len() < 2 {
        return Err(Error::InvalidInput("need at least 2 observations".into()));
    }
    result(x, mean, sd, ParamSource::Fixed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::{normal_quantile, DistributionSpec};
    use proptest::prelude::*;

    fn spaced(n: usize) -> Vec<f64> {
        (1..=n)
            .map(|i| normal_quantile((i as f64 - 0.375) / (n as f64 + 0.25)))
            .collect()
    }

    #[test]
    fn known_value() {
        // Hand-computed: x = [-1, 0, 1], N(0, 1).
        let (a2, sat) = anderson_darling(&[-1.0, 0.0, 1.0], 0.0, 1.0).unwrap();
        let p = [normal_cdf(-1.0), 0.5, normal_cdf(1.0)];
        let mut s = 0.0;
        for i in 0..3 {
            s += (2 * i + 1) as f64 * (p[i].ln() + (1.0 - p[2 - i]).ln());
        }
        assert!((a2 - (-3.0 - s / 3.0)).abs() < 1e-12);
        assert!(!sat);
    }

    #[test]
    fn quantile_spaced_sample_passes() {
        let x = spaced(10_000);
        let r = mad_case3(&x).unwrap();
        assert!(r.a2_modified < 0.05, "{}", r.a2_modified);
        assert_eq!(r.comparison, Comparison::Pass5pct);
        let r = mad_known_params(&spaced(40), 0.0, 1.0).unwrap();
        assert_eq!(r.comparison, Comparison::Pass5pct);
        assert_eq!(r.params, ParamSource::Fixed);
    }

    #[test]
    fn modified_exceeds_raw() {
        let r = mad_case3(&[0.3, 1.2, -0.7, 2.2, 0.1, -1.4, 0.9]).unwrap();
        assert!(r.a2_raw > 0.0 && r.a2_modified > r.a2_raw);
    }

    #[test]
    fn classification_boundaries() {
        assert_eq!(Comparison::classify(0.787), Comparison::Pass5pct);
        assert_eq!(Comparison::classify(0.825), Comparison::Pass2_5pct);
        assert_eq!(Comparison::classify(0.918), Comparison::Pass2_5pct);
        assert_eq!(Comparison::classify(0.919), Comparison::Fail);
    }

    #[test]
    fn rejects_degenerate_input() {
        assert!(matches!(mad_case3(&[1.0; 6]), Err(Error::ZeroVariance)));
        assert!(mad_case3(&[1.0, 2.0, 3.0, 4.0]).is_err());
        assert!(mad_known_params(&[1.0, 2.0], 0.0, 0.0).is_err());
    }

    #[test]
    fn far_outlier_saturates() {
        let r = mad_known_params(&[0.0, 0.1, -50.0], 0.0, 1.0).unwrap();
        assert!(r.saturated && r.a2_raw.is_finite());
    }

    #[test]
    fn rejection_rate_under_normality_is_near_five_percent() {
        let trials = 4000;
        let mut rejected = 0;
        for seed in 0..trials {
            let x = DistributionSpec::normal(0.0, 1.0).unwrap().sample(30, seed).unwrap();
            if mad_case3(&x).unwrap().a2_modified > CRITICAL_5PCT {
                rejected += 1;
            }
        }
        let rate = rejected as f64 / trials as f64;
        assert!((0.035..=0.065).contains(&rate), "{rate}");
    }

    proptest! {
        #[test]
        fn invariant_under_affine_maps_and_order(
            x in prop::collection::vec(-5.0f64..5.0, 6..40),
            a in -100.0f64..100.0,
            b in 0.01f64..100.0,
        ) {
            prop_assume!(mean_sd(&x).is_ok());
            let r = mad_case3(&x).unwrap();
            let y: Vec<f64> = x.iter().rev().map(|v| a + b * v).collect();
            let s = mad_case3(&y).unwrap();
            prop_assert!((r.a2_raw - s.a2_raw).abs() <= 1e-8 * r.a2_raw.max(1.0));
        }
    }
}
