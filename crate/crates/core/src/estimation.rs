//! Probability-paper regression and the likelihood baseline.
//!
//! Observations are regressed on the reduced regressors, `x_(i) = a + b y_(i)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::distributions::{DistributionSpec, Family, Parent};
use crate::error::{Error, Result};
use crate::order_stats::{build_moments, CovMode, OrderStatMoments};
use crate::positions::{positions, PositionFormula, PositionSet};

const MLE_MAX_ITER: usize = 200;
const MLE_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FitMethod {
    Ols,
    Gls,
    Mle,
}

impl fmt::Display for FitMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FitMethod::Ols => "ols",
            FitMethod::Gls => "gls",
            FitMethod::Mle => "mle",
        })
    }
}

impl FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ols" => Ok(FitMethod::Ols),
            "gls" => Ok(FitMethod::Gls),
            "mle" => Ok(FitMethod::Mle),
            other => Err(Error::InvalidInput(format!("unknown fit method '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Estimated location `a`.
    pub location: f64,
    /// Estimated scale `b`, always positive.
    pub scale: f64,
    pub method: FitMethod,
    /// Regressors `y_(i)`; empty for likelihood fits.
    pub design: Vec<f64>,
    pub residuals: Vec<f64>,
    /// Reduced family behind the regressors; `None` for a bare OLS fit.
    pub family: Option<Family>,
}

impl FitResult {
    /// The fitted distribution, with `parent` fixing how observations map
    /// to the reduced variate.
    pub fn distribution(&self, parent: Parent) -> Result<DistributionSpec> {
        DistributionSpec::new(parent, self.location, self.scale)
    }
}

fn check_sorted(x: &[f64]) -> Result<()> {
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("observations must be finite".into()));
    }
    if x.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::InvalidInput("observations must be sorted ascending".into()));
    }
    Ok(())
}

/// Least squares of `x` on `y` (slope = scale, intercept = location).
pub fn fit_ols(x_sorted: &[f64], y: &[f64]) -> Result<FitResult> {
    if x_sorted.len() != y.len() {
        return Err(Error::SizeMismatch {
            expected: y.len(),
            got: x_sorted.len(),
        });
    }
    if y.len() < 3 {
        return Err(Error::InvalidInput("least squares needs at least 3 points".into()));
    }
    check_sorted(x_sorted)?;
    let (location, scale) = ols_coefficients(x_sorted, y)?;
    finish(x_sorted, y, location, scale, FitMethod::Ols, None)
}

/// Intercept and slope without validation; used in the benchmark hot loop.
pub(crate) fn ols_coefficients(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = y.len() as f64;
    let my = y.iter().sum::<f64>() / n;
    let mx = x.iter().sum::<f64>() / n;
    let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
    if !(syy > 0.0) {
        return Err(Error::DegenerateDesign("regressors are constant".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / syy;
    Ok((mx - slope * my, slope))
}

fn finish(
    x: &[f64],
    y: &[f64],
    location: f64,
    scale: f64,
    method: FitMethod,
    family: Option<Family>,
) -> Result<FitResult> {
    if !(scale > 0.0) {
        return Err(Error::NonPositiveScale(scale));
    }
    let residuals = x.iter().zip(y).map(|(xi, yi)| xi - location - scale * yi).collect();
    Ok(FitResult {
        location,
        scale,
        method,
        design: y.to_vec(),
        residuals,
        family,
    })
}

/// Generalised least squares with the order-statistic covariance:
/// `(A' V^-1 A)^-1 A' V^-1 x` with `A = [1, y]`, solved by whitening with
/// the Cholesky factor of `V`.
pub fn fit_gls(x_sorted: &[f64], moments: &OrderStatMoments) -> Result<FitResult> {
    let n = moments.means.len();
    if x_sorted.len() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: x_sorted.len(),
        });
    }
    if moments.covariance.nrows() != n || moments.covariance.ncols() != n {
        return Err(Error::SizeMismatch {
            expected: n,
            got: moments.covariance.nrows(),
        });
    }
    if n < 3 {
        return Err(Error::InvalidInput("least squares needs at least 3 points".into()));
    }
    check_sorted(x_sorted)?;
    let chol = moments.cholesky()?;
    let l = chol.l();
    let design = DMatrix::from_fn(n, 2, |r, c| if c == 0 { 1.0 } else { moments.means[r] });
    let xs = DVector::from_column_slice(x_sorted);
    let wa = l.solve_lower_triangular(&design).ok_or(Error::SingularCovariance)?;
    let wx = l.solve_lower_triangular(&xs).ok_or(Error::SingularCovariance)?;
    let normal = wa.transpose() * &wa;
    let rhs = wa.transpose() * wx;
    let det = normal[(0, 0)] * normal[(1, 1)] - normal[(0, 1)] * normal[(1, 0)];
    if !(det.abs() > f64::EPSILON * normal.norm_squared()) {
        return Err(Error::DegenerateDesign("regressors are constant".into()));
    }
    let theta = normal
        .cholesky()
        .ok_or_else(|| Error::DegenerateDesign("normal equations not positive definite".into()))?
        .solve(&rhs);
    finish(
        x_sorted,
        &moments.means,
        theta[0],
        theta[1],
        FitMethod::Gls,
        Some(moments.family),
    )
}

/// Maximum-likelihood location and scale.
///
/// Normal: sample mean and the divisor-`n` standard deviation. Gumbel:
/// Newton iteration on the profile equation
/// `b - mean(x) + sum(x e^(-x/b)) / sum(e^(-x/b)) = 0`, then
/// `a = -b ln(mean(e^(-x/b)))`.
pub fn fit_mle(x: &[f64], family: Family) -> Result<FitResult> {
    if x.len() < 2 {
        return Err(Error::InvalidInput("likelihood fit needs at least 2 points".into()));
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("observations must be finite".into()));
    }
    let (location, scale) = match family {
        Family::Normal => normal_mle(x)?,
        Family::Gumbel => gumbel_mle(x)?,
        Family::Uniform => return Err(Error::InvalidInput("no likelihood fit for the uniform family".into())),
    };
    Ok(FitResult {
        location,
        scale,
        method: FitMethod::Mle,
        design: Vec::new(),
        residuals: Vec::new(),
        family: Some(family),
    })
}

fn normal_mle(x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    Ok((mean, var.sqrt()))
}

pub(crate) fn gumbel_mle(x: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let xmin = x.iter().copied().fold(f64::INFINITY, f64::min);
    let var = x.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
    if !(var > 0.0) {
        return Err(Error::ZeroVariance);
    }
    // Weights are shifted by the sample minimum so they never overflow.
    let moments = |b: f64| {
        let (mut s0, mut s1, mut s2) = (0.0, 0.0, 0.0);
        for &v in x {
            let d = v - xmin;
            let w = (-d / b).exp();
            s0 += w;
            s1 += d * w;
            s2 += d * d * w;
        }
        (s0, s1, s2)
    };
    let mut b = (6.0 * var).sqrt() / std::f64::consts::PI;
    for _ in 0..MLE_MAX_ITER {
        let (s0, s1, s2) = moments(b);
        let wmean = s1 / s0;
        let wvar = (s2 / s0 - wmean * wmean).max(0.0);
        let h = b - (mean - xmin) + wmean;
        let dh = 1.0 + wvar / (b * b);
        let mut next = b - h / dh;
        if !(next > 0.0) {
            next = 0.5 * b;
        }
        let step = (next - b).abs();
        b = next;
        if step < MLE_TOL {
            let (s0, _, _) = moments(b);
            let a = xmin - b * (s0 / n).ln();
            return Ok((a, b));
        }
    }
    Err(Error::NonConvergence(MLE_MAX_ITER))
}

/// Estimated quantile at a return period.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileEstimate {
    pub return_period: f64,
    /// Non-exceedance level `1 - 1/T`.
    pub level: f64,
    pub value: f64,
}

/// `a + b Q(1 - 1/T)`, on the observed scale of `parent`.
pub fn predict_quantile(fit: &FitResult, parent: Parent, return_period: f64) -> Result<QuantileEstimate> {
    if !(return_period > 1.0) || !return_period.is_finite() {
        return Err(Error::Domain(format!(
            "return period must exceed 1, got {return_period}"
        )));
    }
    let level = 1.0 - 1.0 / return_period;
    let value = fit.distribution(parent)?.quantile(level)?;
    Ok(QuantileEstimate {
        return_period,
        level,
        value,
    })
}

/// `1 - F(threshold; a, b)` for the fitted parent.
pub fn exceedance_probability(fit: &FitResult, parent: Parent, threshold: f64) -> Result<f64> {
    Ok(1.0 - fit.distribution(parent)?.cdf(threshold))
}

/// Stable ascending sort; tied observations keep their input order and
/// receive consecutive ranks.
pub fn sort_stable(x: &[f64]) -> Vec<f64> {
    let mut v = x.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// A sample fitted on probability paper.
#[derive(Debug, Clone)]
pub struct PaperFit {
    pub fit: FitResult,
    pub positions: PositionSet,
    /// Observations in rank order (on the regression scale).
    pub sorted: Vec<f64>,
    /// Regressors paired with `sorted`.
    pub regressors: Vec<f64>,
    /// Ridge added to the GLS covariance (0 for other methods).
    pub ridge: f64,
}

/// Positions, regressors and expansion order for a probability-paper fit
/// of `n` points. Regressors are `Q(p_i)`, except for the Taylor rule of the
/// same family, whose expanded means are used directly.
pub(crate) fn paper_regressors(
    family: Family,
    formula: PositionFormula,
    n: usize,
) -> Result<(PositionSet, Vec<f64>, usize)> {
    match formula {
        PositionFormula::TaylorEupp { family: f, order } if f == family => {
            let m = build_moments(family, n, order, CovMode::Identity)?;
            let p = m.means.iter().map(|v| family.cdf(*v)).collect();
            let set = PositionSet { n, p, formula };
            Ok((set, m.means, order))
        }
        _ => {
            let set = positions(formula, n)?;
            let y = set.p.iter().map(|p| family.quantile(*p)).collect::<Result<Vec<_>>>()?;
            Ok((set, y, 4))
        }
    }
}

/// Order-statistic covariance for a GLS fit, paired with `regressors`.
pub(crate) fn paper_moments(
    family: Family,
    order: usize,
    cov_mode: CovMode,
    regressors: &[f64],
) -> Result<OrderStatMoments> {
    let mut moments = build_moments(family, regressors.len(), order, cov_mode)?;
    moments.means = regressors.to_vec();
    Ok(moments)
}

/// Sorts `x`, assigns plotting positions and fits `(a, b)`.
///
/// Regressors are `Q(p_i)`, except for the Taylor rule where the expanded
/// means are used directly. GLS takes its covariance from
/// [`build_moments`] with `cov_mode` (order 4 unless the Taylor rule says
/// otherwise).
pub fn fit_probability_paper(
    x: &[f64],
    family: Family,
    formula: PositionFormula,
    method: FitMethod,
    cov_mode: CovMode,
) -> Result<PaperFit> {
    let sorted = sort_stable(x);
    let n = sorted.len();
    if n < 3 {
        return Err(Error::InvalidInput(
            "probability-paper fit needs at least 3 points".into(),
        ));
    }
    let (set, regressors, order) = paper_regressors(family, formula, n)?;
    let (fit, ridge) = match method {
        FitMethod::Ols => {
            let mut fit = fit_ols(&sorted, &regressors)?;
            fit.family = Some(family);
            (fit, 0.0)
        }
        FitMethod::Gls => {
            let moments = paper_moments(family, order, cov_mode, &regressors)?;
            let ridge = moments.ridge;
            (fit_gls(&sorted, &moments)?, ridge)
        }
        FitMethod::Mle => (fit_mle(&sorted, family)?, 0.0),
    };
    Ok(PaperFit {
        fit,
        positions: set,
        sorted,
        regressors,
        ridge,
    })
}
