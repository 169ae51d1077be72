//! Monte Carlo comparison of plotting positions.
//!
//! Three parameter-free indices are computed for each candidate:
//!
//! * IQSE, the integral over `F` of the expected squared error of the
//!   estimated reduced quantile `z_T`;
//! * IFSE, the integral over `F` of the expected squared error of the
//!   fitted cdf at the true quantile;
//! * DSE, the root mean squared gap between `Q(p_i)` and the exact
//!   order-statistic means (deterministic).
//!
//! Probability-paper estimators are linear in the sorted sample, so each
//! candidate is reduced to two weight vectors before the simulation starts.
//! With `alpha = (a_hat - a) / b` and `beta = b_hat / b`, the standardised
//! quantile error at `z` is `alpha + (beta - 1) z`, which makes the QSE curve
//! a quadratic in `z` whose three coefficients are averaged over replicates.

use std::fmt;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::distributions::{rng_from_seed, uniform_open01, Family};
use crate::error::{Error, Result};
use crate::estimation::{fit_mle, paper_moments, paper_regressors, sort_stable, FitMethod};
use crate::order_stats::{exact_mean, CovMode};
use crate::positions::{positions, PositionFormula};

/// Fewest replicates accepted by [`ExperimentConfig::validate`].
pub const MIN_REPLICATES: usize = 100;

/// Replicates generated per parallel batch; results are folded in
/// replicate order so the report does not depend on the thread count.
const BATCH: usize = 2048;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "PPBENCH_THREADS";

/// Worker cap from [`THREADS_ENV`], if set to a positive integer.
pub fn thread_cap_from_env() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|v| *v > 0)
}

/// How the integration nodes over `F` were laid out.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum GridKind {
    /// `F = 1 / (1 + e^-t)` for `count` equally spaced `t` in `[-t_max, t_max]`.
    Logit { t_max: f64, count: usize },
    /// `count` equally spaced `F` in `[lo, hi]`.
    Uniform { lo: f64, hi: f64, count: usize },
    /// Nodes supplied by the caller.
    Custom { count: usize },
}

/// Nodes on (0, 1) with trapezoid weights in `F`.
#[derive(Debug, Clone, PartialEq)]
pub struct FGrid {
    pub kind: GridKind,
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl FGrid {
    /// Logit-spaced nodes; they crowd towards both tails, where the
    /// quantile error grows without bound.
    pub fn logit(t_max: f64, count: usize) -> Result<Self> {
        if !(t_max > 0.0 && t_max.is_finite()) || count < 2 {
            return Err(Error::InvalidInput("logit grid needs t_max > 0 and 2+ nodes".into()));
        }
        let step = 2.0 * t_max / (count - 1) as f64;
        let nodes = (0..count)
            .map(|k| {
                let t = -t_max + step * k as f64;
                1.0 / (1.0 + (-t).exp())
            })
            .collect();
        Self::build(GridKind::Logit { t_max, count }, nodes)
    }

    pub fn uniform(lo: f64, hi: f64, count: usize) -> Result<Self> {
        if count < 2 {
            return Err(Error::InvalidInput("grid needs at least 2 nodes".into()));
        }
        let step = (hi - lo) / (count - 1) as f64;
        let nodes = (0..count).map(|k| lo + step * k as f64).collect();
        Self::build(GridKind::Uniform { lo, hi, count }, nodes)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        Self::build(GridKind::Custom { count: nodes.len() }, nodes)
    }

    fn build(kind: GridKind, nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidInput("grid needs at least 2 nodes".into()));
        }
        if nodes.iter().any(|f| !(*f > 0.0 && *f < 1.0)) {
            return Err(Error::InvalidInput("grid nodes must lie strictly inside (0, 1)".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput("grid nodes must be strictly increasing".into()));
        }
        let m = nodes.len();
        let weights = (0..m)
            .map(|k| {
                let left = if k > 0 { nodes[k] - nodes[k - 1] } else { 0.0 };
                let right = if k + 1 < m { nodes[k + 1] - nodes[k] } else { 0.0 };
                0.5 * (left + right)
            })
            .collect();
        Ok(Self { kind, nodes, weights })
    }

    /// `hi - lo`, the integral of 1 under the trapezoid rule.
    pub fn span(&self) -> f64 {
        self.nodes[self.nodes.len() - 1] - self.nodes[0]
    }

    /// Trapezoid integral of values sampled at the nodes.
    pub fn integrate(&self, values: &[f64]) -> Result<f64> {
        if values.len() != self.nodes.len() {
            return Err(Error::SizeMismatch {
                expected: self.nodes.len(),
                got: values.len(),
            });
        }
        Ok(self.weights.iter().zip(values).map(|(w, v)| w * v).sum())
    }
}

impl Default for FGrid {
    /// 641 nodes with logit step 0.05 over `[-16, 16]`.
    fn default() -> Self {
        Self::logit(16.0, 641).expect("valid default grid")
    }
}

/// One estimator under comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Candidate {
    Positions(PositionFormula),
    Mle,
}

impl Candidate {
    pub fn id(&self) -> String {
        match self {
            Candidate::Positions(f) => f.id(),
            Candidate::Mle => "mle".into(),
        }
    }
}

impl fmt::Display for Candidate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub family: Family,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub formulas: Vec<PositionFormula>,
    /// Also run the maximum-likelihood baseline (IQSE and IFSE only).
    pub include_mle: bool,
    pub grid: FGrid,
    /// `Ols` or `Gls`.
    pub method: FitMethod,
    /// Covariance used when `method` is `Gls`.
    pub cov_mode: CovMode,
    /// Sampling location; the indices do not depend on it.
    pub location: f64,
    /// Sampling scale; the indices are reported per unit scale.
    pub scale: f64,
}

impl ExperimentConfig {
    /// Every catalogue rule plus MLE, OLS fits, reduced parent, default grid.
    pub fn new(family: Family, n: usize, replicates: usize, seed: u64) -> Self {
        Self {
            family,
            n,
            replicates,
            seed,
            formulas: PositionFormula::benchmark_set(family),
            include_mle: true,
            grid: FGrid::default(),
            method: FitMethod::Ols,
            cov_mode: CovMode::Expansion,
            location: 0.0,
            scale: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.family == Family::Uniform {
            return Err(Error::InvalidInput("benchmark parent must be gumbel or normal".into()));
        }
        if self.n < 3 {
            return Err(Error::InvalidInput("sample size must be at least 3".into()));
        }
        if self.replicates < MIN_REPLICATES {
            return Err(Error::InvalidInput(format!(
                "need at least {MIN_REPLICATES} replicates, got {}",
                self.replicates
            )));
        }
        if self.method == FitMethod::Mle {
            return Err(Error::InvalidInput(
                "benchmark fits positions by ols or gls; enable include_mle for the likelihood baseline".into(),
            ));
        }
        if !(self.scale > 0.0 && self.scale.is_finite()) || !self.location.is_finite() {
            return Err(Error::Domain(
                "sampling location/scale must be finite, scale > 0".into(),
            ));
        }
        Ok(())
    }

    fn candidates(&self) -> Vec<Candidate> {
        let mut c: Vec<Candidate> = self.formulas.iter().copied().map(Candidate::Positions).collect();
        if self.include_mle {
            c.push(Candidate::Mle);
        }
        c
    }
}

/// `(a_hat, b_hat) = (wa . x, wb . x)` for a sorted sample `x`.
#[derive(Debug, Clone)]
struct LinearEstimator {
    wa: Vec<f64>,
    wb: Vec<f64>,
}

impl LinearEstimator {
    fn ols(y: &[f64]) -> Result<Self> {
        let n = y.len() as f64;
        let my = y.iter().sum::<f64>() / n;
        let syy: f64 = y.iter().map(|v| (v - my) * (v - my)).sum();
        if !(syy > 0.0) {
            return Err(Error::DegenerateDesign("regressors are constant".into()));
        }
        let wb: Vec<f64> = y.iter().map(|v| (v - my) / syy).collect();
        let wa = wb.iter().map(|w| 1.0 / n - my * w).collect();
        Ok(Self { wa, wb })
    }

    fn gls(y: &[f64], v: &DMatrix<f64>) -> Result<Self> {
        let n = y.len();
        let chol = v.clone().cholesky().ok_or(Error::SingularCovariance)?;
        let design = DMatrix::from_fn(n, 2, |r, c| if c == 0 { 1.0 } else { y[r] });
        let vinv_a = chol.solve(&design);
        let info = design.transpose() * &vinv_a;
        let info_inv = info
            .try_inverse()
            .ok_or_else(|| Error::DegenerateDesign("GLS information matrix is singular".into()))?;
        let c = info_inv * vinv_a.transpose();
        Ok(Self {
            wa: c.row(0).iter().copied().collect(),
            wb: c.row(1).iter().copied().collect(),
        })
    }

    fn apply(&self, x: &[f64]) -> (f64, f64) {
        let a = self.wa.iter().zip(x).map(|(w, v)| w * v).sum();
        let b = self.wb.iter().zip(x).map(|(w, v)| w * v).sum();
        (a, b)
    }
}

enum Fitter {
    Linear(LinearEstimator),
    Mle,
}

fn build_fitter(cfg: &ExperimentConfig, candidate: Candidate) -> Result<Fitter> {
    let formula = match candidate {
        Candidate::Mle => return Ok(Fitter::Mle),
        Candidate::Positions(f) => f,
    };
    let (_, y, order) = paper_regressors(cfg.family, formula, cfg.n)?;
    let est = match cfg.method {
        FitMethod::Gls => {
            let m = paper_moments(cfg.family, order, cfg.cov_mode, &y)?;
            LinearEstimator::gls(&y, &m.covariance)?
        }
        _ => LinearEstimator::ols(&y)?,
    };
    Ok(Fitter::Linear(est))
}

/// Standardised errors of one fit: `alpha = (a_hat - a)/b`, `beta = b_hat/b`.
#[derive(Debug, Clone, Copy)]
struct Outcome {
    alpha: f64,
    beta: f64,
    ifse: f64,
}

/// Per-candidate running sums over kept replicates.
#[derive(Debug, Clone, Default)]
struct Accumulator {
    kept: usize,
    discarded: usize,
    s_aa: f64,
    s_ab: f64,
    s_bb: f64,
    s_iqse: f64,
    s_iqse2: f64,
    s_ifse: f64,
    s_ifse2: f64,
}

/// Grid quantities shared by all replicates.
struct GridTerms {
    z: Vec<f64>,
    w0: f64,
    w1: f64,
    w2: f64,
}

impl GridTerms {
    fn new(family: Family, grid: &FGrid) -> Self {
        let z: Vec<f64> = grid.nodes.iter().map(|f| family.quantile_unchecked(*f)).collect();
        let w0 = grid.weights.iter().sum();
        let w1 = grid.weights.iter().zip(&z).map(|(w, z)| w * z).sum();
        let w2 = grid.weights.iter().zip(&z).map(|(w, z)| w * z * z).sum();
        Self { z, w0, w1, w2 }
    }

    fn iqse(&self, alpha: f64, beta: f64) -> f64 {
        let d = beta - 1.0;
        alpha * alpha * self.w0 + 2.0 * alpha * d * self.w1 + d * d * self.w2
    }
}

fn ifse_of_fit(family: Family, grid: &FGrid, terms: &GridTerms, alpha: f64, beta: f64) -> f64 {
    grid.nodes
        .iter()
        .zip(&grid.weights)
        .zip(&terms.z)
        .map(|((f, w), z)| {
            let e = family.cdf((z - alpha) / beta) - f;
            w * e * e
        })
        .sum()
}

/// Reduced sample for replicate `r`, mapped to the sampling location/scale
/// and sorted.
fn replicate_sample(cfg: &ExperimentConfig, r: usize) -> Vec<f64> {
    let mut rng = rng_from_seed(cfg.seed, r as u64);
    let x: Vec<f64> = (0..cfg.n)
        .map(|_| cfg.location + cfg.scale * cfg.family.quantile_unchecked(uniform_open01(&mut rng)))
        .collect();
    sort_stable(&x)
}

fn run_replicate(cfg: &ExperimentConfig, fitters: &[Fitter], terms: &GridTerms, r: usize) -> Vec<Option<Outcome>> {
    let x = replicate_sample(cfg, r);
    fitters
        .iter()
        .map(|f| {
            let (a_hat, b_hat) = match f {
                Fitter::Linear(est) => est.apply(&x),
                Fitter::Mle => match fit_mle(&x, cfg.family) {
                    Ok(fit) => (fit.location, fit.scale),
                    Err(_) => return None,
                },
            };
            if !(b_hat > 0.0 && b_hat.is_finite() && a_hat.is_finite()) {
                return None;
            }
            let alpha = (a_hat - cfg.location) / cfg.scale;
            let beta = b_hat / cfg.scale;
            Some(Outcome {
                alpha,
                beta,
                ifse: ifse_of_fit(cfg.family, &cfg.grid, terms, alpha, beta),
            })
        })
        .collect()
}

/// Runs all replicates for the given fitters and returns one accumulator per
/// fitter. Batches are computed in parallel and folded in replicate order.
fn simulate(cfg: &ExperimentConfig, fitters: &[Fitter], terms: &GridTerms) -> Vec<Accumulator> {
    let mut acc = vec![Accumulator::default(); fitters.len()];
    let mut start = 0;
    while start < cfg.replicates {
        let end = (start + BATCH).min(cfg.replicates);
        let batch: Vec<Vec<Option<Outcome>>> = (start..end)
            .into_par_iter()
            .map(|r| run_replicate(cfg, fitters, terms, r))
            .collect();
        for outcomes in batch {
            for (a, o) in acc.iter_mut().zip(outcomes) {
                match o {
                    None => a.discarded += 1,
                    Some(o) => {
                        let d = o.beta - 1.0;
                        let iq = terms.iqse(o.alpha, o.beta);
                        a.kept += 1;
                        a.s_aa += o.alpha * o.alpha;
                        a.s_ab += o.alpha * d;
                        a.s_bb += d * d;
                        a.s_iqse += iq;
                        a.s_iqse2 += iq * iq;
                        a.s_ifse += o.ifse;
                        a.s_ifse2 += o.ifse * o.ifse;
                    }
                }
            }
        }
        start = end;
    }
    acc
}

fn mean_and_se(sum: f64, sum_sq: f64, count: usize) -> (f64, f64) {
    let m = count as f64;
    let mean = sum / m;
    if count < 2 {
        return (mean, f64::NAN);
    }
    let var = ((sum_sq - m * mean * mean) / (m - 1.0)).max(0.0);
    (mean, (var / m).sqrt())
}

/// `QSE(z) / b^2 = c0 + 2 c1 z + c2 z^2`, averaged over kept replicates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QseCoefficients {
    /// `E[alpha^2]`.
    pub c0: f64,
    /// `E[alpha (beta - 1)]`.
    pub c1: f64,
    /// `E[(beta - 1)^2]`.
    pub c2: f64,
}

impl QseCoefficients {
    pub fn at(&self, z: f64) -> f64 {
        self.c0 + 2.0 * self.c1 * z + self.c2 * z * z
    }
}

fn single(cfg: &ExperimentConfig, candidate: Candidate) -> Result<(Accumulator, GridTerms)> {
    cfg.validate()?;
    let fitters = [build_fitter(cfg, candidate)?];
    let terms = GridTerms::new(cfg.family, &cfg.grid);
    let acc = simulate(cfg, &fitters, &terms).remove(0);
    if acc.kept == 0 {
        return Err(Error::AllDiscarded(acc.discarded));
    }
    Ok((acc, terms))
}

/// `QSE / b^2` at every grid node for one candidate.
pub fn qse_curve(cfg: &ExperimentConfig, candidate: Candidate) -> Result<Vec<f64>> {
    let (acc, terms) = single(cfg, candidate)?;
    let m = acc.kept as f64;
    let c = QseCoefficients {
        c0: acc.s_aa / m,
        c1: acc.s_ab / m,
        c2: acc.s_bb / m,
    };
    Ok(terms.z.iter().map(|z| c.at(*z)).collect())
}

/// Trapezoid integral of a QSE curve over the grid.
pub fn iqse(curve: &[f64], grid: &FGrid) -> Result<f64> {
    if curve.iter().any(|v| !v.is_finite()) {
        return Err(Error::InvalidInput("QSE curve must be finite".into()));
    }
    grid.integrate(curve)
}

/// Integral cdf squared error for one candidate.
pub fn ifse(cfg: &ExperimentConfig, candidate: Candidate) -> Result<f64> {
    let (acc, _) = single(cfg, candidate)?;
    Ok(acc.s_ifse / acc.kept as f64)
}

/// Exact reduced order-statistic means for ranks `1..=n`.
pub fn exact_means(family: Family, n: usize) -> Result<Vec<f64>> {
    (1..=n).map(|i| exact_mean(family, i, n)).collect()
}

/// Root mean square of `Q(p_i) - means_i`.
pub fn dse_of_positions(family: Family, p: &[f64], means: &[f64]) -> Result<f64> {
    if p.len() != means.len() || p.is_empty() {
        return Err(Error::SizeMismatch {
            expected: means.len(),
            got: p.len(),
        });
    }
    let mut s = 0.0;
    for (pi, m) in p.iter().zip(means) {
        let d = family.quantile(*pi)? - m;
        s += d * d;
    }
    Ok((s / p.len() as f64).sqrt())
}

/// Descriptive error of `formula` against quadrature means; no simulation.
pub fn dse(family: Family, n: usize, formula: PositionFormula) -> Result<f64> {
    let means = exact_means(family, n)?;
    dse_with_means(family, formula, &means)
}

/// As [`dse`], reusing precomputed exact means.
pub fn dse_with_means(family: Family, formula: PositionFormula, means: &[f64]) -> Result<f64> {
    let (_, y, _) = paper_regressors(family, formula, means.len())?;
    let s: f64 = y.iter().zip(means).map(|(a, b)| (a - b) * (a - b)).sum();
    Ok((s / means.len() as f64).sqrt())
}

/// Relative descriptive error with observed-scale means `a + b E[Z_(i)]` in
/// the denominator. Unlike [`dse`] it changes with `a` and `b`.
pub fn rm_index(family: Family, n: usize, formula: PositionFormula, a: f64, b: f64) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("scale must be positive, got {b}")));
    }
    let means = exact_means(family, n)?;
    let p = positions(formula, n)?.p;
    let guard = 1e-9 * (a.abs() + b);
    let mut s = 0.0;
    for (i, (pi, m)) in p.iter().zip(&means).enumerate() {
        let ex = a + b * m;
        if ex.abs() <= guard {
            return Err(Error::ZeroMean(i + 1));
        }
        let r = (a + b * family.quantile(*pi)? - ex) / ex;
        s += r * r;
    }
    Ok((s / n as f64).sqrt())
}

/// Indices for one candidate in one (family, n) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateReport {
    pub candidate: String,
    pub iqse: f64,
    pub iqse_se: f64,
    pub ifse: f64,
    pub ifse_se: f64,
    /// Absent for the likelihood baseline.
    pub dse: Option<f64>,
    /// `(iqse + ifse + dse) / 3`; absent when `dse` is.
    pub avg: Option<f64>,
    pub qse: QseCoefficients,
    pub kept_replicates: usize,
    pub discarded_replicates: usize,
}

/// A candidate that could not be evaluated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateFailure {
    pub candidate: String,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub family: Family,
    pub n: usize,
    pub replicates: usize,
    pub seed: u64,
    pub method: FitMethod,
    pub cov_mode: CovMode,
    pub location: f64,
    pub scale: f64,
    pub grid: GridKind,
    pub results: Vec<CandidateReport>,
    pub failures: Vec<CandidateFailure>,
}

impl BenchmarkReport {
    pub fn get(&self, candidate: &str) -> Option<&CandidateReport> {
        self.results.iter().find(|r| r.candidate == candidate)
    }
}

/// All three indices for every configured candidate.
///
/// Failures of individual candidates are listed in the report; only an
/// invalid configuration or a failure of the exact means is an error.
pub fn run_suite(cfg: &ExperimentConfig) -> Result<BenchmarkReport> {
    cfg.validate()?;
    let means = exact_means(cfg.family, cfg.n)?;
    let terms = GridTerms::new(cfg.family, &cfg.grid);

    let mut failures = Vec::new();
    let mut active = Vec::new();
    let mut fitters = Vec::new();
    for c in cfg.candidates() {
        match build_fitter(cfg, c) {
            Ok(f) => {
                active.push(c);
                fitters.push(f);
            }
            Err(e) => failures.push(CandidateFailure {
                candidate: c.id(),
                message: e.to_string(),
            }),
        }
    }

    let accs = simulate(cfg, &fitters, &terms);
    let mut results = Vec::new();
    for (c, acc) in active.iter().zip(accs) {
        if acc.kept == 0 {
            failures.push(CandidateFailure {
                candidate: c.id(),
                message: Error::AllDiscarded(acc.discarded).to_string(),
            });
            continue;
        }
        let dse = match c {
            Candidate::Mle => None,
            Candidate::Positions(f) => match dse_with_means(cfg.family, *f, &means) {
                Ok(v) => Some(v),
                Err(e) => {
                    failures.push(CandidateFailure {
                        candidate: c.id(),
                        message: e.to_string(),
                    });
                    continue;
                }
            },
        };
        let m = acc.kept as f64;
        let (iqse, iqse_se) = mean_and_se(acc.s_iqse, acc.s_iqse2, acc.kept);
        let (ifse, ifse_se) = mean_and_se(acc.s_ifse, acc.s_ifse2, acc.kept);
        results.push(CandidateReport {
            candidate: c.id(),
            iqse,
            iqse_se,
            ifse,
            ifse_se,
            dse,
            avg: dse.map(|d| (iqse + ifse + d) / 3.0),
            qse: QseCoefficients {
                c0: acc.s_aa / m,
                c1: acc.s_ab / m,
                c2: acc.s_bb / m,
            },
            kept_replicates: acc.kept,
            discarded_replicates: acc.discarded,
        });
    }
    Ok(BenchmarkReport {
        family: cfg.family,
        n: cfg.n,
        replicates: cfg.replicates,
        seed: cfg.seed,
        method: cfg.method,
        cov_mode: cfg.cov_mode,
        location: cfg.location,
        scale: cfg.scale,
        grid: cfg.grid.kind,
        results,
        failures,
    })
}
