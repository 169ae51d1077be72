//! Moments of reduced order statistics.
//!
//! For a sample of size `n`, `U_(i) = F(X_(i))` is Beta(i, n - i + 1)
//! whatever the parent, so `Z_(i) = Q(U_(i))`. The truncated Taylor
//! expansion of `Q` around `E[U_(i)] = i / (n + 1)` gives closed-form
//! approximations of `E[Z_(i)]` and `Cov(Z_(i), Z_(j))`; adaptive quadrature
//! over the Beta law gives the exact values they are checked against.

use nalgebra::{Cholesky, DMatrix, Dyn};
use serde::{Deserialize, Serialize};

use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, integrate_with_breaks};

/// Highest Taylor order of the mean expansion.
pub const MAX_EXPANSION_ORDER: usize = 4;
/// Largest sample size accepted by [`exact_mean`].
pub const EXACT_MEAN_MAX_N: usize = 100;
/// Largest sample size accepted by [`exact_cov`].
pub const EXACT_COV_MAX_N: usize = 10;

/// Quadrature stays this far from 0 and 1, where `Q` diverges. The
/// neglected tail mass is below 1e-11 for every n <= 100.
const LOWER_CUT: f64 = 1e-200;
const UPPER_CUT: f64 = 1e-15;
const MEAN_TOL: f64 = 1e-11;
const COV_OUTER_TOL: f64 = 1e-9;
const COV_INNER_TOL: f64 = 1e-11;

/// Beta(i, n - i + 1) law of the i-th uniform order statistic.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BetaOrderLaw {
    pub rank: usize,
    pub n: usize,
}

impl BetaOrderLaw {
    pub fn new(rank: usize, n: usize) -> Result<Self> {
        check_rank(rank, n)?;
        Ok(Self { rank, n })
    }

    pub fn shape_a(&self) -> f64 {
        self.rank as f64
    }

    pub fn shape_b(&self) -> f64 {
        (self.n - self.rank + 1) as f64
    }

    /// `i / (n + 1)`, the Weibull plotting position.
    pub fn mean(&self) -> f64 {
        self.rank as f64 / (self.n as f64 + 1.0)
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        mu * (1.0 - mu) / (self.n as f64 + 2.0)
    }

    fn ln_norm(&self) -> f64 {
        let (a, b) = (self.shape_a(), self.shape_b());
        libm::lgamma(a + b) - libm::lgamma(a) - libm::lgamma(b)
    }

    pub fn pdf(&self, t: f64) -> f64 {
        if t <= 0.0 || t >= 1.0 {
            return 0.0;
        }
        let (a, b) = (self.shape_a(), self.shape_b());
        (self.ln_norm() + (a - 1.0) * t.ln() + (b - 1.0) * (-t).ln_1p()).exp()
    }
}

fn check_rank(rank: usize, n: usize) -> Result<()> {
    if n == 0 || rank == 0 || rank > n {
        Err(Error::InvalidInput(format!(
            "rank {rank} outside 1..={n} (sample size must be positive)"
        )))
    } else {
        Ok(())
    }
}

fn check_order(k: usize) -> Result<()> {
    if k > MAX_EXPANSION_ORDER {
        Err(Error::UnsupportedOrder {
            order: k,
            max: MAX_EXPANSION_ORDER,
        })
    } else {
        Ok(())
    }
}

/// Taylor approximation of `E[Z_(i)]` keeping terms up to order `k`.
///
/// `k = 0` is `Q(i / (n + 1))`. The first-order term vanishes, so `k = 1`
/// equals `k = 0`; `k = 4` is the full four-term expansion.
pub fn expansion_mean(family: Family, i: usize, n: usize, k: usize) -> Result<f64> {
    check_rank(i, n)?;
    check_order(k)?;
    let mu = i as f64 / (n as f64 + 1.0);
    let v = mu * (1.0 - mu);
    let n2 = n as f64 + 2.0;
    let d = family.quantile_derivatives(mu);
    let mut y = d[0];
    if k >= 2 {
        y += v / (2.0 * n2) * d[2];
    }
    if k >= 3 {
        y += v / (n2 * n2) * ((1.0 - 2.0 * mu) / 3.0 * d[3]);
    }
    if k >= 4 {
        y += v / (n2 * n2) * (v / 8.0 * d[4]);
    }
    Ok(y)
}

/// Second-order approximation of `Cov(Z_(i), Z_(j))`.
///
/// The expansion is only valid for `i <= j`; the ranks are ordered first so
/// the result is symmetric in its arguments.
pub fn expansion_cov(family: Family, i: usize, j: usize, n: usize) -> Result<f64> {
    check_rank(i, n)?;
    check_rank(j, n)?;
    let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
    Ok(expansion_cov_ordered(family, lo, hi, n))
}

/// The expansion evaluated literally with `i` as the lower rank, whatever
/// the actual order of the arguments.
pub(crate) fn expansion_cov_ordered(family: Family, i: usize, j: usize, n: usize) -> f64 {
    let np1 = n as f64 + 1.0;
    let n2 = n as f64 + 2.0;
    let mi = i as f64 / np1;
    let mj = j as f64 / np1;
    let di = family.quantile_derivatives(mi);
    let dj = family.quantile_derivatives(mj);
    let lead = mi * (1.0 - mj);
    let bracket = (1.0 - 2.0 * mi) * di[2] * dj[1]
        + (1.0 - 2.0 * mj) * dj[2] * di[1]
        + 0.5 * mi * (1.0 - mi) * di[3] * dj[1]
        + 0.5 * mj * (1.0 - mj) * dj[3] * di[1]
        + 0.5 * mi * (1.0 - mj) * di[2] * dj[2];
    lead / n2 * di[1] * dj[1] + lead / (n2 * n2) * bracket
}

/// `E[Z_(i)]` by adaptive quadrature of `Q(t) * beta(t; i, n - i + 1)`.
pub fn exact_mean(family: Family, i: usize, n: usize) -> Result<f64> {
    check_rank(i, n)?;
    if n > EXACT_MEAN_MAX_N {
        return Err(Error::InvalidInput(format!(
            "exact means limited to n <= {EXACT_MEAN_MAX_N} (got {n})"
        )));
    }
    let law = BetaOrderLaw { rank: i, n };
    let mu = law.mean();
    let sd = law.variance().sqrt();
    let breaks = beta_breaks(mu, sd);
    let mut f = |t: f64| family.quantile_unchecked(t) * law.pdf(t);
    integrate_with_breaks(&mut f, &breaks, MEAN_TOL)
}

/// Split points concentrating effort where the Beta weight lives.
fn beta_breaks(mu: f64, sd: f64) -> Vec<f64> {
    let mut b = vec![LOWER_CUT];
    for s in [-4.0, -2.0, 0.0, 2.0, 4.0] {
        let t = mu + s * sd;
        if t > LOWER_CUT && t < 1.0 - UPPER_CUT {
            b.push(t);
        }
    }
    b.push(1.0 - UPPER_CUT);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// `Cov(Z_(i), Z_(j))` by nested quadrature over the joint law of
/// `(U_(i), U_(j))`. Limited to `n <= 10`.
pub fn exact_cov(family: Family, i: usize, j: usize, n: usize) -> Result<f64> {
    check_rank(i, n)?;
    check_rank(j, n)?;
    if n > EXACT_COV_MAX_N {
        return Err(Error::CostGuard {
            n,
            max: EXACT_COV_MAX_N,
        });
    }
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    let mi = exact_mean(family, i, n)?;
    if i == j {
        let law = BetaOrderLaw { rank: i, n };
        let breaks = beta_breaks(law.mean(), law.variance().sqrt());
        let mut f = |t: f64| {
            let d = family.quantile_unchecked(t) - mi;
            d * d * law.pdf(t)
        };
        return integrate_with_breaks(&mut f, &breaks, COV_OUTER_TOL);
    }
    let mj = exact_mean(family, j, n)?;

    // Joint density n! / ((i-1)! (j-i-1)! (n-j)!) s^(i-1) (t-s)^(j-i-1) (1-t)^(n-j)
    // on 0 < s < t < 1; the inner variable is s = t w.
    let ln_c = libm::lgamma(n as f64 + 1.0)
        - libm::lgamma(i as f64)
        - libm::lgamma((j - i) as f64)
        - libm::lgamma((n - j + 1) as f64);
    let (ai, bi) = ((i - 1) as f64, (j - i - 1) as f64);
    let mut failure = None;
    let mut outer = |t: f64| {
        let inner = integrate(
            |w: f64| {
                let wt = if ai > 0.0 { w.powf(ai) } else { 1.0 };
                let bt = if bi > 0.0 { (1.0 - w).powf(bi) } else { 1.0 };
                (family.quantile_unchecked(t * w) - mi) * wt * bt
            },
            LOWER_CUT,
            1.0,
            COV_INNER_TOL,
        );
        match inner {
            Ok(v) => {
                let weight = (ln_c + (j - 1) as f64 * t.ln() + (n - j) as f64 * (-t).ln_1p()).exp();
                weight * (family.quantile_unchecked(t) - mj) * v
            }
            Err(e) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let law_j = BetaOrderLaw { rank: j, n };
    let breaks = beta_breaks(law_j.mean(), law_j.variance().sqrt());
    let value = integrate_with_breaks(&mut outer, &breaks, COV_OUTER_TOL)?;
    match failure {
        Some(e) => Err(e),
        None => Ok(value),
    }
}

/// How the covariance matrix (and, for `Exact`, the means) are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovMode {
    /// Second-order expansion for every entry.
    Expansion,
    /// Quadrature means and covariances (n <= 10).
    Exact,
    /// Expansion variances on the diagonal, zero elsewhere.
    Diagonal,
    /// `V = I`: the ordinary least-squares case.
    Identity,
}

impl std::str::FromStr for CovMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "expansion" => Ok(CovMode::Expansion),
            "exact" => Ok(CovMode::Exact),
            "diagonal" => Ok(CovMode::Diagonal),
            "identity" => Ok(CovMode::Identity),
            other => Err(Error::InvalidInput(format!("unknown covariance mode '{other}'"))),
        }
    }
}

impl std::fmt::Display for CovMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            CovMode::Expansion => "expansion",
            CovMode::Exact => "exact",
            CovMode::Diagonal => "diagonal",
            CovMode::Identity => "identity",
        })
    }
}

/// Regressors and error covariance for probability-paper regression.
#[derive(Debug, Clone)]
pub struct OrderStatMoments {
    pub family: Family,
    pub n: usize,
    pub order: usize,
    pub mode: CovMode,
    /// Approximate `E[Z_(i)]`, i = 1..n.
    pub means: Vec<f64>,
    /// Covariance after the positive-definiteness repair.
    pub covariance: DMatrix<f64>,
    /// Ridge added to the diagonal by the repair (0 when none was needed).
    pub ridge: f64,
}

impl OrderStatMoments {
    pub fn cholesky(&self) -> Result<Cholesky<f64, Dyn>> {
        Cholesky::new(self.covariance.clone()).ok_or(Error::SingularCovariance)
    }
}

pub fn build_moments(family: Family, n: usize, k: usize, mode: CovMode) -> Result<OrderStatMoments> {
    if n < 2 {
        return Err(Error::InvalidInput("moments need n >= 2".into()));
    }
    check_order(k)?;
    let means = match mode {
        CovMode::Exact => (1..=n).map(|i| exact_mean(family, i, n)).collect::<Result<Vec<_>>>()?,
        _ => (1..=n)
            .map(|i| expansion_mean(family, i, n, k))
            .collect::<Result<Vec<_>>>()?,
    };
    let covariance = match mode {
        CovMode::Identity => DMatrix::identity(n, n),
        CovMode::Diagonal => DMatrix::from_fn(n, n, |r, c| {
            if r == c {
                expansion_cov_ordered(family, r + 1, r + 1, n)
            } else {
                0.0
            }
        }),
        CovMode::Expansion => DMatrix::from_fn(n, n, |r, c| {
            expansion_cov_ordered(family, r.min(c) + 1, r.max(c) + 1, n)
        }),
        CovMode::Exact => {
            let mut v = DMatrix::zeros(n, n);
            for r in 0..n {
                for c in r..n {
                    let x = exact_cov(family, r + 1, c + 1, n)?;
                    v[(r, c)] = x;
                    v[(c, r)] = x;
                }
            }
            v
        }
    };
    let (covariance, ridge) = repair_positive_definite(covariance)?;
    Ok(OrderStatMoments {
        family,
        n,
        order: k,
        mode,
        means,
        covariance,
        ridge,
    })
}

/// Adds `delta * I`, starting at `1e-10 * trace / n` and doubling, until the
/// Cholesky factorisation succeeds.
pub fn repair_positive_definite(v: DMatrix<f64>) -> Result<(DMatrix<f64>, f64)> {
    if Cholesky::new(v.clone()).is_some() {
        return Ok((v, 0.0));
    }
    let n = v.nrows();
    let trace = v.trace();
    if !(trace > 0.0 && trace.is_finite()) {
        return Err(Error::SingularCovariance);
    }
    let mut delta = 1e-10 * trace / n as f64;
    for _ in 0..200 {
        let mut w = v.clone();
        for d in 0..n {
            w[(d, d)] += delta;
        }
        if Cholesky::new(w.clone()).is_some() {
            return Ok((w, delta));
        }
        delta *= 2.0;
    }
    Err(Error::SingularCovariance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::EULER_GAMMA;
    use rand::Rng;
    use std::f64::consts::PI;

    #[test]
    fn beta_law_moments() {
        let law = BetaOrderLaw::new(3, 9).unwrap();
        assert_eq!(law.mean(), 0.3);
        assert!((law.variance() - 0.3 * 0.7 / 11.0).abs() < 1e-16);
        assert_eq!((law.shape_a(), law.shape_b()), (3.0, 7.0));
        assert!(BetaOrderLaw::new(0, 3).is_err());
        assert!(BetaOrderLaw::new(4, 3).is_err());
    }

    // Order statistics of uniforms, sampled directly.
    #[test]
    fn beta_law_matches_simulation() {
        let (rank, n, draws) = (2usize, 5usize, 1_000_000usize);
        let law = BetaOrderLaw::new(rank, n).unwrap();
        let mut rng = crate::distributions::rng_from_seed(99, 0);
        let mut buf = vec![0.0; n];
        let mu = law.mean();
        let (mut s1, mut s2, mut s4) = (0.0, 0.0, 0.0);
        for _ in 0..draws {
            for u in buf.iter_mut() {
                *u = rng.random::<f64>();
            }
            buf.sort_by(f64::total_cmp);
            let d = buf[rank - 1] - mu;
            s1 += d;
            s2 += d * d;
            s4 += d * d * d * d;
        }
        let m = draws as f64;
        let se_mean = (law.variance() / m).sqrt();
        assert!((s1 / m).abs() < 4.0 * se_mean);
        let var = s2 / m;
        let se_var = ((s4 / m - var * var) / m).sqrt();
        assert!((var - law.variance()).abs() < 4.0 * se_var);
    }

    #[test]
    fn expansion_mean_examples() {
        for k in 0..=4 {
            assert!(expansion_mean(Family::Normal, 4, 7, k).unwrap().abs() < 1e-15);
        }
        let v = expansion_mean(Family::Gumbel, 1, 1, 0).unwrap();
        assert!((v - 0.366_512_920_581_664_3).abs() < 1e-12);
        assert!(matches!(
            expansion_mean(Family::Gumbel, 1, 5, 5),
            Err(Error::UnsupportedOrder { .. })
        ));
        assert!(expansion_mean(Family::Gumbel, 6, 5, 2).is_err());
    }

    #[test]
    fn order_one_equals_order_zero() {
        for i in 1..=7 {
            assert_eq!(
                expansion_mean(Family::Gumbel, i, 7, 0).unwrap(),
                expansion_mean(Family::Gumbel, i, 7, 1).unwrap()
            );
        }
    }

    #[test]
    fn expansion_cov_examples() {
        // leading term for i = j = n = 1 on the Gumbel family
        let q1 = -1.0 / (0.5 * 0.5f64.ln());
        assert!((q1 - 2.885_390_081_777_927).abs() < 1e-12);
        let lead = 0.25 / 3.0 * q1 * q1;
        assert!((lead - 0.693_8).abs() < 1e-3);
        let full = expansion_cov(Family::Gumbel, 1, 1, 1).unwrap();
        let d = Family::Gumbel.quantile_derivatives(0.5);
        let second = 0.25 / 9.0 * (0.5 * 0.25 * d[3] * d[1] * 2.0 + 0.5 * 0.25 * d[2] * d[2]);
        assert!((full - (lead + second)).abs() < 1e-12);

        // Normal middle rank: only the leading term and the Q''' terms survive
        let n = 5;
        let v = expansion_cov(Family::Normal, 3, 3, n).unwrap();
        let lead = 0.25 / 7.0 * 2.0 * PI;
        let q3 = Family::Normal.quantile_derivatives(0.5)[3];
        let expected = lead + 0.25 / 49.0 * (0.25 * q3 * (2.0 * PI).sqrt());
        assert!((v - expected).abs() < 1e-12);

        for (i, j) in [(1, 4), (2, 5), (3, 4)] {
            assert_eq!(
                expansion_cov(Family::Gumbel, i, j, 6).unwrap(),
                expansion_cov(Family::Gumbel, j, i, 6).unwrap()
            );
        }
    }

    #[test]
    fn uniform_expansion_is_exact() {
        let n = 6;
        for i in 1..=n {
            for j in i..=n {
                let mi = i as f64 / 7.0;
                let mj = j as f64 / 7.0;
                let v = expansion_cov(Family::Uniform, i, j, n).unwrap();
                assert!((v - mi * (1.0 - mj) / 8.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn exact_mean_oracles() {
        let g = exact_mean(Family::Gumbel, 1, 1).unwrap();
        assert!((g - EULER_GAMMA).abs() < 1e-9, "{g}");
        let m = exact_mean(Family::Normal, 1, 2).unwrap();
        assert!((m + 1.0 / PI.sqrt()).abs() < 1e-9, "{m}");
        assert!(exact_mean(Family::Normal, 2, 3).unwrap().abs() < 1e-9);
        let u = exact_mean(Family::Uniform, 3, 8).unwrap();
        assert!((u - 3.0 / 9.0).abs() < 1e-10);
        assert!(exact_mean(Family::Normal, 1, 101).is_err());
    }

    #[test]
    fn exact_mean_gumbel_largest_order_statistic() {
        // max of n reduced Gumbels is Gumbel shifted by ln n
        for n in [2usize, 5, 30, 100] {
            let m = exact_mean(Family::Gumbel, n, n).unwrap();
            assert!((m - (EULER_GAMMA + (n as f64).ln())).abs() < 1e-9, "n={n} {m}");
        }
    }

    #[test]
    fn exact_cov_oracles() {
        let u = exact_cov(Family::Uniform, 1, 1, 1).unwrap();
        assert!((u - 1.0 / 12.0).abs() < 1e-7);
        let g = exact_cov(Family::Gumbel, 1, 1, 1).unwrap();
        assert!((g - PI * PI / 6.0).abs() < 1e-7, "{g}");
        for (i, j) in [(1, 2), (2, 4), (1, 5), (4, 5)] {
            let v = exact_cov(Family::Uniform, i, j, 5).unwrap();
            let (mi, mj) = (i as f64 / 6.0, j as f64 / 6.0);
            assert!((v - mi * (1.0 - mj) / 7.0).abs() < 1e-7, "({i},{j}) {v}");
            assert_eq!(v, exact_cov(Family::Uniform, j, i, 5).unwrap());
        }
        for i in 1..=4 {
            assert!(exact_cov(Family::Gumbel, i, i, 4).unwrap() >= 0.0);
        }
        assert!(matches!(
            exact_cov(Family::Normal, 1, 2, 11),
            Err(Error::CostGuard { n: 11, .. })
        ));
    }

    #[test]
    fn exact_cov_gumbel_largest_variance() {
        let v = exact_cov(Family::Gumbel, 4, 4, 4).unwrap();
        assert!((v - PI * PI / 6.0).abs() < 1e-7, "{v}");
    }

    #[test]
    fn ordered_expansion_beats_averaging() {
        // Evaluating the expansion with its ranks ordered tracks the quadrature
        // covariance more closely than averaging the (i, j) and (j, i) forms.
        let n = 10;
        for fam in [Family::Normal, Family::Gumbel] {
            let (mut ordered, mut averaged) = (0.0, 0.0);
            for i in 1..=n {
                for j in i + 1..=n {
                    let exact = exact_cov(fam, i, j, n).unwrap();
                    let a = expansion_cov_ordered(fam, i, j, n);
                    let b = expansion_cov_ordered(fam, j, i, n);
                    ordered += (a - exact).abs();
                    averaged += (0.5 * (a + b) - exact).abs();
                }
            }
            assert!(ordered < averaged, "{fam}: {ordered} vs {averaged}");
        }
    }

    #[test]
    fn expansion_close_to_exact_covariance() {
        let n = 10;
        for fam in [Family::Normal, Family::Gumbel] {
            for i in 1..=n {
                for j in i..=n {
                    let approx = expansion_cov(fam, i, j, n).unwrap();
                    let exact = exact_cov(fam, i, j, n).unwrap();
                    let scale = exact_cov(fam, j, j, n).unwrap();
                    assert!(
                        (approx - exact).abs() < 0.15 * scale,
                        "{fam} ({i},{j}) approx={approx} exact={exact}"
                    );
                }
            }
        }
    }

    #[test]
    fn truncation_error_shrinks_with_order() {
        for fam in [Family::Gumbel, Family::Normal] {
            for n in 2..=10 {
                let exact: Vec<f64> = (1..=n).map(|i| exact_mean(fam, i, n).unwrap()).collect();
                let err = |k| {
                    (1..=n)
                        .map(|i| (expansion_mean(fam, i, n, k).unwrap() - exact[i - 1]).abs())
                        .fold(0.0, f64::max)
                };
                let (e0, e2, e4) = (err(0), err(2), err(4));
                assert!(e2 <= e0 && e4 <= e2, "{fam} n={n}: {e0} {e2} {e4}");
            }
        }
    }

    #[test]
    fn gumbel_order_four_close_to_exact() {
        // worst rank is the largest, off by 0.0237
        for i in 1..=5 {
            let a = expansion_mean(Family::Gumbel, i, 5, 4).unwrap();
            let e = exact_mean(Family::Gumbel, i, 5).unwrap();
            assert!((a - e).abs() <= 0.025, "i={i}: {a} vs {e}");
        }
    }

    #[test]
    fn build_moments_modes() {
        let m = build_moments(Family::Gumbel, 5, 4, CovMode::Identity).unwrap();
        assert_eq!(m.covariance, DMatrix::identity(5, 5));
        assert_eq!(m.ridge, 0.0);

        for mode in [CovMode::Expansion, CovMode::Exact, CovMode::Diagonal, CovMode::Identity] {
            let m = build_moments(Family::Normal, 5, 4, mode).unwrap();
            for i in 0..5 {
                assert!((m.means[i] + m.means[4 - i]).abs() < 1e-12, "{mode}");
            }
            assert!(m.means.windows(2).all(|w| w[0] < w[1]));
        }

        let e = build_moments(Family::Gumbel, 5, 4, CovMode::Expansion).unwrap();
        let x = build_moments(Family::Gumbel, 5, 4, CovMode::Exact).unwrap();
        for (a, b) in e.means.iter().zip(&x.means) {
            assert!((a - b).abs() <= 0.025);
        }
        assert!(build_moments(Family::Gumbel, 1, 4, CovMode::Identity).is_err());
        assert!(matches!(
            build_moments(Family::Gumbel, 11, 4, CovMode::Exact),
            Err(Error::CostGuard { .. })
        ));
    }

    #[test]
    fn expansion_covariance_positive_definite() {
        for fam in [Family::Gumbel, Family::Normal] {
            for n in [5, 10, 30] {
                let m = build_moments(fam, n, 4, CovMode::Expansion).unwrap();
                assert!(m.cholesky().is_ok(), "{fam} n={n}");
                let v = &m.covariance;
                assert_eq!(v, &v.transpose());
            }
        }
    }

    #[test]
    fn repair_adds_ridge_to_indefinite_matrix() {
        let v = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        let (w, delta) = repair_positive_definite(v).unwrap();
        assert!(delta > 0.0);
        assert!(Cholesky::new(w).is_some());
        assert!(repair_positive_definite(DMatrix::from_element(2, 2, -1.0)).is_err());
    }
}
