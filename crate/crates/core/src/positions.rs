//! Plotting-position catalogue.
//!
//! Classical rules have the form `p_i = (i - A) / (n + B)`; most of them
//! use `B = 1 - 2A`, which makes the set symmetric (`p_i = 1 - p_{n-i+1}`).
//! The Taylor rule evaluates the parent cdf at the expanded order-statistic
//! means instead.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::distributions::Family;
use crate::error::{Error, Result};
use crate::order_stats::{exact_mean, expansion_mean, CovMode, MAX_EXPANSION_ORDER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "id", rename_all = "kebab-case")]
pub enum PositionFormula {
    Hazen,
    Beard,
    Blom,
    Tukey,
    Gringorten,
    /// Yu–Huang constants tuned for the Normal parent (A = 0.399, B = 0.203).
    YuHuangNormal,
    /// Yu–Huang constants tuned for the Gumbel parent (A = 0.507, B = 0.176).
    YuHuangGumbel,
    De,
    Weibull,
    Cunnane,
    Adamowski,
    Kerman,
    /// Linear interpolation between the exact Beta medians of the extreme
    /// ranks, `1 - 2^(-1/n)` and `2^(-1/n)`.
    BetaMedian,
    /// `F(y_i)` with `y_i` the order-`order` Taylor expansion of `E[Z_(i)]`.
    TaylorEupp {
        family: Family,
        order: usize,
    },
}

impl PositionFormula {
    /// Every classical rule, in catalogue order.
    pub const CLASSICAL: [PositionFormula; 13] = [
        PositionFormula::Hazen,
        PositionFormula::Beard,
        PositionFormula::Blom,
        PositionFormula::Tukey,
        PositionFormula::Gringorten,
        PositionFormula::YuHuangNormal,
        PositionFormula::YuHuangGumbel,
        PositionFormula::De,
        PositionFormula::Weibull,
        PositionFormula::Cunnane,
        PositionFormula::Adamowski,
        PositionFormula::Kerman,
        PositionFormula::BetaMedian,
    ];

    /// Catalogue used by the benchmark for one family: the Taylor rule
    /// (order 4) first, then every classical rule.
    pub fn benchmark_set(family: Family) -> Vec<PositionFormula> {
        let mut v = vec![PositionFormula::TaylorEupp { family, order: 4 }];
        v.extend(Self::CLASSICAL);
        v
    }

    /// `(A, B)` for rules of the form `(i - A) / (n + B)`; `None` for the
    /// Taylor rule.
    pub fn constants(&self, n: usize) -> Option<(f64, f64)> {
        let blom = |a: f64| (a, 1.0 - 2.0 * a);
        Some(match self {
            PositionFormula::Hazen => blom(0.5),
            PositionFormula::Beard => blom(0.31),
            PositionFormula::Blom => blom(0.375),
            PositionFormula::Tukey | PositionFormula::Kerman => blom(1.0 / 3.0),
            PositionFormula::Gringorten => blom(0.44),
            PositionFormula::YuHuangNormal => (0.399, 0.203),
            PositionFormula::YuHuangGumbel => (0.507, 0.176),
            PositionFormula::De => (0.28, 0.28),
            PositionFormula::Weibull => blom(0.0),
            PositionFormula::Cunnane => blom(0.4),
            PositionFormula::Adamowski => blom(0.25),
            PositionFormula::BetaMedian => blom(beta_median_constant(n)),
            PositionFormula::TaylorEupp { .. } => return None,
        })
    }

    pub fn is_blom_form(&self) -> bool {
        !matches!(
            self,
            PositionFormula::YuHuangNormal
                | PositionFormula::YuHuangGumbel
                | PositionFormula::De
                | PositionFormula::TaylorEupp { .. }
        )
    }

    /// Short identifier used on the command line and in reports.
    pub fn id(&self) -> String {
        match self {
            PositionFormula::Hazen => "hazen".into(),
            PositionFormula::Beard => "beard".into(),
            PositionFormula::Blom => "blom".into(),
            PositionFormula::Tukey => "tukey".into(),
            PositionFormula::Gringorten => "gringorten".into(),
            PositionFormula::YuHuangNormal => "yu-huang-a".into(),
            PositionFormula::YuHuangGumbel => "yu-huang-b".into(),
            PositionFormula::De => "de".into(),
            PositionFormula::Weibull => "weibull".into(),
            PositionFormula::Cunnane => "cunnane".into(),
            PositionFormula::Adamowski => "adamowski".into(),
            PositionFormula::Kerman => "kerman".into(),
            PositionFormula::BetaMedian => "beta-median".into(),
            PositionFormula::TaylorEupp { family, order } => format!("taylor-{family}-k{order}"),
        }
    }

    /// Parses an identifier from [`id`](Self::id). `taylor` (without the
    /// suffix) takes its family and order from the arguments.
    pub fn parse(name: &str, family: Family, order: usize) -> Result<Self> {
        let lower = name.to_ascii_lowercase();
        if lower == "taylor" {
            if order > MAX_EXPANSION_ORDER {
                return Err(Error::UnsupportedOrder {
                    order,
                    max: MAX_EXPANSION_ORDER,
                });
            }
            return Ok(PositionFormula::TaylorEupp { family, order });
        }
        if let Some(rest) = lower.strip_prefix("taylor-") {
            let (fam, k) = rest
                .split_once("-k")
                .ok_or_else(|| Error::InvalidInput(format!("bad Taylor id '{name}'")))?;
            let order: usize = k
                .parse()
                .map_err(|_| Error::InvalidInput(format!("bad Taylor order in '{name}'")))?;
            return Self::parse("taylor", fam.parse()?, order);
        }
        Self::CLASSICAL
            .iter()
            .find(|f| f.id() == lower)
            .copied()
            .ok_or_else(|| Error::InvalidInput(format!("unknown plotting position '{name}'")))
    }
}

impl fmt::Display for PositionFormula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.id())
    }
}

/// Blom-form constant of the linear Beta-median rule for sample size `n`.
///
/// `A = n + (n - 1) / (2^(1/n) - 2)`; the denominator is negative, so
/// `A` stays near 0.3. For `n = 1` the rule gives the median 1/2.
pub fn beta_median_constant(n: usize) -> f64 {
    if n <= 1 {
        return 0.5;
    }
    let nf = n as f64;
    nf + (nf - 1.0) / (2f64.powf(1.0 / nf) - 2.0)
}

/// Plotting positions for ranks `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionSet {
    pub n: usize,
    pub p: Vec<f64>,
    pub formula: PositionFormula,
}

impl PositionSet {
    fn validated(formula: PositionFormula, p: Vec<f64>) -> Result<Self> {
        if let Some(bad) = p.iter().find(|v| !(**v > 0.0 && **v < 1.0)) {
            return Err(Error::InvalidConstant(format!(
                "{formula} produced probability {bad} outside (0, 1)"
            )));
        }
        if p.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidConstant(format!(
                "{formula} produced non-increasing positions"
            )));
        }
        Ok(Self { n: p.len(), p, formula })
    }
}

/// `(i - A) / (n + B)` for a classical rule.
pub fn classical_positions(formula: PositionFormula, n: usize) -> Result<PositionSet> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let (a, b) = formula
        .constants(n)
        .ok_or_else(|| Error::InvalidInput(format!("{formula} is not a constant-based rule")))?;
    let denom = n as f64 + b;
    let p = (1..=n).map(|i| (i as f64 - a) / denom).collect();
    PositionSet::validated(formula, p)
}

/// `F(y_i)` where `y_i` are the Taylor (or, with [`CovMode::Exact`],
/// quadrature) means of the reduced order statistics.
pub fn proposed_positions(family: Family, n: usize, k: usize, mode: CovMode) -> Result<PositionSet> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let y = (1..=n)
        .map(|i| match mode {
            CovMode::Exact => exact_mean(family, i, n),
            _ => expansion_mean(family, i, n, k),
        })
        .collect::<Result<Vec<_>>>()?;
    let p = y.into_iter().map(|v| family.cdf(v)).collect();
    PositionSet::validated(PositionFormula::TaylorEupp { family, order: k }, p)
}

/// Positions for any catalogue member; Taylor rules use expansion means.
pub fn positions(formula: PositionFormula, n: usize) -> Result<PositionSet> {
    match formula {
        PositionFormula::TaylorEupp { family, order } => proposed_positions(family, n, order, CovMode::Expansion),
        other => classical_positions(other, n),
    }
}

/// True iff `p_i = 1 - p_{n-i+1}` to within 1e-12 for every rank.
pub fn symmetry_check(set: &PositionSet) -> bool {
    let n = set.p.len();
    (0..n).all(|i| (set.p[i] - (1.0 - set.p[n - 1 - i])).abs() <= 1e-12)
}
