//! Location-scale parent distributions and their reduced forms.
//!
//! Every parent is described by a reduced [`Family`] (location 0, scale 1)
//! plus a location `a` and scale `b`. The three-parameter log-normal is the
//! Normal family applied to `ln(x - c)`, so all order-statistic machinery
//! only ever sees the reduced families.

use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::str::FromStr;

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `sqrt(2 * pi)`.
pub const SQRT_2PI: f64 = 2.506_628_274_631_000_5;

/// Euler–Mascheroni constant, the mean of the reduced Gumbel variate.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Highest quantile derivative available in closed form.
pub const MAX_DERIVATIVE_ORDER: usize = 4;

/// Reduced (a = 0, b = 1) family.
///
/// `Uniform` is not a probability-paper parent; it has the identity quantile
/// function and serves as an analytic reference for order-statistic moments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    Gumbel,
    Normal,
    Uniform,
}

impl Family {
    pub fn cdf(self, z: f64) -> f64 {
        match self {
            Family::Gumbel => (-(-z).exp()).exp(),
            Family::Normal => normal_cdf(z),
            Family::Uniform => z.clamp(0.0, 1.0),
        }
    }

    pub fn pdf(self, z: f64) -> f64 {
        match self {
            Family::Gumbel => (-z - (-z).exp()).exp(),
            Family::Normal => (-0.5 * z * z).exp() / SQRT_2PI,
            Family::Uniform => {
                if (0.0..=1.0).contains(&z) {
                    1.0
                } else {
                    0.0
                }
            }
        }
    }

    /// Reduced quantile function `Q(p)`.
    pub fn quantile(self, p: f64) -> Result<f64> {
        check_probability(p)?;
        Ok(self.quantile_unchecked(p))
    }

    pub(crate) fn quantile_unchecked(self, p: f64) -> f64 {
        match self {
            Family::Gumbel => -(-p.ln()).ln(),
            Family::Normal => normal_quantile(p),
            Family::Uniform => p,
        }
    }

    /// `d^order Q / dp^order` in closed form, `order` in `1..=4`.
    pub fn quantile_derivative(self, p: f64, order: usize) -> Result<f64> {
        check_probability(p)?;
        if order == 0 || order > MAX_DERIVATIVE_ORDER {
            return Err(Error::UnsupportedOrder {
                order,
                max: MAX_DERIVATIVE_ORDER,
            });
        }
        Ok(self.quantile_derivatives(p)[order])
    }

    /// `[Q, Q', Q'', Q''', Q'''']` at `p`; `p` must already be in (0, 1).
    pub(crate) fn quantile_derivatives(self, p: f64) -> [f64; 5] {
        match self {
            Family::Gumbel => {
                // Q = -ln(-ln p); with L = ln p and g = p L, g' = L + 1, g'' = 1/p.
                let l = p.ln();
                let g = p * l;
                let l1 = l + 1.0;
                let q = -(-l).ln();
                let d1 = -1.0 / g;
                let d2 = l1 / (g * g);
                let d3 = 1.0 / (g * g * p) - 2.0 * l1 * l1 / (g * g * g);
                let d4 = -6.0 * l1 / (g * g * g * p) - 1.0 / (g * g * p * p) + 6.0 * l1 * l1 * l1 / (g * g * g * g);
                [q, d1, d2, d3, d4]
            }
            Family::Normal => {
                let q = normal_quantile(p);
                let d1 = SQRT_2PI * (0.5 * q * q).exp();
                let d1_2 = d1 * d1;
                let d2 = q * d1_2;
                let d3 = d1_2 * d1 * (1.0 + 2.0 * q * q);
                let d4 = d1_2 * d1_2 * q * (7.0 + 6.0 * q * q);
                [q, d1, d2, d3, d4]
            }
            Family::Uniform => [p, 1.0, 0.0, 0.0, 0.0],
        }
    }

    /// Mean and second raw moment of the reduced variate.
    pub fn raw_moments(self) -> (f64, f64) {
        match self {
            Family::Gumbel => (EULER_GAMMA, PI * PI / 6.0 + EULER_GAMMA * EULER_GAMMA),
            Family::Normal => (0.0, 1.0),
            Family::Uniform => (0.5, 1.0 / 3.0),
        }
    }

    pub fn is_symmetric(self) -> bool {
        matches!(self, Family::Normal | Family::Uniform)
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Gumbel => "gumbel",
            Family::Normal => "normal",
            Family::Uniform => "uniform",
        })
    }
}

impl FromStr for Family {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "gumbel" => Ok(Family::Gumbel),
            "normal" => Ok(Family::Normal),
            "uniform" => Ok(Family::Uniform),
            other => Err(Error::InvalidInput(format!("unknown family '{other}'"))),
        }
    }
}

/// Shape of a parent distribution on the observed scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum Parent {
    Gumbel,
    Normal,
    /// Log-normal with a fixed lower threshold `c`; support `x > c`.
    LogNormal3 {
        threshold: f64,
    },
}

impl Parent {
    /// Reduced family governing the (possibly log-transformed) variate.
    pub fn reduced(self) -> Family {
        match self {
            Parent::Gumbel => Family::Gumbel,
            Parent::Normal | Parent::LogNormal3 { .. } => Family::Normal,
        }
    }
}

/// A fully parameterised parent distribution.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistributionSpec {
    pub parent: Parent,
    pub location: f64,
    pub scale: f64,
}

impl DistributionSpec {
    pub fn new(parent: Parent, location: f64, scale: f64) -> Result<Self> {
        if !(scale > 0.0 && scale.is_finite()) {
            return Err(Error::Domain(format!("scale must be positive, got {scale}")));
        }
        if !location.is_finite() {
            return Err(Error::Domain(format!("location must be finite, got {location}")));
        }
        if let Parent::LogNormal3 { threshold } = parent {
            if !threshold.is_finite() {
                return Err(Error::Domain("threshold must be finite".into()));
            }
        }
        Ok(Self {
            parent,
            location,
            scale,
        })
    }

    pub fn gumbel(location: f64, scale: f64) -> Result<Self> {
        Self::new(Parent::Gumbel, location, scale)
    }

    pub fn normal(location: f64, scale: f64) -> Result<Self> {
        Self::new(Parent::Normal, location, scale)
    }

    pub fn lognormal3(location: f64, scale: f64, threshold: f64) -> Result<Self> {
        Self::new(Parent::LogNormal3 { threshold }, location, scale)
    }

    /// Reduced family member with the same shape (a = 0, b = 1).
    pub fn reduced(&self) -> Family {
        self.parent.reduced()
    }

    /// Maps an observation to the reduced variate; `None` outside the support.
    pub fn standardize(&self, x: f64) -> Option<f64> {
        let t = match self.parent {
            Parent::LogNormal3 { threshold } => {
                if x <= threshold {
                    return None;
                }
                (x - threshold).ln()
            }
            _ => x,
        };
        Some((t - self.location) / self.scale)
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self.standardize(x) {
            Some(z) => self.reduced().cdf(z),
            None => 0.0,
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self.parent {
            Parent::LogNormal3 { threshold } => match self.standardize(x) {
                Some(z) => Family::Normal.pdf(z) / (self.scale * (x - threshold)),
                None => 0.0,
            },
            _ => {
                let z = (x - self.location) / self.scale;
                self.reduced().pdf(z) / self.scale
            }
        }
    }

    pub fn quantile(&self, p: f64) -> Result<f64> {
        let z = self.reduced().quantile(p)?;
        Ok(self.from_reduced(z))
    }

    /// Inverse of [`standardize`](Self::standardize).
    pub fn from_reduced(&self, z: f64) -> f64 {
        let t = self.location + self.scale * z;
        match self.parent {
            Parent::LogNormal3 { threshold } => threshold + t.exp(),
            _ => t,
        }
    }

    /// Inverse-CDF sample of size `n` from the stream of [`rng_from_seed`].
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(Error::InvalidInput("sample size must be at least 1".into()));
        }
        let mut rng = rng_from_seed(seed, 0);
        Ok((0..n)
            .map(|_| self.from_reduced(self.reduced().quantile_unchecked(uniform_open01(&mut rng))))
            .collect())
    }
}

/// ChaCha8 generator for `(seed, stream)`.
///
/// Benchmark replicate `r` uses stream `r`, so every replicate can be
/// regenerated independently of how work is split across threads.
pub fn rng_from_seed(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw from the open interval (0, 1).
pub fn uniform_open01<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

fn check_probability(p: f64) -> Result<()> {
    if p > 0.0 && p < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("probability must lie in (0, 1), got {p}")))
    }
}

pub fn normal_cdf(z: f64) -> f64 {
    if z < 0.0 {
        0.5 * libm::erfc(-z / SQRT_2)
    } else {
        1.0 - 0.5 * libm::erfc(z / SQRT_2)
    }
}

/// Lower-tail Normal quantile.
///
/// Acklam's rational approximation (relative error ~1.2e-9) followed by one
/// Halley step on `erfc`. The upper half is mapped onto the lower tail so the
/// correction is always computed where `erfc` keeps full relative precision.
pub fn normal_quantile(p: f64) -> f64 {
    if p > 0.5 {
        return -normal_quantile(1.0 - p);
    }
    if p == 0.5 {
        return 0.0;
    }
    let x = acklam(p);
    let e = 0.5 * libm::erfc(-x / SQRT_2) - p;
    let u = e * SQRT_2PI * (0.5 * x * x).exp();
    x - u / (1.0 + 0.5 * x * u)
}

fn acklam(p: f64) -> f64 {
    const A: [f64; 6] = [
        -3.969_683_028_665_376e1,
        2.209_460_984_245_205e2,
        -2.759_285_104_469_687e2,
        1.383_577_518_672_69e2,
        -3.066_479_806_614_716e1,
        2.506_628_277_459_239,
    ];
    const B: [f64; 5] = [
        -5.447_609_879_822_406e1,
        1.615_858_368_580_409e2,
        -1.556_989_798_598_866e2,
        6.680_131_188_771_972e1,
        -1.328_068_155_288_572e1,
    ];
    const C: [f64; 6] = [
        -7.784_894_002_430_293e-3,
        -3.223_964_580_411_365e-1,
        -2.400_758_277_161_838,
        -2.549_732_539_343_734,
        4.374_664_141_464_968,
        2.938_163_982_698_783,
    ];
    const D: [f64; 4] = [
        7.784_695_709_041_462e-3,
        3.224_671_290_700_398e-1,
        2.445_134_137_142_996,
        3.754_408_661_907_416,
    ];
    const P_LOW: f64 = 0.024_25;

    if p < P_LOW {
        let q = (-2.0 * p.ln()).sqrt();
        (((((C[0] * q + C[1]) * q + C[2]) * q + C[3]) * q + C[4]) * q + C[5])
            / ((((D[0] * q + D[1]) * q + D[2]) * q + D[3]) * q + 1.0)
    } else {
        let q = p - 0.5;
        let r = q * q;
        (((((A[0] * r + A[1]) * r + A[2]) * r + A[3]) * r + A[4]) * r + A[5]) * q
            / (((((B[0] * r + B[1]) * r + B[2]) * r + B[3]) * r + B[4]) * r + 1.0)
    }
}
