//! Globally adaptive 15-point Gauss–Kronrod integration.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd Kronrod nodes (1, 3, 5) and the centre.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

const MAX_INTERVALS: usize = 4000;

#[derive(Debug, Clone, Copy)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

fn kronrod<F: FnMut(f64) -> f64>(f: &mut F, lo: f64, hi: f64) -> Segment {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (k, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(centre - dx) + f(centre + dx);
        kron += w * pair;
        if k % 2 == 1 {
            gauss += WG[k / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kron * half,
        error: ((kron - gauss) * half).abs(),
    }
}

/// Integrates `f` over `[lo, hi]` to absolute tolerance `tol`.
///
/// Splits the worst segment until the summed error estimate is below `tol`.
/// The integrand is never evaluated at the end points.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    integrate_with_breaks(&mut f, &[lo, hi], tol)
}

/// As [`integrate`], with the interval pre-split at the sorted `breaks`.
pub fn integrate_with_breaks<F: FnMut(f64) -> f64>(f: &mut F, breaks: &[f64], tol: f64) -> Result<f64> {
    let mut segments: Vec<Segment> = breaks
        .windows(2)
        .filter(|w| w[1] > w[0])
        .map(|w| kronrod(f, w[0], w[1]))
        .collect();
    if segments.is_empty() {
        return Ok(0.0);
    }
    loop {
        let total_err: f64 = segments.iter().map(|s| s.error).sum();
        if !total_err.is_finite() {
            return Err(Error::Quadrature {
                tolerance: tol,
                estimate: total_err,
            });
        }
        if total_err <= tol {
            return Ok(segments.iter().map(|s| s.value).sum());
        }
        if segments.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature {
                tolerance: tol,
                estimate: total_err,
            });
        }
        let (worst, _) = segments
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.error.total_cmp(&b.1.error))
            .expect("non-empty");
        let s = segments.swap_remove(worst);
        let mid = 0.5 * (s.lo + s.hi);
        if mid <= s.lo || mid >= s.hi {
            return Err(Error::Quadrature {
                tolerance: tol,
                estimate: total_err,
            });
        }
        segments.push(kronrod(f, s.lo, mid));
        segments.push(kronrod(f, mid, s.hi));
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        let v = integrate(|x| x.powi(5) - 2.0 * x + 1.0, -1.0, 2.0, 1e-12).unwrap();
        assert!((v - (64.0 / 6.0 - 1.0 / 6.0 - 3.0 + 3.0)).abs() < 1e-12);
    }

    #[test]
    fn log_singularity() {
        // integral of ln(x) over (0, 1) is -1
        let v = integrate(|x| x.ln(), 0.0, 1.0, 1e-10).unwrap();
        assert!((v + 1.0).abs() < 1e-9);
    }

    #[test]
    fn reports_failure() {
        let r = integrate(|x| 1.0 / x, 0.0, 1.0, 1e-12);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }

    #[test]
    fn constant_over_breaks() {
        let v = integrate_with_breaks(&mut |_| 2.0, &[0.0, 0.3, 0.3, 1.0], 1e-12).unwrap();
        assert!((v - 2.0).abs() < 1e-14);
    }
}
