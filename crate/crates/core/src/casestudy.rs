//! Campi Flegrei 1983–84 magnitude catalogue and its log-normal analysis.
//!
//! Magnitudes are grouped into thirteen lunar months, shifted by the
//! threshold `c`, log-transformed and fitted on normal probability paper.
//! Each month gets the probability of exceeding a critical magnitude and
//! two normality tests: one with parameters from the month itself and one
//! with parameters from the pooled earlier months.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::distributions::{Family, Parent};
use crate::error::{Error, Result};
use crate::estimation::{exceedance_probability, fit_probability_paper, FitMethod};
use crate::gof::{mad_case3, mad_known_params, mean_sd, MadResult};
use crate::order_stats::CovMode;
use crate::plot::PlotSpec;
use crate::positions::PositionFormula;

const DATASET: &str = include_str!("../data/bradyseism.csv");
const DATASET_SHA256: &str = "c4c221406b4e1add7cd1a54617226b05653c0bfc7cfc1a1f2dd9674212d4f9e0";

/// Lunar months of the crisis, July 1983 to July 1984.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum LunarMonth {
    I,
    II,
    III,
    IV,
    V,
    VI,
    VII,
    VIII,
    IX,
    X,
    XI,
    XII,
    XIII,
}

impl LunarMonth {
    pub const ALL: [LunarMonth; 13] = [
        LunarMonth::I,
        LunarMonth::II,
        LunarMonth::III,
        LunarMonth::IV,
        LunarMonth::V,
        LunarMonth::VI,
        LunarMonth::VII,
        LunarMonth::VIII,
        LunarMonth::IX,
        LunarMonth::X,
        LunarMonth::XI,
        LunarMonth::XII,
        LunarMonth::XIII,
    ];

    const LABELS: [&'static str; 13] = [
        "I", "II", "III", "IV", "V", "VI", "VII", "VIII", "IX", "X", "XI", "XII", "XIII",
    ];

    /// 0-based position in the sequence.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn label(self) -> &'static str {
        Self::LABELS[self.index()]
    }

    /// Calendar heading the catalogue lists this month under.
    pub fn calendar_heading(self) -> &'static str {
        [
            "July 1983",
            "August 1983",
            "September 1983",
            "October 1983",
            "November 1983",
            "December 1983",
            "January 1984",
            "February 1984",
            "March 1984",
            "April 1984",
            "May 1984",
            "June 1984",
            "July 1984",
        ][self.index()]
    }
}

impl fmt::Display for LunarMonth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for LunarMonth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let upper = s.trim().to_ascii_uppercase();
        Self::LABELS
            .iter()
            .position(|l| *l == upper)
            .map(|i| Self::ALL[i])
            .ok_or_else(|| Error::InvalidInput(format!("unknown lunar month '{s}' (use I..XIII)")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MagnitudeRecord {
    pub month: LunarMonth,
    /// Magnitudes in catalogue order (resolution 0.1, all at least 1.0).
    pub magnitudes: Vec<f64>,
}

/// Parses the embedded catalogue after checking its digest.
pub fn load_dataset() -> Result<Vec<MagnitudeRecord>> {
    parse_dataset(DATASET, DATASET_SHA256)
}

fn parse_dataset(text: &str, digest: &str) -> Result<Vec<MagnitudeRecord>> {
    let actual = Sha256::digest(text.as_bytes());
    let hex: String = actual.iter().map(|b| format!("{b:02x}")).collect();
    if hex != digest {
        return Err(Error::DatasetCorrupt);
    }
    let mut records: Vec<MagnitudeRecord> = LunarMonth::ALL
        .iter()
        .map(|m| MagnitudeRecord {
            month: *m,
            magnitudes: Vec::new(),
        })
        .collect();
    for line in text.lines().skip(1).filter(|l| !l.trim().is_empty()) {
        let (month, value) = line.split_once(',').ok_or(Error::DatasetCorrupt)?;
        let month: LunarMonth = month.parse().map_err(|_| Error::DatasetCorrupt)?;
        let value: f64 = value.trim().parse().map_err(|_| Error::DatasetCorrupt)?;
        records[month.index()].magnitudes.push(value);
    }
    Ok(records)
}

/// Analysis settings; the defaults are the Taylor rule (normal, order 4),
/// OLS, threshold 1 and critical magnitude 5.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyConfig {
    pub threshold: f64,
    pub formula: PositionFormula,
    pub method: FitMethod,
    pub cov_mode: CovMode,
    pub critical_magnitude: f64,
    /// Drop magnitudes at or below the threshold instead of failing; they
    /// have no logarithm after the shift.
    pub exclude_at_threshold: bool,
}

impl Default for CaseStudyConfig {
    fn default() -> Self {
        Self {
            threshold: 1.0,
            formula: PositionFormula::TaylorEupp {
                family: Family::Normal,
                order: 4,
            },
            method: FitMethod::Ols,
            cov_mode: CovMode::Expansion,
            critical_magnitude: 5.0,
            exclude_at_threshold: true,
        }
    }
}

/// `ln(x - c)` for every `x > c`, with the count of dropped values.
///
/// With `exclude` false any `x <= c` is an error.
pub fn log_shift(x: &[f64], threshold: f64, exclude: bool) -> Result<(Vec<f64>, usize)> {
    let mut out = Vec::with_capacity(x.len());
    let mut dropped = 0;
    for v in x {
        if *v > threshold {
            out.push((v - threshold).ln());
        } else if exclude {
            dropped += 1;
        } else {
            return Err(Error::ThresholdViolation { value: *v, threshold });
        }
    }
    Ok((out, dropped))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthReport {
    pub month: LunarMonth,
    pub records: usize,
    /// Magnitudes at or below the threshold left out of the analysis.
    pub excluded: usize,
    pub used: usize,
    /// Location of `ln(x - c)`.
    pub location: f64,
    /// Scale of `ln(x - c)`.
    pub scale: f64,
    pub method: FitMethod,
    /// `P(magnitude > critical)` under the fitted log-normal.
    pub exceedance: f64,
    pub mad_self: MadResult,
    /// Parameters from the pooled earlier months (the month's own for I).
    pub mad_cumulative: Option<MadResult>,
    pub plot: PlotSpec,
}

/// Fits one month. `previous` holds the pooled log-data of earlier months
/// for the cumulative test; pass `None` to skip that test.
pub fn analyze_month(rec: &MagnitudeRecord, cfg: &CaseStudyConfig, previous: Option<&[f64]>) -> Result<MonthReport> {
    let (logs, excluded) = log_shift(&rec.magnitudes, cfg.threshold, cfg.exclude_at_threshold)?;
    if logs.len() < 5 {
        return Err(Error::InvalidInput(format!(
            "month {} keeps only {} values above the threshold",
            rec.month,
            logs.len()
        )));
    }
    let parent = Parent::LogNormal3 {
        threshold: cfg.threshold,
    };
    let paper = fit_probability_paper(&logs, Family::Normal, cfg.formula, cfg.method, cfg.cov_mode)?;
    let exceedance = exceedance_probability(&paper.fit, parent, cfg.critical_magnitude)?;
    let mad_self = mad_case3(&logs)?;
    let mad_cumulative = match previous {
        None => None,
        Some([]) => Some(mad_self.clone()),
        Some(prev) => {
            let (m, s) = mean_sd(prev)?;
            Some(mad_known_params(&logs, m, s)?)
        }
    };
    let points = paper
        .regressors
        .iter()
        .copied()
        .zip(paper.sorted.iter().copied())
        .collect();
    let plot = PlotSpec::new(
        format!("Month {} ({})", rec.month, rec.month.calendar_heading()),
        Family::Normal,
        points,
        Some((paper.fit.location, paper.fit.scale)),
        format!("ln(magnitude - {})", cfg.threshold),
    )?;
    Ok(MonthReport {
        month: rec.month,
        records: rec.magnitudes.len(),
        excluded,
        used: logs.len(),
        location: paper.fit.location,
        scale: paper.fit.scale,
        method: cfg.method,
        exceedance,
        mad_self,
        mad_cumulative,
        plot,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MonthFailure {
    pub month: LunarMonth,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseStudyReport {
    pub config: CaseStudyConfig,
    pub months: Vec<MonthReport>,
    pub failures: Vec<MonthFailure>,
}

impl CaseStudyReport {
    pub fn exceedance_series(&self) -> Vec<(LunarMonth, f64)> {
        self.months.iter().map(|m| (m.month, m.exceedance)).collect()
    }

    pub fn max_exceedance(&self) -> Option<f64> {
        self.months.iter().map(|m| m.exceedance).reduce(f64::max)
    }

    pub fn max_mad_cumulative(&self) -> Option<f64> {
        self.months
            .iter()
            .filter_map(|m| m.mad_cumulative.as_ref().map(|r| r.a2_modified))
            .reduce(f64::max)
    }
}

/// Analyses the selected months (all when `months` is empty). The pooled
/// sample for the cumulative test always includes every earlier month, even
/// those not selected.
pub fn run_case_study(cfg: &CaseStudyConfig, months: &[LunarMonth]) -> Result<CaseStudyReport> {
    let data = load_dataset()?;
    let mut pooled: Vec<f64> = Vec::new();
    let mut reports = Vec::new();
    let mut failures = Vec::new();
    for rec in &data {
        if months.is_empty() || months.contains(&rec.month) {
            match analyze_month(rec, cfg, Some(&pooled)) {
                Ok(r) => reports.push(r),
                Err(e) => failures.push(MonthFailure {
                    month: rec.month,
                    message: e.to_string(),
                }),
            }
        }
        let (logs, _) = log_shift(&rec.magnitudes, cfg.threshold, true)?;
        pooled.extend(logs);
    }
    Ok(CaseStudyReport {
        config: *cfg,
        months: reports,
        failures,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dataset_shape() {
        let d = load_dataset().unwrap();
        let counts: Vec<usize> = d.iter().map(|r| r.magnitudes.len()).collect();
        assert_eq!(counts, [46, 76, 238, 101, 80, 130, 187, 206, 179, 211, 91, 87, 111]);
        assert_eq!(d[0].magnitudes[0], 1.3);
        let max3 = d[2].magnitudes.iter().copied().fold(f64::MIN, f64::max);
        assert_eq!(max3, 4.0);
        assert!(d.iter().flat_map(|r| &r.magnitudes).all(|v| *v >= 1.0));
        assert_eq!(d[12].month, LunarMonth::XIII);
    }

    #[test]
    fn corrupt_dataset_is_rejected() {
        let tampered = DATASET.replacen("1.3", "1.4", 1);
        assert!(matches!(
            parse_dataset(&tampered, DATASET_SHA256),
            Err(Error::DatasetCorrupt)
        ));
    }

    #[test]
    fn month_labels_round_trip() {
        for m in LunarMonth::ALL {
            assert_eq!(m.label().parse::<LunarMonth>().unwrap(), m);
        }
        assert_eq!("viii".parse::<LunarMonth>().unwrap(), LunarMonth::VIII);
        assert!("XIV".parse::<LunarMonth>().is_err());
    }

    #[test]
    fn threshold_handling() {
        let (v, dropped) = log_shift(&[1.0, 2.0, 1.0 + std::f64::consts::E], 1.0, true).unwrap();
        assert_eq!(dropped, 1);
        assert!((v[1] - 1.0).abs() < 1e-15);
        assert!(matches!(
            log_shift(&[1.0, 2.0], 1.0, false),
            Err(Error::ThresholdViolation { .. })
        ));
        let rec = load_dataset().unwrap().remove(0);
        let strict = CaseStudyConfig {
            exclude_at_threshold: false,
            ..Default::default()
        };
        assert!(analyze_month(&rec, &strict, None).is_err());
    }

    #[test]
    fn month_one() {
        let rec = load_dataset().unwrap().remove(0);
        let r = analyze_month(&rec, &CaseStudyConfig::default(), Some(&[])).unwrap();
        assert_eq!((r.records, r.excluded, r.used), (46, 4, 42));
        assert!(r.exceedance > 0.0 && r.exceedance < 1e-3, "{}", r.exceedance);
        assert_eq!(r.mad_cumulative.as_ref().unwrap(), &r.mad_self);
        assert_eq!(r.plot.points.len(), 42);
    }

    #[test]
    fn full_study_runs() {
        let r = run_case_study(&CaseStudyConfig::default(), &[]).unwrap();
        assert_eq!(r.months.len(), 13);
        assert!(r.failures.is_empty());
        assert!(r.months.iter().all(|m| m.exceedance > 0.0 && m.exceedance < 1.0));
        assert!(r.months.iter().all(|m| !m.mad_self.saturated));
        let peak = r.max_exceedance().unwrap();
        assert!(peak <= 0.006, "exceedance series peaks at {peak}");
        let only = run_case_study(&CaseStudyConfig::default(), &[LunarMonth::II]).unwrap();
        assert_eq!(only.months[0], r.months[1]);
    }
}
