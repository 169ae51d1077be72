//! Versioned JSON envelope shared by every command.
//!
//! A report is `{"schema": "report-v1", "generator": {...}, "kind": ...,
//! "data": {...}}`. The JSON Schema lives in `schemas/report-v1.json` at the
//! repository root.

use serde::{Deserialize, Serialize};

use crate::benchmark::BenchmarkReport;
use crate::casestudy::CaseStudyReport;
use crate::distributions::{Family, Parent};
use crate::error::Result;
use crate::estimation::{FitMethod, FitResult, QuantileEstimate};
use crate::gof::MadResult;

pub const SCHEMA_ID: &str = "report-v1";

/// The schema document, embedded for callers that validate in-process.
pub const SCHEMA_JSON: &str = include_str!("../../../schemas/report-v1.json");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Generator {
    pub name: String,
    pub version: String,
}

impl Default for Generator {
    fn default() -> Self {
        Self {
            name: "ppbench".into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub generator: Generator,
    #[serde(flatten)]
    pub body: ReportBody,
}

impl Report {
    pub fn new(body: ReportBody) -> Self {
        Self {
            schema: SCHEMA_ID.into(),
            generator: Generator::default(),
            body,
        }
    }

    /// Pretty-printed JSON with a trailing newline.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "data", rename_all = "lowercase")]
pub enum ReportBody {
    Positions(PositionsReport),
    Fit(FitReport),
    Quantile(QuantileReport),
    Benchmark(BenchmarkReport),
    Gof(GofReport),
    Bradyseism(CaseStudyReport),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionsReport {
    pub formula: String,
    pub n: usize,
    pub p: Vec<f64>,
    pub symmetric: bool,
}

/// Fit quality on the regression scale.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    pub n: usize,
    /// Observations at or below the log threshold that were dropped.
    pub excluded: usize,
    pub residual_rms: Option<f64>,
    pub r_squared: Option<f64>,
    /// Ridge added to the GLS covariance.
    pub ridge: f64,
}

impl FitDiagnostics {
    pub fn from_fit(fit: &FitResult, sorted: &[f64], excluded: usize, ridge: f64) -> Self {
        let n = sorted.len();
        let (residual_rms, r_squared) = if fit.residuals.is_empty() {
            (None, None)
        } else {
            let ss_res: f64 = fit.residuals.iter().map(|r| r * r).sum();
            let mean = sorted.iter().sum::<f64>() / n as f64;
            let ss_tot: f64 = sorted.iter().map(|x| (x - mean) * (x - mean)).sum();
            let r2 = if ss_tot > 0.0 {
                Some(1.0 - ss_res / ss_tot)
            } else {
                None
            };
            (Some((ss_res / n as f64).sqrt()), r2)
        };
        Self {
            n,
            excluded,
            residual_rms,
            r_squared,
            ridge,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Location estimate.
    pub a: f64,
    /// Scale estimate.
    pub b: f64,
    pub method: FitMethod,
    pub family: Family,
    pub parent: Parent,
    /// Plotting-position identifier; absent for likelihood fits.
    pub formula: Option<String>,
    /// Plotting positions in rank order; empty for likelihood fits.
    pub positions: Vec<f64>,
    pub diagnostics: FitDiagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileReport {
    pub fit: FitReport,
    pub quantiles: Vec<QuantileEstimate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub log_threshold: Option<f64>,
    pub excluded: usize,
    pub result: MadResult,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gof::mad_case3;

    #[test]
    fn envelope_layout_and_round_trip() {
        let body = ReportBody::Positions(PositionsReport {
            formula: "weibull".into(),
            n: 3,
            p: vec![0.25, 0.5, 0.75],
            symmetric: true,
        });
        let r = Report::new(body);
        let json = r.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["schema"], "report-v1");
        assert_eq!(v["kind"], "positions");
        assert_eq!(v["data"]["p"][1], 0.5);
        assert_eq!(serde_json::from_str::<Report>(&json).unwrap(), r);
    }

    #[test]
    fn gof_report_serialises() {
        let result = mad_case3(&[0.1, 0.5, -0.3, 1.2, 0.8, -1.1]).unwrap();
        let r = Report::new(ReportBody::Gof(GofReport {
            log_threshold: None,
            excluded: 0,
            result,
        }));
        let v: serde_json::Value = serde_json::from_str(&r.to_json().unwrap()).unwrap();
        assert_eq!(v["data"]["result"]["comparison"], "pass5pct");
    }

    #[test]
    fn embedded_schema_is_json() {
        let v: serde_json::Value = serde_json::from_str(SCHEMA_JSON).unwrap();
        assert_eq!(v["$id"].as_str().unwrap().rsplit('/').next().unwrap(), "report-v1.json");
    }
}
