//! Python bindings for the `ppbench` core.
//!
//! Scalar results come back as Python numbers or lists. Whole reports come
//! back as dictionaries in the `report-v1` layout, the same documents the
//! command-line tool writes.

use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

use ppbench::benchmark::{self, ExperimentConfig};
use ppbench::casestudy::{self, CaseStudyConfig, LunarMonth};
use ppbench::estimation::{self, fit_probability_paper, sort_stable};
use ppbench::report::{FitDiagnostics, FitReport, GofReport, PositionsReport, Report, ReportBody};
use ppbench::{gof, CovMode, Family, FitMethod, Parent, PositionFormula};

fn to_py_err(e: ppbench::Error) -> PyErr {
    use ppbench::Error::*;
    match e {
        Domain(_)
        | UnsupportedOrder { .. }
        | InvalidInput(_)
        | InvalidConstant(_)
        | SizeMismatch { .. }
        | ThresholdViolation { .. }
        | CostGuard { .. } => PyValueError::new_err(e.to_string()),
        other => PyRuntimeError::new_err(other.to_string()),
    }
}

fn parse_family(name: &str) -> PyResult<Family> {
    match name.to_ascii_lowercase().as_str() {
        "gumbel" => Ok(Family::Gumbel),
        "normal" => Ok(Family::Normal),
        _ => Err(PyValueError::new_err(format!(
            "family must be 'gumbel' or 'normal', got '{name}'"
        ))),
    }
}

fn parse_method(name: &str) -> PyResult<FitMethod> {
    match name.to_ascii_lowercase().as_str() {
        "ols" => Ok(FitMethod::Ols),
        "gls" => Ok(FitMethod::Gls),
        "mle" => Ok(FitMethod::Mle),
        _ => Err(PyValueError::new_err(format!(
            "method must be 'ols', 'gls' or 'mle', got '{name}'"
        ))),
    }
}

fn parse_cov_mode(name: &str) -> PyResult<CovMode> {
    match name.to_ascii_lowercase().as_str() {
        "expansion" => Ok(CovMode::Expansion),
        "exact" => Ok(CovMode::Exact),
        "diagonal" => Ok(CovMode::Diagonal),
        "identity" => Ok(CovMode::Identity),
        _ => Err(PyValueError::new_err(format!("unknown covariance mode '{name}'"))),
    }
}

fn parse_formula(name: &str, family: Family, k: usize) -> PyResult<PositionFormula> {
    PositionFormula::parse(name, family, k).map_err(to_py_err)
}

fn report_dict<'py>(py: Python<'py>, body: ReportBody) -> PyResult<Bound<'py, PyAny>> {
    let text = Report::new(body).to_json().map_err(to_py_err)?;
    py.import("json")?.call_method1("loads", (text,))
}

/// A location-scale fit on probability paper.
#[pyclass(module = "ppbench_py", frozen)]
struct Fit {
    #[pyo3(get)]
    location: f64,
    #[pyo3(get)]
    scale: f64,
    #[pyo3(get)]
    method: String,
    #[pyo3(get)]
    family: String,
    /// Plotting positions of the sorted sample (empty for MLE).
    #[pyo3(get)]
    positions: Vec<f64>,
    /// Sorted observations on the regression scale.
    #[pyo3(get)]
    sorted: Vec<f64>,
    /// Abscissae of the probability-paper points (empty for MLE).
    regressors: Vec<f64>,
    report_json: String,
    parent: Parent,
}

#[pymethods]
impl Fit {
    /// Quantile estimate for a return period `t > 1`.
    fn quantile(&self, return_period: f64) -> PyResult<f64> {
        let fit = ppbench::FitResult {
            location: self.location,
            scale: self.scale,
            method: parse_method(&self.method)?,
            design: Vec::new(),
            residuals: Vec::new(),
            family: Some(self.parent.reduced()),
        };
        estimation::predict_quantile(&fit, self.parent, return_period)
            .map(|q| q.value)
            .map_err(to_py_err)
    }

    /// The fit as a `report-v1` dictionary.
    fn report<'py>(&self, py: Python<'py>) -> PyResult<Bound<'py, PyAny>> {
        py.import("json")?.call_method1("loads", (self.report_json.as_str(),))
    }

    fn __repr__(&self) -> String {
        format!(
            "Fit(location={}, scale={}, method='{}', family='{}')",
            self.location, self.scale, self.method, self.family
        )
    }
}

/// Plotting positions for a sample of size `n`.
#[pyfunction]
#[pyo3(signature = (formula, n, family = "normal", k = 4))]
fn positions(formula: &str, n: usize, family: &str, k: usize) -> PyResult<Vec<f64>> {
    let formula = parse_formula(formula, parse_family(family)?, k)?;
    Ok(ppbench::positions::positions(formula, n).map_err(to_py_err)?.p)
}

/// Plotting positions as a `report-v1` dictionary.
#[pyfunction]
#[pyo3(signature = (formula, n, family = "normal", k = 4))]
fn positions_report<'py>(
    py: Python<'py>,
    formula: &str,
    n: usize,
    family: &str,
    k: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let formula = parse_formula(formula, parse_family(family)?, k)?;
    let set = ppbench::positions::positions(formula, n).map_err(to_py_err)?;
    let body = ReportBody::Positions(PositionsReport {
        formula: formula.id(),
        n,
        symmetric: ppbench::positions::symmetry_check(&set),
        p: set.p,
    });
    report_dict(py, body)
}

/// Fits location and scale to `values` on probability paper.
///
/// `threshold` switches to a three-parameter log-normal parent: the fit is
/// made to `ln(x - threshold)` with values at or below the threshold dropped.
#[pyfunction]
#[pyo3(signature = (values, family = "gumbel", formula = "taylor", method = "ols", cov_mode = "expansion", k = 4, threshold = None))]
fn fit(
    values: Vec<f64>,
    family: &str,
    formula: &str,
    method: &str,
    cov_mode: &str,
    k: usize,
    threshold: Option<f64>,
) -> PyResult<Fit> {
    let family = parse_family(family)?;
    let (parent, values, excluded) = match threshold {
        Some(c) => {
            if family != Family::Normal {
                return Err(PyValueError::new_err("a threshold requires family='normal'"));
            }
            let (logs, dropped) = casestudy::log_shift(&values, c, true).map_err(to_py_err)?;
            (Parent::LogNormal3 { threshold: c }, logs, dropped)
        }
        None => (
            if family == Family::Gumbel {
                Parent::Gumbel
            } else {
                Parent::Normal
            },
            values,
            0,
        ),
    };
    let formula = parse_formula(formula, family, k)?;
    let method = parse_method(method)?;
    let cov_mode = parse_cov_mode(cov_mode)?;
    let mut regressors = Vec::new();
    let report = if method == FitMethod::Mle {
        let sorted = sort_stable(&values);
        let fit = estimation::fit_mle(&sorted, family).map_err(to_py_err)?;
        FitReport {
            a: fit.location,
            b: fit.scale,
            method,
            family,
            parent,
            formula: None,
            positions: Vec::new(),
            diagnostics: FitDiagnostics::from_fit(&fit, &sorted, excluded, 0.0),
        }
    } else {
        let paper = fit_probability_paper(&values, family, formula, method, cov_mode).map_err(to_py_err)?;
        regressors = paper.regressors.clone();
        FitReport {
            a: paper.fit.location,
            b: paper.fit.scale,
            method,
            family,
            parent,
            formula: Some(formula.id()),
            positions: paper.positions.p.clone(),
            diagnostics: FitDiagnostics::from_fit(&paper.fit, &paper.sorted, excluded, paper.ridge),
        }
    };
    let report_json = Report::new(ReportBody::Fit(report.clone()))
        .to_json()
        .map_err(to_py_err)?;
    Ok(Fit {
        location: report.a,
        scale: report.b,
        method: method_name(method).into(),
        family: family_name(family).into(),
        positions: report.positions,
        sorted: sort_stable(&values),
        regressors,
        report_json,
        parent,
    })
}

fn method_name(m: FitMethod) -> &'static str {
    match m {
        FitMethod::Ols => "ols",
        FitMethod::Gls => "gls",
        FitMethod::Mle => "mle",
    }
}

fn family_name(f: Family) -> &'static str {
    match f {
        Family::Gumbel => "gumbel",
        Family::Normal => "normal",
        Family::Uniform => "uniform",
    }
}

/// Exact means of the standardized order statistics.
#[pyfunction]
fn exact_means(family: &str, n: usize) -> PyResult<Vec<f64>> {
    benchmark::exact_means(parse_family(family)?, n).map_err(to_py_err)
}

/// Deterministic squared error of a rule against the exact means.
#[pyfunction]
#[pyo3(signature = (family, n, formula, k = 4))]
fn dse(family: &str, n: usize, formula: &str, k: usize) -> PyResult<f64> {
    let family = parse_family(family)?;
    benchmark::dse(family, n, parse_formula(formula, family, k)?).map_err(to_py_err)
}

/// Monte Carlo comparison of plotting positions, as a `report-v1` dictionary.
///
/// `formulas=None` runs the full catalogue. The work is released from the
/// interpreter lock while it runs.
#[pyfunction]
#[pyo3(signature = (family, n, replicates = 10_000, seed = 1, formulas = None, include_mle = true, method = "ols", k = 4))]
#[allow(clippy::too_many_arguments)]
fn run_benchmark<'py>(
    py: Python<'py>,
    family: &str,
    n: usize,
    replicates: usize,
    seed: u64,
    formulas: Option<Vec<String>>,
    include_mle: bool,
    method: &str,
    k: usize,
) -> PyResult<Bound<'py, PyAny>> {
    let family = parse_family(family)?;
    let mut cfg = ExperimentConfig::new(family, n, replicates, seed);
    cfg.formulas = match formulas {
        None => {
            let mut all = vec![parse_formula("taylor", family, k)?];
            all.extend(PositionFormula::CLASSICAL);
            all
        }
        Some(names) => names
            .iter()
            .map(|s| parse_formula(s, family, k))
            .collect::<PyResult<_>>()?,
    };
    cfg.include_mle = include_mle;
    cfg.method = parse_method(method)?;
    cfg.validate().map_err(|e| PyValueError::new_err(e.to_string()))?;
    let report = py.detach(|| benchmark::run_suite(&cfg)).map_err(to_py_err)?;
    report_dict(py, ReportBody::Benchmark(report))
}

/// Modified Anderson-Darling normality test, as a `report-v1` dictionary.
///
/// Mean and sd are estimated from the sample unless both are given.
#[pyfunction]
#[pyo3(signature = (values, mean = None, sd = None, log_threshold = None))]
fn mad<'py>(
    py: Python<'py>,
    values: Vec<f64>,
    mean: Option<f64>,
    sd: Option<f64>,
    log_threshold: Option<f64>,
) -> PyResult<Bound<'py, PyAny>> {
    let (values, excluded) = match log_threshold {
        Some(c) => casestudy::log_shift(&values, c, true).map_err(to_py_err)?,
        None => (values, 0),
    };
    let result = match (mean, sd) {
        (None, None) => gof::mad_case3(&values),
        (Some(m), Some(s)) => gof::mad_known_params(&values, m, s),
        _ => return Err(PyValueError::new_err("give both mean and sd, or neither")),
    }
    .map_err(to_py_err)?;
    report_dict(
        py,
        ReportBody::Gof(GofReport {
            log_threshold,
            excluded,
            result,
        }),
    )
}

/// Analysis of the bundled magnitude catalogue, as a `report-v1` dictionary.
///
/// `months` lists labels such as `"I"`; `None` analyses all thirteen.
#[pyfunction]
#[pyo3(signature = (months = None, method = "ols", formula = "taylor", k = 4, threshold = 1.0, critical_magnitude = 5.0))]
fn case_study<'py>(
    py: Python<'py>,
    months: Option<Vec<String>>,
    method: &str,
    formula: &str,
    k: usize,
    threshold: f64,
    critical_magnitude: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let months = months
        .unwrap_or_default()
        .iter()
        .map(|m| {
            m.parse::<LunarMonth>()
                .map_err(|e| PyValueError::new_err(e.to_string()))
        })
        .collect::<PyResult<Vec<_>>>()?;
    let cfg = CaseStudyConfig {
        threshold,
        formula: parse_formula(formula, Family::Normal, k)?,
        method: parse_method(method)?,
        critical_magnitude,
        ..CaseStudyConfig::default()
    };
    let report = py
        .detach(|| casestudy::run_case_study(&cfg, &months))
        .map_err(to_py_err)?;
    report_dict(py, ReportBody::Bradyseism(report))
}

/// SVG probability-paper plot of a fitted sample.
#[pyfunction]
#[pyo3(signature = (fit, title = "Probability paper", line = true))]
fn plot_svg(fit: &Fit, title: &str, line: bool) -> PyResult<String> {
    let family = fit.parent.reduced();
    if fit.regressors.is_empty() {
        return Err(PyValueError::new_err("plotting needs a probability-paper fit, not MLE"));
    }
    let points = fit.regressors.iter().copied().zip(fit.sorted.iter().copied()).collect();
    let x_label = match fit.parent {
        Parent::LogNormal3 { threshold } => format!("ln(x - {threshold})"),
        _ => "x".to_string(),
    };
    let spec = ppbench::plot::PlotSpec::new(
        title.to_string(),
        family,
        points,
        line.then_some((fit.location, fit.scale)),
        x_label,
    )
    .map_err(to_py_err)?;
    ppbench::plot::render_probability_paper(&spec).map_err(to_py_err)
}

/// The JSON Schema every report dictionary conforms to.
#[pyfunction]
fn report_schema() -> &'static str {
    ppbench::report::SCHEMA_JSON
}

#[pymodule]
fn ppbench_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<Fit>()?;
    m.add_function(wrap_pyfunction!(positions, m)?)?;
    m.add_function(wrap_pyfunction!(positions_report, m)?)?;
    m.add_function(wrap_pyfunction!(fit, m)?)?;
    m.add_function(wrap_pyfunction!(exact_means, m)?)?;
    m.add_function(wrap_pyfunction!(dse, m)?)?;
    m.add_function(wrap_pyfunction!(run_benchmark, m)?)?;
    m.add_function(wrap_pyfunction!(mad, m)?)?;
    m.add_function(wrap_pyfunction!(case_study, m)?)?;
    m.add_function(wrap_pyfunction!(plot_svg, m)?)?;
    m.add_function(wrap_pyfunction!(report_schema, m)?)?;
    m.add("SCHEMA_ID", ppbench::report::SCHEMA_ID)?;
    Ok(())
}
