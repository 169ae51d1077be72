//! One function per subcommand.

use std::fmt::Write as _;
use std::path::Path;

use ppbench::benchmark::{run_suite, BenchmarkReport, ExperimentConfig, FGrid};
use ppbench::casestudy::{log_shift, run_case_study, CaseStudyConfig, LunarMonth};
use ppbench::estimation::{fit_mle, fit_probability_paper, predict_quantile, sort_stable};
use ppbench::gof::{mad_case3, mad_known_params};
use ppbench::plot::{emit_probability_paper, render_probability_paper, PlotSpec};
use ppbench::positions::{positions, symmetry_check};
use ppbench::report::{FitDiagnostics, FitReport, GofReport, PositionsReport, QuantileReport, Report, ReportBody};
use ppbench::{Family, FitMethod, Parent, PositionFormula};

use crate::input::{read_values, write_output};
use crate::{
    BenchmarkArgs, BradyseismArgs, CliError, Command, FitArgs, FitOptions, GofArgs, GridArg, ParentArg, PlotArgs,
    PositionsArgs, QuantileArgs, TableFormat,
};

pub fn run(command: Command) -> Result<(), CliError> {
    match command {
        Command::Positions(a) => positions_cmd(a),
        Command::Fit(a) => fit_cmd(a),
        Command::Quantile(a) => quantile_cmd(a),
        Command::Benchmark(a) => benchmark_cmd(a),
        Command::Gof(a) => gof_cmd(a),
        Command::Bradyseism(a) => bradyseism_cmd(a),
        Command::Plot(a) => plot_cmd(a),
    }
}

fn parse_formula(name: &str, family: Family, k: usize) -> Result<PositionFormula, CliError> {
    PositionFormula::parse(name, family, k).map_err(|e| CliError::Usage(e.to_string()))
}

fn json(body: ReportBody) -> Result<String, CliError> {
    Ok(Report::new(body).to_json()?)
}

fn positions_cmd(a: PositionsArgs) -> Result<(), CliError> {
    if a.n == 0 {
        return Err(CliError::Usage("--n must be at least 1".into()));
    }
    let formula = parse_formula(&a.formula, a.family.into(), a.k)?;
    let set = positions(formula, a.n)?;
    let text = match a.format {
        TableFormat::Csv => {
            let mut s = String::from("rank,p\n");
            for (i, p) in set.p.iter().enumerate() {
                let _ = writeln!(s, "{},{}", i + 1, p);
            }
            s
        }
        TableFormat::Json => json(ReportBody::Positions(PositionsReport {
            formula: formula.id(),
            n: a.n,
            symmetric: symmetry_check(&set),
            p: set.p,
        }))?,
    };
    write_output(a.output.as_deref(), &text)
}

/// A fitted sample ready for reporting or plotting.
struct Fitted {
    report: FitReport,
    parent: Parent,
    family: Family,
    /// `(regressor, observation)` pairs on the regression scale.
    points: Vec<(f64, f64)>,
    x_label: String,
}

fn fit_sample(o: &FitOptions) -> Result<Fitted, CliError> {
    let raw = read_values(&o.input)?;
    let (parent, values, excluded) = match o.parent {
        ParentArg::Gumbel => (Parent::Gumbel, raw, 0),
        ParentArg::Normal => (Parent::Normal, raw, 0),
        ParentArg::Lognormal3 => {
            let (logs, dropped) = log_shift(&raw, o.threshold, o.exclude_at_threshold)?;
            (Parent::LogNormal3 { threshold: o.threshold }, logs, dropped)
        }
    };
    let family = parent.reduced();
    let formula = parse_formula(&o.formula, family, o.k)?;
    let method: FitMethod = o.method.into();
    let x_label = match parent {
        Parent::LogNormal3 { threshold } => format!("ln(x - {threshold})"),
        _ => "x".to_string(),
    };
    let cov_mode = o.cov_mode.into();
    let (report, paper) = if method == FitMethod::Mle {
        let sorted = sort_stable(&values);
        let fit = fit_mle(&sorted, family)?;
        let report = FitReport {
            a: fit.location,
            b: fit.scale,
            method,
            family,
            parent,
            formula: None,
            positions: Vec::new(),
            diagnostics: FitDiagnostics::from_fit(&fit, &sorted, excluded, 0.0),
        };
        // Plot points still come from the plotting positions.
        (
            report,
            fit_probability_paper(&values, family, formula, FitMethod::Ols, cov_mode).ok(),
        )
    } else {
        let paper = fit_probability_paper(&values, family, formula, method, cov_mode)?;
        let report = FitReport {
            a: paper.fit.location,
            b: paper.fit.scale,
            method,
            family,
            parent,
            formula: Some(formula.id()),
            positions: paper.positions.p.clone(),
            diagnostics: FitDiagnostics::from_fit(&paper.fit, &paper.sorted, excluded, paper.ridge),
        };
        (report, Some(paper))
    };
    let points = paper
        .map(|p| p.regressors.into_iter().zip(p.sorted).collect())
        .unwrap_or_default();
    Ok(Fitted {
        report,
        parent,
        family,
        points,
        x_label,
    })
}

fn fit_cmd(a: FitArgs) -> Result<(), CliError> {
    let fitted = fit_sample(&a.fit)?;
    write_output(a.output.as_deref(), &json(ReportBody::Fit(fitted.report))?)
}

fn quantile_cmd(a: QuantileArgs) -> Result<(), CliError> {
    if a.return_period.iter().any(|t| !(*t > 1.0) || !t.is_finite()) {
        return Err(CliError::Usage(
            "return periods must be finite and greater than 1".into(),
        ));
    }
    let fitted = fit_sample(&a.fit)?;
    let fit = ppbench::FitResult {
        location: fitted.report.a,
        scale: fitted.report.b,
        method: fitted.report.method,
        design: Vec::new(),
        residuals: Vec::new(),
        family: Some(fitted.family),
    };
    let quantiles = a
        .return_period
        .iter()
        .map(|t| predict_quantile(&fit, fitted.parent, *t))
        .collect::<ppbench::Result<Vec<_>>>()?;
    let text = match a.format {
        TableFormat::Csv => {
            let mut s = String::from("return_period,level,value\n");
            for q in &quantiles {
                let _ = writeln!(s, "{},{},{}", q.return_period, q.level, q.value);
            }
            s
        }
        TableFormat::Json => json(ReportBody::Quantile(QuantileReport {
            fit: fitted.report,
            quantiles,
        }))?,
    };
    write_output(a.output.as_deref(), &text)
}

fn benchmark_formulas(names: &[String], family: Family, k: usize) -> Result<Vec<PositionFormula>, CliError> {
    if names.len() == 1 && names[0].eq_ignore_ascii_case("all") {
        let mut all = vec![parse_formula("taylor", family, k)?];
        all.extend(PositionFormula::CLASSICAL);
        return Ok(all);
    }
    names.iter().map(|n| parse_formula(n.trim(), family, k)).collect()
}

fn benchmark_csv(r: &BenchmarkReport) -> String {
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    let mut s = String::from("candidate,iqse,iqse_se,ifse,ifse_se,dse,avg,kept_replicates,discarded_replicates\n");
    for c in &r.results {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{}",
            c.candidate,
            c.iqse,
            c.iqse_se,
            c.ifse,
            c.ifse_se,
            opt(c.dse),
            opt(c.avg),
            c.kept_replicates,
            c.discarded_replicates
        );
    }
    s
}

fn benchmark_cmd(a: BenchmarkArgs) -> Result<(), CliError> {
    let family: Family = a.family.into();
    let mut cfg = ExperimentConfig::new(family, a.n, a.m, a.seed);
    cfg.formulas = benchmark_formulas(&a.formulas, family, a.k)?;
    cfg.include_mle = !a.no_mle;
    cfg.method = a.method.into();
    cfg.cov_mode = a.cov_mode.into();
    cfg.location = a.location;
    cfg.scale = a.scale;
    cfg.grid = match a.grid {
        GridArg::Logit => FGrid::logit(16.0, a.grid_nodes.unwrap_or(641)),
        GridArg::Uniform => FGrid::uniform(0.0025, 0.9975, a.grid_nodes.unwrap_or(399)),
    }
    .map_err(|e| CliError::Usage(e.to_string()))?;
    cfg.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    let report = run_suite(&cfg)?;
    for f in &report.failures {
        eprintln!("warning: {}: {}", f.candidate, f.message);
    }
    let text = match a.format {
        TableFormat::Csv => benchmark_csv(&report),
        TableFormat::Json => json(ReportBody::Benchmark(report))?,
    };
    write_output(a.output.as_deref(), &text)
}

fn parse_params(s: &str) -> Result<Option<(f64, f64)>, CliError> {
    if s == "self" {
        return Ok(None);
    }
    let bad = || CliError::Usage(format!("--params must be 'self' or 'fixed:MEAN,SD', got '{s}'"));
    let rest = s.strip_prefix("fixed:").ok_or_else(bad)?;
    let (m, sd) = rest.split_once(',').ok_or_else(bad)?;
    let m: f64 = m.trim().parse().map_err(|_| bad())?;
    let sd: f64 = sd.trim().parse().map_err(|_| bad())?;
    if !(sd > 0.0) || !m.is_finite() || !sd.is_finite() {
        return Err(CliError::Usage("fixed parameters need a finite mean and sd > 0".into()));
    }
    Ok(Some((m, sd)))
}

fn gof_cmd(a: GofArgs) -> Result<(), CliError> {
    let params = parse_params(&a.params)?;
    let raw = read_values(&a.input)?;
    let (values, excluded) = match a.log_threshold {
        Some(c) => log_shift(&raw, c, true)?,
        None => (raw, 0),
    };
    let result = match params {
        None => mad_case3(&values)?,
        Some((m, sd)) => mad_known_params(&values, m, sd)?,
    };
    if result.saturated {
        eprintln!("warning: some probabilities reached 0 or 1 and were clamped");
    }
    let body = ReportBody::Gof(GofReport {
        log_threshold: a.log_threshold,
        excluded,
        result,
    });
    write_output(a.output.as_deref(), &json(body)?)
}

fn bradyseism_cmd(a: BradyseismArgs) -> Result<(), CliError> {
    let months = if a.month.eq_ignore_ascii_case("all") {
        Vec::new()
    } else {
        vec![a
            .month
            .parse::<LunarMonth>()
            .map_err(|e| CliError::Usage(e.to_string()))?]
    };
    let cfg = CaseStudyConfig {
        threshold: a.threshold,
        formula: parse_formula(&a.positions, Family::Normal, a.k)?,
        method: a.method.into(),
        cov_mode: a.cov_mode.into(),
        critical_magnitude: a.critical_magnitude,
        exclude_at_threshold: true,
    };
    let report = run_case_study(&cfg, &months)?;
    for f in &report.failures {
        eprintln!("warning: month {}: {}", f.month, f.message);
    }
    let failed = !report.failures.is_empty();
    match &a.out {
        None => write_output(None, &json(ReportBody::Bradyseism(report))?)?,
        Some(dir) => write_case_study(dir, report)?,
    }
    if failed {
        return Err(CliError::Compute(ppbench::Error::InvalidInput(
            "some months could not be analysed".into(),
        )));
    }
    Ok(())
}

fn write_case_study(dir: &Path, report: ppbench::casestudy::CaseStudyReport) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Usage(format!("cannot create {}: {e}", dir.display())))?;
    let mut csv = String::from("month,exceedance\n");
    for (m, p) in report.exceedance_series() {
        let _ = writeln!(csv, "{m},{p}");
    }
    write_output(Some(&dir.join("exceedance.csv")), &csv)?;
    for m in &report.months {
        let svg = render_probability_paper(&m.plot)?;
        write_output(Some(&dir.join(format!("month-{}.svg", m.month))), &svg)?;
    }
    write_output(Some(&dir.join("report.json")), &json(ReportBody::Bradyseism(report))?)
}

fn plot_cmd(a: PlotArgs) -> Result<(), CliError> {
    let fitted = fit_sample(&a.fit)?;
    if fitted.points.len() < 2 {
        return Err(CliError::Compute(ppbench::Error::InvalidInput(
            "cannot place the sample on probability paper".into(),
        )));
    }
    let line = (!a.no_line).then_some((fitted.report.a, fitted.report.b));
    let spec = PlotSpec::new(a.title, fitted.family, fitted.points, line, fitted.x_label)?;
    emit_probability_paper(&spec, &a.output).map_err(|e| match e {
        ppbench::Error::Io(io) => CliError::Usage(format!("cannot write {}: {io}", a.output.display())),
        other => CliError::Compute(other),
    })
}
