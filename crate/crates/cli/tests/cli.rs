use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_ppbench"));
    c.env_remove("PPBENCH_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn schema_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../schemas/report-v1.json")
}

fn assert_valid_report(text: &str) -> Value {
    let schema: Value = serde_json::from_str(&std::fs::read_to_string(schema_path()).unwrap()).unwrap();
    let validator = jsonschema::validator_for(&schema).unwrap();
    let instance: Value = serde_json::from_str(text).unwrap();
    let errors: Vec<String> = validator.iter_errors(&instance).map(|e| e.to_string()).collect();
    assert!(errors.is_empty(), "schema violations: {errors:#?}");
    instance
}

fn write_csv(dir: &Path, name: &str, body: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, body).unwrap();
    p
}

fn sample_csv(dir: &Path) -> PathBuf {
    write_csv(dir, "sample.csv", "value\n3.1\n2.2\n5.4\n4.0\n2.9\n3.3\n2.7\n6.1\n")
}

#[test]
fn every_subcommand_has_help() {
    for (cmd, flag) in [
        ("positions", "--formula"),
        ("fit", "--input"),
        ("quantile", "--return-period"),
        ("benchmark", "--seed"),
        ("gof", "--log-threshold"),
        ("bradyseism", "--month"),
        ("plot", "--output"),
    ] {
        let o = run(&[cmd, "--help"]);
        assert_eq!(code(&o), 0, "{cmd}");
        assert!(stdout(&o).contains(flag), "{cmd} help lacks {flag}");
    }
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn weibull_positions_csv() {
    let o = run(&["positions", "--formula", "weibull", "--n", "9"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "rank,p");
    assert_eq!(lines[5], "5,0.5");
    assert_eq!(lines.len(), 10);
}

#[test]
fn positions_json_validates() {
    let o = run(&[
        "positions",
        "--formula",
        "taylor",
        "--family",
        "gumbel",
        "--n",
        "6",
        "--out",
        "json",
    ]);
    assert_eq!(code(&o), 0);
    let v = assert_valid_report(&stdout(&o));
    assert_eq!(v["data"]["formula"], "taylor-gumbel-k4");
    assert_eq!(v["data"]["symmetric"], false);
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let bad_header = write_csv(dir.path(), "bad.csv", "x\n1\n2\n");
    let not_number = write_csv(dir.path(), "nan.csv", "value\n1\nabc\n");
    let good = sample_csv(dir.path());
    let cases: Vec<Vec<String>> = vec![
        vec!["frobnicate".into()],
        vec![],
        vec![
            "positions".into(),
            "--formula".into(),
            "nope".into(),
            "--n".into(),
            "5".into(),
        ],
        vec!["fit".into(), "--input".into(), bad_header.display().to_string()],
        vec!["fit".into(), "--input".into(), not_number.display().to_string()],
        vec![
            "fit".into(),
            "--input".into(),
            dir.path().join("missing.csv").display().to_string(),
        ],
        vec![
            "gof".into(),
            "--input".into(),
            good.display().to_string(),
            "--params".into(),
            "fixed:1".into(),
        ],
        vec![
            "benchmark".into(),
            "--family".into(),
            "gumbel".into(),
            "--n".into(),
            "5".into(),
            "--m".into(),
            "10".into(),
        ],
        vec!["bradyseism".into(), "--month".into(), "XIV".into()],
        vec![
            "quantile".into(),
            "--input".into(),
            good.display().to_string(),
            "--return-period".into(),
            "0.5".into(),
        ],
    ];
    for args in cases {
        let o = bin().args(&args).output().unwrap();
        assert_eq!(code(&o), 1, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let o = bin()
        .env("PPBENCH_THREADS", "lots")
        .args(["positions", "--formula", "hazen", "--n", "3"])
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
}

#[test]
fn computation_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let flat = write_csv(dir.path(), "flat.csv", "value\n1\n1\n1\n1\n1\n");
    let o = run(&["fit", "--input", flat.to_str().unwrap(), "--formula", "weibull"]);
    assert_eq!(code(&o), 2);
    let o = run(&["gof", "--input", flat.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    let at_threshold = write_csv(dir.path(), "c.csv", "value\n1.0\n1.5\n2.0\n");
    let o = run(&[
        "fit",
        "--input",
        at_threshold.to_str().unwrap(),
        "--parent",
        "lognormal3",
        "--threshold",
        "1",
    ]);
    assert_eq!(code(&o), 2);
}

#[test]
fn fit_and_quantile_reports() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path());
    let input = input.to_str().unwrap();
    for method in ["ols", "gls", "mle"] {
        let o = run(&["fit", "--input", input, "--parent", "gumbel", "--method", method]);
        assert_eq!(code(&o), 0, "{method}");
        let v = assert_valid_report(&stdout(&o));
        let d = &v["data"];
        assert!(d["b"].as_f64().unwrap() > 0.0);
        assert_eq!(d["method"], method);
        assert!(d["diagnostics"].is_object());
    }
    let o = run(&["quantile", "--input", input, "--return-period", "10,100"]);
    assert_eq!(code(&o), 0);
    let v = assert_valid_report(&stdout(&o));
    let q = v["data"]["quantiles"].as_array().unwrap();
    assert!(q[1]["value"].as_f64().unwrap() > q[0]["value"].as_f64().unwrap());
    let o = run(&["quantile", "--input", input, "--return-period", "10", "--out", "csv"]);
    assert!(stdout(&o).starts_with("return_period,level,value\n10,0.9,"));
}

#[test]
fn gof_with_log_threshold() {
    let dir = tempfile::tempdir().unwrap();
    let input = write_csv(dir.path(), "m.csv", "value\n1.0\n1.3\n1.5\n1.2\n2.4\n1.8\n1.4\n1.6\n");
    let o = run(&["gof", "--input", input.to_str().unwrap(), "--log-threshold", "1"]);
    assert_eq!(code(&o), 0);
    let v = assert_valid_report(&stdout(&o));
    assert_eq!(v["data"]["excluded"], 1);
    assert_eq!(v["data"]["result"]["n"], 7);
}

#[test]
fn benchmark_is_reproducible_across_thread_counts() {
    let args = [
        "benchmark",
        "--family",
        "gumbel",
        "--n",
        "5",
        "--m",
        "300",
        "--seed",
        "7",
        "--formulas",
        "weibull,taylor",
    ];
    let a = run(&args);
    assert_eq!(code(&a), 0, "{}", String::from_utf8_lossy(&a.stderr));
    let b = bin().env("PPBENCH_THREADS", "1").args(args).output().unwrap();
    assert_eq!(a.stdout, b.stdout);
    let v = assert_valid_report(&stdout(&a));
    let ids: Vec<&str> = v["data"]["results"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["candidate"].as_str().unwrap())
        .collect();
    assert_eq!(ids, ["weibull", "taylor-gumbel-k4", "mle"]);

    let mut csv_args = args.to_vec();
    csv_args.extend(["--out", "csv", "--no-mle"]);
    let o = run(&csv_args);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().count(), 3);
}

#[test]
fn bradyseism_writes_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["bradyseism", "--month", "I", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(out.join("report.json")).unwrap();
    let v = assert_valid_report(&report);
    let month = &v["data"]["months"][0];
    assert_eq!(month["month"], "I");
    let p = month["exceedance"].as_f64().unwrap();
    assert!(p > 0.0 && p < 0.001);
    let svg = std::fs::read_to_string(out.join("month-I.svg")).unwrap();
    assert_eq!(svg.matches("<circle").count(), 42);
    let csv = std::fs::read_to_string(out.join("exceedance.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);

    let again = dir.path().join("again");
    run(&["bradyseism", "--month", "I", "--out", again.to_str().unwrap()]);
    for f in ["report.json", "month-I.svg", "exceedance.csv"] {
        assert_eq!(
            std::fs::read(out.join(f)).unwrap(),
            std::fs::read(again.join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn bradyseism_all_months_to_stdout() {
    let o = run(&["bradyseism", "--method", "gls"]);
    assert_eq!(code(&o), 0);
    let v = assert_valid_report(&stdout(&o));
    assert_eq!(v["data"]["months"].as_array().unwrap().len(), 13);
}

#[test]
fn plot_is_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let input = sample_csv(dir.path());
    let a = dir.path().join("a.svg");
    let b = dir.path().join("b.svg");
    for path in [&a, &b] {
        let o = run(&[
            "plot",
            "--input",
            input.to_str().unwrap(),
            "--parent",
            "normal",
            "--output",
            path.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0);
    }
    let svg = std::fs::read_to_string(&a).unwrap();
    assert_eq!(svg, std::fs::read_to_string(&b).unwrap());
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<circle").count(), 8);
    assert!(svg.contains("class=\"fit\""));
}
