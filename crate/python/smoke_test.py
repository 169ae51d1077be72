"""Smoke test for the ppbench Python extension.

Build the extension first:

    cargo build --release -p ppbench-py

then run `python3 python/smoke_test.py`. The script imports an installed
`ppbench_py` if there is one, otherwise it loads the library cargo just
built from target/release (or target/debug).
"""

import importlib.util
import json
import math
import shutil
import sys
import tempfile
from pathlib import Path

import jsonschema

ROOT = Path(__file__).resolve().parent.parent


def load_extension():
    try:
        import ppbench_py

        return ppbench_py
    except ImportError:
        pass
    for profile in ("release", "debug"):
        for name in ("libppbench_py.so", "libppbench_py.dylib", "ppbench_py.dll"):
            built = ROOT / "target" / profile / name
            if built.exists():
                suffix = ".pyd" if name.endswith(".dll") else ".so"
                staged = Path(tempfile.mkdtemp()) / f"ppbench_py{suffix}"
                shutil.copy(built, staged)
                spec = importlib.util.spec_from_file_location("ppbench_py", staged)
                module = importlib.util.module_from_spec(spec)
                spec.loader.exec_module(module)
                return module
    sys.exit("ppbench_py not found; run `cargo build --release -p ppbench-py` first")


def main():
    pp = load_extension()
    schema = json.loads(pp.report_schema())
    validator = jsonschema.Draft202012Validator(schema)

    p = pp.positions("weibull", 9)
    assert p[4] == 0.5, p
    validator.validate(pp.positions_report("taylor", 10, family="gumbel"))

    means = pp.exact_means("gumbel", 1)
    assert abs(means[0] - 0.5772156649015329) < 1e-8, means
    means = pp.exact_means("normal", 2)
    assert abs(means[0] + 1 / math.sqrt(math.pi)) < 1e-8, means

    assert pp.dse("normal", 10, "taylor") < pp.dse("normal", 10, "weibull")

    sample = [3.1, 2.2, 5.4, 4.0, 2.9, 3.3, 2.7, 6.1]
    for method in ("ols", "gls", "mle"):
        fit = pp.fit(sample, family="gumbel", method=method)
        assert fit.scale > 0, fit
        validator.validate(fit.report())
    fit = pp.fit(sample, family="normal")
    assert fit.quantile(100) > fit.quantile(10) > fit.location
    svg = pp.plot_svg(fit, title="sample")
    assert svg.startswith("<svg") and svg.count("<circle") == len(sample)
    assert svg == pp.plot_svg(fit, title="sample")

    try:
        pp.fit([1.0, 1.0, 1.0, 1.0], family="normal")
    except (ValueError, RuntimeError):
        pass
    else:
        raise AssertionError("constant sample should not fit")

    report = pp.run_benchmark("gumbel", 5, replicates=300, seed=7, formulas=["weibull", "taylor"])
    validator.validate(report)
    again = pp.run_benchmark("gumbel", 5, replicates=300, seed=7, formulas=["weibull", "taylor"])
    assert report == again
    ids = [r["candidate"] for r in report["data"]["results"]]
    assert ids == ["weibull", "taylor-gumbel-k4", "mle"], ids

    gof = pp.mad([0.3, -1.2, 0.8, 0.1, -0.4, 1.5, -0.9, 0.6, -0.1, 0.2])
    validator.validate(gof)
    assert gof["data"]["result"]["comparison"] in ("pass5pct", "pass2_5pct", "fail")

    study = pp.case_study(months=["I", "II"])
    validator.validate(study)
    months = study["data"]["months"]
    assert [m["month"] for m in months] == ["I", "II"]
    assert months[0]["used"] == 42

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
