import json
import math

import numpy as np
import pytest
from scipy import stats

from bir.cli import EXIT_INPUT, EXIT_NOT_CONVERGED, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# fit


def test_fit_all_text_report(capsys):
    code, out, _ = run(capsys, "fit", "--data", "builtin:guinea", "--model", "all")
    assert code == EXIT_OK
    assert "seed=0" in out and "n=72" in out
    rows = {line.split()[0]: line.split() for line in out.splitlines() if line[:1].isalpha() and not line.startswith("rank")}
    assert set(rows) >= {"BIR", "EIR", "IR", "R", "GR"}
    assert float(rows["BIR"][2]) == pytest.approx(805.83, abs=0.2)
    assert "rank by AIC: BIR <" in out


def test_fit_json_schema(capsys):
    code, out, _ = run(capsys, "fit", "--data", "builtin:guinea", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["seed"] == 0 and doc["n_obs"] == 72
    assert [f["family"] for f in doc["fits"]] == ["bir", "eir", "ir", "rayleigh", "gr"]
    for f in doc["fits"]:
        for key in ("family", "estimates", "std_errors", "loglik", "aic", "bic", "caic", "hqic", "converged"):
            assert key in f
    aics = {f["family"]: f["aic"] for f in doc["fits"]}
    assert min(aics, key=aics.get) == "bir"
    assert doc["ranking"]["aic"][0] == "BIR"
    assert sorted(doc["ranking"]["aic"]) == sorted(["BIR", "EIR", "IR", "R", "GR"])


def test_fit_single_family(capsys):
    code, out, _ = run(capsys, "fit", "--data", "builtin:guinea", "--model", "ir", "--format", "json")
    assert code == EXIT_OK
    (fit,) = json.loads(out)["fits"]
    assert fit["estimates"][0] == pytest.approx(2187.88, abs=0.5)


def test_fit_input_errors(capsys, tmp_path):
    small = tmp_path / "small.txt"
    small.write_text("1\n2\n3\n")
    code, _, err = run(capsys, "fit", "--data", str(small), "--model", "bir")
    assert code == EXIT_INPUT and "insufficient observations" in err
    bad = tmp_path / "bad.txt"
    bad.write_text("4\n5\n-2\n7\n")
    code, _, err = run(capsys, "fit", "--data", str(bad))
    assert code == EXIT_INPUT and ":3:" in err
    code, _, _ = run(capsys, "fit", "--data", str(tmp_path / "nope.txt"))
    assert code == EXIT_INPUT
    code, _, _ = run(capsys, "fit", "--data", "builtin:guinea", "--model", "weibull")
    assert code == EXIT_INPUT


def test_fit_reports_non_convergence(capsys, tmp_path):
    flat = tmp_path / "flat.txt"
    flat.write_text("5 5 5 5 5 5\n")
    code, out, _ = run(capsys, "fit", "--data", str(flat), "--model", "bir")
    assert code == EXIT_NOT_CONVERGED
    assert "ill-posed" in out


def test_sample_then_fit_round_trip(capsys, tmp_path):
    path = tmp_path / "draws.txt"
    assert run(capsys, "sample", "-a", "2", "-b", "2", "--theta", "1", "-n", "10000", "--seed", "5", "--out", str(path))[0] == EXIT_OK
    code, out, _ = run(capsys, "fit", "--data", str(path), "--model", "bir", "--format", "json")
    assert code == EXIT_OK
    (fit,) = json.loads(out)["fits"]
    for est, se, truth in zip(fit["estimates"], fit["std_errors"], (2.0, 2.0, 1.0)):
        assert abs(est - truth) <= 3 * se


# eval


def test_eval_points(capsys):
    code, out, _ = run(capsys, "eval", "--fn", "cdf", "-a", "1", "-b", "1", "--theta", "1", "--points", "1")
    assert code == EXIT_OK
    x, v = out.split()
    assert float(x) == 1.0 and float(v) == pytest.approx(0.3678794412, abs=1e-10)


def test_eval_hazard_tail(capsys):
    code, out, _ = run(capsys, "eval", "--fn", "hazard", "-a", "1.5", "-b", "2", "--theta", "1", "--points", "1000")
    assert code == EXIT_OK
    assert float(out.split()[1]) == pytest.approx(0.004, rel=0.01)


def test_eval_quantile_endpoints_rejected(capsys):
    code, _, err = run(capsys, "eval", "--fn", "quantile", "-a", "1", "-b", "1", "--theta", "1", "--points", "0,1")
    assert code == EXIT_INPUT
    assert "quantile is undefined at u = 0, 1" in err


def test_eval_grid_and_other_families(capsys):
    code, out, _ = run(capsys, "eval", "--fn", "pdf", "-a", "2", "-b", "3", "--theta", "0.5", "--grid", "0.1,5,50")
    assert code == EXIT_OK
    xs = [float(line.split()[0]) for line in out.splitlines()]
    assert len(xs) == 50 and xs[0] == pytest.approx(0.1) and xs[-1] == pytest.approx(5.0)
    code, out, _ = run(capsys, "eval", "--fn", "survival", "--model", "r", "--sigma", "2", "--points", "2", "--format", "json")
    assert code == EXIT_OK
    assert json.loads(out)["values"][0][1] == pytest.approx(math.exp(-0.5), rel=1e-14)
    code, _, err = run(capsys, "eval", "--fn", "pdf", "--model", "gr", "--alpha", "1", "--points", "1")
    assert code == EXIT_INPUT and "lambda" in err


def test_eval_rejects_bad_parameters(capsys):
    code, _, _ = run(capsys, "eval", "--fn", "pdf", "-a", "-1", "-b", "1", "--theta", "1", "--points", "1")
    assert code == EXIT_INPUT
    code, _, err = run(capsys, "eval", "--fn", "pdf", "-a", "1", "-b", "1", "--theta", "1", "--points", "1,-3")
    assert code == EXIT_INPUT and "-3" in err


# props


def test_props_report(capsys):
    code, out, _ = run(capsys, "props", "-a", "1", "-b", "1", "--theta", "1", "--format", "json")
    assert code == EXIT_OK
    doc = json.loads(out)
    assert doc["mean"] == pytest.approx(math.sqrt(math.pi), abs=1e-10)
    assert doc["mode"] == pytest.approx(math.sqrt(2 / 3), abs=1e-10)
    assert doc["moments"]["2"].startswith("does not exist")
    assert doc["shannon"] == pytest.approx(doc["shannon_quadrature"], rel=1e-6)
    assert doc["shannon_consistent"] is True


def test_props_text(capsys):
    code, out, _ = run(capsys, "props", "-a", "2", "-b", "0.6", "--theta", "3", "--moments=-2,1", "--renyi", "0.5,3")
    assert code == EXIT_OK
    assert "E[X^1]" in out and "does not exist" not in out.split("E[X^1]")[1].splitlines()[0]
    assert "renyi[0.5]" in out and "renyi[3]" in out


# sample


def test_sample_is_reproducible(capsys, tmp_path):
    one, two = tmp_path / "one.txt", tmp_path / "two.txt"
    for path in (one, two):
        code, _, err = run(capsys, "sample", "-a", "1.5", "-b", "0.7", "--theta", "2", "-n", "500", "--seed", "9", "--out", str(path))
        assert code == EXIT_OK and "seed 9" in err
    assert one.read_bytes() == two.read_bytes()
    assert len(one.read_text().splitlines()) == 500


def test_sample_matches_inverse_rayleigh_cdf(capsys):
    code, out, err = run(capsys, "sample", "-a", "1", "-b", "1", "--theta", "1", "-n", "100000")
    assert code == EXIT_OK and "seed 0" in err
    x = np.array(out.split(), dtype=float)
    assert stats.kstest(x, lambda t: np.exp(-1.0 / t**2)).pvalue > 0.01


def test_sample_usage_errors(capsys, tmp_path):
    assert run(capsys, "sample", "-a", "1", "-b", "1", "--theta", "1", "-n", "0")[0] == EXIT_INPUT
    target = tmp_path / "missing_dir" / "out.txt"
    assert run(capsys, "sample", "-a", "1", "-b", "1", "--theta", "1", "-n", "3", "--out", str(target))[0] == EXIT_INPUT
    assert run(capsys)[0] == EXIT_INPUT
