import json

import numpy as np
import pytest

from statgeo import verify
from statgeo.cli import dumps, main


def _write(tmp_path, doc, name="m.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc))
    return str(p)


def _run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_eval_super_ideal(tmp_path, capsys):
    path = _write(tmp_path, {"type": "super-ideal", "n": 3})
    code, out, _ = _run(capsys, "eval", path, "--point", "0,0,0", "--quantities", "R,meanH,K,g12")
    assert code == 0
    d = json.loads(out)
    assert d["R"] == pytest.approx(1 / 6, abs=1e-9)
    assert d["meanH"] == pytest.approx(1 / np.sqrt(3), abs=1e-9)
    assert d["g12"] == pytest.approx(1 / 9, abs=1e-9)


def test_eval_full_report_has_all_fields(tmp_path, capsys):
    path = _write(tmp_path, {"type": "expressions", "n": 2, "expressions": ["x1*x2", "sin(x1)"]})
    code, out, _ = _run(capsys, "eval", path, "--point", "0.1,0.2")
    d = json.loads(out)
    assert code == 0
    assert {"g", "riemann", "gauss_kronecker_K", "entropy_S"} <= set(d)


def test_eval_linear_K_note(tmp_path, capsys):
    path = _write(tmp_path, {"type": "linear", "a": [[1, 0], [0, 1]]})
    code, out, _ = _run(capsys, "eval", path, "--point", "0.3,0.1", "--quantities", "K")
    assert code == 0
    assert json.loads(out)["note"].startswith("AlwaysZero")


def test_precision_controls_digits(tmp_path, capsys):
    path = _write(tmp_path, {"type": "super-ideal", "n": 3})
    _, out, _ = _run(capsys, "eval", path, "--point", "0,0,0", "--quantities", "R", "--precision", "3")
    assert json.loads(out)["R"] == 0.167


def test_dumps_writes_non_finite_as_null():
    assert json.loads(dumps({"a": float("inf"), "b": [np.nan, 1.0]})) == {"a": None, "b": [None, 1.0]}


@pytest.mark.parametrize(
    "argv, code",
    [
        (["eval", "MISSING", "--point", "0,0"], 1),
        (["eval", "{path}", "--point", "0,0,0"], 1),
        (["eval", "{path}", "--point", "a,b"], 1),
        (["eval", "{path}", "--point", "0,0", "--quantities", "nope"], 1),
        (["eval", "builtin:3a", "--point", "0,0.3,-0.2"], 2),
        (["eval", "builtin:99", "--point", "0"], 1),
        (["sweep", "{path}", "--origin", "0,0"], 1),
    ],
)
def test_error_exit_codes(argv, code, tmp_path, capsys):
    path = _write(tmp_path, {"type": "super-ideal", "n": 2})
    argv = [a.replace("{path}", path) for a in argv]
    got, out, err = _run(capsys, *argv)
    assert got == code
    assert out == "" and err.startswith("statgeo:")


def test_malformed_model_file_reports_path(tmp_path, capsys):
    path = _write(tmp_path, {"type": "linear", "a": [[1, 0], [0, "x"]]})
    code, _, err = _run(capsys, "eval", path, "--point", "0,0")
    assert code == 1 and "$.a[1][1]" in err


def test_sweep_csv(tmp_path, capsys):
    path = _write(tmp_path, {"type": "super-ideal", "n": 2})
    code, out, _ = _run(capsys, "sweep", path, "--origin", "0,0", "--direction", "1,0",
                        "--interval", "-1,1", "--grid", "11", "--quantities", "det_g,K")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "t,x1,x2,det_g,K" and len(lines) == 12


def test_sweep_builtin_marks_kink_with_nan(capsys, monkeypatch):
    monkeypatch.setenv("STATGEO_THREADS", "3")
    code, out, _ = _run(capsys, "sweep", "builtin:1", "--grid", "11", "--quantities", "det_g")
    rows = [l.split(",") for l in out.strip().splitlines()[1:]]
    assert code == 0
    mid = [r for r in rows if float(r[0]) == 0.0]
    assert mid and mid[0][-1] == "nan"


def test_sweep_rejects_tensor_quantity(tmp_path, capsys):
    path = _write(tmp_path, {"type": "super-ideal", "n": 2})
    code, _, err = _run(capsys, "sweep", path, "--origin", "0,0", "--direction", "1,0",
                        "--interval", "0,1", "--quantities", "g")
    assert code == 1 and "g12" in err


def test_tropical_edge(tmp_path, capsys):
    path = _write(tmp_path, {"type": "super-ideal", "n": 2})
    code, out, _ = _run(capsys, "tropical", path, "--point", "1,1")
    d = json.loads(out)
    assert code == 0 and d["point"]["active"] == [1, 2]
    np.testing.assert_allclose(d["tensors"]["g_trop"], [[1.25, 0.25], [0.25, 1.25]])


def test_tropical_mixed_model_needs_double_scaling(tmp_path, capsys):
    doc = {"type": "expressions", "n": 3, "expressions": ["x1 + x2 + x1*x2", "x1 + x3 + x1*x3"]}
    path = _write(tmp_path, doc)
    code, _, err = _run(capsys, "tropical", path, "--point", "1,2,1")
    assert code == 3 and "--double-scaling" in err
    code, out, _ = _run(capsys, "tropical", path, "--point", "1,2,2", "--double-scaling")
    d = json.loads(out)
    assert code == 0 and d["tensors"]["sector"] == "singular" and d["point"]["active"] == [1, 2]


def test_tropical_degree_two_without_double_scaling(tmp_path, capsys):
    path = _write(tmp_path, {"type": "expressions", "n": 2, "expressions": ["x1*x2", "x1^2"]})
    code, _, _ = _run(capsys, "tropical", path, "--point", "1,2")
    assert code == 3


def test_tropical_degenerate_gradient(tmp_path, capsys):
    path = _write(tmp_path, {"type": "expressions", "n": 2, "expressions": ["x1*x2", "x1^2"]})
    code, _, err = _run(capsys, "tropical", path, "--point", "0,0", "--double-scaling")
    assert code == 2


def test_tropical_lambda_sweep_csv(tmp_path, capsys):
    path = _write(tmp_path, {"type": "super-ideal", "n": 3})
    code, out, _ = _run(capsys, "tropical", path, "--point", "0.5,0.1,-1", "--lambda-sweep", "10,20,40")
    lines = out.strip().splitlines()
    assert code == 0 and lines[0] == "lambda,raw,normalized,predicted,gap" and len(lines) == 4
    gaps = [float(l.split(",")[-1]) for l in lines[1:]]
    assert gaps[0] > gaps[1] > gaps[2]


def test_verify_suite(capsys):
    code, out, _ = _run(capsys, "verify", "prop1", "--seed", "3")
    d = json.loads(out)
    assert code == 0 and d["pass"] and d["seed"] == 3


def test_verify_failure_exit_code(capsys, monkeypatch):
    def broken(seed, samples=None):
        return {"suite": "prop1", "pass": False, "checks": [{"check": "forced", "pass": False}]}

    monkeypatch.setitem(verify.SUITES, "prop1", broken)
    code, out, _ = _run(capsys, "verify", "prop1")
    assert code == 4
    assert json.loads(out)["failures"] == ["prop1.forced"]


def test_bad_precision(capsys):
    code, _, _ = _run(capsys, "verify", "prop1", "--precision", "0")
    assert code == 1


def test_negative_vectors_after_options(tmp_path, capsys):
    path = _write(tmp_path, {"type": "super-ideal", "n": 2})
    code, out, _ = _run(capsys, "eval", path, "--point", "-1,-2", "--quantities", "F")
    assert code == 0 and json.loads(out)["F"] == pytest.approx(np.log(np.exp(-1) + np.exp(-2)))


def test_usage_error_is_input_error(capsys):
    code, _, err = _run(capsys, "eval")
    assert code == 1 and "usage" in err


def test_eval_wide_linear_model(tmp_path, capsys):
    path = _write(tmp_path, {"type": "linear", "a": [[1, 2, 0], [0, 1, -1]]})
    code, out, _ = _run(capsys, "eval", path, "--point", "0.1,0.2,0.3", "--quantities", "K")
    d = json.loads(out)
    assert code == 0 and abs(d["K"]) < 1e-12 and d["note"] == "AlwaysZero: n ≥ m"


def test_sweep_constant_model_and_long_grid(tmp_path, capsys):
    path = _write(tmp_path, {"type": "expressions", "n": 1, "expressions": ["1.5"]})
    code, out, _ = _run(capsys, "sweep", path, "--origin", "0", "--direction", "1",
                        "--interval", "0,1", "--grid", "1001", "--quantities", "F,det_g")
    lines = out.strip().splitlines()
    assert code == 0 and len(lines) == 1002
    assert {l.split(",")[2] for l in lines[1:]} == {"1.5"}


def test_sweep_shows_metric_jump_between_adjacent_rows(capsys):
    _, out, _ = _run(capsys, "sweep", "builtin:1", "--interval", "-0.01,0.01", "--grid", "20",
                     "--quantities", "det_g")
    vals = np.array([float(l.split(",")[-1]) for l in out.strip().splitlines()[1:]])
    steps = np.abs(np.diff(vals))
    assert steps.max() > 0.1 and np.sort(steps)[-2] < 0.02
