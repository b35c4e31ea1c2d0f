import io as _io
import json
import math

import numpy as np
import pytest

from balanced_frames.cli import run
from balanced_frames.io import save_frame


def call(*argv):
    out = _io.StringIO()
    code = run(list(argv), stdout=out)
    text = out.getvalue()
    return code, (json.loads(text) if text.strip().startswith("{") else text)


@pytest.fixture
def e_path(tmp_path, e_frame):
    p = tmp_path / "e.json"
    save_frame(e_frame, p)
    return str(p)


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(p)


def test_build_roots(tmp_path):
    code, out = call("build", "roots-of-unity", "5")
    assert code == 0 and out["d"] == 2 and out["K"] == 5
    T = np.array(out["columns"]).T
    np.testing.assert_allclose(T.sum(axis=1), 0, atol=1e-14)


@pytest.mark.parametrize(
    "argv",
    [
        ["harmonic", "5", "1", "4"],
        ["hadamard", "8", "1", "2", "4"],
        ["cross", "3"],
        ["eutactic-star", "3"],
        ["partition", "1", "2", "3"],
        ["simplex", "4"],
    ],
)
def test_build_families_check(tmp_path, argv):
    code, out = call("build", *argv)
    assert code == 0
    path = write(tmp_path, "f.json", out)
    code, rep = call("check", path)
    assert code == 0 and rep["balanced"]


def test_build_check_buntf(tmp_path):
    _, out = call("build", "cross", "3")
    _, rep = call("check", write(tmp_path, "c.json", out))
    assert rep["buntf"] and rep["tight_constant"] == pytest.approx(2.0)
    assert all(rep["equivalences"][k] for k in rep["equivalences"] if k != "consistent")


def test_combination_reports_hypotheses(tmp_path):
    _, a = call("build", "roots-of-unity", "3")
    _, b = call("build", "roots-of-unity", "4")
    pa, pb = write(tmp_path, "a.json", a), write(tmp_path, "b.json", b)
    code, out = call("build", "disjoint-union", pa, pb, "--no-strict")
    assert code == 0 and out["valid"] is False
    assert out["hypotheses"]["equal_redundancy"] is False
    code, out = call("build", "disjoint-union", pa, pb)
    assert code == 1 and out["error"]["context"]["failed"] == ["equal_redundancy"]
    code, out = call("build", "disjoint-union", pa, pa)
    assert code == 0 and out["valid"] is True


def test_check_non_balanced(e_path):
    code, rep = call("check", e_path)
    assert code == 0 and rep["balanced"] is False
    assert rep["balance_sum"] == [2.0, 2.0]


def test_report(e_path):
    code, rep = call("report", e_path)
    assert code == 0
    assert rep["nearest_l2_exists"] is True
    assert rep["nearest_l2_distance"] == pytest.approx(8 / 3)


def test_nearest_l2(e_path):
    code, out = call("nearest", e_path, "--norm", "l2")
    assert code == 0 and out["exists"]
    assert out["distance"] == pytest.approx(8 / 3, abs=1e-12)
    np.testing.assert_allclose(np.array(out["frame"]["columns"]), [[1 / 3, -2 / 3], [-2 / 3, 1 / 3], [1 / 3, 1 / 3]], atol=1e-12)


def test_nearest_l1_weights(tmp_path, e_path):
    w = write(tmp_path, "w.json", [0.2, 0.5, 0.3])
    code, out = call("nearest", e_path, "--norm", "l1", "--weights", w)
    assert code == 0 and out["distance"] == pytest.approx(2 * math.sqrt(2))
    assert out["weights"] == pytest.approx([0.2, 0.5, 0.3])


def test_nearest_not_exists(tmp_path):
    _, s = call("build", "simplex", "3")
    _, comp = call("complement", write(tmp_path, "s.json", s))
    code, out = call("nearest", write(tmp_path, "c.json", comp))
    assert code == 0 and out["exists"] is False and out["reason"] == "e_in_analysis_range"


def test_dual_operations(tmp_path):
    _, r = call("build", "roots-of-unity", "6")
    path = write(tmp_path, "r.json", r)
    code, can = call("dual", "canonical", path)
    np.testing.assert_allclose(np.array(can["columns"]), np.array(r["columns"]) / 3, atol=1e-15)
    code, samp = call("--seed", "4", "dual", "balanced-sample", path)
    assert code == 0 and samp["seed"] == 4 and samp["rank_R"] <= 3
    code, er = call("dual", "erasure", path, "--index", "2")
    assert code == 0 and er["dual_pair"] and er["frame"]["K"] == 5
    assert call("dual", "erasure", path)[0] == 2
    code, bc = call("dual", "b-complement", path)
    assert code == 1  # roots of unity are not Parseval
    assert bc["error"]["code"]


def test_complement_balanced(tmp_path):
    _, p = call("build", "partition", "1", "2")
    code, out = call("complement", write(tmp_path, "p.json", p), "--balanced")
    assert code == 0 and out["d"] == 1 and out["K"] == 3


def test_simulate_systematic(tmp_path):
    _, r = call("build", "roots-of-unity", "4")
    path = write(tmp_path, "r.json", r)
    code, out = call("simulate", "--frame", path, "--noise", "systematic:c=0.5")
    assert code == 0 and out["reconstruction_error_l2"] < 1e-12
    assert out["coefficient_sum"] == pytest.approx(2.0)
    assert out["detector_verdict"] == "systematic"


def test_simulate_additive_mse(tmp_path):
    _, r = call("build", "roots-of-unity", "4")
    path = write(tmp_path, "r.json", r)
    code, out = call("--seed", "3", "simulate", "--frame", path, "--noise", "additive:mu=0.7,sigma=1", "--trials", "20000")
    assert code == 0 and abs(out["empirical_mse"] - 0.5) <= 4 * out["mse_stderr"]
    code2, out2 = call("--seed", "3", "simulate", "--frame", path, "--noise", "additive:mu=0.7,sigma=1", "--trials", "20000", "--workers", "3")
    assert out2["empirical_mse"] == out["empirical_mse"]


def test_simulate_erasure(tmp_path):
    _, r = call("build", "roots-of-unity", "5")
    path = write(tmp_path, "r.json", r)
    code, out = call("simulate", "--frame", path, "--noise", "erasure:3")
    assert code == 0 and out["reconstruction_error_l2"] < 1e-12
    assert out["detector_verdict"] == "signal_dependent"


def test_csv_output():
    code, text = call("--format", "csv", "build", "roots-of-unity", "3")
    assert code == 0 and len(text.splitlines()) == 3


def test_csv_rejected_for_reports(e_path):
    assert call("--format", "csv", "check", e_path)[0] == 2


def test_usage_errors(e_path):
    assert call()[0] == 2
    assert call("build", "nonsense")[0] == 2
    assert call("--tol", "-1", "check", e_path)[0] == 2


def test_frame_errors(tmp_path):
    code, out = call("check", str(tmp_path / "missing.json"))
    assert code == 1 and "cannot read" in out["error"]["message"]
    code, out = call("check", write(tmp_path, "bad.json", "{nope"))
    assert code == 1 and out["error"]["code"]
    code, out = call("build", "roots-of-unity", "2")
    assert code == 1


def test_stdin(monkeypatch, roots3):
    from balanced_frames.io import dumps

    monkeypatch.setattr("sys.stdin", _io.StringIO(dumps(roots3)))
    code, rep = call("check", "-")
    assert code == 0 and rep["buntf"]
