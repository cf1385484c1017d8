import importlib
import json

import numpy as np
import pytest

from tripledeck.cli import RunConfig, main, read_config_file
from tripledeck.criterion import MarginalCriterionError

cli = importlib.import_module("tripledeck.cli")


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_curve_couette_format(tmp_path):
    assert run(tmp_path, "curve", "--profile", "couette", "--epsilon", "0.1", "--samples", "20") == 0
    text = (tmp_path / "couette-offset1.txt").read_bytes()
    assert b"\r" not in text and text.endswith(b"\n")
    for line in text.decode().splitlines():
        re_, im_ = line.split(" ")
        assert abs(float(re_) + 1) <= 1e-10 and abs(float(im_)) <= 1e-10
        assert re_ == "%.12e" % float(re_)
    summary = json.loads((tmp_path / "couette-curve.json").read_text())
    assert summary["curves"][0]["net"] == 0
    assert len(summary["provenance"]["config_hash"]) == 16


def test_curve_examples(tmp_path):
    assert run(tmp_path, "curve", "--profile", "example1", "--epsilon", "0.1", "--samples", "200") == 0
    assert run(tmp_path, "curve", "--profile", "example2", "--epsilon", "0.1", "0.05", "--samples", "200") == 0
    ex1 = json.loads((tmp_path / "example1-curve.json").read_text())
    ex2 = json.loads((tmp_path / "example2-curve.json").read_text())
    assert ex1["curves"][0]["from_below"] == ex1["curves"][0]["from_above"] == 0
    assert [abs(c["net"]) for c in ex2["curves"]] == [1, 1]
    data = np.loadtxt(tmp_path / "example2-offset2.txt")
    assert data.shape[1] == 2 and data.shape[0] >= 200


def test_determinism(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    args = ["curve", "--profile", "example1", "--epsilon", "0.1", "--samples", "60", "--seed", "7"]
    assert main([*args, "--out", str(a)]) == 0
    assert main([*args, "--out", str(b)]) == 0
    for name in ("example1-offset1.txt", "example1-curve.json"):
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_analyze_verdicts(tmp_path):
    assert run(tmp_path, "analyze", "--profile", "couette") == 0
    assert run(tmp_path, "analyze", "--profile", "example1") == 0
    assert run(tmp_path, "analyze", "--profile", "example2", "--k", "100", "1000") == 0
    c = json.loads((tmp_path / "couette-verdict.json").read_text())
    e1 = json.loads((tmp_path / "example1-verdict.json").read_text())
    e2 = json.loads((tmp_path / "example2-verdict.json").read_text())
    assert not c["verdict"]["unstable"] and c["roots"] == []
    assert not e1["verdict"]["unstable"] and "sigma_m_estimate" not in e1
    assert e2["verdict"]["unstable"] and len(e2["roots"]) >= 1
    assert e2["verdict"]["edge_crossings_match_g_zeros"]
    assert e2["sigma_m_estimate"] > 0
    assert e2["sigma_m_estimate"] == min(t["mu_k"][1] for t in e2["mu_k_track"])


def test_couette_check(tmp_path):
    assert run(tmp_path, "couette-check", "--k", "100", "1000", "10000") == 0
    rep = json.loads((tmp_path / "couette-check.json").read_text())
    assert rep["verdict"] == "no unbounded growth rates"
    ids = rep["airy_identities"]
    assert ids["ratio"] == pytest.approx(ids["3^(-2/3) Gamma(1/3)"], rel=1e-8)
    assert all(z["abs_arg_over_pi"] > 5 / 6 for z in rep["anti_zeros"])


def test_convergence_and_finite_k(tmp_path):
    mu = "2.6200379348926957+0.6767105386017798j"
    assert run(tmp_path, "convergence", "--profile", "example2", "--mu", mu, "--k", "100", "1000", "10000") == 0
    rec = json.loads((tmp_path / "example2-convergence.json").read_text())
    assert rec["eventually_decreasing"] and rec["fitted_slope"] < 0
    assert np.loadtxt(tmp_path / "example2-convergence.txt").shape == (3, 2)
    assert run(tmp_path, "finite-k", "--profile", "example2", "--mu", mu, "--k", "1000") == 0
    tab = np.loadtxt(tmp_path / "example2-finitek-k1000.txt")
    assert tab.shape[1] == 3 and tab[0, 0] == 0.0


def test_convergence_needs_unstable_profile(tmp_path):
    assert run(tmp_path, "convergence", "--profile", "example1", "--k", "100") == 4


def test_exit_codes(tmp_path, monkeypatch):
    assert run(tmp_path, "curve", "--profile", "bogus") == 4
    assert run(tmp_path, "curve", "--epsilon", "0.01", "0.1") == 4
    assert run(tmp_path, "curve", "--samples", "1") == 4
    assert main(["nonsense"]) == 4
    assert run(tmp_path, "finite-k", "--profile", "example2", "--k", "1") == 4

    def marginal(*a, **k):
        raise MarginalCriterionError("PV value at a zero of g is within tolerance of 0")

    monkeypatch.setattr(cli, "n_pm_from_g", marginal)
    assert run(tmp_path, "analyze", "--profile", "example1") == 2

    def broken(*a, **k):
        raise ArithmeticError("quadrature diverged")

    monkeypatch.setattr(cli, "sample_boundary_curve", broken)
    assert run(tmp_path, "curve", "--profile", "example1") == 3


def test_unwritable_output(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["curve", "--profile", "couette", "--out", str(blocker / "sub")]) == 4


def test_config_file_overrides_flags(tmp_path):
    cfgfile = tmp_path / "run.cfg"
    cfgfile.write_text("# test\nprofile = couette\nepsilon = 0.2, 0.1\nsamples = 10\n")
    assert read_config_file(str(cfgfile)) == {"profile": "couette", "epsilon": "0.2, 0.1", "samples": "10"}
    assert run(tmp_path, "curve", "--profile", "example2", "--config", str(cfgfile)) == 0
    assert (tmp_path / "couette-offset2.txt").exists()
    assert not (tmp_path / "example2-offset1.txt").exists()
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = blue\n")
    assert run(tmp_path, "curve", "--config", str(bad)) == 4


def test_config_hash_tracks_config():
    a, b = RunConfig(), RunConfig(seed=1)
    assert a.hash == RunConfig().hash != b.hash
