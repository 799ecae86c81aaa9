import csv
import json
import math

import numpy as np
import pytest
from scipy import integrate

from peakinterp.cli import main
from peakinterp.peak import BumpFunction

HOPF = {"patch": {"catalog": "hopf"}, "domain": {"catalog": "ball", "params": {"n": 2}},
        "grid": {"lo": [-3.0], "hi": [3.0], "steps": [100]}}


def write_config(tmp_path, cfg, name="run.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def read_csv(path):
    lines = [l for l in path.read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


@pytest.fixture(scope="module")
def hopf_peak_runs(tmp_path_factory):
    base = tmp_path_factory.mktemp("peak")
    cfg = write_config(base, HOPF)
    codes = [main(["peak", "--config", cfg, "--out", str(base / f"run{k}"), "--threads", str(1 + 2 * k)])
             for k in range(2)]
    return codes, base / "run0", base / "run1"


def test_check_passes_for_hopf(tmp_path):
    assert main(["check", "--config", write_config(tmp_path, HOPF), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "check.json").read_text())
    assert rep["passed"] and rep["config_sha256"]


def test_check_flags_tangency(tmp_path, capsys):
    cfg = dict(HOPF, patch={"catalog": "nontangential_circle"})
    assert main(["check", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)]) == 1
    assert "tangency residual 1" in capsys.readouterr().err
    rep = json.loads((tmp_path / "check.json").read_text())
    assert rep["failures"] == ["tangency"]


@pytest.mark.parametrize("text", ["{not json", "[]", '{"patch": {"catalog": "nope"}}',
                                  '{"patch": {"catalog": "hopf"}, "deltas": [-1]}',
                                  '{"patch": {"catalog": "hopf"}, "colour": 1}',
                                  '{"patch": {"catalog": "hopf"}, "grid": {"lo": [1], "hi": [0], "steps": [2]}}'])
def test_config_errors_exit_two(tmp_path, text):
    path = tmp_path / "bad.json"
    path.write_text(text)
    assert main(["check", "--config", str(path), "--out", str(tmp_path)]) == 2


def test_usage_errors_exit_two(tmp_path):
    assert main(["frobnicate"]) == 2
    assert main(["check"]) == 2
    assert main(["check", "--config", str(tmp_path / "missing.json")]) == 2


def test_inline_domain(tmp_path):
    mono = [[2, 0, 0, 0, 1.0], [0, 2, 0, 0, 1.0], [0, 0, 2, 0, 1.0], [0, 0, 0, 2, 1.0], [0, 0, 0, 0, -1.0]]
    cfg = dict(HOPF, domain={"name": "sphere", "ambient_n": 2, "monomials": mono,
                             "interior_witness": [0, 0, 0, 0], "bounding_radius": 1.5})
    assert main(["check", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)]) == 0


@pytest.mark.parametrize("patch,domain,grid,counts", [
    ("egg_curve", {"catalog": "egg", "params": {"m": 2}}, {"lo": [-0.85], "hi": [0.85], "steps": [400]},
     {"rank0": 1, "rank1": 2}),
    ("hopf", {"catalog": "ball", "params": {"n": 2}}, {"lo": [-3], "hi": [3], "steps": [200]}, {"rank1": 1}),
    ("torus3", {"catalog": "ball", "params": {"n": 3}}, {"lo": [-2, -2], "hi": [2, 2], "steps": [16, 16]},
     {"rank2": 1}),
])
def test_stratify(tmp_path, patch, domain, grid, counts):
    cfg = {"patch": {"catalog": patch}, "domain": domain, "grid": grid, "tolerances": {"rank": 1e-6}}
    assert main(["stratify", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "stratify.json").read_text())
    assert rep["component_counts"] == counts
    rows = read_csv(tmp_path / "stratify.csv")
    assert len(rows) == int(np.prod(grid["steps"]))
    assert set(rows[0]) >= {"c0", "label", "min_eigenvalue"}


def test_stratify_refuses_failed_audit(tmp_path):
    cfg = dict(HOPF, patch={"catalog": "nontangential_circle"})
    assert main(["stratify", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)]) == 1


def test_peak_hopf(hopf_peak_runs):
    codes, run, _ = hopf_peak_runs
    assert codes == [0, 0]
    const = json.loads((run / "constants.json").read_text())
    assert const["G_at_origin"] == pytest.approx(math.sqrt(2) * math.pi, abs=1e-6)
    # z_off defaults to the origin
    rows = read_csv(run / "limit_audit_off.csv")
    r = const["constants"]["varrho"]
    bump = BumpFunction(r)
    integral = integrate.quad(lambda x: bump(np.array([[x]]))[0].real, -r, r, epsabs=1e-14)[0]
    for row in rows:
        d = float(row["delta"])
        ref = d / (d * d + 1) / (math.sqrt(2) * math.pi) * integral
        assert float(row["re_h"]) == pytest.approx(ref, abs=1e-6)
    assert [float(r["delta"]) for r in rows] == [0.2, 0.1, 0.05, 0.02]


def test_peak_outputs_are_byte_identical(hopf_peak_runs):
    _, a, b = hopf_peak_runs
    names = sorted(p.name for p in a.iterdir())
    assert names == sorted(p.name for p in b.iterdir())
    assert "limit_audit_on.csv" in names
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes()
    head = (a / "limit_audit_on.csv").read_text().splitlines()[:2]
    assert head[0].startswith("# config_sha256=") and head[1] == "# seed=0"


def test_peak_refuses_degenerate_patch(tmp_path, capsys):
    cfg = {"patch": {"catalog": "egg_curve"}, "domain": {"catalog": "egg", "params": {"m": 2}},
           "grid": {"lo": [-0.85], "hi": [0.85], "steps": [170]}}
    assert main(["peak", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)]) == 1
    assert "at x = [0.0]" in capsys.readouterr().out
    rep = json.loads((tmp_path / "peak_precheck.json").read_text())
    assert rep["min_eigenvalue_at"][0] == pytest.approx(0.0, abs=1e-12)


def test_seed_flag_changes_hash(tmp_path):
    cfg = write_config(tmp_path, HOPF)
    main(["check", "--config", cfg, "--out", str(tmp_path / "a")])
    main(["check", "--config", cfg, "--out", str(tmp_path / "b"), "--seed", "7"])
    ha = json.loads((tmp_path / "a" / "check.json").read_text())["config_sha256"]
    hb = json.loads((tmp_path / "b" / "check.json").read_text())["config_sha256"]
    assert ha != hb


def test_catalog_listing(tmp_path, capsys):
    assert main(["catalog", "--out", str(tmp_path)]) == 0
    out = capsys.readouterr().out
    assert "torus3" in out and "egg" in out
    assert (tmp_path / "domains" / "egg.json").exists()


def test_explicit_off_patch_points(tmp_path):
    cfg = dict(HOPF, z_off=[[[0.1, 0.0], [0.0, -0.2]]], z_on=[[0.05]], deltas=[0.2, 0.1],
               samples={"closure": 8, "pairs": 1000})
    assert main(["peak", "--config", write_config(tmp_path, cfg), "--out", str(tmp_path)]) == 0
    rows = read_csv(tmp_path / "limit_audit_off.csv")
    assert [r["z_id"] for r in rows] == ["off0", "off0"]
    bad = dict(HOPF, z_off=[[0.1, 0.2]])
    assert main(["peak", "--config", write_config(tmp_path, bad, "bad.json"), "--out", str(tmp_path)]) == 2
