import json

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from peakinterp import catalog
from peakinterp.domain import DomainModel, convexity_audit, to_real
from peakinterp.patch import Grid, patch_audit


def audit_grid(patch):
    h = 0.95 * patch.radius_R / np.sqrt(patch.dim_d)
    steps = 64 if patch.dim_d == 1 else 12
    return Grid([-h] * patch.dim_d, [h] * patch.dim_d, [steps] * patch.dim_d)


@pytest.mark.parametrize("name", ["hopf", "real_circle", "egg_curve", "torus3"])
def test_positive_patches_pass_audits(name):
    p = catalog.make_patch(name)
    assert patch_audit(p, catalog.home_domain(name), audit_grid(p))["passed"]


def test_negative_control_fails_only_tangency():
    p = catalog.nontangential_circle()
    rep = patch_audit(p, catalog.ball(2), audit_grid(p))
    assert (rep["boundary_ok"], rep["immersion_ok"], rep["tangency_ok"]) == (True, True, False)


@pytest.mark.parametrize("params", [{"n": 2}, {"n": 3}])
def test_balls_pass(params):
    assert convexity_audit(catalog.make_domain("ball", **params), 200)["passed"]


@pytest.mark.parametrize("m", [2, 3])
def test_eggs_pass_with_segment_heuristic(m):
    rep = convexity_audit(catalog.egg(m), 1000, seed=0, pair_count=10_000)
    assert rep["passed"] and rep["max_midpoint_rho"] < 0


def test_egg_degenerate_locus(egg2):
    rep = convexity_audit(egg2, 1000, seed=0)
    # the minimum of the boundary form is attained next to z2 = 0
    at = np.array(rep["min_form_eigenvalue_at"])
    assert np.hypot(at[2], at[3]) < 0.2


@given(st.floats(-0.9, 0.9))
def test_egg_curve_is_on_boundary_to_rounding(u):
    z = catalog.egg_curve().eval(np.array([u]))
    assert abs(catalog.egg(2).rho(to_real(z))) <= 4 * np.finfo(float).eps


def test_egg_curve_hessian_formula():
    u = np.array([0.0, 0.5])
    np.testing.assert_allclose(catalog.egg_curve_H(u), [0.0, 3 + 8 / 64 / (1 - 1 / 16)])


@pytest.mark.parametrize("bad", [("ball", {"n": 1}), ("egg", {"m": 1}), ("egg", {"m": 2.5}), ("cube", {})])
def test_unsupported_domains(bad):
    with pytest.raises(ValueError):
        catalog.make_domain(bad[0], **bad[1])


def test_unsupported_patches():
    with pytest.raises(ValueError):
        catalog.make_patch("helix")
    with pytest.raises(ValueError):
        catalog.make_patch("egg_curve", R=0.95)


def test_entries_serialize():
    entries = catalog.list_entries()
    json.dumps(entries)
    names = {e["name"] for e in entries}
    assert set(catalog.PATCHES) | set(catalog.DOMAINS) == names
    for e in entries:
        if e["kind"] == "domain":
            dom = catalog.make_domain(e["name"], **e["params"])
            back = DomainModel.from_dict(json.loads(json.dumps(dom.to_dict())))
            assert back.rho == dom.rho


def test_reference_values_match():
    ref = {e["name"]: e["reference"] for e in catalog.list_entries()}
    assert ref["hopf"]["G"] == pytest.approx(np.sqrt(2) * np.pi)
    assert ref["torus3"]["frak_F"] == pytest.approx(4 / 3)
