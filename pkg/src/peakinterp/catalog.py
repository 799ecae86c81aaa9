"""Reference domains and patches with closed-form data."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .domain import DomainModel
from .patch import PatchModel, subpatch
from .polynomial import Polynomial

SQ2 = np.sqrt(2.0)
SQ3 = np.sqrt(3.0)


def _abs2(j: int, nvars: int) -> Polynomial:
    x = Polynomial.variable(2 * j, nvars)
    y = Polynomial.variable(2 * j + 1, nvars)
    return x * x + y * y


def ball(n: int = 2) -> DomainModel:
    """Unit ball ``|z|^2 - 1 < 0`` in C^n."""
    if int(n) != n or n < 2:
        raise ValueError("ball needs n >= 2")
    n = int(n)
    N = 2 * n
    rho = sum((_abs2(j, N) for j in range(1, n)), _abs2(0, N)) - 1.0
    return DomainModel(rho, n, np.zeros(N), 1.5, name=f"ball({n})")


def egg(m: int = 2) -> DomainModel:
    """Egg domain ``|z1|^2 + |z2|^(2m) - 1 < 0`` in C^2."""
    if int(m) != m or m < 2:
        raise ValueError("egg needs m >= 2")
    m = int(m)
    rho = _abs2(0, 4) + _abs2(1, 4) ** m - 1.0
    return DomainModel(rho, 2, np.zeros(4), 2.0, name=f"egg({m})")


def indefinite_control() -> DomainModel:
    """``x1^2 + y1^2 + x2^2 - y2^2 - 1``: indefinite Hessian, fails the convexity audit."""
    v = [Polynomial.variable(i, 4) for i in range(4)]
    rho = v[0] * v[0] + v[1] * v[1] + v[2] * v[2] - v[3] * v[3] - 1.0
    return DomainModel(rho, 2, np.zeros(4), 3.0, name="indefinite_control")


DOMAINS = {"ball": ball, "egg": egg, "indefinite_control": indefinite_control}


def make_domain(name: str, **params) -> DomainModel:
    try:
        builder = DOMAINS[name]
    except KeyError:
        raise ValueError(f"unknown catalog domain {name!r}") from None
    return builder(**params)


# -- patches ------------------------------------------------------------------

def _t(x):
    x = np.asarray(x, dtype=float)
    return x[..., 0]


def hopf(R: float = np.pi) -> PatchModel:
    """``t -> (e^{it}, e^{-it}) / sqrt 2`` on the unit sphere in C^2."""

    def ev(x):
        e = np.exp(1j * _t(x))
        return np.stack([e, np.conj(e)], axis=-1) / SQ2

    def jac(x):
        e = np.exp(1j * _t(x))
        return np.stack([1j * e, -1j * np.conj(e)], axis=-1)[..., None] / SQ2

    def sec(x):
        e = np.exp(1j * _t(x))
        return np.stack([-e, -np.conj(e)], axis=-1)[..., None, None] / SQ2

    return PatchModel(1, float(R), ev, jac, sec, 2, "hopf", {"R": float(R)})


def real_circle(R: float = np.pi) -> PatchModel:
    """``t -> (cos t, sin t)`` on the unit sphere in C^2."""

    def ev(x):
        t = _t(x)
        return np.stack([np.cos(t), np.sin(t)], axis=-1).astype(complex)

    def jac(x):
        t = _t(x)
        return np.stack([-np.sin(t), np.cos(t)], axis=-1)[..., None].astype(complex)

    def sec(x):
        t = _t(x)
        return np.stack([-np.cos(t), -np.sin(t)], axis=-1)[..., None, None].astype(complex)

    return PatchModel(1, float(R), ev, jac, sec, 2, "real_circle", {"R": float(R)})


def egg_curve(R: float = 0.9) -> PatchModel:
    """``u -> (sqrt(1 - u^4), u)`` on the boundary of egg(2)."""
    if not 0 < R <= 0.9:
        raise ValueError("egg_curve radius must lie in (0, 0.9]")

    def ev(x):
        u = _t(x)
        return np.stack([np.sqrt(1 - u**4), u], axis=-1).astype(complex)

    def jac(x):
        u = _t(x)
        s = np.sqrt(1 - u**4)
        return np.stack([-2 * u**3 / s, np.ones_like(u)], axis=-1)[..., None].astype(complex)

    def sec(x):
        u = _t(x)
        w = 1 - u**4
        d2 = -6 * u**2 / np.sqrt(w) - 4 * u**6 / w**1.5
        return np.stack([d2, np.zeros_like(u)], axis=-1)[..., None, None].astype(complex)

    return PatchModel(1, float(R), ev, jac, sec, 2, "egg_curve", {"R": float(R)})


def torus3(R: float = np.pi) -> PatchModel:
    """``(s, t) -> (e^{is}, e^{it}, e^{-i(s+t)}) / sqrt 3`` on the unit sphere in C^3."""

    def parts(x):
        x = np.asarray(x, dtype=float)
        a = np.exp(1j * x[..., 0])
        b = np.exp(1j * x[..., 1])
        c = np.exp(-1j * (x[..., 0] + x[..., 1]))
        return a, b, c

    def ev(x):
        a, b, c = parts(x)
        return np.stack([a, b, c], axis=-1) / SQ3

    def jac(x):
        a, b, c = parts(x)
        z = np.zeros_like(a)
        ds = np.stack([1j * a, z, -1j * c], axis=-1)
        dt = np.stack([z, 1j * b, -1j * c], axis=-1)
        return np.stack([ds, dt], axis=-1) / SQ3

    def sec(x):
        a, b, c = parts(x)
        z = np.zeros_like(a)
        ss = np.stack([-a, z, -c], axis=-1)
        st = np.stack([z, z, -c], axis=-1)
        tt = np.stack([z, -b, -c], axis=-1)
        row_s = np.stack([ss, st], axis=-1)
        row_t = np.stack([st, tt], axis=-1)
        return np.stack([row_s, row_t], axis=-2) / SQ3

    return PatchModel(2, float(R), ev, jac, sec, 3, "torus3", {"R": float(R)})


def nontangential_circle(R: float = np.pi) -> PatchModel:
    """``t -> (e^{it}, 0)``: lies on the sphere but is not complex-tangential."""

    def ev(x):
        e = np.exp(1j * _t(x))
        return np.stack([e, np.zeros_like(e)], axis=-1)

    def jac(x):
        e = np.exp(1j * _t(x))
        return np.stack([1j * e, np.zeros_like(e)], axis=-1)[..., None]

    def sec(x):
        e = np.exp(1j * _t(x))
        return np.stack([-e, np.zeros_like(e)], axis=-1)[..., None, None]

    return PatchModel(1, float(R), ev, jac, sec, 2, "nontangential_circle", {"R": float(R)})


PATCHES = {
    "hopf": hopf,
    "real_circle": real_circle,
    "egg_curve": egg_curve,
    "torus3": torus3,
    "nontangential_circle": nontangential_circle,
}

HOME_DOMAIN = {
    "hopf": ("ball", {"n": 2}),
    "real_circle": ("ball", {"n": 2}),
    "egg_curve": ("egg", {"m": 2}),
    "torus3": ("ball", {"n": 3}),
    "nontangential_circle": ("ball", {"n": 2}),
}


def make_patch(name: str, **params) -> PatchModel:
    try:
        builder = PATCHES[name]
    except KeyError:
        raise ValueError(f"unknown catalog patch {name!r}") from None
    return builder(**params)


def home_domain(patch_name: str) -> DomainModel:
    dname, dparams = HOME_DOMAIN[patch_name]
    return make_domain(dname, **dparams)


def egg_subpatch(center: float = 0.3, radius: float = 0.2) -> PatchModel:
    """Nondegenerate piece of the egg curve, recentered at ``center``."""
    return subpatch(egg_curve(), [center], radius, name=f"egg_curve@{center}")


def egg_curve_H(u):
    """Closed-form pull-back Hessian of the egg curve."""
    u = np.asarray(u, dtype=float)
    return 12 * u**2 + 8 * u**6 / (1 - u**4)


@dataclass(frozen=True)
class CatalogEntry:
    name: str
    kind: str  # "domain" or "patch"
    params: dict
    reference: dict = field(default_factory=dict)
    notes: str = ""


ENTRIES = (
    CatalogEntry("ball", "domain", {"n": 2}, {"min_form_eigenvalue": 2.0},
                 "strictly convex; second fundamental form is twice the identity"),
    CatalogEntry("egg", "domain", {"m": 2}, {"degenerate_locus": "z2 = 0"},
                 "weakly convex; curvature degenerates exactly where z2 = 0"),
    CatalogEntry("indefinite_control", "domain", {}, {"hessian": "diag(2, 2, 2, -2)"},
                 "negative control: fails the convexity audit"),
    CatalogEntry("hopf", "patch", {"R": float(np.pi)},
                 {"domain": "ball(2)", "H": 2.0, "G": float(SQ2 * np.pi), "tangency_residual": 0.0},
                 "complex-tangential great circle"),
    CatalogEntry("real_circle", "patch", {"R": float(np.pi)},
                 {"domain": "ball(2)", "H": 2.0, "tangency_residual": 0.0},
                 "totally real great circle, complex-tangential"),
    CatalogEntry("egg_curve", "patch", {"R": 0.9},
                 {"domain": "egg(2)", "H": "12u^2 + 8u^6/(1-u^4)", "tangency_residual": 0.0},
                 "degenerate at u = 0"),
    CatalogEntry("torus3", "patch", {"R": float(np.pi)},
                 {"domain": "ball(3)", "H": [[4 / 3, 2 / 3], [2 / 3, 4 / 3]], "frak_F": 4 / 3,
                  "G": float(2 * np.pi * SQ3), "tangency_residual": 0.0},
                 "Lagrangian torus, complex-tangential"),
    CatalogEntry("nontangential_circle", "patch", {"R": float(np.pi)},
                 {"domain": "ball(2)", "tangency_residual": 1.0},
                 "negative control: fails the tangency audit"),
)


def list_entries() -> list:
    return [
        {"name": e.name, "kind": e.kind, "params": e.params, "reference": e.reference, "notes": e.notes}
        for e in ENTRIES
    ]
