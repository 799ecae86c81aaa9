"""Parametrized submanifold patches of a domain boundary.

A patch is a map ``gamma : B_d(0; R) -> boundary`` given by vectorized
callables for its values, first and second parameter derivatives.  From it we
build the pull-back of the real Hessian of rho,

    H(x) = dgamma(x)^T  Hess(rho)(gamma(x))  dgamma(x),

and the normalized form ``M(x) = H(x) / 2`` that drives the peak family.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .domain import BoundaryError, DomainModel, dbar_rho, to_real


@dataclass(frozen=True, eq=False)
class PatchModel:
    """Parametrized patch.

    ``eval``, ``jacobian`` and ``second`` take parameter points of shape
    ``(..., d)`` and return arrays of shape ``(..., n)``, ``(..., n, d)`` and
    ``(..., n, d, d)`` respectively (complex).
    """

    dim_d: int
    radius_R: float
    eval: Callable
    jacobian: Callable
    second: Callable
    ambient_n: int
    name: str = "patch"
    params: dict = field(default_factory=dict)

    def __call__(self, x):
        return self.eval(np.asarray(x, dtype=float))

    def in_ball(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.linalg.norm(x, axis=-1) < self.radius_R


def subpatch(patch: PatchModel, center, radius: float, scale: float = 1.0,
             name: str | None = None) -> PatchModel:
    """Patch ``x -> gamma(center + scale * x)`` on ``B_d(0; radius)``."""
    c = np.asarray(center, dtype=float).reshape(patch.dim_d)
    if np.linalg.norm(c) + abs(scale) * radius > patch.radius_R + 1e-15:
        raise ValueError("sub-patch leaves the parameter ball of the parent patch")
    s = float(scale)

    def ev(x):
        return patch.eval(c + s * np.asarray(x, dtype=float))

    def jac(x):
        return s * patch.jacobian(c + s * np.asarray(x, dtype=float))

    def sec(x):
        return s * s * patch.second(c + s * np.asarray(x, dtype=float))

    params = {"parent": patch.name, "parent_params": dict(patch.params),
              "center": c.tolist(), "radius": float(radius), "scale": s}
    return PatchModel(patch.dim_d, float(radius), ev, jac, sec, patch.ambient_n,
                      name or f"{patch.name}@{c.tolist()}", params)


@dataclass(frozen=True)
class Grid:
    """Axis-aligned box split into ``steps`` cells per axis."""

    lo: tuple
    hi: tuple
    steps: tuple

    def __post_init__(self):
        lo = tuple(float(v) for v in np.atleast_1d(self.lo))
        hi = tuple(float(v) for v in np.atleast_1d(self.hi))
        steps = tuple(int(v) for v in np.atleast_1d(self.steps))
        if not (len(lo) == len(hi) == len(steps)):
            raise ValueError("lo, hi and steps must have the same length")
        if any(h <= l for l, h in zip(lo, hi)) or any(s < 1 for s in steps):
            raise ValueError("empty grid")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)
        object.__setattr__(self, "steps", steps)

    @classmethod
    def from_dict(cls, d: dict) -> "Grid":
        return cls(d["lo"], d["hi"], d["steps"])

    def to_dict(self) -> dict:
        return {"lo": list(self.lo), "hi": list(self.hi), "steps": list(self.steps)}

    @property
    def dim(self) -> int:
        return len(self.lo)

    @property
    def widths(self) -> np.ndarray:
        return (np.array(self.hi) - np.array(self.lo)) / np.array(self.steps)

    def cell_centers(self) -> np.ndarray:
        axes = [l + (np.arange(s) + 0.5) * (h - l) / s for l, h, s in zip(self.lo, self.hi, self.steps)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)

    def nodes(self) -> np.ndarray:
        axes = [np.linspace(l, h, s + 1) for l, h, s in zip(self.lo, self.hi, self.steps)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([m.ravel() for m in mesh], axis=-1)


def _sample_points(grid, d: int) -> np.ndarray:
    if isinstance(grid, Grid):
        pts = grid.nodes()
    else:
        pts = np.asarray(grid, dtype=float)
    pts = pts.reshape(-1, d)
    return pts


def real_jacobian(patch: PatchModel, x) -> np.ndarray:
    """Jacobian in real ambient coordinates, shape ``(..., 2n, d)``."""
    J = patch.jacobian(np.asarray(x, dtype=float))
    out = np.empty(J.shape[:-2] + (2 * J.shape[-2], J.shape[-1]))
    out[..., 0::2, :] = J.real
    out[..., 1::2, :] = J.imag
    return out


def pullback_hessian(patch: PatchModel, domain: DomainModel, x) -> np.ndarray:
    """``H(x)`` for parameter points ``x`` of shape ``(..., d)`` (no boundary check)."""
    x = np.asarray(x, dtype=float)
    p = to_real(patch.eval(x))
    Hr = domain.rho.hessian(p)
    J = real_jacobian(patch, x)
    H = np.einsum("...ai,...ab,...bj->...ij", J, Hr, J)
    return 0.5 * (H + np.swapaxes(H, -1, -2))


@dataclass(frozen=True)
class PullbackForm:
    H: np.ndarray
    M: np.ndarray
    at_x: np.ndarray


def pullback_form(patch: PatchModel, domain: DomainModel, x) -> PullbackForm:
    x = np.asarray(x, dtype=float).reshape(patch.dim_d)
    if np.linalg.norm(x) >= patch.radius_R:
        raise ValueError("parameter point is outside the patch ball")
    p = to_real(patch.eval(x))
    res = abs(domain.rho(p))
    if res > domain.boundary_tol(p):
        raise BoundaryError(f"gamma(x) is off the boundary: |rho| = {res:.3e}")
    H = pullback_hessian(patch, domain, x)
    return PullbackForm(H=H, M=0.5 * H, at_x=x)


def frak_F(patch: PatchModel, domain: DomainModel, x) -> float:
    """Determinant of the pull-back Hessian at ``x``."""
    return float(np.linalg.det(pullback_form(patch, domain, x).H))


def tangency_residual(patch: PatchModel, domain: DomainModel, x) -> np.ndarray:
    """``max_mu |sum_j d rho/dz_j(gamma(x)) dgamma_j/dx_mu(x)|`` for each point."""
    x = np.asarray(x, dtype=float)
    g = dbar_rho(domain, patch.eval(x))
    J = patch.jacobian(x)
    t = np.einsum("...j,...jm->...m", g, J)
    return np.max(np.abs(t), axis=-1)


def patch_audit(patch: PatchModel, domain: DomainModel, grid, boundary_factor: float = 1.0,
                tangency_tol: float = 1e-9) -> dict:
    """Audit boundary membership, immersion and complex tangency on samples."""
    pts = _sample_points(grid, patch.dim_d)
    if np.any(np.linalg.norm(pts, axis=-1) >= patch.radius_R):
        raise ValueError("audit grid is not inside the parameter ball")
    pr = to_real(patch.eval(pts))
    resid = np.abs(domain.rho(pr))
    tol_b = boundary_factor * domain.boundary_tol(pr)
    sv = np.linalg.svd(real_jacobian(patch, pts), compute_uv=False)
    rel_sv = sv[:, -1] / np.maximum(sv[:, 0], 1e-300)
    tang = tangency_residual(patch, domain, pts)
    k_t = int(np.argmax(tang))
    boundary_ok = bool(np.all(resid <= tol_b))
    immersion_ok = bool(np.all(rel_sv > 1e-8))
    tangency_ok = bool(np.all(tang <= tangency_tol))
    return {
        "patch": patch.name,
        "domain": domain.name,
        "samples": int(len(pts)),
        "max_boundary_residual": float(resid.max()),
        "min_jacobian_singular_value": float(sv[:, -1].min()),
        "max_tangency_residual": float(tang[k_t]),
        "max_tangency_residual_at": pts[k_t].tolist(),
        "boundary_ok": boundary_ok,
        "immersion_ok": immersion_ok,
        "tangency_ok": tangency_ok,
        "passed": boundary_ok and immersion_ok and tangency_ok,
    }


def nondegeneracy_map(patch: PatchModel, domain: DomainModel, grid, tol: float = 1e-6) -> dict:
    """Flag samples where ``lambda_min(H) > tol``.

    For complex-tangential patches the image of dgamma lies in the tangent
    space of the boundary, so ``lambda_min(H) = 0`` exactly when that image
    meets the null space of the second fundamental form.
    """
    pts = _sample_points(grid, patch.dim_d)
    H = pullback_hessian(patch, domain, pts)
    lam = np.linalg.eigvalsh(H)[:, 0]
    flags = lam > tol
    return {
        "points": pts,
        "min_eigenvalue": lam,
        "nondegenerate": flags,
        "tol": float(tol),
        "all_nondegenerate": bool(np.all(flags)),
    }
