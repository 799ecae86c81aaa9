"""Convex domains in C^n given by real-polynomial defining functions.

Points are handled in two coordinate systems: real points of length 2n laid
out as (x1, y1, ..., xn, yn), and complex points of length n with
``z_j = x_j + i y_j``.  All derivatives of the defining function are formal.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .polynomial import Polynomial


class BoundaryError(ValueError):
    """Raised when a point required to lie on the boundary does not."""


class ConvexityError(ValueError):
    """Raised when a second fundamental form has a clearly negative eigenvalue."""


def to_real(z) -> np.ndarray:
    """Complex points ``(..., n)`` to real points ``(..., 2n)``."""
    z = np.asarray(z, dtype=complex)
    out = np.empty(z.shape[:-1] + (2 * z.shape[-1],))
    out[..., 0::2] = z.real
    out[..., 1::2] = z.imag
    return out


def to_complex(x) -> np.ndarray:
    """Real points ``(..., 2n)`` to complex points ``(..., n)``."""
    x = np.asarray(x, dtype=float)
    if x.shape[-1] % 2:
        raise ValueError("real point must have even length")
    return x[..., 0::2] + 1j * x[..., 1::2]


@dataclass(frozen=True, eq=False)
class DomainModel:
    """Bounded domain ``{rho < 0}`` with polynomial ``rho``.

    Attributes
    ----------
    rho : Polynomial
        Defining function in the 2n real coordinates.
    ambient_n : int
        Complex dimension n.
    interior_witness : ndarray
        Real point with ``rho < 0``; boundary sampling shoots rays from it.
    bounding_radius : float
        The domain is contained in the ball of this radius about the witness.
    """

    rho: Polynomial
    ambient_n: int
    interior_witness: np.ndarray
    bounding_radius: float
    name: str = "domain"

    def __post_init__(self):
        if self.ambient_n < 2:
            raise ValueError("ambient complex dimension must be at least 2")
        if self.rho.nvars != 2 * self.ambient_n:
            raise ValueError("defining function must have 2n variables")
        w = np.asarray(self.interior_witness, dtype=float)
        if w.shape != (2 * self.ambient_n,):
            raise ValueError("interior witness has wrong dimension")
        object.__setattr__(self, "interior_witness", w)
        if not self.rho(w) < 0:
            raise ValueError(f"rho is not negative at the interior witness {w}")

    @property
    def dim(self) -> int:
        return 2 * self.ambient_n

    # -- serialization --------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "ambient_n": self.ambient_n,
            "monomials": self.rho.to_list(),
            "interior_witness": [float(v) for v in self.interior_witness],
            "bounding_radius": float(self.bounding_radius),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DomainModel":
        n = int(data["ambient_n"])
        rho = Polynomial.from_list(data["monomials"], 2 * n)
        return cls(
            rho=rho,
            ambient_n=n,
            interior_witness=np.asarray(data.get("interior_witness", [0.0] * 2 * n), float),
            bounding_radius=float(data["bounding_radius"]),
            name=str(data.get("name", "domain")),
        )

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "DomainModel":
        return cls.from_dict(json.loads(Path(path).read_text()))

    # -- tolerances -----------------------------------------------------------
    def boundary_tol(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        return 1e-9 * (1.0 + np.linalg.norm(p, axis=-1) ** max(self.rho.degree, 1))

    def _check_real(self, p) -> np.ndarray:
        p = np.asarray(p, dtype=float)
        if p.shape[-1] != self.dim:
            raise ValueError(f"point has {p.shape[-1]} real coordinates, expected {self.dim}")
        return p


def eval_defining(domain: DomainModel, z):
    """Value of the defining function at point(s) ``z``.

    Real input uses the ``(x1, y1, ..., xn, yn)`` layout; complex input has
    ``n`` coordinates.
    """
    if np.iscomplexobj(z):
        z = to_real(z)
    return domain.rho(domain._check_real(z))


def gradient(domain: DomainModel, p) -> np.ndarray:
    return domain.rho.gradient(domain._check_real(p))


def hessian(domain: DomainModel, p) -> np.ndarray:
    return domain.rho.hessian(domain._check_real(p))


# -- Wirtinger calculus -------------------------------------------------------

@dataclass(frozen=True)
class WirtingerJet:
    """First and second Wirtinger derivatives of rho at a point.

    ``first[j]`` is d rho / d z_j, ``second_holo[j, k]`` is d^2 rho / dz_j dz_k
    and ``second_mixed[j, k]`` is d^2 rho / dz_j d(conj z_k).
    """

    first: np.ndarray
    second_holo: np.ndarray
    second_mixed: np.ndarray


def _wirtinger_from_real(grad, hess):
    gx, gy = grad[..., 0::2], grad[..., 1::2]
    first = 0.5 * (gx - 1j * gy)
    hxx = hess[..., 0::2, 0::2]
    hyy = hess[..., 1::2, 1::2]
    hxy = hess[..., 0::2, 1::2]  # d/dx_j d/dy_k
    hyx = hess[..., 1::2, 0::2]  # d/dy_j d/dx_k
    holo = 0.25 * (hxx - hyy - 1j * (hxy + hyx))
    mixed = 0.25 * (hxx + hyy + 1j * (hxy - hyx))
    return first, holo, mixed


def wirtinger_jet(domain: DomainModel, p) -> WirtingerJet:
    """Wirtinger jet at real point(s) ``p``; arrays broadcast over leading axes."""
    p = domain._check_real(p)
    first, holo, mixed = _wirtinger_from_real(domain.rho.gradient(p), domain.rho.hessian(p))
    return WirtingerJet(first, holo, mixed)


def dbar_rho(domain: DomainModel, zeta) -> np.ndarray:
    """``d rho / d z_j`` at complex point(s) ``zeta``."""
    g = domain.rho.gradient(to_real(zeta))
    return 0.5 * (g[..., 0::2] - 1j * g[..., 1::2])


# -- boundary geometry --------------------------------------------------------

@dataclass(frozen=True)
class BoundaryFrame:
    point: np.ndarray
    gradient: np.ndarray
    hessian: np.ndarray
    tangent_basis: np.ndarray  # columns span T_p, shape (2n, 2n-1)
    restricted_form: np.ndarray


@dataclass(frozen=True)
class NullSpaceResult:
    dimension: int
    basis: np.ndarray  # columns, ambient real coordinates
    eigenvalues: np.ndarray
    tol: float


def tangent_basis(normal: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the hyperplane orthogonal to ``normal``.

    The standard basis vector most aligned with the normal is dropped and the
    rest are projected and orthonormalized in order, so axis-aligned normals
    give the remaining coordinate axes exactly.
    """
    n = normal / np.linalg.norm(normal)
    N = n.size
    drop = int(np.argmax(np.abs(n)))
    cols = [i for i in range(N) if i != drop]
    E = np.eye(N)[:, cols]
    E = E - np.outer(n, n @ E)
    Q, R = np.linalg.qr(E)
    # fix signs so the basis agrees with the projected axes
    s = np.sign(np.diag(R))
    s[s == 0] = 1.0
    return Q * s


def boundary_frame(domain: DomainModel, p) -> BoundaryFrame:
    """Gradient, Hessian, tangent basis and second fundamental form at ``p``."""
    p = domain._check_real(p)
    if p.ndim != 1:
        raise ValueError("boundary_frame takes a single point")
    val = domain.rho(p)
    if abs(val) > domain.boundary_tol(p):
        raise BoundaryError(f"point is not on the boundary: rho = {val:.3e}")
    g = domain.rho.gradient(p)
    gnorm = np.linalg.norm(g)
    if gnorm <= 1e-12 * (1.0 + np.linalg.norm(p)):
        raise BoundaryError("gradient of rho vanishes at the point")
    H = domain.rho.hessian(p)
    T = tangent_basis(g)
    B = T.T @ H @ T
    B = 0.5 * (B + B.T)
    return BoundaryFrame(point=p, gradient=g, hessian=H, tangent_basis=T, restricted_form=B)


def null_space(frame: BoundaryFrame, tol: float | None = None) -> NullSpaceResult:
    """Null space of the second fundamental form at a boundary frame.

    Default ``tol`` is ``1e-8 * max(lambda_max, 1e-300)``.  Eigenvalues below
    ``-tol`` mean the form is not positive semi-definite and raise
    ``ConvexityError``.
    """
    w, V = np.linalg.eigh(frame.restricted_form)
    if tol is None:
        tol = 1e-8 * max(float(w[-1]), 1e-300)
    if w[0] < -tol:
        raise ConvexityError(f"second fundamental form has eigenvalue {w[0]:.3e} < -{tol:.1e}")
    mask = w < tol
    basis = frame.tangent_basis @ V[:, mask]
    return NullSpaceResult(dimension=int(mask.sum()), basis=basis, eigenvalues=w, tol=float(tol))


def peak_pairing(domain: DomainModel, zeta, z, check: bool = True):
    """``sum_j d rho/d zeta_j (zeta) * (zeta_j - z_j)``.

    Broadcasts over leading axes of ``zeta`` and ``z`` (complex, last axis n).
    """
    zeta = np.asarray(zeta, dtype=complex)
    z = np.asarray(z, dtype=complex)
    if zeta.shape[-1] != domain.ambient_n or z.shape[-1] != domain.ambient_n:
        raise ValueError("complex point dimension mismatch")
    if check:
        pr = to_real(zeta)
        res = np.abs(domain.rho(pr))
        if np.any(res > domain.boundary_tol(pr)):
            raise BoundaryError(f"zeta is not on the boundary: |rho| = {np.max(res):.3e}")
    out = np.sum(dbar_rho(domain, zeta) * (zeta - z), axis=-1)
    return complex(out) if out.ndim == 0 else out


# -- sampling and audits ------------------------------------------------------

def boundary_points(domain: DomainModel, count: int, seed: int = 0, tol: float = 1e-12):
    """Deterministic boundary samples by ray shooting from the interior witness.

    Directions are drawn from a seeded normal distribution; each ray is
    bisected on rho until ``|rho| <= tol`` (scaled).  Rays that do not leave the
    domain within ``bounding_radius`` are skipped, so fewer than ``count``
    points may be returned for unbounded controls.
    """
    rng = np.random.default_rng(seed)
    dirs = rng.standard_normal((count, domain.dim))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    w = domain.interior_witness
    R = domain.bounding_radius
    lo = np.zeros(count)
    hi = np.full(count, float(R))
    outer = domain.rho(w + hi[:, None] * dirs)
    ok = outer > 0
    lo, hi, dirs = lo[ok], hi[ok], dirs[ok]
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        val = domain.rho(w + mid[:, None] * dirs)
        inside = val < 0
        lo = np.where(inside, mid, lo)
        hi = np.where(inside, hi, mid)
        if np.all(hi - lo <= 1e-16 * (1 + hi)):
            break
    t = 0.5 * (lo + hi)
    pts = w + t[:, None] * dirs
    # one Newton correction along the ray to reach |rho| ~ tol
    g = domain.rho.gradient(pts)
    slope = np.einsum("ij,ij->i", g, dirs)
    val = domain.rho(pts)
    step = np.where(np.abs(slope) > 0, val / np.where(slope == 0, 1, slope), 0.0)
    cand = pts - step[:, None] * dirs
    better = np.abs(domain.rho(cand)) < np.abs(val)
    pts = np.where(better[:, None], cand, pts)
    return pts


def convexity_audit(domain: DomainModel, sample_count: int = 1000, seed: int = 0,
                    pair_count: int | None = None, tol: float = 1e-9) -> dict:
    """Sampling audit of convexity, nondegenerate gradient and segment-freeness.

    Returns a report dict with fixed key order.  ``passed`` is true iff the
    smallest eigenvalue of every sampled second fundamental form is at least
    ``-tol``, the gradient never vanishes, and every sampled chord midpoint
    lies strictly inside.
    """
    pts = boundary_points(domain, sample_count, seed)
    min_eig = np.inf
    witness = None
    min_grad = np.inf
    argmin_eig = None
    for p in pts:
        fr = boundary_frame(domain, p)
        lam = np.linalg.eigvalsh(fr.restricted_form)[0]
        if lam < min_eig:
            min_eig, argmin_eig = float(lam), p
        min_grad = min(min_grad, float(np.linalg.norm(fr.gradient)))
        if lam < -tol and witness is None:
            witness = p
    pair_count = len(pts) if pair_count is None else pair_count
    rng = np.random.default_rng(seed + 1)
    if len(pts) >= 2:
        i = rng.integers(0, len(pts), pair_count)
        j = rng.integers(0, len(pts), pair_count)
        keep = i != j
        mid = 0.5 * (pts[i[keep]] + pts[j[keep]])
        midvals = domain.rho(mid)
        max_mid = float(np.max(midvals)) if midvals.size else -np.inf
        segment_witness = None
        if midvals.size and max_mid >= 0:
            k = int(np.argmax(midvals))
            segment_witness = [pts[i[keep][k]].tolist(), pts[j[keep][k]].tolist()]
    else:
        max_mid, segment_witness = -np.inf, None
    convex_ok = bool(min_eig >= -tol)
    grad_ok = bool(min_grad > 0)
    seg_ok = bool(max_mid < 0)
    return {
        "domain": domain.name,
        "samples": int(len(pts)),
        "seed": int(seed),
        "tol": tol,
        "min_form_eigenvalue": min_eig,
        "min_form_eigenvalue_at": None if argmin_eig is None else argmin_eig.tolist(),
        "min_gradient_norm": min_grad,
        "max_midpoint_rho": max_mid,
        "convex_ok": convex_ok,
        "gradient_ok": grad_ok,
        "segment_ok": seg_ok,
        "negative_curvature_witness": None if witness is None else witness.tolist(),
        "segment_witness": segment_witness,
        "passed": convex_ok and grad_ok and seg_ok,
    }
