"""Peak functions concentrating on a complex-tangential patch.

For a patch ``gamma`` on a convex boundary, the pairing

    G(zeta, z) = sum_j d rho/d zeta_j (zeta) (zeta_j - z_j)

has nonnegative real part on the closed domain and vanishes only at
``z = zeta``.  The family

    h_delta(z) = int_{|x| < varrho} delta^d f(x) / Gn(x) / (delta^2 + G(gamma(x), z))^d dx

with normalization ``Gn(x) = int_{R^d} (1 + <v|M(x)|v>/2)^{-d} dv`` and
``M = H/2`` tends to ``f(s)`` at ``gamma(s)`` and to 0 off the patch image.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import optimize
from scipy.special import gammaln

from .domain import BoundaryError, DomainModel, _wirtinger_from_real, dbar_rho, to_real
from .patch import PatchModel, pullback_hessian
from .quadrature import QuadratureError, adaptive_cubature


# -- pairing on the patch -----------------------------------------------------

def patch_pairing(patch: PatchModel, domain: DomainModel, x, z) -> np.ndarray:
    """``G(gamma(x), z)`` for parameter points ``x`` (``(..., d)``) and complex ``z``."""
    zeta = patch.eval(np.asarray(x, dtype=float))
    return np.sum(dbar_rho(domain, zeta) * (zeta - np.asarray(z, dtype=complex)), axis=-1)


def _derivative_terms(patch, domain, y, z):
    y = np.asarray(y, dtype=float)
    zeta = patch.eval(y)
    p = to_real(zeta)
    first, holo, mixed = _wirtinger_from_real(domain.rho.gradient(p), domain.rho.hessian(p))
    J = patch.jacobian(y)
    w = zeta - np.asarray(z, dtype=complex)
    second = np.einsum("...j,...jk,...km->...m", w, holo, J) \
        + np.einsum("...j,...jk,...km->...m", w, mixed, np.conj(J))
    tangential = np.einsum("...j,...jm->...m", first, J)
    return second, tangential


def pairing_gradient(patch, domain, y, z) -> np.ndarray:
    """Gradient in ``y`` of ``Re G(gamma(y), z)``."""
    second, tangential = _derivative_terms(patch, domain, y, z)
    return np.real(second + tangential)


def critical_expression(patch, domain, y, z) -> np.ndarray:
    """The gradient with the complex-tangency term dropped (vanishes at interior minimizers)."""
    second, _ = _derivative_terms(patch, domain, y, z)
    return np.real(second)


# -- normalization ------------------------------------------------------------

def unit_integral(d: int) -> float:
    """``int_{R^d} (1 + |u|^2)^{-d} du = pi^{d/2} Gamma(d/2) / Gamma(d)``."""
    return math.exp(0.5 * d * math.log(math.pi) + gammaln(0.5 * d) - gammaln(d))


def normalization_from_M(M) -> np.ndarray:
    """Closed form of ``int (1 + <v|M|v>/2)^{-d} dv`` for positive definite ``M``."""
    M = np.asarray(M, dtype=float)
    d = M.shape[-1]
    det = np.linalg.det(M)
    if np.any(det <= 0):
        raise ValueError("normalization needs a positive definite form")
    return det ** -0.5 * 2 ** (0.5 * d) * unit_integral(d)


def normalization_quadrature(M, abs_tol: float = 1e-11) -> float:
    """Direct cubature of the normalization integral over R^d.

    R^d is mapped onto the cube ``(-pi/2, pi/2)^d`` by ``v = tan(theta)``,
    which keeps the integrand bounded and avoids truncating the slowly decaying
    tail.
    """
    M = np.asarray(M, dtype=float)
    d = M.shape[-1]

    def integrand(theta):
        v = np.tan(theta)
        q = np.einsum("pi,ij,pj->p", v, M, v)
        jac = np.prod(1.0 / np.cos(theta) ** 2, axis=1)
        return jac / (1.0 + 0.5 * q) ** d

    half = 0.5 * np.pi
    res = adaptive_cubature(integrand, [-half] * d, [half] * d, abs_tol=abs_tol, rel_tol=1e-12,
                            order=8, initial_splits=2, max_evaluations=5_000_000)
    return float(res.value)


def normalization(patch: PatchModel, domain: DomainModel, x, method: str = "closed_form") -> float:
    """Normalization ``Gn(x)`` at a single parameter point."""
    M = 0.5 * pullback_hessian(patch, domain, np.asarray(x, dtype=float).reshape(patch.dim_d))
    if np.linalg.eigvalsh(M)[0] <= 0:
        raise ValueError("pull-back form is singular at x; exclude degenerate strata")
    if method == "closed_form":
        return float(normalization_from_M(M))
    if method == "quadrature":
        return normalization_quadrature(M)
    raise ValueError(f"unknown method {method!r}")


def normalization_batch(patch, domain, x) -> np.ndarray:
    return normalization_from_M(0.5 * pullback_hessian(patch, domain, x))


# -- constants ----------------------------------------------------------------

@dataclass(frozen=True)
class PeakConstants:
    C_gamma: float
    delta_gamma: float
    c_star: float
    eps_star: float
    varrho: float
    c_prime: float

    def __post_init__(self):
        for name in ("C_gamma", "delta_gamma", "c_star", "eps_star", "varrho", "c_prime"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    def to_dict(self) -> dict:
        return {k: float(getattr(self, k)) for k in
                ("C_gamma", "delta_gamma", "c_star", "eps_star", "varrho", "c_prime")}


def _ball_samples(rng, d: int, count: int) -> np.ndarray:
    v = rng.standard_normal((count, d))
    v /= np.linalg.norm(v, axis=1, keepdims=True)
    return v * rng.random(count)[:, None] ** (1.0 / d)


def _unit_pairs(d: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    x = _ball_samples(rng, d, count)
    y = _ball_samples(rng, d, count)
    # antipodal pairs on the sphere realize the largest separations
    m = max(8, count // 8)
    u = rng.standard_normal((m, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    axes = np.concatenate([np.eye(d), -np.eye(d)])
    u = np.concatenate([axes, u])
    x = np.concatenate([x, u, u])
    y = np.concatenate([y, -u, -u * 0.5])
    return x, y


def positivity_ratio(patch, domain, x, y) -> np.ndarray:
    """``Re G(gamma(x), gamma(y)) / |x - y|^2``."""
    num = np.real(patch_pairing(patch, domain, x, patch.eval(y)))
    return num / np.sum((np.asarray(x) - np.asarray(y)) ** 2, axis=-1)


def positivity_constants(patch: PatchModel, domain: DomainModel, pair_samples: int = 4000,
                         seed: int = 0, delta_start: float | None = None,
                         max_halvings: int = 30) -> tuple:
    """Halving search for ``(C_gamma, delta_gamma)``.

    A radius is accepted once the sampled minimum of the positivity ratio over
    pairs in ``B_d(0; delta)`` exceeds ``lambda_min(M) / 4`` (half the
    near-diagonal value); ``C_gamma`` is 0.9 times that minimum.  The search
    starts at ``min(1/2, R/2)``.
    """
    d = patch.dim_d
    delta = min(0.5, 0.5 * patch.radius_R) if delta_start is None else float(delta_start)
    ux, uy = _unit_pairs(d, pair_samples, seed)
    probe = _ball_samples(np.random.default_rng(seed + 7), d, 256)
    probe = np.concatenate([probe, np.zeros((1, d))])
    for _ in range(max_halvings):
        lam = np.linalg.eigvalsh(0.5 * pullback_hessian(patch, domain, delta * probe))[:, 0].min()
        x, y = delta * ux, delta * uy
        keep = np.linalg.norm(x - y, axis=1) > 1e-6 * delta
        ratio = positivity_ratio(patch, domain, x[keep], y[keep])
        m = float(ratio.min())
        if lam > 0 and m > 0.25 * lam:
            return 0.9 * m, delta
        delta *= 0.5
    raise ValueError("no positive radius found; the patch is degenerate, re-stratify")


def _tube_points(patch, domain, r, count, seed, depth=0.05):
    """Points of the closed domain near ``gamma(B_d(0; r))``."""
    rng = np.random.default_rng(seed)
    s = r * _ball_samples(rng, patch.dim_d, count)
    zeta = patch.eval(s)
    p = to_real(zeta)
    g = domain.rho.gradient(p)
    nrm = g / np.linalg.norm(g, axis=1, keepdims=True)
    t = depth * rng.random(count)
    pert = 0.2 * depth * rng.standard_normal(p.shape)
    q = p - t[:, None] * nrm + pert
    # pull back inside if the perturbation left the closed domain
    for _ in range(60):
        out = domain.rho(q) > 0
        if not np.any(out):
            break
        q[out] = p[out] + 0.5 * (q[out] - p[out]) - 1e-3 * depth * nrm[out]
    q = q[domain.rho(q) <= 0]
    return q[:, 0::2] + 1j * q[:, 1::2], s[: len(q)]


def second_order_constants(patch: PatchModel, domain: DomainModel, r: float, z_samples: int = 24,
                           seed: int = 0, levels: int = 6) -> tuple:
    """Sampled ``(c_star, eps_star)`` for the second-order bound around minimizers.

    The ratio ``|Re sum_j [d_j rho(gamma(y+x)) - d_j rho(gamma(y))](gamma_j(y) - z_j)|
    / (|x|^2 |gamma(y) - z|)`` is sampled at interior minimizers ``y = y^z``.
    ``c_star`` is 1.5 times its maximum over the smallest probe radius and
    ``eps_star`` is the largest dyadic radius on which the maximum stays below
    ``c_star``.
    """
    d = patch.dim_d
    zs, _ = _tube_points(patch, domain, r, z_samples, seed)
    rng = np.random.default_rng(seed + 11)
    dirs = rng.standard_normal((32, d))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs = np.concatenate([np.eye(d), -np.eye(d), dirs])
    radii = [0.5 * patch.radius_R * 0.5**k for k in range(levels)]
    worst = np.zeros(levels)
    used = 0
    for z in zs:
        mr = local_min(patch, domain, z, r)
        if not mr.interior:
            continue
        y = mr.y
        gy = patch.eval(y)
        dist = np.linalg.norm(gy - z)
        if dist < 1e-9:
            continue
        used += 1
        base = dbar_rho(domain, gy)
        for k, eps in enumerate(radii):
            fr = np.linspace(0.05, 1.0, 12)
            xs = (fr[:, None, None] * eps * dirs[None]).reshape(-1, d)
            ok = np.linalg.norm(y + xs, axis=1) < patch.radius_R
            xs = xs[ok]
            if len(xs) == 0:
                continue
            diff = dbar_rho(domain, patch.eval(y + xs)) - base
            val = np.abs(np.real(diff @ (gy - z)))
            ratio = val / (np.sum(xs**2, axis=1) * dist)
            worst[k] = max(worst[k], float(ratio.max()))
    if used == 0:
        raise ValueError("no interior minimizers found near the patch")
    c_star = 1.5 * max(worst[-1], 1e-12)
    eps_star = radii[-1]
    for k in range(levels):
        if worst[k] <= c_star:
            eps_star = radii[k]
            break
    return float(c_star), float(eps_star)


def choose_varrho(patch: PatchModel, delta_gamma: float, eps_star: float) -> float:
    """``min{1/2, delta_gamma/2, eps_star/3, R/8}``."""
    return float(min(0.5, 0.5 * delta_gamma, eps_star / 3.0, patch.radius_R / 8.0))


def separation_constant(patch: PatchModel, domain: DomainModel, varrho: float, samples: int = 200,
                        seed: int = 0) -> float:
    """Sampled off-patch constant ``c'``.

    ``z`` ranges over sampled boundary and interior points for which no
    interior minimizer exists in ``B_d(0; 2 varrho)``; the constant is 0.9
    times the minimum over those ``z`` and ``0 < |x| < varrho`` of
    ``Re G(gamma(x), z) / Re G(gamma(x), gamma(0))``.
    """
    from .domain import boundary_points

    d = patch.dim_d
    bp = boundary_points(domain, samples, seed)
    rng = np.random.default_rng(seed + 3)
    inner = domain.interior_witness + (bp - domain.interior_witness) * rng.random(len(bp))[:, None]
    cand = np.concatenate([bp, inner])
    zs = cand[:, 0::2] + 1j * cand[:, 1::2]
    xs = varrho * _ball_samples(np.random.default_rng(seed + 5), d, 200)
    xs = xs[np.linalg.norm(xs, axis=1) > 1e-3 * varrho]
    den = np.real(patch_pairing(patch, domain, xs, patch.eval(np.zeros(d))))
    best = np.inf
    for z in zs:
        mr = local_min(patch, domain, z, varrho, polish=False)
        if mr.interior:
            continue
        num = np.real(patch_pairing(patch, domain, xs, z))
        best = min(best, float(np.min(num / den)))
    if not np.isfinite(best):
        best = 1.0
    return 0.9 * best


def estimate_constants(patch: PatchModel, domain: DomainModel, seed: int = 0,
                       pair_samples: int = 4000) -> PeakConstants:
    C, delta = positivity_constants(patch, domain, pair_samples, seed)
    c_star, eps_star = second_order_constants(patch, domain, 0.5 * delta, seed=seed)
    varrho = choose_varrho(patch, delta, eps_star)
    c_prime = separation_constant(patch, domain, varrho, seed=seed)
    return PeakConstants(C, delta, c_star, eps_star, varrho, c_prime)


# -- minimizers ---------------------------------------------------------------

@dataclass(frozen=True)
class MinimizerResult:
    y: np.ndarray
    value: float
    interior: bool
    gradient_norm: float


def _coarse_nodes(d: int, radius: float) -> np.ndarray:
    per_axis = {1: 201, 2: 41, 3: 17}.get(d, 9)
    ax = np.linspace(-radius, radius, per_axis)
    mesh = np.meshgrid(*([ax] * d), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=-1)
    return pts[np.linalg.norm(pts, axis=1) <= radius * (1 + 1e-12)]


def _tie_break(pts, vals):
    m = vals.min()
    ties = np.flatnonzero(vals <= m + 1e-12 * (1 + abs(m)))
    keys = [(float(np.linalg.norm(pts[i])),) + tuple(pts[i]) for i in ties]
    return ties[min(range(len(ties)), key=lambda i: keys[i])]


def local_min(patch: PatchModel, domain: DomainModel, z, r: float, polish: bool = True) -> MinimizerResult:
    """Minimize ``x -> Re G(gamma(x), z)`` over the closed ball of radius ``2r``.

    A coarse grid picks the start (ties broken by smallest norm, then
    lexicographically); BFGS and Newton steps polish it.  ``interior`` is
    true when the minimizer lies strictly inside the ball.
    """
    d = patch.dim_d
    z = np.asarray(z, dtype=complex)
    rad = min(2.0 * r, patch.radius_R * (1 - 1e-9))
    nodes = _coarse_nodes(d, rad)
    vals = np.real(patch_pairing(patch, domain, nodes, z))
    y = nodes[_tie_break(nodes, vals)]

    def F(x):
        return float(np.real(patch_pairing(patch, domain, x, z)))

    def grad(x):
        return pairing_gradient(patch, domain, x, z)

    if polish:
        f0 = F(y)
        g0 = np.linalg.norm(grad(y))
        if g0 > 0:
            res = optimize.minimize(F, y, jac=grad, method="BFGS", options={"gtol": 1e-13, "maxiter": 200})
            if np.linalg.norm(res.x) <= rad and res.fun <= f0:
                y = res.x
            else:
                cons = {"type": "ineq", "fun": lambda x: rad**2 - x @ x, "jac": lambda x: -2 * x}
                res = optimize.minimize(F, y, jac=grad, method="SLSQP", constraints=[cons],
                                        options={"ftol": 1e-15, "maxiter": 200})
                if res.fun <= f0 and np.linalg.norm(res.x) <= rad * (1 + 1e-12):
                    y = res.x
            y = _newton_polish(grad, y, rad)
    g = grad(y)
    interior = bool(np.linalg.norm(y) < rad * (1 - 1e-6))
    return MinimizerResult(y=np.asarray(y, dtype=float), value=F(y), interior=interior,
                           gradient_norm=float(np.linalg.norm(g)))


def _newton_polish(grad, y, rad, steps: int = 6):
    y = np.asarray(y, dtype=float)
    g = grad(y)
    for _ in range(steps):
        gn = np.linalg.norm(g)
        if gn == 0:
            break
        h = 1e-5 * (1 + np.linalg.norm(y))
        d = y.size
        Hm = np.empty((d, d))
        for k in range(d):
            e = np.zeros(d)
            e[k] = h
            Hm[:, k] = (grad(y + e) - grad(y - e)) / (2 * h)
        Hm = 0.5 * (Hm + Hm.T)
        try:
            step = np.linalg.solve(Hm, -g)
        except np.linalg.LinAlgError:
            break
        ynew = y + step
        if np.linalg.norm(ynew) > rad:
            break
        gnew = grad(ynew)
        if np.linalg.norm(gnew) >= gn:
            break
        y, g = ynew, gnew
    return y


def critical_residual(patch: PatchModel, domain: DomainModel, z, r: float | None = None) -> float:
    """Largest component of the critical-point expression at the interior minimizer."""
    r = 0.25 * patch.radius_R if r is None else r
    mr = local_min(patch, domain, z, r)
    if not mr.interior:
        raise ValueError("minimizer is on the boundary of the search ball")
    return float(np.max(np.abs(critical_expression(patch, domain, mr.y, z))))


# -- key limit ----------------------------------------------------------------

def keylimit_probe(patch: PatchModel, domain: DomainModel, x, v, deltas) -> dict:
    """Tabulate ``Re G(gamma(x + delta v), gamma(x)) / delta^2`` against ``<v|M(x)|v>/2``."""
    x = np.asarray(x, dtype=float).reshape(patch.dim_d)
    v = np.asarray(v, dtype=float).reshape(patch.dim_d)
    M = 0.5 * pullback_hessian(patch, domain, x)
    target = 0.5 * float(v @ M @ v)
    rows = []
    base = patch.eval(x)
    for delta in deltas:
        xd = x + delta * v
        if np.linalg.norm(xd) >= patch.radius_R:
            raise ValueError("probe step leaves the parameter ball")
        val = float(np.real(patch_pairing(patch, domain, xd, base))) / delta**2
        rows.append({"delta": float(delta), "probe": val, "target": target, "error": abs(val - target)})
    errs = [r["error"] for r in rows]
    return {
        "x": x.tolist(),
        "v": v.tolist(),
        "target": target,
        "rows": rows,
        "decreasing": all(b <= a for a, b in zip(errs, errs[1:])),
    }


# -- bumps and the family -----------------------------------------------------

@dataclass(frozen=True)
class BumpFunction:
    """Radial bump ``amplitude * profile(|x - center| / radius) * exp(i <phase, x>)``."""

    radius: float
    kind: str = "smooth-exponential"
    amplitude: complex = 1.0
    center: tuple = ()
    phase: tuple = ()

    def __post_init__(self):
        if self.kind not in ("smooth-exponential", "cosine"):
            raise ValueError(f"unknown bump kind {self.kind!r}")
        if abs(self.amplitude) > 1 + 1e-15:
            raise ValueError("catalog bumps have |f| <= 1")

    def _center(self, d):
        return np.zeros(d) if len(self.center) == 0 else np.asarray(self.center, dtype=float)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        d = x.shape[-1]
        t = np.linalg.norm(x - self._center(d), axis=-1) / self.radius
        inside = t < 1
        prof = np.zeros_like(t)
        if self.kind == "smooth-exponential":
            ti = t[inside]
            prof[inside] = np.exp(1.0 - 1.0 / (1.0 - ti * ti))
        else:
            prof[inside] = 0.5 * (1.0 + np.cos(np.pi * t[inside]))
        out = self.amplitude * prof
        if len(self.phase):
            out = out * np.exp(1j * (x @ np.asarray(self.phase, dtype=float)))
        return out

    def box(self, d):
        c = self._center(d)
        return c - self.radius, c + self.radius

    def to_dict(self) -> dict:
        a = complex(self.amplitude)
        return {"kind": self.kind, "radius": self.radius, "amplitude": [a.real, a.imag],
                "center": list(self.center), "phase": list(self.phase)}


@dataclass
class PeakFamily:
    patch: PatchModel
    domain: DomainModel
    constants: PeakConstants
    bump: BumpFunction
    order: int = 7
    abs_tol: float = 1e-8
    cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        d = self.patch.dim_d
        c = self.bump._center(d)
        if np.linalg.norm(c) + self.bump.radius > self.constants.varrho * (1 + 1e-12):
            raise ValueError("bump support must lie in B_d(0; varrho)")
        if not self.cache:
            self.cache = build_normalization_cache(self)

    @property
    def d(self) -> int:
        return self.patch.dim_d

    def normalization(self, x) -> np.ndarray:
        return normalization_batch(self.patch, self.domain, x)


def build_normalization_cache(family: PeakFamily, per_axis: int | None = None, checks: int = 3) -> dict:
    """Closed-form normalization on a grid over the bump support, cross-checked by cubature."""
    d = family.d
    per_axis = per_axis or {1: 65, 2: 17}.get(d, 7)
    lo, hi = family.bump.box(d)
    axes = [np.linspace(lo[k], hi[k], per_axis) for k in range(d)]
    mesh = np.meshgrid(*axes, indexing="ij")
    nodes = np.stack([m.ravel() for m in mesh], axis=-1)
    nodes = nodes[np.linalg.norm(nodes, axis=1) < family.constants.varrho]
    M = 0.5 * pullback_hessian(family.patch, family.domain, nodes)
    if np.any(np.linalg.eigvalsh(M)[:, 0] <= 0):
        raise ValueError("pull-back form degenerates on the bump support")
    G = normalization_from_M(M)
    fvals = np.abs(family.bump(nodes))
    idx = np.unique(np.linspace(0, len(nodes) - 1, checks).round().astype(int))
    rel = [abs(normalization_quadrature(M[i]) - G[i]) / G[i] for i in idx]
    return {
        "nodes": nodes,
        "values": G,
        "min": float(G.min()),
        "max": float(G.max()),
        "sup_f_over_G": float(np.max(fvals / G)),
        "quadrature_check_max_rel": float(max(rel)),
    }


def dominating_bound(family: PeakFamily) -> float:
    """``||f/G||_inf * int (1 + C_gamma |v|^2 / 2)^{-d} dv``."""
    d = family.d
    C = family.constants.C_gamma
    return family.cache["sup_f_over_G"] * (2.0 / C) ** (0.5 * d) * unit_integral(d)


@dataclass(frozen=True)
class HResult:
    value: complex
    error: float
    evaluations: int
    min_denominator_margin: float
    converged: bool


def eval_h(family: PeakFamily, delta: float, z, full_output: bool = False, tol: float | None = None):
    """Evaluate ``h_delta(z)`` by adaptive cubature over the bump support."""
    if not delta > 0:
        raise ValueError("delta must be positive")
    patch, domain = family.patch, family.domain
    z = np.asarray(z, dtype=complex).reshape(patch.ambient_n)
    zr = to_real(z)
    if domain.rho(zr) > domain.boundary_tol(zr):
        raise BoundaryError("z lies outside the closed domain")
    d = family.d
    varrho = family.constants.varrho
    lo, hi = family.bump.box(d)
    margin = [np.inf]

    def integrand(x):
        out = np.zeros(len(x), dtype=complex)
        f = family.bump(x)
        live = (np.abs(f) > 0) & (np.linalg.norm(x, axis=1) < varrho)
        if not np.any(live):
            return out
        xl = x[live]
        pair = patch_pairing(patch, domain, xl, z)
        den = delta**2 + pair
        margin[0] = min(margin[0], float(np.min(den.real)) - delta**2)
        out[live] = delta**d * f[live] / family.normalization(xl) / den**d
        return out

    # put the near-singular point at a cell corner
    nodes = _coarse_nodes(d, 1.0) * (hi - lo) / 2 + (hi + lo) / 2
    vals = np.real(patch_pairing(patch, domain, nodes, z))
    split = nodes[int(np.argmin(vals))]
    res = adaptive_cubature(integrand, lo, hi, abs_tol=tol or family.abs_tol, order=family.order,
                            split_at=split, initial_splits=2)
    out = HResult(complex(res.value), res.error, res.evaluations, margin[0], res.converged)
    if not res.converged:
        raise QuadratureError(f"h_delta cubature stopped at error {res.error:.2e}", res)
    return out if full_output else out.value


def mean_value_defect(family: PeakFamily, delta: float, z, radius: float = 1e-2, points: int = 16) -> float:
    """Largest gap between ``h(z)`` and its average over small circles in each coordinate."""
    z = np.asarray(z, dtype=complex)
    center = eval_h(family, delta, z)
    theta = 2 * np.pi * np.arange(points) / points
    worst = 0.0
    for j in range(len(z)):
        vals = []
        for t in theta:
            w = z.copy()
            w[j] += radius * np.exp(1j * t)
            vals.append(eval_h(family, delta, w))
        worst = max(worst, abs(np.mean(vals) - center))
    return worst


# -- limit audit ----------------------------------------------------------------

def sample_closure_points(family: PeakFamily, count: int, seed: int = 0) -> np.ndarray:
    """Mixed sample of the closed domain: patch points, near-patch points, far points."""
    from .domain import boundary_points

    rng = np.random.default_rng(seed)
    d, patch, domain = family.d, family.patch, family.domain
    k = count // 4
    s = family.constants.varrho * _ball_samples(rng, d, k)
    on = patch.eval(s)
    near_s = family.constants.varrho * _ball_samples(rng, d, k)
    scale = 1.0 - 0.05 * rng.random(k)
    wc = domain.interior_witness[0::2] + 1j * domain.interior_witness[1::2]
    near = wc + (patch.eval(near_s) - wc) * scale[:, None]
    bp = boundary_points(domain, count - 3 * k + 4, seed + 1)[: count - 3 * k]
    far_b = bp[:, 0::2] + 1j * bp[:, 1::2]
    t = rng.random(k)[:, None]
    bp2 = boundary_points(domain, k + 4, seed + 2)[:k]
    far_i = wc + (bp2[:, 0::2] + 1j * bp2[:, 1::2] - wc) * t
    return np.concatenate([on, near, far_b, far_i])[:count]


def limit_audit(family: PeakFamily, deltas, z_on=(), z_off=(), z_extra=(), threads: int = 1) -> dict:
    """Tabulate ``h_delta`` for on-patch, off-patch and extra points.

    ``z_on`` holds parameter points ``s`` (target ``f(s)`` at ``gamma(s)``),
    ``z_off`` complex points (target 0) and ``z_extra`` complex points used
    only for the uniform bound.
    """
    d = family.d
    deltas = [float(v) for v in deltas]
    points = []
    for i, s in enumerate(np.asarray(z_on, dtype=float).reshape(-1, d)):
        points.append((f"on{i}", "on", family.patch.eval(s), complex(family.bump(s[None])[0])))
    for i, z in enumerate(np.asarray(z_off, dtype=complex).reshape(-1, family.patch.ambient_n)):
        points.append((f"off{i}", "off", z, 0j))
    for i, z in enumerate(np.asarray(z_extra, dtype=complex).reshape(-1, family.patch.ambient_n)):
        points.append((f"z{i}", "extra", z, None))
    tasks = [(delta, p) for delta in deltas for p in points]
    bound = dominating_bound(family)

    def run(task):
        delta, (zid, kind, z, target) = task
        r = eval_h(family, delta, z, full_output=True)
        err = None if target is None else abs(r.value - target)
        return {"delta": delta, "z_id": zid, "kind": kind, "re": r.value.real, "im": r.value.imag,
                "abs": abs(r.value), "bound": bound, "err_vs_target": err,
                "denominator_margin": r.min_denominator_margin, "quad_error": r.error}

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            rows = list(pool.map(run, tasks))
    else:
        rows = [run(t) for t in tasks]

    def decreasing(kind):
        ok = True
        for zid in sorted({r["z_id"] for r in rows if r["kind"] == kind}):
            seq = [r["err_vs_target"] for r in rows if r["z_id"] == zid]
            # deltas are listed from large to small
            ok &= all(b < a for a, b in zip(seq, seq[1:]))
        return bool(ok)

    sup = max((r["abs"] for r in rows), default=0.0)
    checks = {
        "claim_i_sup": sup,
        "claim_i_bound": bound,
        "claim_i_ok": bool(sup <= bound + 1e-3),
        "claim_ii_decreasing": decreasing("off"),
        "claim_iii_decreasing": decreasing("on"),
        "min_denominator_margin": min((r["denominator_margin"] for r in rows), default=np.inf),
    }
    checks["passed"] = checks["claim_i_ok"] and checks["claim_ii_decreasing"] and checks["claim_iii_decreasing"]
    return {"rows": rows, "checks": checks}


# -- shrinking compacts ---------------------------------------------------------

def _smooth_step(t):
    t = np.clip(t, 0.0, 1.0)
    a = np.where(t > 0, np.exp(-1.0 / np.where(t > 0, t, 1.0)), 0.0)
    b = np.where(t < 1, np.exp(-1.0 / np.where(t < 1, 1.0 - t, 1.0)), 0.0)
    return a / (a + b)


@dataclass(frozen=True)
class ShrinkingCompact:
    nu: int
    radius: float
    inner_radius: float

    def chi(self, x) -> np.ndarray:
        """Smooth bump: 1 on the next compact, supported in this one."""
        r = np.linalg.norm(np.atleast_2d(np.asarray(x, dtype=float)), axis=-1)
        return _smooth_step((self.radius - r) / (self.radius - self.inner_radius))


def compact_radius(support_radius: float, nu: int, varrho: float) -> float:
    # second term keeps every compact strictly inside B(0; varrho) and the radii strictly decreasing
    return min(support_radius * (1 + 1 / nu), support_radius + 0.999 * (varrho - support_radius) / nu)


def shrinking_compacts(support_radius: float, nu: int, varrho: float) -> ShrinkingCompact:
    """Closed ball ``D_nu`` and its bump ``chi_nu`` (equal to 1 on ``D_{nu+1}``)."""
    if not 0 < support_radius < varrho:
        raise ValueError("support radius must lie in (0, varrho)")
    if nu < 1:
        raise ValueError("nu starts at 1")
    return ShrinkingCompact(int(nu), compact_radius(support_radius, nu, varrho),
                            compact_radius(support_radius, nu + 1, varrho))
