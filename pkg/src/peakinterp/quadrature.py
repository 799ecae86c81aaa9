"""Adaptive tensor Gauss-Legendre cubature on boxes.

Each cell carries two estimates: the rule applied to the cell and the sum of
the rule over its ``2**d`` dyadic children.  Their difference is the error
estimate.  Cells with the largest errors are split in batches until the total
estimated error meets the tolerance.  Summation runs over cells in a fixed
order, so results are reproducible bit for bit for fixed settings.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class CubatureResult:
    value: complex | float
    error: float
    cells: int
    evaluations: int
    converged: bool


class QuadratureError(RuntimeError):
    def __init__(self, message, result: CubatureResult):
        super().__init__(message)
        self.result = result


def _rule(order: int, d: int):
    x, w = np.polynomial.legendre.leggauss(order)
    # reference nodes on [0, 1]
    x = 0.5 * (x + 1.0)
    w = 0.5 * w
    nodes = np.array(list(itertools.product(x, repeat=d)))
    weights = np.prod(np.array(list(itertools.product(w, repeat=d))), axis=1)
    return nodes, weights


def _corners(d: int) -> np.ndarray:
    return np.array(list(itertools.product((0.0, 0.5), repeat=d)))


class _Engine:
    def __init__(self, f, d, order):
        self.f = f
        self.d = d
        self.nodes, self.weights = _rule(order, d)
        self.offsets = _corners(d)
        self.evaluations = 0

    def apply(self, lo, width):
        """Rule on many cells at once: ``lo``, ``width`` have shape (C, d)."""
        pts = lo[:, None, :] + width[:, None, :] * self.nodes[None, :, :]
        vals = np.asarray(self.f(pts.reshape(-1, self.d)))
        self.evaluations += pts.shape[0] * pts.shape[1]
        vals = vals.reshape(pts.shape[0], pts.shape[1])
        vol = np.prod(width, axis=1)
        return (vals @ self.weights) * vol

    def children(self, lo, width):
        clo = (lo[:, None, :] + width[:, None, :] * self.offsets[None, :, :]).reshape(-1, self.d)
        cw = np.repeat(0.5 * width, len(self.offsets), axis=0)
        return clo, cw

    def estimate(self, lo, width):
        """Return (fine estimate, error) for cells."""
        coarse = self.apply(lo, width)
        clo, cw = self.children(lo, width)
        fine = self.apply(clo, cw).reshape(len(lo), -1).sum(axis=1)
        return coarse, fine, np.abs(fine - coarse)


def initial_cells(lo, hi, split_at=None, splits: int = 1):
    """Cells covering ``[lo, hi]``, optionally with ``split_at`` as a shared corner.

    ``splits`` uniform subdivisions per axis are applied first.
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    d = lo.size
    edges = [list(np.linspace(lo[k], hi[k], splits + 1)) for k in range(d)]
    if split_at is not None:
        s = np.asarray(split_at, dtype=float).reshape(d)
        for k in range(d):
            if lo[k] < s[k] < hi[k]:
                edges[k] = sorted(set(edges[k]) | {float(s[k])})
    cells_lo, cells_w = [], []
    for idx in itertools.product(*[range(len(e) - 1) for e in edges]):
        a = np.array([edges[k][i] for k, i in enumerate(idx)])
        b = np.array([edges[k][i + 1] for k, i in enumerate(idx)])
        if np.all(b > a):
            cells_lo.append(a)
            cells_w.append(b - a)
    return np.array(cells_lo), np.array(cells_w)


def adaptive_cubature(f, lo, hi, abs_tol: float = 1e-8, rel_tol: float = 0.0, order: int = 7,
                      max_evaluations: int = 20_000_000, split_at=None, initial_splits: int = 1,
                      raise_on_failure: bool = False) -> CubatureResult:
    """Integrate ``f`` over the box ``[lo, hi]``.

    Parameters
    ----------
    f : callable
        Vectorized integrand: maps points of shape ``(P, d)`` to ``(P,)``
        real or complex values.
    abs_tol, rel_tol : float
        Stop when the summed error estimate is below
        ``max(abs_tol, rel_tol * |value|)``.
    order : int
        Gauss-Legendre points per axis.
    split_at : array_like, optional
        Point made a corner of the initial cells; put a near-singular
        point of the integrand here.
    """
    lo = np.atleast_1d(np.asarray(lo, dtype=float))
    hi = np.atleast_1d(np.asarray(hi, dtype=float))
    d = lo.size
    eng = _Engine(f, d, order)
    clo, cw = initial_cells(lo, hi, split_at, initial_splits)
    _, fine, err = eng.estimate(clo, cw)
    converged = False
    while True:
        total = _ordered_sum(fine)
        total_err = float(np.sum(err))
        target = max(abs_tol, rel_tol * abs(total))
        if total_err <= target:
            converged = True
            break
        if eng.evaluations >= max_evaluations:
            break
        # split the worst cells until the remaining error would meet the target
        order_idx = np.argsort(-err, kind="stable")
        cum = total_err - np.cumsum(err[order_idx])
        k = int(np.searchsorted(-cum, -target, side="left")) + 1
        k = max(1, min(k, len(order_idx), 4096))
        split = np.sort(order_idx[:k])
        keep = np.ones(len(err), dtype=bool)
        keep[split] = False
        nlo, nw = eng.children(clo[split], cw[split])
        _, nfine, nerr = eng.estimate(nlo, nw)
        clo = np.concatenate([clo[keep], nlo])
        cw = np.concatenate([cw[keep], nw])
        fine = np.concatenate([fine[keep], nfine])
        err = np.concatenate([err[keep], nerr])
    result = CubatureResult(value=_ordered_sum(fine), error=float(np.sum(err)), cells=len(fine),
                            evaluations=eng.evaluations, converged=converged)
    if not converged and raise_on_failure:
        raise QuadratureError(f"cubature did not reach tolerance (error {result.error:.2e})", result)
    return result


def _ordered_sum(values: np.ndarray):
    if np.iscomplexobj(values):
        return complex(math.fsum(values.real), math.fsum(values.imag))
    return math.fsum(values)
