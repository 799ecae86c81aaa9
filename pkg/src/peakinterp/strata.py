"""Rank stratification of a patch parameter grid.

Each cell is labeled by the rank of the pull-back Hessian ``H`` at the point of
the (closed) cell where its smallest eigenvalue is least, so a cell touching a
degenerate point is labeled degenerate.  Face-adjacent cells with equal labels
form components.  Cell boxes are stored in integer units of the finest
subdivision, which keeps adjacency tests exact after refinement.
"""
from __future__ import annotations

import csv
import io
import itertools
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from scipy import optimize

from .domain import DomainModel
from .patch import Grid, PatchModel, pullback_hessian


class UnionFind:
    """Disjoint sets over ``0..n-1`` with path halving and union by size."""

    def __init__(self, n: int):
        self.parent = list(range(n))
        self.size = [1] * n

    def find(self, i: int) -> int:
        parent = self.parent
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    def union(self, i: int, j: int) -> None:
        ri, rj = self.find(i), self.find(j)
        if ri == rj:
            return
        if self.size[ri] < self.size[rj]:
            ri, rj = rj, ri
        self.parent[rj] = ri
        self.size[ri] += self.size[rj]


@dataclass(frozen=True)
class StratificationReport:
    grid: Grid
    scale: int  # integer units per base cell along each axis
    ilo: np.ndarray  # (C, d) integer lower corners
    ihi: np.ndarray  # (C, d) integer upper corners
    labels: np.ndarray
    min_eig: np.ndarray
    witness: np.ndarray  # (C, d) point attaining min_eig
    tol_rank: float
    components: tuple  # ((rank, sorted cell indices), ...)
    transition: np.ndarray
    patch_name: str = ""

    @property
    def lo(self) -> np.ndarray:
        g0 = np.array(self.grid.lo)
        return g0 + self.ilo * self.grid.widths / self.scale

    @property
    def hi(self) -> np.ndarray:
        g0 = np.array(self.grid.lo)
        return g0 + self.ihi * self.grid.widths / self.scale

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.lo + self.hi)

    def component_counts(self) -> dict:
        counts: dict = defaultdict(int)
        for rank, _ in self.components:
            counts[f"rank{rank}"] += 1
        return dict(sorted(counts.items()))

    def components_of_rank(self, rank: int) -> list:
        return [cells for r, cells in self.components if r == rank]

    def to_dict(self) -> dict:
        return {
            "patch": self.patch_name,
            "grid": self.grid.to_dict(),
            "tol_rank": self.tol_rank,
            "cells": int(len(self.labels)),
            "component_counts": self.component_counts(),
            "components": [
                {"rank": int(r), "size": len(c),
                 "lo": self.lo[c].min(axis=0).tolist(), "hi": self.hi[c].max(axis=0).tolist()}
                for r, c in self.components
            ],
            "transition_cells": int(self.transition.sum()),
        }

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        d = self.grid.dim
        w.writerow([f"c{k}" for k in range(d)] + [f"w{k}" for k in range(d)] + ["label", "min_eigenvalue", "transition"])
        widths = self.hi - self.lo
        for c, wd, lab, ev, tr in zip(self.centers, widths, self.labels, self.min_eig, self.transition):
            w.writerow([repr(float(v)) for v in c] + [repr(float(v)) for v in wd]
                       + [int(lab), repr(float(ev)), int(tr)])
        return buf.getvalue()


def _cell_minima(patch, domain, lo, hi, tol_hint, nodes_per_axis=5, polish_factor=100.0):
    """Minimum over each closed cell of ``lambda_min(H)`` and a point attaining it."""
    C, d = lo.shape
    per = nodes_per_axis if d < 3 else 3
    ref = np.array(list(itertools.product(np.linspace(0, 1, per), repeat=d)))
    pts = lo[:, None, :] + (hi - lo)[:, None, :] * ref[None]
    lam = np.linalg.eigvalsh(pullback_hessian(patch, domain, pts.reshape(-1, d)))[:, 0].reshape(C, -1)
    k = np.argmin(lam, axis=1)
    best = lam[np.arange(C), k]
    wit = pts[np.arange(C), k]

    def lam_min(x):
        return float(np.linalg.eigvalsh(pullback_hessian(patch, domain, x))[0])

    suspect = np.flatnonzero(best < polish_factor * tol_hint)
    for c in suspect:
        bounds = list(zip(lo[c], hi[c]))
        res = optimize.minimize(lam_min, wit[c], method="L-BFGS-B", bounds=bounds,
                                options={"ftol": 1e-16, "gtol": 1e-14})
        if res.fun < best[c]:
            best[c] = res.fun
            wit[c] = res.x
    return best, wit


def _rank(patch, domain, pts, tol):
    w = np.linalg.eigvalsh(pullback_hessian(patch, domain, pts))
    return np.sum(w >= tol, axis=1)


def _adjacency(ilo: np.ndarray, ihi: np.ndarray):
    """Pairs of face-adjacent boxes (shared face of positive measure)."""
    C, d = ilo.shape
    pairs = []
    for k in range(d):
        by_hi = defaultdict(list)
        by_lo = defaultdict(list)
        for i in range(C):
            by_hi[int(ihi[i, k])].append(i)
            by_lo[int(ilo[i, k])].append(i)
        others = [a for a in range(d) if a != k]
        for coord, left in by_hi.items():
            right = by_lo.get(coord)
            if not right:
                continue
            L = np.array(left)
            R = np.array(right)
            ok = np.ones((len(L), len(R)), dtype=bool)
            for a in others:
                ok &= (np.minimum(ihi[L, a][:, None], ihi[R, a][None]) >
                       np.maximum(ilo[L, a][:, None], ilo[R, a][None]))
            ii, jj = np.nonzero(ok)
            pairs.extend(zip(L[ii].tolist(), R[jj].tolist()))
    pairs.sort()
    return pairs


def _components(labels, pairs):
    uf = UnionFind(len(labels))
    for i, j in pairs:
        if labels[i] == labels[j]:
            uf.union(i, j)
    groups = defaultdict(list)
    for i in range(len(labels)):
        groups[uf.find(i)].append(i)
    comps = sorted((min(g), g) for g in groups.values())
    return tuple((int(labels[g[0]]), np.array(g)) for _, g in comps)


def _transitions(labels, pairs):
    flag = np.zeros(len(labels), dtype=bool)
    for i, j in pairs:
        if labels[i] != labels[j]:
            flag[i] = flag[j] = True
    return flag


def _assemble(grid, scale, ilo, ihi, labels, min_eig, wit, tol, name):
    pairs = _adjacency(ilo, ihi)
    return StratificationReport(grid=grid, scale=scale, ilo=ilo, ihi=ihi, labels=labels,
                                min_eig=min_eig, witness=wit, tol_rank=tol,
                                components=_components(labels, pairs),
                                transition=_transitions(labels, pairs), patch_name=name)


def stratify(patch: PatchModel, domain: DomainModel, grid: Grid, tol_rank: float | None = None) -> StratificationReport:
    """Label grid cells by the rank of ``H`` and group them into components.

    ``tol_rank`` defaults to ``1e-6`` times the largest eigenvalue of ``H`` seen
    on the grid nodes.
    """
    if grid.dim != patch.dim_d:
        raise ValueError("grid dimension differs from the patch dimension")
    if grid.dim > 3:
        raise ValueError("stratification grids are limited to d <= 3")
    corner = np.array(list(itertools.product(*zip(grid.lo, grid.hi))))
    if np.any(np.linalg.norm(corner, axis=1) >= patch.radius_R):
        raise ValueError("grid box leaves the parameter ball")
    if tol_rank is None:
        lam_max = np.linalg.eigvalsh(pullback_hessian(patch, domain, grid.nodes()))[:, -1].max()
        tol_rank = 1e-6 * float(lam_max)
    idx = np.array(list(itertools.product(*[range(s) for s in grid.steps])), dtype=np.int64)
    ilo, ihi = idx, idx + 1
    g0 = np.array(grid.lo)
    lo = g0 + ilo * grid.widths
    hi = g0 + ihi * grid.widths
    min_eig, wit = _cell_minima(patch, domain, lo, hi, tol_rank)
    labels = _rank(patch, domain, wit, tol_rank)
    rep = _assemble(grid, 1, ilo, ihi, labels, min_eig, wit, float(tol_rank), patch.name)
    _CONTEXT[id(rep)] = (patch, domain)
    return rep


_CONTEXT: dict = {}


def refine_transitions(report: StratificationReport, levels: int, patch: PatchModel | None = None,
                       domain: DomainModel | None = None) -> StratificationReport:
    """Subdivide cells next to a label change ``levels`` times and relabel them."""
    if patch is None or domain is None:
        try:
            patch, domain = _CONTEXT[id(report)]
        except KeyError:
            raise ValueError("pass the patch and domain used to build the report") from None
    rep = report
    d = rep.grid.dim
    offsets = np.array(list(itertools.product((0, 1), repeat=d)), dtype=np.int64)
    for _ in range(levels):
        if not rep.transition.any():
            break
        ilo, ihi = rep.ilo * 2, rep.ihi * 2
        scale = rep.scale * 2
        split = np.flatnonzero(rep.transition)
        keep = ~rep.transition
        half = (ihi[split] - ilo[split]) // 2
        clo = (ilo[split][:, None, :] + offsets[None] * half[:, None, :]).reshape(-1, d)
        chi = clo + np.repeat(half, len(offsets), axis=0)
        g0 = np.array(rep.grid.lo)
        w = rep.grid.widths / scale
        me, wt = _cell_minima(patch, domain, g0 + clo * w, g0 + chi * w, rep.tol_rank)
        lab = _rank(patch, domain, wt, rep.tol_rank)
        rep = _assemble(rep.grid, scale,
                        np.concatenate([ilo[keep], clo]), np.concatenate([ihi[keep], chi]),
                        np.concatenate([rep.labels[keep], lab]),
                        np.concatenate([rep.min_eig[keep], me]),
                        np.concatenate([rep.witness[keep], wt]),
                        rep.tol_rank, rep.patch_name)
        _CONTEXT[id(rep)] = (patch, domain)
    return rep
