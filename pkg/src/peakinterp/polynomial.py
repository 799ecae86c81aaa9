"""Sparse real polynomials in many variables with formal differentiation.

A polynomial is stored as a mapping ``exponent tuple -> coefficient``.  The
variables of a defining function on C^n are ordered (x1, y1, ..., xn, yn).
"""
from __future__ import annotations

from functools import cached_property
from typing import Iterable, Mapping

import numpy as np


class Polynomial:
    """Real polynomial in ``nvars`` variables.

    Parameters
    ----------
    terms : mapping of exponent tuples to coefficients
        Zero coefficients are dropped.
    nvars : int
        Number of variables; every exponent tuple must have this length.

    Examples
    --------
    >>> p = Polynomial({(2, 0): 1.0, (0, 2): 1.0, (0, 0): -1.0}, 2)
    >>> p([0.0, 0.0])
    -1.0
    >>> p.diff(0)
    Polynomial({(1, 0): 2.0}, nvars=2)
    """

    def __init__(self, terms: Mapping[tuple, float], nvars: int):
        clean = {}
        for exps, coeff in terms.items():
            exps = tuple(int(e) for e in exps)
            if len(exps) != nvars:
                raise ValueError(f"exponent {exps} has length {len(exps)}, expected {nvars}")
            if any(e < 0 for e in exps):
                raise ValueError(f"negative exponent in {exps}")
            if coeff != 0:
                clean[exps] = clean.get(exps, 0.0) + float(coeff)
        self._terms = {k: v for k, v in sorted(clean.items()) if v != 0}
        self.nvars = int(nvars)
        self._hash = hash((self.nvars, tuple(self._terms.items())))

    # -- construction helpers -------------------------------------------------
    @classmethod
    def from_list(cls, monomials: Iterable[Iterable[float]], nvars: int) -> "Polynomial":
        """Build from rows ``[e_1, ..., e_nvars, coefficient]``."""
        terms: dict = {}
        for row in monomials:
            row = list(row)
            if len(row) != nvars + 1:
                raise ValueError(f"monomial row {row} should have {nvars + 1} entries")
            exps = tuple(int(e) for e in row[:-1])
            if any(float(e) != int(e) for e in row[:-1]):
                raise ValueError(f"non-integer exponent in {row}")
            terms[exps] = terms.get(exps, 0.0) + float(row[-1])
        return cls(terms, nvars)

    def to_list(self) -> list:
        return [list(exps) + [coeff] for exps, coeff in self._terms.items()]

    @classmethod
    def variable(cls, index: int, nvars: int) -> "Polynomial":
        exps = [0] * nvars
        exps[index] = 1
        return cls({tuple(exps): 1.0}, nvars)

    @classmethod
    def constant(cls, value: float, nvars: int) -> "Polynomial":
        return cls({(0,) * nvars: float(value)}, nvars)

    # -- basic properties -----------------------------------------------------
    @property
    def terms(self) -> dict:
        return dict(self._terms)

    @property
    def degree(self) -> int:
        if not self._terms:
            return 0
        return max(sum(e) for e in self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __repr__(self) -> str:
        return f"Polynomial({self._terms}, nvars={self.nvars})"

    def __eq__(self, other) -> bool:
        if not isinstance(other, Polynomial):
            return NotImplemented
        return self.nvars == other.nvars and self._terms == other._terms

    def __hash__(self):
        return self._hash

    # -- arithmetic -----------------------------------------------------------
    def _coerce(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            if other.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return other
        return Polynomial.constant(float(other), self.nvars)

    def __add__(self, other):
        other = self._coerce(other)
        out = dict(self._terms)
        for k, v in other._terms.items():
            out[k] = out.get(k, 0.0) + v
        return Polynomial(out, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return Polynomial({k: -v for k, v in self._terms.items()}, self.nvars)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        out: dict = {}
        for e1, c1 in self._terms.items():
            for e2, c2 in other._terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                out[key] = out.get(key, 0.0) + c1 * c2
        return Polynomial(out, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if int(k) != k or k < 0:
            raise ValueError("only non-negative integer powers")
        result = Polynomial.constant(1.0, self.nvars)
        base = self
        k = int(k)
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    # -- calculus -------------------------------------------------------------
    def diff(self, var: int, order: int = 1) -> "Polynomial":
        """Formal partial derivative with respect to variable ``var``."""
        if not 0 <= var < self.nvars:
            raise IndexError(f"variable index {var} out of range")
        out: dict = {}
        for exps, coeff in self._terms.items():
            e = exps[var]
            if e < order:
                continue
            factor = 1
            for k in range(order):
                factor *= e - k
            new = list(exps)
            new[var] = e - order
            out[tuple(new)] = out.get(tuple(new), 0.0) + coeff * factor
        return Polynomial(out, self.nvars)

    @cached_property
    def gradient_polys(self) -> tuple:
        return tuple(self.diff(i) for i in range(self.nvars))

    @cached_property
    def hessian_polys(self) -> tuple:
        g = self.gradient_polys
        return tuple(tuple(g[i].diff(j) for j in range(self.nvars)) for i in range(self.nvars))

    # -- evaluation -----------------------------------------------------------
    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = evaluate_many([self], x)[..., 0]
        return float(out) if out.ndim == 0 else out

    def gradient(self, x) -> np.ndarray:
        """Gradient at ``x`` (shape ``(..., nvars)``)."""
        return evaluate_many(self.gradient_polys, np.asarray(x, dtype=float))

    def hessian(self, x) -> np.ndarray:
        """Hessian at ``x`` (shape ``(..., nvars, nvars)``)."""
        flat = [p for row in self.hessian_polys for p in row]
        vals = evaluate_many(flat, np.asarray(x, dtype=float))
        return vals.reshape(vals.shape[:-1] + (self.nvars, self.nvars))


def _stack(polys) -> tuple:
    # Shared monomial table for a list of polynomials.
    index: dict = {}
    for p in polys:
        for exps in p._terms:
            index.setdefault(exps, len(index))
    nvars = polys[0].nvars
    if not index:
        return np.zeros((0, nvars), dtype=int), np.zeros((0, len(polys)))
    exps = np.array(list(index), dtype=int)
    coeffs = np.zeros((len(index), len(polys)))
    for j, p in enumerate(polys):
        for e, c in p._terms.items():
            coeffs[index[e], j] = c
    return exps, coeffs


_STACK_CACHE: dict = {}


def evaluate_many(polys, x: np.ndarray) -> np.ndarray:
    """Evaluate several polynomials at points ``x`` of shape ``(..., nvars)``.

    Returns an array of shape ``(..., len(polys))``.
    """
    polys = tuple(polys)
    nvars = polys[0].nvars
    if x.shape[-1] != nvars:
        raise ValueError(f"point has {x.shape[-1]} coordinates, expected {nvars}")
    key = polys
    try:
        exps, coeffs = _STACK_CACHE[key]
    except KeyError:
        exps, coeffs = _stack(polys)
        if len(_STACK_CACHE) > 256:
            _STACK_CACHE.clear()
        _STACK_CACHE[key] = exps, coeffs
    if exps.shape[0] == 0:
        return np.zeros(x.shape[:-1] + (len(polys),))
    lead = x.shape[:-1]
    pts = x.reshape(-1, nvars)
    maxe = int(exps.max())
    # powers[k] = pts**k, shape (maxe+1, P, nvars)
    powers = np.ones((maxe + 1,) + pts.shape)
    for k in range(1, maxe + 1):
        powers[k] = powers[k - 1] * pts
    mono = np.ones((pts.shape[0], exps.shape[0]))
    for v in range(nvars):
        col = exps[:, v]
        if np.any(col):
            mono *= powers[col, :, v].T
    vals = mono @ coeffs
    return vals.reshape(lead + (len(polys),))
