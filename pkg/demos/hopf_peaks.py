"""
Peak functions on the Hopf circle
=================================

On the unit sphere of C^2 the circle ``t -> (e^{it}, e^{-it}) / sqrt 2`` is
complex-tangential with ``H = 2``.  The family ``h_delta`` built from a
bump ``f`` tends to ``f(s)`` at ``gamma(s)`` and to 0 away from the curve.
At the origin the family has the closed form
``delta / (delta^2 + 1) / (sqrt 2 pi) * int f``.
"""

import numpy as np
from scipy import integrate

from peakinterp import catalog
from peakinterp.peak import (BumpFunction, PeakFamily, dominating_bound, estimate_constants, eval_h,
                             normalization)

patch, ball = catalog.hopf(), catalog.ball(2)
const = estimate_constants(patch, ball, seed=0)
print("constants:", {k: round(v, 4) for k, v in const.to_dict().items()})
print("G(0) closed form", normalization(patch, ball, [0.0]),
      " quadrature", normalization(patch, ball, [0.0], "quadrature"))

family = PeakFamily(patch, ball, const, BumpFunction(const.varrho))
r = const.varrho
int_f = integrate.quad(lambda x: family.bump(np.array([[x]]))[0].real, -r, r)[0]

print(f"\n{'delta':>6} {'h(gamma(0))':>12} {'h(0)':>12} {'closed form':>12}")
for delta in (0.2, 0.1, 0.05, 0.02, 0.01):
    on = eval_h(family, delta, patch.eval(np.zeros(1))).real
    off = eval_h(family, delta, np.zeros(2)).real
    print(f"{delta:6.2f} {on:12.6f} {off:12.6f} {delta / (delta**2 + 1) / (np.sqrt(2) * np.pi) * int_f:12.6f}")

# The value at gamma(0) creeps up to f(0) = 1 slowly: with varrho = 1/4 the
# kernel still leaves mass outside the support when delta = 0.02.
print("\nuniform bound:", dominating_bound(family))
