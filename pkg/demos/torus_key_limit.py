"""
Key limit on a Lagrangian torus
===============================

For ``(s, t) -> (e^{is}, e^{it}, e^{-i(s+t)}) / sqrt 3`` on the sphere of
C^3 the pull-back Hessian is ``[[4, 2], [2, 4]] / 3``.  Along ``v = (1, 0)``
the ratio ``Re G(gamma(delta v), gamma(0)) / delta^2`` tends to ``1/3``.
"""

from peakinterp import catalog
from peakinterp.patch import pullback_hessian
from peakinterp.peak import keylimit_probe, normalization

torus, ball = catalog.torus3(), catalog.ball(3)
print("H(0) =\n", pullback_hessian(torus, ball, [0.0, 0.0]))

probe = keylimit_probe(torus, ball, [0.0, 0.0], [1.0, 0.0], [0.4, 0.2, 0.1, 0.05, 0.025])
for row in probe["rows"]:
    print(f"delta={row['delta']:6.3f}  probe={row['probe']:.8f}  error={row['error']:.2e}"
          f"  error/delta^2={row['error'] / row['delta']**2:.4f}")

print("G closed form", normalization(torus, ball, [0.3, -0.2]),
      " quadrature", normalization(torus, ball, [0.3, -0.2], "quadrature"))
