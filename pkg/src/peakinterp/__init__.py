"""Numerical toolkit for peak functions on complex-tangential patches of convex domains."""
