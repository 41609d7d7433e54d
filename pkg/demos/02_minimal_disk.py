"""From a quadratic differential to a minimal disk and its two Gauss maps.

Run: python demos/02_minimal_disk.py
"""

from __future__ import annotations

import numpy as np

from afk.gauss_equation import DiskGrid, almost_fuchsian_check, check_bounds, convergence_study, solve
from afk.quad_diff import random_differential, sup_norm
from afk.surface import BoundaryField, beltrami_estimate, gauss_map_patch, integrate_immersion

rng = np.random.default_rng(11)

# A random differential vanishing at 0, scaled so its hyperbolic sup norm is 0.2.
alpha = random_differential(rng, 4, sup=0.2)
print("coefficients:", np.round(alpha.coefficients, 4))
print(f"sup norm: {sup_norm(alpha).value:.12f}")

# Solve for the conformal factor and check the a priori bounds.
u = solve(alpha, DiskGrid(0.85, 129))
print(f"Newton: {u.iterations} iterations, residual {u.residual_norm:.2e}")
print(check_bounds(u).summary())
af = almost_fuchsian_check(u, alpha)
print(f"induced sup norm {af.sup:.4f} (at most twice the hyperbolic one)")

# Second order in the grid spacing.
study = convergence_study(alpha)
print("grid differences:", ", ".join(f"{d:.2e}" for d in study.differences), f"order {study.order:.2f}")

# Integrate the frame equations and look at the surface through its Gauss maps.
patch = integrate_immersion(u, alpha)
print(f"patch: {int(patch.mask.sum())} nodes, loop error {patch.loop_error:.2e}, Gram defect {patch.gram_defect:.1e}")
region = patch.mask & (np.abs(patch.grid.z_full) <= 0.5)
eps = float(np.nanmax(patch.induced_norm()[region]))
for sign in (1, -1):
    G = gauss_map_patch(patch, sign)
    if sign < 0:
        # G- sends the center to infinity and reverses orientation; use the chart w -> 1/conj(w)
        with np.errstate(divide="ignore", invalid="ignore"):
            G = BoundaryField(G.grid, np.where(np.isinf(G.values.real), 0, 1 / np.conj(G.values)), G.mask)
    K = beltrami_estimate(G, region=region).K
    print(f"G{'+' if sign > 0 else '-'}: dilatation {K:.4f} on |z| <= 0.5, (1+eps)/(1-eps) = {(1 + eps) / (1 - eps):.4f}")
