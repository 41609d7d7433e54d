"""The empty-ball certificate on the Fuchsian baseline, then with a planted point.

Run: python demos/03_certificate.py
"""

from __future__ import annotations

import math

from afk.certify import assemble_certificate, necessary_condition_check
from afk.gauss_equation import DiskGrid, solve
from afk.kleinian import build_octagon_group, limit_set_sample
from afk.quad_diff import QuadDifferential
from afk.surface import integrate_immersion

# alpha = 0 gives the totally geodesic disk spanning the unit circle.
alpha = QuadDifferential.zero()
patch = integrate_immersion(solve(alpha, DiskGrid()), alpha)
S = limit_set_sample(build_octagon_group(), 6)

c = assemble_certificate(patch, S)
print(f"eps = {c.eps}, r = {c.r:.4f}, r1 = {c.r1:.4f}, beta = {c.beta:.5f}")
print(f"R = {c.R:.5f}, spherical {c.R_spherical:.5f}; empty radius {c.empirical_empty_radius:.9f} (pi/4 = {math.pi / 4:.9f})")
print(f"verdict: {c.verdict.value}")
for note in c.notes:
    print("  note:", note)

# Plant a limit point at the origin: the certified ball is no longer empty.
bad = assemble_certificate(patch, S.union([0j]))
print(f"with a point at 0: verdict {bad.verdict.value}")

# The necessary condition only asks for some empty ball of the given size.
for R in (0.5, 1.0):
    rep = necessary_condition_check(S, R)
    print(f"necessary condition at R = {R}: {rep.verdict.value} (largest empty radius {rep.empty_radius:.4f})")
