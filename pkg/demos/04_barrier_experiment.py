"""Empty balls along a family of conjugated groups.

Conjugating by z -> 4^k z moves the circle outward; the largest empty ball
grows toward the hemisphere it leaves behind.

Run: python demos/04_barrier_experiment.py
"""

from __future__ import annotations

from afk.certify import ExperimentConfig, barrier_experiment, circle_empty_radius
from afk.kleinian import build_octagon_group
from afk.moebius import MoebiusTransform, apply_boundary

G = build_octagon_group()
steps = [MoebiusTransform.dilation(2.0 ** k) for k in range(4)]
family = [G.conjugate_by(D, f"dilated 2^{k}") for k, D in enumerate(steps)]
rows = barrier_experiment(family, ExperimentConfig(depth=5))

print(f"{'group':<14}{'points':>8}{'empty radius':>15}{'circle value':>15}{'Hausdorff step':>16}")
for D, r in zip(steps, rows):
    exact = circle_empty_radius(abs(apply_boundary(D, 1)))
    step = "" if r.hausdorff_step is None else f"{r.hausdorff_step:.4f}"
    print(f"{r.label:<14}{r.points:>8}{r.empty_radius:>15.6f}{exact:>15.6f}{step:>16}")
