"""Limit set of the regular octagon group and its largest empty ball.

Run: python demos/01_limit_set.py [outdir]
"""

from __future__ import annotations

import math
import sys
import time
from pathlib import Path

from afk.kleinian import build_octagon_group, hausdorff_distance, largest_empty_ball, limit_set_sample, word_count
from afk.moebius import classify
from afk.render import render

out = Path(sys.argv[1] if len(sys.argv) > 1 else "demo-out")
out.mkdir(exist_ok=True)

# The octagon group acts on the unit disk, so its limit set is the unit circle.
G = build_octagon_group()
for k, g in enumerate(G.generators):
    c = classify(g)
    print(f"generator {k}: {c.kind.name.lower()}, translation length {c.translation_length:.6f}")

# Longer words fill the circle more densely; watch the sample converge.
prev = None
for depth in (3, 4, 5, 6):
    t0 = time.perf_counter()
    S = limit_set_sample(G, depth)
    dt = time.perf_counter() - t0
    step = "" if prev is None else f", Hausdorff step {hausdorff_distance(prev, S):.2e}"
    print(f"depth {depth}: {word_count(G.rank, depth):>7} words, {len(S):>7} points in {dt:.2f}s{step}")
    prev = S

# Every point of the sphere is within pi/4 of the circle, and 0 is as far as it gets.
center, radius = largest_empty_ball(prev, 64)
print(f"largest empty ball: center {center:.4f}, radius {radius:.9f} (pi/4 = {math.pi / 4:.9f})")

path = render(out / "octagon_limit_set", prev.points, 384, balls=[(center, radius)])
print(f"wrote {path}")
