"""Finitely generated Kleinian groups: reduced words, limit sets, empty balls.

Limit sets are approximated from inside by

* attracting fixed points of every loxodromic reduced word of length <= L;
* shadows of orbit points of a base point that sink below a height cutoff.
  The shadow of a low orbit point W(base) is W(xi) for a known limit point
  xi (a fixed point of some generator), chosen to keep c xi + d away from
  cancellation.  Elliptic-only groups fall back to vertical projection.

Word enumeration for sampling is vectorized level by level over numpy
arrays of matrix entries, partitioned over the first letter so that
independent workers never share state; results are merged in first-letter
order, which keeps the output deterministic regardless of thread count.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.spatial import cKDTree

from .moebius import (
    HalfSpacePoint,
    Kind,
    MoebiusTransform,
    canonical,
    classify,
    fixed_points,
    from_sphere,
    is_inf,
    spherical_distance,
    to_sphere,
)

DEDUP_DEFAULT = 1e-6
SHADOW_HEIGHT = 1e-4
DECIMATE_ABOVE = 50_000


class ResourceLimitError(RuntimeError):
    """Raised when an explicit collection of words would exceed its budget."""


@dataclass(frozen=True)
class GroupPresentation:
    generators: tuple[MoebiusTransform, ...]
    label: str = ""

    def __post_init__(self):
        gens = tuple(self.generators)
        if not gens:
            raise ValueError("a group presentation needs at least one generator")
        for i, g in enumerate(gens):
            if g.is_identity(tol=1e-12):
                raise ValueError(f"generator {i} is the identity")
        object.__setattr__(self, "generators", gens)

    @property
    def rank(self) -> int:
        return len(self.generators)

    def letters(self) -> list[MoebiusTransform]:
        """Generators followed by their inverses; letter j inverts letter (j+n) mod 2n."""
        return list(self.generators) + [g.inverse() for g in self.generators]

    def conjugate_by(self, g: MoebiusTransform, label: str | None = None) -> "GroupPresentation":
        return GroupPresentation(
            tuple(x.conjugate_by(g) for x in self.generators),
            self.label if label is None else label,
        )

    def to_json(self) -> dict:
        return {"label": self.label, "generators": [g.to_json() for g in self.generators]}

    @classmethod
    def from_json(cls, obj: dict) -> "GroupPresentation":
        return cls(tuple(MoebiusTransform.from_json(m) for m in obj["generators"]), str(obj.get("label", "")))


def word_count(n_generators: int, max_length: int) -> int:
    """Number of nonempty freely reduced words of length <= max_length."""
    m = 2 * n_generators
    return sum(m * (m - 1) ** (k - 1) for k in range(1, max_length + 1))


def enumerate_reduced_words(
    G: GroupPresentation, max_length: int, with_letters: bool = False
) -> Iterator:
    """Lazily yield every reduced word of length 1..max_length.

    Depth-first, letters tried in index order (generators, then inverses).
    With ``with_letters`` each item is ``(letters, transform)``.
    """
    if max_length < 1:
        raise ValueError("word length must be at least 1")
    letters = G.letters()
    n = G.rank
    m = 2 * n

    def walk(prefix: tuple, M: MoebiusTransform):
        for j in range(m):
            if prefix and j == (prefix[-1] + n) % m:
                continue
            word = prefix + (j,)
            W = M @ letters[j] if prefix else letters[j]
            yield (word, W) if with_letters else W
            if len(word) < max_length:
                yield from walk(word, W)

    yield from walk((), MoebiusTransform.identity())


def collect_words(G: GroupPresentation, max_length: int, budget: int = 5_000_000) -> list:
    """Materialize the word stream; fails up front if it would exceed ``budget``."""
    total = word_count(G.rank, max_length)
    if total > budget:
        raise ResourceLimitError(f"{total} words exceed the budget of {budget}")
    return list(enumerate_reduced_words(G, max_length))


def reduce_word(letters: Sequence[int], n: int) -> tuple:
    """Free reduction of a letter sequence over 2n letters."""
    out: list[int] = []
    for j in letters:
        if out and out[-1] == (j + n) % (2 * n):
            out.pop()
        else:
            out.append(j)
    return tuple(out)


def word_transform(G: GroupPresentation, letters: Sequence[int]) -> MoebiusTransform:
    gens = G.letters()
    W = MoebiusTransform.identity()
    for j in letters:
        W = W @ gens[j]
    return W


# -- vectorized sampling ------------------------------------------------------


def _letter_arrays(G: GroupPresentation) -> np.ndarray:
    return np.array([[g.a, g.b, g.c, g.d] for g in G.letters()], dtype=complex)


def _attracting_points(a, b, c, d, tol=1e-9):
    tr = a + d
    tr2 = tr * tr
    scale = np.maximum(1.0, np.abs(tr2))
    tame = (np.abs(tr2.imag) <= tol * scale) & (tr2.real >= -tol * scale) & (tr2.real <= 4 + tol * scale)
    lox = ~tame
    s = np.sqrt(tr2 - 4)
    l1 = 0.5 * (tr + s)
    l2 = 0.5 * (tr - s)
    lam = np.where(np.abs(l1) >= np.abs(l2), l1, l2)[lox]
    a, b, c, d = a[lox], b[lox], c[lox], d[lox]
    use_c = np.abs(c) >= np.abs(lam - a)
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(use_c, (lam - d) / c, b / (lam - a))
    return z


def _anchor_points(G: GroupPresentation) -> np.ndarray:
    """Known limit points in homogeneous coordinates: generator fixed points."""
    pts = []
    for g in G.generators:
        if classify(g).kind in (Kind.LOXODROMIC, Kind.PARABOLIC):
            pts.extend(fixed_points(g))
    homog = []
    for p in pts:
        if is_inf(p):
            homog.append((1.0, 0.0))
        else:
            r = math.sqrt(1 + abs(p) ** 2)
            homog.append((complex(p) / r, 1.0 / r))
    return np.array(homog, dtype=complex).reshape(-1, 2)


def _shadows(a, b, c, d, base: HalfSpacePoint, height: float, anchors: np.ndarray):
    w = c * base.z + d
    den = np.abs(w) ** 2 + np.abs(c) ** 2 * base.t ** 2
    low = base.t / den < height
    a, b, c, d = a[low], b[low], c[low], d[low]
    if not len(a):
        return np.empty(0, dtype=complex)
    if len(anchors) == 0:
        w, den = w[low], den[low]
        return ((a * base.z + b) * np.conj(w) + a * np.conj(c) * base.t ** 2) / den
    x, y = anchors[:, 0], anchors[:, 1]
    dens = c[:, None] * x[None, :] + d[:, None] * y[None, :]
    k = np.argmax(np.abs(dens), axis=1)
    rows = np.arange(len(a))
    num = a * x[k] + b * y[k]
    with np.errstate(divide="ignore", invalid="ignore"):
        return num / dens[rows, k]


def _sample_subtree(first: int, L: int, letters: np.ndarray, n: int, base, height, anchors, delta):
    m = 2 * n
    a = letters[first : first + 1, 0].copy()
    b = letters[first : first + 1, 1].copy()
    c = letters[first : first + 1, 2].copy()
    d = letters[first : first + 1, 3].copy()
    last = np.array([first])
    chunks = []
    words = 0
    for level in range(1, L + 1):
        if level > 1:
            na, nb, nc, nd, nl = [], [], [], [], []
            for j in range(m):
                keep = last != (j + n) % m
                A, B, C, D = letters[j]
                aa, bb, cc, dd = a[keep], b[keep], c[keep], d[keep]
                na.append(aa * A + bb * C)
                nb.append(aa * B + bb * D)
                nc.append(cc * A + dd * C)
                nd.append(cc * B + dd * D)
                nl.append(np.full(len(aa), j))
            a, b, c, d = (np.concatenate(x) for x in (na, nb, nc, nd))
            last = np.concatenate(nl)
        words += len(a)
        pts = np.concatenate([_attracting_points(a, b, c, d), _shadows(a, b, c, d, base, height, anchors)])
        chunks.append(_dedup_keys(pts, delta))
    keys = np.concatenate([k for k, _ in chunks])
    pts = np.concatenate([p for _, p in chunks])
    keys, pts = _unique_first(keys, pts)
    return keys, pts, words


_PACK_BITS = 21


def _dedup_keys(points, delta):
    points = canonical(np.asarray(points, dtype=complex))
    cells = np.round(to_sphere(points) / delta).astype(np.int64)
    offset = 1 << (_PACK_BITS - 1)
    if 1.0 / delta < offset:
        # three signed cell indices fit side by side in one int64
        cells += offset
        keys = (cells[:, 0] << (2 * _PACK_BITS)) | (cells[:, 1] << _PACK_BITS) | cells[:, 2]
    else:
        keys = np.unique(cells, axis=0, return_inverse=True)[1].astype(np.int64).ravel()
    return _unique_first(keys, points)


def _unique_first(keys, points):
    if len(points) == 0:
        return keys[:0], points
    _, idx = np.unique(keys, return_index=True)
    idx.sort()
    return keys[idx], points[idx]


def dedup_points(points, delta: float = DEDUP_DEFAULT) -> np.ndarray:
    """Keep the first point of every spherical cell of size ``delta``."""
    return _dedup_keys(points, delta)[1]


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get("AFK_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class LimitSetSample:
    points: np.ndarray
    max_word_length: int = 0
    method: str = "loxodromic-fixed-points+shadows"
    dedup: float = DEDUP_DEFAULT
    warnings: tuple[str, ...] = ()
    words: int = 0
    label: str = ""

    def __len__(self) -> int:
        return len(self.points)

    @property
    def sphere(self) -> np.ndarray:
        return to_sphere(self.points)

    @classmethod
    def from_points(cls, points, method: str = "given", **kw) -> "LimitSetSample":
        return cls(canonical(np.atleast_1d(np.asarray(points, dtype=complex))), method=method, **kw)

    def union(self, other) -> "LimitSetSample":
        pts = other.points if isinstance(other, LimitSetSample) else np.atleast_1d(np.asarray(other, dtype=complex))
        return LimitSetSample(
            dedup_points(np.concatenate([self.points, pts]), self.dedup),
            self.max_word_length,
            self.method + "+union",
            self.dedup,
            self.warnings,
            self.words,
            self.label,
        )

    def metadata(self) -> dict:
        return {
            "label": self.label,
            "max_word_length": self.max_word_length,
            "method": self.method,
            "dedup": self.dedup,
            "points": len(self),
            "words": self.words,
            "warnings": list(self.warnings),
        }


def jorgensen_warnings(G: GroupPresentation) -> list[str]:
    """Spot-check the Jorgensen inequality on generator pairs.

    A discrete non-elementary group satisfies |tr^2 A - 4| + |tr[A,B] - 2| >= 1
    for every pair; a violation means the pair generates an elementary or a
    non-discrete group.
    """
    out = []
    gens = G.generators
    for i, A in enumerate(gens):
        for j, B in enumerate(gens):
            if i == j:
                continue
            comm = A @ B @ A.inverse() @ B.inverse()
            val = abs(A.trace ** 2 - 4) + abs(comm.trace - 2)
            if val < 1:
                out.append(f"Jorgensen inequality fails for generators ({i},{j}): {val:.6g} < 1")
    return out


def limit_set_sample(
    G: GroupPresentation,
    max_length: int,
    base: HalfSpacePoint = HalfSpacePoint(0j, 1.0),
    dedup: float = DEDUP_DEFAULT,
    shadow_height: float = SHADOW_HEIGHT,
    threads: int | None = None,
) -> LimitSetSample:
    if max_length < 2:
        raise ValueError("limit set sampling needs word length >= 2")
    threads = default_threads() if threads is None else max(1, int(threads))
    letters = _letter_arrays(G)
    n = G.rank
    anchors = _anchor_points(G)

    def task(first):
        return _sample_subtree(first, max_length, letters, n, base, shadow_height, anchors, dedup)

    if threads == 1:
        results = [task(f) for f in range(2 * n)]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(task, range(2 * n)))
    keys = np.concatenate([r[0] for r in results])
    pts = np.concatenate([r[1] for r in results])
    _, pts = _unique_first(keys, pts)
    warnings = jorgensen_warnings(G)
    if len(pts) <= 2:
        warnings.append(f"only {len(pts)} distinct limit points found; the group is elementary")
    elif len(pts) < 2 * n:
        warnings.append(f"only {len(pts)} distinct limit points found (< 2n = {2 * n}); group may be elementary or not discrete")
    return LimitSetSample(
        pts,
        max_word_length=max_length,
        dedup=dedup,
        warnings=tuple(warnings),
        words=sum(r[2] for r in results),
        label=G.label,
    )


# -- metrics on samples -------------------------------------------------------


def _as_points(A) -> np.ndarray:
    pts = A.points if isinstance(A, LimitSetSample) else np.atleast_1d(np.asarray(A, dtype=complex))
    if len(pts) == 0:
        raise ValueError("Hausdorff distance undefined for empty set")
    return pts


def directed_hausdorff(A, B) -> float:
    """sup over a in A of the spherical distance from a to B."""
    pa, pb = _as_points(A), _as_points(B)
    _, idx = cKDTree(to_sphere(pb)).query(to_sphere(pa), k=1)
    return float(np.max(spherical_distance(pa, pb[idx])))


def hausdorff_distance(A, B) -> float:
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


def distance_to_sample(p, A) -> float:
    """Spherical distance from boundary point(s) ``p`` to the nearest sample point."""
    pa = _as_points(A)
    q = np.atleast_1d(np.asarray(p, dtype=complex))
    _, idx = cKDTree(to_sphere(pa)).query(to_sphere(q), k=1)
    d = spherical_distance(q, pa[idx])
    return float(d[0]) if np.ndim(p) == 0 else d


def fibonacci_sphere(n: int) -> np.ndarray:
    """n near-uniform unit vectors (golden-angle spiral)."""
    i = np.arange(n) + 0.5
    z = 1 - 2 * i / n
    r = np.sqrt(1 - z * z)
    phi = np.pi * (3 - np.sqrt(5)) * i
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)


def sphere_grid_spacing(resolution: int) -> float:
    """Typical spacing of the resolution^2 point lattice, in the spherical metric."""
    return math.sqrt(math.pi) / resolution


def largest_empty_ball(A, resolution: int = 64, refine: bool = True) -> tuple[complex, float]:
    """Center and radius of the largest spherical ball missing the sample.

    Candidates are a Fibonacci lattice of resolution^2 centers; the best few
    are polished by a local search.  Large samples are searched on a
    decimated copy (KD-tree queries far from points crowded on a curve are
    slow), and the final radius is recomputed against every point.  Every
    reported radius is attained by the reported center, so the result is a
    lower bound for the true value.
    """
    if resolution < 10:
        raise ValueError("resolution must be at least 10")
    pts = _as_points(A)
    full = to_sphere(pts)
    step = sphere_grid_spacing(resolution)
    coarse = full if len(full) <= DECIMATE_ABOVE else to_sphere(dedup_points(pts, step / 64))
    tree = cKDTree(coarse)
    cand = fibonacci_sphere(resolution * resolution)
    chord, _ = tree.query(cand, k=1)
    order = np.argsort(-chord, kind="stable")

    def neg_radius(v):
        v = v / np.linalg.norm(v)
        c, _ = tree.query(v, k=1)
        return -c

    best_v = cand[order[0]]
    best_c = chord[order[0]]
    if refine and best_c > 0:
        for k in order[:5]:
            res = minimize(
                neg_radius,
                cand[k],
                method="Nelder-Mead",
                options={"initial_simplex": cand[k] + 2 * step * np.vstack([np.zeros(3), np.eye(3)]), "xatol": 1e-10, "fatol": 1e-14, "maxiter": 2000},
            )
            if -res.fun > best_c:
                best_c = -res.fun
                best_v = res.x / np.linalg.norm(res.x)
    center = complex(from_sphere(best_v[None, :])[0])
    j = int(np.argmax(full @ to_sphere(center)))
    return center, spherical_distance(center, pts[j])


# -- reference groups ---------------------------------------------------------


def build_octagon_group(model: str = "disk") -> GroupPresentation:
    """Genus-2 Fuchsian group pairing opposite sides of the regular octagon.

    The octagon is centered at 0 with interior angles pi/4.  Generator k is the
    hyperbolic translation through the midpoints of sides k and k+4, of
    length 2*arccosh(1 + sqrt 2).  Relator: g0 g1^-1 g2 g3^-1 g0^-1 g1 g2^-1 g3.

    ``model="disk"`` (default) preserves the unit circle; ``model="halfplane"``
    conjugates by the Cayley map so that the generators are real and preserve
    the real line.
    """
    d = math.acosh(1 + math.sqrt(2))
    T = MoebiusTransform(math.cosh(d), math.sinh(d), math.sinh(d), math.cosh(d))
    gens = []
    for k in range(4):
        e = np.exp(0.5j * k * math.pi / 4)
        gens.append(T.conjugate_by(MoebiusTransform(e, 0, 0, 1 / e)))
    if model == "disk":
        return GroupPresentation(tuple(gens), "octagon-disk")
    if model == "halfplane":
        cayley = MoebiusTransform(1, -1j, 1, 1j)  # upper half-plane -> disk
        real = []
        for g in gens:
            h = cayley.inverse() @ g @ cayley
            m = h.matrix
            if abs(m.imag).max() > abs(m.real).max():
                m = m * 1j
            real.append(MoebiusTransform.from_matrix(m.real.astype(complex)))
        return GroupPresentation(tuple(real), "octagon-halfplane")
    raise ValueError(f"unknown model {model!r}")


OCTAGON_RELATOR = (0, 5, 2, 7, 4, 1, 6, 3)
