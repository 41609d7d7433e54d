"""Moebius transformations, upper half-space geometry and the spherical metric.

Boundary points of H^3 are plain Python complex numbers (or complex numpy
arrays); the point at infinity is the sentinel ``INF``.  Finite values whose
modulus exceeds ``INF_CUTOFF`` are canonicalized to ``INF``.

The spherical metric on C u {inf} is |dz| / (1 + |z|^2), i.e. half of the
round metric of the unit sphere under stereographic projection.  With this
normalization the distance from 0 to infinity is pi/2.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

INF = complex(math.inf, 0.0)
INF_CUTOFF = 1e12
DET_TOL = 1e-12


def is_inf(p) -> bool | np.ndarray:
    """True where ``p`` is the point at infinity (vectorized)."""
    if np.ndim(p) == 0:
        p = complex(p)
        return not (math.isfinite(p.real) and math.isfinite(p.imag)) or abs(p) > INF_CUTOFF
    p = np.asarray(p)
    return ~np.isfinite(p) | (np.abs(p) > INF_CUTOFF)


def canonical(p, cutoff: float = INF_CUTOFF):
    """Map non-finite or huge values to ``INF``; works on scalars and arrays."""
    if np.ndim(p) == 0:
        p = complex(p)
        if not (math.isfinite(p.real) and math.isfinite(p.imag)) or abs(p) > cutoff:
            return INF
        return p
    p = np.array(p, dtype=complex)
    with np.errstate(invalid="ignore"):
        bad = ~np.isfinite(p) | (np.abs(p) > cutoff)
    p[bad] = INF
    return p


def to_sphere(p) -> np.ndarray:
    """Inverse stereographic projection onto the unit sphere, INF -> north pole."""
    p = np.asarray(p, dtype=complex)
    with np.errstate(invalid="ignore"):
        inf = ~np.isfinite(p) | (np.abs(p) > INF_CUTOFF)
    z = np.where(inf, 0.0, p)
    r2 = np.abs(z) ** 2
    den = 1.0 + r2
    out = np.stack([2 * z.real / den, 2 * z.imag / den, (r2 - 1.0) / den], axis=-1)
    out[inf] = (0.0, 0.0, 1.0)
    return out


def from_sphere(v) -> np.ndarray:
    """Stereographic projection from the north pole; the pole maps to INF."""
    v = np.asarray(v, dtype=float)
    v = v / np.linalg.norm(v, axis=-1, keepdims=True)
    den = 1.0 - v[..., 2]
    with np.errstate(divide="ignore", invalid="ignore"):
        z = (v[..., 0] + 1j * v[..., 1]) / den
    return canonical(z)


def spherical_distance(p, q):
    """Distance in the metric |dz|/(1+|z|^2); vectorizes over broadcast inputs.

    Computed as half the angle between the stereographic images, which keeps
    full relative precision for both nearby and antipodal points.
    """
    x = to_sphere(p)
    y = to_sphere(q)
    cross = np.linalg.norm(np.cross(x, y), axis=-1)
    dot = np.sum(x * y, axis=-1)
    d = 0.5 * np.arctan2(cross, dot)
    if np.ndim(d) == 0:
        return float(d)
    return d


class HalfSpacePoint(NamedTuple):
    """Point (z, t) of the upper half-space model, t > 0."""

    z: complex
    t: float

    @classmethod
    def make(cls, z, t) -> "HalfSpacePoint":
        t = float(t)
        if not t > 0:
            raise ValueError(f"half-space height must be positive, got {t}")
        return cls(complex(z), t)


def hyperbolic_distance(x: HalfSpacePoint, y: HalfSpacePoint) -> float:
    num = abs(x.z - y.z) ** 2 + (x.t - y.t) ** 2
    return math.acosh(1.0 + num / (2.0 * x.t * y.t))


class Kind(enum.Enum):
    IDENTITY = "identity"
    ELLIPTIC = "elliptic"
    PARABOLIC = "parabolic"
    LOXODROMIC = "loxodromic"


class ElementClass(NamedTuple):
    kind: Kind
    translation_length: float = 0.0


@dataclass(frozen=True)
class MoebiusTransform:
    """z -> (a z + b) / (c z + d), normalized so that ad - bc = 1.

    The overall sign is left alone (PSL ambiguity); every derived quantity
    used here is invariant under it.
    """

    a: complex
    b: complex
    c: complex
    d: complex

    def __post_init__(self):
        a, b, c, d = (complex(v) for v in (self.a, self.b, self.c, self.d))
        det = a * d - b * c
        if abs(det) == 0 or not cmath.isfinite(det):
            raise ValueError("singular matrix does not define a Moebius transformation")
        s = cmath.sqrt(det)
        object.__setattr__(self, "a", a / s)
        object.__setattr__(self, "b", b / s)
        object.__setattr__(self, "c", c / s)
        object.__setattr__(self, "d", d / s)

    @classmethod
    def identity(cls) -> "MoebiusTransform":
        return cls(1, 0, 0, 1)

    @classmethod
    def from_matrix(cls, m) -> "MoebiusTransform":
        m = np.asarray(m, dtype=complex)
        return cls(m[0, 0], m[0, 1], m[1, 0], m[1, 1])

    @classmethod
    def translation(cls, w) -> "MoebiusTransform":
        return cls(1, w, 0, 1)

    @classmethod
    def dilation(cls, lam) -> "MoebiusTransform":
        """Diagonal element (lam, 0; 0, 1/lam), acting as z -> lam^2 z."""
        lam = complex(lam)
        return cls(lam, 0, 0, 1 / lam)

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.a, self.b], [self.c, self.d]])

    @property
    def trace(self) -> complex:
        return self.a + self.d

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "MoebiusTransform") -> "MoebiusTransform":
        return compose(self, other)

    def inverse(self) -> "MoebiusTransform":
        return MoebiusTransform(self.d, -self.b, -self.c, self.a)

    def conjugate_by(self, g: "MoebiusTransform") -> "MoebiusTransform":
        """g T g^-1."""
        return g @ self @ g.inverse()

    def __call__(self, p):
        return apply_boundary(self, p)

    def is_identity(self, tol: float = 1e-9) -> bool:
        m = self.matrix
        return bool(np.allclose(m, np.eye(2), atol=tol) or np.allclose(m, -np.eye(2), atol=tol))

    def to_json(self) -> list:
        return [[[v.real, v.imag] for v in row] for row in self.matrix]

    @classmethod
    def from_json(cls, rows) -> "MoebiusTransform":
        vals = [complex(float(e[0]), float(e[1])) for row in rows for e in row]
        if len(vals) != 4:
            raise ValueError("matrix literal must be 2x2")
        return cls(*vals)


def compose(A: MoebiusTransform, B: MoebiusTransform) -> MoebiusTransform:
    """A o B."""
    return MoebiusTransform(
        A.a * B.a + A.b * B.c,
        A.a * B.b + A.b * B.d,
        A.c * B.a + A.d * B.c,
        A.c * B.b + A.d * B.d,
    )


def apply_boundary(T: MoebiusTransform, p):
    """Action on C u {inf}; accepts a scalar or an array of boundary points."""
    if np.ndim(p) == 0:
        if is_inf(p):
            return INF if T.c == 0 else canonical(T.a / T.c)
        p = complex(p)
        den = T.c * p + T.d
        if den == 0:
            return INF
        return canonical((T.a * p + T.b) / den)
    p = np.asarray(p, dtype=complex)
    with np.errstate(invalid="ignore"):
        inf = ~np.isfinite(p) | (np.abs(p) > INF_CUTOFF)
    z = np.where(inf, 0.0, p)
    num = T.a * z + T.b
    den = T.c * z + T.d
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    out = np.where(den == 0, INF, out)
    out = np.where(inf, INF if T.c == 0 else T.a / T.c, out)
    return canonical(out)


def apply_halfspace(T: MoebiusTransform, x: HalfSpacePoint) -> HalfSpacePoint:
    """Poincare extension of T to H^3."""
    z, t = x
    w = T.c * z + T.d
    den = abs(w) ** 2 + abs(T.c) ** 2 * t * t
    zn = ((T.a * z + T.b) * w.conjugate() + T.a * T.c.conjugate() * t * t) / den
    return HalfSpacePoint(zn, t / den)


def classify(T: MoebiusTransform, tol: float = 1e-9) -> ElementClass:
    """Trace classification; borderline traces resolve to parabolic."""
    tr2 = T.trace ** 2
    if abs(tr2 - 4) <= tol:
        if T.is_identity(tol=tol):
            return ElementClass(Kind.IDENTITY)
        return ElementClass(Kind.PARABOLIC)
    if abs(tr2.imag) <= tol and -tol <= tr2.real < 4:
        return ElementClass(Kind.ELLIPTIC)
    return ElementClass(Kind.LOXODROMIC, 2.0 * math.log(abs(_big_eigenvalue(T.trace))))


def _big_eigenvalue(tr: complex) -> complex:
    s = cmath.sqrt(tr * tr - 4)
    l1, l2 = (tr + s) / 2, (tr - s) / 2
    return l1 if abs(l1) >= abs(l2) else l2


def fixed_points(T: MoebiusTransform, tol: float = 1e-12) -> tuple:
    """Roots of c z^2 + (d - a) z - b = 0, with INF when c vanishes."""
    if T.is_identity(tol=1e-12):
        raise ValueError("identity has no isolated fixed points")
    a, b, c, d = T.a, T.b, T.c, T.d
    scale = max(abs(a), abs(b), abs(c), abs(d))
    if abs(c) <= tol * scale:
        if abs(d - a) <= tol * scale:
            return (INF,)
        return (INF, canonical(b / (d - a)))
    disc = cmath.sqrt((a - d) ** 2 + 4 * b * c)
    if abs(disc) <= tol * scale:
        return (canonical((a - d) / (2 * c)),)
    # take the root without cancellation; the other follows from the product -b/c
    q = a - d + disc if abs(a - d + disc) >= abs(a - d - disc) else a - d - disc
    return (canonical(q / (2 * c)), canonical(-2 * b / q))


def attracting_fixed_point(T: MoebiusTransform):
    """Fixed point at which the derivative of T has modulus < 1.

    The fixed point z with c z + d equal to the larger eigenvalue is
    attracting, since T'(z) = (c z + d)^-2.  Returns None unless T is
    loxodromic.
    """
    if classify(T).kind is not Kind.LOXODROMIC:
        return None
    lam = _big_eigenvalue(T.trace)
    a, b, c, d = T.a, T.b, T.c, T.d
    # eigenvector (z, 1): solve with the better-conditioned row of T - lam I
    if abs(a - lam) + abs(b) >= abs(c) + abs(d - lam):
        return canonical(b / (lam - a)) if lam != a else INF
    return canonical((lam - d) / c) if c != 0 else INF


def disk_automorphism(a: complex, theta: float = 0.0) -> MoebiusTransform:
    """z -> e^{i theta} (z - a) / (1 - conj(a) z), an automorphism of the unit disk."""
    a = complex(a)
    if abs(a) >= 1:
        raise ValueError("disk automorphism needs |a| < 1")
    e = cmath.exp(0.5j * theta)
    return MoebiusTransform(e, -a * e, -a.conjugate() / e, 1 / e)
