"""Holomorphic quadratic differentials f(z) dz^2 on the unit disk.

Norms are taken with respect to the Poincare metric 4|dz|^2/(1-|z|^2)^2, so
that ||alpha||_h(z) = (1-|z|^2)^2 |f(z)| / 4.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import minimize

MAX_DEGREE = 64
SATURATION_CAP = 1 - 1e-9


class PreconditionError(ValueError):
    """Input violates a documented precondition; ``witness`` locates it."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class QuadDifferential:
    """alpha = f dz^2 with f a polynomial given by its Taylor coefficients."""

    coefficients: np.ndarray

    def __post_init__(self):
        c = np.atleast_1d(np.asarray(self.coefficients, dtype=complex)).copy()
        if c.ndim != 1 or len(c) == 0:
            raise ValueError("coefficients must be a nonempty 1-d sequence")
        if len(c) - 1 > MAX_DEGREE:
            raise ValueError(f"degree {len(c) - 1} exceeds the cap {MAX_DEGREE}")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @classmethod
    def zero(cls) -> "QuadDifferential":
        return cls([0.0])

    @property
    def degree(self) -> int:
        return len(self.coefficients) - 1

    def is_zero(self) -> bool:
        return not np.any(self.coefficients)

    def __call__(self, z):
        return np.polynomial.polynomial.polyval(np.asarray(z, dtype=complex), self.coefficients)

    def derivative(self) -> "QuadDifferential":
        if self.degree == 0:
            return QuadDifferential.zero()
        return QuadDifferential(np.polynomial.polynomial.polyder(self.coefficients))

    def scaled(self, s: complex) -> "QuadDifferential":
        return QuadDifferential(self.coefficients * s)

    def to_json(self) -> list:
        return [[c.real, c.imag] for c in self.coefficients]

    @classmethod
    def from_json(cls, rows) -> "QuadDifferential":
        return cls([complex(float(r[0]), float(r[1])) for r in rows])


def _check_disk(z):
    if np.any(np.abs(z) >= 1):
        raise ValueError("quadratic differential norm is only defined for |z| < 1")


def norm_hyperbolic(alpha: QuadDifferential, z):
    """(1 - |z|^2)^2 |f(z)| / 4; vectorized."""
    z = np.asarray(z, dtype=complex)
    _check_disk(z)
    out = (1 - np.abs(z) ** 2) ** 2 * np.abs(alpha(z)) / 4
    return float(out) if out.ndim == 0 else out


def norm_induced(alpha: QuadDifferential, u, z):
    """exp(-2u(z)) ||alpha||_h(z) with u a solved conformal-factor field."""
    uz = u.interpolate(z)
    return np.exp(-2 * uz) * norm_hyperbolic(alpha, z)


def pullback(alpha: QuadDifferential, phi, degree: int = MAX_DEGREE) -> QuadDifferential:
    """Taylor truncation of phi^* alpha = f(phi(z)) phi'(z)^2 dz^2.

    ``phi`` is a Moebius automorphism of the disk; the coefficients are
    recovered by FFT on the circle |z| = 1/2 and truncated at ``degree``.
    """
    m = 4 * (degree + 1)
    r = 0.5
    z = r * np.exp(2j * np.pi * np.arange(m) / m)
    w = phi(z)
    dphi = 1.0 / (phi.c * z + phi.d) ** 2
    vals = alpha(w) * dphi ** 2
    coef = np.fft.fft(vals) / m / r ** np.arange(m)
    return QuadDifferential(coef[: degree + 1])


class HarnackResult(NamedTuple):
    radius: float
    saturated: bool


def harnack_radius(eps: float, C: float, full_output: bool = False):
    """Hyperbolic radius around a zero on which ||alpha||_h < eps.

    With C' = (1 - 1/4)^2 / (4 C) the estimate holds on the Euclidean disk of
    radius 2 C' eps, i.e. hyperbolic radius log((1 + 2C'eps)/(1 - 2C'eps)).
    When 2 C' eps >= 1 the formula is evaluated at the cap 1 - 1e-9 and the
    result is flagged as saturated.
    """
    if not eps > 0 or not C > 0:
        raise ValueError("harnack_radius needs eps > 0 and C > 0")
    x = 2 * (0.75 ** 2 / (4 * C)) * eps
    saturated = x >= 1
    if saturated:
        x = SATURATION_CAP
    r = math.log((1 + x) / (1 - x))
    return HarnackResult(r, saturated) if full_output else r


def euclidean_radius(r_h: float) -> float:
    """Euclidean radius of the hyperbolic ball B_h(0, r_h) in the disk model."""
    return math.tanh(r_h / 2)


def induced_ball_radius(r_h: float) -> float:
    """Radius of an induced-metric ball contained in B_h(p, r_h) when u > -ln(2)/2."""
    if r_h < 0:
        raise ValueError("radius must be nonnegative")
    return r_h / math.sqrt(2)


class SupNorm(NamedTuple):
    value: float
    argmax: complex


def sup_norm(alpha: QuadDifferential, rmax: float = 1 - 1e-3, n_radii: int = 96, n_angles: int = 384,
             refine: bool = True, candidates: int = 3) -> SupNorm:
    """Sup of ||alpha||_h over |z| <= rmax, sampled on concentric circles.

    The circle |z| = 1/2 is always included.  The largest few local maxima
    of the samples are polished by alternating searches in angle and radius.
    """
    radii = np.union1d(np.linspace(0, rmax, n_radii), [0.5])
    th = 2 * np.pi * np.arange(n_angles) / n_angles
    z = radii[:, None] * np.exp(1j * th)[None, :]
    vals = (1 - radii[:, None] ** 2) ** 2 * np.abs(alpha(z)) / 4
    i, j = np.unravel_index(np.argmax(vals), vals.shape)
    best, zbest = float(vals[i, j]), complex(z[i, j])
    if not refine or best <= 0:
        return SupNorm(best, zbest)
    pad = np.pad(vals, ((1, 1), (0, 0)), constant_values=-1.0)
    peak = np.ones(vals.shape, dtype=bool)
    for di, dj in ((-1, 0), (1, 0), (0, -1), (0, 1)):
        peak &= vals >= np.roll(pad, (-di, -dj), axis=(0, 1))[1:-1]
    ii, jj = np.nonzero(peak)
    order = np.argsort(-vals[ii, jj], kind="stable")[:candidates]
    dr = radii[1] - radii[0]

    coef = [complex(c) for c in alpha.coefficients[::-1]]

    def neg(p):
        w = complex(p[0], p[1])
        r2 = w.real * w.real + w.imag * w.imag
        if r2 > rmax * rmax:
            return 0.0
        f = 0j
        for c in coef:
            f = f * w + c
        return -(1 - r2) ** 2 * abs(f) / 4

    for k in order:
        z0 = z[ii[k], jj[k]]
        x0 = np.array([z0.real, z0.imag])
        simplex = x0 + dr * np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
        res = minimize(neg, x0, method="Nelder-Mead",
                       options={"initial_simplex": simplex, "xatol": 1e-10, "fatol": 1e-15, "maxiter": 2000})
        if -res.fun > best:
            best, zbest = float(-res.fun), complex(res.x[0], res.x[1])
    return SupNorm(best, zbest)


@dataclass(frozen=True)
class HarnackReport:
    passed: bool
    max_norm: float
    eps: float
    C: float
    radius: float
    euclidean_radius: float
    saturated: bool
    witness: complex
    samples: int


def ball_samples(rho: float, samples: int) -> np.ndarray:
    """Deterministic points filling the closed disk |z| <= rho (sunflower layout)."""
    k = np.arange(samples) + 0.5
    r = rho * np.sqrt(k / samples)
    r[-1] = rho
    th = np.pi * (3 - np.sqrt(5)) * k
    return r * np.exp(1j * th)


def verify_harnack(alpha: QuadDifferential, C: float, eps: float, samples: int = 20000,
                   sup: SupNorm | None = None) -> HarnackReport:
    """Sample ||alpha||_h on B_h(0, harnack_radius(eps, C)) and compare with eps.

    ``sup`` may carry a previously computed sup_norm(alpha).
    """
    if abs(alpha(0)) > 1e-12:
        raise PreconditionError("alpha must vanish at the origin", witness=0j)
    sup = sup_norm(alpha) if sup is None else sup
    if sup.value > C * (1 + 1e-12):
        raise PreconditionError(f"sampled sup norm {sup.value:.6g} exceeds C = {C}", witness=sup.argmax)
    r, sat = harnack_radius(eps, C, full_output=True)
    rho = euclidean_radius(r)
    z = np.concatenate([ball_samples(rho, samples), rho * np.exp(2j * np.pi * np.arange(1024) / 1024)])
    vals = norm_hyperbolic(alpha, z)
    k = int(np.argmax(vals))
    m = float(vals[k])
    return HarnackReport(m <= eps * (1 + 1e-9), m, eps, C, r, rho, sat, complex(z[k]), len(z))


def random_differential(rng: np.random.Generator, degree: int, sup: float = 1.0, vanish_at_zero: bool = True) -> QuadDifferential:
    """Random polynomial differential rescaled so that its sampled sup norm equals ``sup``."""
    c = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    c /= np.arange(1, degree + 2) ** 0.5
    if vanish_at_zero:
        c[0] = 0
    alpha = QuadDifferential(c)
    return alpha.scaled(sup / sup_norm(alpha).value)
