"""Minimal immersions into H^3 from (u, alpha) data, hyperbolic Gauss maps
and quasiconformal estimates.

Frames are integrated in the hyperboloid model R^{1,3} with the form
diag(-1, 1, 1, 1).  A frame is the 4x4 matrix F = [X, e1, e2, N] whose
columns are the position and an orthonormal tangent/normal frame; it obeys
dF = F (Omega_x dx + Omega_y dy).  Inputs and outputs use the upper
half-space, with tangent vectors written as (Re dz, Im dz, dt).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.linalg import expm
from scipy.ndimage import binary_erosion

from .gauss_equation import ConformalFactorField, DiskGrid
from .moebius import INF, HalfSpacePoint, canonical, spherical_distance
from .quad_diff import PreconditionError, QuadDifferential

MINKOWSKI = np.diag([-1.0, 1.0, 1.0, 1.0])
LOOP_TOLERANCE = 1e-4
INF_EXCLUSION = 0.1
_SQ3 = math.sqrt(3.0)
_GAUSS = (0.5 - _SQ3 / 6, 0.5 + _SQ3 / 6)


# conversions between the hyperboloid and the upper half-space


def hyperboloid_to_halfspace(X):
    """Position(s) X (..., 4) on the hyperboloid to (z, t)."""
    X = np.asarray(X, dtype=float)
    den = X[..., 0] - X[..., 3]
    return (X[..., 1] + 1j * X[..., 2]) / den, 1.0 / den


def halfspace_to_hyperboloid(z, t):
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    s = np.abs(z) ** 2 + t ** 2
    return np.stack([(1 + s) / (2 * t), z.real / t, z.imag / t, (s - 1) / (2 * t)], axis=-1)


def push_vector(X, V):
    """Tangent vector V at X (hyperboloid) to (Re dz, Im dz, dt) in the half-space."""
    X = np.asarray(X, dtype=float)
    V = np.asarray(V, dtype=float)
    z, t = hyperboloid_to_halfspace(X)
    w = V[..., 0] - V[..., 3]
    dt = -w * t * t
    dz = (V[..., 1] + 1j * V[..., 2]) * t - z * w * t
    return np.stack([dz.real, dz.imag, dt], axis=-1)


def pull_vector(z, t, v):
    """Half-space tangent vector v = (Re dz, Im dz, dt) at (z, t) to the hyperboloid."""
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    v = np.asarray(v, dtype=float)
    dz = v[..., 0] + 1j * v[..., 1]
    dt = v[..., 2]
    s = np.abs(z) ** 2 + t ** 2
    ds = 2 * (z.conjugate() * dz).real + 2 * t * dt
    d0 = ds / (2 * t) - (1 + s) * dt / (2 * t * t)
    d3 = ds / (2 * t) - (s - 1) * dt / (2 * t * t)
    dw = dz / t - z * dt / (t * t)
    return np.stack([d0, dw.real, dw.imag, d3], axis=-1)


def minkowski(a, b):
    return -a[..., 0] * b[..., 0] + np.sum(a[..., 1:] * b[..., 1:], axis=-1)


# frames


@dataclass(frozen=True)
class FramePoint:
    """Surface point with tangent1, tangent2 and unit normal in the half-space."""

    position: HalfSpacePoint
    normal: np.ndarray
    tangent1: np.ndarray
    tangent2: np.ndarray

    def gram(self) -> np.ndarray:
        V = np.array([self.tangent1, self.tangent2, self.normal], dtype=float)
        return V @ V.T / self.position.t ** 2

    def gram_defect(self) -> float:
        return float(np.max(np.abs(self.gram() - np.eye(3))))

    def orientation(self) -> int:
        return int(np.sign(np.linalg.det(np.array([self.tangent1, self.tangent2, self.normal]))))

    def validate(self, tol: float = 1e-8):
        if not self.position.t > 0:
            raise PreconditionError("frame position must have t > 0", witness=self.position)
        d = self.gram_defect()
        if d > tol:
            raise PreconditionError(f"frame is not orthonormal (Gram defect {d:.3g})", witness=d)

    def to_matrix(self) -> np.ndarray:
        z, t = self.position
        cols = [halfspace_to_hyperboloid(z, t)]
        cols += [pull_vector(z, t, v) for v in (self.tangent1, self.tangent2, self.normal)]
        return np.stack(cols, axis=-1)

    @classmethod
    def from_matrix(cls, F) -> "FramePoint":
        F = np.asarray(F, dtype=float)
        X = F[:, 0]
        z, t = hyperboloid_to_halfspace(X)
        vec = [push_vector(X, F[:, k]) for k in (1, 2, 3)]
        return cls(HalfSpacePoint(complex(z), float(t)), vec[2], vec[0], vec[1])

    @classmethod
    def normalized(cls) -> "FramePoint":
        """(0, 1) with tangents along the x and y axes and downward normal."""
        return cls(HalfSpacePoint(0j, 1.0), np.array([0.0, 0.0, -1.0]),
                   np.array([1.0, 0.0, 0.0]), np.array([0.0, 1.0, 0.0]))


# connection forms


def _connection(z, u, ux, uy, alpha: QuadDifferential):
    """Omega_x, Omega_y at points z given u and its first derivatives."""
    x, y = z.real, z.imag
    q = 1 - x * x - y * y
    phi = u + np.log(2 / q)
    px = ux + 2 * x / q
    py = uy + 2 * y / q
    E = np.exp(phi)
    f = alpha(z)
    k = np.exp(-2 * phi)
    b11 = k * f.real
    b12 = -k * f.imag
    m = z.shape
    Ox = np.zeros(m + (4, 4))
    Oy = np.zeros(m + (4, 4))
    Ox[..., 1, 0] = E
    Ox[..., 0, 1] = E
    Ox[..., 2, 1] = -py
    Ox[..., 3, 1] = -E * b11
    Ox[..., 1, 2] = py
    Ox[..., 3, 2] = -E * b12
    Ox[..., 1, 3] = E * b11
    Ox[..., 2, 3] = E * b12
    Oy[..., 2, 0] = E
    Oy[..., 2, 1] = px
    Oy[..., 3, 1] = -E * b12
    Oy[..., 0, 2] = E
    Oy[..., 1, 2] = -px
    Oy[..., 3, 2] = E * b11
    Oy[..., 1, 3] = E * b12
    Oy[..., 2, 3] = -E * b11
    return Ox, Oy


def _d4(v, h, axis):
    """Fourth-order central first derivative; wraps at the edges (callers mask)."""
    r = lambda k: np.roll(v, -k, axis=axis)
    return (r(-2) - 8 * r(-1) + 8 * r(1) - r(2)) / (12 * h)


def _cubic_weights(c):
    return (-c * (c - 1) * (c - 2) / 6, (c + 1) * (c - 1) * (c - 2) / 2,
            -(c + 1) * c * (c - 2) / 2, (c + 1) * c * (c - 1) / 6)


def _edge_values(v, axis, c):
    """Cubic interpolation of v at offset c in (0, 1) along ``axis`` from every node."""
    w = _cubic_weights(c)
    return sum(wk * np.roll(v, -k, axis=axis) for wk, k in zip(w, (-1, 0, 1, 2)))


def _magnus(A1, A2, h):
    """Fourth-order Magnus step for dF = F A over a step h with Gauss-point samples."""
    comm = A1 @ A2 - A2 @ A1
    return expm(0.5 * h * (A1 + A2) + (_SQ3 / 12) * h * h * comm)


def patch_mask(grid: DiskGrid, margin: int = 4) -> np.ndarray:
    """Nodes whose (2 margin + 1)^2 neighbourhood lies inside the disk."""
    st = np.ones((2 * margin + 1, 2 * margin + 1), dtype=bool)
    return binary_erosion(grid.inside, structure=st, border_value=0)


def edge_transports(u: ConformalFactorField, alpha: QuadDifferential, mask: np.ndarray | None = None):
    """Transport matrices along every x edge and y edge of the patch.

    Mx[i, j] carries F(i, j) to F(i + 1, j); My[i, j] carries F(i, j) to F(i, j + 1).
    Entries for edges leaving the patch are NaN.
    """
    g = u.grid
    mask = patch_mask(g) if mask is None else mask
    h = g.h
    Z = g.z_full
    v = u.values
    ux = _d4(v, h, 0)
    uy = _d4(v, h, 1)
    out = []
    for axis in (0, 1):
        ok = mask & np.roll(mask, -1, axis=axis)
        if axis == 0:
            ok[-1, :] = False
        else:
            ok[:, -1] = False
        idx = np.nonzero(ok)
        A = []
        for c in _GAUSS:
            zc = Z[idx] + (c * h if axis == 0 else 1j * c * h)
            vals = [_edge_values(q, axis, c)[idx] for q in (v, ux, uy)]
            Om = _connection(zc, *vals, alpha)
            A.append(Om[axis])
        M = np.full((g.n, g.n, 4, 4), np.nan)
        if len(idx[0]):
            M[idx] = _magnus(A[0], A[1], h)
        out.append(M)
    return out[0], out[1]


@dataclass(frozen=True, eq=False)
class ImmersedPatch:
    """Integrated frames on the nodes of ``mask``; NaN elsewhere."""

    grid: DiskGrid
    frames: np.ndarray
    mask: np.ndarray
    u: ConformalFactorField
    alpha: QuadDifferential
    loop_error: float
    loop_tolerance: float
    gram_defect: float
    orientation: int

    @property
    def valid(self) -> bool:
        return bool(self.loop_error <= self.loop_tolerance)

    @property
    def center(self) -> tuple:
        return self.grid.center

    def frame(self, i: int, j: int) -> FramePoint:
        if not self.mask[i, j]:
            raise IndexError(f"node ({i}, {j}) is not in the patch")
        return FramePoint.from_matrix(self.frames[i, j])

    def positions(self):
        """Half-space positions (z, t) on the full array, NaN off the patch."""
        with np.errstate(invalid="ignore", divide="ignore"):
            return hyperboloid_to_halfspace(self.frames[..., :, 0])

    def normals(self, sign: int = 1) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return sign * push_vector(self.frames[..., :, 0], self.frames[..., :, 3])

    def phi(self) -> np.ndarray:
        """log of the conformal factor of g = e^{2 phi} |dz|^2."""
        Z = self.grid.z_full
        with np.errstate(divide="ignore", invalid="ignore"):
            return self.u.values + np.log(2 / (1 - np.abs(Z) ** 2))

    def induced_norm(self) -> np.ndarray:
        """||alpha||_g = e^{-2 phi} |f| per node, NaN off the patch."""
        out = np.exp(-2 * self.phi()) * np.abs(self.alpha(self.grid.z_full))
        return np.where(self.mask, out, np.nan)

    def first_fundamental_form(self) -> np.ndarray:
        """(n, n, 2, 2) metric recomputed from positions by central differences."""
        X = self.frames[..., :, 0]
        h = self.grid.h
        Xx = (np.roll(X, -1, 0) - np.roll(X, 1, 0)) / (2 * h)
        Xy = (np.roll(X, -1, 1) - np.roll(X, 1, 1)) / (2 * h)
        G = np.empty(X.shape[:2] + (2, 2))
        G[..., 0, 0] = minkowski(Xx, Xx)
        G[..., 0, 1] = G[..., 1, 0] = minkowski(Xx, Xy)
        G[..., 1, 1] = minkowski(Xy, Xy)
        ok = self.mask & np.roll(self.mask, 1, 0) & np.roll(self.mask, -1, 0) & np.roll(self.mask, 1, 1) & np.roll(self.mask, -1, 1)
        G[~ok] = np.nan
        return G

    def metric_field(self) -> "MetricTensorField":
        e = np.exp(2 * self.phi()[self.mask])
        g = np.zeros((len(e), 2, 2))
        g[:, 0, 0] = g[:, 1, 1] = e
        return MetricTensorField(g)

    def shape_operator(self) -> np.ndarray:
        """S = g^{-1} B per patch node, B = Re(alpha)."""
        f = self.alpha(self.grid.z_full[self.mask])
        k = np.exp(-2 * self.phi()[self.mask])
        S = np.empty((len(f), 2, 2))
        S[:, 0, 0] = k * f.real
        S[:, 0, 1] = S[:, 1, 0] = -k * f.imag
        S[:, 1, 1] = -k * f.real
        return S


def integrate_immersion(u: ConformalFactorField, alpha: QuadDifferential, anchor: FramePoint | None = None,
                        loop_tolerance: float = LOOP_TOLERANCE, mask: np.ndarray | None = None) -> ImmersedPatch:
    """Integrate frames from the grid center, first along the x axis, then vertically."""
    if not u.converged:
        raise PreconditionError("conformal factor field did not converge")
    anchor = anchor or FramePoint.normalized()
    anchor.validate()
    g = u.grid
    mask = patch_mask(g) if mask is None else np.asarray(mask, dtype=bool)
    c = g.n // 2
    if not mask[c, c]:
        raise PreconditionError("patch does not contain the grid center")
    Mx, My = edge_transports(u, alpha, mask)
    F = np.full((g.n, g.n, 4, 4), np.nan)
    F[c, c] = anchor.to_matrix()
    for i in range(c + 1, g.n):
        if not mask[i, c]:
            break
        F[i, c] = F[i - 1, c] @ Mx[i - 1, c]
    for i in range(c - 1, -1, -1):
        if not mask[i, c]:
            break
        F[i, c] = F[i + 1, c] @ np.linalg.inv(Mx[i, c])
    reach = ~np.isnan(F[:, c, 0, 0])
    for i in np.nonzero(reach)[0]:
        for j in range(c + 1, g.n):
            if not mask[i, j]:
                break
            F[i, j] = F[i, j - 1] @ My[i, j - 1]
        for j in range(c - 1, -1, -1):
            if not mask[i, j]:
                break
            F[i, j] = F[i, j + 1] @ np.linalg.inv(My[i, j])
    got = ~np.isnan(F[..., 0, 0])
    loop = plaquette_errors(Mx, My)
    lerr = float(np.nanmax(loop)) if np.any(np.isfinite(loop)) else 0.0
    defect = _gram_defect(F[got])
    orient = int(np.sign(np.linalg.det(F[c, c])))
    return ImmersedPatch(g, F, got, u, alpha, lerr, loop_tolerance, defect, orient)


def plaquette_errors(Mx, My) -> np.ndarray:
    """||Mx(i,j) My(i+1,j) Mx(i,j+1)^-1 My(i,j)^-1 - I||_max per plaquette."""
    A = Mx[:-1, :-1]
    B = My[1:, :-1]
    C = Mx[:-1, 1:]
    D = My[:-1, :-1]
    ok = ~(np.isnan(A[..., 0, 0]) | np.isnan(B[..., 0, 0]) | np.isnan(C[..., 0, 0]) | np.isnan(D[..., 0, 0]))
    out = np.full(ok.shape, np.nan)
    if np.any(ok):
        P = A[ok] @ B[ok] @ np.linalg.inv(D[ok] @ C[ok])
        out[ok] = np.max(np.abs(P - np.eye(4)), axis=(-2, -1))
    return out


def _gram_defect(F) -> float:
    """Max deviation of the half-space Gram matrix of (e1, e2, N) from the identity."""
    if len(F) == 0:
        return 0.0
    X = F[:, :, 0]
    _, t = hyperboloid_to_halfspace(X)
    V = np.stack([push_vector(X, F[:, :, k]) for k in (1, 2, 3)], axis=1)
    G = V @ np.swapaxes(V, 1, 2) / (t ** 2)[:, None, None]
    return float(np.max(np.abs(G - np.eye(3))))


def flat_plane_positions(z):
    """Closed-form totally geodesic plane of the normalized flat patch: (z_hs, t)."""
    z = np.asarray(z, dtype=complex)
    r2 = np.abs(z) ** 2
    return 2 * z / (1 + r2), (1 - r2) / (1 + r2)


# Gauss maps


def gauss_map_point(p: HalfSpacePoint, v, sign: int = 1, tol: float = 1e-8):
    """Endpoint of the geodesic ray from p in direction sign * v."""
    z, t = complex(p[0]), float(p[1])
    v = np.asarray(v, dtype=float)
    if not t > 0:
        raise PreconditionError("point must lie in the upper half-space", witness=p)
    nv = float(np.linalg.norm(v))
    if abs(nv - t) > tol * max(1.0, t):
        raise PreconditionError(f"direction is not hyperbolic-unit (|v| = {nv:.12g}, t = {t:.12g})", witness=nv)
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    d = sign * v / nv
    w = complex(d[0], d[1])
    s = abs(w)
    if s == 0:
        return INF if d[2] > 0 else z
    # (1 + d_t)/|w| written to avoid cancellation when d_t is near -1
    k = (1 + d[2]) / s if d[2] >= 0 else s / (1 - d[2])
    return canonical(z + t * k * (w / s))


def gauss_map_array(z, t, V, sign: int = 1) -> np.ndarray:
    """Vectorized ``gauss_map_point`` without the unit check (V rows unit up to scale t)."""
    z = np.asarray(z, dtype=complex)
    t = np.asarray(t, dtype=float)
    V = sign * np.asarray(V, dtype=float)
    n = np.linalg.norm(V, axis=-1)
    with np.errstate(invalid="ignore", divide="ignore"):
        d = V / n[..., None]
        w = d[..., 0] + 1j * d[..., 1]
        s = np.abs(w)
        k = np.where(d[..., 2] >= 0, (1 + d[..., 2]) / s, s / (1 - d[..., 2]))
        out = z + t * k * w / s
    out = np.where(s == 0, np.where(d[..., 2] > 0, INF, z), out)
    return canonical(out)


@dataclass(frozen=True, eq=False)
class BoundaryField:
    """Boundary points indexed by grid nodes; ``mask`` marks meaningful nodes."""

    grid: DiskGrid
    values: np.ndarray
    mask: np.ndarray

    @classmethod
    def from_function(cls, grid: DiskGrid, fn, mask: np.ndarray | None = None) -> "BoundaryField":
        mask = grid.inside if mask is None else mask
        vals = np.full((grid.n, grid.n), np.nan + 0j)
        vals[mask] = fn(grid.z_full[mask])
        return cls(grid, vals, mask)


def gauss_map_patch(patch: ImmersedPatch, sign: int = 1, require_valid: bool = True) -> BoundaryField:
    """Gauss image of every patch node under the +/- normal."""
    if require_valid and not patch.valid:
        raise PreconditionError(f"patch is invalid (loop error {patch.loop_error:.3g})")
    z, t = patch.positions()
    V = patch.normals(1)
    m = patch.mask
    vals = np.full(m.shape, np.nan + 0j)
    n = np.linalg.norm(V[m], axis=-1)
    bad = np.abs(n - t[m]) > 1e-8 * np.maximum(1, t[m])
    if np.any(bad):
        k = tuple(np.argwhere(m)[np.argmax(bad)])
        raise PreconditionError(f"normal at node {k} is not hyperbolic-unit", witness=k)
    vals[m] = gauss_map_array(z[m], t[m], V[m], sign)
    return BoundaryField(patch.grid, vals, m.copy())


def _fd(v, valid, h, axis):
    """Second-order derivative: central where possible, one-sided at the edges."""
    sh = lambda k: np.roll(v, -k, axis=axis)
    ok = lambda k: np.roll(valid, -k, axis=axis) & _inrange(valid.shape, axis, k)
    out = np.full(v.shape, np.nan + 0j)
    c = valid & ok(1) & ok(-1)
    out[c] = ((sh(1) - sh(-1)) / (2 * h))[c]
    f = valid & ~c & ok(1) & ok(2)
    out[f] = ((-3 * v + 4 * sh(1) - sh(2)) / (2 * h))[f]
    b = valid & ~c & ~f & ok(-1) & ok(-2)
    out[b] = ((3 * v - 4 * sh(-1) + sh(-2)) / (2 * h))[b]
    return out


def _inrange(shape, axis, k):
    idx = np.arange(shape[axis]) + k
    good = (idx >= 0) & (idx < shape[axis])
    return good[:, None] if axis == 0 else good[None, :]


@dataclass(frozen=True)
class DerivativeData:
    fz: np.ndarray
    fzbar: np.ndarray
    used: np.ndarray
    degenerate: np.ndarray
    near_infinity: int


def map_derivatives(m: BoundaryField, region: np.ndarray | None = None) -> DerivativeData:
    g = m.grid
    vals = m.values
    with np.errstate(invalid="ignore"):
        finite = m.mask & np.isfinite(vals) & (np.abs(vals) <= 1e12)
    near = np.zeros_like(finite)
    near[finite] = spherical_distance(vals[finite], INF) < INF_EXCLUSION
    near |= m.mask & ~finite
    valid = m.mask & ~near
    fx = _fd(np.where(valid, vals, 0), valid, g.h, 0)
    fy = _fd(np.where(valid, vals, 0), valid, g.h, 1)
    fz = (fx - 1j * fy) / 2
    fzb = (fx + 1j * fy) / 2
    used = valid & np.isfinite(fz) & np.isfinite(fzb)
    if region is not None:
        used &= region
    degenerate = used & (np.abs(fz) < 1e-12)
    used &= ~degenerate
    return DerivativeData(fz, fzb, used, degenerate, int(np.sum(near & (m.mask if region is None else region))))


@dataclass(frozen=True)
class BeltramiReport:
    mu: np.ndarray
    K: float
    mu_max: float
    argmax: tuple
    degenerate: int
    near_infinity: int


def dilatation(mu_max: float) -> float:
    return (1 + mu_max) / (1 - mu_max) if mu_max < 1 else math.inf


def beltrami_estimate(m: BoundaryField, grid: DiskGrid | None = None, region: np.ndarray | None = None) -> BeltramiReport:
    """mu = f_zbar / f_z per node and K = (1 + |mu|max)/(1 - |mu|max)."""
    if grid is not None and not grid.same_as(m.grid):
        raise ValueError("map and grid differ")
    d = map_derivatives(m, region)
    mu = np.full(d.fz.shape, np.nan + 0j)
    mu[d.used] = d.fzbar[d.used] / d.fz[d.used]
    a = np.where(d.used, np.abs(mu), -1)
    k = np.unravel_index(np.argmax(a), a.shape)
    mmax = float(max(a[k], 0.0))
    return BeltramiReport(mu, dilatation(mmax), mmax, tuple(int(i) for i in k), int(d.degenerate.sum()), d.near_infinity)


def jacobian_estimate(m: BoundaryField, grid: DiskGrid | None = None, region: np.ndarray | None = None) -> np.ndarray:
    """|f_z|^2 - |f_zbar|^2 per node, NaN where not estimated."""
    if grid is not None and not grid.same_as(m.grid):
        raise ValueError("map and grid differ")
    d = map_derivatives(m, region)
    J = np.full(d.fz.shape, np.nan)
    J[d.used] = np.abs(d.fz[d.used]) ** 2 - np.abs(d.fzbar[d.used]) ** 2
    return J


# equidistant foliation


@dataclass(frozen=True)
class MetricTensorField:
    """Symmetric 2x2 tensors, one per node (shape (m, 2, 2))."""

    tensors: np.ndarray

    def __post_init__(self):
        g = np.array(self.tensors, dtype=float)
        if g.ndim == 2:
            g = g[None]
        if g.shape[-2:] != (2, 2):
            raise ValueError("metric tensors must be 2x2")
        g = 0.5 * (g + np.swapaxes(g, -1, -2))
        g.setflags(write=False)
        object.__setattr__(self, "tensors", g)

    def min_eigenvalue(self) -> float:
        return float(np.min(np.linalg.eigvalsh(self.tensors)))

    def is_positive_definite(self) -> bool:
        return self.min_eigenvalue() > 0


@dataclass(frozen=True)
class EquidistantResult:
    metric: MetricTensorField
    min_eigenvalue: float


def equidistant_metric(g: MetricTensorField, S, t: float) -> EquidistantResult:
    """g((cosh t I + sinh t S) ., (cosh t I + sinh t S) .) per node."""
    S = np.asarray(S, dtype=float)
    if S.ndim == 2:
        S = S[None]
    M = math.cosh(t) * np.eye(2) + math.sinh(t) * S
    out = MetricTensorField(np.swapaxes(M, -1, -2) @ g.tensors @ M)
    return EquidistantResult(out, out.min_eigenvalue())


def degeneracy_scan(g: MetricTensorField, S, t_max: float = 10.0, samples: int = 4001):
    """First t in [-t_max, t_max] of smallest |t| where the metric degenerates, or None.

    Sign changes of det are bracketed on a uniform scan and refined by bisection.
    """
    from scipy.optimize import brentq

    S = np.asarray(S, dtype=float)
    if S.ndim == 2:
        S = S[None]

    def det(t):
        M = math.cosh(t) * np.eye(2) + math.sinh(t) * S
        return np.linalg.det(M).min()

    ts = np.linspace(-t_max, t_max, samples)
    vals = np.array([det(t) for t in ts])
    roots = []
    for k in range(samples - 1):
        if vals[k] == 0:
            roots.append(ts[k])
        elif vals[k] * vals[k + 1] < 0:
            roots.append(brentq(det, ts[k], ts[k + 1], xtol=1e-14))
    if not roots:
        return None
    return float(min(roots, key=abs))


# patch dump


def dump_patch(patch: ImmersedPatch, prefix, header: dict | None = None) -> tuple:
    """Write <prefix>.json metadata and <prefix>.bin with columns Re z, Im z, t, N (3)."""
    prefix = Path(prefix)
    idx = np.argwhere(patch.mask)
    z, t = patch.positions()
    N = patch.normals(1)
    m = patch.mask
    cols = np.column_stack([z[m].real, z[m].imag, t[m], N[m]])
    meta = dict(header or {})
    meta.update({
        "grid": patch.grid.metadata(),
        "nodes": len(idx),
        "columns": ["re_z", "im_z", "t", "n_re_z", "n_im_z", "n_t"],
        "dtype": "float64-le",
        "loop_error": patch.loop_error,
        "loop_tolerance": patch.loop_tolerance,
        "valid": patch.valid,
        "gram_defect": patch.gram_defect,
        "orientation": patch.orientation,
        "node_index": idx.tolist(),
    })
    jp, bp = prefix.with_suffix(".json"), prefix.with_suffix(".bin")
    jp.write_text(json.dumps(meta, indent=1, sort_keys=True))
    cols.astype("<f8").tofile(bp)
    return jp, bp


def load_patch_columns(prefix) -> tuple:
    prefix = Path(prefix)
    meta = json.loads(prefix.with_suffix(".json").read_text())
    data = np.fromfile(prefix.with_suffix(".bin"), dtype="<f8").reshape(meta["nodes"], len(meta["columns"]))
    return meta, data
