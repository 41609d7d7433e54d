"""Newton solver for the Gauss equation of a minimal disk in H^3.

The conformal factor u of g = e^{2u} h (h the Poincare metric) satisfies

    Delta_h u + 1 - e^{2u} - e^{-2u} ||alpha||_h^2 = 0,

with Delta_h = ((1 - |z|^2)^2 / 4) Delta.  The problem is posed on the disk
|z| < rho with Dirichlet data u = 0 on |z| = rho.  Nodes next to the circle
use Shortley-Weller arms that end exactly on the boundary, which keeps the
scheme second order on the curved edge.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import spsolve

from .quad_diff import QuadDifferential, norm_hyperbolic, sup_norm

LOWER_BOUND = -math.log(2) / 2
BOUNDARY_NOTE = "Dirichlet u = 0 on |z| = rho (disk model stand-in for a closed surface)"


class RegimeError(ValueError):
    """sup ||alpha||_h >= 1: outside the almost-Fuchsian regime."""

    def __init__(self, message, sup=None, witness=None):
        super().__init__(message)
        self.sup = sup
        self.witness = witness


class SolverError(RuntimeError):
    """Damped Newton failed to reduce the residual; ``field`` is the last iterate."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class DiskGrid:
    """Cartesian n x n grid on [-rho, rho]^2 clipped to the open disk |z| < rho.

    ``inside[i, j]`` marks unknowns (index i runs along x, j along y).  The
    arrays ``arms`` hold the east, west, north and south stencil arm lengths;
    an arm shorter than h ends on the circle.
    """

    rho: float = 0.85
    n: int = 129
    x: np.ndarray = field(init=False, repr=False)
    h: float = field(init=False)
    inside: np.ndarray = field(init=False, repr=False)
    nodes: np.ndarray = field(init=False, repr=False)
    arms: np.ndarray = field(init=False, repr=False)
    boundary: np.ndarray = field(init=False, repr=False)
    index: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if not 0 < self.rho < 1:
            raise ValueError("grid radius must satisfy 0 < rho < 1")
        if self.n < 5 or self.n % 2 == 0:
            raise ValueError("grid size must be odd and at least 5")
        x = np.linspace(-self.rho, self.rho, self.n)
        h = 2 * self.rho / (self.n - 1)
        X, Y = np.meshgrid(x, x, indexing="ij")
        r2 = X ** 2 + Y ** 2
        inside = r2 < (self.rho * (1 - 1e-12)) ** 2
        nodes = np.argwhere(inside)
        index = -np.ones((self.n, self.n), dtype=np.int64)
        index[inside] = np.arange(len(nodes))
        i, j = nodes[:, 0], nodes[:, 1]
        xi, yj = x[i], x[j]
        # arm lengths east, west, north, south
        cx = np.sqrt(np.maximum(self.rho ** 2 - yj ** 2, 0))
        cy = np.sqrt(np.maximum(self.rho ** 2 - xi ** 2, 0))
        arms = np.full((len(nodes), 4), h)
        cut = np.zeros((len(nodes), 4), dtype=bool)
        nb = [(1, 0), (-1, 0), (0, 1), (0, -1)]
        for k, (di, dj) in enumerate(nb):
            ii, jj = i + di, j + dj
            ok = (ii >= 0) & (ii < self.n) & (jj >= 0) & (jj < self.n)
            ok[ok] = inside[ii[ok], jj[ok]]
            if k == 0:
                edge = cx - xi
            elif k == 1:
                edge = xi + cx
            elif k == 2:
                edge = cy - yj
            else:
                edge = yj + cy
            arms[~ok, k] = np.clip(edge[~ok], 1e-14 * h, h)
            cut[:, k] = ~ok
        for name, val in (("x", x), ("h", h), ("inside", inside), ("nodes", nodes), ("arms", arms), ("index", index)):
            if isinstance(val, np.ndarray):
                val.setflags(write=False)
            object.__setattr__(self, name, val)
        bnd = np.any(cut, axis=1)
        bnd.setflags(write=False)
        object.__setattr__(self, "boundary", bnd)

    @property
    def size(self) -> int:
        return len(self.nodes)

    @property
    def z(self) -> np.ndarray:
        """Complex coordinates of the unknowns in node order."""
        return self.x[self.nodes[:, 0]] + 1j * self.x[self.nodes[:, 1]]

    @property
    def z_full(self) -> np.ndarray:
        X, Y = np.meshgrid(self.x, self.x, indexing="ij")
        return X + 1j * Y

    @property
    def center(self) -> tuple:
        c = self.n // 2
        return (c, c)

    def same_as(self, other: "DiskGrid") -> bool:
        return self.n == other.n and self.rho == other.rho

    def laplacian(self) -> sp.csr_matrix:
        """Euclidean Laplacian on the unknowns with zero Dirichlet data."""
        N = self.size
        aE, aW, aN, aS = self.arms.T
        cE = 2 / (aE * (aE + aW))
        cW = 2 / (aW * (aE + aW))
        cN = 2 / (aN * (aN + aS))
        cS = 2 / (aS * (aN + aS))
        rows = [np.arange(N)]
        cols = [np.arange(N)]
        vals = [-(cE + cW + cN + cS)]
        i, j = self.nodes[:, 0], self.nodes[:, 1]
        for (di, dj), c in zip([(1, 0), (-1, 0), (0, 1), (0, -1)], (cE, cW, cN, cS)):
            ii = np.clip(i + di, 0, self.n - 1)
            jj = np.clip(j + dj, 0, self.n - 1)
            nbr = self.index[ii, jj]
            m = nbr >= 0
            rows.append(np.arange(N)[m])
            cols.append(nbr[m])
            vals.append(c[m])
        return sp.csr_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(N, N))

    def metadata(self) -> dict:
        return {"rho": self.rho, "n": self.n, "h": self.h, "unknowns": self.size, "boundary_condition": BOUNDARY_NOTE}


@dataclass(frozen=True, eq=False)
class ConformalFactorField:
    """Values of u on an n x n array; entries outside the disk are 0."""

    grid: DiskGrid
    values: np.ndarray
    residual_norm: float = float("nan")
    converged: bool = False
    iterations: int = 0

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != (self.grid.n, self.grid.n):
            raise GridMismatchError(f"field shape {v.shape} does not match grid {self.grid.n}x{self.grid.n}")
        v[~self.grid.inside] = 0.0
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @classmethod
    def from_nodes(cls, grid: DiskGrid, u: np.ndarray, **kw) -> "ConformalFactorField":
        full = np.zeros((grid.n, grid.n))
        full[grid.inside] = u
        return cls(grid, full, **kw)

    @classmethod
    def constant(cls, grid: DiskGrid, c: float) -> "ConformalFactorField":
        return cls.from_nodes(grid, np.full(grid.size, float(c)))

    @property
    def node_values(self) -> np.ndarray:
        return self.values[self.grid.inside]

    def interpolate(self, z):
        """Bilinear interpolation; points must lie in the closed square of the grid."""
        z = np.asarray(z, dtype=complex)
        g = self.grid
        if np.any(np.abs(z) > g.rho * (1 + 1e-12)):
            raise ValueError("interpolation point lies outside the computational disk")
        s = (z.real + g.rho) / g.h
        t = (z.imag + g.rho) / g.h
        i = np.clip(np.floor(s).astype(int), 0, g.n - 2)
        j = np.clip(np.floor(t).astype(int), 0, g.n - 2)
        fs, ft = s - i, t - j
        v = self.values
        out = (v[i, j] * (1 - fs) * (1 - ft) + v[i + 1, j] * fs * (1 - ft)
               + v[i, j + 1] * (1 - fs) * ft + v[i + 1, j + 1] * fs * ft)
        return float(out) if out.ndim == 0 else out


def _weight(z):
    return (1 - np.abs(z) ** 2) ** 2 / 4


def _equation(L, w, u, n2):
    return w * (L @ u) + 1 - np.exp(2 * u) - np.exp(-2 * u) * n2


def residual(u: ConformalFactorField, alpha: QuadDifferential, grid: DiskGrid | None = None) -> np.ndarray:
    """Pointwise discrete residual on the n x n array, NaN off the unknowns."""
    if grid is not None and not grid.same_as(u.grid):
        raise GridMismatchError("field and grid differ")
    g = u.grid
    z = g.z
    r = _equation(g.laplacian(), _weight(z), u.node_values, norm_hyperbolic(alpha, z) ** 2)
    out = np.full((g.n, g.n), np.nan)
    out[g.inside] = r
    return out


def check_regime(alpha: QuadDifferential, grid: DiskGrid):
    """sup of ||alpha||_h over the closed computational disk; RegimeError if >= 1."""
    s = sup_norm(alpha, rmax=grid.rho)
    nodes = norm_hyperbolic(alpha, grid.z)
    k = int(np.argmax(nodes)) if len(nodes) else 0
    sup, where = (s.value, s.argmax) if s.value >= nodes[k] else (float(nodes[k]), complex(grid.z[k]))
    if sup >= 1:
        raise RegimeError(f"not in almost-Fuchsian regime: sup ||alpha||_h = {sup:.6g} >= 1", sup, where)
    return sup, where


def _roundoff_floor(w, L, u) -> float:
    """Residual level below which Newton steps are lost in rounding."""
    scale = float(np.max(w) * np.max(np.abs(L.diagonal())) * max(1.0, np.max(np.abs(u), initial=0.0)))
    return 64 * np.finfo(float).eps * scale


def solve(alpha: QuadDifferential, grid: DiskGrid | None = None, tol: float = 1e-10, max_iter: int = 50) -> ConformalFactorField:
    """Damped Newton iteration from u = 0 with direct sparse linear solves."""
    if not tol > 0:
        raise ValueError("tol must be positive")
    grid = grid or DiskGrid()
    check_regime(alpha, grid)
    z = grid.z
    L = grid.laplacian()
    w = _weight(z)
    n2 = norm_hyperbolic(alpha, z) ** 2
    WL = sp.diags(w) @ L
    u = np.zeros(grid.size)
    F = _equation(L, w, u, n2)
    res = float(np.max(np.abs(F))) if len(F) else 0.0
    bad = 0
    it = 0
    while res > tol and it < max_iter:
        it += 1
        J = (WL - sp.diags(2 * np.exp(2 * u) - 2 * np.exp(-2 * u) * n2)).tocsc()
        du = spsolve(J, -F)
        step = 1.0
        while True:
            trial = u + step * du
            Ft = _equation(L, w, trial, n2)
            rt = float(np.max(np.abs(Ft)))
            if rt < res or step < 2 ** -20:
                break
            step /= 2
        if rt >= res:
            if res <= _roundoff_floor(w, L, u):
                break
            bad += 1
        else:
            bad = 0
        u, F, res = trial, Ft, rt
        if bad >= 5:
            raise SolverError("Newton residual failed to decrease in 5 consecutive damped steps",
                              ConformalFactorField.from_nodes(grid, u, residual_norm=res, converged=False, iterations=it))
    return ConformalFactorField.from_nodes(grid, u, residual_norm=res, converged=res <= tol, iterations=it)


@dataclass(frozen=True)
class BoundsReport:
    u_min: float
    u_max: float
    lower: float
    passed: bool
    boundary_condition: str = BOUNDARY_NOTE

    def summary(self) -> str:
        return f"u_max={self.u_max:.6g}, u_min={self.u_min:.6g}, bounds {'PASS' if self.passed else 'FAIL'}"


def check_bounds(u: ConformalFactorField, slack: float = 1e-10) -> BoundsReport:
    """Min/max of u over the unknowns against -ln(2)/2 < u <= 0."""
    v = u.node_values
    lo, hi = float(v.min()), float(v.max())
    return BoundsReport(lo, hi, LOWER_BOUND, bool(lo > LOWER_BOUND and hi <= slack))


@dataclass(frozen=True)
class AlmostFuchsianReport:
    sup: float
    argmax: complex
    passed: bool
    boundary_condition: str = BOUNDARY_NOTE


def almost_fuchsian_check(u: ConformalFactorField, alpha: QuadDifferential) -> AlmostFuchsianReport:
    """sup over the unknowns of exp(-2u) ||alpha||_h, passing iff < 1."""
    z = u.grid.z
    vals = np.exp(-2 * u.node_values) * norm_hyperbolic(alpha, z)
    k = int(np.argmax(vals))
    return AlmostFuchsianReport(float(vals[k]), complex(z[k]), bool(vals[k] < 1))


@dataclass(frozen=True)
class ConvergenceStudy:
    sizes: tuple
    differences: tuple
    order: float


def convergence_study(alpha: QuadDifferential, sizes=(33, 65, 129), rho: float = 0.85, tol: float = 1e-12) -> ConvergenceStudy:
    """Observed order from three nested grids, compared on the coarse nodes."""
    if len(sizes) != 3:
        raise ValueError("need exactly three grid sizes")
    fields = [solve(alpha, DiskGrid(rho, n), tol=tol) for n in sizes]
    coarse = fields[0].grid.inside

    def restrict(f, ref):
        step = (f.grid.n - 1) // (ref.n - 1)
        return f.values[::step, ::step]

    ref = fields[0].grid
    u0, u1, u2 = (restrict(f, ref)[coarse] for f in fields)
    d1 = float(np.max(np.abs(u0 - u1)))
    d2 = float(np.max(np.abs(u1 - u2)))
    return ConvergenceStudy(tuple(sizes), (d1, d2), math.log2(d1 / d2))
