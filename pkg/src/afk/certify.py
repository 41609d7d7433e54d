"""Empty-ball certificates for the domain of discontinuity.

The chain of constants is: a Harnack radius r around a zero of alpha, a
Euclidean parameter disk of radius r1 inside the induced-metric ball, a
Jacobian floor beta = 2 C_epstein (1 - eps^2) and the radius
R = r1 sqrt(beta) / C_K.  Neither C_epstein nor C_K is known explicitly, so
both are configuration constants and every certificate records them.
"""

from __future__ import annotations

import enum
import math
from dataclasses import asdict, dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .gauss_equation import DiskGrid
from .kleinian import (
    GroupPresentation,
    LimitSetSample,
    distance_to_sample,
    hausdorff_distance,
    largest_empty_ball,
    limit_set_sample,
    sphere_grid_spacing,
)
from .quad_diff import PreconditionError, harnack_radius, induced_ball_radius
from .surface import BoundaryField, ImmersedPatch, beltrami_estimate, gauss_map_patch, jacobian_estimate

C_KOEBE_DEFAULT = 4.0
# min over the baseline ball of the Gauss-map Jacobian w.r.t. the induced metric
# (see calibrate_c_epstein); frozen so certificates do not drift with the grid
C_EPSTEIN_DEFAULT = 0.04451
SLACK_DEFAULT = 0.05
EPS_TARGET_DEFAULT = 0.5
CONSTANTS_NOTE = "C_epstein and C_K are configured constants, not values proved for this input"


class Verdict(str, enum.Enum):
    CONSISTENT = "CONSISTENT"
    VIOLATED = "VIOLATED"
    INCONCLUSIVE = "INCONCLUSIVE"


class NecessaryVerdict(str, enum.Enum):
    PASSES = "PASSES (necessary condition only; not a proof of almost-Fuchsian)"
    FAILS_NECESSARY_CONDITION = "FAILS_NECESSARY_CONDITION"


# Astala-Gehring average


_GL_NODES, _GL_WEIGHTS = np.polynomial.legendre.leggauss(48)


def _bicubic(values, grid: DiskGrid, z):
    """Tensor 4-point Lagrange interpolation of a node field at points z."""
    s = (z.real + grid.rho) / grid.h
    t = (z.imag + grid.rho) / grid.h
    i = np.clip(np.floor(s).astype(int), 1, grid.n - 3)
    j = np.clip(np.floor(t).astype(int), 1, grid.n - 3)
    fs, ft = s - i, t - j

    def w(c):
        return np.stack([-c * (c - 1) * (c - 2) / 6, (c + 1) * (c - 1) * (c - 2) / 2,
                         -(c + 1) * c * (c - 2) / 2, (c + 1) * c * (c - 1) / 6])

    ws, wt = w(fs), w(ft)
    out = np.zeros(z.shape, dtype=np.result_type(values, float))
    for a in range(4):
        for b in range(4):
            out += ws[a] * wt[b] * values[i - 1 + a, j - 1 + b]
    return out


def ball_mean(values, grid: DiskGrid, x: complex, radius: float, n_radial: int = 48, n_angular: int = 256) -> float:
    """Area average over B(x, radius): Gauss-Legendre in r, trapezoid in angle."""
    if n_radial == len(_GL_NODES):
        nodes, weights = _GL_NODES, _GL_WEIGHTS
    else:
        nodes, weights = np.polynomial.legendre.leggauss(n_radial)
    r = 0.5 * radius * (nodes + 1)
    wr = 0.5 * radius * weights * r
    th = 2 * np.pi * np.arange(n_angular) / n_angular
    z = x + r[:, None] * np.exp(1j * th)[None, :]
    vals = _bicubic(values, grid, z)
    return float(np.sum(wr[:, None] * vals) * (2 * np.pi / n_angular) / (np.pi * radius ** 2))


def _stencil_ok(valid: np.ndarray, grid: DiskGrid, z) -> bool:
    s = (z.real + grid.rho) / grid.h
    t = (z.imag + grid.rho) / grid.h
    i = np.floor(s).astype(int)
    j = np.floor(t).astype(int)
    if np.any(i < 1) or np.any(j < 1) or np.any(i > grid.n - 3) or np.any(j > grid.n - 3):
        return False
    for a in range(-1, 3):
        for b in range(-1, 3):
            if not np.all(valid[i + a, j + b]):
                return False
    return True


def astala_gehring_a(J: np.ndarray, x, grid: DiskGrid, domain_radius: float) -> float:
    """exp(mean of log J over B(x, d(x, dU)) / 2), U the disk |z| < domain_radius.

    ``x`` is a node index pair or a complex point.  Log J is interpolated with
    bicubic Lagrange stencils, which must stay on nodes where J is defined.
    """
    J = np.asarray(J, dtype=float)
    xc = complex(grid.x[x[0]] + 1j * grid.x[x[1]]) if isinstance(x, tuple) else complex(x)
    radius = domain_radius - abs(xc)
    if radius <= 0:
        raise ValueError("point lies outside the domain")
    Z = grid.z_full
    inball = np.abs(Z - xc) < radius + 2 * grid.h
    bad = inball & ~(J > 0)
    if np.any(bad & np.isfinite(J)) or np.any(bad & (np.abs(Z - xc) < radius)):
        k = tuple(int(v) for v in np.argwhere(bad)[0])
        raise PreconditionError(f"Jacobian is not positive at node {k}", witness=k)
    valid = J > 0
    ring = xc + radius * np.exp(2j * np.pi * np.arange(256) / 256)
    if not _stencil_ok(valid, grid, ring):
        raise PreconditionError("ball reaches nodes where the Jacobian is undefined")
    with np.errstate(divide="ignore", invalid="ignore"):
        logJ = np.where(valid, np.log(np.where(valid, J, 1.0)), np.nan)
    return math.exp(0.5 * ball_mean(logJ, grid, xc, radius))


# Koebe-type bounds


@dataclass(frozen=True)
class KoebeReport:
    a_value: float
    ratio: float
    K: float
    empirical_C: float
    C_K: float
    passed: bool
    domain_radius: float
    boundary_nodes: int


def injectivity_check(m: BoundaryField, resolution: float = 1e-9, max_samples: int = 20000) -> bool:
    vals = m.values[m.mask & np.isfinite(m.values)]
    if len(vals) > max_samples:
        vals = vals[np.linspace(0, len(vals) - 1, max_samples).astype(int)]
    keys = np.round(np.column_stack([vals.real, vals.imag]) / resolution)
    return len(np.unique(keys, axis=0)) == len(vals)


def domain_radius_for(valid: np.ndarray, grid: DiskGrid, margin: int = 3) -> float:
    """Largest radius rho_U with every node within rho_U + margin*h valid."""
    Z = np.abs(grid.z_full)
    bad = Z[~valid]
    reach = float(bad.min()) if len(bad) else grid.rho
    return max(0.0, min(reach, grid.rho) - margin * math.sqrt(2) * grid.h)


def koebe_bounds_check(m: BoundaryField, grid: DiskGrid | None = None, C_K: float = C_KOEBE_DEFAULT,
                       jacobian: np.ndarray | None = None, domain_radius: float | None = None,
                       n_boundary: int = 1024) -> KoebeReport:
    """Compare a_f(0) with d(f(0), dV)/d(0, dU) for U = {|z| < domain_radius}.

    dV is approximated by the image of n_boundary points on the circle dU
    (map values interpolated bicubically from the nodes); the nearest image
    point is then polished in angle.  J defaults to the finite-difference
    Jacobian of the map.
    """
    grid = grid or m.grid
    if not injectivity_check(m):
        raise PreconditionError("map is not injective at resolution 1e-9")
    J = jacobian_estimate(m) if jacobian is None else np.asarray(jacobian, dtype=float)
    valid = m.mask & np.isfinite(m.values) & (J > 0)
    rU = domain_radius_for(valid, grid) if domain_radius is None else float(domain_radius)
    c = grid.center
    f0 = m.values[c]
    th = 2 * np.pi * np.arange(n_boundary) / n_boundary
    circle = rU * np.exp(1j * th)
    if not _stencil_ok(valid, grid, circle):
        raise PreconditionError("domain boundary reaches nodes where the map is undefined")
    vals = np.where(valid, m.values, 0)

    def dist(t):
        return float(np.abs(_bicubic(vals, grid, np.atleast_1d(rU * np.exp(1j * t)))[0] - f0))

    d = np.abs(_bicubic(vals, grid, circle) - f0)
    k = int(np.argmin(d))
    step = 2 * np.pi / n_boundary
    res = minimize_scalar(dist, bounds=(th[k] - step, th[k] + step), method="bounded", options={"xatol": 1e-12})
    dV = min(float(d[k]), float(res.fun))
    ratio = dV / rU
    a = astala_gehring_a(J, c, grid, rU)
    emp = max(a / ratio, ratio / a)
    U = valid & (np.abs(grid.z_full) <= rU)
    K = beltrami_estimate(m, region=U).K
    passed = ratio / C_K <= a <= C_K * ratio
    return KoebeReport(a, ratio, K, emp, C_K, bool(passed), rU, n_boundary)


# certificate


def certified_radius(r1: float, eps: float, C_epstein: float = C_EPSTEIN_DEFAULT, C_K: float = C_KOEBE_DEFAULT) -> float:
    if not eps < 1:
        raise ValueError("eps >= 1 is outside the almost-Fuchsian regime")
    if not (r1 > 0 and C_epstein > 0 and C_K > 0 and eps >= 0):
        raise ValueError("certified_radius needs positive r1, C_epstein, C_K and eps >= 0")
    beta = 2 * C_epstein * (1 - eps * eps)
    return r1 * math.sqrt(beta) / C_K


@dataclass(frozen=True)
class CertificateConfig:
    eps_target: float = EPS_TARGET_DEFAULT
    C_epstein: float = C_EPSTEIN_DEFAULT
    C_K: float = C_KOEBE_DEFAULT
    slack: float = SLACK_DEFAULT
    normalization_tol: float = 1e-8


@dataclass(frozen=True)
class Certificate:
    eps: float
    r: float
    r1: float
    K: float
    beta: float
    C_epstein: float
    C_K: float
    R: float
    R_spherical: float
    empirical_empty_radius: float | None
    verdict: Verdict
    K_measured: float = float("nan")
    sup_norm_h: float = 0.0
    harnack_saturated: bool = False
    slack: float = SLACK_DEFAULT
    notes: tuple = (CONSTANTS_NOTE,)

    def to_json(self) -> dict:
        d = asdict(self)
        d["verdict"] = self.verdict.value
        d["notes"] = list(self.notes)
        return d


def normalization_offsets(patch: ImmersedPatch) -> dict:
    c = patch.center
    fp = patch.frame(*c)
    z, t = fp.position
    n = np.asarray(fp.normal) / t
    return {
        "position": abs(z) + abs(t - 1),
        "normal": float(np.max(np.abs(n - np.array([0.0, 0.0, -1.0])))),
        "alpha_center": float(patch.induced_norm()[c]),
    }


def _radial_g_length(patch: ImmersedPatch, n_angles: int = 64, n_steps: int = 400):
    """Max over directions of the induced length of radial segments [0, s]."""
    g = patch.grid
    rmax = g.rho
    s = np.linspace(0, rmax, n_steps)
    th = 2 * np.pi * np.arange(n_angles) / n_angles
    z = s[:, None] * np.exp(1j * th)[None, :]
    u = patch.u.interpolate(z)
    dens = np.exp(u) * 2 / (1 - np.abs(z) ** 2)
    ds = s[1] - s[0]
    cum = np.concatenate([np.zeros((1, n_angles)), np.cumsum(0.5 * (dens[1:] + dens[:-1]) * ds, axis=0)])
    return s, cum.max(axis=1)


def patch_radius(patch: ImmersedPatch) -> float:
    """Radius of the largest centered disk covered by the integrated patch."""
    Z = np.abs(patch.grid.z_full)
    out = Z[~patch.mask]
    return float(out.min()) - patch.grid.h if len(out) else patch.grid.rho


def assemble_certificate(patch: ImmersedPatch, sample: LimitSetSample | None = None,
                         config: CertificateConfig | None = None, group: GroupPresentation | None = None) -> Certificate:
    """Constant chain of the empty-ball certificate for a normalized patch."""
    config = config or CertificateConfig()
    off = normalization_offsets(patch)
    if max(off.values()) > config.normalization_tol:
        raise PreconditionError(f"patch is not normalized: {off}", witness=off)
    g = patch.grid
    Z = g.z_full
    m = patch.mask
    h_norm = (1 - np.abs(Z[m]) ** 2) ** 2 * np.abs(patch.alpha(Z[m])) / 4
    C = float(h_norm.max()) if h_norm.size else 0.0
    if C > 0:
        rp, sat = harnack_radius(config.eps_target / 2, C, full_output=True)
    else:
        rp, sat = math.inf, True
    r = induced_ball_radius(rp) if math.isfinite(rp) else math.inf
    s, L = _radial_g_length(patch)
    rmax = patch_radius(patch)
    inside = (L < r) & (s <= rmax)
    r1 = float(s[inside][-1]) if np.any(inside) else 0.0
    r = min(r, float(L[s <= rmax][-1]))
    # B_g(0, r) lies in the hyperbolic ball of radius sqrt(2) r
    sup_rad = math.tanh(math.sqrt(2) * r / 2)
    ball = m & (np.abs(Z) <= sup_rad + g.h)
    eps = float(np.nanmax(patch.induced_norm()[ball]))
    if r1 <= 0:
        raise PreconditionError("no Euclidean parameter disk fits inside the induced ball")
    K = math.sqrt((1 + eps) / (1 - eps)) if eps < 1 else math.inf
    R = certified_radius(r1, eps, config.C_epstein, config.C_K)
    beta = 2 * config.C_epstein * (1 - eps * eps)
    Kmeas = float("nan")
    try:
        G = gauss_map_patch(patch, 1, require_valid=False)
        Kmeas = beltrami_estimate(G, region=m & (np.abs(Z) <= r1)).K
    except PreconditionError:
        pass
    R_sph = math.atan(R)
    emp = None
    if sample is None:
        verdict = Verdict.INCONCLUSIVE
    else:
        emp = float(distance_to_sample(0j, sample))
        verdict = Verdict.CONSISTENT if emp >= R_sph * (1 - config.slack) else Verdict.VIOLATED
    notes = [CONSTANTS_NOTE, "R is a Euclidean radius in C; R_spherical = arctan(R) is compared with the sample"]
    if sat:
        notes.append("Harnack radius saturated; r capped by the integrated patch")
    if group is not None and group.label:
        notes.append(f"group: {group.label}")
    return Certificate(eps, r, r1, K, beta, config.C_epstein, config.C_K, R, R_sph, emp, verdict,
                       Kmeas, C, bool(sat), config.slack, tuple(notes))


def calibrate_c_epstein(patch: ImmersedPatch, r1: float) -> float:
    """min over |z| <= r1 of J_Phi / J_phi on a Fuchsian patch (eps = 0).

    J_phi = 4 e^{2u} / (1 - |z|^2)^2 is the Jacobian of the uniformization, so
    the ratio is the Gauss-map Jacobian measured against the induced metric.
    """
    G = gauss_map_patch(patch, 1, require_valid=False)
    Z = patch.grid.z_full
    region = patch.mask & (np.abs(Z) <= r1)
    J = jacobian_estimate(G, region=region)
    Jphi = 4 * np.exp(2 * patch.u.values) / (1 - np.abs(Z) ** 2) ** 2
    return float(np.nanmin((J / Jphi)[region]))


# necessary condition and flats


@dataclass(frozen=True)
class NecessaryReport:
    verdict: NecessaryVerdict
    empty_radius: float
    center: complex
    threshold: float
    grid_slack: float


def necessary_condition_check(sample: LimitSetSample, R_threshold: float, resolution: int = 64) -> NecessaryReport:
    center, radius = largest_empty_ball(sample, resolution)
    slack = sphere_grid_spacing(resolution)
    ok = radius >= R_threshold - slack
    v = NecessaryVerdict.PASSES if ok else NecessaryVerdict.FAILS_NECESSARY_CONDITION
    return NecessaryReport(v, float(radius), complex(center), R_threshold, slack)


@dataclass(frozen=True)
class BallCheck:
    node: tuple
    sign: int
    image: complex
    distance_to_sample: float
    passed: bool


@dataclass(frozen=True)
class FlatsCertificate:
    zero_points: list
    R_prime: float
    balls: list
    sample_size: int

    @property
    def passed(self) -> bool:
        return all(b.passed for b in self.balls)


def flats_certificate(patch: ImmersedPatch, zeros, R_prime: float, sample: LimitSetSample, zero_tol: float = 1e-6) -> FlatsCertificate:
    """Check the spherical R'-balls around both Gauss images of each zero."""
    norm = patch.induced_norm()
    Gp = gauss_map_patch(patch, 1, require_valid=False)
    Gm = gauss_map_patch(patch, -1, require_valid=False)
    pts, balls = [], []
    for node in zeros:
        node = tuple(int(v) for v in node)
        if not patch.mask[node] or not norm[node] < zero_tol:
            raise PreconditionError(f"node {node} is not a zero of alpha (||alpha||_g = {norm[node]:.3g})", witness=node)
        fp = patch.frame(*node)
        imgs = (complex(Gp.values[node]), complex(Gm.values[node]))
        pts.append((fp.position, imgs))
        for sign, img in zip((1, -1), imgs):
            d = float(distance_to_sample(img, sample))
            balls.append(BallCheck(node, sign, img, d, d >= R_prime))
    return FlatsCertificate(pts, R_prime, balls, len(sample))


# barrier experiment


@dataclass(frozen=True)
class ExperimentRow:
    label: str
    points: int
    empty_radius: float
    empty_center: complex
    hausdorff_step: float | None
    warnings: tuple
    error: str | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    depth: int = 6
    resolution: int = 64
    threads: int | None = None


def barrier_experiment(groups, config: ExperimentConfig | None = None) -> list:
    """Largest empty ball and Hausdorff step distance along a family of groups.

    Observational only: the table shows whether empty radii stay bounded
    below; no theorem is asserted.  Failures are recorded per row.
    """
    config = config or ExperimentConfig()
    groups = list(groups)
    if len(groups) < 2:
        raise ValueError("barrier experiment needs at least two groups")
    rows = []
    prev = None
    for k, G in enumerate(groups):
        label = G.label or f"group-{k}"
        try:
            S = limit_set_sample(G, config.depth, threads=config.threads)
            c, rad = largest_empty_ball(S, config.resolution)
            step = None if prev is None else hausdorff_distance(prev, S)
            rows.append(ExperimentRow(label, len(S), float(rad), complex(c), step, S.warnings))
            prev = S
        except Exception as exc:  # noqa: BLE001 - rows record failures, the run continues
            rows.append(ExperimentRow(label, 0, float("nan"), complex("nan"), None, (), f"{type(exc).__name__}: {exc}"))
    return rows


def circle_empty_radius(R: float) -> float:
    """Largest empty spherical ball for the circle |z| = R."""
    a = math.atan(R)
    return max(a, math.pi / 2 - a)
