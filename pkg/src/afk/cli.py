"""Command-line entry point: ``afk {limit-set, solve, certify, experiment}``.

Exit codes: 0 ok, 2 input error, 3 resource limit, 4 regime violation,
5 solver failure.
"""

from __future__ import annotations

import argparse
import math
import os
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import certify as cert
from .gauss_equation import DiskGrid, RegimeError, SolverError, check_bounds, almost_fuchsian_check, solve
from .io import InputError, config_hash, fmt, read_csv, read_differential, read_group, write_csv, write_field, write_json
from .kleinian import (
    LimitSetSample,
    ResourceLimitError,
    largest_empty_ball,
    limit_set_sample,
    word_count,
)
from .moebius import MoebiusTransform
from .quad_diff import PreconditionError, QuadDifferential
from .render import render
from .surface import dump_patch, gauss_map_patch, integrate_immersion

EXIT_OK, EXIT_INPUT, EXIT_RESOURCE, EXIT_REGIME, EXIT_SOLVER = 0, 2, 3, 4, 5


@dataclass
class RunConfig:
    subcommand: str
    group: list = field(default_factory=list)
    alpha: str | None = None
    sample: str | None = None
    inject: list = field(default_factory=list)
    depth: int = 6
    grid: int = 129
    rho: float = 0.85
    tol: float = 1e-10
    c_epstein: float = cert.C_EPSTEIN_DEFAULT
    c_koebe: float = cert.C_KOEBE_DEFAULT
    eps_target: float = cert.EPS_TARGET_DEFAULT
    out: str = "afk-out"
    threads: int = 1
    image_size: int = 512
    image_format: str = "ppm"
    resolution: int = 64
    max_words: int = 20_000_000
    family: str | None = None
    steps: int = 4
    seed: int = 0

    def validate(self):
        for name in ("depth", "grid", "tol", "c_epstein", "c_koebe", "eps_target", "threads", "image_size", "resolution", "max_words", "steps"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and v > 0 and math.isfinite(v)):
                raise InputError(f"--{name.replace('_', '-')} must be positive, got {v!r}")
        if not 0 < self.rho < 1:
            raise InputError(f"--rho must lie in (0, 1), got {self.rho!r}")
        if self.grid % 2 == 0 or self.grid < 9:
            raise InputError("--grid must be odd and at least 9")
        if self.seed < 0:
            raise InputError("--seed must be nonnegative")
        if self.image_format not in ("ppm", "svg"):
            raise InputError("--format must be ppm or svg")

    def hash(self) -> str:
        d = asdict(self)
        d.pop("out")
        d.pop("threads")
        for key in ("group", "alpha", "sample"):
            paths = d[key] if isinstance(d[key], list) else [d[key]] if d[key] else []
            d[key + "_content"] = [Path(p).read_text() if Path(p).is_file() else None for p in paths]
        return config_hash(d)


def _threads(value):
    if value is not None:
        return value
    env = os.environ.get("AFK_THREADS")
    try:
        return max(1, int(env)) if env else 1
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="afk", description="Limit sets, minimal disks and empty-ball certificates.")
    sub = p.add_subparsers(dest="subcommand", required=True)

    def common(sp):
        sp.add_argument("--out", default="afk-out", help="output directory")
        sp.add_argument("--threads", type=int, default=None, help="worker cap (default $AFK_THREADS or 1)")
        sp.add_argument("--image-size", type=int, default=512)
        sp.add_argument("--format", dest="image_format", default="ppm", choices=["ppm", "svg"])
        sp.add_argument("--seed", type=int, default=0)

    def solver(sp):
        sp.add_argument("--alpha", help="quadratic differential JSON")
        sp.add_argument("--grid", type=int, default=129)
        sp.add_argument("--rho", type=float, default=0.85)
        sp.add_argument("--tol", type=float, default=1e-10)

    s = sub.add_parser("limit-set", help="sample and render a limit set")
    s.add_argument("--group", action="append", required=True)
    s.add_argument("--depth", type=int, default=8)
    s.add_argument("--resolution", type=int, default=64)
    s.add_argument("--max-words", type=int, default=20_000_000)
    common(s)

    s = sub.add_parser("solve", help="solve the Gauss equation")
    solver(s)
    common(s)

    s = sub.add_parser("certify", help="empty-ball certificate for a normalized minimal disk")
    solver(s)
    s.add_argument("--group", action="append", default=[])
    s.add_argument("--depth", type=int, default=6)
    s.add_argument("--sample", help="CSV of extra limit points (columns re,im)")
    s.add_argument("--inject", action="append", default=[], type=complex, help="extra sample point, e.g. 0j")
    s.add_argument("--c-epstein", type=float, default=cert.C_EPSTEIN_DEFAULT)
    s.add_argument("--c-koebe", type=float, default=cert.C_KOEBE_DEFAULT)
    s.add_argument("--eps-target", type=float, default=cert.EPS_TARGET_DEFAULT)
    common(s)

    s = sub.add_parser("experiment", help="empty balls along a family of groups")
    s.add_argument("--group", action="append", default=[])
    s.add_argument("--family", choices=["dilation"], help="derive the family from the first group")
    s.add_argument("--steps", type=int, default=4)
    s.add_argument("--depth", type=int, default=6)
    s.add_argument("--resolution", type=int, default=64)
    common(s)
    return p


def _config(args) -> RunConfig:
    kw = {k: v for k, v in vars(args).items() if k in RunConfig.__dataclass_fields__ and v is not None}
    kw["threads"] = _threads(args.threads)
    if "inject" in kw:
        kw["inject"] = [complex(v) for v in kw["inject"]]
    return RunConfig(**kw)


def _alpha(cfg: RunConfig) -> QuadDifferential:
    return read_differential(cfg.alpha) if cfg.alpha else QuadDifferential.zero()


def _limit_points_csv(path, S: LimitSetSample, sha):
    write_csv(path, ["re", "im"], np.column_stack([S.points.real, S.points.imag]), sha)


def cmd_limit_set(cfg: RunConfig, out: Path, sha: str) -> int:
    G = read_group(cfg.group[0])
    total = word_count(G.rank, cfg.depth)
    if total > cfg.max_words:
        raise ResourceLimitError(f"{total} reduced words exceed --max-words {cfg.max_words}")
    S = limit_set_sample(G, cfg.depth, threads=cfg.threads)
    _limit_points_csv(out / "limit_points.csv", S, sha)
    c, r = largest_empty_ball(S, cfg.resolution)
    meta = S.metadata()
    meta.update({"largest_empty_ball": {"center": c, "radius": r}, "config": asdict(cfg)})
    write_json(out / "limit_set.json", meta, sha)
    render(out / "limit_set", S.points, cfg.image_size, balls=[(c, r)], fmt=cfg.image_format)
    for w in S.warnings:
        print(f"warning: {w}", file=sys.stderr)
    print(f"{len(S)} limit points from {S.words} words; largest empty ball radius {fmt(r)}")
    return EXIT_OK


def cmd_solve(cfg: RunConfig, out: Path, sha: str) -> int:
    alpha = _alpha(cfg)
    u = solve(alpha, DiskGrid(cfg.rho, cfg.grid), tol=cfg.tol)
    write_field(u, out / "u", sha)
    b = check_bounds(u)
    af = almost_fuchsian_check(u, alpha)
    write_json(out / "bounds.json", {"bounds": asdict(b), "almost_fuchsian": asdict(af), "summary": b.summary(),
                                     "converged": u.converged, "residual_norm": u.residual_norm}, sha)
    print(b.summary())
    if not u.converged:
        print(f"solver did not converge: residual {u.residual_norm:.3g}", file=sys.stderr)
        return EXIT_SOLVER
    return EXIT_OK


def _stage(name, fn):
    try:
        return fn()
    except Exception as exc:
        exc.stage = name
        raise


def cmd_certify(cfg: RunConfig, out: Path, sha: str) -> int:
    alpha = _stage("input", lambda: _alpha(cfg))
    u = _stage("solve", lambda: solve(alpha, DiskGrid(cfg.rho, cfg.grid), tol=cfg.tol))
    write_field(u, out / "u", sha)
    if not u.converged:
        raise _tag(SolverError(f"solver did not converge (residual {u.residual_norm:.3g})", u), "solve")
    patch = _stage("integrate", lambda: integrate_immersion(u, alpha))
    dump_patch(patch, out / "patch", {"config_sha256": sha})
    G = None
    sample = None
    if cfg.group:
        G = _stage("input", lambda: read_group(cfg.group[0]))
        sample = _stage("limit-set", lambda: limit_set_sample(G, cfg.depth, threads=cfg.threads))
    extra = list(cfg.inject)
    if cfg.sample:
        _, rows = _stage("input", lambda: read_csv(cfg.sample))
        try:
            extra += [complex(float(r[0]), float(r[1])) for r in rows]
        except (ValueError, IndexError) as exc:
            raise _tag(InputError(f"bad sample row: {exc}", cfg.sample), "input") from exc
    if extra:
        sample = LimitSetSample.from_points(extra, method="injected") if sample is None else sample.union(extra)
    conf = cert.CertificateConfig(cfg.eps_target, cfg.c_epstein, cfg.c_koebe)
    c = _stage("certify", lambda: cert.assemble_certificate(patch, sample, conf, G))
    write_json(out / "certificate.json", {"certificate": c.to_json(), "config": asdict(cfg)}, sha)
    gm = gauss_map_patch(patch, 1, require_valid=False)
    img = gm.values[gm.mask]
    pts = sample.points if sample is not None else np.array([], dtype=complex)
    render(out / "certificate", pts, cfg.image_size, balls=[(0j, c.R_spherical)], polylines=[img[np.isfinite(img)]],
           fmt=cfg.image_format)
    print(f"verdict {c.verdict.value}: R = {fmt(c.R)} (eps = {fmt(c.eps)}, r1 = {fmt(c.r1)}); {cert.CONSTANTS_NOTE}")
    return EXIT_OK


def _tag(exc, stage):
    exc.stage = stage
    return exc


def cmd_experiment(cfg: RunConfig, out: Path, sha: str) -> int:
    if not cfg.group:
        raise InputError("experiment needs at least one --group")
    groups = [read_group(p) for p in cfg.group]
    if cfg.family == "dilation":
        base = groups[0]
        groups = [base.conjugate_by(MoebiusTransform.dilation(2.0 ** k), f"{base.label or 'group'} dilated 2^{k}")
                  for k in range(cfg.steps)]
    if len(groups) < 2:
        raise InputError("experiment needs at least two groups (repeat --group or use --family)")
    rows = cert.barrier_experiment(groups, cert.ExperimentConfig(cfg.depth, cfg.resolution, cfg.threads))
    table = [(r.label, r.points, r.empty_radius, "" if r.hausdorff_step is None else fmt(r.hausdorff_step),
              "|".join(r.warnings), r.error or "") for r in rows]
    write_csv(out / "experiment.csv", ["label", "points", "empty_radius", "hausdorff_step", "warnings", "error"],
              [tuple(str(v) if isinstance(v, int) else v for v in row) for row in table], sha)
    for k, (G, r) in enumerate(zip(groups, rows)):
        if r.error is None:
            S = limit_set_sample(G, cfg.depth, threads=cfg.threads)
            render(out / f"experiment_{k:02d}", S.points, cfg.image_size, balls=[(r.empty_center, r.empty_radius)],
                   fmt=cfg.image_format)
    for r in rows:
        print(f"{r.label}: empty radius {fmt(r.empty_radius)}" + (f" error {r.error}" if r.error else ""))
    return EXIT_OK


COMMANDS = {"limit-set": cmd_limit_set, "solve": cmd_solve, "certify": cmd_certify, "experiment": cmd_experiment}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        cfg = _config(args)
        cfg.validate()
        out = Path(cfg.out)
        out.mkdir(parents=True, exist_ok=True)
        sha = cfg.hash()
        return COMMANDS[cfg.subcommand](cfg, out, sha)
    except InputError as exc:
        return _fail(exc, EXIT_INPUT)
    except ResourceLimitError as exc:
        return _fail(exc, EXIT_RESOURCE)
    except RegimeError as exc:
        return _fail(exc, EXIT_REGIME)
    except SolverError as exc:
        return _fail(exc, EXIT_SOLVER)
    except PreconditionError as exc:
        return _fail(exc, EXIT_INPUT)
    except Exception as exc:
        if getattr(exc, "stage", None) is None:
            raise
        return _fail(exc, EXIT_SOLVER)


def _fail(exc, code) -> int:
    stage = getattr(exc, "stage", None)
    print(f"error{f' [{stage}]' if stage else ''}: {exc}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
