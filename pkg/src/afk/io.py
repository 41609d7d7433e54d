"""File formats: group and differential JSON, CSV tables, field dumps.

Floats are written with 17 significant digits so that values round-trip
exactly, and every text output carries the sha256 of the run configuration.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

import numpy as np

from .gauss_equation import ConformalFactorField, DiskGrid
from .kleinian import GroupPresentation, build_octagon_group
from .quad_diff import QuadDifferential


class InputError(ValueError):
    """Malformed input file; ``location`` says where."""

    def __init__(self, message, location=None):
        super().__init__(message if location is None else f"{location}: {message}")
        self.location = location


def fmt(x) -> str:
    return format(float(x), ".17g")


def config_hash(config: dict) -> str:
    blob = json.dumps(config, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode()).hexdigest()


def _read_json(path):
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise InputError(str(exc), str(path)) from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid JSON: {exc.msg}", f"{path}:{exc.lineno}:{exc.colno}") from exc


def read_group(path) -> GroupPresentation:
    """JSON {"label": str, "generators": [[[re, im], [re, im]], [[re, im], [re, im]]], ...]}.

    {"builtin": "octagon"} (optionally with "model") selects the reference group.
    """
    obj = _read_json(path)
    if not isinstance(obj, dict):
        raise InputError("expected a JSON object", str(path))
    if "builtin" in obj:
        if obj["builtin"] != "octagon":
            raise InputError(f"unknown builtin group {obj['builtin']!r}", f"{path}:builtin")
        return build_octagon_group(obj.get("model", "disk"))
    try:
        return GroupPresentation.from_json(obj)
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise InputError(f"bad group description: {exc}", f"{path}:generators") from exc


def write_group(G: GroupPresentation, path) -> None:
    Path(path).write_text(json.dumps(G.to_json(), indent=1))


def read_differential(path) -> QuadDifferential:
    """JSON {"coefficients": [[re, im], ...]} with Taylor coefficients of f."""
    obj = _read_json(path)
    try:
        return QuadDifferential.from_json(obj["coefficients"])
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        raise InputError(f"bad differential: {exc}", f"{path}:coefficients") from exc


def write_differential(alpha: QuadDifferential, path) -> None:
    Path(path).write_text(json.dumps({"coefficients": alpha.to_json()}, indent=1))


def write_csv(path, header: list, rows, config_sha: str) -> None:
    """Rows of strings and numbers; a 2-d float array takes a faster path."""
    if isinstance(rows, np.ndarray):
        with open(path, "w") as fh:
            fh.write(f"# config_sha256={config_sha}\n{','.join(header)}\n")
            np.savetxt(fh, rows, fmt="%.17g", delimiter=",")
        return
    lines = [f"# config_sha256={config_sha}", ",".join(header)]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else fmt(v) for v in row))
    Path(path).write_text("\n".join(lines) + "\n")


def read_csv(path) -> tuple:
    lines = [ln for ln in Path(path).read_text().splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, [ln.split(",") for ln in lines[1:]]


def write_json(path, obj: dict, config_sha: str) -> None:
    out = dict(obj)
    out["config_sha256"] = config_sha
    Path(path).write_text(json.dumps(_jsonable(out), indent=1, sort_keys=True) + "\n")


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, (complex, np.complexfloating)):
        return [_jsonable(v.real), _jsonable(v.imag)]
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return float(fmt(v)) if np.isfinite(v) else str(v)
    if hasattr(v, "value"):
        return v.value
    return v


def write_field(u: ConformalFactorField, prefix, config_sha: str) -> tuple:
    """<prefix>.json header, <prefix>.csv node values and <prefix>.bin float64 column."""
    prefix = Path(prefix)
    g = u.grid
    header = {
        "grid": g.metadata(),
        "node_order": "row-major over (i, j) with x = -rho + i h, y = -rho + j h",
        "residual_norm": u.residual_norm,
        "converged": u.converged,
        "iterations": u.iterations,
        "binary": {"file": prefix.with_suffix(".bin").name, "dtype": "float64-le", "count": g.size},
    }
    write_json(prefix.with_suffix(".json"), header, config_sha)
    rows = [(int(i), int(j), g.x[i], g.x[j], v) for (i, j), v in zip(g.nodes, u.node_values)]
    write_csv(prefix.with_suffix(".csv"), ["i", "j", "x", "y", "u"], rows, config_sha)
    u.node_values.astype("<f8").tofile(prefix.with_suffix(".bin"))
    return tuple(prefix.with_suffix(s) for s in (".json", ".csv", ".bin"))


def read_field(prefix) -> ConformalFactorField:
    prefix = Path(prefix)
    meta = json.loads(prefix.with_suffix(".json").read_text())
    g = DiskGrid(meta["grid"]["rho"], meta["grid"]["n"])
    vals = np.fromfile(prefix.with_suffix(".bin"), dtype="<f8")
    if len(vals) != g.size:
        raise InputError("binary column length does not match the grid", str(prefix))
    return ConformalFactorField.from_nodes(g, vals, residual_norm=meta["residual_norm"],
                                           converged=meta["converged"], iterations=meta["iterations"])
