"""Static renders in two fixed charts: around 0 (w = z) and around infinity (w = 1/z).

Each chart shows the square |Re w|, |Im w| <= extent.  Limit points are
black; spherical balls are outlined in colour.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .moebius import from_sphere, to_sphere

RED = (200, 30, 30)
BLUE = (30, 60, 200)
GREY = (190, 190, 190)
SVG_MAX_POINTS = 20000


def ball_outline(center: complex, radius: float, samples: int = 720) -> np.ndarray:
    """Boundary of the spherical ball of the given radius, as boundary points."""
    v = to_sphere(center)
    a = np.array([1.0, 0, 0]) if abs(v[0]) < 0.9 else np.array([0, 1.0, 0])
    e1 = np.cross(v, a)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(v, e1)
    th = 2 * np.pi * np.arange(samples) / samples
    ang = 2 * radius  # the spherical metric is half the round metric
    pts = np.cos(ang) * v[None] + np.sin(ang) * (np.cos(th)[:, None] * e1 + np.sin(th)[:, None] * e2)
    return from_sphere(pts)


def _chart(points, chart: int):
    p = np.asarray(points, dtype=complex)
    with np.errstate(divide="ignore", invalid="ignore"):
        w = p if chart == 0 else np.where(p == 0, np.inf, 1 / p)
    return w


def render_ppm(path, points, size: int = 512, balls=(), extent: float = 2.0, polylines=()) -> None:
    """Two size x size charts side by side, written as binary PPM (P6)."""
    img = np.full((size, 2 * size, 3), 255, dtype=np.uint8)
    img[:, size - 1 : size + 1] = GREY

    def plot(pts, color, chart):
        w = _chart(pts, chart)
        ok = np.isfinite(w) & (np.abs(w.real) <= extent) & (np.abs(w.imag) <= extent)
        w = w[ok]
        col = ((w.real + extent) / (2 * extent) * (size - 1)).round().astype(int) + chart * size
        row = ((extent - w.imag) / (2 * extent) * (size - 1)).round().astype(int)
        img[row, col] = color

    for chart in (0, 1):
        t = np.linspace(0, 2 * np.pi, 2048)
        plot(np.exp(1j * t), GREY, chart)
        for c, r in balls:
            plot(ball_outline(c, r, 4 * size), RED, chart)
        for line in polylines:
            plot(line, BLUE, chart)
        plot(points, (0, 0, 0), chart)
    with open(path, "wb") as fh:
        fh.write(f"P6\n{2 * size} {size}\n255\n".encode())
        fh.write(img.tobytes())


def render_svg(path, points, size: int = 512, balls=(), extent: float = 2.0, polylines=()) -> None:
    def xy(w, chart):
        return ((w.real + extent) / (2 * extent) * size + chart * size, (extent - w.imag) / (2 * extent) * size)

    parts = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{2 * size}" height="{size}">',
             f'<rect width="{2 * size}" height="{size}" fill="white"/>']
    points = np.asarray(points, dtype=complex)
    if len(points) > SVG_MAX_POINTS:
        points = points[:: -(-len(points) // SVG_MAX_POINTS)]
    for chart in (0, 1):
        w = _chart(points, chart)
        ok = np.isfinite(w) & (np.abs(w.real) <= extent) & (np.abs(w.imag) <= extent)
        for q in w[ok]:
            x, y = xy(q, chart)
            parts.append(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="0.6" fill="black"/>')
        for line, color in [(ball_outline(c, r), "red") for c, r in balls] + [(p, "blue") for p in polylines]:
            w = _chart(line, chart)
            ok = np.isfinite(w) & (np.abs(w) < 10 * extent)
            pts = " ".join("{:.2f},{:.2f}".format(*xy(q, chart)) for q in w[ok])
            if pts:
                parts.append(f'<polyline points="{pts}" fill="none" stroke="{color}" stroke-width="1"/>')
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")


def render(path, points, size: int = 512, balls=(), polylines=(), fmt: str = "ppm") -> Path:
    path = Path(path).with_suffix("." + fmt)
    (render_svg if fmt == "svg" else render_ppm)(path, points, size, balls, polylines=polylines)
    return path
