"""SVG figures: map, executed path colored by time, detections with arrows."""

from __future__ import annotations

import math

import numpy as np

from .detect import InvisibleHuman
from .gridmap import OccupancyGrid
from .scan import LaserScan

__all__ = ["render_svg", "render_record", "render_detections"]


def _time_color(f: float) -> str:
    # blue (start) to red (goal)
    r = int(40 + 215 * f)
    b = int(255 - 215 * f)
    return f"#{r:02x}50{b:02x}"


class _Canvas:
    def __init__(self, x0, y0, x1, y1, size_px):
        span = max(x1 - x0, y1 - y0, 1e-6)
        self.scale = size_px / span
        self.x0, self.y1 = x0, y1
        self.w = (x1 - x0) * self.scale
        self.h = (y1 - y0) * self.scale
        self.parts: list[str] = []

    def pt(self, p) -> tuple[float, float]:
        return ((p[0] - self.x0) * self.scale, (self.y1 - p[1]) * self.scale)

    def add(self, el: str) -> None:
        self.parts.append(el)

    def svg(self) -> str:
        body = "\n".join(self.parts)
        return (
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w:.0f}" '
            f'height="{self.h:.0f}" viewBox="0 0 {self.w:.2f} {self.h:.2f}">\n'
            f'<rect width="100%" height="100%" fill="white"/>\n{body}\n</svg>\n'
        )


def _draw_grid(cv: _Canvas, grid: OccupancyGrid) -> None:
    res = grid.resolution
    for iy in range(grid.height):
        row = grid.occupied[iy]
        ix = 0
        while ix < grid.width:
            if row[ix]:
                run = ix
                while run < grid.width and row[run]:
                    run += 1
                x, y = cv.pt(grid.origin + np.array([ix * res, (iy + 1) * res]))
                cv.add(
                    f'<rect x="{x:.2f}" y="{y:.2f}" width="{(run - ix) * res * cv.scale:.2f}" '
                    f'height="{res * cv.scale:.2f}" fill="#444"/>'
                )
                ix = run
            else:
                ix += 1


def render_svg(
    grid: OccupancyGrid | None = None,
    path: np.ndarray | None = None,
    detections: list[InvisibleHuman] | None = None,
    scan: LaserScan | None = None,
    robot: np.ndarray | None = None,
    h_rad: float = 0.3,
    size_px: int = 640,
) -> str:
    """Compose an SVG from whichever pieces are given."""
    xs, ys = [], []
    if grid is not None:
        x0, y0, x1, y1 = grid.extent
        xs += [x0, x1]
        ys += [y0, y1]
    for arr in (path, robot):
        if arr is not None and len(arr):
            a = np.asarray(arr, dtype=float).reshape(-1, 2)
            xs += [a[:, 0].min(), a[:, 0].max()]
            ys += [a[:, 1].min(), a[:, 1].max()]
    for det in detections or []:
        xs.append(det.position[0])
        ys.append(det.position[1])
    if not xs:
        xs, ys = [0.0, 1.0], [0.0, 1.0]
    cv = _Canvas(min(xs) - 0.2, min(ys) - 0.2, max(xs) + 0.2, max(ys) + 0.2, size_px)

    if grid is not None:
        _draw_grid(cv, grid)
    if scan is not None:
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in (cv.pt(p) for p in scan.endpoints()))
        cv.add(f'<polyline points="{pts}" fill="none" stroke="#b8d0e8" stroke-width="1"/>')
    if path is not None and len(path):
        p = np.asarray(path, dtype=float).reshape(-1, 2)
        pts = " ".join(f"{x:.2f},{y:.2f}" for x, y in (cv.pt(q) for q in p))
        cv.add(f'<polyline points="{pts}" fill="none" stroke="#999" stroke-width="1.5"/>')
        n = len(p)
        for i, q in enumerate(p):
            f = i / (n - 1) if n > 1 else 0.0
            x, y = cv.pt(q)
            cv.add(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="2.5" fill="{_time_color(f)}"/>')
    for det in detections or []:
        x, y = cv.pt(det.position)
        r = h_rad * cv.scale
        cv.add(
            f'<circle cx="{x:.2f}" cy="{y:.2f}" r="{r:.2f}" fill="none" '
            f'stroke="#d22" stroke-width="2"/>'
        )
        tip = det.position + 0.5 * np.array([math.cos(det.direction), math.sin(det.direction)])
        tx, ty = cv.pt(tip)
        cv.add(
            f'<line x1="{x:.2f}" y1="{y:.2f}" x2="{tx:.2f}" y2="{ty:.2f}" '
            f'stroke="#22d" stroke-width="2"/>'
        )
        left = det.direction + 2.6
        right = det.direction - 2.6
        for a in (left, right):
            hx, hy = cv.pt(tip + 0.12 * np.array([math.cos(a), math.sin(a)]))
            cv.add(
                f'<line x1="{tx:.2f}" y1="{ty:.2f}" x2="{hx:.2f}" y2="{hy:.2f}" '
                f'stroke="#22d" stroke-width="2"/>'
            )
    if robot is not None:
        x, y = cv.pt(np.asarray(robot, dtype=float))
        cv.add(f'<circle cx="{x:.2f}" cy="{y:.2f}" r="5" fill="#c00"/>')
    return cv.svg()


def render_record(grid: OccupancyGrid | None, record) -> str:
    """Figure for a finished run: map plus the executed path colored by time."""
    return render_svg(grid=grid, path=record.path if record.cycles else None)


def render_detections(grid, detections, scan=None, robot=None, h_rad: float = 0.3) -> str:
    return render_svg(grid=grid, detections=detections, scan=scan, robot=robot, h_rad=h_rad)
