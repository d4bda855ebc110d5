"""Seeded random maze maps via recursive division.

The free area is a lattice of square chambers one corridor wide; dividing
walls are one cell thick and every wall carries a full-chamber-wide door, so
the free space stays fully connected by construction.  Leftover cells that do
not fit a whole chamber become extra border wall.
"""

from __future__ import annotations

import numpy as np

from .gridmap import OccupancyGrid

__all__ = ["generate_maze"]


def generate_maze(
    seed: int,
    width: int,
    height: int,
    corridor_width: float = 1.2,
    resolution: float = 0.1,
) -> OccupancyGrid:
    """Deterministic maze of ``width x height`` cells; corridors are
    ``corridor_width`` meters wide (rounded to whole cells)."""
    if width <= 0 or height <= 0:
        raise ValueError(f"maze dimensions must be positive, got {width}x{height}")
    if corridor_width <= 0 or resolution <= 0:
        raise ValueError("corridor_width and resolution must be positive")
    cw = max(1, round(corridor_width / resolution))
    pitch = cw + 1
    cols = (width - 1) // pitch
    rows = (height - 1) // pitch
    if cols < 1 or rows < 1:
        raise ValueError(
            f"{width}x{height} cells cannot hold a {corridor_width} m corridor "
            f"at {resolution} m/cell"
        )
    occ = np.ones((height, width), dtype=bool)
    occ[1 : rows * pitch, 1 : cols * pitch] = False

    rng = np.random.default_rng(seed)

    def divide(ua: int, ub: int, va: int, vb: int) -> None:
        du, dv = ub - ua, vb - va
        if du < 1 and dv < 1:
            return
        if du > dv:
            vertical = True
        elif dv > du:
            vertical = False
        else:
            vertical = bool(rng.integers(2))
        if vertical:
            m = int(rng.integers(ua, ub))  # wall right of chamber column m
            door = int(rng.integers(va, vb + 1))
            x = (m + 1) * pitch
            occ[va * pitch + 1 : vb * pitch + cw + 1, x] = True
            occ[door * pitch + 1 : door * pitch + cw + 1, x] = False
            divide(ua, m, va, vb)
            divide(m + 1, ub, va, vb)
        else:
            m = int(rng.integers(va, vb))
            door = int(rng.integers(ua, ub + 1))
            y = (m + 1) * pitch
            occ[y, ua * pitch + 1 : ub * pitch + cw + 1] = True
            occ[y, door * pitch + 1 : door * pitch + cw + 1] = False
            divide(ua, ub, va, m)
            divide(ua, ub, m + 1, vb)

    divide(0, cols - 1, 0, rows - 1)
    return OccupancyGrid(occ, resolution, (0.0, 0.0))
