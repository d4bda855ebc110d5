"""Binary occupancy-grid maps with exact ray casting and disc collision queries.

Two on-disk formats are supported:

* ASCII grid: a header line ``W H RES OX OY`` (width and height in cells,
  resolution in meters/cell, world origin in meters), followed by H rows of
  W characters, ``#`` occupied and ``.`` free.  The first payload row is the
  row at the smallest world y.
* Binary 8-bit PGM (magic ``P5``) with a sidecar metadata file (map path with
  its suffix replaced by ``.meta``) holding ``resolution``, ``origin_x`` and
  ``origin_y``, one ``key value`` pair per line.  Pixels darker than 50% of
  the maximum value are occupied; the first pixel row is the top of the map
  (largest world y), per the usual image convention.
"""

from __future__ import annotations

import math
from pathlib import Path

import numpy as np

from .geometry import as_point

__all__ = [
    "OccupancyGrid",
    "load_map",
    "parse_ascii_map",
    "save_ascii_map",
    "save_raster_map",
    "is_occupied",
    "circle_overlaps",
    "raycast",
    "raycast_batch",
]


class OccupancyGrid:
    """Immutable binary occupancy raster.

    ``occupied[iy, ix]`` covers the world square
    ``[origin + (ix, iy) * res, origin + (ix + 1, iy + 1) * res)``; row 0 sits
    at the smallest world y.  Instances are read-only after construction, so
    all queries are safe to run concurrently.
    """

    __slots__ = ("occupied", "resolution", "origin", "_distance_field")

    def __init__(self, occupied, resolution: float, origin=(0.0, 0.0)):
        occ = np.ascontiguousarray(occupied, dtype=bool)
        if occ.ndim != 2 or occ.shape[0] < 1 or occ.shape[1] < 1:
            raise ValueError("occupancy array must be 2D and non-empty")
        resolution = float(resolution)
        if not (math.isfinite(resolution) and resolution > 0.0):
            raise ValueError(f"resolution must be a positive number, got {resolution}")
        occ.setflags(write=False)
        self.occupied = occ
        self.resolution = resolution
        self.origin = as_point(origin)
        self.origin.setflags(write=False)
        self._distance_field = None

    # -- geometry ----------------------------------------------------------

    @property
    def width(self) -> int:
        return self.occupied.shape[1]

    @property
    def height(self) -> int:
        return self.occupied.shape[0]

    @property
    def extent(self) -> tuple[float, float, float, float]:
        """World bounding box (x0, y0, x1, y1)."""
        x0, y0 = self.origin
        return (x0, y0, x0 + self.width * self.resolution, y0 + self.height * self.resolution)

    def world_to_cell(self, p) -> tuple[int, int]:
        p = np.asarray(p, dtype=float)
        ix = math.floor((p[0] - self.origin[0]) / self.resolution)
        iy = math.floor((p[1] - self.origin[1]) / self.resolution)
        return ix, iy

    def cell_center(self, ix: int, iy: int) -> np.ndarray:
        return self.origin + (np.array([ix, iy], dtype=float) + 0.5) * self.resolution

    def in_bounds(self, ix: int, iy: int) -> bool:
        return 0 <= ix < self.width and 0 <= iy < self.height

    def free_cell_centers(self) -> np.ndarray:
        """World coordinates of every free cell center, shape (N, 2)."""
        iy, ix = np.nonzero(~self.occupied)
        return self.origin + (np.stack([ix, iy], axis=1) + 0.5) * self.resolution

    def distance_field(self) -> np.ndarray:
        """Meters from each cell center to the nearest occupied cell center.

        Cached after the first call; cell-center granularity is adequate for
        clearance costs but not a substitute for :func:`circle_overlaps`.
        """
        if self._distance_field is None:
            from scipy import ndimage

            d = ndimage.distance_transform_edt(~self.occupied) * self.resolution
            d.setflags(write=False)
            self._distance_field = d
        return self._distance_field


# -- queries ---------------------------------------------------------------


def is_occupied(grid: OccupancyGrid, p) -> bool:
    """True if ``p`` lies in an occupied cell or outside the map bounds."""
    ix, iy = grid.world_to_cell(p)
    if not grid.in_bounds(ix, iy):
        return True
    return bool(grid.occupied[iy, ix])


def circle_overlaps(grid: OccupancyGrid, center, radius: float) -> bool:
    """True iff any occupied cell intersects the closed disc.

    Exact at cell granularity: every cell whose axis-aligned square touches
    the disc is examined.
    """
    if radius < 0:
        raise ValueError(f"radius must be non-negative, got {radius}")
    c = np.asarray(center, dtype=float)
    res = grid.resolution
    ox, oy = grid.origin
    ix_lo = max(0, math.floor((c[0] - radius - ox) / res))
    ix_hi = min(grid.width - 1, math.floor((c[0] + radius - ox) / res))
    iy_lo = max(0, math.floor((c[1] - radius - oy) / res))
    iy_hi = min(grid.height - 1, math.floor((c[1] + radius - oy) / res))
    if ix_lo > ix_hi or iy_lo > iy_hi:
        return False
    sub = grid.occupied[iy_lo : iy_hi + 1, ix_lo : ix_hi + 1]
    if not sub.any():
        return False
    # distance from the center to the nearest point of each candidate cell
    cell_x0 = ox + np.arange(ix_lo, ix_hi + 1) * res
    cell_y0 = oy + np.arange(iy_lo, iy_hi + 1) * res
    dx = c[0] - np.clip(c[0], cell_x0, cell_x0 + res)
    dy = c[1] - np.clip(c[1], cell_y0, cell_y0 + res)
    d2 = dx[None, :] ** 2 + dy[:, None] ** 2
    return bool(np.any(sub & (d2 <= radius * radius)))


def raycast_batch(grid: OccupancyGrid, origin, angles, max_range: float) -> np.ndarray:
    """Cast many rays from one origin; returns the range of each.

    Uses an exact incremental grid walk that visits every cell each ray
    crosses; the returned range is the entry distance into the first occupied
    cell (out-of-bounds counts as occupied), saturated at ``max_range``.
    An origin inside an occupied or out-of-bounds cell yields all zeros.
    """
    if not max_range > 0:
        raise ValueError(f"max_range must be positive, got {max_range}")
    origin = np.asarray(origin, dtype=float)
    angles = np.asarray(angles, dtype=float)
    n = angles.size
    ranges = np.full(n, float(max_range))

    ix0, iy0 = grid.world_to_cell(origin)
    if not grid.in_bounds(ix0, iy0) or grid.occupied[iy0, ix0]:
        return np.zeros(n)

    res = grid.resolution
    ox, oy = grid.origin
    x0, y0 = float(origin[0]), float(origin[1])
    dx = np.cos(angles)
    dy = np.sin(angles)
    step_x = np.sign(dx).astype(np.int64)
    step_y = np.sign(dy).astype(np.int64)

    # distance along the ray to the first x/y cell boundary, and per-cell strides
    bound_x = ox + (ix0 + (step_x > 0)) * res
    bound_y = oy + (iy0 + (step_y > 0)) * res
    with np.errstate(divide="ignore", invalid="ignore"):
        t_max_x = np.where(step_x != 0, (bound_x - x0) / dx, np.inf)
        t_max_y = np.where(step_y != 0, (bound_y - y0) / dy, np.inf)
        t_delta_x = np.where(step_x != 0, res / np.abs(dx), np.inf)
        t_delta_y = np.where(step_y != 0, res / np.abs(dy), np.inf)

    ix = np.full(n, ix0, dtype=np.int64)
    iy = np.full(n, iy0, dtype=np.int64)
    active = np.ones(n, dtype=bool)
    occ = grid.occupied
    w, h = grid.width, grid.height
    while active.any():
        go_x = t_max_x < t_max_y
        t = np.where(go_x, t_max_x, t_max_y)
        adv_x = active & go_x
        adv_y = active & ~go_x
        ix = np.where(adv_x, ix + step_x, ix)
        iy = np.where(adv_y, iy + step_y, iy)
        t_max_x = np.where(adv_x, t_max_x + t_delta_x, t_max_x)
        t_max_y = np.where(adv_y, t_max_y + t_delta_y, t_max_y)

        saturated = active & (t >= max_range)
        live = active & ~saturated
        oob = live & ((ix < 0) | (ix >= w) | (iy < 0) | (iy >= h))
        inb = live & ~oob
        hit = oob.copy()
        hit[inb] = occ[iy[inb], ix[inb]]
        ranges = np.where(hit, t, ranges)
        active = live & ~hit
    return ranges


def raycast(grid: OccupancyGrid, origin, angle: float, max_range: float) -> float:
    """Single-ray form of :func:`raycast_batch` (identical arithmetic)."""
    return float(raycast_batch(grid, origin, np.array([angle], dtype=float), max_range)[0])


# -- file formats ----------------------------------------------------------


def load_map(source) -> OccupancyGrid:
    """Load a map file, auto-detecting ASCII grid vs binary PGM raster."""
    path = Path(source)
    data = path.read_bytes()
    if data[:2] == b"P5":
        return _load_raster_map(path, data)
    return parse_ascii_map(data.decode("utf-8"))


def parse_ascii_map(text: str) -> OccupancyGrid:
    lines = text.splitlines()
    while lines and not lines[-1].strip():
        lines.pop()
    if not lines:
        raise ValueError("empty map file")
    header = lines[0].split()
    if len(header) != 5:
        raise ValueError(f"map header must be 'W H RES OX OY', got {lines[0]!r}")
    try:
        w, h = int(header[0]), int(header[1])
        res, ox, oy = (float(v) for v in header[2:])
    except ValueError as e:
        raise ValueError(f"bad map header {lines[0]!r}: {e}") from None
    if w <= 0 or h <= 0:
        raise ValueError(f"map dimensions must be positive, got {w}x{h}")
    rows = lines[1:]
    if len(rows) != h:
        raise ValueError(f"header promises {h} rows, payload has {len(rows)}")
    occ = np.zeros((h, w), dtype=bool)
    for iy, row in enumerate(rows):
        if len(row) != w:
            raise ValueError(f"row {iy} has {len(row)} cells, expected {w}")
        bad = set(row) - {"#", "."}
        if bad:
            raise ValueError(f"row {iy} contains invalid cells {sorted(bad)}")
        occ[iy] = np.frombuffer(row.encode("ascii"), dtype=np.uint8) == ord("#")
    return OccupancyGrid(occ, res, (ox, oy))


def save_ascii_map(grid: OccupancyGrid, path) -> None:
    path = Path(path)
    ox, oy = (float(v) for v in grid.origin)
    lines = [f"{grid.width} {grid.height} {grid.resolution!r} {ox!r} {oy!r}"]
    for row in grid.occupied:
        lines.append("".join("#" if c else "." for c in row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _meta_path(path: Path) -> Path:
    return path.with_suffix(".meta")


def _load_raster_map(path: Path, data: bytes) -> OccupancyGrid:
    pixels, w, h, maxval = _parse_pgm(data)
    meta = _meta_path(path)
    if not meta.exists():
        raise ValueError(f"raster map {path} is missing its sidecar {meta.name}")
    keys = {}
    for line in meta.read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.replace(":", " ").split()
        if len(parts) != 2:
            raise ValueError(f"bad metadata line {line!r} in {meta.name}")
        keys[parts[0]] = parts[1]
    try:
        res = float(keys["resolution"])
        ox = float(keys["origin_x"])
        oy = float(keys["origin_y"])
    except KeyError as e:
        raise ValueError(f"metadata {meta.name} is missing key {e.args[0]}") from None
    if res <= 0:
        raise ValueError(f"resolution must be positive, got {res}")
    # dark pixels are obstacles; flip so row 0 holds the smallest y
    occ = np.flipud(pixels < 0.5 * maxval).reshape(h, w)
    return OccupancyGrid(occ, res, (ox, oy))


def _parse_pgm(data: bytes) -> tuple[np.ndarray, int, int, int]:
    # tokenize the header, honoring '#' comments
    pos = 2  # past magic
    fields: list[int] = []
    while len(fields) < 3:
        while pos < len(data) and data[pos : pos + 1].isspace():
            pos += 1
        if pos < len(data) and data[pos : pos + 1] == b"#":
            while pos < len(data) and data[pos] != 0x0A:
                pos += 1
            continue
        start = pos
        while pos < len(data) and not data[pos : pos + 1].isspace():
            pos += 1
        token = data[start:pos]
        if not token:
            raise ValueError("truncated PGM header")
        try:
            fields.append(int(token))
        except ValueError:
            raise ValueError(f"bad PGM header token {token!r}") from None
    pos += 1  # single whitespace byte before the payload
    w, h, maxval = fields
    if w <= 0 or h <= 0:
        raise ValueError(f"PGM dimensions must be positive, got {w}x{h}")
    if not 0 < maxval < 256:
        raise ValueError(f"only 8-bit PGM is supported, maxval {maxval}")
    payload = data[pos : pos + w * h]
    if len(payload) != w * h:
        raise ValueError(f"PGM payload has {len(payload)} bytes, expected {w * h}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w), w, h, maxval


def save_raster_map(grid: OccupancyGrid, path) -> None:
    """Write an 8-bit PGM (occupied=0, free=255) plus its sidecar metadata."""
    path = Path(path)
    img = np.where(np.flipud(grid.occupied), 0, 255).astype(np.uint8)
    with path.open("wb") as f:
        f.write(f"P5\n{grid.width} {grid.height}\n255\n".encode("ascii"))
        f.write(img.tobytes())
    ox, oy = (float(v) for v in grid.origin)
    _meta_path(path).write_text(
        f"resolution {grid.resolution!r}\norigin_x {ox!r}\norigin_y {oy!r}\n",
        encoding="utf-8",
    )
