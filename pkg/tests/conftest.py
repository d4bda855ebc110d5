import math

import numpy as np
import pytest

from occnav.gridmap import OccupancyGrid


def grid_from_rows(rows, resolution=0.1, origin=(0.0, 0.0)):
    """Build a grid from ASCII art; the FIRST row is the TOP (largest y),
    which reads naturally in test source."""
    occ = np.array([[c == "#" for c in row] for row in reversed(rows)], dtype=bool)
    return OccupancyGrid(occ, resolution, origin)


def disc_overlap_bruteforce(grid, center, radius):
    """All-cells scan oracle for circle_overlaps."""
    res = grid.resolution
    cx, cy = float(center[0]), float(center[1])
    xs = grid.origin[0] + np.arange(grid.width) * res
    ys = grid.origin[1] + np.arange(grid.height) * res
    dx = cx - np.clip(cx, xs, xs + res)
    dy = cy - np.clip(cy, ys, ys + res)
    d2 = dx[None, :] ** 2 + dy[:, None] ** 2
    return bool(np.any(grid.occupied & (d2 <= radius * radius)))


def ray_rect_distance(origin, angle, rect):
    """Analytic distance from origin along angle to an axis-aligned rectangle
    (x0, y0, x1, y1); inf if missed.  Standard slab method."""
    ox, oy = origin
    dx, dy = math.cos(angle), math.sin(angle)
    t0, t1 = 0.0, math.inf
    for o, d, lo, hi in ((ox, dx, rect[0], rect[2]), (oy, dy, rect[1], rect[3])):
        if abs(d) < 1e-15:
            if not lo <= o <= hi:
                return math.inf
            continue
        ta, tb = (lo - o) / d, (hi - o) / d
        if ta > tb:
            ta, tb = tb, ta
        t0, t1 = max(t0, ta), min(t1, tb)
    return t0 if t0 <= t1 else math.inf


@pytest.fixture
def empty16():
    from occnav.scenarios import empty_room

    return empty_room(16.0, 16.0)


# -- independent oracles for the detection pipeline --------------------------


def perpendicular_offset_oracle(v1, v2, p, d, side):
    """Rotate the unit perpendicular both ways and pick the candidate whose
    cross-product sign matches: -1 selects the right of v1->v2, +1 the left."""
    v1 = np.asarray(v1, float)
    v2 = np.asarray(v2, float)
    p = np.asarray(p, float)
    e = v2 - v1
    n = np.array([-e[1], e[0]]) / math.hypot(*e)  # left normal
    for cand in (p + d * n, p - d * n):
        cross = e[0] * (cand[1] - p[1]) - e[1] * (cand[0] - p[0])
        if np.sign(cross) == side:
            return cand
    return p  # d == 0


def disc_fits_at_centers(grid, radius):
    """Boolean mask: a disc of the given radius centered at each cell center
    touches no occupied cell.  Derived via dilation with the exact footprint
    of cells whose square intersects the disc."""
    from scipy import ndimage

    res = grid.resolution
    r_cells = int(math.ceil(radius / res + 0.5))
    off = np.arange(-r_cells, r_cells + 1)
    di, dj = np.meshgrid(off, off, indexing="xy")
    nearest = np.hypot(
        np.maximum(np.abs(di) - 0.5, 0.0), np.maximum(np.abs(dj) - 0.5, 0.0)
    ) * res
    footprint = nearest <= radius
    return ~ndimage.binary_dilation(grid.occupied, structure=footprint)


def feasible_emergence_points(grid, scan, radius):
    """Exhaustive-grid oracle: free cell centers outside the scan contour
    whose body disc fits the map."""
    from occnav.scan import ranges_at_angles

    res = grid.resolution
    ys, xs = np.mgrid[0 : grid.height, 0 : grid.width]
    centers = np.stack(
        [grid.origin[0] + (xs + 0.5) * res, grid.origin[1] + (ys + 0.5) * res], axis=-1
    )
    rel = centers - scan.pose.position
    dist = np.hypot(rel[..., 0], rel[..., 1])
    bearings = np.arctan2(rel[..., 1], rel[..., 0]) - scan.pose.heading
    rho = ranges_at_angles(scan, bearings.ravel()).reshape(bearings.shape)
    mask = (~grid.occupied) & disc_fits_at_centers(grid, radius) & (dist > rho)
    return centers[mask]


def soundness_violations(grid, scan, humans, params):
    """Check every detection against the four structural guarantees; returns
    human-readable violation strings (empty means all sound)."""
    from occnav.gridmap import circle_overlaps
    from occnav.scan import range_at_angle

    out = []
    for h in humans:
        rel = h.position - scan.pose.position
        dist = math.hypot(*rel)
        beta = math.atan2(rel[1], rel[0]) - scan.pose.heading
        if not dist > range_at_angle(scan, beta):
            out.append(f"{h.position}: not strictly outside the contour")
        if circle_overlaps(grid, h.position, params.h_rad):
            out.append(f"{h.position}: body disc clips an obstacle")
        e1, e2 = h.pair.edge_start, h.pair.edge_end
        e = e2 - e1
        cross = e[0] * (h.position[1] - e1[1]) - e[1] * (h.position[0] - e1[0])
        if not cross < 0:
            out.append(f"{h.position}: not right of its gap edge")
        perp = abs(cross) / math.hypot(*e)
        if abs(perp - params.offset) > 1e-6:
            out.append(f"{h.position}: perpendicular distance {perp}")
    return out
