"""Locate positions where currently-hidden people could emerge from occlusions.

The scan contour is a polygon around the robot whose vertices follow the
anti-clockwise ray order, so any point just past a contour edge lies to the
*right* of that edge taken in index order.  Detection walks each large range
discontinuity ("gap edge") starting from its corner (the endpoint nearer the
robot), placing a candidate emergence point one body radius plus margin to
the hidden side, and accepts the first candidate that is both outside the
contour and collision-free on the map.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import as_point, wrap_angle
from .gridmap import OccupancyGrid, circle_overlaps, is_occupied
from .scan import LaserScan, Pose2D, ScanConfig, range_at_angle, simulate_scan

__all__ = [
    "DetectionParams",
    "VertexPair",
    "InvisibleHuman",
    "find_gap_pairs",
    "select_corners",
    "offset_right",
    "offset_left",
    "is_outside_contour",
    "locate_invisible_humans",
    "detect",
]


@dataclass(frozen=True)
class DetectionParams:
    """Tuning knobs for emergence detection.

    ``epsilon`` defaults to half the body radius; the walk step along a gap
    edge is ``alpha * (h_rad + epsilon)``; ``k`` lateral probe points per side
    guard the candidate disc.
    """

    gap_threshold: float = 0.5
    h_rad: float = 0.3
    epsilon: float | None = None
    alpha: float = 0.2
    k: int = 10
    front_limit: float = 5.0

    def __post_init__(self):
        if self.epsilon is None:
            object.__setattr__(self, "epsilon", self.h_rad / 2.0)
        for name in ("gap_threshold", "h_rad", "epsilon", "alpha", "front_limit"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.k < 1:
            raise ValueError(f"k must be at least 1, got {self.k}")

    @property
    def offset(self) -> float:
        """Perpendicular placement distance of the emergence point."""
        return self.h_rad + self.epsilon


@dataclass(frozen=True)
class VertexPair:
    """Endpoints of two consecutive rays separated by more than the gap
    threshold.  ``v1`` is the corner (nearer the robot), ``v2`` the far end;
    ``index1``/``index2`` are the consecutive ray indices in scan order and
    ``corner_at_index1`` records which of them the corner belongs to."""

    v1: np.ndarray
    v2: np.ndarray
    index1: int
    index2: int
    separation: float
    corner_at_index1: bool

    @property
    def edge_start(self) -> np.ndarray:
        """First endpoint of the gap edge in scan (anti-clockwise) order."""
        return self.v1 if self.corner_at_index1 else self.v2

    @property
    def edge_end(self) -> np.ndarray:
        return self.v2 if self.corner_at_index1 else self.v1


@dataclass(frozen=True)
class InvisibleHuman:
    """A hypothesized person just beyond an occlusion edge, facing the robot."""

    position: np.ndarray
    direction: float
    source_corner: np.ndarray
    distance_to_robot: float
    pair: VertexPair | None = None


def find_gap_pairs(scan: LaserScan, params: DetectionParams) -> list[VertexPair]:
    """Consecutive-ray endpoint pairs separated by more than the threshold.

    Pairs whose corner is farther than ``front_limit`` or behind the robot
    (|bearing| > pi/2) are dropped.
    """
    pts = scan.endpoints()
    seps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    angles = scan.config.angles()
    ranges = scan.ranges
    pairs = []
    for i in np.nonzero(seps > params.gap_threshold)[0]:
        i = int(i)
        corner_first = ranges[i] <= ranges[i + 1]
        ci = i if corner_first else i + 1
        if ranges[ci] > params.front_limit:
            continue
        if abs(wrap_angle(angles[ci])) > math.pi / 2:
            continue
        v1 = pts[ci]
        v2 = pts[i + 1 if corner_first else i]
        pairs.append(
            VertexPair(v1, v2, i, i + 1, float(seps[i]), corner_at_index1=corner_first)
        )
    return pairs


def select_corners(pairs: list[VertexPair]) -> list[np.ndarray]:
    """The near endpoint of each pair, input order preserved."""
    return [p.v1 for p in pairs]


def _perp_offset(v1, v2, p, d: float, sign: float) -> np.ndarray:
    v1 = as_point(v1)
    v2 = as_point(v2)
    p = as_point(p)
    if d < 0:
        raise ValueError(f"offset distance must be non-negative, got {d}")
    ex, ey = v2[0] - v1[0], v2[1] - v1[1]
    length = math.hypot(ex, ey)
    if length == 0.0:
        raise ValueError("segment is degenerate (v1 == v2)")
    return np.array([p[0] + sign * d * ey / length, p[1] - sign * d * ex / length])


def offset_right(v1, v2, p, d: float) -> np.ndarray:
    """Point at distance ``d`` from ``p``, perpendicular to and strictly right
    of the directed segment v1 -> v2."""
    return _perp_offset(v1, v2, p, d, +1.0)


def offset_left(v1, v2, p, d: float) -> np.ndarray:
    """Mirror of :func:`offset_right` (left of v1 -> v2)."""
    return _perp_offset(v1, v2, p, d, -1.0)


def is_outside_contour(scan: LaserScan, h) -> bool:
    """True iff ``h`` is strictly farther than the scan range at its bearing."""
    h = as_point(h)
    r = h - scan.pose.position
    dist = math.hypot(r[0], r[1])
    beta = wrap_angle(math.atan2(r[1], r[0]) - scan.pose.heading)
    return dist > range_at_angle(scan, beta)


def _walk_gap_edge(
    grid: OccupancyGrid, scan: LaserScan, params: DetectionParams, pair: VertexPair
) -> InvisibleHuman | None:
    e1, e2 = pair.edge_start, pair.edge_end
    d = params.offset
    walk_dir = (pair.v2 - pair.v1) / pair.separation
    step = params.alpha * d
    robot = scan.pose.position
    n_steps = int(math.floor(pair.separation / step))
    for m in range(n_steps + 1):
        p = pair.v1 + (m * step) * walk_dir
        h = offset_right(e1, e2, p, d)
        if not is_outside_contour(scan, h):
            continue
        if is_occupied(grid, h):
            continue
        if not _lateral_probes_free(grid, e1, e2, h, params):
            continue
        if circle_overlaps(grid, h, params.h_rad):
            continue
        rel = robot - h
        return InvisibleHuman(
            position=h,
            direction=math.atan2(rel[1], rel[0]),
            source_corner=pair.v1,
            distance_to_robot=float(math.hypot(rel[0], rel[1])),
            pair=pair,
        )
    return None


def _lateral_probes_free(grid, e1, e2, h, params: DetectionParams) -> bool:
    for i in range(1, params.k + 1):
        di = (i / params.k) * params.offset
        if is_occupied(grid, offset_right(e1, e2, h, di)):
            return False
        if is_occupied(grid, offset_left(e1, e2, h, di)):
            return False
    return True


def locate_invisible_humans(
    grid: OccupancyGrid,
    scan: LaserScan,
    params: DetectionParams,
    pairs: list[VertexPair] | None = None,
) -> list[InvisibleHuman]:
    """Run the gap-edge walk for every corner; at most one hit per corner.

    Hits closer together than ``h_rad`` are merged, keeping the one nearer
    the robot.  Output is ordered by corner ray index.
    """
    if pairs is None:
        pairs = find_gap_pairs(scan, params)
    found = []
    for pair in pairs:
        hit = _walk_gap_edge(grid, scan, params, pair)
        if hit is not None:
            found.append(hit)
    return _merge_nearby(found, params.h_rad)


def _merge_nearby(found: list[InvisibleHuman], min_dist: float) -> list[InvisibleHuman]:
    kept: list[InvisibleHuman] = []
    for h in sorted(found, key=lambda h: h.distance_to_robot):
        if all(np.linalg.norm(h.position - k.position) >= min_dist for k in kept):
            kept.append(h)
    keep_ids = {id(h) for h in kept}
    return [h for h in found if id(h) in keep_ids]


def detect(
    grid: OccupancyGrid,
    pose: Pose2D,
    params: DetectionParams | None = None,
    config: ScanConfig | None = None,
) -> tuple[LaserScan, list[InvisibleHuman]]:
    """One-call pipeline: scan, find gaps, walk edges."""
    params = params or DetectionParams()
    scan = simulate_scan(grid, pose, config)
    return scan, locate_invisible_humans(grid, scan, params)
