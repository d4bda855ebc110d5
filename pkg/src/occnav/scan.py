"""Emulated 2D laser scanner attached to the robot base.

Rays are indexed right-to-left (anti-clockwise): index 0 points at
``angle_min`` in the robot frame and angles increase with the index.  The
default configuration sweeps a full circle with 720 rays (0.5 deg spacing),
7 m range.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .geometry import TWO_PI, as_point, wrap_angle
from .gridmap import OccupancyGrid, raycast_batch

__all__ = ["Pose2D", "ScanConfig", "LaserScan", "simulate_scan", "range_at_angle",
           "ranges_at_angles", "scan_to_csv"]

_FULL_CIRCLE_TOL = 1e-9


@dataclass(frozen=True)
class Pose2D:
    """Planar pose; heading is normalized to (-pi, pi] on construction."""

    position: np.ndarray
    heading: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "position", as_point(self.position))
        self.position.setflags(write=False)
        if not math.isfinite(self.heading):
            raise ValueError(f"heading must be finite, got {self.heading}")
        object.__setattr__(self, "heading", wrap_angle(float(self.heading)))


@dataclass(frozen=True)
class ScanConfig:
    ray_count: int = 720
    angle_min: float = -math.pi
    angle_max: float = math.pi
    max_range: float = 7.0
    front_limit: float = 5.0

    def __post_init__(self):
        if self.ray_count < 8:
            raise ValueError(f"ray_count must be at least 8, got {self.ray_count}")
        if not self.angle_min < self.angle_max:
            raise ValueError("angle_min must be smaller than angle_max")
        if not self.max_range > 0:
            raise ValueError(f"max_range must be positive, got {self.max_range}")
        if not 0 < self.front_limit <= self.max_range:
            raise ValueError("front_limit must lie in (0, max_range]")

    @property
    def full_circle(self) -> bool:
        return abs((self.angle_max - self.angle_min) - TWO_PI) <= _FULL_CIRCLE_TOL

    @property
    def increment(self) -> float:
        span = self.angle_max - self.angle_min
        # a full sweep excludes the duplicate endpoint ray
        return span / self.ray_count if self.full_circle else span / (self.ray_count - 1)

    def angles(self) -> np.ndarray:
        """Per-ray angles in the robot frame, index 0 at ``angle_min``."""
        if self.full_circle:
            return self.angle_min + self.increment * np.arange(self.ray_count)
        return np.linspace(self.angle_min, self.angle_max, self.ray_count)


@dataclass(frozen=True)
class LaserScan:
    pose: Pose2D
    config: ScanConfig
    ranges: np.ndarray

    def __post_init__(self):
        r = np.asarray(self.ranges, dtype=float)
        if r.shape != (self.config.ray_count,):
            raise ValueError(
                f"expected {self.config.ray_count} ranges, got shape {r.shape}"
            )
        r = r.copy() if r.flags.writeable else r
        r.setflags(write=False)
        object.__setattr__(self, "ranges", r)

    def angles(self) -> np.ndarray:
        return self.config.angles()

    def endpoints(self) -> np.ndarray:
        """World coordinates of every ray endpoint, shape (ray_count, 2)."""
        world = self.pose.heading + self.config.angles()
        return self.pose.position + self.ranges[:, None] * np.stack(
            [np.cos(world), np.sin(world)], axis=1
        )


def simulate_scan(grid: OccupancyGrid, pose: Pose2D, config: ScanConfig | None = None) -> LaserScan:
    """Cast every configured ray from ``pose`` against the grid."""
    config = config or ScanConfig()
    ix, iy = grid.world_to_cell(pose.position)
    if not grid.in_bounds(ix, iy) or grid.occupied[iy, ix]:
        raise ValueError(f"scan pose {pose.position} is not in free space")
    ranges = raycast_batch(grid, pose.position, pose.heading + config.angles(), config.max_range)
    return LaserScan(pose, config, ranges)


def _nearest_index(config: ScanConfig, beta: float) -> int:
    inc = config.increment
    if config.full_circle:
        rel = (beta - config.angle_min) % TWO_PI
        frac = rel / inc
        i0 = math.floor(frac)
        idx = i0 if (frac - i0) <= 0.5 else i0 + 1  # exact midpoint -> lower index
        return idx % config.ray_count
    b = wrap_angle(beta)
    if not config.angle_min <= b <= config.angle_max:
        raise ValueError(
            f"bearing {b:.6f} rad is outside the scan span "
            f"[{config.angle_min:.6f}, {config.angle_max:.6f}]"
        )
    frac = (b - config.angle_min) / inc
    i0 = math.floor(frac)
    idx = i0 if (frac - i0) <= 0.5 else i0 + 1
    return min(max(idx, 0), config.ray_count - 1)


def range_at_angle(scan: LaserScan, beta: float) -> float:
    """Scan range at robot-frame bearing ``beta`` (nearest ray, ties to the
    lower index; no interpolation)."""
    return float(scan.ranges[_nearest_index(scan.config, beta)])


def ranges_at_angles(scan: LaserScan, betas: np.ndarray) -> np.ndarray:
    """Vectorized :func:`range_at_angle` for full-circle scans."""
    cfg = scan.config
    if not cfg.full_circle:
        return np.array([range_at_angle(scan, float(b)) for b in np.ravel(betas)])
    rel = (np.asarray(betas, dtype=float) - cfg.angle_min) % TWO_PI
    frac = rel / cfg.increment
    i0 = np.floor(frac)
    idx = np.where(frac - i0 <= 0.5, i0, i0 + 1).astype(np.int64) % cfg.ray_count
    return scan.ranges[idx]


def scan_to_csv(scan: LaserScan) -> str:
    """Serialize a scan as ``index,angle_rad,range_m`` rows."""
    lines = ["index,angle_rad,range_m"]
    for i, (a, r) in enumerate(zip(scan.angles(), scan.ranges)):
        lines.append(f"{i},{float(a)!r},{float(r)!r}")
    return "\n".join(lines) + "\n"
