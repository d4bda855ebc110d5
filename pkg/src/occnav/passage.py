"""Classify narrow passages from emergence detections and emit planning modes.

A doorway or pillar approach shows up as two detections forming a near
isosceles triangle with the robot at the apex; a passage squeezed between an
opening and a wall shows up as a single detection roughly mirrored by a wall
return on the other side of the robot's heading.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .detect import InvisibleHuman
from .geometry import unit_from_angle, wrap_angle
from .scan import LaserScan, range_at_angle

__all__ = [
    "PassageKind",
    "PassageLimits",
    "PassageClass",
    "PlanDirective",
    "PASS_THROUGH_VMAX",
    "classify_passage",
    "passage_directive",
]

PASS_THROUGH_VMAX = 0.3


class PassageKind(str, Enum):
    DOORWAY = "doorway"
    PILLAR = "pillar"
    WALL_PASSAGE = "wall_passage"
    NO_PASSAGE = "no_passage"


@dataclass(frozen=True)
class PassageLimits:
    base_max: float = 3.0
    base_min: float = 1.6
    side_max: float = 2.0
    side_min: float = 0.8
    isosceles_tol: float = 0.15
    wall_diff_max: float = 1.0

    def __post_init__(self):
        if not 0 < self.base_min < self.base_max:
            raise ValueError("base limits must satisfy 0 < min < max")
        if not 0 < self.side_min < self.side_max:
            raise ValueError("side limits must satisfy 0 < min < max")
        if not 0 < self.isosceles_tol < 1:
            raise ValueError("isosceles_tol must lie in (0, 1)")
        if not self.wall_diff_max > 0:
            raise ValueError("wall_diff_max must be positive")


@dataclass(frozen=True)
class PassageClass:
    """Classification result; ``anchor`` is the base midpoint (doorway or
    pillar) or the single detection (wall passage).  ``gate`` holds the
    segment the robot must cross to complete the passage."""

    kind: PassageKind
    anchor: np.ndarray | None = None
    gate: tuple[np.ndarray, np.ndarray] | None = None


@dataclass(frozen=True)
class PlanDirective:
    mode: str  # "normal" | "pass_through"
    disable_invisible_cost: bool
    vmax_cap: float | None


def classify_passage(
    humans: list[InvisibleHuman],
    scan: LaserScan,
    limits: PassageLimits | None = None,
) -> PassageClass:
    """Classify the current detections against the triangle/wall tests."""
    limits = limits or PassageLimits()
    robot = scan.pose.position

    best = None
    best_mean_side = math.inf
    for a in range(len(humans)):
        for b in range(a + 1, len(humans)):
            ha, hb = humans[a], humans[b]
            sa = float(np.linalg.norm(ha.position - robot))
            sb = float(np.linalg.norm(hb.position - robot))
            base = float(np.linalg.norm(ha.position - hb.position))
            if abs(sa - sb) > limits.isosceles_tol * max(sa, sb):
                continue
            if not limits.base_min <= base <= limits.base_max:
                continue
            if not (limits.side_min <= sa <= limits.side_max
                    and limits.side_min <= sb <= limits.side_max):
                continue
            mean_side = 0.5 * (sa + sb)
            if mean_side < best_mean_side:
                best_mean_side = mean_side
                best = (ha, hb)

    if best is not None:
        ha, hb = best
        mid = 0.5 * (ha.position + hb.position)
        bisector = float(np.linalg.norm(mid - robot))
        center_range = range_at_angle(scan, 0.0)
        kind = PassageKind.PILLAR if center_range < bisector else PassageKind.DOORWAY
        return PassageClass(kind, anchor=mid, gate=(ha.position, hb.position))

    if len(humans) == 1:
        h = humans[0]
        rel = h.source_corner - robot
        corner_bearing = wrap_angle(math.atan2(rel[1], rel[0]) - scan.pose.heading)
        mirrored = -corner_bearing
        try:
            wall_range = range_at_angle(scan, mirrored)
        except ValueError:  # mirrored bearing outside a partial scan span
            return PassageClass(PassageKind.NO_PASSAGE)
        if abs(wall_range - h.distance_to_robot) < limits.wall_diff_max:
            wall_point = robot + wall_range * unit_from_angle(scan.pose.heading + mirrored)
            return PassageClass(
                PassageKind.WALL_PASSAGE, anchor=h.position, gate=(h.position, wall_point)
            )

    return PassageClass(PassageKind.NO_PASSAGE)


def passage_directive(cls: PassageClass) -> PlanDirective:
    """Planning mode for a classification: any detected passage switches to
    pass-through (emergence cost off, speed capped); otherwise normal."""
    if cls.kind is PassageKind.NO_PASSAGE:
        return PlanDirective(mode="normal", disable_invisible_cost=False, vmax_cap=None)
    return PlanDirective(
        mode="pass_through", disable_invisible_cost=True, vmax_cap=PASS_THROUGH_VMAX
    )
