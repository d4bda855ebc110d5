"""Anticipatory collision cost for hidden-human emergence points.

A person stepping out at distance ``d`` walks at speed ``V`` toward the robot
for a reaction time, then brakes at deceleration ``a``.  A trajectory pose at
time offset ``dt`` therefore pays ``V / d`` while within the reaction window
and ``max((V - a*dt) / d, 0)`` after it.  Note the deceleration multiplies the
full time offset, which leaves a downward jump of ``a * reaction_time / d`` at
the window boundary; set ``decelerate_from_reaction`` to time the braking from
the end of the reaction window instead (continuous variant, for sensitivity
studies).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

if TYPE_CHECKING:
    from .detect import InvisibleHuman
    from .plan import TimedTrajectory

__all__ = ["InvisibleCostParams", "invisible_cost", "trajectory_cost",
           "trajectory_cost_gradient", "MIN_DISTANCE"]

MIN_DISTANCE = 1e-3  # distance floor callers clamp to before dividing

_MAX_DECELERATION = 2.94  # 0.3 g


@dataclass(frozen=True)
class InvisibleCostParams:
    walking_speed: float = 1.3
    deceleration: float = 2.94
    reaction_time: float = 0.5
    weight: float = 1.0
    decelerate_from_reaction: bool = False

    def __post_init__(self):
        if not self.walking_speed > 0:
            raise ValueError("walking_speed must be positive")
        if not 0 <= self.deceleration <= _MAX_DECELERATION:
            raise ValueError(f"deceleration must lie in [0, {_MAX_DECELERATION}]")
        if self.reaction_time < 0:
            raise ValueError("reaction_time must be non-negative")
        if self.weight < 0:
            raise ValueError("weight must be non-negative")


def invisible_cost(d: float, dt: float, params: InvisibleCostParams) -> float:
    """Cost of being at distance ``d`` from an emergence point at time offset
    ``dt``.  Raises on ``d <= 0``; callers clamp to :data:`MIN_DISTANCE`."""
    if d <= 0:
        raise ValueError(f"distance must be positive (clamp to {MIN_DISTANCE}), got {d}")
    if dt < 0:
        raise ValueError(f"time offset must be non-negative, got {dt}")
    if dt <= params.reaction_time:
        return params.walking_speed / d
    lag = dt - params.reaction_time if params.decelerate_from_reaction else dt
    return max((params.walking_speed - params.deceleration * lag) / d, 0.0)


def _check_times(times: np.ndarray) -> None:
    if times.size == 0:
        raise ValueError("trajectory has no poses")
    if times[0] != 0.0:
        raise ValueError(f"time offsets must start at 0, got {times[0]}")
    if times.size > 1 and not np.all(np.diff(times) > 0):
        raise ValueError("time offsets must be strictly increasing")


def _numerators(times: np.ndarray, params: InvisibleCostParams) -> np.ndarray:
    lag = times - params.reaction_time if params.decelerate_from_reaction else times
    decayed = np.maximum(params.walking_speed - params.deceleration * lag, 0.0)
    return np.where(times <= params.reaction_time, params.walking_speed, decayed)


def trajectory_cost(traj: "TimedTrajectory", humans: list["InvisibleHuman"],
                    params: InvisibleCostParams) -> float:
    """Weighted emergence cost summed over all poses and all detections.

    Detections and the time origin are expected to be refreshed each control
    cycle; offsets are measured from the trajectory start.
    """
    points = np.asarray(traj.points, dtype=float)
    times = np.asarray(traj.times, dtype=float)
    _check_times(times)
    if not humans:
        return 0.0
    positions = np.stack([h.position for h in humans])
    d = np.linalg.norm(points[:, None, :] - positions[None, :, :], axis=2)
    d = np.maximum(d, MIN_DISTANCE)
    num = _numerators(times, params)
    return float(params.weight * np.sum(num[:, None] / d))


def trajectory_cost_gradient(traj: "TimedTrajectory", humans: list["InvisibleHuman"],
                             params: InvisibleCostParams) -> np.ndarray:
    """Analytic gradient of :func:`trajectory_cost` w.r.t. pose coordinates,
    shape (n_poses, 2).  Zero inside the distance floor and the decay clamp."""
    points = np.asarray(traj.points, dtype=float)
    times = np.asarray(traj.times, dtype=float)
    _check_times(times)
    grad = np.zeros_like(points)
    if not humans:
        return grad
    positions = np.stack([h.position for h in humans])
    delta = points[:, None, :] - positions[None, :, :]
    d = np.linalg.norm(delta, axis=2)
    num = _numerators(times, params)
    scale = np.where(d > MIN_DISTANCE, -params.weight * num[:, None] / d**3, 0.0)
    return np.sum(scale[:, :, None] * delta, axis=1)
