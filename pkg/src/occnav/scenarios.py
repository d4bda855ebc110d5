"""Hand-built maps and canonical scenarios used by the demos and the tests.

All maps use 0.1 m cells.  The doorway scene is a corridor ending that opens
into a large room; the emergence scene is a corridor with an occluded side
branch a scripted person steps out of; the corridor scene adds wall openings
plus an oncoming visible person.
"""

from __future__ import annotations

import numpy as np

from .cost import InvisibleCostParams
from .gridmap import OccupancyGrid
from .harness import HumanScript, Scenario
from .plan import Features, PlanConfig
from .scan import Pose2D

__all__ = [
    "empty_room",
    "doorway_grid",
    "doorway_probe",
    "wall_passage_grid",
    "wall_passage_probe",
    "pillar_grid",
    "pillar_probe",
    "emergence_grid",
    "corridor_grid",
    "doorway_scenario",
    "emergence_scenario",
    "corridor_scenario",
    "canonical_scenario",
]

RES = 0.1


def _cells(lo: float, hi: float) -> slice:
    """Cell index span covering the world interval [lo, hi)."""
    return slice(round(lo / RES), round(hi / RES))


def empty_room(width_m: float, height_m: float) -> OccupancyGrid:
    """Free rectangle with a one-cell border wall."""
    occ = np.zeros((round(height_m / RES), round(width_m / RES)), dtype=bool)
    occ[0, :] = occ[-1, :] = True
    occ[:, 0] = occ[:, -1] = True
    return OccupancyGrid(occ, RES, (0.0, 0.0))


def doorway_grid() -> OccupancyGrid:
    """A 1.6 m corridor of thin partition walls ending at x=6 m in a hall."""
    occ = np.zeros((80, 120), dtype=bool)  # 12 x 8 m
    occ[0, :] = occ[-1, :] = True
    occ[:, 0] = occ[:, -1] = True
    occ[_cells(3.1, 3.2), _cells(0.0, 6.0)] = True  # lower corridor wall
    occ[_cells(4.8, 4.9), _cells(0.0, 6.0)] = True  # upper corridor wall
    return OccupancyGrid(occ, RES, (0.0, 0.0))


def doorway_probe() -> Pose2D:
    """Pose inside the corridor from which the ending classifies as a doorway."""
    return Pose2D(np.array([4.8, 4.0]), 0.0)


def wall_passage_grid() -> OccupancyGrid:
    """Corridor whose upper wall ends at x=5 m while the lower wall runs on."""
    occ = np.ones((80, 120), dtype=bool)  # 12 x 8 m
    occ[_cells(1.0, 3.0), _cells(0.1, 11.9)] = False  # corridor interior
    occ[_cells(3.0, 7.9), _cells(0.1, 11.9)] = False  # open area above
    occ[_cells(3.0, 3.1), _cells(0.0, 5.0)] = True  # upper wall, ends at x=5
    return OccupancyGrid(occ, RES, (0.0, 0.0))


def wall_passage_probe() -> Pose2D:
    return Pose2D(np.array([4.0, 2.0]), 0.0)


def pillar_grid() -> OccupancyGrid:
    """A free-standing 1.2 x 1.2 m pillar in an open room."""
    occ = np.zeros((120, 120), dtype=bool)  # 12 x 12 m
    occ[0, :] = occ[-1, :] = True
    occ[:, 0] = occ[:, -1] = True
    occ[_cells(5.4, 6.6), _cells(5.3, 6.5)] = True
    return OccupancyGrid(occ, RES, (0.0, 0.0))


def pillar_probe() -> Pose2D:
    return Pose2D(np.array([4.7, 6.0]), 0.0)


def emergence_grid() -> OccupancyGrid:
    """Main corridor with an occluded side branch joining from above at x=6."""
    occ = np.ones((70, 110), dtype=bool)  # 11 x 7 m
    occ[_cells(0.4, 3.0), _cells(0.3, 10.7)] = False  # main corridor
    occ[_cells(3.0, 6.5), _cells(6.0, 7.4)] = False  # side branch
    return OccupancyGrid(occ, RES, (0.0, 0.0))


def corridor_grid() -> OccupancyGrid:
    """Long corridor with three openings (shallow alcoves) in the upper wall."""
    occ = np.ones((60, 140), dtype=bool)  # 14 x 6 m
    occ[_cells(1.0, 3.0), _cells(0.1, 13.9)] = False
    for x0 in (3.4, 7.0, 10.4):
        occ[_cells(3.0, 4.6), _cells(x0, x0 + 1.4)] = False
    return OccupancyGrid(occ, RES, (0.0, 0.0))


# -- scenario builders -------------------------------------------------------


def _plan_config(invisible_weight: float) -> PlanConfig:
    return PlanConfig(
        vmax=1.0,
        invisible_weight=invisible_weight,
        invisible_params=InvisibleCostParams(),
    )


def doorway_scenario(
    invisible_cost: bool = True,
    passage_mode: bool = True,
    seed: int = 0,
    invisible_weight: float = 5.0,
) -> Scenario:
    """Drive down the corridor and out through its ending into the far room."""
    return Scenario(
        grid=doorway_grid(),
        start=Pose2D(np.array([2.6, 4.0]), 0.0),
        goal=np.array([9.5, 4.0]),
        features=Features(invisible_cost=invisible_cost, passage_mode=passage_mode),
        seed=seed,
        duration_s=40.0,
        start_jitter=0.15,
        plan=_plan_config(invisible_weight),
        name="doorway",
        meta={"door_x": 6.0, "door_y": 4.0},
    )


def emergence_scenario(
    invisible_cost: bool = True,
    visible_cost: bool = True,
    seed: int = 0,
    invisible_weight: float = 20.0,
) -> Scenario:
    """A person steps out of the side branch as the robot passes it.

    Passage handling stays off here so the runs compare the emergence cost
    alone; ``visible_cost=False`` gives the shortest-path baseline.
    """
    human = HumanScript.from_rows(
        [[6.7, 5.6, 0.0], [6.7, 5.6, 1.9], [6.7, 1.9, 5.0], [2.0, 1.9, 9.0]]
    )
    return Scenario(
        grid=emergence_grid(),
        start=Pose2D(np.array([1.2, 2.2]), 0.0),
        goal=np.array([9.3, 1.7]),
        humans=[human],
        features=Features(
            invisible_cost=invisible_cost, passage_mode=False, visible_cost=visible_cost
        ),
        seed=seed,
        duration_s=30.0,
        start_jitter=0.12,
        plan=_plan_config(invisible_weight),
        name="emergence",
        meta={"corner_x": 6.0, "corner_y": 3.0},
    )


def corridor_scenario(
    invisible_cost: bool = True,
    seed: int = 0,
    invisible_weight: float = 6.0,
) -> Scenario:
    """Pass an oncoming person in a corridor lined with wall openings."""
    human = HumanScript.from_rows([[13.2, 2.4, 0.0], [0.6, 2.4, 11.5]])
    return Scenario(
        grid=corridor_grid(),
        start=Pose2D(np.array([0.8, 2.0]), 0.0),
        goal=np.array([12.6, 2.0]),
        humans=[human],
        features=Features(invisible_cost=invisible_cost, passage_mode=False),
        seed=seed,
        duration_s=40.0,
        start_jitter=0.12,
        plan=_plan_config(invisible_weight),
        name="corridor",
    )


def canonical_scenario(name: str, **kwargs) -> Scenario:
    builders = {
        "doorway": doorway_scenario,
        "emergence": emergence_scenario,
        "corridor": corridor_scenario,
    }
    if name not in builders:
        raise ValueError(f"unknown scenario {name!r}, expected one of {sorted(builders)}")
    return builders[name](**kwargs)
