"""Scenario simulation, detection labeling, and the random-map benchmark.

Runs are fully deterministic: scenario plus seed reproduces the record (and
its CSV) byte for byte.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, fields, replace
from enum import Enum
from pathlib import Path

import numpy as np

from .detect import DetectionParams, InvisibleHuman, detect
from .geometry import as_point
from .gridmap import OccupancyGrid, circle_overlaps, is_occupied, load_map, raycast
from .maze import generate_maze
from .passage import PassageLimits
from .plan import (
    ControlState,
    CycleDiagnostics,
    Features,
    PlanConfig,
    VisibleHuman,
    World,
    control_cycle,
)
from .scan import Pose2D, ScanConfig

__all__ = [
    "HumanScript",
    "Scenario",
    "RunRecord",
    "run_scenario",
    "LabelKind",
    "DetectionLabel",
    "label_detections",
    "AccuracyReport",
    "accuracy_experiment",
    "random_map_suite",
    "load_scenario",
    "save_scenario",
]

RECORD_HEADER = "t,x,y,vx,vy,mode,n_detections,min_dist_inv,min_dist_vis"


@dataclass
class HumanScript:
    """Piecewise-linear waypoint schedule ``[[x, y, t], ...]`` for one person."""

    waypoints: np.ndarray  # (K, 2)
    times: np.ndarray  # (K,)

    @classmethod
    def from_rows(cls, rows) -> "HumanScript":
        arr = np.asarray(rows, dtype=float)
        if arr.ndim != 2 or arr.shape[1] != 3 or arr.shape[0] < 1:
            raise ValueError("a human script needs rows of [x, y, t]")
        if arr.shape[0] > 1 and not np.all(np.diff(arr[:, 2]) > 0):
            raise ValueError("script times must increase strictly")
        return cls(arr[:, :2].copy(), arr[:, 2].copy())

    def position(self, t: float) -> np.ndarray:
        x = np.interp(t, self.times, self.waypoints[:, 0])
        y = np.interp(t, self.times, self.waypoints[:, 1])
        return np.array([x, y])

    def velocity(self, t: float, dt: float = 0.1) -> np.ndarray:
        return (self.position(t + dt) - self.position(t)) / dt

    def rows(self) -> list[list[float]]:
        return [[float(x), float(y), float(t)]
                for (x, y), t in zip(self.waypoints, self.times)]


@dataclass
class Scenario:
    grid: OccupancyGrid
    start: Pose2D
    goal: np.ndarray
    humans: list[HumanScript] = field(default_factory=list)
    features: Features = field(default_factory=Features)
    seed: int = 0
    duration_s: float = 30.0
    start_jitter: float = 0.0
    plan: PlanConfig = field(default_factory=PlanConfig)
    detect_params: DetectionParams = field(default_factory=DetectionParams)
    scan_config: ScanConfig = field(default_factory=ScanConfig)
    limits: PassageLimits = field(default_factory=PassageLimits)
    name: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.goal = as_point(self.goal)
        if is_occupied(self.grid, self.start.position):
            raise ValueError("scenario start pose is not in free space")
        if is_occupied(self.grid, self.goal):
            raise ValueError("scenario goal is not in free space")
        if self.duration_s <= 0:
            raise ValueError("duration_s must be positive")


@dataclass
class RunRecord:
    name: str
    cycles: list[CycleDiagnostics]
    completed: bool
    planning_failed: bool
    min_human_distance: float

    @property
    def times(self) -> np.ndarray:
        return np.array([c.time for c in self.cycles])

    @property
    def path(self) -> np.ndarray:
        return np.array([c.pose.position for c in self.cycles]).reshape(-1, 2)

    @property
    def speeds(self) -> np.ndarray:
        return np.array([float(np.linalg.norm(c.command)) for c in self.cycles])

    def to_csv(self) -> str:
        lines = [RECORD_HEADER]
        for c in self.cycles:
            x, y = (float(v) for v in c.pose.position)
            vx, vy = (float(v) for v in c.command)
            lines.append(
                f"{float(c.time)!r},{x!r},{y!r},{vx!r},{vy!r},{c.mode},"
                f"{len(c.detections)},{float(c.min_dist_inv)!r},{float(c.min_dist_vis)!r}"
            )
        return "\n".join(lines) + "\n"

    def save_csv(self, path) -> None:
        Path(path).write_text(self.to_csv(), encoding="utf-8")


def _visible(grid, robot_xy, human_xy, max_range: float) -> bool:
    rel = human_xy - robot_xy
    dist = float(np.linalg.norm(rel))
    if dist > max_range:
        return False
    if dist < 1e-9:
        return True
    bearing = math.atan2(rel[1], rel[0])
    return raycast(grid, robot_xy, bearing, max_range) > dist - 1e-9


def run_scenario(scenario: Scenario) -> RunRecord:
    """Step the world at the control rate until the goal or the time limit."""
    rng = np.random.default_rng(scenario.seed)
    start = scenario.start
    if scenario.start_jitter > 0:
        for _ in range(100):
            jitter = rng.uniform(-scenario.start_jitter, scenario.start_jitter, size=2)
            candidate = Pose2D(start.position + jitter, start.heading)
            if not is_occupied(scenario.grid, candidate.position):
                start = candidate
                break

    cfg = scenario.plan
    dt = cfg.cycle_dt
    world = World(
        grid=scenario.grid,
        goal=scenario.goal,
        scan_config=scenario.scan_config,
        detect_params=scenario.detect_params,
        limits=scenario.limits,
        features=scenario.features,
    )
    state = ControlState(pose=start)
    cycles: list[CycleDiagnostics] = []
    min_human = math.inf
    completed = False
    planning_failed = False

    n_steps = int(round(scenario.duration_s / dt))
    for step in range(n_steps + 1):
        t = step * dt
        state.time = t
        positions = [h.position(t) for h in scenario.humans]
        world.visible_humans = [
            VisibleHuman(p, h.velocity(t, dt))
            for h, p in zip(scenario.humans, positions)
            if _visible(scenario.grid, state.pose.position, p, scenario.scan_config.max_range)
        ]
        cmd, diag = control_cycle(state, world, cfg)
        cycles.append(diag)
        for p in positions:
            min_human = min(min_human, float(np.linalg.norm(p - state.pose.position)))
        if diag.goal_reached:
            completed = True
            break
        if diag.planning_failed:
            planning_failed = True
            break
        state.pose = Pose2D(state.pose.position + cmd * dt, state.pose.heading)
    return RunRecord(scenario.name, cycles, completed, planning_failed, min_human)


# -- detection labeling ------------------------------------------------------


class LabelKind(str, Enum):
    TRUE_POSITIVE = "true_positive"
    FALSE_POSITIVE = "false_positive"
    OVERLAP = "overlap"


@dataclass(frozen=True)
class DetectionLabel:
    kind: LabelKind
    detection: InvisibleHuman


def label_detections(
    grid: OccupancyGrid, detections: list[InvisibleHuman], h_rad: float = 0.3
) -> list[DetectionLabel]:
    """Grid-geometric labels: center inside a wall is a false positive, a free
    center whose body disc still clips a wall is an overlap, anything else is
    a true positive.  Every detection gets exactly one label."""
    labels = []
    for det in detections:
        if is_occupied(grid, det.position):
            kind = LabelKind.FALSE_POSITIVE
        elif circle_overlaps(grid, det.position, h_rad):
            kind = LabelKind.OVERLAP
        else:
            kind = LabelKind.TRUE_POSITIVE
        labels.append(DetectionLabel(kind, det))
    return labels


# -- random-map benchmark ----------------------------------------------------


def random_map_suite(
    n_maps: int,
    seed: int,
    width: int = 64,
    height: int = 64,
    resolution: float = 0.1,
):
    """Yield (maze_seed, corridor_width, grid, pose) deterministically."""
    if n_maps < 1:
        raise ValueError(f"n_maps must be at least 1, got {n_maps}")
    rng = np.random.default_rng(seed)
    for _ in range(n_maps):
        maze_seed = int(rng.integers(2**31))
        corridor = float(rng.uniform(1.0, 2.0))
        grid = generate_maze(maze_seed, width, height, corridor, resolution)
        free = grid.free_cell_centers()
        pos = free[int(rng.integers(len(free)))]
        heading = float(rng.uniform(-math.pi, math.pi))
        yield maze_seed, corridor, grid, Pose2D(pos, heading)


@dataclass
class AccuracyReport:
    rows: list[dict]
    tp: int
    fp: int
    overlap: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.overlap

    @property
    def accuracy(self) -> float:
        return self.tp / self.total if self.total else 1.0

    @property
    def accuracy_with_overlap(self) -> float:
        return (self.tp + self.overlap) / self.total if self.total else 1.0

    def to_csv(self) -> str:
        lines = [
            "# emergence-detection benchmark, automated grid-geometric labels",
            "# (collision checks inside the detector make false positives and",
            "# overlaps structurally impossible; labels verify that, they are",
            "# not comparable with manually judged detection accuracy)",
            "map_index,maze_seed,corridor_width,detections,true_positive,false_positive,overlap",
        ]
        for r in self.rows:
            lines.append(
                f"{r['map_index']},{r['maze_seed']},{r['corridor_width']!r},"
                f"{r['detections']},{r['tp']},{r['fp']},{r['overlap']}"
            )
        lines.append(
            f"aggregate,,,{self.total},{self.tp},{self.fp},{self.overlap}"
        )
        lines.append(f"# accuracy {self.accuracy!r}")
        lines.append(f"# accuracy_with_overlap {self.accuracy_with_overlap!r}")
        return "\n".join(lines) + "\n"


def accuracy_experiment(
    n_maps: int,
    seed: int,
    params: DetectionParams | None = None,
    width: int = 64,
    height: int = 64,
) -> AccuracyReport:
    """Detect on ``n_maps`` random mazes from random poses and label every hit."""
    params = params or DetectionParams()
    rows = []
    tp = fp = ov = 0
    for i, (maze_seed, corridor, grid, pose) in enumerate(
        random_map_suite(n_maps, seed, width, height)
    ):
        _, humans = detect(grid, pose, params)
        labels = label_detections(grid, humans, params.h_rad)
        counts = {k: 0 for k in LabelKind}
        for lab in labels:
            counts[lab.kind] += 1
        rows.append({
            "map_index": i,
            "maze_seed": maze_seed,
            "corridor_width": corridor,
            "detections": len(labels),
            "tp": counts[LabelKind.TRUE_POSITIVE],
            "fp": counts[LabelKind.FALSE_POSITIVE],
            "overlap": counts[LabelKind.OVERLAP],
        })
        tp += counts[LabelKind.TRUE_POSITIVE]
        fp += counts[LabelKind.FALSE_POSITIVE]
        ov += counts[LabelKind.OVERLAP]
    return AccuracyReport(rows, tp, fp, ov)


# -- scenario files ----------------------------------------------------------


def save_scenario(scenario: Scenario, path, map_path) -> None:
    """Write a scenario JSON next to its (already saved) map file."""
    path = Path(path)
    doc = {
        "name": scenario.name,
        "map": str(map_path),
        "start": [float(scenario.start.position[0]), float(scenario.start.position[1]),
                  float(scenario.start.heading)],
        "goal": [float(scenario.goal[0]), float(scenario.goal[1])],
        "humans": [{"script": h.rows()} for h in scenario.humans],
        "features": {
            "invisible_cost": scenario.features.invisible_cost,
            "passage_mode": scenario.features.passage_mode,
            "visible_cost": scenario.features.visible_cost,
        },
        "seed": scenario.seed,
        "duration_s": scenario.duration_s,
        "start_jitter": scenario.start_jitter,
        "plan": _dataclass_overrides(scenario.plan, PlanConfig()),
        "detect": _dataclass_overrides(scenario.detect_params, DetectionParams()),
        "meta": scenario.meta,
    }
    path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def _dataclass_overrides(value, default) -> dict:
    out = {}
    for f in fields(default):
        v = getattr(value, f.name)
        if isinstance(v, (int, float, bool, str)) and v != getattr(default, f.name):
            out[f.name] = v
    return out


def load_scenario(path) -> Scenario:
    """Load a scenario JSON; the map path is resolved relative to the file."""
    path = Path(path)
    doc = json.loads(path.read_text(encoding="utf-8"))
    try:
        map_ref = Path(doc["map"])
        if not map_ref.is_absolute():
            map_ref = path.parent / map_ref
        grid = load_map(map_ref)
        start = doc["start"]
        feats = doc.get("features", {})
        return Scenario(
            grid=grid,
            start=Pose2D(np.array(start[:2], dtype=float),
                         float(start[2]) if len(start) > 2 else 0.0),
            goal=np.asarray(doc["goal"], dtype=float),
            humans=[HumanScript.from_rows(h["script"]) for h in doc.get("humans", [])],
            features=Features(
                invisible_cost=bool(feats.get("invisible_cost", True)),
                passage_mode=bool(feats.get("passage_mode", True)),
                visible_cost=bool(feats.get("visible_cost", True)),
            ),
            seed=int(doc.get("seed", 0)),
            duration_s=float(doc.get("duration_s", 30.0)),
            start_jitter=float(doc.get("start_jitter", 0.0)),
            plan=replace(PlanConfig(), **doc.get("plan", {})),
            detect_params=replace(DetectionParams(), **doc.get("detect", {})),
            name=doc.get("name", path.stem),
            meta=doc.get("meta", {}),
        )
    except (KeyError, TypeError, IndexError) as e:
        raise ValueError(f"malformed scenario file {path}: {e}") from None
