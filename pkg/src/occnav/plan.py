"""Local trajectory optimizer and speed governor.

A fixed-horizon set of timed waypoints is descended against a weighted sum of
goal distance, obstacle clearance, smoothness, the hidden-human emergence
cost, and clearance to visible people.  Each accepted descent step is
projected onto the speed cap, so per-segment speed limits hold exactly.  One
control cycle runs detection, passage classification, and one optimization,
then commands the first trajectory segment's velocity.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .cost import InvisibleCostParams, trajectory_cost, trajectory_cost_gradient
from .detect import DetectionParams, InvisibleHuman, detect
from .geometry import as_point
from .gridmap import OccupancyGrid
from .passage import (
    PassageClass,
    PassageKind,
    PassageLimits,
    PlanDirective,
    classify_passage,
    passage_directive,
)
from .scan import Pose2D, ScanConfig

__all__ = [
    "TimedTrajectory",
    "VisibleHuman",
    "PlanConfig",
    "PlanningError",
    "Features",
    "World",
    "ControlState",
    "CycleDiagnostics",
    "optimize_cycle",
    "control_cycle",
]


class PlanningError(RuntimeError):
    """No collision-free seed trajectory could be constructed."""


@dataclass
class TimedTrajectory:
    """Waypoints with strictly increasing time offsets starting at 0."""

    points: np.ndarray  # (N, 2)
    times: np.ndarray  # (N,)

    def __post_init__(self):
        self.points = np.asarray(self.points, dtype=float)
        self.times = np.asarray(self.times, dtype=float)
        if self.points.ndim != 2 or self.points.shape[1] != 2:
            raise ValueError(f"points must be (N, 2), got {self.points.shape}")
        if self.times.shape != (self.points.shape[0],):
            raise ValueError("times must match points")
        if self.times[0] != 0.0 or (len(self.times) > 1 and not np.all(np.diff(self.times) > 0)):
            raise ValueError("time offsets must increase strictly from 0")

    def speeds(self) -> np.ndarray:
        seg = np.linalg.norm(np.diff(self.points, axis=0), axis=1)
        return seg / np.diff(self.times)


@dataclass(frozen=True)
class VisibleHuman:
    position: np.ndarray
    velocity: np.ndarray = field(default_factory=lambda: np.zeros(2))

    def __post_init__(self):
        object.__setattr__(self, "position", as_point(self.position))
        object.__setattr__(self, "velocity", as_point(self.velocity))


@dataclass(frozen=True)
class PlanConfig:
    vmax: float = 1.0
    vmax_passthrough: float = 0.3
    waypoint_count: int = 30
    horizon: float = 5.0
    cycle_dt: float = 0.1
    goal_weight: float = 1.0
    progress_weight: float = 0.02
    obstacle_weight: float = 0.05
    smooth_weight: float = 1.0
    invisible_weight: float = 1.0
    visible_weight: float = 0.3
    obstacle_clearance: float = 0.8
    visible_clearance: float = 0.6
    robot_radius: float = 0.5
    iterations: int = 40
    step_size: float = 0.02
    goal_tolerance: float = 0.1
    invisible_params: InvisibleCostParams = field(default_factory=InvisibleCostParams)

    def __post_init__(self):
        if not 0 < self.vmax_passthrough <= self.vmax:
            raise ValueError("need 0 < vmax_passthrough <= vmax")
        for name in ("waypoint_count", "iterations"):
            if getattr(self, name) < 2:
                raise ValueError(f"{name} must be at least 2")
        for name in ("horizon", "cycle_dt", "step_size", "goal_tolerance",
                     "obstacle_clearance", "visible_clearance", "robot_radius"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


_DIST_FLOOR = 0.05  # clearance divisor floor, avoids 1/0 inside walls


# -- distance-field sampling -------------------------------------------------


def _bilinear(grid: OccupancyGrid, pts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Distance field value and gradient at world points, shape (N,), (N, 2)."""
    d = grid.distance_field()
    res = grid.resolution
    u = (pts[:, 0] - grid.origin[0]) / res - 0.5
    v = (pts[:, 1] - grid.origin[1]) / res - 0.5
    u = np.clip(u, 0.0, grid.width - 1.000001)
    v = np.clip(v, 0.0, grid.height - 1.000001)
    i0 = np.floor(u).astype(np.int64)
    j0 = np.floor(v).astype(np.int64)
    fu = u - i0
    fv = v - j0
    d00 = d[j0, i0]
    d01 = d[j0, i0 + 1]
    d10 = d[j0 + 1, i0]
    d11 = d[j0 + 1, i0 + 1]
    val = (d00 * (1 - fu) * (1 - fv) + d01 * fu * (1 - fv)
           + d10 * (1 - fu) * fv + d11 * fu * fv)
    ddx = ((d01 - d00) * (1 - fv) + (d11 - d10) * fv) / res
    ddy = ((d10 - d00) * (1 - fu) + (d11 - d01) * fu) / res
    return val, np.stack([ddx, ddy], axis=1)


def _hinge_inverse(dist: np.ndarray, clearance: float) -> tuple[np.ndarray, np.ndarray]:
    """Inverse-clearance penalty ``1/d - 1/clearance`` inside the clearance
    radius (zero outside) and its derivative w.r.t. the distance."""
    d = np.maximum(dist, _DIST_FLOOR)
    inside = dist < clearance
    pen = np.where(inside, 1.0 / d - 1.0 / clearance, 0.0)
    dpen = np.where(inside & (dist > _DIST_FLOOR), -1.0 / d**2, 0.0)
    return pen, dpen


# -- cost assembly -----------------------------------------------------------


class _CycleCost:
    """Weighted objective over the free waypoints of one cycle."""

    def __init__(self, grid, goal, humans_inv, humans_vis, config, times):
        self.grid = grid
        self.goal = goal
        self.humans_inv = humans_inv
        self.vis = np.stack([h.position for h in humans_vis]) if humans_vis else None
        self.config = config
        self.times = times

    def value(self, pts: np.ndarray) -> float:
        cfg = self.config
        total = cfg.goal_weight * float(np.sum((pts[-1] - self.goal) ** 2))
        # mild forward pressure on every waypoint, stands in for the
        # time-optimality of a real elastic-band planner
        total += cfg.progress_weight * float(np.sum((pts[1:] - self.goal) ** 2))
        if len(pts) > 2:
            dd = pts[2:] - 2 * pts[1:-1] + pts[:-2]
            total += cfg.smooth_weight * float(np.sum(dd**2))
        clear, _ = _bilinear(self.grid, pts[1:])
        pen, _ = _hinge_inverse(clear - cfg.robot_radius, cfg.obstacle_clearance)
        total += cfg.obstacle_weight * float(np.sum(pen**2))
        if self.vis is not None:
            dv = np.linalg.norm(pts[1:, None, :] - self.vis[None, :, :], axis=2)
            pen, _ = _hinge_inverse(dv, cfg.visible_clearance)
            total += cfg.visible_weight * float(np.sum(pen**2))
        if self.humans_inv:
            traj = TimedTrajectory(pts, self.times)
            total += cfg.invisible_weight * trajectory_cost(
                traj, self.humans_inv, cfg.invisible_params
            )
        return total

    def gradient(self, pts: np.ndarray) -> np.ndarray:
        cfg = self.config
        g = np.zeros_like(pts)
        g[-1] += 2 * cfg.goal_weight * (pts[-1] - self.goal)
        g[1:] += 2 * cfg.progress_weight * (pts[1:] - self.goal)
        if len(pts) > 2:
            dd = pts[2:] - 2 * pts[1:-1] + pts[:-2]
            g[2:] += 2 * cfg.smooth_weight * dd
            g[1:-1] += -4 * cfg.smooth_weight * dd
            g[:-2] += 2 * cfg.smooth_weight * dd
        clear, dgrad = _bilinear(self.grid, pts[1:])
        pen, dpen = _hinge_inverse(clear - cfg.robot_radius, cfg.obstacle_clearance)
        g[1:] += cfg.obstacle_weight * (2 * pen * dpen)[:, None] * dgrad
        if self.vis is not None:
            delta = pts[1:, None, :] - self.vis[None, :, :]
            dv = np.linalg.norm(delta, axis=2)
            pen, dpen = _hinge_inverse(dv, cfg.visible_clearance)
            unit = delta / np.maximum(dv, 1e-12)[:, :, None]
            g[1:] += cfg.visible_weight * np.sum(
                (2 * pen * dpen)[:, :, None] * unit, axis=1
            )
        if self.humans_inv:
            traj = TimedTrajectory(pts, self.times)
            g += cfg.invisible_weight * trajectory_cost_gradient(
                traj, self.humans_inv, cfg.invisible_params
            )
        g[0] = 0.0  # first waypoint pinned to the current pose
        return g


def _project_speed(pts: np.ndarray, vcap: float, dt: float) -> np.ndarray:
    """Clamp each segment to the speed cap, walking from the pinned start."""
    out = pts.copy()
    max_seg = vcap * dt
    for i in range(1, len(out)):
        seg = out[i] - out[i - 1]
        norm = math.hypot(seg[0], seg[1])
        if norm > max_seg:
            out[i] = out[i - 1] + seg * (max_seg / norm)
    return out


# -- seeding -----------------------------------------------------------------


def _positions_along(path_pts: np.ndarray, arc: np.ndarray) -> np.ndarray:
    """Sample a polyline at the given arc lengths (clamped to its end)."""
    seg = np.linalg.norm(np.diff(path_pts, axis=0), axis=1)
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    arc = np.clip(arc, 0.0, cum[-1])
    xs = np.interp(arc, cum, path_pts[:, 0])
    ys = np.interp(arc, cum, path_pts[:, 1])
    return np.stack([xs, ys], axis=1)


def _straight_seed(start, goal, times, vcap) -> np.ndarray:
    return _positions_along(np.stack([start, goal]), vcap * times)


def _seed_is_clear(grid, pts, robot_radius) -> bool:
    mids = 0.5 * (pts[1:] + pts[:-1])
    probe = np.concatenate([pts, mids])
    clear, _ = _bilinear(grid, probe)
    return bool(np.all(clear >= robot_radius))


def _astar_path(grid: OccupancyGrid, start, goal, robot_radius) -> np.ndarray | None:
    """8-connected A* over cells with enough wall clearance."""
    d = grid.distance_field()
    passable = d >= robot_radius
    s = grid.world_to_cell(start)
    g = grid.world_to_cell(goal)
    if not (grid.in_bounds(*s) and grid.in_bounds(*g)):
        return None
    passable = passable.copy()
    passable[s[1], s[0]] = True  # never strand the robot in its own cell
    passable[g[1], g[0]] = passable[g[1], g[0]] or not grid.occupied[g[1], g[0]]
    if not passable[g[1], g[0]]:
        return None
    moves = [(1, 0, 1.0), (-1, 0, 1.0), (0, 1, 1.0), (0, -1, 1.0),
             (1, 1, math.sqrt(2)), (1, -1, math.sqrt(2)),
             (-1, 1, math.sqrt(2)), (-1, -1, math.sqrt(2))]
    best = {s: 0.0}
    came: dict[tuple[int, int], tuple[int, int]] = {}
    frontier = [(math.dist(s, g), 0.0, s)]
    while frontier:
        _, cost, cur = heapq.heappop(frontier)
        if cur == g:
            cells = [cur]
            while cur in came:
                cur = came[cur]
                cells.append(cur)
            cells.reverse()
            pts = np.array([grid.cell_center(ix, iy) for ix, iy in cells])
            pts[0] = start
            pts[-1] = goal
            return pts
        if cost > best.get(cur, math.inf):
            continue
        for mx, my, mc in moves:
            nxt = (cur[0] + mx, cur[1] + my)
            if not grid.in_bounds(*nxt) or not passable[nxt[1], nxt[0]]:
                continue
            nc = cost + mc
            if nc < best.get(nxt, math.inf):
                best[nxt] = nc
                came[nxt] = cur
                heapq.heappush(frontier, (nc + math.dist(nxt, g), nc, nxt))
    return None


def _warm_seed(prev: TimedTrajectory, pose_xy, times, cycle_dt) -> np.ndarray:
    """Shift the previous trajectory by one cycle and re-anchor at the pose."""
    shifted_t = np.clip(times + cycle_dt, 0.0, prev.times[-1])
    xs = np.interp(shifted_t, prev.times, prev.points[:, 0])
    ys = np.interp(shifted_t, prev.times, prev.points[:, 1])
    pts = np.stack([xs, ys], axis=1)
    pts[0] = pose_xy
    return pts


# -- the optimizer -----------------------------------------------------------


def optimize_cycle(
    grid: OccupancyGrid,
    pose: Pose2D,
    goal,
    humans_inv: list[InvisibleHuman],
    humans_vis: list[VisibleHuman],
    directive: PlanDirective,
    config: PlanConfig,
    prev_traj: TimedTrajectory | None = None,
) -> TimedTrajectory:
    """One descent run over the horizon; monotone in cost versus its seed.

    The emergence cost is skipped while the directive disables it, and the
    effective speed cap is ``min(vmax, directive.vmax_cap)``.
    """
    goal = as_point(goal)
    start = pose.position
    n = config.waypoint_count
    times = np.arange(n) * (config.horizon / (n - 1))
    vcap = config.vmax if directive.vmax_cap is None else min(config.vmax, directive.vmax_cap)

    inv = [] if directive.disable_invisible_cost else humans_inv
    objective = _CycleCost(grid, goal, inv, humans_vis, config, times)

    # candidate seeds: shifted previous plan, plus a fresh one so stale slow
    # plans never linger; descent starts from the cheaper candidate
    seeds = []
    if prev_traj is not None:
        seeds.append(_warm_seed(prev_traj, start, times, config.cycle_dt))
    fresh = _straight_seed(start, goal, times, vcap)
    if _seed_is_clear(grid, fresh, config.robot_radius):
        seeds.append(fresh)
    elif not seeds:
        path = _astar_path(grid, start, goal, config.robot_radius)
        if path is None:
            raise PlanningError(
                f"no collision-free seed from {np.round(start, 2)} "
                f"to {np.round(goal, 2)}"
            )
        seeds.append(_positions_along(path, vcap * times))
    seeds = [_project_speed(s, vcap, float(times[1])) for s in seeds]

    costs = [objective.value(s) for s in seeds]
    best = min(costs)
    pts = seeds[costs.index(best)]
    eta = config.step_size
    for _ in range(config.iterations):
        g = objective.gradient(pts)
        cand = _project_speed(pts - eta * g, vcap, float(times[1]))
        c = objective.value(cand)
        if c <= best:
            pts, best = cand, c
            eta *= 1.25
        else:
            eta *= 0.5
    return TimedTrajectory(pts, times)


# -- control cycle -----------------------------------------------------------


@dataclass(frozen=True)
class Features:
    invisible_cost: bool = True
    passage_mode: bool = True
    visible_cost: bool = True


@dataclass
class World:
    """Everything the control cycle can see this instant."""

    grid: OccupancyGrid
    goal: np.ndarray
    visible_humans: list[VisibleHuman] = field(default_factory=list)
    scan_config: ScanConfig = field(default_factory=ScanConfig)
    detect_params: DetectionParams = field(default_factory=DetectionParams)
    limits: PassageLimits = field(default_factory=PassageLimits)
    features: Features = field(default_factory=Features)

    def __post_init__(self):
        self.goal = as_point(self.goal)


@dataclass(frozen=True)
class _Gate:
    a: np.ndarray
    b: np.ndarray
    side: float
    directive: PlanDirective


def _side_of(gate_a, gate_b, p) -> float:
    e = gate_b - gate_a
    r = p - gate_a
    return float(np.sign(e[0] * r[1] - e[1] * r[0]))


@dataclass
class ControlState:
    pose: Pose2D
    time: float = 0.0
    prev_traj: TimedTrajectory | None = None
    latch: _Gate | None = None


@dataclass
class CycleDiagnostics:
    time: float
    pose: Pose2D
    command: np.ndarray
    mode: str
    detections: list[InvisibleHuman]
    passage: PassageClass
    cost: float
    min_dist_inv: float
    min_dist_vis: float
    goal_reached: bool = False
    planning_failed: bool = False


_NORMAL = PlanDirective(mode="normal", disable_invisible_cost=False, vmax_cap=None)


def control_cycle(
    state: ControlState, world: World, config: PlanConfig
) -> tuple[np.ndarray, CycleDiagnostics]:
    """Detect, classify, optimize, command; detections and the time origin
    are fresh every call.  Mutates ``state`` (trajectory warm start and the
    pass-through latch)."""
    pose = state.pose
    feats = world.features

    scan = None
    humans: list[InvisibleHuman] = []
    if feats.invisible_cost or feats.passage_mode:
        scan, humans = detect(world.grid, pose, world.detect_params, world.scan_config)

    passage = PassageClass(PassageKind.NO_PASSAGE)
    if feats.passage_mode and scan is not None:
        passage = classify_passage(humans, scan, world.limits)

    if state.latch is not None:
        if _side_of(state.latch.a, state.latch.b, pose.position) != state.latch.side:
            state.latch = None  # crossed the gate; resume normal planning
    if state.latch is None and feats.passage_mode and passage.gate is not None:
        # only latch onto a passage still ahead of the robot
        heading = np.array([math.cos(pose.heading), math.sin(pose.heading)])
        ahead = float(np.dot(passage.anchor - pose.position, heading)) > 0.0
        side = _side_of(passage.gate[0], passage.gate[1], pose.position)
        if ahead and side != 0.0:
            state.latch = _Gate(passage.gate[0], passage.gate[1], side,
                                passage_directive(passage))
    directive = state.latch.directive if state.latch is not None else _NORMAL

    humans_for_cost = humans if feats.invisible_cost else []
    humans_vis = world.visible_humans if feats.visible_cost else []

    min_inv = min((h.distance_to_robot for h in humans), default=math.inf)
    min_vis = min(
        (float(np.linalg.norm(h.position - pose.position)) for h in world.visible_humans),
        default=math.inf,
    )

    if float(np.linalg.norm(world.goal - pose.position)) < config.goal_tolerance:
        cmd = np.zeros(2)
        diag = CycleDiagnostics(state.time, pose, cmd, directive.mode, humans, passage,
                                0.0, min_inv, min_vis, goal_reached=True)
        return cmd, diag

    try:
        traj = optimize_cycle(world.grid, pose, world.goal, humans_for_cost,
                              humans_vis, directive, config, state.prev_traj)
    except PlanningError:
        state.prev_traj = None
        cmd = np.zeros(2)
        diag = CycleDiagnostics(state.time, pose, cmd, directive.mode, humans, passage,
                                math.inf, min_inv, min_vis, planning_failed=True)
        return cmd, diag

    state.prev_traj = traj
    cmd = (traj.points[1] - traj.points[0]) / (traj.times[1] - traj.times[0])
    inv_for_diag = [] if directive.disable_invisible_cost else humans_for_cost
    total = trajectory_cost(traj, inv_for_diag, config.invisible_params) if inv_for_diag else 0.0
    diag = CycleDiagnostics(state.time, pose, cmd, directive.mode, humans, passage,
                            total, min_inv, min_vis)
    return cmd, diag
