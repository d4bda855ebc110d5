"""Occlusion-aware 2D navigation toolkit.

Detects where currently-hidden people could step out from behind occlusions
on an occupancy grid, classifies doorway/pillar/wall-passage situations, and
adapts a local planner's path and speed with an anticipatory emergence cost.
"""

from .cost import (
    InvisibleCostParams,
    invisible_cost,
    trajectory_cost,
    trajectory_cost_gradient,
)
from .detect import (
    DetectionParams,
    InvisibleHuman,
    VertexPair,
    detect,
    find_gap_pairs,
    is_outside_contour,
    locate_invisible_humans,
    offset_left,
    offset_right,
    select_corners,
)
from .gridmap import (
    OccupancyGrid,
    circle_overlaps,
    is_occupied,
    load_map,
    parse_ascii_map,
    raycast,
    raycast_batch,
    save_ascii_map,
    save_raster_map,
)
from .harness import (
    AccuracyReport,
    DetectionLabel,
    HumanScript,
    LabelKind,
    RunRecord,
    Scenario,
    accuracy_experiment,
    label_detections,
    load_scenario,
    random_map_suite,
    run_scenario,
    save_scenario,
)
from .maze import generate_maze
from .passage import (
    PASS_THROUGH_VMAX,
    PassageClass,
    PassageKind,
    PassageLimits,
    PlanDirective,
    classify_passage,
    passage_directive,
)
from .plan import (
    ControlState,
    CycleDiagnostics,
    Features,
    PlanConfig,
    PlanningError,
    TimedTrajectory,
    VisibleHuman,
    World,
    control_cycle,
    optimize_cycle,
)
from .render import render_detections, render_record, render_svg
from .scan import (
    LaserScan,
    Pose2D,
    ScanConfig,
    range_at_angle,
    ranges_at_angles,
    scan_to_csv,
    simulate_scan,
)

__version__ = "0.1.0"
