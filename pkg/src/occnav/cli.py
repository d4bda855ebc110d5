"""Command line front end.

Exit codes: 0 success, 1 input error, 2 planning failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .detect import DetectionParams, detect
from .gridmap import load_map
from .harness import RECORD_HEADER, accuracy_experiment, load_scenario, run_scenario
from .passage import classify_passage
from .render import render_detections, render_record, render_svg
from .scan import Pose2D, ScanConfig, scan_to_csv, simulate_scan


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits 2; keep 2 for planning only
        self.exit(1, f"{self.prog}: error: {message}\n")


def _pose(text: str) -> Pose2D:
    parts = text.split(",")
    if len(parts) != 3:
        raise ValueError(f"pose must be X,Y,THETA, got {text!r}")
    x, y, theta = (float(p) for p in parts)
    return Pose2D(np.array([x, y]), theta)


def _detect_params(path: str | None) -> DetectionParams:
    if path is None:
        return DetectionParams()
    doc = json.loads(Path(path).read_text(encoding="utf-8"))
    return replace(DetectionParams(), **doc)


def _emit(text: str, out_file: str | None) -> None:
    if out_file:
        Path(out_file).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _detections_json(humans) -> str:
    rows = [
        {
            "x": float(h.position[0]),
            "y": float(h.position[1]),
            "direction": h.direction,
            "corner_x": float(h.source_corner[0]),
            "corner_y": float(h.source_corner[1]),
            "distance": h.distance_to_robot,
        }
        for h in humans
    ]
    return json.dumps(rows, indent=2) + "\n"


def _detections_csv(humans) -> str:
    lines = ["x,y,direction,corner_x,corner_y,distance"]
    for h in humans:
        lines.append(
            f"{float(h.position[0])!r},{float(h.position[1])!r},{h.direction!r},"
            f"{float(h.source_corner[0])!r},{float(h.source_corner[1])!r},"
            f"{h.distance_to_robot!r}"
        )
    return "\n".join(lines) + "\n"


def _cmd_scan(args) -> int:
    grid = load_map(args.map)
    config = ScanConfig(ray_count=args.rays, max_range=args.max_range)
    scan = simulate_scan(grid, _pose(args.pose), config)
    _emit(scan_to_csv(scan), args.out_file)
    return 0


def _cmd_detect(args) -> int:
    grid = load_map(args.map)
    pose = _pose(args.pose)
    params = _detect_params(args.params)
    scan, humans = detect(grid, pose, params)
    if args.out == "json":
        _emit(_detections_json(humans), args.out_file)
    elif args.out == "csv":
        _emit(_detections_csv(humans), args.out_file)
    else:
        _emit(
            render_detections(grid, humans, scan=scan, robot=pose.position,
                              h_rad=params.h_rad),
            args.out_file,
        )
    return 0


def _cmd_classify(args) -> int:
    grid = load_map(args.map)
    pose = _pose(args.pose)
    params = _detect_params(args.params)
    scan, humans = detect(grid, pose, params)
    cls = classify_passage(humans, scan)
    doc = {"kind": cls.kind.value}
    if cls.anchor is not None:
        doc["anchor"] = [float(cls.anchor[0]), float(cls.anchor[1])]
    _emit(json.dumps(doc, indent=2) + "\n", args.out_file)
    return 0


def _cmd_simulate(args) -> int:
    scenario = load_scenario(args.scenario)
    record = run_scenario(scenario)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    record.save_csv(out_dir / "record.csv")
    (out_dir / "run.svg").write_text(
        render_record(scenario.grid, record), encoding="utf-8"
    )
    if record.planning_failed:
        print("planning failure: robot commanded to stop", file=sys.stderr)
        return 2
    return 0


def _cmd_bench(args) -> int:
    report = accuracy_experiment(args.n, args.seed)
    Path(args.out).write_text(report.to_csv(), encoding="utf-8")
    return 0


def _cmd_render(args) -> int:
    text = Path(args.infile).read_text(encoding="utf-8").splitlines()
    if not text or text[0] != RECORD_HEADER:
        raise ValueError(f"{args.infile} is not a run record CSV")
    rows = [line.split(",") for line in text[1:] if line]
    path = np.array([[float(r[1]), float(r[2])] for r in rows]).reshape(-1, 2)
    grid = load_map(args.map) if args.map else None
    svg = render_svg(grid=grid, path=path if len(path) else None)
    Path(args.out).write_text(svg, encoding="utf-8")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="occnav", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scan", help="emulate a laser scan and emit CSV")
    p.add_argument("--map", required=True)
    p.add_argument("--pose", required=True, help="X,Y,THETA")
    p.add_argument("--rays", type=int, default=720)
    p.add_argument("--max-range", type=float, default=7.0)
    p.add_argument("--out-file", default=None)
    p.set_defaults(func=_cmd_scan)

    p = sub.add_parser("detect", help="locate possible human emergence points")
    p.add_argument("--map", required=True)
    p.add_argument("--pose", required=True, help="X,Y,THETA")
    p.add_argument("--params", default=None, help="JSON file of detection params")
    p.add_argument("--out", choices=["json", "csv", "svg"], default="json")
    p.add_argument("--out-file", default=None)
    p.set_defaults(func=_cmd_detect)

    p = sub.add_parser("classify", help="classify the passage situation")
    p.add_argument("--map", required=True)
    p.add_argument("--pose", required=True, help="X,Y,THETA")
    p.add_argument("--params", default=None)
    p.add_argument("--out-file", default=None)
    p.set_defaults(func=_cmd_classify)

    p = sub.add_parser("simulate", help="run a scenario file")
    p.add_argument("--scenario", required=True)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("bench", help="random-map detection benchmark")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_bench)

    p = sub.add_parser("render", help="render a run record CSV to SVG")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--map", default=None)
    p.add_argument("--out", required=True)
    p.set_defaults(func=_cmd_render)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    try:
        return args.func(args)
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
