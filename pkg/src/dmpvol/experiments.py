"""Canned experiments: synthetic obstacle benchmarks and the robot scene.

Each runner returns plain result objects; :func:`write_outputs` turns them
into CSV, JSON and SVG files.
"""

import os
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

from . import avoidance as av
from . import serialize, sim
from .config import ExperimentConfig, method_to_dict
from .dmp import Dmp, Trajectory, learn_from_demo, rollout
from .errors import ConfigError, DmpError
from .metrics import ComparisonReport, compare
from .obstacles import discretize_boundary
from .svg import PALETTE, Figure

BENCHMARK_HORIZON_FACTOR = 3.0


def spiral_demo(dt=1e-3, duration=1.0):
    """The planar spiral ``(t cos(pi t), t sin(pi t))`` with exact derivatives."""
    t = np.arange(int(round(duration / dt)) + 1) * dt
    c, s = np.cos(np.pi * t), np.sin(np.pi * t)
    x = np.column_stack([t * c, t * s])
    v = np.column_stack([c - np.pi * t * s, s + np.pi * t * c])
    a = np.column_stack([-2 * np.pi * s - np.pi ** 2 * t * c,
                         2 * np.pi * c - np.pi ** 2 * t * s])
    return Trajectory(t, x, v, a)


def load_demo(cfg: ExperimentConfig):
    if cfg.demo_source == "spiral":
        return spiral_demo(cfg.dmp.dt)
    return serialize.read_trajectory_csv(cfg.demo_path)


def learn_model(cfg: ExperimentConfig, demo: Trajectory) -> Dmp:
    p = cfg.dmp
    return learn_from_demo(demo, p.K, p.alpha, p.n_basis, damping=p.D)


def field_members(method, shapes, n_points):
    """``(method, obstacle)`` pairs; point methods see boundary clouds."""
    if isinstance(method, av.POINT_METHODS):
        return [(method, discretize_boundary(sq, n_points)) for sq in shapes]
    return [(method, sq) for sq in shapes]


@dataclass
class MethodRun:
    method: object
    trajectory: Optional[Trajectory] = None
    report: Optional[ComparisonReport] = None
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None


@dataclass
class BenchmarkResult:
    kind: str
    model: Dmp
    reference: Trajectory
    shapes: list
    runs: List[MethodRun] = field(default_factory=list)

    @property
    def ok(self):
        return all(r.ok for r in self.runs)


def run_benchmark(cfg: ExperimentConfig, demo=None):
    """Every configured method against the configured obstacles.

    A method whose rollout fails is recorded with its error; the others
    still run.
    """
    demo = load_demo(cfg) if demo is None else demo
    model = learn_model(cfg, demo)
    horizon = cfg.dmp.horizon or BENCHMARK_HORIZON_FACTOR * model.tau
    reference = rollout(model, dt=cfg.dmp.dt, horizon=horizon)
    shapes = [o.shape for o in cfg.obstacles]
    result = BenchmarkResult(cfg.experiment, model, reference, shapes)
    for method in cfg.methods:
        run = MethodRun(method)
        try:
            fld = av.compose_field(field_members(method, shapes, cfg.boundary_points))
            run.trajectory = rollout(model, dt=cfg.dmp.dt, horizon=horizon, field=fld)
            run.report = compare(reference, run.trajectory, shapes, goal=model.goal)
        except DmpError as exc:
            run.error = f"{type(exc).__name__}: {exc}"
        result.runs.append(run)
    return result


def run_custom(cfg: ExperimentConfig, demo=None):
    """One rollout with each obstacle carrying its own method."""
    demo = load_demo(cfg) if demo is None else demo
    model = learn_model(cfg, demo)
    horizon = cfg.dmp.horizon or BENCHMARK_HORIZON_FACTOR * model.tau
    reference = rollout(model, dt=cfg.dmp.dt, horizon=horizon)
    shapes = [o.shape for o in cfg.obstacles]
    members = []
    for o in cfg.obstacles:
        members.extend(field_members(o.method, [o.shape], cfg.boundary_points))
    result = BenchmarkResult("custom", model, reference, shapes)
    run = MethodRun([o.method for o in cfg.obstacles])
    try:
        run.trajectory = rollout(model, dt=cfg.dmp.dt, horizon=horizon,
                                 field=av.compose_field(members))
        run.report = compare(reference, run.trajectory, shapes, goal=model.goal)
    except DmpError as exc:
        run.error = f"{type(exc).__name__}: {exc}"
    result.runs.append(run)
    return result


@dataclass
class SceneRun:
    variant: str
    scene: sim.Scene
    trajectories: Optional[List[Trajectory]] = None
    error: Optional[str] = None

    @property
    def ok(self):
        return self.error is None

    def summary(self):
        out = {"variant": self.variant, "status": "ok" if self.ok else "failed"}
        if not self.ok:
            out["error"] = self.error
            return out
        out["goal_errors"] = [float(np.linalg.norm(tr.positions[-1] - r.goal))
                              for tr, r in zip(self.trajectories, self.scene.robots)]
        out["min_mutual_clearance"] = sim.min_mutual_clearance(self.scene, self.trajectories)
        out["min_static_clearance"] = sim.min_static_clearance(self.scene, self.trajectories)
        return out


def run_multirobot(cfg: ExperimentConfig):
    scene_cfg = cfg.scene
    if scene_cfg is None or isinstance(scene_cfg, str):
        try:
            scene_cfg = sim.load_scene_config(scene_cfg)
        except ValueError as exc:
            raise ConfigError(f"scene: {exc}") from None
    runs = []
    for variant in cfg.variants:
        scene = sim.scene_from_config(scene_cfg, variant)
        run = SceneRun(variant, scene)
        try:
            run.trajectories = sim.simulate(scene)
        except DmpError as exc:
            run.error = f"{type(exc).__name__}: {exc}"
        runs.append(run)
    return runs


def run_experiment(cfg: ExperimentConfig):
    if cfg.experiment in ("one-obstacle", "two-obstacle"):
        return run_benchmark(cfg)
    if cfg.experiment == "custom":
        return run_custom(cfg)
    return run_multirobot(cfg)


# -- output ---------------------------------------------------------------


def _method_label(method):
    if isinstance(method, list):
        return "custom"
    return method.kind


def _benchmark_files(result: BenchmarkResult, out, timestamp):
    serialize.write_trajectory_csv(os.path.join(out, "reference.csv"), result.reference)
    fig = Figure(f"{result.kind} benchmark")
    fig.trajectory(result.reference.positions, "#000000", dashed=True, label="reference")
    entries = []
    for i, run in enumerate(result.runs):
        label = _method_label(run.method)
        entry = {"method": ([method_to_dict(m) for m in run.method] if isinstance(run.method, list)
                            else method_to_dict(run.method))}
        if run.ok:
            name = f"{label}.csv"
            serialize.write_trajectory_csv(os.path.join(out, name), run.trajectory)
            entry.update(status="ok", trajectory=name, **run.report.to_dict())
            fig.trajectory(run.trajectory.positions, PALETTE[i % len(PALETTE)], label=label)
        else:
            entry.update(status="failed", error=run.error)
        entries.append(entry)
    for sq in result.shapes:
        fig.obstacle(sq)
    fig.save(os.path.join(out, "plot.svg"), timestamp)
    serialize.write_json(os.path.join(out, "report.json"),
                         {"experiment": result.kind, "runs": entries})


def _scene_files(runs, out, timestamp):
    summaries = []
    for run in runs:
        summaries.append(run.summary())
        if not run.ok:
            continue
        fig = Figure(f"robot scene ({run.variant})")
        for sq, _ in run.scene.static_obstacles:
            fig.obstacle(sq)
        for i, (tr, robot) in enumerate(zip(run.trajectories, run.scene.robots)):
            name = robot.name or f"robot{i}"
            color = PALETTE[i % len(PALETTE)]
            serialize.write_trajectory_csv(os.path.join(out, f"{run.variant}_{name}.csv"), tr)
            fig.trajectory(tr.positions, color, label=name)
            fig.marker(robot.goal, color)
        fig.save(os.path.join(out, f"{run.variant}.svg"), timestamp)
    serialize.write_json(os.path.join(out, "report.json"),
                         {"experiment": "multirobot", "runs": summaries})


def write_outputs(result, out, timestamp=False):
    """Write the files of an experiment result into directory ``out``."""
    os.makedirs(out, exist_ok=True)
    if isinstance(result, BenchmarkResult):
        _benchmark_files(result, out, timestamp)
    else:
        _scene_files(result, out, timestamp)


def result_ok(result):
    if isinstance(result, BenchmarkResult):
        return result.ok
    return all(r.ok for r in result)
