"""Planar multi-robot scenes driven by DMPs that share one phase.

Each robot sees every other robot as a moving ellipse (inflated by both
footprints) carrying a dynamic volumetric potential evaluated with the
relative velocity. Static walls and boxes add their own fields. All robots
read the previous step's states, so the result does not depend on the
order in which robots are listed.
"""

import json
import math
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import List, Optional, Tuple

import numpy as np

from .avoidance import AvoidanceMethod, DynamicVolume, compose_field, dynamic_volume_many
from .dmp import DEFAULT_BOUND, Dmp, Trajectory, _check_bound, _Stepper, learn_from_demo
from .errors import CollisionError, ConfigError, InsideObstacleError
from .obstacles import Superquadric, SuperquadricBatch, inflate, isopotential


@dataclass(frozen=True, eq=False)
class RobotSpec:
    dmp: Dmp
    start: np.ndarray
    goal: np.ndarray
    footprint: np.ndarray
    name: str = ""

    def __post_init__(self):
        for key in ("start", "goal", "footprint"):
            arr = np.array(getattr(self, key), dtype=float).reshape(-1)
            if arr.shape != (2,):
                raise ValueError(f"robot {key} must have two components")
            arr.setflags(write=False)
            object.__setattr__(self, key, arr)
        if not np.all(self.footprint > 0):
            raise ValueError("footprint components must be positive")
        if self.dmp.dims != 2:
            raise ValueError("robots are planar: their DMP must be 2-D")


@dataclass(frozen=True, eq=False)
class Scene:
    """Robots, static obstacles and integration settings.

    ``mutual_method`` set to ``None`` disables robot-to-robot potentials;
    the robots then move independently.
    """

    robots: List[RobotSpec]
    static_obstacles: List[Tuple[Superquadric, AvoidanceMethod]] = field(default_factory=list)
    dt: float = 1e-3
    horizon: float = 1.0
    mutual_method: Optional[DynamicVolume] = DynamicVolume(lam=60.0, beta=2.0, eta=0.2)

    def __post_init__(self):
        if not self.robots:
            raise ValueError("a scene needs at least one robot")
        if not self.dt > 0 or not self.horizon >= self.dt:
            raise ValueError("need dt > 0 and horizon >= dt")
        first = self.robots[0].dmp
        for r in self.robots[1:]:
            if r.dmp.tau != first.tau or r.dmp.alpha != first.alpha:
                raise ValueError("robots share one canonical system: tau and alpha must agree")

    def static_field(self):
        if not self.static_obstacles:
            return None
        return compose_field([(m, sq) for sq, m in self.static_obstacles])


def mutual_obstacle(other_pos, other_vel, own_fp, other_fp):
    """Ellipse centered on another robot, inflated by both footprints."""
    return Superquadric(other_pos, np.asarray(own_fp) + np.asarray(other_fp), (1, 1), other_vel)


def mutual_clearance(pos_i, pos_j, fp_i, fp_j):
    # Symmetric in (i, j): same axes, offset only changes sign.
    axes = np.asarray(fp_i) + np.asarray(fp_j)
    a = (np.asarray(pos_i) - np.asarray(pos_j)) / axes
    return float(a @ a - 1.0)


def simulate(scene: Scene, bound=DEFAULT_BOUND):
    """Integrate every robot on a common time grid.

    Returns
    -------
    list of Trajectory
        One per robot, in scene order.

    Raises
    ------
    CollisionError
        If two robots interpenetrate while mutual potentials are active.
    InsideObstacleError
        If a robot starts inside, or is pushed into, a static obstacle.
    """
    static = scene.static_field()
    robots = scene.robots
    for i, r in enumerate(robots):
        for sq, _ in scene.static_obstacles:
            if isopotential(sq, r.start) <= 0:
                raise InsideObstacleError(f"robot {i} starts inside a static obstacle")
    steppers = [_Stepper(r.dmp, r.start, r.goal, scene.dt, scene.horizon) for r in robots]
    n_steps = steppers[0].steps
    times = steppers[0].times
    tau = robots[0].dmp.tau
    xs = np.array([r.start for r in robots])
    vs = np.zeros_like(xs)
    mutual = scene.mutual_method
    if len(robots) < 2:
        mutual = None
    if mutual is not None:
        # Ordered pairs (i, j), j != i, grouped by i.
        pairs = [(i, j) for i in range(len(robots)) for j in range(len(robots)) if j != i]
        own = np.array([i for i, _ in pairs])
        other = np.array([j for _, j in pairs])
        fps = np.array([r.footprint for r in robots])
        per_robot = len(robots) - 1
        _check_pairs(robots, xs, 0.0)

    for k in range(n_steps + 1):
        t = times[k]
        vel = vs / tau
        stat = None
        if static is not None:
            try:
                stat = static.many(xs, vel, t)
            except InsideObstacleError as exc:
                raise type(exc)(f"robot {exc.state}: {exc}") from exc
        mut = None
        if mutual is not None:
            batch = SuperquadricBatch.ellipses(xs[other], fps[own] + fps[other], vel[other])
            try:
                mut = dynamic_volume_many(xs[own], vel[own], batch, mutual)
            except InsideObstacleError as exc:
                i, j = pairs[exc.index]
                raise CollisionError(f"robots {i} and {j} overlap at t = {t:.6g}") from exc
        new = []
        for i, st in enumerate(steppers):
            terms = [] if stat is None else [stat[i]]
            if mut is not None:
                terms.extend(mut[i * per_robot:(i + 1) * per_robot])
            new.append(st.advance(k, xs[i], vs[i], _sum_terms(terms)))
        if k < n_steps:
            xs = np.array([x for x, _ in new])
            vs = np.array([v for _, v in new])
            for x in xs:
                _check_bound(x, bound, times[k + 1])
            if mutual is not None:
                _check_pairs(robots, xs, times[k + 1])
    return [st.trajectory() for st in steppers]


def _sum_terms(terms):
    if not terms:
        return None
    if len(terms) == 1:
        return terms[0]
    # Correctly rounded, hence independent of the order of the terms.
    return np.array([math.fsum(col) for col in zip(*terms)])


def _check_pairs(robots, xs, t):
    for i in range(len(robots)):
        for j in range(i + 1, len(robots)):
            c = mutual_clearance(xs[i], xs[j], robots[i].footprint, robots[j].footprint)
            if c <= 0:
                raise CollisionError(
                    f"robots {i} and {j} interpenetrate at t = {t:.6g} (C = {c:.3g})")


def min_mutual_clearance(scene: Scene, trajectories):
    """Smallest pairwise mutual-ellipse isopotential over time."""
    best = math.inf
    for i in range(len(trajectories)):
        for j in range(i + 1, len(trajectories)):
            axes = scene.robots[i].footprint + scene.robots[j].footprint
            a = (trajectories[i].positions - trajectories[j].positions) / axes
            best = min(best, float(np.min(np.einsum("ij,ij->i", a, a) - 1.0)))
    return best


def min_static_clearance(scene: Scene, trajectories):
    best = math.inf
    for sq, _ in scene.static_obstacles:
        for tr in trajectories:
            best = min(best, float(np.min(isopotential(sq, tr.positions))))
    return best


# -- the shipped scene -----------------------------------------------------

VARIANTS = ("null-weights", "constant-speed")


def load_scene_config(path=None):
    """Scene geometry as a dict; the packaged default when ``path`` is None."""
    if path is None:
        text = resources.files("dmpvol").joinpath("data/youbot_scene.json").read_text()
    else:
        with open(path) as fh:
            text = fh.read()
    return json.loads(text)


def straight_line_demo(start, goal, duration, dt):
    """Constant-speed segment with exact derivatives."""
    t = np.arange(int(round(duration / dt)) + 1) * dt
    start = np.asarray(start, float)
    goal = np.asarray(goal, float)
    vel = (goal - start) / duration
    x = start + np.outer(t / duration, goal - start)
    return Trajectory(t, x, np.tile(vel, (t.size, 1)), np.zeros_like(x))


def scene_from_config(cfg, variant="null-weights"):
    """Build a :class:`Scene` from a scene dict (see ``data/youbot_scene.json``).

    Unknown keys are rejected. In the ``null-weights`` variant every robot
    runs a forcing-free primitive; in ``constant-speed`` each learns from a
    straight segment covered at constant speed in ``duration`` seconds.
    """
    from .config import _number, _strict, _vector, parse_method, parse_superquadric

    if variant not in VARIANTS:
        raise ConfigError(f"unknown variant {variant!r}; expected one of {VARIANTS}")
    _strict(cfg, "scene", ("dmp", "robots", "horizon"),
            ("dt", "inflation", "mutual", "obstacles", "description"))
    dmp_cfg = _strict(cfg["dmp"], "scene.dmp", ("K", "duration"), ("D", "alpha", "n_basis"))
    k = _number(dmp_cfg["K"], "scene.dmp.K", positive=True)
    damping = dmp_cfg.get("D")
    if damping is not None:
        damping = _number(damping, "scene.dmp.D", positive=True)
    alpha = _number(dmp_cfg.get("alpha", 4.0), "scene.dmp.alpha", positive=True)
    duration = _number(dmp_cfg["duration"], "scene.dmp.duration", positive=True)
    n_basis = dmp_cfg.get("n_basis", 50)
    if not isinstance(n_basis, int) or n_basis < 1:
        raise ConfigError("scene.dmp.n_basis: expected a positive integer")
    dt = _number(cfg.get("dt", 1e-3), "scene.dt", positive=True)
    horizon = _number(cfg["horizon"], "scene.horizon", positive=True)
    margin = np.asarray(_vector(cfg.get("inflation", [0.0, 0.0]), "scene.inflation", 2))
    if np.any(margin < 0):
        raise ConfigError("scene.inflation: margins must be nonnegative")

    if not isinstance(cfg["robots"], list) or not cfg["robots"]:
        raise ConfigError("scene.robots: expected a non-empty list")
    robots = []
    for i, rc in enumerate(cfg["robots"]):
        where = f"scene.robots[{i}]"
        _strict(rc, where, ("start", "goal", "footprint"), ("name",))
        start = np.asarray(_vector(rc["start"], f"{where}.start", 2))
        goal = np.asarray(_vector(rc["goal"], f"{where}.goal", 2))
        footprint = _vector(rc["footprint"], f"{where}.footprint", 2)
        if variant == "null-weights":
            dmp = Dmp.zero(start, goal, k, damping, tau=duration, alpha=alpha, n_basis=n_basis)
        else:
            demo = straight_line_demo(start, goal, duration, dt)
            dmp = learn_from_demo(demo, k, alpha, n_basis, damping=damping)
        try:
            robots.append(RobotSpec(dmp, start, goal, footprint, str(rc.get("name", ""))))
        except ValueError as exc:
            raise ConfigError(f"{where}: {exc}") from None

    statics = []
    obstacles = cfg.get("obstacles", [])
    if not isinstance(obstacles, list):
        raise ConfigError("scene.obstacles: expected a list")
    for i, oc in enumerate(obstacles):
        where = f"scene.obstacles[{i}]"
        _strict(oc, where, ("shape", "method"))
        sq = parse_superquadric(oc["shape"], f"{where}.shape")
        if sq.dims != 2:
            raise ConfigError(f"{where}.shape: scene obstacles are planar")
        statics.append((inflate(sq, margin), parse_method(oc["method"], f"{where}.method")))
    mutual = cfg.get("mutual")
    if mutual is not None:
        _strict(mutual, "scene.mutual", (), ("lam", "beta", "eta"))
        mutual = parse_method(dict(mutual, method="dynamic_volume"), "scene.mutual")
    try:
        return Scene(robots, statics, dt, horizon, mutual)
    except ValueError as exc:
        raise ConfigError(f"scene: {exc}") from None


def build_scene(variant="null-weights", config=None):
    """Three robots crossing a walled rectangle with boxes.

    ``config`` is a scene dict or a path; the packaged scene is used by
    default.
    """
    if config is None or isinstance(config, str):
        config = load_scene_config(config)
    return scene_from_config(config, variant)


def without_mutual(scene: Scene):
    return replace(scene, mutual_method=None)
