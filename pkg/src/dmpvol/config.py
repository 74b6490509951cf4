"""Strict JSON experiment configuration.

Every object rejects unknown keys. Parsing happens completely before any
computation starts, so a bad gain fails fast with exit code 1.

Top-level schema::

    {
      "experiment": "one-obstacle" | "two-obstacle" | "multirobot" | "custom",
      "dmp":  {"K": 1050, "D": null, "alpha": 4, "n_basis": 50,
               "dt": 0.001, "horizon": 3.0},
      "demo": {"source": "spiral"} | {"source": "file", "path": "demo.csv"},
      "boundary_points": 50,
      "obstacles": [ {"shape": {...}, "method": {...}} ],
      "methods": [ {"method": "static_point", "eta": 1, "p0": 0.1}, ... ],
      "scene": "path/to/scene.json" | {...},
      "variants": ["null-weights", "constant-speed"],
      "output": "out/"
    }

``obstacles`` entries for the one-/two-obstacle kinds only need a
``shape``; every listed method is run against all of them. For ``custom``
each entry carries its own ``method``. A shape is
``{"center": [..], "axes": [..], "exponents": [n, m], "velocity": [..],
"z_exponent": p}`` (only center and axes required).
"""

import json
from dataclasses import dataclass, field
from typing import List, Optional

from . import avoidance as av
from .errors import ConfigError
from .obstacles import Superquadric

EXPERIMENT_KINDS = ("one-obstacle", "two-obstacle", "multirobot", "custom")

ELLIPSE = {"center": [-0.5, 0.7], "axes": [0.3, 0.2]}
CIRCLE = {"center": [0.15, 0.4], "axes": [0.1, 0.1]}

# Table of default gains for the planar synthetic benchmarks.
BENCHMARK_METHODS = (
    av.StaticPoint(eta=1.0, p0=0.1),
    av.DynamicPoint(lam=0.2, beta=2.0),
    av.SteeringAngle(gamma=20.0, beta=3.0),
    av.StaticVolume(amplitude=10.0, eta=1.0),
    av.DynamicVolume(lam=10.0, beta=2.0, eta=0.5),
)


def _strict(obj, where, required=(), optional=()):
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = set(obj) - set(required) - set(optional)
    if unknown:
        raise ConfigError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = [k for k in required if k not in obj]
    if missing:
        raise ConfigError(f"{where}: missing key(s) {missing}")
    return obj


def _number(value, where, positive=False):
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where}: expected a number, got {value!r}")
    if positive and not value > 0:
        raise ConfigError(f"{where}: must be positive, got {value!r}")
    return float(value)


def _vector(value, where, size=None):
    if not isinstance(value, list) or not value:
        raise ConfigError(f"{where}: expected a list of numbers")
    out = [_number(v, f"{where}[{i}]") for i, v in enumerate(value)]
    if size is not None and len(out) != size:
        raise ConfigError(f"{where}: expected {size} components, got {len(out)}")
    return out


_METHOD_FIELDS = {
    "static_point": ("eta", "p0"),
    "dynamic_point": ("lam", "beta"),
    "steering_angle": ("gamma", "beta"),
    "static_volume": ("amplitude", "eta"),
    "dynamic_volume": ("lam", "beta", "eta"),
}


def parse_method(obj, where="method"):
    """``{"method": kind, <gains>}`` to an avoidance method; missing gains
    take the benchmark defaults."""
    if not isinstance(obj, dict) or "method" not in obj:
        raise ConfigError(f"{where}: expected an object with a 'method' key")
    kind = obj["method"]
    if kind not in _METHOD_FIELDS:
        raise ConfigError(f"{where}: unknown method {kind!r}; expected one of {sorted(_METHOD_FIELDS)}")
    extra = ("fd_cos_gradient",) if kind == "dynamic_volume" else ()
    _strict(obj, where, ("method",), _METHOD_FIELDS[kind] + extra)
    kwargs = {k: _number(obj[k], f"{where}.{k}", positive=True)
              for k in _METHOD_FIELDS[kind] if k in obj}
    if "fd_cos_gradient" in obj:
        kwargs["fd_cos_gradient"] = bool(obj["fd_cos_gradient"])
    try:
        return av.METHODS[kind](**kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


def method_to_dict(method):
    out = {"method": method.kind}
    out.update({k: getattr(method, k) for k in _METHOD_FIELDS[method.kind]})
    return out


def parse_superquadric(obj, where="shape"):
    _strict(obj, where, ("center", "axes"), ("exponents", "velocity", "z_exponent", "name"))
    center = _vector(obj["center"], f"{where}.center")
    axes = _vector(obj["axes"], f"{where}.axes", len(center))
    kwargs = {}
    if "exponents" in obj:
        ex = obj["exponents"]
        if not (isinstance(ex, list) and len(ex) == 2 and all(isinstance(e, int) for e in ex)):
            raise ConfigError(f"{where}.exponents: expected two integers")
        kwargs["exponents"] = tuple(ex)
    if "velocity" in obj:
        kwargs["velocity"] = _vector(obj["velocity"], f"{where}.velocity", len(center))
    if "z_exponent" in obj:
        kwargs["z_exponent"] = obj["z_exponent"]
    try:
        return Superquadric(center, axes, **kwargs)
    except ValueError as exc:
        raise ConfigError(f"{where}: {exc}") from None


@dataclass
class DmpParams:
    K: float = 1050.0
    D: Optional[float] = None
    alpha: float = 4.0
    n_basis: int = 50
    dt: float = 1e-3
    horizon: Optional[float] = None


@dataclass
class ObstacleSpec:
    shape: Superquadric
    method: Optional[object] = None


@dataclass
class ExperimentConfig:
    experiment: str
    dmp: DmpParams = field(default_factory=DmpParams)
    demo_source: str = "spiral"
    demo_path: Optional[str] = None
    boundary_points: int = 50
    obstacles: List[ObstacleSpec] = field(default_factory=list)
    methods: List[object] = field(default_factory=lambda: list(BENCHMARK_METHODS))
    scene: object = None
    variants: List[str] = field(default_factory=lambda: ["null-weights", "constant-speed"])
    output: Optional[str] = None


def parse_config(obj):
    """Validate a decoded JSON document into an :class:`ExperimentConfig`."""
    _strict(obj, "config", ("experiment",),
            ("dmp", "demo", "boundary_points", "obstacles", "methods", "scene", "variants", "output"))
    kind = obj["experiment"]
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"config.experiment: expected one of {EXPERIMENT_KINDS}, got {kind!r}")
    cfg = ExperimentConfig(kind)

    if "dmp" in obj:
        d = _strict(obj["dmp"], "config.dmp", (), ("K", "D", "alpha", "n_basis", "dt", "horizon"))
        p = cfg.dmp
        if "K" in d:
            p.K = _number(d["K"], "config.dmp.K", positive=True)
        if d.get("D") is not None:
            p.D = _number(d["D"], "config.dmp.D", positive=True)
        if "alpha" in d:
            p.alpha = _number(d["alpha"], "config.dmp.alpha", positive=True)
        if "n_basis" in d:
            if not isinstance(d["n_basis"], int) or d["n_basis"] < 1:
                raise ConfigError("config.dmp.n_basis: expected a positive integer")
            p.n_basis = d["n_basis"]
        if "dt" in d:
            p.dt = _number(d["dt"], "config.dmp.dt", positive=True)
        if d.get("horizon") is not None:
            p.horizon = _number(d["horizon"], "config.dmp.horizon", positive=True)

    if "demo" in obj:
        d = _strict(obj["demo"], "config.demo", ("source",), ("path",))
        if d["source"] == "spiral":
            cfg.demo_source = "spiral"
        elif d["source"] == "file":
            if not isinstance(d.get("path"), str):
                raise ConfigError("config.demo.path: required for source 'file'")
            cfg.demo_source, cfg.demo_path = "file", d["path"]
        else:
            raise ConfigError(f"config.demo.source: expected 'spiral' or 'file', got {d['source']!r}")

    if "boundary_points" in obj:
        bp = obj["boundary_points"]
        if not isinstance(bp, int) or bp < 3:
            raise ConfigError("config.boundary_points: expected an integer >= 3")
        cfg.boundary_points = bp

    if "methods" in obj:
        if not isinstance(obj["methods"], list) or not obj["methods"]:
            raise ConfigError("config.methods: expected a non-empty list")
        cfg.methods = [parse_method(m, f"config.methods[{i}]") for i, m in enumerate(obj["methods"])]

    if "obstacles" in obj:
        if not isinstance(obj["obstacles"], list):
            raise ConfigError("config.obstacles: expected a list")
        for i, o in enumerate(obj["obstacles"]):
            where = f"config.obstacles[{i}]"
            _strict(o, where, ("shape",), ("method",))
            method = parse_method(o["method"], f"{where}.method") if "method" in o else None
            cfg.obstacles.append(ObstacleSpec(parse_superquadric(o["shape"], f"{where}.shape"), method))
    elif kind in ("one-obstacle", "two-obstacle"):
        shapes = [ELLIPSE] if kind == "one-obstacle" else [ELLIPSE, CIRCLE]
        cfg.obstacles = [ObstacleSpec(parse_superquadric(s)) for s in shapes]

    if kind == "custom":
        if not cfg.obstacles:
            raise ConfigError("config.obstacles: a custom experiment needs at least one obstacle")
        for i, o in enumerate(cfg.obstacles):
            if o.method is None:
                raise ConfigError(f"config.obstacles[{i}].method: required for custom experiments")

    if "scene" in obj:
        if not isinstance(obj["scene"], (str, dict)):
            raise ConfigError("config.scene: expected a path or an object")
        cfg.scene = obj["scene"]
    if "variants" in obj:
        from .sim import VARIANTS

        vs = obj["variants"]
        if not isinstance(vs, list) or not vs or any(v not in VARIANTS for v in vs):
            raise ConfigError(f"config.variants: expected a non-empty list drawn from {VARIANTS}")
        cfg.variants = list(vs)
    if "output" in obj:
        if not isinstance(obj["output"], str):
            raise ConfigError("config.output: expected a path")
        cfg.output = obj["output"]
    return cfg


def load_config(path):
    """Read and validate a config file; JSON syntax errors name line and column."""
    with open(path) as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return parse_config(obj)
