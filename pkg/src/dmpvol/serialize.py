"""Trajectory CSV, model JSON and report JSON.

Floats are written with 17 significant digits (CSV) or as the shortest
round-tripping repr (JSON), so reading a file back gives the exact values.
Output is byte-deterministic: fixed key order, ``\\n`` line endings.
"""

import json

import numpy as np

from .basis import BasisSet
from .dmp import Dmp, Trajectory
from .errors import ConfigError

MODEL_FORMAT = "dmpvol-model"
MODEL_VERSION = 1


def _fmt(value):
    return format(float(value), ".17g")


def trajectory_to_csv(traj: Trajectory):
    """CSV text with header ``t,x1..xd,v1..vd,a1..ad``."""
    d = traj.dims
    header = ["t"] + [f"{p}{i}" for p in "xva" for i in range(1, d + 1)]
    table = np.column_stack([traj.times, traj.positions, traj.velocities, traj.accelerations])
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in table)
    return "\n".join(lines) + "\n"


def write_trajectory_csv(path, traj: Trajectory):
    with open(path, "w", newline="\n") as fh:
        fh.write(trajectory_to_csv(traj))


def _parse_header(header, source):
    cols = header.strip().split(",")
    if not cols or cols[0] != "t":
        raise ConfigError(f"{source}:1: header must start with 't'")
    groups = {}
    for name in cols[1:]:
        prefix, idx = name[:1], name[1:]
        if not prefix or prefix not in "xva" or not idx.isdigit():
            raise ConfigError(f"{source}:1: unexpected column {name!r}")
        groups.setdefault(prefix, []).append(int(idx))
    d = len(groups.get("x", []))
    if d == 0:
        raise ConfigError(f"{source}:1: no position columns")
    expected = [f"{p}{i}" for p in "xva" if p in groups for i in range(1, d + 1)]
    if cols[1:] != expected:
        raise ConfigError(f"{source}:1: columns must be t, x1..x{d}, then optional v1..v{d}, a1..a{d}")
    if "a" in groups and "v" not in groups:
        raise ConfigError(f"{source}:1: accelerations need velocity columns")
    return d, tuple(groups)


def trajectory_from_csv(text, source="<csv>"):
    """Parse CSV text written by :func:`trajectory_to_csv`.

    Files with only position columns (e.g. recorded demonstrations) get
    finite-difference velocities and accelerations; files with positions
    and velocities get accelerations from central differences of velocity.
    """
    lines = text.splitlines()
    if not lines:
        raise ConfigError(f"{source}: empty file")
    d, groups = _parse_header(lines[0], source)
    width = 1 + d * len(groups)
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != width:
            raise ConfigError(f"{source}:{lineno}: expected {width} fields, got {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise ConfigError(f"{source}:{lineno}: malformed number in row {line!r}") from None
    if len(rows) < 2:
        raise ConfigError(f"{source}: need at least two samples")
    table = np.array(rows)
    t = table[:, 0]
    x = table[:, 1:1 + d]
    if np.any(np.diff(t) <= 0):
        raise ConfigError(f"{source}: time stamps must be strictly increasing")
    try:
        if groups == ("x",):
            return Trajectory.from_positions(t, x)
        v = table[:, 1 + d:1 + 2 * d]
        if groups == ("x", "v"):
            a = np.gradient(v, t, axis=0, edge_order=2 if len(t) > 2 else 1)
        else:
            a = table[:, 1 + 2 * d:]
        return Trajectory(t, x, v, a)
    except ValueError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def read_trajectory_csv(path):
    with open(path) as fh:
        return trajectory_from_csv(fh.read(), str(path))


def _dumps(obj):
    return json.dumps(obj, indent=2, allow_nan=False) + "\n"


def model_to_dict(dmp: Dmp):
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "elastic": dmp.elastic.tolist(),
        "damping": dmp.damping.tolist(),
        "tau": dmp.tau,
        "alpha": dmp.alpha,
        "demo_duration": dmp.demo_duration,
        "x0": dmp.x0.tolist(),
        "goal": dmp.goal.tolist(),
        "basis": {"centers": dmp.basis.centers.tolist(), "widths": dmp.basis.widths.tolist()},
        "weights": dmp.weights.tolist(),
    }


def model_from_dict(obj, source="<model>"):
    keys = {"format", "version", "elastic", "damping", "tau", "alpha", "demo_duration",
            "x0", "goal", "basis", "weights"}
    if not isinstance(obj, dict):
        raise ConfigError(f"{source}: expected a JSON object")
    if obj.get("format") != MODEL_FORMAT or obj.get("version") != MODEL_VERSION:
        raise ConfigError(f"{source}: not a {MODEL_FORMAT} v{MODEL_VERSION} file")
    if set(obj) != keys:
        raise ConfigError(f"{source}: model keys must be exactly {sorted(keys)}")
    basis = obj["basis"]
    if not isinstance(basis, dict) or set(basis) != {"centers", "widths"}:
        raise ConfigError(f"{source}: basis must have exactly 'centers' and 'widths'")
    try:
        return Dmp(
            elastic=np.asarray(obj["elastic"], dtype=float),
            damping=np.asarray(obj["damping"], dtype=float),
            tau=float(obj["tau"]),
            alpha=float(obj["alpha"]),
            basis=BasisSet(np.asarray(basis["centers"], dtype=float),
                           np.asarray(basis["widths"], dtype=float)),
            weights=np.asarray(obj["weights"], dtype=float),
            demo_duration=float(obj["demo_duration"]),
            x0=np.asarray(obj["x0"], dtype=float),
            goal=np.asarray(obj["goal"], dtype=float),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{source}: {exc}") from None


def model_to_json(dmp: Dmp):
    return _dumps(model_to_dict(dmp))


def write_model(path, dmp: Dmp):
    with open(path, "w", newline="\n") as fh:
        fh.write(model_to_json(dmp))


def read_model(path):
    with open(path) as fh:
        text = fh.read()
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    return model_from_dict(obj, str(path))


def write_json(path, obj):
    with open(path, "w", newline="\n") as fh:
        fh.write(_dumps(obj))
