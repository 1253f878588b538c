"""Curve definitions from inline strings or key=value files, and CSV helpers.

File grammar, one ``key = value`` per line, ``#`` starts a comment::

    kind = fourier          # circle | ellipse | parabola | fourier | sampled
    cos = 1, 0, 0, 0.05     # support-function cosine coefficients, k = 0, 1, ...
    sin = 0, 0, 0.02        # sine coefficients (k = 0 entry ignored)
    derivative = analytic   # or fd
    h = 1e-5                # finite-difference step as a fraction of the period

Per kind: ``circle`` takes ``r``; ``ellipse`` takes ``a, b``; ``parabola``
takes ``c`` and ``t_range = t0, t1``; ``sampled`` takes ``points_file``
(CSV of ``x,y`` rows, counterclockwise, no repeated closing point).

Inline form: ``ellipse:2,1``, ``circle:1``, ``parabola:c,t0,t1``,
``fourier:1,0,0,0.05;0,0,0.02`` (cosine list, then sine list).
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

import numpy as np

from .curves import Circle, Curve, Ellipse, FourierOval, ParabolaArc, SampledCurve
from .errors import ConfigError

KEYS = {
    "circle": {"r"},
    "ellipse": {"a", "b"},
    "parabola": {"c", "t_range"},
    "fourier": {"cos", "sin"},
    "sampled": {"points_file"},
}
COMMON = {"kind", "derivative", "h"}


def fmt(x) -> str:
    """Pinned 12-significant-digit formatting for machine-readable output."""
    x = float(x)
    if x == 0.0:
        x = 0.0   # drop the sign of negative zero
    return f"{x:.12g}"


def _float(key, v):
    try:
        return float(v)
    except ValueError:
        raise ConfigError(f"{key}: expected a decimal number, got {v!r}") from None


def _floats(key, v):
    v = v.strip()
    if not v:
        return ()
    return tuple(_float(key, p) for p in v.split(","))


def curve_from_mapping(cfg: dict, base_dir=None) -> Curve:
    cfg = {k.strip().lower(): str(v).strip() for k, v in cfg.items()}
    kind = cfg.get("kind")
    if kind not in KEYS:
        raise ConfigError(f"unknown or missing curve kind {kind!r}; expected one of {sorted(KEYS)}")
    unknown = set(cfg) - KEYS[kind] - COMMON
    if unknown:
        raise ConfigError(f"unknown keys for {kind}: {', '.join(sorted(unknown))}")
    extra = {}
    if "derivative" in cfg:
        if cfg["derivative"] not in ("analytic", "fd"):
            raise ConfigError("derivative must be 'analytic' or 'fd'")
        extra["derivative_mode"] = cfg["derivative"]
    if "h" in cfg:
        h = _float("h", cfg["h"])
        if not 0 < h < 0.01:
            raise ConfigError("h must lie in (0, 0.01)")
        extra["h"] = h
    try:
        if kind == "circle":
            return Circle(_float("r", cfg.get("r", "1")), **extra)
        if kind == "ellipse":
            return Ellipse(_float("a", cfg.get("a", "2")), _float("b", cfg.get("b", "1")), **extra)
        if kind == "parabola":
            tr = _floats("t_range", cfg.get("t_range", "-2,2"))
            if len(tr) != 2 or not tr[0] < tr[1]:
                raise ConfigError("t_range needs two increasing values")
            return ParabolaArc(_float("c", cfg.get("c", "1")), tr, **extra)
        if kind == "fourier":
            return FourierOval(_floats("cos", cfg.get("cos", "1")), _floats("sin", cfg.get("sin", "")), **extra)
        path = Path(cfg.get("points_file", ""))
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        try:
            pts = np.loadtxt(path, delimiter=",", ndmin=2)
        except (OSError, ValueError) as exc:
            raise ConfigError(f"cannot read points_file: {exc}") from None
        extra.pop("derivative_mode", None)
        return SampledCurve(tuple(map(tuple, pts)), **extra)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


def parse_config(text: str, base_dir=None) -> Curve:
    cfg = {}
    for n, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {n}: expected key = value")
        k, v = line.split("=", 1)
        k = k.strip().lower()
        if k in cfg:
            raise ConfigError(f"line {n}: duplicate key {k!r}")
        cfg[k] = v
    return curve_from_mapping(cfg, base_dir)


def load_config(path) -> Curve:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text, base_dir=path.parent)


def parse_curve(spec: str) -> Curve:
    """Inline curve spec such as ``ellipse:2,1``; an existing file path is read as a config."""
    if ":" not in spec:
        if Path(spec).is_file():
            return load_config(spec)
        spec = spec + ":"
    kind, args = spec.split(":", 1)
    kind = kind.strip().lower()
    if kind == "circle":
        vals = _floats("circle", args) or (1.0,)
        if len(vals) != 1:
            raise ConfigError("circle takes one value: r")
        return curve_from_mapping({"kind": kind, "r": vals[0]})
    if kind == "ellipse":
        vals = _floats("ellipse", args)
        if len(vals) != 2:
            raise ConfigError("ellipse takes two values: a,b")
        return curve_from_mapping({"kind": kind, "a": vals[0], "b": vals[1]})
    if kind == "parabola":
        vals = _floats("parabola", args)
        if len(vals) not in (1, 3):
            raise ConfigError("parabola takes c or c,t0,t1")
        tr = ",".join(map(str, vals[1:])) if len(vals) == 3 else "-2,2"
        return curve_from_mapping({"kind": kind, "c": vals[0], "t_range": tr})
    if kind == "fourier":
        cos, _, sin = args.partition(";")
        return curve_from_mapping({"kind": kind, "cos": cos, "sin": sin})
    raise ConfigError(f"unknown curve kind {kind!r}")


def parse_point(s: str, n: int = 2):
    vals = _floats("point", s)
    if len(vals) != n or not np.all(np.isfinite(vals)):
        raise ConfigError(f"expected {n} comma-separated numbers, got {s!r}")
    return np.array(vals)


def read_probes(text: str) -> np.ndarray:
    rows = [r for r in csv.reader(io.StringIO(text)) if r and not r[0].startswith("#")]
    if rows and rows[0][0].strip() == "qx":
        rows = rows[1:]
    try:
        return np.array([[float(r[0]), float(r[1])] for r in rows]).reshape(-1, 2)
    except (ValueError, IndexError):
        raise ConfigError("probe CSV rows must start with qx,qy") from None


def probes_csv(rows) -> str:
    """``qx,qy,n,index`` rows; ``rows`` yields (q, n, i) and is sorted for determinism."""
    out = ["qx,qy,n,index"]
    for q, n, i in sorted(rows, key=lambda r: (float(r[0][0]), float(r[0][1]))):
        out.append(f"{fmt(q[0])},{fmt(q[1])},{n},{i}")
    return "\n".join(out) + "\n"
