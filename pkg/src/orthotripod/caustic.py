"""The caustic (evolute) of a convex curve and the regions it cuts out."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from . import kernel
from .curves import Curve, EPS_GEOM
from .errors import ConstantWidthSuspected, FlatPoint, GeometryError, OnCaustic, OnCurve

DEFAULT_CAUSTIC_SAMPLES = 4096


class LemmaViolation(GeometryError):
    """Normal count and caustic winding index disagree (n != 2 i + 2)."""


@dataclass(frozen=True, eq=False)
class CausticGeometry:
    curve: Curve
    t: np.ndarray
    points: np.ndarray               # evolute samples, shape (n, 2)
    cusps: tuple                     # ((t, (x, y)), ...)
    degenerate: bool = False         # the whole caustic is a single point
    calibration: dict = field(default_factory=dict)

    @property
    def polyline(self):
        return self.points

    @property
    def sign(self):
        return self.calibration.get("sign", 1)

    @property
    def center(self):
        return self.points.mean(axis=0)

    def winding(self, q, tol=0.0):
        """Calibrated winding index i(Q) of the caustic around ``q``."""
        return kernel.winding_index(self.points, q, sign=self.sign, tol=tol)

    def distance(self, q):
        return kernel.polyline_distance(self.points, q)


def _cusps(curve, ts):
    dk = curve.curvature_derivative(ts)
    pos = dk >= 0
    step = curve.period / len(ts)
    out = []
    for i in np.nonzero(pos != np.roll(pos, -1))[0]:
        a = ts[i]
        b = a + step
        fa, fb = dk[i], dk[(i + 1) % len(ts)]
        if fa == 0.0:
            tc = a
        elif fb == 0.0:
            tc = b
        else:
            tc = brentq(lambda t: float(curve.curvature_derivative(t)), a, b, xtol=1e-14)
        tc = float(np.mod(tc, curve.period))
        out.append((tc, tuple(float(v) for v in curve.center_of_curvature(tc))))
    out.sort()
    # grid zeros are hit from both neighbouring intervals
    merged = []
    for c in out:
        if merged and abs(c[0] - merged[-1][0]) < 1e-9:
            continue
        merged.append(c)
    if len(merged) > 1 and merged[0][0] + curve.period - merged[-1][0] < 1e-9:
        merged.pop()
    return tuple(merged)


def _calibrate(curve, points, samples):
    """Fix the global winding sign on a probe point with at least four normals."""
    lo, hi = points.min(axis=0), points.max(axis=0)
    probes = [points.mean(axis=0)]
    probes += [lo + (hi - lo) * np.array([u, v]) for u, v in itertools.product(np.linspace(0.1, 0.9, 9), repeat=2)]
    for q in probes:
        try:
            raw = kernel.winding_index(points, q, tol=1e-6 * curve.diameter)
            n = kernel.normal_count(curve, q, samples)
        except (OnCurve, OnCaustic):
            continue
        if raw != 0 and n >= 4:
            i = (n - 2) // 2
            return {"probe": (float(q[0]), float(q[1])), "raw_winding": raw, "normals": n,
                    "sign": 1 if raw * i > 0 else -1}
    raise GeometryError("could not find a calibration probe inside the caustic")


def compute_caustic(curve: Curve, n_samples: int = DEFAULT_CAUSTIC_SAMPLES,
                    feet_samples: int = kernel.DEFAULT_SAMPLES) -> CausticGeometry:
    """Sample the evolute, locate cusps and calibrate the winding orientation."""
    if not curve.closed:
        raise GeometryError("caustic analysis needs a closed curve")
    ts = curve.sample_parameters(n_samples)
    kappa = curve.curvature(ts)
    if np.any(kappa * curve.diameter <= EPS_GEOM):
        raise FlatPoint("curvature is not strictly positive; the curve is not a convex oval")
    pts = curve.centers_of_curvature(ts)
    spread = np.ptp(pts, axis=0).max()
    if spread <= 1e3 * curve.eps:
        return CausticGeometry(curve, ts, pts, (), degenerate=True,
                               calibration={"sign": 1, "degenerate": True})
    cal = _calibrate(curve, pts, feet_samples)
    return CausticGeometry(curve, ts, pts, _cusps(curve, ts), calibration=cal)


@dataclass(eq=False)
class CoreRegion:
    """The closed set of points with at least four normals, queried on demand."""

    curve: Curve
    caustic: CausticGeometry
    boundary_tol: float = None
    feet_samples: int = kernel.DEFAULT_SAMPLES

    def __post_init__(self):
        if self.boundary_tol is None:
            self.boundary_tol = self.curve.eps

    def membership(self, q):
        q = np.asarray(q, dtype=float)
        if self.caustic.degenerate:
            d = np.hypot(*(q - self.caustic.center))
            return "inside" if d <= 1e3 * self.curve.eps else "outside"
        if self.caustic.distance(q) <= self.boundary_tol:
            return "boundary"
        i = self.caustic.winding(q)
        try:
            n = kernel.normal_count(self.curve, q, self.feet_samples)
        except OnCaustic:
            return "boundary"
        if n != 2 * i + 2:
            raise LemmaViolation(f"n={n}, i={i} at {tuple(q)}")
        return "inside" if i != 0 else "outside"

    def contains(self, q):
        return self.membership(q) != "outside"


def core_region(curve: Curve, caustic: CausticGeometry = None, **kw) -> CoreRegion:
    return CoreRegion(curve, caustic or compute_caustic(curve), **kw)


def core_membership(curve: Curve, caustic: CausticGeometry, q, boundary_tol=None) -> str:
    return CoreRegion(curve, caustic, boundary_tol).membership(q)


@dataclass(frozen=True, eq=False)
class Partition:
    """Core subregions labelled by sign vectors over the double-normal lines."""

    lines: tuple
    labels: tuple  # sign vectors observed on a grid inside the core
    outline: np.ndarray = None  # curve polyline when the curve itself also cuts

    def label(self, q):
        lab = tuple(dn.side(q) for dn in self.lines)
        if self.outline is None:
            return lab
        try:
            inside = kernel.winding_index(self.outline, q) != 0
        except OnCurve:
            return lab + (0,)
        return lab + (1 if inside else -1,)


def double_normal_partition(curve: Curve, core: CoreRegion, grid: int = 41,
                            lines=None, split_by_curve: bool = False) -> Partition:
    """Label the core by which side of each double-normal line a point lies on.

    Where the core reaches outside the curve, an orthotricenter crossing the
    curve coincides with one of its feet and the other two charges vanish
    together, so charge signs also change across the curve.
    ``split_by_curve`` appends the inside/outside side to every label.
    """
    if lines is None:
        lines = kernel.double_normals(curve)
    lines = tuple(lines)
    outline = curve.position(curve.sample_parameters(4096)) if split_by_curve else None
    part = Partition(lines, (), outline)
    pts = core.caustic.points
    lo, hi = pts.min(axis=0), pts.max(axis=0)
    seen = set()
    for u, v in itertools.product(np.linspace(0, 1, grid), repeat=2):
        q = lo + (hi - lo) * np.array([u, v])
        lab = part.label(q)
        if 0 in lab or lab in seen:
            continue
        try:
            if core.membership(q) == "inside":
                seen.add(lab)
        except LemmaViolation:
            continue
    return Partition(lines, tuple(sorted(seen)), outline)


def caustic_csv(caustic: CausticGeometry) -> str:
    rows = ["t,cx,cy"]
    for t, (x, y) in zip(caustic.t, caustic.points):
        rows.append(f"{t:.12g},{x:.12g},{y:.12g}")
    return "\n".join(rows) + "\n"
