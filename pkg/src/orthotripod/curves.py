"""Parametric plane curves.

Every curve exposes vectorised position and derivative evaluation plus the
derived frame quantities (unit tangent, inward unit normal, signed
curvature).  Closed curves are periodic on ``[0, 2*pi)`` and run
counterclockwise, so the left normal ``N = rot90(T)`` points inward and the
curvature of a convex oval is positive.

The parameter does not need to be arclength: all downstream formulas only use
positions and unit tangents.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from functools import cached_property

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.spatial.distance import pdist

from .errors import ConfigError, FlatPoint, NonRegularPoint

TWO_PI = 2.0 * math.pi

# global geometric tolerance, relative to the curve diameter
EPS_GEOM = 1e-9


def rot90(v):
    """Rotate vectors (last axis of length 2) by +90 degrees."""
    v = np.asarray(v, dtype=float)
    return np.stack([-v[..., 1], v[..., 0]], axis=-1)


def cross2(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., 0] * v[..., 1] - u[..., 1] * v[..., 0]


@dataclass(frozen=True, eq=False)
class CurvePoint:
    """A point of a curve together with its Frenet data."""

    t: float
    p: np.ndarray
    T: np.ndarray
    N: np.ndarray
    kappa: float
    speed: float  # |X'(t)| in the curve's own parameter

    def __repr__(self):
        return (f"CurvePoint(t={self.t:.6g}, p=({self.p[0]:.6g}, {self.p[1]:.6g}), "
                f"kappa={self.kappa:.6g})")


def make_point(p, T, t=0.0, kappa=0.0, speed=1.0):
    """Build a CurvePoint from a position and a tangent direction.

    Useful for feeding configurations that do not come from a Curve, e.g.
    points on a line with tangents along the line.
    """
    p = np.asarray(p, dtype=float)
    T = np.asarray(T, dtype=float)
    T = T / np.linalg.norm(T)
    return CurvePoint(float(t), p, T, rot90(T), float(kappa), float(speed))


class Curve:
    """Base class; subclasses provide ``_pos`` and optionally ``_d1``/``_d2``."""

    kind = "curve"
    closed = True
    convex_kind = False

    # overridden by dataclass fields in subclasses
    derivative_mode = "analytic"
    h = 1e-5

    # -- parameter domain -------------------------------------------------
    @property
    def domain(self):
        return (0.0, TWO_PI)

    @property
    def period(self):
        lo, hi = self.domain
        return hi - lo

    def wrap(self, t):
        t = np.asarray(t, dtype=float)
        if self.closed:
            return np.mod(t, TWO_PI)
        return t

    # -- raw geometry -------------------------------------------------------
    def _pos(self, t):
        raise NotImplementedError

    def _d1(self, t):
        raise NotImplementedError

    def _d2(self, t):
        raise NotImplementedError

    @property
    def fd_step(self):
        return self.h * self.period

    def position(self, t):
        return self._pos(self.wrap(t))

    def derivatives(self, t):
        """Return ``(X, X', X'')`` at parameter(s) ``t``, each of shape (..., 2)."""
        t = self.wrap(t)
        x = self._pos(t)
        if self.derivative_mode == "analytic":
            return x, self._d1(t), self._d2(t)
        H = self.fd_step
        xp = self._pos(t + H)
        xm = self._pos(t - H)
        return x, (xp - xm) / (2 * H), (xp - 2 * x + xm) / (H * H)

    def frame(self, t):
        """Vectorised ``(X, T, N, kappa, speed)``; no regularity checks."""
        x, d1, d2 = self.derivatives(t)
        speed = np.hypot(d1[..., 0], d1[..., 1])
        T = d1 / speed[..., None]
        kappa = cross2(d1, d2) / speed**3
        return x, T, rot90(T), kappa, speed

    def curvature(self, t):
        return self.frame(t)[3]

    # -- pointwise API ------------------------------------------------------
    def eval(self, t) -> CurvePoint:
        t = float(t)
        if not self.closed:
            lo, hi = self.domain
            slack = 1e-12 * (hi - lo)
            if t < lo - slack or t > hi + slack:
                raise ValueError(f"t={t} outside arc domain {self.domain}")
        x, d1, d2 = self.derivatives(t)
        speed = float(np.hypot(*d1))
        if speed <= EPS_GEOM * self.diameter:
            raise NonRegularPoint(f"|X'({t})| = {speed:g}")
        T = d1 / speed
        kappa = float(cross2(d1, d2)) / speed**3
        return CurvePoint(float(self.wrap(t)), x, T, rot90(T), kappa, speed)

    def center_of_curvature(self, t):
        q = self.eval(t)
        if abs(q.kappa) * self.diameter <= EPS_GEOM:
            raise FlatPoint(f"curvature vanishes at t={t}")
        return q.p + q.N / q.kappa

    def centers_of_curvature(self, t):
        x, _, N, kappa, _ = self.frame(t)
        if np.any(np.abs(kappa) * self.diameter <= EPS_GEOM):
            raise FlatPoint("curvature vanishes on the sample grid")
        return x + N / kappa[..., None]

    def curvature_derivative(self, t):
        """d(kappa)/dt by central differences of the curvature."""
        t = np.asarray(t, dtype=float)
        step = (1e-4 if self.derivative_mode == "analytic" else 1e-3) * self.period
        return (self.curvature(t + step) - self.curvature(t - step)) / (2 * step)

    # -- global properties --------------------------------------------------
    def sample_parameters(self, n):
        lo, hi = self.domain
        if self.closed:
            return lo + (hi - lo) * np.arange(n) / n
        return np.linspace(lo, hi, n)

    @cached_property
    def diameter(self):
        pts = self._pos(self.wrap(self.sample_parameters(512)))
        return float(pdist(pts).max())

    @property
    def eps(self):
        """Absolute geometric tolerance for this curve."""
        return EPS_GEOM * self.diameter

    def is_regular(self, n=4096):
        _, d1, _ = self.derivatives(self.sample_parameters(n))
        return bool(np.all(np.hypot(d1[:, 0], d1[:, 1]) > self.eps))

    def is_convex(self, n=4096):
        """Closed, counterclockwise, with strictly positive curvature on a dense grid."""
        if not self.closed:
            return False
        return bool(np.all(self.curvature(self.sample_parameters(n)) > 0))

    def with_finite_differences(self, h=1e-5):
        """Copy of this curve that differentiates numerically with step ``h * period``."""
        return replace(self, derivative_mode="fd", h=h)

    def describe(self):
        raise NotImplementedError


@dataclass(frozen=True)
class Circle(Curve):
    r: float = 1.0
    derivative_mode: str = "analytic"
    h: float = 1e-5

    kind = "circle"
    convex_kind = True

    def __post_init__(self):
        if not self.r > 0:
            raise ConfigError("circle radius must be positive")

    def _pos(self, t):
        return self.r * np.stack([np.cos(t), np.sin(t)], axis=-1)

    def _d1(self, t):
        return self.r * np.stack([-np.sin(t), np.cos(t)], axis=-1)

    def _d2(self, t):
        return -self._pos(t)

    def curvature_derivative(self, t):
        if self.derivative_mode != "analytic":
            return super().curvature_derivative(t)
        return np.zeros_like(np.asarray(t, dtype=float))

    def describe(self):
        return f"circle:{self.r:g}"


@dataclass(frozen=True)
class Ellipse(Curve):
    a: float = 2.0
    b: float = 1.0
    derivative_mode: str = "analytic"
    h: float = 1e-5

    kind = "ellipse"
    convex_kind = True

    def __post_init__(self):
        if not (self.a > 0 and self.b > 0):
            raise ConfigError("ellipse semi-axes must be positive")

    def _pos(self, t):
        return np.stack([self.a * np.cos(t), self.b * np.sin(t)], axis=-1)

    def _d1(self, t):
        return np.stack([-self.a * np.sin(t), self.b * np.cos(t)], axis=-1)

    def _d2(self, t):
        return -self._pos(t)

    def curvature_derivative(self, t):
        if self.derivative_mode != "analytic":
            return super().curvature_derivative(t)
        a, b = self.a, self.b
        t = np.asarray(t, dtype=float)
        s, c = np.sin(t), np.cos(t)
        w = a * a * s * s + b * b * c * c
        return -3.0 * a * b * (a * a - b * b) * s * c * w**-2.5

    def describe(self):
        return f"ellipse:{self.a:g},{self.b:g}"


@dataclass(frozen=True)
class ParabolaArc(Curve):
    """The arc ``(t, c t^2)`` for ``t`` in ``t_range``."""

    c: float = 1.0
    t_range: tuple = (-2.0, 2.0)
    derivative_mode: str = "analytic"
    h: float = 1e-5

    kind = "parabola_arc"
    closed = False

    def __post_init__(self):
        if self.c == 0:
            raise ConfigError("parabola coefficient must be nonzero")
        lo, hi = self.t_range
        if not hi > lo:
            raise ConfigError("parabola t_range must be increasing")
        object.__setattr__(self, "t_range", (float(lo), float(hi)))

    @property
    def domain(self):
        return self.t_range

    def _pos(self, t):
        return np.stack([t, self.c * t * t], axis=-1)

    def _d1(self, t):
        return np.stack([np.ones_like(t), 2 * self.c * t], axis=-1)

    def _d2(self, t):
        return np.stack([np.zeros_like(t), np.full_like(t, 2 * self.c)], axis=-1)

    def describe(self):
        return f"parabola:{self.c:g},{self.t_range[0]:g},{self.t_range[1]:g}"


@dataclass(frozen=True)
class FourierOval(Curve):
    """Oval given by a trigonometric support function.

    ``h(theta) = sum_k cos[k] cos(k theta) + sin[k] sin(k theta)`` and
    ``X = h u + h' u'`` with ``u = (cos theta, sin theta)`` the outward
    normal.  The radius of curvature is ``h + h''``; the curve is convex iff it
    stays positive.  Order-1 terms only translate the curve.
    """

    cos: tuple = (1.0,)
    sin: tuple = ()
    derivative_mode: str = "analytic"
    h: float = 1e-5

    kind = "fourier_oval"
    convex_kind = True

    def __post_init__(self):
        if not self.cos or self.cos[0] <= 0:
            raise ConfigError("fourier oval needs a positive constant term")
        object.__setattr__(self, "cos", tuple(float(v) for v in self.cos))
        object.__setattr__(self, "sin", tuple(float(v) for v in self.sin))

    def _support(self, t, order):
        """Return the ``order``-th derivative of the support function."""
        t = np.asarray(t, dtype=float)
        out = np.zeros_like(t)
        for k, ak in enumerate(self.cos):
            out = out + ak * _trig_deriv(np.cos, k, t, order)
        for k, bk in enumerate(self.sin):
            if k:
                out = out + bk * _trig_deriv(np.sin, k, t, order)
        return out

    def radius_of_curvature(self, t):
        return self._support(t, 0) + self._support(t, 2)

    def _pos(self, t):
        h0, h1 = self._support(t, 0), self._support(t, 1)
        c, s = np.cos(t), np.sin(t)
        return np.stack([h0 * c - h1 * s, h0 * s + h1 * c], axis=-1)

    def _d1(self, t):
        rho = self.radius_of_curvature(t)
        return rho[..., None] * np.stack([-np.sin(t), np.cos(t)], axis=-1)

    def _d2(self, t):
        rho = self.radius_of_curvature(t)
        drho = self._support(t, 1) + self._support(t, 3)
        c, s = np.cos(t), np.sin(t)
        return np.stack([-drho * s - rho * c, drho * c - rho * s], axis=-1)

    def describe(self):
        cs = ",".join(f"{v:g}" for v in self.cos)
        sn = ",".join(f"{v:g}" for v in self.sin)
        return f"fourier:{cs};{sn}"


def _trig_deriv(fn, k, t, order):
    # d^n/dt^n fn(k t) = k^n fn(k t + n pi/2) for fn in {cos, sin}
    return (k ** order) * fn(k * t + order * (math.pi / 2))


@dataclass(frozen=True)
class SampledCurve(Curve):
    """Closed curve through a periodic table of points.

    Points are assigned uniform parameters on ``[0, 2*pi)`` and interpolated
    with a periodic cubic spline; derivatives are central differences.
    """

    points: tuple = ()
    derivative_mode: str = "fd"
    h: float = 1e-5

    kind = "sampled"

    def __post_init__(self):
        pts = tuple((float(x), float(y)) for x, y in self.points)
        if len(pts) < 4:
            raise ConfigError("sampled curve needs at least 4 points")
        object.__setattr__(self, "points", pts)
        if self.derivative_mode != "fd":
            raise ConfigError("sampled curves only support finite differences")

    @cached_property
    def _spline(self):
        pts = np.array(self.points + (self.points[0],))
        t = TWO_PI * np.arange(len(pts)) / (len(pts) - 1)
        return CubicSpline(t, pts, bc_type="periodic")

    def _pos(self, t):
        return self._spline(np.mod(t, TWO_PI))

    def describe(self):
        return f"sampled:{len(self.points)}"


def evaluate(curve: Curve, t) -> CurvePoint:
    return curve.eval(t)


def center_of_curvature(curve: Curve, t):
    return curve.center_of_curvature(t)


def curvature_derivative(curve: Curve, t):
    return float(curve.curvature_derivative(float(t)))
