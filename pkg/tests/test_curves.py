import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orthotripod import (Circle, Ellipse, FourierOval, ParabolaArc, SampledCurve,
                         center_of_curvature, curvature_derivative, evaluate)
from orthotripod.errors import ConfigError, FlatPoint, NonRegularPoint

BUILTIN = [Circle(2.0), Ellipse(2.0, 1.0), ParabolaArc(1.0), FourierOval((1.0, 0.0, 0.1, 0.03), (0.0, 0.0, 0.0, 0.02))]


def test_circle_point():
    p = evaluate(Circle(2.0), 0.0)
    assert np.allclose(p.p, [2, 0])
    assert p.kappa == pytest.approx(0.5)


def test_ellipse_vertex_curvature():
    p = evaluate(Ellipse(2, 1), 0.0)
    assert np.allclose(p.p, [2, 0])
    assert p.kappa == pytest.approx(2.0)


def test_parabola_vertex():
    p = evaluate(ParabolaArc(1.0), 0.0)
    assert np.allclose(p.p, [0, 0])
    assert p.kappa == pytest.approx(2.0)
    # y = x^2 at x = 0.7: 2 / (1 + 4 x^2)^1.5, frozen from a symbolic evaluation
    assert evaluate(ParabolaArc(1.0), 0.7).kappa == pytest.approx(0.39272850926965973, rel=1e-12)


def test_parabola_domain_enforced():
    with pytest.raises(ValueError):
        ParabolaArc(1.0, (-1, 1)).eval(1.5)


@pytest.mark.parametrize("t", [0.0, 1.3, 4.0])
def test_circle_evolute_is_center(t):
    assert np.allclose(center_of_curvature(Circle(2.0), t), [0, 0], atol=1e-12)


def test_ellipse_evolute_vertices():
    e = Ellipse(2, 1)
    assert np.allclose(center_of_curvature(e, 0.0), [1.5, 0])
    assert np.allclose(center_of_curvature(e, math.pi / 2), [0, -3])


def test_curvature_derivative():
    assert curvature_derivative(Circle(3.0), 0.4) == pytest.approx(0, abs=1e-9)
    e = Ellipse(2, 1)
    assert curvature_derivative(e, 0.0) == pytest.approx(0, abs=1e-8)
    # -36 sqrt(10) / 125 from differentiating the closed-form curvature symbolically
    assert curvature_derivative(e, math.pi / 4) == pytest.approx(-36 * math.sqrt(10) / 125, rel=1e-6)


@pytest.mark.parametrize("curve", BUILTIN, ids=lambda c: c.kind)
def test_frame_orthonormal(curve):
    rng = np.random.default_rng(1)
    for t in rng.uniform(*curve.domain, size=1000):
        p = curve.eval(t)
        assert abs(np.dot(p.T, p.N)) < 1e-9
        assert abs(np.hypot(*p.T) - 1) < 1e-9
        assert abs(np.hypot(*p.N) - 1) < 1e-9
        assert p.T[0] * p.N[1] - p.T[1] * p.N[0] == pytest.approx(1.0)


@pytest.mark.parametrize("curve", BUILTIN, ids=lambda c: c.kind)
def test_finite_difference_mode_agrees(curve):
    fd = curve.with_finite_differences(1e-5)
    lo, hi = curve.domain
    t = np.linspace(lo + 0.01, hi - 0.01, 200)
    _, T1, _, k1, _ = curve.frame(t)
    _, T2, _, k2, _ = fd.frame(t)
    assert np.abs(T1 - T2).max() < 1e-6
    assert np.abs(k1 - k2).max() < 1e-6 * max(1, np.abs(k1).max())


@pytest.mark.parametrize("curve", [c for c in BUILTIN if c.closed], ids=lambda c: c.kind)
def test_periodic_and_convex(curve):
    t = np.linspace(0, 2 * np.pi, 50)
    assert np.allclose(curve.position(t), curve.position(t + 2 * np.pi))
    assert curve.is_convex()
    assert curve.is_regular()


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0.5, 3), st.floats(0.5, 3))
def test_evolute_is_envelope_of_normals(t, a, b):
    # neighbouring normals meet near the centre of curvature
    e = Ellipse(a, b)
    d = 1e-4
    p, q = e.eval(t - d), e.eval(t + d)
    s = np.linalg.solve(np.column_stack([p.N, -q.N]), q.p - p.p)
    meet = p.p + s[0] * p.N
    assert np.hypot(*(meet - e.center_of_curvature(t))) < 1e-2 * e.diameter


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 2 * math.pi), st.floats(0.5, 3), st.floats(0.5, 3))
def test_ellipse_curvature_closed_form(t, a, b):
    k = a * b / (a * a * math.sin(t) ** 2 + b * b * math.cos(t) ** 2) ** 1.5
    assert Ellipse(a, b).eval(t).kappa == pytest.approx(k, rel=1e-12)


def test_fourier_oval_matches_ellipse_like_support():
    # h = 1 gives the unit circle
    c = FourierOval((1.0,))
    t = np.linspace(0, 6, 7)
    assert np.allclose(np.hypot(*c.position(t).T), 1)
    assert np.allclose(c.curvature(t), 1)


def test_sampled_curve_approximates_circle():
    th = np.linspace(0, 2 * np.pi, 200, endpoint=False)
    s = SampledCurve(tuple(zip(np.cos(th), np.sin(th))))
    assert s.derivative_mode == "fd"
    k = s.curvature(np.linspace(0, 6, 30))
    assert np.allclose(k, 1, atol=1e-3)


def test_bad_curves_rejected():
    with pytest.raises(ConfigError):
        Circle(0)
    with pytest.raises(ConfigError):
        Ellipse(-1, 1)
    with pytest.raises(ConfigError):
        FourierOval((0.0,))
    with pytest.raises(ConfigError):
        SampledCurve(((0, 0), (1, 0)))


def test_flat_and_singular_points():
    # h = 1 + 1/3 cos 2t has h + h'' = 1 - cos 2t, vanishing at t = 0
    flat = FourierOval((1.0, 0.0, 1 / 3))
    with pytest.raises((FlatPoint, NonRegularPoint)):
        flat.center_of_curvature(0.0)
