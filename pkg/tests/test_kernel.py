import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orthotripod import Circle, Ellipse, FourierOval
from orthotripod import kernel
from orthotripod.caustic import compute_caustic
from orthotripod.errors import ConstantWidthSuspected, DegenerateCenter, OnCaustic, OnCurve

E = Ellipse(2, 1)


def g(curve, q, t):
    p = curve.eval(t)
    return float(np.dot(np.asarray(q) - p.p, p.T))


def test_feet_at_origin_are_vertices():
    feet = kernel.normal_feet(E, (0, 0))
    assert np.allclose([f.t for f in feet], [0, math.pi / 2, math.pi, 3 * math.pi / 2], atol=1e-9)
    assert [f.distance for f in feet] == pytest.approx([2, 1, 2, 1])


def test_far_point_has_two_feet():
    assert len(kernel.normal_feet(E, (10, 10))) == 2
    assert kernel.normal_count(E, (5, 0)) == 2


def test_core_point_has_four_feet():
    assert kernel.normal_count(E, (0.1, 0.05)) == 4
    assert kernel.normal_count(E, (0, 0)) == 4


def test_circle_center_degenerate():
    with pytest.raises(DegenerateCenter):
        kernel.normal_feet(Circle(1), (0, 0))


def test_feet_satisfy_root_condition():
    q = (0.3, -0.2)
    for f in kernel.normal_feet(E, q):
        assert abs(g(E, q, f.t)) < 1e-9 * E.diameter
        assert f.distance == pytest.approx(np.hypot(*(np.array(q) - f.foot.p)))


def test_caustic_point_is_fold():
    c = E.center_of_curvature(0.7)
    feet = kernel.normal_feet(E, c)
    assert sorted(f.multiplicity for f in feet) == [1, 1, 2]
    with pytest.raises(OnCaustic):
        kernel.normal_count(E, c)


@settings(max_examples=80, deadline=None)
@given(st.floats(-4, 4), st.floats(-4, 4))
def test_feet_match_dense_sign_changes(x, y):
    try:
        n = kernel.normal_count(E, (x, y))
    except OnCaustic:
        return
    assert n % 2 == 0
    assert n == kernel.brute_force_sign_changes(E, (x, y), 16 * kernel.DEFAULT_SAMPLES)


def test_batch_matches_scalar():
    rng = np.random.default_rng(3)
    qs = rng.uniform(-2, 2, size=(60, 2))
    batch = kernel.normal_feet_batch(E, qs)
    for q, roots in zip(qs, batch):
        scalar = [f.t for f in kernel.normal_feet(E, q)]
        assert np.allclose(np.sort(roots), scalar, atol=1e-8)


def test_winding_simple_square():
    sq = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], float)
    assert kernel.winding_index(sq, (0.5, 0.5)) == 1
    assert kernel.winding_index(sq[::-1], (0.5, 0.5)) == -1
    assert kernel.winding_index(sq, (2, 0.5)) == 0
    # ray through a vertex
    assert kernel.winding_index(sq, (0.5, 1.0 - 1e-17)) in (0, 1)
    with pytest.raises(OnCurve):
        kernel.winding_index(sq, (0.5, 0.0), tol=1e-9)


def test_winding_on_ellipse_caustic():
    ca = compute_caustic(E)
    assert ca.winding((0, 0)) == 1
    assert ca.winding((5, 0)) == 0
    assert ca.winding((100, -40)) == 0
    assert ca.calibration["sign"] in (1, -1)


def test_winding_double_loop():
    th = np.linspace(0, 4 * np.pi, 400, endpoint=False)
    loop = np.column_stack([np.cos(th), np.sin(th)])
    assert kernel.winding_index(loop, (0.1, 0.2)) == 2


def test_ellipse_double_normals_are_axes():
    dns = kernel.double_normals(E)
    assert len(dns) == 2
    got = sorted(tuple(round(v, 9) for v in dn.params) for dn in dns)
    assert np.allclose(got, [(0, math.pi), (math.pi / 2, 3 * math.pi / 2)], atol=1e-9)
    for dn in dns:
        a, b = map(np.array, dn.chord)
        for t in dn.params:
            assert abs(np.dot(a - b, E.eval(t).T)) < 1e-9


def test_double_normal_swap_symmetry():
    # the defining system is symmetric in (s, t)
    for dn in kernel.double_normals(E):
        r1 = kernel._chord_residual(E, np.array(dn.s), np.array(dn.t))
        r2 = kernel._chord_residual(E, np.array(dn.t), np.array(dn.s))
        assert np.allclose(np.abs(r1), np.abs(r2)[::-1], atol=1e-12)


@pytest.mark.parametrize("curve", [Circle(1.0), FourierOval((1.0, 0, 0, 0.1))], ids=["circle", "reuleaux-like"])
def test_constant_width_suspected(curve):
    with pytest.raises(ConstantWidthSuspected):
        kernel.double_normals(curve)


def test_perturbed_ellipse_has_double_normals():
    f = FourierOval((1.0, 0.0, 0.25, 0.02), (0.0, 0.0, 0.05, 0.01))
    dns = kernel.double_normals(f)
    assert len(dns) >= 2
    for dn in dns:
        a, b = map(np.array, dn.chord)
        u = (a - b) / np.hypot(*(a - b))
        assert abs(np.dot(u, f.eval(dn.s).T)) < 1e-9
        assert abs(np.dot(u, f.eval(dn.t).T)) < 1e-9
