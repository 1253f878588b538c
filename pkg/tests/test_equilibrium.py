import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from orthotripod import Circle, Ellipse, ParabolaArc, make_point
from orthotripod import equilibrium as eq
from orthotripod.caustic import compute_caustic
from orthotripod.errors import (CoincidentPoints, NotInCore, NotOrthotripod, ParallelNormals,
                                RankDeficient)

E = Ellipse(2, 1)
C = Circle(1)


def circle_triple(*angles):
    return [C.eval(a) for a in angles]


def collinear(a, b):
    return [make_point((0, 0), (1, 0), 0), make_point((a, 0), (1, 0), 1), make_point((a + b, 0), (1, 0), 2)]


EQUI = circle_triple(0, 2 * math.pi / 3, 4 * math.pi / 3)


def test_matrix_shape_and_symmetry():
    A = eq.interaction_matrix(EQUI)
    assert np.all(np.diag(A) == 0)
    assert A[0, 1] == pytest.approx(-A[0, 2])
    assert A[1, 2] == pytest.approx(-A[1, 0])


def test_matrix_law_rescaling():
    pts = [E.eval(t) for t in (0.3, 2.0, 4.1)]
    Ac, Ah = eq.interaction_matrix(pts, eq.COULOMB), eq.interaction_matrix(pts, eq.HOOKE)
    for i, j in itertools.permutations(range(3), 2):
        d = np.hypot(*(pts[i].p - pts[j].p))
        assert Ah[i, j] == pytest.approx(Ac[i, j] * d ** 3)


def test_collinear_matrix_signs():
    # entries <p_i - p_j, T_i> follow the order of the points on the line
    A = eq.interaction_matrix(collinear(1, 2), None)
    assert A[0, 1] == -1 and A[0, 2] == -3
    assert A[1, 0] == 1 and A[1, 2] == -2
    assert A[2, 0] == 3 and A[2, 1] == 2


def test_coincident_points():
    p = E.eval(1.0)
    with pytest.raises(CoincidentPoints):
        eq.interaction_matrix([p, p, E.eval(2.0)])


def test_ceva_residual_values():
    assert eq.ceva_residual(EQUI) == pytest.approx(0, abs=1e-14)
    pts = [E.eval(t) for t in (0.3, 2.0, 4.1)]
    r = eq.ceva_residual(pts)
    assert abs(r) > 1e-2
    # the pairwise normal intersections differ for a non-orthotripod
    def meet(p, q):
        s = np.linalg.solve(np.column_stack([p.N, -q.N]), q.p - p.p)
        return p.p + s[0] * p.N
    assert np.hypot(*(meet(pts[0], pts[1]) - meet(pts[0], pts[2]))) > 1e-2


def test_orthotripod_from_center():
    q = np.array([0.1, 0.05])
    tps = eq.tripods_from_center(E, q)
    assert len(tps) == 4
    for tp in tps:
        ok, center = eq.is_orthotripod(tp.points)
        assert ok
        assert np.allclose(center, q, atol=1e-9)
        assert abs(tp.ceva_residual) < 1e-12


def test_circle_equilateral():
    ok, center = eq.is_orthotripod(EQUI)
    assert ok and np.allclose(center, 0, atol=1e-12)
    assert eq.balancing_charges(EQUI).close_to((1, 1, 1), 1e-12)
    assert eq.positive_charge_test(EQUI)


def test_perturbed_triple_rejected():
    tps = eq.tripods_from_center(E, (0.1, 0.05))
    ts = list(tps[0].params)
    ts[0] += 0.1
    pts = [E.eval(t) for t in ts]
    assert not eq.is_orthotripod(pts)[0]
    with pytest.raises(NotOrthotripod):
        eq.balancing_charges(pts)
    with pytest.raises(NotOrthotripod):
        eq.positive_charge_test(pts)


def test_collinear_charges():
    q = eq.balancing_charges(collinear(1, 1))
    assert q.close_to((1, -0.25, 1), 1e-12)
    assert not eq.positive_charge_test(collinear(1, 1))
    with pytest.raises(ParallelNormals):
        eq.is_orthotripod(collinear(1, 1))


@settings(max_examples=50, deadline=None)
@given(st.floats(0.5, 3), st.floats(0.5, 3))
def test_collinear_formula(a, b):
    q = eq.balancing_charges(collinear(a, b))
    want = eq.ChargeTriple.from_vector([1 / b ** 2, -1 / (a + b) ** 2, 1 / a ** 2])
    assert q.close_to(want.q, 1e-9)
    assert q.sign_pattern != "+++"


def test_rank_deficient():
    # two coincident tangent directions with a shared double normal: rank one
    pts = [make_point((0, 0), (0, 1), 0), make_point((1, 0), (0, 1), 1), make_point((2, 0), (0, 1), 2)]
    with pytest.raises(RankDeficient):
        eq.balancing_charges(pts)


@pytest.mark.parametrize("c,t", [(0.5, 0.1), (1, 0.5), (1, 1), (2, 1)])
def test_parabola_symmetric_triple(c, t):
    # derived kernel: q2/q1 = -(1 + c^2 t^2)^{3/2} / (4 (1 + 2 c^2 t^2)); symbolic check
    P = ParabolaArc(c, (-2, 2))
    pts = [P.eval(-t), P.eval(0.0), P.eval(t)]
    q = eq.balancing_charges(pts).as_array()
    ratio = q[1] / q[0]
    u = (c * t) ** 2
    assert ratio == pytest.approx(-(1 + u) ** 1.5 / (4 * (1 + 2 * u)), rel=1e-10)
    assert not eq.positive_charge_test(pts)


FROZEN_PARABOLA = {(0.5, 0.1): -0.24968963750605774, (1, 1): -0.23570226039551584,
                   (2, 1): -0.31056499687497079}


@pytest.mark.parametrize("key", sorted(FROZEN_PARABOLA))
def test_parabola_frozen(key):
    c, t = key
    P = ParabolaArc(c, (-2, 2))
    q = eq.balancing_charges([P.eval(-t), P.eval(0.0), P.eval(t)]).as_array()
    assert q[1] / q[0] == pytest.approx(FROZEN_PARABOLA[key], rel=1e-12)


def test_circle_obtuse():
    assert not eq.positive_charge_test(circle_triple(0, 0.5, 1.0))
    assert eq.positive_charge_test(circle_triple(0.1, 2.2, 4.0))


def test_tangential_forces_equilateral():
    assert np.allclose(eq.tangential_forces(EQUI, (1, 1, 1)), 0, atol=1e-14)
    assert np.abs(eq.tangential_forces(EQUI, (1, 1, 2))).max() > 0.1


def test_potential_values():
    assert eq.potential(EQUI, (1, 1, 1)) == pytest.approx(-math.sqrt(3))
    pts = [E.eval(t) for t in (0.3, 2.0, 4.1)]
    d13 = np.hypot(*(pts[0].p - pts[2].p))
    assert eq.potential(pts, (1, 0, 1)) == pytest.approx(-1 / d13)


@settings(max_examples=60, deadline=None)
@given(st.lists(st.floats(0, 2 * math.pi), min_size=3, max_size=3),
       st.lists(st.floats(-1, 1), min_size=3, max_size=3))
def test_gradient_relation(ts, q):
    pts = [E.eval(t) for t in ts]
    if min(np.hypot(*(a.p - b.p)) for a, b in itertools.combinations(pts, 2)) < 0.1:
        return
    F = eq.tangential_forces(pts, q) * np.array([p.speed for p in pts])
    h = 1e-6
    for i in range(3):
        tp, tm = list(ts), list(ts)
        tp[i] += h
        tm[i] -= h
        g = (eq.potential([E.eval(t) for t in tp], q) - eq.potential([E.eval(t) for t in tm], q)) / (2 * h)
        assert g == pytest.approx(F[i], abs=1e-6 * max(np.abs(F).max(), 1e-12))


def test_closed_forms_agree():
    for tp in eq.tripods_from_center(E, (0.2, -0.1)):
        forms, product = eq.closed_form_charges(eq.interaction_matrix(tp.points))
        assert product == pytest.approx(-1, abs=1e-9)
        for f in forms:
            assert eq.ChargeTriple.from_vector(f).close_to(tp.charges.q, 1e-9)


def test_law_independence_and_values():
    tp = eq.tripods_from_center(E, (0.2, -0.1))[0]
    qs = {name: tp.charges_for(law) for name, law in eq.LAWS.items()}
    for name, law in eq.LAWS.items():
        assert eq.ceva_decision(tp.points, law)
        assert np.abs(tp.residual(law)).max() < 1e-8 * eq.force_scale(tp.points, qs[name], law)
    assert not qs["coulomb"].close_to(qs["hooke"].q, 1e-3)


def test_positive_test_matches_signs():
    rng = np.random.default_rng(2)
    ca = compute_caustic(E)
    done = 0
    while done < 30:
        q = rng.uniform([-1.4, -2.8], [1.4, 2.8])
        if ca.winding(q, tol=1e-3) == 0:
            continue
        for tp in eq.tripods_from_center(E, q):
            assert eq.positive_charge_test(tp.points) == tp.positive
        done += 1


def test_origin_lies_on_both_double_normals():
    tps = eq.tripods_from_center(E, (0, 0))
    assert len(tps) == 4
    for tp in tps:
        assert min(map(abs, tp.charges)) < 1e-9
        assert not eq.positive_charge_test(tp.points)


def test_fold_point_single_orthotripod():
    c = E.center_of_curvature(0.7)
    assert len(eq.tripods_from_center(E, c)) == 1


def test_outside_core():
    with pytest.raises(NotInCore):
        eq.tripods_from_center(E, (5, 0))


def test_charge_scan():
    tps = eq.tripods_from_center(E, (0.1, 0.05))
    hits = eq.filter_by_charges(tps, tps[1].charges.q, 1e-9)
    assert tps[1] in hits


def test_record_format():
    tp = eq.tripods_from_center(E, (0.1, 0.05))[0]
    rec = eq.tripod_record(tp)
    assert tuple(rec) == eq.RECORD_FIELDS
    assert rec["signs"] == tp.sign_pattern
    assert rec["force_residual"] < 1e-12
