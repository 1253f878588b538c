"""Balancing charges for three points on a curve.

Three charged points on a curve are in equilibrium when the net central
force at each point is normal to the curve.  For a triple this is a 3x3
homogeneous linear system in the charges with zero diagonal; it has a
nontrivial solution exactly when its determinant vanishes, which happens
exactly when the three curve normals are concurrent.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernel
from .curves import Curve, CurvePoint, cross2
from .errors import (CoincidentPoints, GeometryError, NotInCore, NotOrthotripod,
                     ParallelNormals, RankDeficient)

EPS_CEVA = 1e-7      # |det| relative to the Hadamard bound of the matrix
EPS_CONC = 1e-7      # line distance relative to the triple's size
ZERO_CHARGE = 1e-9   # normalised charges below this count as zero
FORMS_TOL = 1e-6


@dataclass(frozen=True)
class ForceLaw:
    """Central force ``F_ji = q_i q_j (p_i - p_j) / f(d_ij)``."""

    kind: str
    profile: object = None  # callable d -> f(d) > 0

    def __call__(self, d):
        d = np.asarray(d, dtype=float)
        if self.kind == "coulomb":
            return d**3
        if self.kind == "logarithmic":
            return d**2
        if self.kind == "hooke":
            return np.ones_like(d)
        return np.asarray(self.profile(d), dtype=float)


COULOMB = ForceLaw("coulomb")
HOOKE = ForceLaw("hooke")
LOGARITHMIC = ForceLaw("logarithmic")
LAWS = {"coulomb": COULOMB, "hooke": HOOKE, "logarithmic": LOGARITHMIC}


def law_by_name(name) -> ForceLaw:
    if isinstance(name, ForceLaw):
        return name
    try:
        return LAWS[name]
    except KeyError:
        raise ValueError(f"unknown force law {name!r}") from None


@dataclass(frozen=True)
class ChargeTriple:
    """Projective charges, scaled so the entry of largest magnitude is +1."""

    q: tuple

    @classmethod
    def from_vector(cls, v):
        v = np.asarray(v, dtype=float)
        k = int(np.argmax(np.abs(v)))
        if v[k] == 0:
            raise ValueError("charges cannot all vanish")
        return cls(tuple(float(x) for x in v / v[k]))

    def __iter__(self):
        return iter(self.q)

    def __getitem__(self, i):
        return self.q[i]

    def as_array(self):
        return np.array(self.q)

    @property
    def signs(self):
        return tuple("0" if abs(x) <= ZERO_CHARGE else ("+" if x > 0 else "-") for x in self.q)

    @property
    def sign_pattern(self):
        return "".join(self.signs)

    @property
    def positive(self):
        return self.signs == ("+", "+", "+")

    def close_to(self, other, tol=1e-9):
        return bool(np.max(np.abs(self.as_array() - np.asarray(other, dtype=float))) <= tol)


def _arrays(points):
    if len(points) != 3:
        raise ValueError("exactly three points are required")
    P = np.array([p.p for p in points], dtype=float)
    T = np.array([p.T for p in points], dtype=float)
    return P, T


def _check_distinct(P):
    scale = max(np.abs(P).max(), 1.0)
    for i, j in itertools.combinations(range(3), 2):
        if np.hypot(*(P[i] - P[j])) <= 1e-9 * scale:
            raise CoincidentPoints(f"points {i + 1} and {j + 1} coincide")


def interaction_matrix(points, law: ForceLaw | None = COULOMB):
    """Matrix ``a_ij = <p_i - p_j, T_i> / f(d_ij)`` with zero diagonal.

    ``law=None`` gives the distance-free entries ``<p_i - p_j, T_i>``.
    """
    P, T = _arrays(points)
    _check_distinct(P)
    A = np.zeros((3, 3))
    for i in range(3):
        for j in range(3):
            if i != j:
                d = P[i] - P[j]
                A[i, j] = d @ T[i]
                if law is not None:
                    A[i, j] /= float(law(math.hypot(*d)))
    return A


def ceva_residual(points) -> float:
    """``a12 a23 a31 + a13 a21 a32`` for the distance-free entries; zero iff normals concur."""
    A = interaction_matrix(points, None)
    return float(A[0, 1] * A[1, 2] * A[2, 0] + A[0, 2] * A[1, 0] * A[2, 1])


def relative_determinant(A) -> float:
    """|det A| divided by the product of row norms (Hadamard bound)."""
    bound = float(np.prod(np.linalg.norm(A, axis=1)))
    if bound == 0:
        return 0.0
    det = A[0, 1] * A[1, 2] * A[2, 0] + A[0, 2] * A[1, 0] * A[2, 1]
    return abs(float(det)) / bound


def normals_meeting_point(points):
    """Least-squares common point of the three normal lines and its worst line distance."""
    P, T = _arrays(points)
    M = np.einsum("ki,kj->ij", T, T)
    rhs = np.einsum("ki,kj,kj->i", T, T, P)
    pair = [abs(float(cross2(T[i], T[j]))) for i, j in itertools.combinations(range(3), 2)]
    if max(pair) <= 1e-12:
        raise ParallelNormals("the three normals are parallel")
    x = np.linalg.solve(M, rhs)
    dist = np.abs(np.einsum("ki,ki->k", x[None, :] - P, T))
    return x, float(dist.max())


@dataclass(frozen=True)
class ConcurrencyCheck:
    concurrent: bool
    center: np.ndarray
    ceva_relative: float
    line_distance: float
    ceva_ok: bool
    lines_ok: bool

    @property
    def agree(self):
        return self.ceva_ok == self.lines_ok


def concurrency(points, eps_ceva=EPS_CEVA, eps_conc=EPS_CONC) -> ConcurrencyCheck:
    """Run both concurrency tests: the determinant (Ceva) test and the line-meeting test."""
    P, _ = _arrays(points)
    rel = relative_determinant(interaction_matrix(points, None))
    center, dist = normals_meeting_point(points)
    size = max(np.hypot(*(P[i] - P[j])) for i, j in itertools.combinations(range(3), 2))
    ceva_ok = rel <= eps_ceva
    lines_ok = dist <= eps_conc * size
    return ConcurrencyCheck(ceva_ok and lines_ok, center, rel, dist, ceva_ok, lines_ok)


def is_orthotripod(points, eps_ceva=EPS_CEVA, eps_conc=EPS_CONC):
    """Return ``(flag, orthotricenter)``; the flag needs both tests to pass."""
    c = concurrency(points, eps_ceva, eps_conc)
    return c.concurrent, c.center


def ceva_decision(points, law: ForceLaw = COULOMB, eps_ceva=EPS_CEVA) -> bool:
    """Concurrency decided from the law-weighted matrix ``a_ij / f(d_ij)``."""
    return relative_determinant(interaction_matrix(points, law_by_name(law))) <= eps_ceva


def closed_form_charges(A):
    """The three ratio formulas for the kernel, or None where a denominator vanishes."""
    scale = np.abs(A).max()
    small = lambda x: abs(x) <= 1e-6 * scale
    out = [None, None, None]
    a12, a13, a21, a23, a31, a32 = A[0, 1], A[0, 2], A[1, 0], A[1, 2], A[2, 0], A[2, 1]
    A1 = None if small(a12) else a13 / a12
    A2 = None if small(a23) else a21 / a23
    A3 = None if small(a31) else a32 / a31
    if A1 is not None and A3 is not None:
        out[0] = np.array([A1 * A3, -A1, 1.0])
    if A3 is not None and A2 is not None:
        out[1] = np.array([-A3, 1.0, A2 * A3])
    if A1 is not None and A2 is not None:
        out[2] = np.array([1.0, A1 * A2, -A2])
    product = A1 * A2 * A3 if None not in (A1, A2, A3) else None
    return out, product


def _kernel_vector(A):
    rows = [(0, 1), (0, 2), (1, 2)]
    crosses = [np.cross(A[i], A[j]) for i, j in rows]
    norms = [np.linalg.norm(c) for c in crosses]
    k = int(np.argmax(norms))
    return crosses[k], norms[k]


def balancing_charges(points, law: ForceLaw = COULOMB, eps_ceva=EPS_CEVA) -> ChargeTriple:
    """Charges putting the triple in equilibrium under ``law``.

    The kernel is taken as the cross product of the two rows spanning the
    largest 2x2 minor, then checked against the closed ratio formulas.
    """
    law = law_by_name(law)
    A = interaction_matrix(points, law)
    if relative_determinant(A) > eps_ceva:
        raise NotOrthotripod("the normals are not concurrent; only zero charges balance")
    v, nv = _kernel_vector(A)
    row = np.linalg.norm(A, axis=1)
    if nv <= 1e-9 * np.sort(row)[-1] * np.sort(row)[-2]:
        raise RankDeficient("interaction matrix has rank below two", _rank_one_pair(A))
    q = ChargeTriple.from_vector(v)
    forms, product = closed_form_charges(A)
    for f in forms:
        if f is not None:
            other = ChargeTriple.from_vector(f)
            if not q.close_to(other.q, FORMS_TOL):
                raise GeometryError(f"closed-form charges {other.q} disagree with kernel {q.q}")
    if product is not None and abs(product + 1.0) > FORMS_TOL:
        raise GeometryError(f"A1*A2*A3 = {product}, expected -1")
    return q


def charges_batch(P, T, law: ForceLaw = COULOMB):
    """Kernel charges for many triples at once.

    ``P`` and ``T`` have shape (n, 3, 2).  Returns normalised charges (n, 3) and
    the relative determinant of each distance-free matrix.  No closed-form
    cross-checks; :func:`balancing_charges` is the checked scalar path.
    """
    law = law_by_name(law)
    P = np.asarray(P, dtype=float)
    T = np.asarray(T, dtype=float)
    D = P[:, :, None, :] - P[:, None, :, :]
    dot = np.einsum("nijk,nik->nij", D, T)
    dist = np.hypot(D[..., 0], D[..., 1])
    f = np.where(dist > 0, law(np.where(dist > 0, dist, 1.0)), 1.0)
    A = dot / f
    rows = [(0, 1), (0, 2), (1, 2)]
    crosses = np.stack([np.cross(A[:, i], A[:, j]) for i, j in rows], axis=1)
    k = np.argmax(np.linalg.norm(crosses, axis=2), axis=1)
    v = crosses[np.arange(len(A)), k]
    m = np.argmax(np.abs(v), axis=1)
    q = v / v[np.arange(len(A)), m][:, None]
    bound = np.prod(np.linalg.norm(dot, axis=2), axis=1)
    det = dot[:, 0, 1] * dot[:, 1, 2] * dot[:, 2, 0] + dot[:, 0, 2] * dot[:, 1, 0] * dot[:, 2, 1]
    rel = np.abs(det) / np.where(bound > 0, bound, 1.0)
    return q, rel


def sign_patterns(q):
    """Vectorised version of :attr:`ChargeTriple.sign_pattern`."""
    sym = np.where(np.abs(q) <= ZERO_CHARGE, "0", np.where(q > 0, "+", "-"))
    return ["".join(r) for r in sym]


def _rank_one_pair(A):
    scale = np.abs(A).max()
    for i, j in itertools.combinations(range(3), 2):
        if abs(A[i, j]) <= 1e-9 * scale and abs(A[j, i]) <= 1e-9 * scale:
            return (i, j)
    return None


def positive_charge_test(points, eps_ceva=EPS_CEVA) -> bool:
    """True iff each normal separates the two triangle edges at its point.

    Equivalent to the balancing charges all having one sign; the two are
    cross-checked.
    """
    A = interaction_matrix(points, None)
    if relative_determinant(A) > eps_ceva:
        raise NotOrthotripod("positivity is only defined for concurrent normals")
    zero = 1e-12 * np.abs(A).max()
    ok = True
    for i in range(3):
        j, k = (i + 1) % 3, (i + 2) % 3
        if abs(A[i, j]) <= zero or abs(A[i, k]) <= zero or np.sign(A[i, j]) == np.sign(A[i, k]):
            ok = False
    q = balancing_charges(points, COULOMB, eps_ceva)
    if q.positive != ok and min(abs(x) for x in q.q) > 1e-6:
        raise GeometryError(f"sign test says {ok} but charges are {q.q}")
    return ok


def _charge_array(charges):
    if isinstance(charges, ChargeTriple):
        return charges.as_array()
    return np.asarray(charges, dtype=float)


def tangential_forces(points, charges, law: ForceLaw = COULOMB):
    """``<F_i, T_i>`` at each point, computed directly from the force law."""
    law = law_by_name(law)
    P, T = _arrays(points)
    _check_distinct(P)
    q = _charge_array(charges)
    out = np.zeros(3)
    for i in range(3):
        F = np.zeros(2)
        for j in range(3):
            if j != i:
                d = P[i] - P[j]
                F += q[i] * q[j] * d / float(law(math.hypot(*d)))
        out[i] = F @ T[i]
    return out


tangential_residual = tangential_forces


def force_scale(points, charges, law: ForceLaw = COULOMB) -> float:
    """Largest sum of pairwise force magnitudes acting on one point."""
    law = law_by_name(law)
    P, _ = _arrays(points)
    q = _charge_array(charges)
    best = 0.0
    for i in range(3):
        s = 0.0
        for j in range(3):
            if j != i:
                d = math.hypot(*(P[i] - P[j]))
                s += abs(q[i] * q[j]) * d / float(law(d))
        best = max(best, s)
    return best


def potential(points, charges) -> float:
    """Coulomb energy ``-sum_{i<j} q_i q_j / d_ij``."""
    P, _ = _arrays(points)
    _check_distinct(P)
    q = _charge_array(charges)
    return -sum(q[i] * q[j] / math.hypot(*(P[i] - P[j]))
                for i, j in itertools.combinations(range(3), 2))


@dataclass(frozen=True, eq=False)
class Orthotripod:
    points: tuple            # three CurvePoints sorted by parameter
    center: np.ndarray
    ceva_residual: float
    charges: ChargeTriple    # Coulomb charges, same order as ``points``

    @property
    def params(self):
        return tuple(p.t for p in self.points)

    @property
    def sign_pattern(self):
        return self.charges.sign_pattern

    @property
    def positive(self):
        return self.charges.positive

    def charges_for(self, law):
        return balancing_charges(self.points, law)

    def residual(self, law=COULOMB):
        law = law_by_name(law)
        return tangential_forces(self.points, self.charges_for(law), law)


def make_orthotripod(points, center=None) -> Orthotripod:
    pts = tuple(sorted(points, key=lambda p: p.t))
    if center is None:
        ok, center = is_orthotripod(pts)
        if not ok:
            raise NotOrthotripod("normals are not concurrent")
    return Orthotripod(pts, np.asarray(center, dtype=float), ceva_residual(pts), balancing_charges(pts))


def tripods_from_center(curve: Curve, q, samples: int = kernel.DEFAULT_SAMPLES) -> list[Orthotripod]:
    """Every orthotripod whose normals meet at ``q``."""
    q = np.asarray(q, dtype=float)
    feet = kernel.normal_feet(curve, q, samples)
    if len(feet) < 3:
        raise NotInCore(f"only {len(feet)} normals pass through {tuple(q)}")
    return [make_orthotripod([f.foot for f in trio], q) for trio in itertools.combinations(feet, 3)]


def filter_by_charges(tripods, target, tol=1e-3):
    """Orthotripods whose normalised Coulomb charges are within ``tol`` of ``target``."""
    want = ChargeTriple.from_vector(target)
    out = []
    for tp in tripods:
        for perm in itertools.permutations(range(3)):
            if tp.charges.close_to(ChargeTriple.from_vector(want.as_array()[list(perm)]).q, tol):
                out.append(tp)
                break
    return out


RECORD_FIELDS = ("t1", "t2", "t3", "cx", "cy", "q1", "q2", "q3", "signs", "ceva_residual", "force_residual")


def tripod_record(tp: Orthotripod, law=COULOMB) -> dict:
    law = law_by_name(law)
    q = tp.charges if law is COULOMB else tp.charges_for(law)
    res = tangential_forces(tp.points, q, law)
    vals = list(tp.params) + [float(tp.center[0]), float(tp.center[1])] + list(q.q)
    rec = {k: float(f"{v:.12g}") for k, v in zip(RECORD_FIELDS[:8], vals)}
    rec["signs"] = q.sign_pattern
    rec["ceva_residual"] = float(f"{tp.ceva_residual:.12g}")
    rec["force_residual"] = float(f"{np.abs(res).max():.12g}")
    return rec
