"""Root finding on curves: normal feet, normal counts, winding indices, double normals."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq, minimize_scalar, root

from .curves import Curve, CurvePoint, cross2
from .errors import ConstantWidthSuspected, DegenerateCenter, OnCaustic, OnCurve

DEFAULT_SAMPLES = 2048
DEFAULT_GRID = 256
ROOT_MERGE = 1e-6      # fraction of the period
EPS_ROOT = 1e-9        # residual tolerance, relative to the diameter
FOLD_SLOPE = 1e-6      # |dg/ds| below this means the foot is a multiple root


@dataclass(frozen=True, eq=False)
class NormalFoot:
    t: float
    foot: CurvePoint
    distance: float
    multiplicity: int = 1


@dataclass(frozen=True)
class DoubleNormal:
    s: float
    t: float
    chord: tuple  # ((x0, y0), (x1, y1))

    @property
    def params(self):
        return (self.s, self.t)

    def side(self, q):
        """Sign of ``q`` relative to the chord line (+1 left, -1 right, 0 on it)."""
        (x0, y0), (x1, y1) = self.chord
        d = (x1 - x0) * (q[1] - y0) - (y1 - y0) * (q[0] - x0)
        scale = math.hypot(x1 - x0, y1 - y0)
        if abs(d) <= 1e-12 * scale * scale:
            return 0
        return 1 if d > 0 else -1


def _g(curve, q):
    """Signed tangential offset <Q - X(t), T(t)> as a scalar function of t."""
    qx, qy = float(q[0]), float(q[1])

    def g(t):
        x, T, *_ = curve.frame(t)
        return float((qx - x[0]) * T[0] + (qy - x[1]) * T[1])

    return g


def _grid_values(curve, q, samples):
    ts = curve.sample_parameters(samples)
    x, T, *_ = curve.frame(ts)
    g = (q[0] - x[:, 0]) * T[:, 0] + (q[1] - x[:, 1]) * T[:, 1]
    return ts, g


def _candidate_roots(curve, q, samples):
    """(t, multiplicity) pairs from sign changes and touching extrema of g."""
    q = np.asarray(q, dtype=float)
    ts, gv = _grid_values(curve, q, samples)
    diam = curve.diameter
    eps = EPS_ROOT * diam
    if np.all(np.abs(gv) <= eps):
        raise DegenerateCenter(f"every normal passes through {tuple(q)}")
    g = _g(curve, q)
    n = len(ts)
    closed = curve.closed
    step = curve.period / n if closed else ts[1] - ts[0]
    idx = np.arange(n if closed else n - 1)
    nxt = (idx + 1) % n
    tb = ts[idx] + step

    xtol = 1e-15 * curve.period
    out = []
    pos = gv >= 0
    zero = gv == 0.0
    for i in np.nonzero(pos[idx] != pos[nxt])[0]:
        if zero[i] or zero[nxt[i]]:
            continue
        out.append((brentq(g, ts[i], tb[i], xtol=xtol), 1))
    for i in np.nonzero(zero)[0]:
        if closed or 0 < i < n - 1:
            touch = np.sign(gv[(i - 1) % n]) == np.sign(gv[(i + 1) % n])
        else:
            touch = False
        out.append((ts[i], 2 if touch else 1))

    # interior extrema of g that approach zero without a sign change
    inner = np.arange(n) if closed else np.arange(1, n - 1)
    sgn = np.sign(gv)
    left, mid, right = sgn[(inner - 1) % n], sgn[inner], sgn[(inner + 1) % n]
    absg = np.abs(gv)
    keep = ((left == mid) & (mid == right) & (mid != 0)
            & (absg[inner] <= 1e-3 * diam)
            & (absg[inner] <= absg[(inner - 1) % n]) & (absg[inner] <= absg[(inner + 1) % n]))
    for i in inner[keep]:
        s = sgn[i]
        lo, hi = ts[i] - step, ts[i] + step
        res = minimize_scalar(lambda t: s * g(t), bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-13 * curve.period})
        tm, gm = float(res.x), s * float(res.fun)
        if abs(gm) <= eps:
            out.append((tm, 2))
        elif np.sign(gm) != s:
            # two close simple roots inside one sample interval
            out.append((brentq(g, lo, tm, xtol=xtol), 1))
            out.append((brentq(g, tm, hi, xtol=xtol), 1))
    return out


def _merge(curve, roots):
    if not roots:
        return []
    period = curve.period
    tol = ROOT_MERGE * period
    roots = sorted((float(curve.wrap(t)), m) for t, m in roots)
    merged = [[roots[0][0], roots[0][1]]]
    for t, m in roots[1:]:
        if t - merged[-1][0] <= tol:
            merged[-1][1] += m
        else:
            merged.append([t, m])
    if curve.closed and len(merged) > 1 and merged[0][0] + period - merged[-1][0] <= tol:
        merged[0][1] += merged[-1][1]
        merged.pop()
    return merged


def normal_feet(curve: Curve, q, samples: int = DEFAULT_SAMPLES) -> list[NormalFoot]:
    """All feet of normals from ``q`` to the curve, sorted by parameter.

    Roots of ``<Q - X(t), T(t)>`` are bracketed on a uniform grid of
    ``samples`` parameters and refined with Brent's method; extrema of the
    function that touch zero are reported as double roots.
    """
    q = np.asarray(q, dtype=float)
    feet = []
    for t, m in _merge(curve, _candidate_roots(curve, q, samples)):
        cp = curve.eval(t)
        feet.append(NormalFoot(cp.t, cp, float(np.hypot(*(q - cp.p))), m))
    return feet


def foot_slope(foot: NormalFoot, q) -> float:
    """Arclength derivative of the tangential offset at a foot: -1 + kappa <Q - X, N>."""
    cp = foot.foot
    return -1.0 + cp.kappa * float(np.dot(np.asarray(q, dtype=float) - cp.p, cp.N))


def normal_count(curve: Curve, q, samples: int = DEFAULT_SAMPLES) -> int:
    """Number of normals through ``q``; raises OnCaustic at multiple roots."""
    feet = normal_feet(curve, q, samples)
    for f in feet:
        if f.multiplicity != 1 or abs(foot_slope(f, q)) < FOLD_SLOPE:
            raise OnCaustic(f"{tuple(np.asarray(q))} is a curvature centre of t={f.t:.6g}")
    return len(feet)


def brute_force_sign_changes(curve: Curve, q, samples: int) -> int:
    """Independent count of sign changes of the tangential offset on a fine grid."""
    _, gv = _grid_values(curve, np.asarray(q, dtype=float), samples)
    pos = gv >= 0
    if curve.closed:
        return int(np.count_nonzero(pos != np.roll(pos, -1)))
    return int(np.count_nonzero(pos[:-1] != pos[1:]))


def normal_feet_batch(curve: Curve, qs, samples: int = DEFAULT_SAMPLES, iters: int = 60):
    """Vectorised simple-root search for many query points of a closed curve.

    Returns a list of sorted parameter arrays.  Only sign changes are used, so
    points on or extremely close to the caustic may lose a double root; callers
    that need that case use :func:`normal_feet`.
    """
    qs = np.atleast_2d(np.asarray(qs, dtype=float))
    ts = curve.sample_parameters(samples)
    x, T, *_ = curve.frame(ts)
    step = curve.period / samples
    out = []
    chunk = max(1, 2_000_000 // samples)
    for c0 in range(0, len(qs), chunk):
        qc = qs[c0:c0 + chunk]
        g = (qc[:, None, 0] - x[None, :, 0]) * T[None, :, 0] + (qc[:, None, 1] - x[None, :, 1]) * T[None, :, 1]
        pos = g >= 0
        change = pos != np.roll(pos, -1, axis=1)
        qi, ki = np.nonzero(change)
        lo = ts[ki].copy()
        hi = lo + step
        glo = g[qi, ki]
        qq = qc[qi]
        for _ in range(iters):
            mid = 0.5 * (lo + hi)
            xm, Tm, *_ = curve.frame(mid)
            gm = (qq[:, 0] - xm[:, 0]) * Tm[:, 0] + (qq[:, 1] - xm[:, 1]) * Tm[:, 1]
            left = (gm >= 0) == (glo >= 0)
            lo = np.where(left, mid, lo)
            glo = np.where(left, gm, glo)
            hi = np.where(left, hi, mid)
        roots = np.mod(0.5 * (lo + hi), curve.period)
        tol = ROOT_MERGE * curve.period
        for j in range(len(qc)):
            r = np.sort(roots[qi == j])
            # an exact zero on the grid can be bracketed from both sides
            if len(r) > 1:
                keep = np.diff(r, append=r[0] + curve.period) > tol
                r = r[keep]
            out.append(r)
    return out


def winding_index(polyline, q, sign: int = 1, tol: float = 0.0) -> int:
    """Winding number of a closed polyline around ``q`` by signed ray crossings.

    A horizontal ray is cast from ``q``; each polyline edge crossing it
    contributes +1 when it goes upward and -1 when it goes downward.  Half-open
    vertex rules keep the count exact when the ray passes through a vertex.
    """
    pts = np.asarray(polyline, dtype=float)
    q = np.asarray(q, dtype=float)
    a = pts
    b = np.roll(pts, -1, axis=0)
    if tol > 0 and _polyline_distance(a, b, q) <= tol:
        raise OnCurve(f"{tuple(q)} lies on the polyline")
    ay = a[:, 1] - q[1]
    by = b[:, 1] - q[1]
    up = (ay <= 0) & (by > 0)
    down = (ay > 0) & (by <= 0)
    # x where the edge meets the ray's line, tested via the sign of a cross product
    side = cross2(b - a, q - a)
    w = np.count_nonzero(up & (side > 0)) - np.count_nonzero(down & (side < 0))
    if tol <= 0 and np.any((up | down) & (side == 0)):
        raise OnCurve(f"{tuple(q)} lies on the polyline")
    return int(sign * w)


def _polyline_distance(a, b, q):
    ab = b - a
    L2 = np.einsum("ij,ij->i", ab, ab)
    s = np.clip(np.einsum("ij,ij->i", q - a, ab) / np.where(L2 > 0, L2, 1.0), 0.0, 1.0)
    d = a + s[:, None] * ab - q
    return float(np.sqrt(np.einsum("ij,ij->i", d, d)).min())


def polyline_distance(polyline, q) -> float:
    pts = np.asarray(polyline, dtype=float)
    return _polyline_distance(pts, np.roll(pts, -1, axis=0), np.asarray(q, dtype=float))


def _chord_residual(curve, s, t):
    # normalised so the trivial diagonal s == t is not a zero
    xs, Ts, *_ = curve.frame(s)
    xt, Tt, *_ = curve.frame(t)
    d = xs - xt
    L = np.hypot(d[..., 0], d[..., 1])
    L = np.where(L > 0, L, np.inf)
    u = d / L[..., None]
    return (np.einsum("...i,...i->...", u, Ts), np.einsum("...i,...i->...", u, Tt))


def double_normals(curve: Curve, grid: int = DEFAULT_GRID, cap: int = 64) -> list[DoubleNormal]:
    """Chords orthogonal to the curve at both ends.

    Scans a ``grid x grid`` lattice of parameter pairs for cells where both
    components of the (chord-normalised) system change sign, then refines each
    candidate with a 2-D root solve.
    """
    period = curve.period
    ts = curve.sample_parameters(grid)
    S, Tg = np.meshgrid(ts, ts, indexing="ij")
    f1, f2 = _chord_residual(curve, S, Tg)
    f1 = np.nan_to_num(f1, nan=1.0)
    f2 = np.nan_to_num(f2, nan=1.0)
    slack = 1e-12

    def spans(f):
        c = [f, np.roll(f, -1, 0), np.roll(f, -1, 1), np.roll(np.roll(f, -1, 0), -1, 1)]
        lo = np.minimum.reduce(c)
        hi = np.maximum.reduce(c)
        return (lo <= slack) & (hi >= -slack)

    cand = spans(f1) & spans(f2)
    step = period / grid
    di = np.abs(np.subtract.outer(np.arange(grid), np.arange(grid)))
    di = np.minimum(di, grid - di) if curve.closed else di
    cand &= di > 1
    if not curve.closed:
        cand[-1, :] = False
        cand[:, -1] = False

    def F(v):
        a, b = _chord_residual(curve, np.array(v[0]), np.array(v[1]))
        return [float(a), float(b)]

    tol = ROOT_MERGE * period
    found = []
    for i, j in zip(*np.nonzero(cand)):
        s0, t0 = ts[i] + step / 2, ts[j] + step / 2
        sol = root(F, [s0, t0], method="hybr", options={"xtol": 1e-14})
        s, t = (float(v) for v in curve.wrap(sol.x))
        r = F([s, t])
        if max(abs(r[0]), abs(r[1])) > 1e-10:
            continue
        ps, pt = curve.position(s), curve.position(t)
        if np.hypot(*(ps - pt)) <= 1e3 * curve.eps:
            continue
        s, t = min(s, t), max(s, t)
        if any(_pdist(s, a, period, curve.closed) <= tol and _pdist(t, b, period, curve.closed) <= tol
               for a, b in found):
            continue
        found.append((s, t))
        if len(found) > cap:
            raise ConstantWidthSuspected(f"more than {cap} double normals")
    found.sort()
    return [DoubleNormal(s, t, (tuple(map(float, curve.position(s))), tuple(map(float, curve.position(t)))))
            for s, t in found]


def _pdist(a, b, period, closed):
    d = abs(a - b)
    return min(d, period - d) if closed else d
