"""Combinatorial atlas of the orthotripod space of an ellipse-like curve.

Over every interior point of the caustic core there are four normals, hence
four orthotripods, one per 3-subset ("sheet") of the consistently numbered
normals.  The atlas meshes the core, lifts each mesh cell to the four sheets,
and identifies lifted vertices that are the same unordered triple of curve
points.  On the caustic two (fold) or three (cusp) normals coincide, which is
exactly where sheets get glued.  The resulting cell complex is a discrete
model of the closure of the orthotripod space, and its Euler characteristic,
components and boundary circles are computed directly.

Mesh: rays from the point nearest the four cusp axes to evolute points
``c(t_j)``, with rings at ``r_k = 1 - sqrt(1 - k/R)``, refined geometrically
next to the caustic.  Rays bend so that each enters a cusp along its axis.  The feet of the two normals merging at a fold
separate like the square root of the distance to the fold, and this spacing
keeps every ring-to-ring step of each foot well below the foot separation.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from shapely.geometry import LinearRing

from . import kernel
from .caustic import CausticGeometry, compute_caustic
from .curves import Curve, cross2
from .equilibrium import charges_batch, sign_patterns
from .errors import NotFourCusp, NumberingBreakdown, OnCaustic, OnCurve

SHEETS = ((0, 1, 2), (1, 2, 3), (0, 2, 3), (0, 1, 3))
AMBIGUITY = 0.25     # max foot displacement per mesh step / min foot separation
FEET_SAMPLES = 4096
TAIL_RATIO = 1.1     # max ratio of consecutive distances to the caustic along a ray
MAX_BISECTIONS = 4   # rounds of ray insertion between disagreeing neighbours


def sheet_name(sheet) -> str:
    """Cyclic name of a sheet: the omitted normal's successor comes first (e.g. '341')."""
    missing = ({0, 1, 2, 3} - set(sheet)).pop()
    return "".join(str((missing + k) % 4 + 1) for k in range(1, 4))


def _circ(a, b, period):
    d = np.abs(np.asarray(a) - np.asarray(b)) % period
    return np.minimum(d, period - d)


def _min_gap(params, period):
    s = np.sort(np.asarray(params), axis=-1)
    g = np.diff(np.concatenate([s, s[..., :1] + period], axis=-1), axis=-1)
    return g.min(axis=-1)


@dataclass(eq=False)
class AtlasComplex:
    curve: Curve
    caustic: CausticGeometry
    resolution: int
    n_rays: int
    gluing: str
    origin: np.ndarray
    vertices: np.ndarray            # mesh points Q, shape (nv, 2)
    rings: np.ndarray               # ring index k of each mesh vertex (0 = origin)
    feet: list                      # physical foot parameters per vertex
    labels: np.ndarray              # (nv, 4): label -> index into feet[v]
    sheet_node: np.ndarray          # (nv, 4): sheet -> node id
    node_vertex: np.ndarray
    node_sheets: list               # tuple of sheet indices sharing the node
    node_params: np.ndarray         # (nn, 3) sorted parameters (nan-free)
    node_degenerate: np.ndarray
    node_charges: np.ndarray        # (nn, 3), nan for degenerate triples
    node_signs: list
    edges: dict                     # (u, v) -> frozenset of sheets
    faces: list                     # (sheet, node tuple)
    fold_labels: dict = field(default_factory=dict)   # boundary vertex -> coinciding labels

    @property
    def n_nodes(self):
        return len(self.node_vertex)

    def vertex_index(self, k, j):
        return 0 if k == 0 else 1 + (k - 1) * self.n_rays + (j % self.n_rays)

    def positive_nodes(self):
        return np.array([s == "+++" for s in self.node_signs])

    def glued_sheets(self, pair):
        """Sheets sharing nodes along the fold edge where ``pair`` of normals coincide."""
        pair = tuple(sorted(pair))
        out = set()
        for v, lab in self.fold_labels.items():
            if lab != pair:
                continue
            for n in set(self.sheet_node[v]):
                shared = self.node_sheets[n]
                if len(shared) > 1:
                    out.add(frozenset(sheet_name(SHEETS[s]) for s in shared))
        return out

    def fold_edge_labels(self):
        return sorted(set(lab for lab in self.fold_labels.values() if len(lab) == 2))

    def cusp_labels(self):
        return sorted(set(lab for lab in self.fold_labels.values() if len(lab) == 3))

    def cells_per_vertex(self):
        """Number of orthotripods (distinct sheet nodes) over each mesh vertex."""
        return np.array([len(set(r)) for r in self.sheet_node])

    def vertices_csv(self) -> str:
        rows = ["qx,qy,sheet_label,t1,t2,t3,sign_pattern"]
        for n in range(self.n_nodes):
            q = self.vertices[self.node_vertex[n]]
            lab = "|".join(sheet_name(SHEETS[s]) for s in self.node_sheets[n])
            t = self.node_params[n]
            rows.append(f"{q[0]:.12g},{q[1]:.12g},{lab},{t[0]:.12g},{t[1]:.12g},{t[2]:.12g},"
                        f"{self.node_signs[n] or 'degenerate'}")
        return "\n".join(rows) + "\n"

    def edges_csv(self) -> str:
        rows = ["u,v"] + [f"{u},{v}" for u, v in sorted(self.edges)]
        return "\n".join(rows) + "\n"


def _centroid(poly):
    x, y = poly[:, 0], poly[:, 1]
    xn, yn = np.roll(x, -1), np.roll(y, -1)
    c = x * yn - xn * y
    A = c.sum() / 2
    return np.array([((x + xn) * c).sum(), ((y + yn) * c).sum()]) / (6 * A)


def _origin(curve, caustic):
    """Mesh centre: the point closest to the four cusp axes, else the centroid.

    A cusp of the caustic is reachable by a straight ray only along its axis,
    the curve normal at the vertex, so the centre should lie on all four axes.
    """
    x, T, *_ = curve.frame(np.array([t for t, _ in caustic.cusps]))
    N = np.column_stack([-T[:, 1], T[:, 0]])
    N /= np.linalg.norm(N, axis=1)[:, None]
    P = np.eye(2)[None] - N[:, :, None] * N[:, None, :]
    O = np.linalg.solve(P.sum(0), np.einsum("kij,kj->i", P, x))
    try:
        if caustic.winding(O, tol=1e-9) != 0:
            return O
    except (OnCurve, OnCaustic):
        pass
    return _centroid(caustic.points)


class _CuspAxes:
    """Virtual ray origins, blended between the axes of the two nearest cusps.

    A ray to ``c(t)`` leaves ``O`` and ends as the straight segment from its
    virtual origin.  For a cusp ray the virtual origin is the foot of ``O`` on
    the cusp axis, so the ray enters the cusp along the axis and stays inside
    the core.
    """

    def __init__(self, curve, O, cusp_params):
        self.period = curve.period
        self.t = np.sort(np.mod(cusp_params, self.period))
        x, T, *_ = curve.frame(self.t)
        N = np.column_stack([-T[:, 1], T[:, 0]])
        N /= np.linalg.norm(N, axis=1)[:, None]
        self.P = x + np.einsum("ki,ki->k", O - x, N)[:, None] * N

    def __call__(self, ts):
        ts = np.mod(ts, self.period)
        a = (np.searchsorted(self.t, ts, side="right") - 1) % len(self.t)
        b = (a + 1) % len(self.t)
        span = np.mod(self.t[b] - self.t[a], self.period)
        u = np.mod(ts - self.t[a], self.period) / span
        w = np.cos(np.pi * u / 2)[:, None] ** 2
        return w * self.P[a] + (1 - w) * self.P[b]


def _ring_radii(R, ratio=TAIL_RATIO):
    """Ring radii along each ray, 0 at the centre and 1 on the caustic.

    The distance left to the caustic goes like ``sqrt(1 - k/R)``; near the end,
    where consecutive distances differ by more than ``ratio``, geometric rings
    are inserted so every interior step is a bounded fraction of the distance.
    """
    left = np.sqrt(1.0 - np.arange(R) / R)
    out = [left[0]]
    for a, b in zip(left[:-1], left[1:]):
        n = int(np.ceil(np.log(a / b) / np.log(ratio) - 1e-12))
        out.extend(a * (b / a) ** (np.arange(1, n + 1) / n))
    return 1.0 - np.append(out, 0.0)


def _ray_parameters(curve, caustic, n_rays):
    ts = curve.sample_parameters(n_rays)
    for tc, _ in caustic.cusps:
        j = int(np.argmin(_circ(ts, tc, curve.period)))
        ts[j] = tc
    return ts


def _boundary_feet(curve, b, tj, samples):
    """Feet at a caustic point: the merged foot ``tj`` plus the simple ones."""
    roots = kernel.normal_feet_batch(curve, b[None, :], samples)[0]
    others = roots[_circ(roots, tj, curve.period) > 1e-3 * curve.period]
    return others


def _label_shift(prev, feet, period):
    """Cyclic shift aligning labelled parameters ``prev`` with sorted ``feet``."""
    best, best_cost = 0, np.inf
    for s in range(4):
        cost = _circ(prev, np.roll(feet, -s), period).max()
        if cost < best_cost:
            best, best_cost = s, cost
    return best, best_cost


def build_atlas(curve: Curve, grid_resolution: int = 64, gluing: str = "limit",
                caustic: CausticGeometry = None, samples: int = FEET_SAMPLES,
                rays_per_ring: int = 4) -> AtlasComplex:
    """Mesh the core, lift to the four sheets and glue along the caustic.

    ``gluing`` selects how lifted vertices over the caustic are identified:
    ``"limit"`` merges lifts that are the same unordered triple of curve points,
    ``"stated"`` merges the sheets containing both coinciding normals,
    ``"none"`` keeps the four sheets apart.
    """
    if grid_resolution < 2:
        raise ValueError("grid_resolution must be at least 2")
    if gluing not in ("limit", "stated", "none"):
        raise ValueError(f"unknown gluing rule {gluing!r}")
    caustic = caustic or compute_caustic(curve)
    if caustic.degenerate or len(caustic.cusps) != 4:
        raise NotFourCusp(f"caustic has {len(caustic.cusps)} cusps; the atlas needs exactly 4")
    period = curve.period
    R = grid_resolution
    M = rays_per_ring * R
    M += (-M) % 4

    if not LinearRing(caustic.points).is_simple:
        raise NotFourCusp("caustic has a double point")
    O = _origin(curve, caustic)
    radii = _ring_radii(R)
    R = len(radii) - 1
    axes = _CuspAxes(curve, O, [t for t, _ in caustic.cusps])
    feet0 = kernel.normal_feet_batch(curve, O[None, :], samples)[0]
    if len(feet0) != 4:
        raise NumberingBreakdown(f"{len(feet0)} normals at the mesh centre", tuple(O))

    def trace(ts, cusp):
        """Mesh points, feet and labels along rays ending at ``c(ts)``."""
        Bt = curve.centers_of_curvature(ts)
        Ot = axes(ts)
        d = (1.0 - radii[1:])[:, None, None]
        pts = Bt + d * (Ot - Bt) - d ** 4 * (Ot - O)          # (R, n, 2)
        roots = kernel.normal_feet_batch(curve, pts[:-1].reshape(-1, 2), samples)
        n = len(ts)
        rays = []
        for i in range(n):
            ray_feet = []
            for k in range(R - 1):
                r = roots[k * n + i]
                if len(r) != 4:
                    raise NumberingBreakdown(f"{len(r)} normals at an interior mesh point", tuple(pts[k, i]))
                ray_feet.append(r)
            want = 3 if cusp[i] else 2
            others = _boundary_feet(curve, pts[-1, i], ts[i], samples)
            if len(others) != 4 - want:
                raise NumberingBreakdown(f"{len(others)} simple normals on the caustic", tuple(pts[-1, i]))
            f = np.sort(np.append(others, np.mod(ts[i], period)))
            merged = int(np.argmin(_circ(f, ts[i], period)))
            ray_feet.append(f)
            # number at the centre, then continue ring by ring along the ray
            labels = np.zeros((R, 4), dtype=int)
            lab_par = np.zeros((R, 4))
            prev = feet0
            for k, f in enumerate(ray_feet):
                if k < R - 1:
                    sh, cost = _label_shift(prev, f, period)
                    sep = min(_min_gap(f, period), _min_gap(prev, period))
                    if cost > AMBIGUITY * sep:
                        raise NumberingBreakdown(f"foot moved {cost:.3g} against separation {sep:.3g}",
                                                 tuple(pts[k, i]))
                    labels[k] = (np.arange(4) + sh) % 4
                else:
                    # repeat the merged foot so the cyclic order of the labels is kept
                    slots = np.sort(np.concatenate([np.arange(len(f)), [merged] * (want - 1)]))
                    sh, _ = _label_shift(prev, f[slots], period)
                    labels[k] = slots[(np.arange(4) + sh) % 4]
                    counts = np.bincount(labels[k], minlength=len(f))
                    if counts[merged] != want or np.any(np.delete(counts, merged) != 1):
                        raise NumberingBreakdown("labels do not merge at the caustic", tuple(pts[k, i]))
                lab_par[k] = f[labels[k]]
                prev = lab_par[k]
            rays.append(dict(t=float(ts[i]), pts=pts[:, i], feet=ray_feet, labels=labels,
                             lab_par=lab_par, merged=merged))
        return rays

    def mismatch(r, s_):
        """Worst label disagreement between two neighbouring rays, as a fraction of the allowance."""
        worst, where = 0.0, None
        for k in range(R - 1):
            cost = _circ(r["lab_par"][k], s_["lab_par"][k], period).max()
            sep = min(_min_gap(r["feet"][k], period), _min_gap(s_["feet"][k], period))
            if cost / (AMBIGUITY * sep) > worst:
                worst, where = cost / (AMBIGUITY * sep), (cost, sep, r["pts"][k])
        return worst, where

    # angular consistency: bisect neighbouring rays until their labels agree
    tj = _ray_parameters(curve, caustic, M)
    cusp_set = {float(t) for t, _ in caustic.cusps}
    rays = trace(tj, np.array([float(t) in cusp_set for t in tj]))
    for _ in range(MAX_BISECTIONS + 1):
        bad = []
        for j in range(len(rays)):
            worst, where = mismatch(rays[j], rays[(j + 1) % len(rays)])
            if worst > 1:
                bad.append((j, where))
        if not bad:
            break
        if _ == MAX_BISECTIONS:
            cost, sep, q = bad[0][1]
            raise NumberingBreakdown(f"labels inconsistent between neighbouring rays ({cost:.3g} vs {sep:.3g})",
                                     tuple(q))
        mids = []
        for j, _w in bad:
            t0, t1 = rays[j]["t"], rays[(j + 1) % len(rays)]["t"]
            mids.append(t0 + np.mod(t1 - t0, period) / 2)
        rays += trace(np.mod(mids, period), np.zeros(len(mids), dtype=bool))
        rays.sort(key=lambda r: r["t"])

    M = len(rays)
    nv = 1 + R * M
    Q = np.empty((nv, 2))
    rings = np.empty(nv, dtype=int)
    feet = [None] * nv
    labels = np.zeros((nv, 4), dtype=int)
    Q[0], rings[0], feet[0], labels[0] = O, 0, feet0, np.arange(4)
    mult = {}
    for j, r in enumerate(rays):
        for k in range(1, R + 1):
            v = 1 + (k - 1) * M + j
            Q[v], rings[v], feet[v], labels[v] = r["pts"][k - 1], k, r["feet"][k - 1], r["labels"][k - 1]
        mult[1 + (R - 1) * M + j] = r["merged"]

    fold_labels = {}
    for j in range(M):
        v = 1 + (R - 1) * M + j
        fold_labels[v] = tuple(int(l) for l in np.nonzero(labels[v] == mult[v])[0])

    # lift mesh vertices to sheet nodes
    sheet_node = np.empty((nv, 4), dtype=int)
    node_vertex, node_sheets, node_feet = [], [], []
    for v in range(nv):
        if gluing == "limit":
            groups = {}
            for s, sh in enumerate(SHEETS):
                key = tuple(sorted(int(labels[v][l]) for l in sh))
                groups.setdefault(key, []).append(s)
        elif gluing == "stated" and v in fold_labels:
            coinc = fold_labels[v]
            pairs = [p for p in itertools.combinations(coinc, 2) if (p[1] - p[0]) % 4 in (1, 3)]
            if len(coinc) == 3:
                pairs = [p for p in pairs if _cyclic_adjacent_in(p, coinc)]
            parent = list(range(4))
            for p in pairs:
                holders = [s for s, sh in enumerate(SHEETS) if set(p) <= set(sh)]
                for s in holders[1:]:
                    parent[_find(parent, s)] = _find(parent, holders[0])
            groups = {}
            for s in range(4):
                groups.setdefault(_find(parent, s), []).append(s)
        else:
            groups = {(s,): [s] for s in range(4)}
        for key, ss in groups.items():
            n = len(node_vertex)
            node_vertex.append(v)
            node_sheets.append(tuple(ss))
            node_feet.append(tuple(sorted(int(labels[v][l]) for l in SHEETS[ss[0]])))
            for s in ss:
                sheet_node[v, s] = n
    nn = len(node_vertex)
    node_vertex = np.array(node_vertex)

    params = np.array([feet[node_vertex[n]][list(node_feet[n])] for n in range(nn)])
    params.sort(axis=1)
    degenerate = np.array([len(set(fi)) < 3 for fi in node_feet])
    charges = np.full((nn, 3), np.nan)
    signs = [""] * nn
    good = np.nonzero(~degenerate)[0]
    x, T, *_ = curve.frame(params[good])
    qs, _ = charges_batch(x, T)
    charges[good] = qs
    for n, sp in zip(good, sign_patterns(qs)):
        signs[n] = sp

    # cells: radial and angular edges, triangles at the origin, quads elsewhere
    edges = {}
    faces = []

    def add_edge(a, b, s):
        na, nb = sheet_node[a, s], sheet_node[b, s]
        key = (min(na, nb), max(na, nb))
        edges[key] = edges.get(key, frozenset()) | {s}

    for s in range(4):
        for j in range(M):
            add_edge(0, 1 + j, s)
            for k in range(1, R + 1):
                v = 1 + (k - 1) * M + j
                w = 1 + (k - 1) * M + (j + 1) % M
                add_edge(v, w, s)
                if k < R:
                    add_edge(v, v + M, s)
            faces.append((s, (sheet_node[0, s], sheet_node[1 + j, s], sheet_node[1 + (j + 1) % M, s])))
            for k in range(1, R):
                v = 1 + (k - 1) * M + j
                w = 1 + (k - 1) * M + (j + 1) % M
                faces.append((s, tuple(sheet_node[[v, v + M, w + M, w], s])))

    return AtlasComplex(curve, caustic, R, M, gluing, O, Q, rings, feet, labels, sheet_node,
                        node_vertex, node_sheets, params, degenerate, charges, signs,
                        edges, faces, fold_labels)


def _cyclic_adjacent_in(pair, coinc):
    # the two fold edges meeting at a cusp pair the middle label with each neighbour
    ordered = _cyclic_run(coinc)
    return set(pair) in ({ordered[0], ordered[1]}, {ordered[1], ordered[2]})


def _cyclic_run(labels):
    missing = ({0, 1, 2, 3} - set(labels)).pop()
    return [(missing + k) % 4 for k in range(1, 4)]


def _find(parent, i):
    while parent[i] != i:
        parent[i] = parent[parent[i]]
        i = parent[i]
    return i


@dataclass(frozen=True)
class Certificate:
    components: int
    euler_characteristic: int
    boundary_cycles: int
    vertices: int
    edges: int
    faces: int
    manifold: bool

    def line(self):
        return f"components={self.components} chi={self.euler_characteristic} boundary={self.boundary_cycles}"


def topology_certificate(atlas: AtlasComplex, keep=None, sheets=None) -> Certificate:
    """Components, Euler characteristic and boundary circles of a subcomplex.

    ``keep`` is an optional boolean mask over nodes (e.g. the positive-charge
    nodes); ``sheets`` restricts to cells lifted to the given sheet indices.
    The subcomplex is the one induced on the kept nodes.
    """
    nn = atlas.n_nodes
    mask = np.ones(nn, dtype=bool) if keep is None else np.asarray(keep, dtype=bool)
    if sheets is not None:
        sheets = set(sheets)
        on = np.zeros(nn, dtype=bool)
        for n, ss in enumerate(atlas.node_sheets):
            on[n] = bool(sheets & set(ss))
        mask &= on

    def alive(ss):
        return sheets is None or bool(sheets & set(ss))

    edges = [e for e, ss in atlas.edges.items() if mask[e[0]] and mask[e[1]] and alive(ss)]
    faces = [f for s, f in atlas.faces if all(mask[list(f)]) and alive({s})]
    V = int(mask.sum())

    incidence = {}
    for f in faces:
        for a, b in zip(f, f[1:] + f[:1]):
            key = (min(a, b), max(a, b))
            incidence[key] = incidence.get(key, 0) + 1
    E, F = len(edges), len(faces)

    idx = np.full(nn, -1)
    idx[mask] = np.arange(V)
    if E:
        ea = np.array(edges)
        g = coo_matrix((np.ones(E), (idx[ea[:, 0]], idx[ea[:, 1]])), shape=(V, V))
        comps = connected_components(g, directed=False)[0]
    else:
        comps = V

    bnd = [e for e in edges if incidence.get(e, 0) == 1]
    manifold = all(incidence.get(e, 0) in (1, 2) for e in edges)
    cycles = 0
    if bnd:
        ba = np.array(bnd)
        used = np.unique(ba)
        bidx = {n: i for i, n in enumerate(used)}
        rows = [bidx[a] for a, _ in bnd]
        cols = [bidx[b] for _, b in bnd]
        g = coo_matrix((np.ones(len(bnd)), (rows, cols)), shape=(len(used), len(used)))
        cycles = connected_components(g, directed=False)[0]
        deg = np.bincount(rows + cols, minlength=len(used))
        manifold = manifold and bool(np.all(deg == 2))
    return Certificate(int(comps), V - E + F, int(cycles), V, E, F, manifold)
