"""Randomised invariant checks across all modules; backs the ``check`` subcommand."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from . import equilibrium as eq
from . import kernel
from .caustic import LemmaViolation, compute_caustic
from .curves import Curve, rot90
from .errors import (GeometryError, NotFourCusp, NotOrthotripod, NumberingBreakdown, OnCaustic,
                     OnCurve, RankDeficient)


@dataclass
class CheckResult:
    name: str
    ok: bool
    detail: str = ""

    def line(self):
        return f"{'PASS' if self.ok else 'FAIL'} {self.name}: {self.detail}"


@dataclass
class CheckConfig:
    seed: int = 0
    trials: int = 50
    samples: int = kernel.DEFAULT_SAMPLES
    eps_ceva: float = eq.EPS_CEVA
    eps_conc: float = eq.EPS_CONC
    resolution: int = 32


def _core_probes(curve, caustic, rng, n, margin=1e-3):
    lo, hi = caustic.points.min(axis=0), caustic.points.max(axis=0)
    out = []
    for _ in range(200 * n):
        if len(out) == n:
            break
        q = lo + (hi - lo) * rng.random(2)
        try:
            if caustic.winding(q, tol=margin * curve.diameter) != 0:
                out.append(q)
        except OnCurve:
            pass
    return out


def check_curve(curve, cfg, rng):
    t = rng.uniform(*curve.domain, size=64) if not curve.closed else curve.sample_parameters(64)
    ok = curve.is_regular()
    detail = ["regular" if ok else "not regular"]
    if curve.derivative_mode == "analytic":
        fd = curve.with_finite_differences()
        err = np.abs(curve.curvature(t) - fd.curvature(t)).max() / np.abs(curve.curvature(t)).max()
        ok &= err < 1e-6
        detail.append(f"fd curvature rel err {err:.2e}")
    if curve.closed:
        conv = curve.is_convex()
        ok &= conv
        detail.append("convex" if conv else "not convex")
    return CheckResult("curve", bool(ok), ", ".join(detail))


def check_envelope(curve, cfg, rng, delta=1e-4):
    """Centers of curvature agree with intersections of neighbouring normals."""
    worst = 0.0
    for t in rng.uniform(*curve.domain, size=cfg.trials):
        lo, hi = curve.domain
        t = min(max(t, lo + 2 * delta), hi - 2 * delta) if not curve.closed else t
        X, T, _, _, _ = curve.frame(np.array([t - delta, t + delta]))
        N = rot90(T)
        M = np.column_stack([N[0], -N[1]])
        s = np.linalg.solve(M, X[1] - X[0])
        meet = X[0] + s[0] * N[0]
        worst = max(worst, np.hypot(*(meet - curve.center_of_curvature(t))))
    rel = worst / curve.diameter
    return CheckResult("envelope", rel < 1e-3, f"max deviation {rel:.2e} x diameter")


def check_feet_oracle(curve, caustic, cfg, rng):
    lo, hi = caustic.points.min(axis=0), caustic.points.max(axis=0)
    span = hi - lo
    bad = 0
    for _ in range(cfg.trials):
        q = lo - 0.5 * span + 2 * span * rng.random(2)
        try:
            n = kernel.normal_count(curve, q, cfg.samples)
        except OnCaustic:
            continue
        if n != kernel.brute_force_sign_changes(curve, q, 16 * cfg.samples):
            bad += 1
    return CheckResult("normal feet vs dense sign changes", bad == 0, f"{bad} mismatches")


def check_lemma(curve, caustic, cfg, rng):
    lo, hi = caustic.points.min(axis=0), caustic.points.max(axis=0)
    span = hi - lo
    bad = tested = 0
    for _ in range(cfg.trials):
        q = lo - 0.25 * span + 1.5 * span * rng.random(2)
        try:
            i = caustic.winding(q, tol=1e-6 * curve.diameter)
            n = kernel.normal_count(curve, q, cfg.samples)
        except (OnCurve, OnCaustic):
            continue
        tested += 1
        bad += n != 2 * i + 2
    return CheckResult("n = 2i + 2", bad == 0, f"{bad} of {tested} probes violate")


def check_double_normals(curve, cfg, rng):
    dns = kernel.double_normals(curve)
    worst = 0.0
    for dn in dns:
        X, T, *_ = curve.frame(np.array(dn.params))
        u = X[1] - X[0]
        u /= np.hypot(*u)
        worst = max(worst, abs(u @ T[0]), abs(u @ T[1]))
    ok = len(dns) >= 2 and worst < 1e-8
    return CheckResult("double normals", ok, f"{len(dns)} found, max |<u,T>| {worst:.1e}")


def check_equilibrium(curve, caustic, cfg, rng):
    """Orthotripods balance; random triples do not; closed forms and sign tests agree."""
    bad = []
    probes = _core_probes(curve, caustic, rng, max(cfg.trials // 4, 5))
    for q in probes:
        for tp in eq.tripods_from_center(curve, q, cfg.samples):
            ok, _ = eq.is_orthotripod(tp.points, cfg.eps_ceva, cfg.eps_conc)
            r = np.abs(eq.tangential_forces(tp.points, tp.charges)).max()
            if not ok or r > 1e-8 * eq.force_scale(tp.points, tp.charges):
                bad.append("orthotripod not balanced")
            decisions = {eq.ceva_decision(tp.points, law, cfg.eps_ceva) for law in eq.LAWS.values()}
            for law in eq.LAWS.values():
                qs = tp.charges_for(law)
                if np.abs(eq.tangential_forces(tp.points, qs, law)).max() > 1e-8 * eq.force_scale(tp.points, qs, law):
                    bad.append(f"{law.kind} charges do not balance")
            if len(decisions) != 1:
                bad.append("law dependence")
            try:
                if eq.positive_charge_test(tp.points) != tp.positive and min(map(abs, tp.charges)) > 1e-6:
                    bad.append("sign test disagrees with charges")
            except GeometryError as exc:
                bad.append(str(exc))
    negatives = 0
    for _ in range(cfg.trials):
        ts = np.sort(rng.uniform(*curve.domain, size=3))
        pts = [curve.eval(t) for t in ts]
        if eq.relative_determinant(eq.interaction_matrix(pts, None)) <= 1e-3:
            continue
        negatives += 1
        if eq.is_orthotripod(pts, cfg.eps_ceva, cfg.eps_conc)[0]:
            bad.append("random triple accepted")
        try:
            eq.balancing_charges(pts, eq.COULOMB, cfg.eps_ceva)
            bad.append("random triple got charges")
        except NotOrthotripod:
            pass
    detail = f"{len(probes)} centers, {negatives} non-orthotripods"
    return CheckResult("equilibrium", not bad, detail + ("; " + bad[0] if bad else ""))


def check_gradient(curve, cfg, rng, h=1e-6):
    worst = 0.0
    for _ in range(cfg.trials):
        ts = rng.uniform(*curve.domain, size=3)
        q = rng.uniform(-1, 1, size=3)
        pts = [curve.eval(t) for t in ts]
        if min(np.hypot(*(a.p - b.p)) for a, b in itertools.combinations(pts, 2)) < 0.05 * curve.diameter:
            continue
        F = eq.tangential_forces(pts, q) * np.array([p.speed for p in pts])
        g = np.zeros(3)
        for i in range(3):
            tp, tm = ts.copy(), ts.copy()
            tp[i] += h
            tm[i] -= h
            Ep = eq.potential([curve.eval(t) for t in tp], q)
            Em = eq.potential([curve.eval(t) for t in tm], q)
            g[i] = (Ep - Em) / (2 * h)
        worst = max(worst, np.abs(g - F).max() / max(np.abs(F).max(), 1e-300))
    return CheckResult("potential gradient", worst < 1e-6, f"max rel err {worst:.2e}")


def check_double_normal_charges(curve, caustic, cfg, rng):
    """Orthotricenters on a double normal carry a vanishing charge."""
    bad = tested = 0
    for dn in kernel.double_normals(curve):
        a, b = map(np.asarray, dn.chord)
        for s in np.linspace(0.05, 0.95, 19):
            q = a + s * (b - a)
            try:
                if caustic.winding(q, tol=1e-3 * curve.diameter) == 0:
                    continue
            except OnCurve:
                continue
            tested += 1
            zero = False
            for tp in eq.tripods_from_center(curve, q, cfg.samples):
                try:
                    zero |= min(map(abs, tp.charges)) < 1e-6
                except RankDeficient:
                    zero = True
            bad += not zero
    return CheckResult("zero charge on double normals", bad == 0 and tested > 0,
                       f"{bad} of {tested} centers without a zero charge")


def check_atlas(curve, caustic, cfg, rng):
    from .atlas import build_atlas, topology_certificate
    try:
        at = build_atlas(curve, cfg.resolution, caustic=caustic)
    except NotFourCusp as exc:
        return CheckResult("atlas", True, f"skipped ({exc})")
    except NumberingBreakdown as exc:
        return CheckResult("atlas", False, str(exc))
    full = topology_certificate(at)
    pos = topology_certificate(at, keep=at.positive_nodes())
    counts = at.cells_per_vertex()[at.rings < at.resolution]
    ok = full.line() == pos.line() == "components=1 chi=0 boundary=2" and np.all(counts == 4)
    return CheckResult("atlas", bool(ok), f"full {full.line()}; positive {pos.line()}")


def run_checks(curve: Curve, cfg: CheckConfig = None):
    """Run every applicable check; returns a list of :class:`CheckResult`."""
    cfg = cfg or CheckConfig()
    rng = np.random.default_rng(cfg.seed)
    results = [check_curve(curve, cfg, rng), check_gradient(curve, cfg, rng)]
    if not curve.closed:
        return results
    results.append(check_envelope(curve, cfg, rng))
    caustic = compute_caustic(curve, feet_samples=cfg.samples)
    if caustic.degenerate:
        results.append(CheckResult("caustic", True, "degenerate (single point); core checks skipped"))
        return results
    steps = [check_feet_oracle, check_lemma, check_equilibrium, check_double_normal_charges, check_atlas]
    results.append(check_double_normals(curve, cfg, rng))
    for fn in steps:
        try:
            results.append(fn(curve, caustic, cfg, rng))
        except (GeometryError, LemmaViolation) as exc:
            results.append(CheckResult(fn.__name__.removeprefix("check_"), False, f"{type(exc).__name__}: {exc}"))
    return results
