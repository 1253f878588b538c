"""Command-line front end.

Results go to standard output as CSV (default) or JSON; figures are written
to the files named by ``--svg``.  Exit status: 0 on success, 1 when a
geometric precondition or a ``check`` invariant fails, 2 on bad configuration.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import equilibrium as eq
from . import kernel
from .caustic import LemmaViolation, caustic_csv, compute_caustic
from .config import fmt, parse_curve, parse_point, probes_csv, read_probes
from .errors import ConfigError, GeometryError, NotOrthotripod, OnCaustic, OnCurve


def _positive_float(s):
    v = float(s)
    if not v > 0:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def _count(lo):
    def parse(s):
        v = int(s)
        if v < lo:
            raise argparse.ArgumentTypeError(f"must be at least {lo}")
        return v
    return parse


def build_parser():
    p = argparse.ArgumentParser(prog="orthotripod", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--curve", default="ellipse:2,1",
                        help="inline curve (ellipse:a,b | circle:r | parabola:c[,t0,t1] | "
                             "fourier:cos,...;sin,...) or path to a key=value config file")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--samples", type=_count(64), default=kernel.DEFAULT_SAMPLES,
                        help="parameter grid for normal-foot bracketing (default %(default)s)")
    common.add_argument("--eps-ceva", type=_positive_float, default=eq.EPS_CEVA,
                        help="relative determinant threshold (default %(default)s)")
    common.add_argument("--eps-conc", type=_positive_float, default=eq.EPS_CONC,
                        help="relative line-distance threshold (default %(default)s)")
    common.add_argument("--seed", type=int, default=0, help="seed for random probes")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("caustic", parents=[common], help="evolute, cusps and core figure")
    c.add_argument("--caustic-samples", type=_count(64), default=4096)
    c.add_argument("--csv-out", help="write caustic samples t,cx,cy here")
    c.add_argument("--svg", help="write the caustic figure here")
    c.add_argument("--shade-grid", type=_count(0), default=60)

    n = sub.add_parser("normals", parents=[common], help="normal feet through a point")
    g = n.add_mutually_exclusive_group(required=True)
    g.add_argument("--at", help="point x,y")
    g.add_argument("--probes", help="CSV file of qx,qy rows for batch mode")

    d = sub.add_parser("doubles", parents=[common], help="double normals")
    d.add_argument("--grid", type=_count(16), default=kernel.DEFAULT_GRID)
    d.add_argument("--cap", type=_count(1), default=64)

    q = sub.add_parser("charges", parents=[common], help="orthotripods and balancing charges")
    g = q.add_mutually_exclusive_group(required=True)
    g.add_argument("--at", help="orthotricenter x,y")
    g.add_argument("--params", help="three curve parameters t1,t2,t3")
    q.add_argument("--law", choices=sorted(eq.LAWS), default="coulomb")

    a = sub.add_parser("atlas", parents=[common], help="orthotripod complex and its topology")
    a.add_argument("--resolution", type=_count(32), default=64)
    a.add_argument("--gluing", choices=("limit", "stated", "none"), default="limit")
    a.add_argument("--csv-out", help="prefix for <prefix>_vertices.csv and <prefix>_edges.csv")
    a.add_argument("--svg", help="write the unrolled-cylinder figure here")

    k = sub.add_parser("check", parents=[common], help="run the invariant suite")
    k.add_argument("--trials", type=_count(1), default=50)
    k.add_argument("--resolution", type=_count(32), default=32)
    return p


def _emit(args, header, rows, out):
    if args.format == "json":
        out.write(json.dumps([dict(zip(header, r)) for r in rows], indent=1) + "\n")
    else:
        out.write(",".join(header) + "\n")
        for r in rows:
            out.write(",".join(v if isinstance(v, str) else fmt(v) if isinstance(v, float) else str(v)
                               for v in r) + "\n")


def cmd_caustic(curve, args, out):
    ca = compute_caustic(curve, args.caustic_samples, args.samples)
    rows = [(float(t), float(x), float(y)) for t, (x, y) in ca.cusps]
    _emit(args, ("t", "cx", "cy"), rows, out)
    if args.csv_out:
        Path(args.csv_out).write_text(caustic_csv(ca))
    if args.svg:
        from .svg import caustic_svg
        try:
            dns = kernel.double_normals(curve)
        except GeometryError:
            dns = ()
        Path(args.svg).write_text(caustic_svg(curve, ca, dns, args.shade_grid, args.samples))
    return 0


def cmd_normals(curve, args, out):
    ca = compute_caustic(curve, feet_samples=args.samples) if curve.closed else None
    qs = [parse_point(args.at)] if args.at else list(read_probes(Path(args.probes).read_text()))
    rows, feet = [], {}
    for q in qs:
        fs = kernel.normal_feet(curve, q, args.samples)
        n = sum(f.multiplicity for f in fs)
        i = "" if ca is None or ca.degenerate else ca.winding(q)
        if ca is not None and not ca.degenerate and not any(f.multiplicity > 1 for f in fs):
            if n != 2 * i + 2:
                raise LemmaViolation(f"n={n}, i={i} at {tuple(q)}")
        rows.append((q, n, i))
        feet[(float(q[0]), float(q[1]))] = [f.t for f in fs]
    if args.format == "json":
        rec = [{"qx": float(fmt(q[0])), "qy": float(fmt(q[1])), "n": n, "index": i,
                "feet": [float(fmt(t)) for t in feet[(float(q[0]), float(q[1]))]]}
               for q, n, i in sorted(rows, key=lambda r: (float(r[0][0]), float(r[0][1])))]
        out.write(json.dumps(rec, indent=1) + "\n")
    else:
        out.write(probes_csv(rows))
    return 0


def cmd_doubles(curve, args, out):
    dns = kernel.double_normals(curve, args.grid, args.cap)
    rows = [(dn.s, dn.t, dn.chord[0][0], dn.chord[0][1], dn.chord[1][0], dn.chord[1][1]) for dn in dns]
    _emit(args, ("s", "t", "x0", "y0", "x1", "y1"), [tuple(map(float, r)) for r in rows], out)
    return 0


def cmd_charges(curve, args, out):
    if args.at:
        tripods = eq.tripods_from_center(curve, parse_point(args.at), args.samples)
    else:
        pts = [curve.eval(t) for t in parse_point(args.params, 3)]
        ok, center = eq.is_orthotripod(pts, args.eps_ceva, args.eps_conc)
        if not ok:
            raise NotOrthotripod("the three normals are not concurrent")
        tripods = [eq.make_orthotripod(pts, center)]
    recs = [eq.tripod_record(tp, args.law) for tp in tripods]
    recs.sort(key=lambda r: (r["t1"], r["t2"], r["t3"]))
    _emit(args, eq.RECORD_FIELDS, [tuple(r[k] for k in eq.RECORD_FIELDS) for r in recs], out)
    return 0


def cmd_atlas(curve, args, out):
    from .atlas import build_atlas, topology_certificate
    at = build_atlas(curve, args.resolution, gluing=args.gluing, samples=max(args.samples, 4096))
    full = topology_certificate(at)
    pos = topology_certificate(at, keep=at.positive_nodes())
    if args.format == "json":
        out.write(json.dumps({"full": full.__dict__, "positive": pos.__dict__}, indent=1) + "\n")
    else:
        out.write(full.line() + "\n")
        out.write("positive " + pos.line() + "\n")
    if args.csv_out:
        Path(args.csv_out + "_vertices.csv").write_text(at.vertices_csv())
        Path(args.csv_out + "_edges.csv").write_text(at.edges_csv())
    if args.svg:
        from .svg import atlas_svg
        Path(args.svg).write_text(atlas_svg(at))
    return 0


def cmd_check(curve, args, out):
    from .checks import CheckConfig, run_checks
    cfg = CheckConfig(args.seed, args.trials, args.samples, args.eps_ceva, args.eps_conc, args.resolution)
    results = run_checks(curve, cfg)
    for r in results:
        out.write(r.line() + "\n")
    return 0 if all(r.ok for r in results) else 1


COMMANDS = {"caustic": cmd_caustic, "normals": cmd_normals, "doubles": cmd_doubles,
            "charges": cmd_charges, "atlas": cmd_atlas, "check": cmd_check}


def run(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    np.random.seed(args.seed)
    try:
        curve = parse_curve(args.curve)
        return COMMANDS[args.command](curve, args, out)
    except (ConfigError, OSError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except (GeometryError, OnCurve, OnCaustic) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
