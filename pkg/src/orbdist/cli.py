"""Command-line interface: ``orbdist <command> ...``.

Exit status: 0 on success, 2 when a result fails its consistency checks,
1 on input or runtime errors.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import bounds as bnd
from .batch import batch, format_records, format_summary
from .catalog import parse_catalog
from .critpoints import CriticalSet, moid
from .errors import NoMinimum, OrbDistError
from .methods import METHODS, best_set, compute
from .orbits import mutual_geometry
from .planar import PlanarPair, census, planar_critical_set
from .reference import compare_to_table, ten_point_pair

log = logging.getLogger("orbdist")

EXIT_OK, EXIT_ERROR, EXIT_CHECKS = 0, 1, 2
POINT_COLUMNS = ("method", "v1_deg", "v2_deg", "d", "type")


def _load_orbit(path: str, convention: str, name: str | None = None):
    cat = parse_catalog(path, convention)
    if not len(cat):
        raise OrbDistError(f"{path}: no orbit found")
    return cat.get(name) if name else cat.entries[0]


def _write(text: str, out: str | None):
    if out:
        Path(out).write_text(text)
        log.info("wrote %s", out)
    else:
        sys.stdout.write(text)


def _point_rows(cset: CriticalSet, units: str, anomaly: str):
    conv = math.degrees if units == "deg" else float
    for p in sorted(cset.points, key=lambda p: p.d):
        pair = p.eccentric if anomaly == "eccentric" else p.true
        yield cset.method, conv(pair.v1), conv(pair.v2), p.d, p.kind


def format_points(sets: list[CriticalSet], fmt: str = "tsv", units: str = "deg", anomaly: str = "eccentric") -> str:
    cols = list(POINT_COLUMNS)
    if units == "rad":
        cols[1:3] = ["v1_rad", "v2_rad"]
    rows = [r for cs in sets for r in _point_rows(cs, units, anomaly)]
    if fmt == "tsv":
        lines = ["\t".join(cols)] + ["\t".join((m, f"{a:.10f}", f"{b:.10f}", f"{d:.10f}", k)) for m, a, b, d, k in rows]
        return "\n".join(lines) + "\n"
    lines = [f"{cols[0]:<8} {cols[1]:>15} {cols[2]:>15} {cols[3]:>14}  {cols[4]}"]
    lines += [f"{m:<8} {a:>15.7f} {b:>15.7f} {d:>14.7f}  {k}" for m, a, b, d, k in rows]
    for cs in sets:
        ch = cs.checks
        verdict = "n/a" if ch is None else ("passed" if ch.passed else "FAILED " + ",".join(ch.failures()))
        tag = " (degenerate: continuum of critical points)" if cs.degenerate else ""
        err = f" error: {cs.error}" if cs.error else ""
        lines.append(f"# {cs.method}: {len(cs)} points, checks {verdict}{tag}{err}")
    return "\n".join(lines) + "\n"


def _solve(geom, method: str) -> list[CriticalSet]:
    if method == "all":
        return [compute(geom, m) for m in METHODS]
    if method == "planar":
        return [planar_critical_set(geom)]
    if method == "auto":
        return [best_set(geom)]
    return [compute(geom, method)]


def _status(sets) -> int:
    return EXIT_OK if all(cs.checks is not None and cs.checks.passed for cs in sets) else EXIT_CHECKS


# -- commands -----------------------------------------------------------------------

def cmd_critpoints(args) -> int:
    el1 = _load_orbit(args.orbit1, args.convention, args.name1)
    el2 = _load_orbit(args.orbit2, args.convention, args.name2)
    geom = mutual_geometry(el1, el2)
    sets = _solve(geom, args.method)
    _write(format_points(sets, args.format, args.units, args.anomaly), args.out)
    if args.plot:
        from .plotting import plot_level_curves

        plot_level_curves(geom, sets[0], args.plot)
    return _status(sets)


def cmd_moid(args) -> int:
    el1 = _load_orbit(args.orbit1, args.convention, args.name1)
    el2 = _load_orbit(args.orbit2, args.convention, args.name2)
    geom = mutual_geometry(el1, el2)
    sets = _solve(geom, args.method)
    lines = ["\t".join(("method", "d_min", "u1_deg", "u2_deg", "checks"))]
    for cs in sets:
        try:
            d, pair = moid(cs)
            row = (cs.method, f"{d:.12g}", f"{math.degrees(pair.v1):.8f}", f"{math.degrees(pair.v2):.8f}")
        except NoMinimum:
            row = (cs.method, "nan", "nan", "nan")
        verdict = "pass" if cs.checks and cs.checks.passed else "fail"
        lines.append("\t".join(row + (verdict,)))
    _write("\n".join(lines) + "\n", args.out)
    return _status(sets)


def cmd_batch(args) -> int:
    cat = parse_catalog(args.catalog, args.convention)
    methods = [m.strip().lower() for m in args.methods.split(",") if m.strip()]
    for m in methods:
        if m not in METHODS + ("all",):
            raise OrbDistError(f"unknown method {m!r}")
    records, summary = batch(cat, args.pairs, methods, args.jobs)
    if args.out:
        Path(args.out).write_text(format_records(records))
        log.info("wrote %s", args.out)
    _write(format_summary(summary), args.summary)
    if args.plot:
        from .plotting import plot_failure_rates

        plot_failure_rates(summary, args.plot)
    pairs = {}
    for r in records:
        pairs.setdefault((r.orbit1, r.orbit2), []).append(r.passed)
    return EXIT_OK if all(any(v) for v in pairs.values()) else EXIT_CHECKS


def _parse_grid(text: str) -> tuple[int, int]:
    try:
        a, b = text.lower().split("x")
        return int(a), int(b)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NxM, got {text!r}") from None


def cmd_bounds(args) -> int:
    nq, nw = args.grid
    grid = bnd.GridSpec(nq, nw, args.q_max)
    if args.kind == "circular":
        ne, na = args.samples or (15, 15)
        sampler = bnd.SamplerSpec(ne, na, 0.999, math.pi / 2)
        rows = bnd.bound_harness("circular", grid, sampler, r2=args.r2, method=args.method, jobs=args.jobs)
        title = f"circular orbit, r2 = {args.r2:g} au"
    else:
        ne, na = args.samples or (11, 11)
        sampler = bnd.SamplerSpec(ne, na, 1.0, math.pi)
        inc = None if args.no_dmin else args.inclination
        rows = bnd.bound_harness("nodal", grid, sampler, q2=args.q2, e2=args.e2, inclination=inc,
                                 method=args.method, jobs=args.jobs)
        title = f"nodal bound, e2 = {args.e2:g}"
    _write(bnd.format_rows(rows), args.out)
    if args.plot:
        from .plotting import plot_bound_grid

        plot_bound_grid(rows, args.plot, title)
    bad = [r for r in rows if not r.ok()]
    for r in bad:
        log.warning("bound exceeded at q=%.4f omega=%.4f: %.3g > %.3g (d_min violations %d)",
                    r.q, r.omega, r.empirical_max, r.bound, r.dmin_violations)
    return EXIT_CHECKS if bad else EXIT_OK


def cmd_planar(args) -> int:
    if args.census:
        res = census(args.census, args.seed)
        _write(res.table(), args.out)
        log.info("max count %d (circle-ellipse %d), %d pairs failed checks",
                 res.max_count, res.max_circular_count, res.failures)
        if args.plot:
            from .plotting import plot_census

            plot_census(res, args.plot)
        return EXIT_OK if res.max_count <= 12 and res.max_circular_count <= 6 and not res.failures else EXIT_CHECKS
    if not (args.orbit1 and args.orbit2):
        raise OrbDistError("planar needs --orbit1 and --orbit2, or --census N")
    el1 = _load_orbit(args.orbit1, args.convention, args.name1)
    el2 = _load_orbit(args.orbit2, args.convention, args.name2)
    geom = mutual_geometry(el1, el2)
    cset = planar_critical_set(PlanarPair.from_geometry(geom))
    _write(format_points([cset], args.format, args.units, args.anomaly), args.out)
    if args.plot:
        from .plotting import plot_level_curves

        plot_level_curves(geom, cset, args.plot)
    return _status([cset])


def cmd_selftest(args) -> int:
    el1, el2 = ten_point_pair()
    geom = mutual_geometry(el1, el2)
    ok = True
    for m in METHODS + ("planar",):
        cs = planar_critical_set(geom) if m == "planar" else compute(geom, m)
        matched, ang, dd, kinds = compare_to_table(cs)
        good = matched and kinds and ang <= 1e-4 and dd <= 1e-6 and cs.checks.passed
        ok &= good
        print(f"{'PASS' if good else 'FAIL'}  {m:<7} points={len(cs):2d} angle_err={ang:.2e} deg "
              f"d_err={dd:.2e} au checks={'ok' if cs.checks.passed else ','.join(cs.checks.failures())}")
    return EXIT_OK if ok else EXIT_CHECKS


# -- parser -----------------------------------------------------------------------

def _orbit_args(p, required=True):
    p.add_argument("--orbit1", required=required, help="catalog file holding the first orbit")
    p.add_argument("--orbit2", required=required, help="catalog file holding the second orbit")
    p.add_argument("--name1", help="entry name in --orbit1 (default: first entry)")
    p.add_argument("--name2", help="entry name in --orbit2 (default: first entry)")
    p.add_argument("--convention", choices=("cometary", "keplerian"), default="cometary",
                   help="second column is q (cometary) or a (keplerian)")


def _point_format_args(p):
    p.add_argument("--units", choices=("deg", "rad"), default="deg")
    p.add_argument("--anomaly", choices=("eccentric", "true"), default="eccentric")
    p.add_argument("--format", choices=("table", "tsv"), default="table")
    p.add_argument("--out", help="output file (default: stdout)")
    p.add_argument("--plot", help="write a level-curve figure to this file")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="orbdist", description="Critical points of the distance between two orbits.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)
    method_choices = METHODS + ("all", "auto", "planar")

    p = sub.add_parser("critpoints", help="all critical points of d^2 for two orbits")
    _orbit_args(p)
    p.add_argument("--method", choices=method_choices, default="auto")
    _point_format_args(p)
    p.set_defaults(func=cmd_critpoints)

    p = sub.add_parser("moid", help="minimum orbit distance")
    _orbit_args(p)
    p.add_argument("--method", choices=method_choices, default="auto")
    p.add_argument("--out")
    p.set_defaults(func=cmd_moid)

    p = sub.add_parser("batch", help="pairwise runs over a catalog with per-method failure rates")
    p.add_argument("--catalog", required=True)
    p.add_argument("--convention", choices=("cometary", "keplerian"), default="cometary")
    p.add_argument("--pairs", default="all", help="'all' or 'vs:NAME'")
    p.add_argument("--methods", default="all", help="comma-separated list or 'all'")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="per-pair records (TSV)")
    p.add_argument("--summary", help="summary table (TSV, default: stdout)")
    p.add_argument("--plot", help="write a failure-rate figure to this file")
    p.set_defaults(func=cmd_batch)

    p = sub.add_parser("bounds", help="compare sampled maxima with the analytic bounds on a (q, omega) grid")
    p.add_argument("kind", choices=("circular", "nodal"))
    p.add_argument("--grid", type=_parse_grid, default=(20, 20), help="QxW cells")
    p.add_argument("--samples", type=_parse_grid, help="ExA samples of (e1, angle) per cell")
    p.add_argument("--q-max", type=float, default=bnd.Q_MAX)
    p.add_argument("--r2", type=float, default=1.0, help="circular radius (circular harness)")
    p.add_argument("--e2", type=float, default=0.2, help="second eccentricity (nodal harness)")
    p.add_argument("--q2", type=float, help="second pericenter distance (default: conic parameter 1)")
    p.add_argument("--inclination", type=float, default=1.0, help="mutual inclination (rad) for the d_min check")
    p.add_argument("--no-dmin", action="store_true", help="nodal harness: skip the d_min <= nodal distance check")
    p.add_argument("--method", default="auto")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out")
    p.add_argument("--plot", help="write the bound surface with the empirical maxima to this file")
    p.set_defaults(func=cmd_bounds)

    p = sub.add_parser("planar", help="coplanar pairs: critical points or a random census")
    _orbit_args(p, required=False)
    _point_format_args(p)
    p.add_argument("--census", type=int, default=0, help="number of random pairs per population")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_planar)

    p = sub.add_parser("selftest", help="reproduce the ten-point coplanar example with every method")
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (OrbDistError, OSError, KeyError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
