"""Pairwise runs over a catalog with check accounting per method."""

from __future__ import annotations

import itertools
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

from .catalog import Catalog
from .critpoints import CriticalSet, moid
from .errors import NoMinimum
from .methods import CONSENSUS_ORDER, METHODS, compute, consensus
from .orbits import KeplerianElements, mutual_geometry
from .planar import planar_critical_set

RECORD_COLUMNS = ("orbit1", "orbit2", "method", "n_points", "n_min", "n_max", "d_min",
                  "W", "M", "dmin", "degenerate", "source", "error")


@dataclass(frozen=True)
class RunRecord:
    orbit1: str
    orbit2: str
    method: str
    n_points: int
    n_min: int
    n_max: int
    d_min: float
    weierstrass: bool
    morse: bool | None
    dmin_ok: bool
    degenerate: bool = False
    source: str = ""  # for consensus records: the method that supplied the set
    error: str = ""
    wall_time: float = 0.0

    @property
    def passed(self) -> bool:
        return self.weierstrass and self.morse is not False and self.dmin_ok

    def row(self, sep: str = "\t") -> str:
        def flag(v):
            return "na" if v is None else ("pass" if v else "fail")

        vals = (self.orbit1, self.orbit2, self.method, self.n_points, self.n_min, self.n_max,
                f"{self.d_min:.12g}", flag(self.weierstrass), flag(self.morse), flag(self.dmin_ok),
                int(self.degenerate), self.source, self.error.replace(sep, " "))
        return sep.join(str(v) for v in vals)


def record_from_set(name1: str, name2: str, method: str, cset: CriticalSet, wall: float = 0.0,
                    source: str = "") -> RunRecord:
    ch = cset.checks
    try:
        d = moid(cset)[0]
    except NoMinimum:
        d = math.nan
    return RunRecord(name1, name2, method, len(cset), cset.count("minimum"), cset.count("maximum"), d,
                     bool(ch and ch.weierstrass), None if ch is None else ch.morse, bool(ch and ch.dmin_sampling),
                     cset.degenerate, source, cset.error or "", wall)


def run_pair(el1: KeplerianElements, el2: KeplerianElements, method: str = "all") -> list[RunRecord]:
    """Records for one pair; ``all`` gives one record per method plus a consensus record.

    Solver errors are kept in the record instead of being raised.
    """
    geom = mutual_geometry(el1, el2)
    n1, n2 = el1.name, el2.name
    methods = METHODS if method == "all" else (method,)
    results, records = {}, []
    for m in methods:
        t0 = time.perf_counter()
        if m == "planar":
            cset = planar_critical_set(geom)
        else:
            cset = compute(geom, m)
        results[m] = cset
        records.append(record_from_set(n1, n2, m, cset, time.perf_counter() - t0))
    if method == "all":
        best = consensus(results)
        if best is None and geom.coplanar:
            cand = planar_critical_set(geom)
            best = cand if cand.checks.passed else None
        if best is None:
            records.append(RunRecord(n1, n2, "consensus", 0, 0, 0, math.nan, False, False, False,
                                     error="no method passed all checks"))
        else:
            records.append(record_from_set(n1, n2, "consensus", best, source=best.method))
    return records


def pairings(catalog: Catalog, pairs: str = "all") -> list[tuple[KeplerianElements, KeplerianElements]]:
    """``all``: every unordered pair; ``vs:NAME``: every other entry against NAME."""
    entries = list(catalog)
    if pairs == "all":
        return list(itertools.combinations(entries, 2))
    if pairs.startswith("vs:"):
        ref = catalog.get(pairs[3:])
        return [(el, ref) for el in entries if el.name != ref.name]
    raise ValueError(f"unknown pairing {pairs!r}; use 'all' or 'vs:NAME'")


def _run_task(task):
    el1, el2, methods = task
    if len(methods) == len(METHODS) and set(methods) == set(METHODS):
        return run_pair(el1, el2, "all")
    return [r for m in methods for r in run_pair(el1, el2, m)]


def batch(catalog: Catalog, pairs: str = "all", methods: Sequence[str] = ("all",), jobs: int = 1
          ) -> tuple[list[RunRecord], list["SummaryRow"]]:
    """Run every pair; records come back in input order whatever ``jobs`` is."""
    ms = tuple(METHODS) if "all" in methods else tuple(methods)
    tasks = [(a, b, ms) for a, b in pairings(catalog, pairs)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            chunks = list(pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (4 * jobs))))
    else:
        chunks = [_run_task(t) for t in tasks]
    records = [r for chunk in chunks for r in chunk]
    order = [m for m in CONSENSUS_ORDER if m in ms] + [m for m in ms if m not in CONSENSUS_ORDER]
    return records, summarize(records, order)


@dataclass(frozen=True)
class SummaryRow:
    method: str
    pairs: int
    w_fail: float
    m_fail: float
    dmin_fail: float
    any_fail: float
    errors: int

    def row(self, sep: str = "\t") -> str:
        return sep.join([self.method, str(self.pairs), *(f"{v:.4f}" for v in
                        (self.w_fail, self.m_fail, self.dmin_fail, self.any_fail)), str(self.errors)])


SUMMARY_COLUMNS = ("method", "pairs", "pct_W_fail", "pct_M_fail", "pct_dmin_fail", "pct_any_fail", "errors")


def summarize(records: Iterable[RunRecord], methods: Sequence[str] | None = None) -> list[SummaryRow]:
    """Failure percentages of each check per method."""
    by = {}
    for r in records:
        if r.method != "consensus":
            by.setdefault(r.method, []).append(r)
    out = []
    for m in methods if methods is not None else sorted(by):
        rs = by.get(m, [])
        n = len(rs)

        def pct(k):
            return 100.0 * k / n if n else 0.0

        out.append(SummaryRow(m, n, pct(sum(not r.weierstrass for r in rs)), pct(sum(r.morse is False for r in rs)),
                              pct(sum(not r.dmin_ok for r in rs)), pct(sum(not r.passed for r in rs)),
                              sum(bool(r.error) for r in rs)))
    return out


def format_records(records: Iterable[RunRecord], sep: str = "\t") -> str:
    return "\n".join([sep.join(RECORD_COLUMNS), *(r.row(sep) for r in records)]) + "\n"


def format_summary(rows: Iterable[SummaryRow], sep: str = "\t") -> str:
    return "\n".join([sep.join(SUMMARY_COLUMNS), *(r.row(sep) for r in rows)]) + "\n"
