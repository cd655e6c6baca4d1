"""Side-by-side verification of every structure against its brute oracle."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from . import oracle
from .counters import Counters
from .domcut import build_cutting2, build_cutting3, build_dominance3, query_dominance3
from .geom import Box2, ModelParams, DEFAULT_PARAMS, ValidationError, contains, rank_locate, rank_reduce
from .instances import Instance
from .pl3d import build_pl3, query_pl3
from .range2d import build_pl2, build_stab_count, query_pl2, query_stab_count
from .stab5 import build_leaf5, build_slow5, build_stab5, query_leaf5, query_slow5, query_stab5
from .stab6 import (
    build_stab6,
    build_zr4_fast,
    build_zr4_slow,
    build_zr6,
    query_stab6,
    query_zr4_fast,
    query_zr4_slow,
    query_zr6,
)
from .topk import build_topk_dom, build_topk_stab, query_topk_dom, query_topk_stab

STRUCTURES = (
    "pl3d", "stab5", "slow5", "leaf5", "stab6", "zr4slow", "zr4fast", "zr6",
    "topkdom", "topkstab", "pl2", "stab2count", "dom3", "cut2", "cut3",
)

KIND_OF = {
    "pl3d": "pl-disjoint",
    "stab5": "stab5",
    "slow5": "stab5",
    "leaf5": "stab5",
    "stab6": "stab6",
    "zr4slow": "zr4",
    "zr4fast": "zr4",
    "zr6": "zr6",
    "topkdom": "topk-dom",
    "topkstab": "topk-stab",
    "pl2": "pl-disjoint",
    "stab2count": "stab6",
    "dom3": "topk-dom",
    "cut2": "topk-dom",
    "cut3": "topk-dom",
}


@dataclass
class VerifyReport:
    structure: str
    n: int
    queries: int
    passed: bool
    build_ms: float
    mismatches: list = field(default_factory=list)

    def witness(self) -> str:
        lines = [f"{self.structure}: n={self.n}, {len(self.mismatches)} mismatches"]
        for w in self.mismatches[:5]:
            lines.append(f"  query={w[0]} expected={w[1]} got={w[2]}")
        return "\n".join(lines)


def _points_of(inst: Instance):
    return [(b.x[0], b.y[0], b.z[0]) for b in inst.boxes]


def _weighted_points_of(inst: Instance):
    return [(b.id, (b.x[0], b.y[0]), b.weight or 0) for b in inst.boxes]


def _qpoints(inst: Instance, n_queries: int, seed: int):
    rng = np.random.default_rng(seed ^ 0xC0FFEE)
    U = inst.universe
    lo, hi = -2, U + 2
    return [tuple(int(v) for v in rng.integers(lo, hi, 3)) for _ in range(n_queries)]


def _k_values(inst: Instance, params: ModelParams):
    n = max(1, inst.n)
    return sorted({0, 1, 2, params.t2(n), params.t1(n), n})


def verify(
    structure: str,
    inst: Instance,
    n_queries: int,
    seed: int,
    params: ModelParams = DEFAULT_PARAMS,
    tamper=None,
    level: int = 16,
    query_points=None,
) -> VerifyReport:
    """Build ``structure`` over ``inst`` and compare against the brute oracle
    on ``n_queries`` random query points (or the given ones); reports the
    first mismatches."""
    if structure not in STRUCTURES:
        raise ValidationError(f"unknown structure {structure!r}")
    boxes = list(inst.boxes)
    qs = [tuple(q[:3]) for q in query_points] if query_points else _qpoints(inst, n_queries, seed)
    rep = VerifyReport(structure=structure, n=inst.n, queries=n_queries, passed=True, build_ms=0.0)

    def check(q, expected, got):
        if isinstance(got, list):
            if len(got) != len(set(got)):
                rep.mismatches.append((q, expected, f"duplicates in {got}"))
                return
            if isinstance(expected, set):
                got = set(got)
        if expected != got:
            rep.mismatches.append((q, expected, got))

    t0 = time.perf_counter()

    if structure == "pl3d":
        rs, red = rank_reduce(boxes)
        U = tuple(max(2, rs.size(a)) for a in range(3))
        pl = build_pl3(red, U, params=params)
        rep.build_ms = (time.perf_counter() - t0) * 1e3
        if tamper:
            tamper(pl)
        by_id = {b.id: b for b in boxes}
        for q in qs:
            c = Counters()
            fl = rank_locate(rs, q, c)
            got = None
            if all(v >= 0 for v in fl):
                got = query_pl3(pl, fl, c)
                if got is not None and not contains(by_id[got], q):
                    got = None
            check(q, oracle.brute_locate(boxes, q), got)

    elif structure in ("stab5", "slow5", "leaf5"):
        if structure == "leaf5":
            params = ModelParams(
                W=params.W, eps=params.eps, tau=max(params.tau, inst.n),
                plateau_leaf=params.plateau_leaf, grid_override=params.grid_override,
            )
            s = build_leaf5(boxes, params)
            qf = query_leaf5
        elif structure == "slow5":
            s = build_slow5(boxes)
            qf = query_slow5
        else:
            s = build_stab5(boxes, params)
            qf = query_stab5
        rep.build_ms = (time.perf_counter() - t0) * 1e3
        if tamper:
            tamper(s)
        for q in qs:
            got = qf(s, q, Counters())
            check(q, oracle.brute_stab(boxes, q), got)

    elif structure == "stab6":
        s = build_stab6(boxes, f=inst.fanout, params=params)
        rep.build_ms = (time.perf_counter() - t0) * 1e3
        if tamper:
            tamper(s)
        for q in qs:
            got = query_stab6(s, q, Counters())
            check(q, oracle.brute_stab(boxes, q), got)

    elif structure in ("zr4slow", "zr4fast", "zr6"):
        f = inst.fanout or max(2, max((b.z[1] for b in boxes), default=1) + 1)
        if structure == "zr4slow":
            s = build_zr4_slow(boxes, f=f)
            qf = query_zr4_slow
        elif structure == "zr4fast":
            s = build_zr4_fast(boxes, f=f, params=params)
            qf = query_zr4_fast
        else:
            s = build_zr6(boxes, f=f, params=params)
            qf = query_zr6
        rep.build_ms = (time.perf_counter() - t0) * 1e3
        if tamper:
            tamper(s)
        rng = np.random.default_rng(seed ^ 0xBEEF)
        for q in qs:
            q = (q[0], q[1], int(rng.integers(0, f)))
            got = qf(s, q, Counters())
            check(q, oracle.brute_stab(boxes, q), got)

    elif structure == "topkdom":
        pts = _weighted_points_of(inst)
        s = build_topk_dom(pts, params)
        rep.build_ms = (time.perf_counter() - t0) * 1e3
        if tamper:
            tamper(s)
        ks = _k_values(inst, params)
        for q in qs:
            for k in ks:
                got = query_topk_dom(s, (q[0], q[1]), k, Counters())
                check((q[0], q[1], k), oracle.brute_topk_dominance(pts, (q[0], q[1]), k), got)

    elif structure == "topkstab":
        rects = inst.boxes2()
        s = build_topk_stab(rects, params)
        rep.build_ms = (time.perf_counter() - t0) * 1e3
        if tamper:
            tamper(s)
        ks = _k_values(inst, params)
        for q in qs:
            for k in ks:
                got = query_topk_stab(s, (q[0], q[1]), k, Counters())
                check((q[0], q[1], k), oracle.brute_topk_stab(rects, (q[0], q[1]), k), got)

    elif structure == "pl2":
        rects = inst.boxes2()
        pl = build_pl2(rects)
        rep.build_ms = (time.perf_counter() - t0) * 1e3
        if tamper:
            tamper(pl)
        for q in qs:
            got = query_pl2(pl, (q[0], q[1]), Counters())
            check((q[0], q[1]), oracle.brute_locate2(rects, (q[0], q[1])), got)

    elif structure == "stab2count":
        rects = inst.boxes2()
        s = build_stab_count(rects)
        rep.build_ms = (time.perf_counter() - t0) * 1e3
        if tamper:
            tamper(s)
        for q in qs:
            got = query_stab_count(s, (q[0], q[1]), Counters())
            check((q[0], q[1]), oracle.brute_count2(rects, (q[0], q[1])), got)

    elif structure == "dom3":
        pts = _points_of(inst)
        d = build_dominance3(pts)
        rep.build_ms = (time.perf_counter() - t0) * 1e3
        if tamper:
            tamper(d)
        for q in qs:
            got = query_dominance3(d, q, Counters())
            check(q, oracle.brute_dominance(pts, q), got)

    elif structure in ("cut2", "cut3"):
        pts = _points_of(inst)
        if structure == "cut2":
            pts2 = [(p[0], p[1]) for p in pts]
            cut = build_cutting2(pts2, level)
            r = oracle.verify_cutting(cut, pts2, level)
        else:
            cut = build_cutting3(pts, level)
            r = oracle.verify_cutting(cut, pts, level)
        rep.build_ms = (time.perf_counter() - t0) * 1e3
        if not r.ok:
            rep.mismatches.append(("cutting-properties", "pass", r))

    rep.passed = not rep.mismatches
    return rep
