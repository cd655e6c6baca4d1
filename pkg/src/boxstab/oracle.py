"""Brute-force reference implementations and the shallow-cutting verifier.

Every oracle here is deterministic, pure, and linear-time per query; they are
the ground truth that the real structures are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .geom import Box2, Box3, ValidationError, contains, contains2


class NotDisjointError(ValidationError):
    """Point-location input contained two boxes covering the same point."""


# ---------------------------------------------------------------------------
# point location / stabbing / dominance


def brute_locate(boxes: list[Box3], q: tuple[int, int, int]) -> int | None:
    hit = None
    for b in boxes:
        if contains(b, q):
            if hit is not None:
                raise NotDisjointError(
                    f"boxes {hit} and {b.id} both contain {q}; input not disjoint"
                )
            hit = b.id
    return hit


def brute_locate2(rects: list[Box2], q: tuple[int, int]) -> int | None:
    hit = None
    for r in rects:
        if contains2(r, q):
            if hit is not None:
                raise NotDisjointError(
                    f"rects {hit} and {r.id} both contain {q}; input not disjoint"
                )
            hit = r.id
    return hit


def brute_stab(boxes: list[Box3], q: tuple[int, int, int]) -> set[int]:
    return {b.id for b in boxes if contains(b, q)}


def brute_stab2(rects: list[Box2], q: tuple[int, int]) -> set[int]:
    return {r.id for r in rects if contains2(r, q)}


def brute_count(boxes: list[Box3], q: tuple[int, int, int]) -> int:
    return len(brute_stab(boxes, q))


def brute_count2(rects: list[Box2], q: tuple[int, int]) -> int:
    return len(brute_stab2(rects, q))


def brute_dominance(points, q) -> set[int]:
    """Ids (positions) of points >= q component-wise; closed, 2-d or 3-d."""
    return {
        i
        for i, p in enumerate(points)
        if all(c >= qc for c, qc in zip(p, q))
    }


def brute_dominance_sweep(points, q) -> set[int]:
    """Independent check of brute_dominance via a sort-based sweep."""
    order = sorted(range(len(points)), key=lambda i: points[i][0])
    out = set()
    # points with first coord >= q[0] form a suffix of the sorted order
    for i in reversed(order):
        p = points[i]
        if p[0] < q[0]:
            break
        if all(c >= qc for c, qc in zip(p[1:], q[1:])):
            out.add(i)
    return out


# ---------------------------------------------------------------------------
# top-k oracles (weight descending, ties by ascending id)


def _topk_sort(matches: list[tuple[int, int]], k: int) -> list[int]:
    matches.sort(key=lambda t: (-t[1], t[0]))
    return [pid for pid, _ in matches[: max(0, k)]]


def brute_topk_dominance(points, q, k: int) -> list[int]:
    """Top-k heaviest points dominating q; points = (id, (x, y), weight)."""
    matches = [(pid, w) for pid, coords, w in points if all(c >= qc for c, qc in zip(coords, q))]
    return _topk_sort(matches, k)


def brute_topk_stab(rects: list[Box2], q: tuple[int, int], k: int) -> list[int]:
    matches = [(r.id, r.weight or 0) for r in rects if contains2(r, q)]
    return _topk_sort(matches, k)


# ---------------------------------------------------------------------------
# shallow-cutting verifier


@dataclass
class CuttingReport:
    ok: bool
    cells_ok: bool
    coverage_ok: bool
    conflict_ok: bool
    n_cells: int
    cell_bound: float
    max_conflict: int
    conflict_bound: int
    witnesses: list = field(default_factory=list)


def _coverage2(points_xy, corners, t, max_grid=4096):
    """Exhaustive rank-grid coverage check for a 2-d cutting.

    Uses the per-column reduction: for column x̂ the needed region is
    ŷ >= f_t(x̂), so it suffices that the best corner at or left of x̂ has
    b <= f_t(x̂).  Exact for every grid point; columns are subsampled only
    above ``max_grid`` distinct values.
    """
    if len(points_xy) == 0:
        return True, None
    px = np.asarray([p[0] for p in points_xy], dtype=np.int64)
    py = np.asarray([p[1] for p in points_xy], dtype=np.int64)
    X = np.unique(px)
    Y = np.unique(py)
    if len(X) > max_grid:
        X = X[:: len(X) // max_grid + 1]
    # suffix count matrix S[i, j] = #{p : p.x >= X[i], p.y >= Y[j]}
    H = np.zeros((len(X), len(Y)), dtype=np.int64)
    xi = np.searchsorted(X, px, side="right") - 1  # column of each point
    yi = np.searchsorted(Y, py)
    keep = xi >= 0
    np.add.at(H, (xi[keep], yi[keep]), 1)
    S = np.flip(np.cumsum(np.flip(H, 0), axis=0), 0)
    S = np.flip(np.cumsum(np.flip(S, 1), axis=1), 1)

    if corners:
        ca = np.asarray([c[0] for c in corners], dtype=np.int64)
        cb = np.asarray([c[1] for c in corners], dtype=np.int64)
        order = np.argsort(ca, kind="stable")
        ca, cb = ca[order], cb[order]
        pref_min_b = np.minimum.accumulate(cb)
    else:
        ca = np.empty(0, dtype=np.int64)
        pref_min_b = np.empty(0, dtype=np.int64)

    need = S <= t
    has_need = need.any(axis=1)
    first_j = np.argmax(need, axis=1)
    kidx = np.searchsorted(ca, X, side="right")
    for i in range(len(X)):
        if not has_need[i]:
            continue
        fy = Y[first_j[i]]
        if kidx[i] == 0 or pref_min_b[kidx[i] - 1] > fy:
            return False, (int(X[i]), int(fy))
    return True, None


def _coverage3(points_xyz, boxes, t, max_grid=4096):
    """Exhaustive rank-grid coverage check for a 3-d cutting.

    Sweeps distinct z descending, maintaining per x-column the (t+1)-th
    largest y among active points (top lists of size t+1 per column), plus
    the prefix-min corner staircase of the boxes alive at that z.
    """
    if len(points_xyz) == 0:
        return True, None
    P = np.asarray(points_xyz, dtype=np.int64)
    X = np.unique(P[:, 0])
    Y = np.unique(P[:, 1])
    Z = np.unique(P[:, 2])[::-1]  # descending
    if len(Z) > max_grid:
        Z = Z[:: len(Z) // max_grid + 1]

    nx = len(X)
    NEG = np.int64(-(2**62))
    top = np.full((nx, t + 1), NEG, dtype=np.int64)  # rows ascending

    if boxes:
        ba = np.asarray([b[0] for b in boxes], dtype=np.int64)
        bb = np.asarray([b[1] for b in boxes], dtype=np.int64)
        bc = np.asarray([b[2] for b in boxes], dtype=np.int64)
        order = np.argsort(ba, kind="stable")
        ba, bb, bc = ba[order], bb[order], bc[order]
    else:
        ba = bb = bc = np.empty(0, dtype=np.int64)

    pz_order = np.argsort(-P[:, 2], kind="stable")
    P = P[pz_order]
    pos = 0
    POSI = np.int64(2**62)
    kidx = np.searchsorted(ba, X, side="right")  # boxes with a <= X[i]
    for zv in Z:
        while pos < len(P) and P[pos, 2] >= zv:
            x, y = P[pos, 0], P[pos, 1]
            ci = int(np.searchsorted(X, x, side="right"))
            rows = top[:ci]
            mask = rows[:, 0] < y
            if mask.any():
                rows[mask, 0] = y
                top[:ci][mask] = np.sort(rows[mask], axis=1)
            pos += 1
        thresh = top[:, 0]  # (t+1)-th largest active y per column, NEG if < t+1
        js = np.searchsorted(Y, thresh + 1)
        needy = js < len(Y)  # columns where some grid y has <= t dominators
        if not needy.any():
            continue
        # prefix-min b over boxes alive at this z (z-corner <= zv), a-sorted
        alive = bc <= zv
        pref = np.minimum.accumulate(np.where(alive, bb, POSI))
        fy = Y[np.minimum(js, len(Y) - 1)]
        best_b = np.where(kidx > 0, pref[np.maximum(kidx - 1, 0)], POSI)
        bad = needy & (best_b > fy)
        if bad.any():
            i = int(np.argmax(bad))
            return False, (int(X[i]), int(fy[i]), int(zv))
    return True, None


def verify_cutting(cutting, points, t, c_cells=8, c_conflict=4) -> CuttingReport:
    """Check the three shallow-cutting properties plus conflict-list exactness.

    ``cutting`` needs ``corners`` (list of 2- or 3-tuples) and ``conflicts``
    (list of id lists, parallel to corners).  ``points`` is a list of 2- or
    3-tuples whose ids are their positions.  Failures are reported, never
    raised.
    """
    corners = list(cutting.corners)
    conflicts = list(cutting.conflicts)
    n = len(points)
    witnesses = []

    n_cells = len(corners)
    cell_bound = c_cells * (n / max(1, t) + 1)
    cells_ok = n_cells <= cell_bound

    conflict_bound = c_conflict * t
    max_conflict = max((len(c) for c in conflicts), default=0)
    conflict_ok = max_conflict <= conflict_bound
    if not conflict_ok:
        witnesses.append(("conflict-size", max_conflict))

    # conflict lists must equal the exact dominator sets of their corners
    if n and corners:
        P = np.asarray(points, dtype=np.int64)
        for idx, (corner, conf) in enumerate(zip(corners, conflicts)):
            mask = np.ones(n, dtype=bool)
            for d, cval in enumerate(corner):
                mask &= P[:, d] >= cval
            exact = set(np.nonzero(mask)[0].tolist())
            if exact != set(conf):
                conflict_ok = False
                witnesses.append(("conflict-exact", idx))
                break

    if n == 0:
        coverage_ok = True
    elif len(points[0]) == 2:
        coverage_ok, wit = _coverage2(points, corners, t)
        if not coverage_ok:
            witnesses.append(("coverage", wit))
    else:
        coverage_ok, wit = _coverage3(points, corners, t)
        if not coverage_ok:
            witnesses.append(("coverage", wit))

    return CuttingReport(
        ok=cells_ok and coverage_ok and conflict_ok,
        cells_ok=cells_ok,
        coverage_ok=coverage_ok,
        conflict_ok=conflict_ok,
        n_cells=n_cells,
        cell_bound=cell_bound,
        max_conflict=max_conflict,
        conflict_bound=conflict_bound,
        witnesses=witnesses,
    )
