"""3-d orthogonal point location, end to end.

Builds the square-root recursion structure over a random box subdivision,
locates a few points, and prints the measured query/space profile next to
the budgets the recurrences predict.
"""

import math

import numpy as np

from boxstab import Counters, brute_locate, contains, rank_locate, rank_reduce
from boxstab.instances import gen
from boxstab.pl3d import build_pl3, query_pl3

n = 5000
inst = gen("pl-subdivision-pruned", n, 4 * n, seed=42)
boxes = list(inst.boxes)
print(f"instance: {n} disjoint boxes in [0,{inst.universe})^3")

# rank-space reduction first; queries arrive raw and get floor-located
rs, reduced = rank_reduce(boxes)
universes = tuple(max(2, rs.size(a)) for a in range(3))
pl = build_pl3(reduced, universes)
print(f"rank universes: {universes}")

by_id = {b.id: b for b in boxes}
rng = np.random.default_rng(7)
hits = 0
comparisons = []
for _ in range(2000):
    q = tuple(int(v) for v in rng.integers(0, inst.universe, 3))
    c = Counters()
    fl = rank_locate(rs, q, c)
    got = None
    if all(v >= 0 for v in fl):
        got = query_pl3(pl, fl, c)
        if got is not None and not contains(by_id[got], q):
            got = None
    assert got == brute_locate(boxes, q)
    hits += got is not None
    comparisons.append(c.predecessor_steps + c.cells_scanned)

rep = pl.space_report()
print(f"2000 queries, {hits} hits, all equal to the brute oracle")
print(f"mean comparisons/query: {np.mean(comparisons):.0f} "
      f"(log2 n = {math.log2(n):.1f})")
print(f"structure bits: {rep['pl2'] + rep['stab2'] + rep['piece_map']:,} "
      f"vs budget {int(64 * n * math.log2(2 * n)):,}")
print(f"piece incidences: {pl.piece_incidences:,}")
