"""Shallow cuttings: staircase cells, the verifier, and FIND-ANY labels."""

import numpy as np

from boxstab import verify_cutting
from boxstab.domcut import build_cutting2, build_cutting3, find_any

rng = np.random.default_rng(19)
n, t = 1500, 12
pts2 = [tuple(int(v) for v in rng.integers(0, 3000, 2)) for _ in range(n)]

cut2 = build_cutting2(pts2, t)
rep = verify_cutting(cut2, pts2, t)
print(f"2-d cutting at level t={t}: {rep.n_cells} cells "
      f"(bound {rep.cell_bound:.0f}), max conflict {rep.max_conflict} "
      f"(bound {rep.conflict_bound})")
print(f"verifier: cells={rep.cells_ok} coverage={rep.coverage_ok} "
      f"conflicts={rep.conflict_ok}")
assert rep.ok

# the corner staircase descends in y as x grows
a_prev, b_prev = None, None
for a, b in cut2.corners[:8]:
    print(f"  corner ({a:>5}, {b:>5})")

pts3 = [tuple(int(v) for v in rng.integers(0, 3000, 3)) for _ in range(n)]
cut3 = build_cutting3(pts3, t)
rep3 = verify_cutting(cut3, pts3, t)
print(f"\n3-d cutting: {rep3.n_cells} cells, verifier ok={rep3.ok}")

# FIND-ANY point-locates the xy-subdivision and returns the box with the
# smallest z-corner whose footprint covers the query
covered = misses = 0
for _ in range(2000):
    qx, qy = int(rng.integers(-100, 3100)), int(rng.integers(-100, 3100))
    label = find_any(cut3, qx, qy)
    if label is None:
        misses += 1
        assert not any(a <= qx and b <= qy for a, b, _ in cut3.corners)
    else:
        covered += 1
        a, b, c = cut3.corners[label]
        assert a <= qx and b <= qy
        better = [i for i, (a2, b2, c2) in enumerate(cut3.corners)
                  if a2 <= qx and b2 <= qy and (c2, i) < (c, label)]
        assert not better
print(f"find-any: {covered} covered, {misses} outside all footprints, "
      f"labels minimal in z-corner")
