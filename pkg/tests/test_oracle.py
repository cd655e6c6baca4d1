import numpy as np
import pytest

from boxstab.geom import Box2, Box3
from boxstab.oracle import (
    NotDisjointError,
    brute_count,
    brute_dominance,
    brute_dominance_sweep,
    brute_locate,
    brute_stab,
    brute_topk_dominance,
    brute_topk_stab,
)


def cube(id, lo, hi):
    return Box3(id, (lo, hi), (lo, hi), (lo, hi))


class TestBruteLocate:
    def test_single_hit(self):
        assert brute_locate([cube(7, 0, 1)], (0, 0, 0)) == 7

    def test_miss(self):
        assert brute_locate([cube(7, 0, 1)], (5, 5, 5)) is None

    def test_overlap_detected(self):
        with pytest.raises(NotDisjointError):
            brute_locate([cube(0, 0, 2), cube(1, 1, 3)], (1, 1, 1))


class TestBruteStab:
    def test_empty(self):
        assert brute_stab([], (0, 0, 0)) == set()
        assert brute_count([], (0, 0, 0)) == 0

    def test_nested(self):
        boxes = [cube(0, 0, 10), cube(1, 2, 5)]
        assert brute_stab(boxes, (3, 3, 3)) == {0, 1}
        assert brute_count(boxes, (3, 3, 3)) == 2

    def test_count_equals_set_size(self):
        rng = np.random.default_rng(0)
        boxes = []
        for i in range(100):
            iv = [tuple(sorted(rng.integers(0, 50, 2).tolist())) for _ in range(3)]
            boxes.append(Box3(i, *iv))
        for _ in range(50):
            q = tuple(int(v) for v in rng.integers(0, 50, 3))
            assert brute_count(boxes, q) == len(brute_stab(boxes, q))


class TestBruteDominance:
    def test_all(self):
        pts = [(3, 4), (5, 6), (3, 9)]
        assert brute_dominance(pts, (3, 4)) == {0, 1, 2}

    def test_none(self):
        pts = [(3, 4), (5, 6)]
        assert brute_dominance(pts, (6, 10)) == set()

    def test_against_sweep(self):
        rng = np.random.default_rng(1)
        for dim in (2, 3):
            pts = [tuple(int(v) for v in rng.integers(0, 20, dim)) for _ in range(50)]
            for _ in range(50):
                q = tuple(int(v) for v in rng.integers(0, 20, dim))
                assert brute_dominance(pts, q) == brute_dominance_sweep(pts, q)


class TestBruteTopK:
    def test_k_zero(self):
        assert brute_topk_dominance([(0, (0, 0), 5)], (0, 0), 0) == []

    def test_k_exceeds(self):
        pts = [(0, (1, 1), 5), (1, (2, 2), 9)]
        assert brute_topk_dominance(pts, (0, 0), 10) == [1, 0]

    def test_tie_by_id(self):
        pts = [(4, (1, 1), 5), (2, (2, 2), 5), (9, (3, 3), 5)]
        assert brute_topk_dominance(pts, (0, 0), 3) == [2, 4, 9]

    def test_stab_variant(self):
        rects = [
            Box2(0, (0, 10), (0, 10), weight=3),
            Box2(1, (2, 4), (2, 4), weight=8),
            Box2(2, (5, 9), (5, 9), weight=8),
        ]
        assert brute_topk_stab(rects, (3, 3), 2) == [1, 0]
        assert brute_topk_stab(rects, (6, 6), 2) == [2, 0]
