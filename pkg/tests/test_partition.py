import numpy as np
import pytest

from mha.core import ObservationRangeError
from mha.partition import (ContextIndex, ContextString, PartitionFamily, match_set,
                           quantize_window)

F1 = PartitionFamily(D=1.0, d=1)


def scan_match_set(history, n, k, h, w, family):
    """Definitional scan over k < i < n (1-based)."""
    ids = [family.quantize(x, h) for x in history]
    out = []
    for i in range(k + 1, n):
        if tuple(ids[i - 1 - k:i - 1]) == tuple(w):
            out.append(i)
    return out


def test_quantize_midpoint_and_boundaries():
    assert F1.quantize([0.1], 1) == 1
    assert F1.quantize([-1.0], 1) == 0
    assert F1.quantize([1.0], 1) == 1
    assert F1.quantize([0.0], 1) == 1  # edge goes to the upper cell


def test_quantize_2d_lexicographic():
    F2 = PartitionFamily(D=1.0, d=2)
    assert F2.axis_indices([[-0.9, 0.9]], 2).tolist() == [[0, 3]]
    assert F2.quantize([-0.9, 0.9], 2) == 3
    # all 16 cells reachable from cell centres, each exactly once
    centres = [(-1 + 0.25 + 0.5 * i, -1 + 0.25 + 0.5 * j) for i in range(4) for j in range(4)]
    ids = [F2.quantize(c, 2) for c in centres]
    assert ids == list(range(16))


def test_out_of_cube_is_loud():
    with pytest.raises(ObservationRangeError):
        F1.quantize([1.0001], 3)


def test_nesting_and_diameter(rng):
    for d in (1, 2, 3):
        fam = PartitionFamily(D=2.0, d=d)
        X = rng.uniform(-2, 2, (10_000, d))
        for h in range(1, 6):
            fine = fam.quantize_many(X, h + 1)
            coarse = fam.quantize_many(X, h)
            parents = np.array([fam.parent(c, h + 1) for c in fine])
            assert np.array_equal(parents, coarse)
            assert fam.max_diameter(h) == pytest.approx(4.0 * np.sqrt(d) / 2**h)
        # points sharing a cell are within the cell diameter
        ids = fam.quantize_many(X, 3)
        for c in np.unique(ids)[:20]:
            pts = X[ids == c]
            if len(pts) > 1:
                spread = np.max(np.linalg.norm(pts[:, None] - pts[None], axis=-1))
                assert spread <= fam.max_diameter(3) + 1e-12


def test_quantize_deterministic(rng):
    X = rng.uniform(-1, 1, (100, 1))
    assert np.array_equal(F1.quantize_many(X, 4), F1.quantize_many(X.copy(), 4))


def test_quantize_window_examples():
    hist = [[0.3], [-0.5], [0.5]]
    assert quantize_window(hist, 4, 1, 1, F1) == ContextString((1,))
    assert quantize_window([[0.9], [-0.5], [0.5]], 4, 2, 1, F1).ids == (0, 1)
    assert quantize_window(hist[:2], 3, 3, 1, F1) is None


def test_context_string_encoding():
    w = ContextString((1, 258))
    assert w.k == 2
    assert w.key() == (1).to_bytes(8, "little") + (258).to_bytes(8, "little")


def test_match_set_examples():
    hist = [[0.5], [-0.5], [0.5], [-0.5]]
    assert match_set(hist, 5, 1, 1, (1,), F1) == [2, 4]
    assert match_set(hist, 5, 1, 1, (0,), F1) == [3]
    assert match_set(hist, 2, 1, 1, (1,), F1) == []
    assert match_set(hist, 3, 2, 1, (1, 0), F1) == []


def test_incremental_index_equals_scan(rng):
    for trial in range(6):
        N = int(rng.integers(1, 500))
        d = 1 + trial % 2
        fam = PartitionFamily(D=1.0, d=d)
        # coarse support so contexts repeat
        hist = rng.choice([-0.9, -0.2, 0.3, 0.8], size=(N, d))
        for k in range(1, 4):
            for h in range(1, 4):
                idx = ContextIndex(fam, k, h)
                for x in hist:
                    idx.push(x)
                for n in sorted({N + 1, max(1, N // 2), k + 2}):
                    w = quantize_window(hist, n, k, h, fam)
                    if w is None:
                        continue
                    want = scan_match_set(hist, n, k, h, w.ids, fam)
                    assert idx.lookup(w, n) == want
                    assert match_set(hist, n, k, h, w, fam) == want
                    assert want == sorted(want)
