"""Shared brute-force oracles for the test suite.

These stay deliberately dumb (per-pixel / per-permutation loops) so they are
independent of the vectorized implementations they validate.
"""
from __future__ import annotations

import itertools

import numpy as np
import pytest


def brute_nearest(points: np.ndarray, height: int, width: int):
    """Per-pixel loop over all centers; ties resolved by lowest index.

    Uses the same squared-distance comparison as the encoder contract, so
    agreement is expected to be exact.
    """
    n = len(points)
    idx = np.zeros((height, width), dtype=np.int64)
    dist = np.zeros((height, width), dtype=np.float64)
    for i in range(height):
        for j in range(width):
            best, best_d2 = 0, np.inf
            for k in range(n):
                dr = points[k, 0] - i
                dc = points[k, 1] - j
                d2 = dr * dr + dc * dc
                if d2 < best_d2:
                    best, best_d2 = k, d2
            idx[i, j] = best
            dist[i, j] = np.sqrt(best_d2)
    return idx, dist


def brute_encode(points: np.ndarray, height: int, width: int):
    """Direction planes from the per-pixel nearest-center loop."""
    idx, dist = brute_nearest(points, height, width)
    sin = np.zeros((height, width))
    cos = np.zeros((height, width))
    for i in range(height):
        for j in range(width):
            r = dist[i, j]
            if r > 0:
                n_, m_ = points[idx[i, j]]
                sin[i, j] = (m_ - j) / r
                cos[i, j] = (n_ - i) / r
    return sin, cos


def brute_assignment(cost: np.ndarray):
    """Exhaustive minimum assignment; ties resolved by smallest pair list.

    Returns (total, pairs) with pairs sorted by row.
    """
    cost = np.asarray(cost, dtype=np.float64)
    n, m = cost.shape
    best = None
    if n <= m:
        for perm in itertools.permutations(range(m), n):
            pairs = [(i, perm[i]) for i in range(n)]
            total = sum(cost[i, j] for i, j in pairs)
            if best is None or (total, pairs) < best:
                best = (total, pairs)
    else:
        for perm in itertools.permutations(range(n), m):
            pairs = sorted((perm[j], j) for j in range(m))
            total = sum(cost[i, j] for i, j in pairs)
            if best is None or (total, pairs) < best:
                best = (total, pairs)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)
