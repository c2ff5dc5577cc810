"""Minimum-cost linear sum assignment with a canonical tie-break.

The solver is the classic O(n^3) shortest-augmenting-path Hungarian with
row/column potentials. Because equal-cost optima are resolved differently by
every solver implementation, the result here is canonicalized: among all
minimum-cost assignments, the lexicographically smallest (row, col) pair
list is returned. Canonicalization works on the graph of tight edges
(reduced cost zero under the optimal potentials), where a maximum matching
that keeps every negative-potential vertex matched is exactly an optimal
assignment; a greedy per-row descent with alternating-path repairs then
selects the lexicographic minimum. Inputs in general position pay almost
nothing for this: without ties the tight graph has a unique matching.
"""
from __future__ import annotations

import sys

import numpy as np


class AssignmentError(ValueError):
    pass


def _solve_rows_leq_cols(cost: np.ndarray):
    """Hungarian potentials solve for n <= m; matches every row.

    Returns (col_of_row (n,), u (n,), v (m,)) with reduced costs
    cost - u[:, None] - v[None, :] >= 0 and zero on matched edges.
    """
    n, m = cost.shape
    u = np.zeros(n + 1)
    v = np.zeros(m + 1)
    p = np.zeros(m + 1, dtype=np.int64)   # p[j]: row (1-based) matched to col j
    for i in range(1, n + 1):
        p[0] = i
        j0 = 0
        minv = np.full(m + 1, np.inf)
        way = np.zeros(m + 1, dtype=np.int64)
        used = np.zeros(m + 1, dtype=bool)
        while True:
            used[j0] = True
            i0 = p[j0]
            cur = cost[i0 - 1] - u[i0] - v[1:]
            free = ~used[1:]
            better = free & (cur < minv[1:])
            minv[1:][better] = cur[better]
            way[1:][better] = j0
            masked = np.where(used[1:], np.inf, minv[1:])
            j1 = int(np.argmin(masked)) + 1
            delta = masked[j1 - 1]
            u[p[used]] += delta
            v[used] -= delta
            minv[1:][free] -= delta
            j0 = j1
            if p[j0] == 0:
                break
        while j0 != 0:
            j1 = way[j0]
            p[j0] = p[j1]
            j0 = j1
    col_of_row = np.full(n, -1, dtype=np.int64)
    for j in range(1, m + 1):
        if p[j] != 0:
            col_of_row[p[j] - 1] = j - 1
    return col_of_row, u[1:], v[1:]


class _Canonicalizer:
    """Lexicographically smallest maximum matching on the tight-edge graph.

    `hard_rows` selects the orientation: when True every row must stay
    matched (n <= m) and `required` flags columns that any optimum must
    match; when False every column must stay matched (n > m) and `required`
    flags rows.
    """

    def __init__(self, tight: np.ndarray, row_match: np.ndarray,
                 col_match: np.ndarray, required: np.ndarray, hard_rows: bool):
        self.n, self.m = tight.shape
        self.adj_cols = [np.nonzero(tight[i])[0] for i in range(self.n)]
        self.adj_rows = [np.nonzero(tight[:, j])[0] for j in range(self.m)]
        self.row_match = row_match
        self.col_match = col_match
        self.required = required
        self.hard_rows = hard_rows
        self.locked_row = np.zeros(self.n, dtype=bool)
        self.locked_col = np.zeros(self.m, dtype=bool)

    def run(self) -> list[tuple[int, int]]:
        for i in range(self.n):
            cur = self.row_match[i]
            for c in self.adj_cols[i]:
                c = int(c)
                if cur != -1 and c >= cur:
                    break
                if self.locked_col[c] or c == cur:
                    continue
                if self._try_force(i, c):
                    cur = c
                    break
            if cur != -1:
                self.locked_col[cur] = True
            self.locked_row[i] = True
        return [(i, int(self.row_match[i]))
                for i in range(self.n) if self.row_match[i] != -1]

    def _try_force(self, i: int, c: int) -> bool:
        rm, cm = self.row_match.copy(), self.col_match.copy()
        cur = self.row_match[i]
        displaced = self.col_match[c]
        if cur != -1:
            self.col_match[cur] = -1
        if displaced != -1:
            self.row_match[displaced] = -1
        self.row_match[i] = c
        self.col_match[c] = i
        # the forced pair must survive the repairs below
        self.locked_row[i] = True
        self.locked_col[c] = True

        ok = True
        if self.hard_rows:
            if displaced != -1:
                ok = self._rematch_row(int(displaced), set())
            if ok and cur != -1 and self.required[cur] and self.col_match[cur] == -1:
                ok = self._cover_col(int(cur), set())
        else:
            if cur != -1 and self.col_match[cur] == -1:
                ok = self._rematch_col(int(cur), set())
            if ok and displaced != -1 and self.required[displaced] \
                    and self.row_match[displaced] == -1:
                ok = self._steal_col_for_row(int(displaced), set())
        self.locked_row[i] = False   # run() re-locks after the decision
        self.locked_col[c] = False
        if not ok:
            self.row_match, self.col_match = rm, cm
        return ok

    def _rematch_row(self, r: int, visited: set) -> bool:
        """Kuhn augmentation: re-match row r, rows stay saturated (n <= m)."""
        for c in self.adj_cols[r]:
            c = int(c)
            if c in visited or self.locked_col[c]:
                continue
            visited.add(c)
            r2 = self.col_match[c]
            if r2 == -1 or (not self.locked_row[r2]
                            and self._rematch_row(int(r2), visited)):
                self.row_match[r] = c
                self.col_match[c] = r
                return True
        return False

    def _rematch_col(self, q: int, visited: set) -> bool:
        """Re-match freed column q, columns stay saturated (n > m)."""
        for r in self.adj_rows[q]:
            r = int(r)
            if r in visited or self.locked_row[r]:
                continue
            visited.add(r)
            c2 = self.row_match[r]
            if c2 == -1:
                self.row_match[r] = q
                self.col_match[q] = r
                return True
            self.row_match[r] = q
            self.col_match[q] = r
            self.col_match[c2] = -1
            if self._rematch_col(int(c2), visited):
                return True
            self.col_match[c2] = r
            self.row_match[r] = c2
            self.col_match[q] = -1
        return False

    def _cover_col(self, q: int, visited: set) -> bool:
        """Cover required column q by shifting a row off a non-required column."""
        for r in self.adj_rows[q]:
            r = int(r)
            if r in visited or self.locked_row[r]:
                continue
            visited.add(r)
            c2 = self.row_match[r]
            if c2 == -1:
                self.row_match[r] = q
                self.col_match[q] = r
                return True
            self.row_match[r] = q
            self.col_match[q] = r
            self.col_match[c2] = -1
            if not self.required[c2] or self._cover_col(int(c2), visited):
                return True
            self.col_match[c2] = r
            self.row_match[r] = c2
            self.col_match[q] = -1
        return False

    def _steal_col_for_row(self, r: int, visited: set) -> bool:
        """Cover required row r by displacing some non-required row (n > m)."""
        for c in self.adj_cols[r]:
            c = int(c)
            if c in visited or self.locked_col[c]:
                continue
            visited.add(c)
            r2 = self.col_match[c]
            if r2 == -1:
                self.row_match[r] = c
                self.col_match[c] = r
                return True
            if self.locked_row[r2]:
                continue
            self.row_match[r] = c
            self.col_match[c] = r
            self.row_match[r2] = -1
            if not self.required[r2] or self._steal_col_for_row(int(r2), visited):
                return True
            self.row_match[r2] = c
            self.col_match[c] = r2
            self.row_match[r] = -1
        return False


def hungarian_assign(cost) -> list[tuple[int, int]]:
    """Minimum-cost assignment of min(n, m) (row, col) pairs.

    Deterministic: among equal-cost optima the lexicographically smallest
    pair list (sorted by row) is returned. Raises on non-finite costs.
    """
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2:
        raise AssignmentError("cost must be a 2-D matrix")
    n, m = cost.shape
    if n == 0 or m == 0:
        return []
    if not np.all(np.isfinite(cost)):
        raise AssignmentError("cost matrix contains non-finite values")
    if n + m + 200 > sys.getrecursionlimit():
        sys.setrecursionlimit(2 * (n + m) + 400)   # repair DFS depth bound

    transposed = n > m
    work = cost.T if transposed else cost
    col_of_row, u, v = _solve_rows_leq_cols(np.ascontiguousarray(work))

    tol = 1e-9 * max(1.0, float(np.abs(cost).max()))
    reduced = work - u[:, None] - v[None, :]
    tight = reduced <= tol

    if transposed:
        # back to the original orientation: rows of `cost`, cols of `cost`
        row_match = np.full(n, -1, dtype=np.int64)
        col_match = np.full(m, -1, dtype=np.int64)
        for j, i in enumerate(col_of_row):   # work-row j = original col j
            row_match[i] = j
            col_match[j] = int(i)
        required = v < -tol   # original rows that every optimum must match
        canon = _Canonicalizer(tight.T.copy(), row_match, col_match,
                               required, hard_rows=False)
    else:
        row_match = col_of_row.copy()
        col_match = np.full(m, -1, dtype=np.int64)
        for i, j in enumerate(col_of_row):
            col_match[j] = i
        required = v < -tol   # columns that every optimum must match
        canon = _Canonicalizer(tight.copy(), row_match, col_match,
                               required, hard_rows=True)
    return canon.run()


def assignment_cost(cost, pairs: list[tuple[int, int]]) -> float:
    cost = np.asarray(cost, dtype=np.float64)
    return float(sum(cost[i, j] for i, j in pairs))
