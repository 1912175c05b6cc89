"""Deterministic linear-sum assignment with lexicographic tie-breaking.

scipy's solver returns *an* optimal assignment; when several tie, which one
is unspecified. Scoring output must be reproducible, so the pair choice is
refined here: rows are fixed in index order, each to the smallest column
that still permits an optimal completion.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment


def _optimal_total(cost: np.ndarray, maximize: bool) -> int:
    if cost.size == 0:
        return 0
    rows, cols = linear_sum_assignment(cost, maximize=maximize)
    return int(cost[rows, cols].sum())


def lexsmallest_assignment(cost: np.ndarray, maximize: bool = False) -> list[int]:
    """Return the column assigned to each row of a square cost matrix.

    Among all assignments with optimal total cost, picks the one whose
    column sequence (row 0 first) is lexicographically smallest.
    """
    n = cost.shape[0]
    if cost.shape != (n, n):
        raise ValueError(f"square matrix required, got {cost.shape}")
    target = _optimal_total(cost, maximize)
    free_cols = list(range(n))
    chosen: list[int] = []
    for row in range(n):
        rest_rows = np.arange(row + 1, n)
        for idx, col in enumerate(free_cols):
            other_cols = free_cols[:idx] + free_cols[idx + 1 :]
            sub = cost[np.ix_(rest_rows, other_cols)]
            total = int(cost[row, col]) + _optimal_total(sub, maximize)
            if total == target:
                chosen.append(col)
                free_cols.pop(idx)
                target -= int(cost[row, col])
                break
        else:
            raise AssertionError("no optimal completion found; solver inconsistency")
    return chosen
