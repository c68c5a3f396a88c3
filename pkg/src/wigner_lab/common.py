"""Shared error types and small numeric helpers."""

from __future__ import annotations

import numpy as np


class BudgetError(RuntimeError):
    """Raised when a requested computation exceeds its documented budget.

    Budgets are hard errors, never silent truncations; the CLI maps this
    to exit code 3.
    """


def loglog_slope(xs, ys):
    """Least-squares slope of log(ys) against log(xs).

    All-zero counts return -inf (a vanishing count trivially satisfies any
    subquadratic growth requirement).  Zero entries are dropped from the fit;
    fewer than two positive points also yields -inf.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    keep = ys > 0
    if keep.sum() < 2:
        return float("-inf")
    return float(np.polyfit(np.log(xs[keep]), np.log(ys[keep]), 1)[0])
