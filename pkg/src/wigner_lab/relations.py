"""Equivalence relations on matrix index pairs, and their growth diagnostics.

A relation on pairs (p, q), 1 <= p, q <= n, declares which matrix entries are
allowed to be statistically dependent.  Hermitian symmetry always forces
(p, q) ~ (q, p).  Built-in kinds:

  iid        only (p, q) ~ (q, p); the classical independent-entry baseline.
  flip       orbit of (p, q) under the swap and under the reflection
             p -> n + 1 - p applied to both indices at once (class size
             generically 4).
  violating  orbit closure under the swap and the reflection applied to a
             single index (class size generically 8).  Rows become heavily
             dependent: the count of swap-overlap triples grows like n^2,
             and the sampled matrices acquire a macroscopic kernel.
  fermi      indices label points of a momentum shell; (p, q) ~ (p', q')
             iff the momentum differences agree up to sign.  All arithmetic
             is on integer lattice vectors, no float comparisons.
  custom     user-supplied class-key function.

The quantities reported by check_conditions:

  c1_count   max over p of #{(q, p', q') : (p, q) ~ (p', q')}, the largest
             number of entry slots correlated with any single row's entries.
  c2_bound   max over (p, q, p') of #{q' : (p, q) ~ (p', q')}, the largest
             fiber of a class over a fixed first index.
  c3_count   #{(p, q, p') : (p, q) ~ (q, p'), p' != p}, the number of
             swap-overlap triples (correlations that chain across the
             transpose without being the transpose).

Subquadratic growth of c1_count and c3_count with a uniform c2_bound is what
the semicircle machinery needs; growth_diagnostic fits log-log slopes over a
ladder of sizes and reports pass/fail against a margin.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .common import BudgetError, loglog_slope

DEFAULT_SCAN_BUDGET = 300
DEFAULT_LADDER = (16, 32, 64, 128)
DEFAULT_SLOPE_MARGIN = 0.1

KINDS = ("iid", "flip", "violating", "fermi", "custom")


def _check_index(n: int, p: int, q: int) -> None:
    if not (1 <= p <= n and 1 <= q <= n):
        raise ValueError(f"index pair ({p}, {q}) out of range 1..{n}")


class EquivalenceRelation:
    """A relation on index pairs with a canonical key per class.

    class_key(p, q) returns a hashable token shared by exactly the pairs of
    one class; for the pair-orbit kinds it is the lexicographically smallest
    pair of the orbit, for fermi it is the canonical (sign-resolved) wrapped
    momentum difference.

    orientation(p, q) is +1 when the entry at (p, q) carries the class
    representative value, -1 when it carries the conjugate, and 0 when the
    orbit structure forces the class value to be real (diagonal entries,
    reflection-fixed pairs, self-negative momentum differences).
    """

    def __init__(self, kind: str, n: int, key_grid: np.ndarray,
                 orientation_grid: np.ndarray, params: dict):
        self.kind = kind
        self.n = int(n)
        self._keys = key_grid
        self._orient = orientation_grid
        self._params = params

    # -- public API, 1-based indices ------------------------------------

    def class_key(self, p: int, q: int):
        _check_index(self.n, p, q)
        return self._decode(int(self._keys[p - 1, q - 1]))

    def related(self, pair_a, pair_b) -> bool:
        p, q = pair_a
        r, s = pair_b
        _check_index(self.n, p, q)
        _check_index(self.n, r, s)
        return bool(self._keys[p - 1, q - 1] == self._keys[r - 1, s - 1])

    def orientation(self, p: int, q: int) -> int:
        _check_index(self.n, p, q)
        return int(self._orient[p - 1, q - 1])

    @property
    def key_grid(self) -> np.ndarray:
        """Packed class keys for the full n x n grid (uint64)."""
        return self._keys

    @property
    def orientation_grid(self) -> np.ndarray:
        return self._orient

    def _decode(self, code: int):
        if self.kind == "fermi":
            L = self._params["L"]
            d = self._params["d"]
            comps = []
            for _ in range(d):
                comps.append(code % L)
                code //= L
            comps.reverse()
            return tuple(int(c) - (L // 2 - 1) for c in comps)
        if self.kind == "custom":
            return self._params["tokens"][code]
        base = self.n + 1
        return (code // base, code % base)


def _encode_pairs(n: int, P: np.ndarray, Q: np.ndarray) -> np.ndarray:
    return P.astype(np.uint64) * np.uint64(n + 1) + Q.astype(np.uint64)


def _iid_grids(n: int):
    idx = np.arange(1, n + 1)
    P, Q = np.meshgrid(idx, idx, indexing="ij")
    keys = _encode_pairs(n, np.minimum(P, Q), np.maximum(P, Q))
    orient = np.sign(Q - P).astype(np.int8)
    return keys, orient


def _flip_grids(n: int):
    idx = np.arange(1, n + 1)
    P, Q = np.meshgrid(idx, idx, indexing="ij")
    FP, FQ = n + 1 - P, n + 1 - Q
    e1 = _encode_pairs(n, P, Q)
    e2 = _encode_pairs(n, Q, P)
    e3 = _encode_pairs(n, FP, FQ)
    e4 = _encode_pairs(n, FQ, FP)
    keys = np.minimum(np.minimum(e1, e2), np.minimum(e3, e4))
    orient = np.where((keys == e1) | (keys == e3), 1, -1).astype(np.int8)
    # diagonal and anti-diagonal orbits mix swapped and unswapped words,
    # which forces the class value to be real
    orient[(P == Q) | (P + Q == n + 1)] = 0
    return keys, orient


def _violating_grids(n: int):
    if n % 2 != 0:
        raise ValueError("violating relation is defined for even n only")
    idx = np.arange(1, n + 1)
    P, Q = np.meshgrid(idx, idx, indexing="ij")
    FP, FQ = n + 1 - P, n + 1 - Q
    unswapped = [_encode_pairs(n, x, y) for x in (P, FP) for y in (Q, FQ)]
    swapped = [_encode_pairs(n, y, x) for x in (P, FP) for y in (Q, FQ)]
    keys = unswapped[0]
    for e in unswapped[1:] + swapped:
        keys = np.minimum(keys, e)
    plus = np.zeros_like(keys, dtype=bool)
    for e in unswapped:
        plus |= keys == e
    orient = np.where(plus, 1, -1).astype(np.int8)
    orient[(Q == P) | (Q == FP)] = 0
    return keys, orient


def _fermi_grids(points: np.ndarray, L: int):
    pts = np.asarray(points, dtype=np.int64)
    n, d = pts.shape
    if L ** d > 2 ** 63:
        raise BudgetError("fermi key packing overflows 64 bits")
    off = L // 2 - 1

    def wrap(D):
        return (D + off) % L - off

    D = wrap(pts[:, None, :] - pts[None, :, :])
    N = wrap(-D)

    def pack(W):
        code = np.zeros((n, n), dtype=np.uint64)
        for i in range(d):
            code = code * np.uint64(L) + (W[:, :, i] + off).astype(np.uint64)
        return code

    kd, kn = pack(D), pack(N)
    keys = np.minimum(kd, kn)
    orient = np.zeros((n, n), dtype=np.int8)
    orient[kd < kn] = 1
    orient[kd > kn] = -1
    return keys, orient


def _custom_grids(n: int, fn: Callable):
    tokens: dict = {}
    order: list = []
    keys = np.zeros((n, n), dtype=np.uint64)
    for p in range(1, n + 1):
        for q in range(1, n + 1):
            t = fn(p, q)
            if t not in tokens:
                tokens[t] = len(order)
                order.append(t)
            keys[p - 1, q - 1] = tokens[t]
    if not np.array_equal(keys, keys.T):
        raise ValueError("custom class_key must satisfy key(p,q) == key(q,p)")
    idx = np.arange(1, n + 1)
    P, Q = np.meshgrid(idx, idx, indexing="ij")
    orient = np.sign(Q - P).astype(np.int8)
    return keys, orient, order


def make_relation(kind: str, n: Optional[int] = None,
                  parameters: Optional[dict] = None) -> EquivalenceRelation:
    """Build a relation.  For kind "fermi" pass parameters={"shell": shell};
    for "custom" pass parameters={"class_key": fn}."""
    parameters = dict(parameters or {})
    if kind not in KINDS:
        raise ValueError(f"unknown relation kind {kind!r}")
    if kind == "fermi":
        shell = parameters.get("shell")
        if shell is None:
            raise ValueError("fermi relation requires parameters={'shell': ...}")
        pts = np.asarray(shell.points, dtype=np.int64)
        if n is not None and n != len(pts):
            raise ValueError(f"n={n} does not match shell size {len(pts)}")
        if len(pts) == 0:
            raise ValueError("fermi relation requires a non-empty shell")
        keys, orient = _fermi_grids(pts, shell.L)
        return EquivalenceRelation("fermi", len(pts), keys, orient,
                                   {"L": shell.L, "d": shell.d})
    if n is None or n < 1:
        raise ValueError("n >= 1 required")
    if kind == "iid":
        keys, orient = _iid_grids(n)
        return EquivalenceRelation(kind, n, keys, orient, {})
    if kind == "flip":
        keys, orient = _flip_grids(n)
        return EquivalenceRelation(kind, n, keys, orient, {})
    if kind == "violating":
        keys, orient = _violating_grids(n)
        return EquivalenceRelation(kind, n, keys, orient, {})
    fn = parameters.get("class_key")
    if fn is None:
        raise ValueError("custom relation requires parameters={'class_key': fn}")
    keys, orient, order = _custom_grids(n, fn)
    return EquivalenceRelation("custom", n, keys, orient, {"tokens": order})


@dataclass(frozen=True)
class ConditionReport:
    kind: str
    n: int
    c1_count: int
    c2_bound: int
    c3_count: int


def check_conditions(rel: EquivalenceRelation,
                     budget: int = DEFAULT_SCAN_BUDGET) -> ConditionReport:
    """Exact condition counts by exhaustive enumeration of the pair grid.

    The triple scans are aggregated through the class decomposition (every
    count is a sum of class multiplicities), which keeps the enumeration
    exact while running in O(n^2) memory and time.
    """
    n = rel.n
    if n > budget:
        raise BudgetError(f"condition scan at n={n} exceeds budget {budget}")
    uniq, inv, counts = np.unique(rel.key_grid, return_inverse=True,
                                  return_counts=True)
    inv = inv.reshape(n, n)
    class_size = counts[inv]
    c1 = int(class_size.sum(axis=1).max())

    rows = np.arange(n, dtype=np.uint64)[:, None]
    # multiplicity of (class, first index) over all grid cells
    codes = inv.astype(np.uint64) * np.uint64(n) + rows
    flat_codes, flat_counts = np.unique(codes, return_counts=True)
    c2 = int(flat_counts.max())

    # for each (p, q): members of class(p, q) whose first index is q;
    # the transpose (q, p) is always among them and is discounted
    cols = np.arange(n, dtype=np.uint64)[None, :]
    wanted = inv.astype(np.uint64) * np.uint64(n) + cols
    pos = np.searchsorted(flat_codes, wanted)
    c3 = int((flat_counts[pos] - 1).sum())

    return ConditionReport(rel.kind, n, c1, c2, c3)


@dataclass(frozen=True)
class GrowthDiagnostic:
    kind: str
    rows: tuple
    c1_slope: float
    c3_slope: float
    c2_constant: bool
    passed: bool


def growth_diagnostic(kind: str, ladder: Sequence[int] = DEFAULT_LADDER,
                      parameters: Optional[dict] = None,
                      margin: float = DEFAULT_SLOPE_MARGIN,
                      budget: int = DEFAULT_SCAN_BUDGET) -> GrowthDiagnostic:
    """Condition counts over a ladder of sizes with log-log slope fits.

    For iid/flip/violating the ladder entries are matrix sizes n; for fermi
    they are lattice side lengths L (the shell determines n).  Passing means
    both fitted slopes stay below 2 - margin and c2_bound is constant across
    the ladder.  An all-zero count column gets slope -inf and passes.
    """
    ladder = tuple(int(v) for v in ladder)
    if len(ladder) < 2:
        raise ValueError("ladder needs at least two points")
    parameters = dict(parameters or {})
    rows = []
    for v in ladder:
        if kind == "fermi":
            from .fermi import enumerate_shell
            shell = enumerate_shell(parameters.get("d", 2), v,
                                    parameters.get("energy", 2.0),
                                    parameters.get("band", 2 * np.pi))
            rel = make_relation("fermi", parameters={"shell": shell})
        else:
            rel = make_relation(kind, v, parameters)
        rows.append(check_conditions(rel, budget=budget))
    ns = [r.n for r in rows]
    c1_slope = loglog_slope(ns, [r.c1_count for r in rows])
    c3_slope = loglog_slope(ns, [r.c3_count for r in rows])
    c2s = [r.c2_bound for r in rows]
    c2_constant = max(c2s) == min(c2s)
    passed = (c1_slope < 2 - margin) and (c3_slope < 2 - margin) and c2_constant
    return GrowthDiagnostic(kind, tuple(rows), c1_slope, c3_slope,
                            c2_constant, passed)
