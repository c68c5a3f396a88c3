"""Set partitions of ordered index positions and sequence censuses.

A census counts index sequences (p_1, ..., p_k) in [n]^k whose induced
chain of index pairs P_l = (p_l, p_{l+1 mod k}) realizes a given partition
of the positions {1, ..., k} under an equivalence relation on pairs:

* exact mode: the partition induced by the relation equals the target,
* coarser mode: pairs within a block must be related, cross-block pairs
  are unconstrained.

For pairings the census also splits matched sequences by whether every
block carries mutually transposed pairs (ps) or not (ns).  The exact
Gaussian moment routine sums Wick pairings with integer covariances and
returns an exact rational.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

from .common import BudgetError
from .ensembles import EnsembleSpec, covariance

PAIRING_SIZE_BUDGET = 16
NONCROSSING_SIZE_BUDGET = 30
CENSUS_STEP_BUDGET = 10 ** 9
ORACLE_STEP_BUDGET = 10 ** 8

Blocks = Tuple[Tuple[int, ...], ...]


def _canonical_blocks(blocks: Sequence[Sequence[int]]) -> Blocks:
    cleaned = tuple(sorted(tuple(sorted(set(b))) for b in blocks))
    seen = [i for b in cleaned for i in b]
    if sorted(seen) != list(range(1, len(seen) + 1)):
        raise ValueError("blocks must partition 1..k without repeats")
    if any(len(b) == 0 for b in cleaned):
        raise ValueError("empty block")
    return cleaned


@dataclass(frozen=True)
class Partition:
    """Partition of positions {1, ..., k}; blocks stored sorted."""

    blocks: Blocks

    @classmethod
    def of(cls, *blocks: Sequence[int]) -> "Partition":
        return cls(_canonical_blocks(blocks))

    def __post_init__(self):
        object.__setattr__(self, "blocks", _canonical_blocks(self.blocks))

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def is_pairing(self) -> bool:
        return all(len(b) == 2 for b in self.blocks)

    def block_of(self, position: int) -> int:
        for i, b in enumerate(self.blocks):
            if position in b:
                return i
        raise ValueError(f"position {position} not covered")


def parse_blocks(text: str) -> Partition:
    """Parse "1-2,3-4" into a partition (dashes join, commas separate)."""
    blocks = []
    for part in text.split(","):
        try:
            blocks.append([int(tok) for tok in part.split("-")])
        except ValueError:
            raise ValueError(f"bad block spec {part!r}") from None
    return Partition.of(*blocks)


def format_blocks(partition: Partition) -> str:
    return ",".join("-".join(str(i) for i in b) for b in partition.blocks)


def enumerate_pair_partitions(k: int, budget: int = PAIRING_SIZE_BUDGET) -> List[Partition]:
    """All (k-1)!! pairings of {1..k} in a deterministic order: the smallest
    unpaired position is matched with each later one in turn."""
    if k % 2 == 1 or k < 0:
        raise ValueError("pairings need a nonnegative even size")
    if k > budget:
        raise BudgetError(f"pairing enumeration size {k} exceeds budget {budget}")
    out: List[Partition] = []

    def rec(remaining: Tuple[int, ...], acc: List[Tuple[int, int]]):
        if not remaining:
            out.append(Partition(tuple(acc)))
            return
        first, rest = remaining[0], remaining[1:]
        for i, partner in enumerate(rest):
            acc.append((first, partner))
            rec(rest[:i] + rest[i + 1:], acc)
            acc.pop()

    rec(tuple(range(1, k + 1)), [])
    return out


def is_crossing(partition: Partition) -> bool:
    """True if two blocks interleave as a...b...a...b in position order."""
    for a, b in itertools.combinations(partition.blocks, 2):
        labels = sorted([(i, 0) for i in a] + [(i, 1) for i in b])
        runs = 1
        for (_, x), (_, y) in zip(labels, labels[1:]):
            if x != y:
                runs += 1
        if runs >= 4:
            return True
    return False


def count_noncrossing(k: int, budget: int = NONCROSSING_SIZE_BUDGET) -> int:
    """Number of non-crossing pairings of {1..k}, via the convolution
    recurrence c[m+1] = sum_j c[j] c[m-j] (independent of the binomial
    route used for reference moments)."""
    if k < 0:
        raise ValueError("size must be >= 0")
    if k > budget:
        raise BudgetError(f"non-crossing count size {k} exceeds budget {budget}")
    if k % 2 == 1:
        return 0
    m = k // 2
    c = [1]
    for _ in range(m):
        c.append(sum(c[j] * c[-1 - j] for j in range(len(c))))
    return c[m]


def _chain_pairs(seq: Sequence[Tuple[int, int]]) -> None:
    k = len(seq)
    for l in range(k):
        if seq[l][1] != seq[(l + 1) % k][0]:
            raise ValueError("index pairs must chain cyclically")


def induced_partition(rel, seq: Sequence[Tuple[int, int]]) -> Partition:
    """Partition of positions 1..k induced by relating the chained pairs."""
    _chain_pairs(seq)
    keys = [rel.class_key(p, q) for p, q in seq]
    blocks: Dict[object, List[int]] = {}
    for i, key in enumerate(keys, start=1):
        blocks.setdefault(key, []).append(i)
    return Partition(tuple(sorted(tuple(b) for b in blocks.values())))


@dataclass(frozen=True)
class SequenceCensus:
    n: int
    k: int
    partition: Partition
    coarser: bool
    s_count: int
    ps_count: Optional[int]
    ns_count: Optional[int]


def census(rel, partition: Partition, budget_steps: int = CENSUS_STEP_BUDGET,
           coarser: bool = False) -> SequenceCensus:
    """Count sequences realizing `partition` over rel's index range.

    s_count: matched sequences.  For pairings, ps_count additionally
    requires every block's two pairs to be mutual transposes and
    ns_count = s_count - ps_count; both are None otherwise.
    """
    n = rel.n
    k = partition.size
    if k < 1:
        raise ValueError("partition must cover at least one position")
    if n ** k > budget_steps:
        raise BudgetError(f"census space {n}^{k} exceeds budget {budget_steps}")

    key_rows: List[List[int]] = rel.key_grid.tolist()
    partners: Dict[Tuple[int, int], List[int]] = {}
    for p in range(n):
        row = key_rows[p]
        for q in range(n):
            partners.setdefault((row[q], p), []).append(q)

    block_of = [partition.block_of(l + 1) for l in range(k)]
    first_pos = [min(b) - 1 for b in partition.blocks]
    is_pairing = partition.is_pairing

    reps: List[Optional[int]] = [None] * len(partition.blocks)
    seq = [0] * k
    counts = [0, 0]  # matched, transposed-matched

    def pair_ok(pos: int) -> bool:
        # pair at position pos is (seq[pos], seq[(pos+1) % k])
        b = block_of[pos]
        key = key_rows[seq[pos]][seq[(pos + 1) % k]]
        if first_pos[b] == pos:
            if not coarser and key in reps:
                return False  # exact mode: block classes must stay distinct
            reps[b] = key
            return True
        return reps[b] == key

    def leaf():
        counts[0] += 1
        if is_pairing:
            for a, b in partition.blocks:
                i, j = a - 1, b - 1
                if (seq[i], seq[(i + 1) % k]) != (seq[(j + 1) % k], seq[j]):
                    return
            counts[1] += 1

    def extend(l: int):
        # choosing seq[l] fixes the pair at position l-1
        if l == k:
            if pair_ok(k - 1):
                leaf()
                if first_pos[block_of[k - 1]] == k - 1:
                    reps[block_of[k - 1]] = None
            return
        prev = l - 1
        b = block_of[prev]
        if first_pos[b] == prev:
            for q in range(n):
                seq[l] = q
                if pair_ok(prev):
                    extend(l + 1)
                    reps[b] = None
        else:
            want = reps[b]
            for q in partners.get((want, seq[prev]), ()):
                seq[l] = q
                extend(l + 1)

    for p0 in range(n):
        seq[0] = p0
        if k == 1:
            if pair_ok(0):
                leaf()
                reps[block_of[0]] = None
        else:
            extend(1)

    ps = counts[1] if is_pairing else None
    ns = counts[0] - counts[1] if is_pairing else None
    return SequenceCensus(n=n, k=k, partition=partition, coarser=coarser,
                          s_count=counts[0], ps_count=ps, ns_count=ns)


def exact_gaussian_moment(spec: EnsembleSpec, k: int,
                          budget_steps: int = ORACLE_STEP_BUDGET) -> Fraction:
    """E (1/n) tr X^k for a Gaussian ensemble, as an exact rational.

    Sums integer covariance products over all index tuples and all Wick
    pairings; odd orders vanish identically.
    """
    if k < 0:
        raise ValueError("moment order must be >= 0")
    if not spec.distribution.is_gaussian:
        raise ValueError("exact moments are defined for Gaussian families")
    if k % 2 == 1:
        return Fraction(0)
    if k == 0:
        return Fraction(1)
    n = spec.relation.n
    pairings = enumerate_pair_partitions(k)
    if n ** k * len(pairings) > budget_steps:
        raise BudgetError(
            f"oracle space {n}^{k} x {len(pairings)} exceeds budget {budget_steps}")

    cov_memo: Dict[Tuple[Tuple[int, int], Tuple[int, int]], int] = {}

    def cov(pa: Tuple[int, int], pb: Tuple[int, int]) -> int:
        got = cov_memo.get((pa, pb))
        if got is None:
            got = int(round(covariance(spec, pa, pb).real))
            cov_memo[(pa, pb)] = got
        return got

    total = 0
    for tup in itertools.product(range(1, n + 1), repeat=k):
        chain = [(tup[l], tup[(l + 1) % k]) for l in range(k)]
        for pairing in pairings:
            prod = 1
            for a, b in pairing.blocks:
                prod *= cov(chain[a - 1], chain[b - 1])
                if prod == 0:
                    break
            total += prod
    return Fraction(total, n ** (k // 2 + 1))
