"""Pairings, censuses, and the exact Gaussian moment oracle.

The census DFS is validated against a brute-force oracle that walks every
tuple in [n]^k; the Wick oracle against the closed form 2 + 1/n^2 for the
fourth iid moment and against Monte Carlo.
"""

import itertools
import math
from fractions import Fraction

import numpy as np
import pytest

from wigner_lab import (BudgetError, census, count_noncrossing,
                        enumerate_pair_partitions, exact_gaussian_moment,
                        format_blocks, induced_partition, is_crossing,
                        make_relation, make_spec, parse_blocks, sample_stack,
                        semicircle_moment)
from wigner_lab.partitions import Partition


def set_partitions(k):
    """All partitions of {1..k} via restricted growth strings."""
    def rec(i, blocks):
        if i > k:
            yield Partition(tuple(tuple(b) for b in blocks))
            return
        for b in blocks:
            b.append(i)
            yield from rec(i + 1, blocks)
            b.pop()
        blocks.append([i])
        yield from rec(i + 1, blocks)
        blocks.pop()

    yield from rec(1, [])


def brute_census(rel, partition, coarser):
    n, k = rel.n, partition.size
    blocks = partition.blocks
    s = ps = 0
    for tup in itertools.product(range(1, n + 1), repeat=k):
        chain = [(tup[l], tup[(l + 1) % k]) for l in range(k)]
        if coarser:
            ok = all(rel.related(chain[b[0] - 1], chain[x - 1])
                     for b in blocks for x in b[1:])
        else:
            ok = induced_partition(rel, chain) == partition
        if not ok:
            continue
        s += 1
        if partition.is_pairing and all(
                chain[b - 1] == (chain[a - 1][1], chain[a - 1][0])
                for a, b in blocks):
            ps += 1
    return s, ps


def test_pairing_enumeration_counts():
    for k in (0, 2, 4, 6, 8):
        parts = enumerate_pair_partitions(k)
        want = math.prod(range(1, k, 2)) if k else 1
        assert len(parts) == want
        assert all(p.is_pairing for p in parts)
        assert len(set(parts)) == len(parts)
    with pytest.raises(ValueError):
        enumerate_pair_partitions(3)
    with pytest.raises(BudgetError):
        enumerate_pair_partitions(18)


def test_crossing_detection():
    assert is_crossing(Partition.of([1, 3], [2, 4]))
    assert not is_crossing(Partition.of([1, 2], [3, 4]))
    assert not is_crossing(Partition.of([1, 4], [2, 3]))
    assert not is_crossing(Partition.of([1, 3], [2], [4]))
    assert is_crossing(Partition.of([1, 3, 5], [2, 4, 6]))
    assert not is_crossing(Partition.of([1, 2, 5, 6], [3, 4]))


def test_noncrossing_count_matches_filter_and_catalan():
    for k in (2, 4, 6, 8, 10, 12):
        filtered = sum(not is_crossing(p) for p in enumerate_pair_partitions(k))
        assert count_noncrossing(k) == filtered
        assert count_noncrossing(k) == semicircle_moment(k)
    assert count_noncrossing(0) == 1
    assert count_noncrossing(5) == 0
    with pytest.raises(BudgetError):
        count_noncrossing(32)


def test_partition_basics():
    p = parse_blocks("1-3,2-4")
    assert p == Partition.of([2, 4], [3, 1])
    assert format_blocks(p) == "1-3,2-4"
    assert p.block_of(4) == 1
    with pytest.raises(ValueError):
        parse_blocks("1-2,2-3")
    with pytest.raises(ValueError):
        parse_blocks("1-2,4-5")
    with pytest.raises(ValueError):
        parse_blocks("1-x")


def test_induced_partition_flip_example():
    rel = make_relation("flip", 4)
    seq = ((1, 2), (2, 4), (4, 3), (3, 1))
    assert induced_partition(rel, seq) == Partition.of([1, 3], [2, 4])
    with pytest.raises(ValueError):
        induced_partition(rel, ((1, 2), (3, 4), (4, 1), (1, 1)))


CENSUS_GRID = [
    (kind, n, coarser)
    for kind in ("iid", "flip", "violating")
    for n in (4, 6)
    for coarser in (False, True)
]


@pytest.mark.parametrize("kind,n,coarser", CENSUS_GRID,
                         ids=[f"{k}-{n}-{'c' if c else 'x'}"
                              for k, n, c in CENSUS_GRID])
def test_census_matches_brute_force(kind, n, coarser):
    rel = make_relation(kind, n)
    for k in (2, 3, 4):
        for partition in set_partitions(k):
            got = census(rel, partition, coarser=coarser)
            s, ps = brute_census(rel, partition, coarser)
            assert got.s_count == s, (partition, kind, n, coarser)
            if partition.is_pairing:
                assert got.ps_count == ps
                assert got.ns_count == s - ps
            else:
                assert got.ps_count is None and got.ns_count is None


@pytest.mark.parametrize("kind", ["iid", "flip"])
def test_census_additivity(kind):
    # exact-mode counts over all partitions of [k] tile the whole tuple space
    n, k = 5, 3
    rel = make_relation(kind, n)
    total = sum(census(rel, p).s_count for p in set_partitions(k))
    assert total == n ** k


@pytest.mark.parametrize("kind,n", [("iid", 6), ("flip", 7), ("violating", 6)])
def test_single_pair_census_is_all_transposed(kind, n):
    # with k=2 the chain is (p,q),(q,p): the two pairs are forced mutual
    # transposes, so the non-transposed count vanishes for every relation
    rel = make_relation(kind, n)
    got = census(rel, Partition.of([1, 2]))
    assert got.s_count == n * n
    assert got.ps_count == n * n
    assert got.ns_count == 0


def test_iid_crossing_census_values():
    crossing = Partition.of([1, 3], [2, 4])
    for n in (4, 8, 12):
        rel = make_relation("iid", n)
        assert census(rel, crossing).s_count == 0
        assert census(rel, crossing, coarser=True).s_count == n * n


def test_crossing_scale_ratio_decreases():
    crossing = Partition.of([1, 3], [2, 4])
    ratios = []
    for n in (8, 12, 16):
        s = census(make_relation("iid", n), crossing, coarser=True).s_count
        ratios.append(s / n ** 3)
    assert ratios[0] > ratios[1] > ratios[2]


def test_flip_nested_census_shape():
    # matched counts stay within a constant of n^3 and the normalized
    # transposed share increases with n
    nested = Partition.of([1, 2], [3, 4])
    shares = []
    for n in (8, 12, 16):
        got = census(make_relation("flip", n), nested)
        assert got.ps_count <= n ** 3
        assert got.ps_count >= (n - 12) ** 3
        shares.append(got.ps_count / n ** 3)
    assert shares[0] < shares[1] < shares[2]


def test_census_budget():
    rel = make_relation("iid", 40)
    with pytest.raises(BudgetError):
        census(rel, Partition.of([1, 2], [3, 4]), budget_steps=10 ** 5)


def test_exact_moment_base_cases():
    spec = make_spec("iid", 3)
    assert exact_gaussian_moment(spec, 0) == 1
    assert exact_gaussian_moment(spec, 1) == 0
    assert exact_gaussian_moment(spec, 3) == 0
    assert exact_gaussian_moment(spec, 2) == 1
    with pytest.raises(ValueError):
        exact_gaussian_moment(make_spec("iid", 3, "rademacher"), 2)


def test_exact_moment_iid_closed_form():
    # frozen closed form for the complex iid fourth moment: 2 + 1/n^2
    for n in (2, 4, 8):
        spec = make_spec("iid", n)
        assert exact_gaussian_moment(spec, 4) == 2 + Fraction(1, n * n)
    assert exact_gaussian_moment(make_spec("iid", 2), 4) == Fraction(9, 4)


def test_exact_moment_second_order_is_one_for_all_kinds():
    for kind, n in (("iid", 5), ("flip", 6), ("violating", 6)):
        assert exact_gaussian_moment(make_spec(kind, n), 2) == 1


def test_exact_moment_monte_carlo_agreement():
    n, S = 4, 20000
    spec = make_spec("flip", n, seed=31)
    exact = float(exact_gaussian_moment(spec, 4))
    stack = sample_stack(spec, S)
    sq = np.einsum("bij,bjk->bik", stack, stack)
    traces = np.einsum("bij,bji->b", sq, sq).real / n
    se = traces.std(ddof=1) / math.sqrt(S)
    assert abs(traces.mean() - exact) <= 3 * se


def test_exact_moment_budget():
    with pytest.raises(BudgetError):
        exact_gaussian_moment(make_spec("iid", 50), 6)
