"""Relation construction and condition counting, checked against a
brute-force enumeration oracle at small sizes."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wigner_lab import (BudgetError, check_conditions, enumerate_shell,
                        growth_diagnostic, make_relation)


def brute_conditions(rel):
    """Direct triple/quadruple scans from the definitions; O(n^4), small n."""
    n = rel.n
    idx = range(1, n + 1)
    pairs = [(p, q) for p in idx for q in idx]
    c1 = max(
        sum(1 for q in idx for rs in pairs if rel.related((p, q), rs))
        for p in idx
    )
    c2 = max(
        sum(1 for s in idx if rel.related((p, q), (r, s)))
        for p, q in pairs for r in idx
    )
    c3 = sum(
        1 for p, q in pairs for r in idx
        if r != p and rel.related((p, q), (q, r))
    )
    return c1, c2, c3


BRUTE_CASES = [
    ("iid", 3, None),
    ("iid", 8, None),
    ("flip", 4, None),
    ("flip", 7, None),
    ("flip", 8, None),
    ("violating", 4, None),
    ("violating", 8, None),
    ("custom", 5, {"class_key": lambda p, q: (min(p, q), max(p, q))}),
]


@pytest.mark.parametrize("kind,n,params", BRUTE_CASES,
                         ids=[f"{k}-{n}" for k, n, _ in BRUTE_CASES])
def test_conditions_match_brute_force(kind, n, params):
    rel = make_relation(kind, n, params)
    rep = check_conditions(rel)
    assert (rep.c1_count, rep.c2_bound, rep.c3_count) == brute_conditions(rel)


def test_conditions_match_brute_force_fermi():
    shell = enumerate_shell(2, 8, 2.0, 2 * np.pi)
    rel = make_relation("fermi", parameters={"shell": shell})
    assert rel.n == shell.n > 0
    rep = check_conditions(rel)
    assert (rep.c1_count, rep.c2_bound, rep.c3_count) == brute_conditions(rel)


@pytest.mark.parametrize("n", [4, 9, 16, 25])
def test_iid_closed_forms(n):
    rep = check_conditions(make_relation("iid", n))
    assert rep.c1_count == 2 * n - 1
    assert rep.c2_bound == 1
    assert rep.c3_count == 0


@pytest.mark.parametrize("n", [4, 8, 16])
def test_flip_even_has_no_swap_overlap(n):
    rep = check_conditions(make_relation("flip", n))
    assert rep.c3_count == 0
    assert rep.c2_bound <= 4


@pytest.mark.parametrize("n", [5, 9, 17])
def test_flip_odd_swap_overlap_is_linear(n):
    rep = check_conditions(make_relation("flip", n))
    assert rep.c3_count == n - 1


@pytest.mark.parametrize("n", [8, 16, 32])
def test_violating_swap_overlap_is_quadratic(n):
    rep = check_conditions(make_relation("violating", n))
    assert rep.c3_count >= n * (n - 1)


def test_violating_rejects_odd_n():
    with pytest.raises(ValueError):
        make_relation("violating", 9)


def test_flip_reflection_orbit():
    rel = make_relation("flip", 6)
    assert rel.class_key(1, 2) == rel.class_key(5, 6) == rel.class_key(2, 1)
    assert rel.related((1, 2), (6, 5))
    assert not rel.related((1, 2), (1, 3))
    # orbit of (2, 3): swap, reflection of both indices, both combined
    members = {(p, q) for p in range(1, 7) for q in range(1, 7)
               if rel.related((2, 3), (p, q))}
    assert members == {(2, 3), (3, 2), (5, 4), (4, 5)}


def test_violating_generic_class_has_eight_members():
    rel = make_relation("violating", 8)
    members = [(p, q) for p in range(1, 9) for q in range(1, 9)
               if rel.related((1, 2), (p, q))]
    assert len(members) == 8
    assert set(members) == {(1, 2), (2, 1), (8, 2), (2, 8),
                            (1, 7), (7, 1), (8, 7), (7, 8)}


def test_counts_invariant_under_relabeling():
    # pulling the relation back through a permutation preserves all three
    # counts; exercises the custom kind against a builtin
    base = make_relation("flip", 8)
    rng = np.random.default_rng(11)
    perm = rng.permutation(8) + 1

    def pulled(p, q):
        return base.class_key(int(perm[p - 1]), int(perm[q - 1]))

    rel = make_relation("custom", 8, {"class_key": pulled})
    got, want = check_conditions(rel), check_conditions(base)
    assert (got.c1_count, got.c2_bound, got.c3_count) == \
        (want.c1_count, want.c2_bound, want.c3_count)


def test_custom_requires_symmetric_keys():
    with pytest.raises(ValueError):
        make_relation("custom", 4, {"class_key": lambda p, q: (p, q)})


def test_condition_budget_is_hard():
    rel = make_relation("iid", 12)
    with pytest.raises(BudgetError):
        check_conditions(rel, budget=8)


@settings(max_examples=60, deadline=None)
@given(st.sampled_from(["iid", "flip", "violating"]),
       st.integers(min_value=2, max_value=10),
       st.data())
def test_relation_axioms(kind, half_n, data):
    n = 2 * half_n if kind == "violating" else half_n + 1
    rel = make_relation(kind, n)
    p = data.draw(st.integers(1, n))
    q = data.draw(st.integers(1, n))
    r = data.draw(st.integers(1, n))
    s = data.draw(st.integers(1, n))
    # Hermitian closure and symmetry of the relation itself
    assert rel.related((p, q), (q, p))
    assert rel.related((p, q), (r, s)) == rel.related((r, s), (p, q))
    # orientation is antisymmetric under the swap (0 maps to 0)
    assert rel.orientation(p, q) == -rel.orientation(q, p)
    # related pairs share a class key, unrelated pairs do not
    same = rel.class_key(p, q) == rel.class_key(r, s)
    assert rel.related((p, q), (r, s)) == same


def test_growth_diagnostic_slopes():
    good = growth_diagnostic("iid", ladder=(8, 16, 32, 64))
    assert good.passed
    assert good.c1_slope < 1.2
    assert good.c3_slope == float("-inf")

    bad = growth_diagnostic("violating", ladder=(8, 16, 32, 64))
    assert not bad.passed
    assert bad.c3_slope > 1.9


def test_growth_diagnostic_needs_two_points():
    with pytest.raises(ValueError):
        growth_diagnostic("iid", ladder=(8,))


def test_fermi_relation_size_checks():
    shell = enumerate_shell(2, 16, 2.0, 2 * np.pi)
    rel = make_relation("fermi", n=shell.n, parameters={"shell": shell})
    assert rel.n == shell.n
    with pytest.raises(ValueError):
        make_relation("fermi", n=shell.n + 1, parameters={"shell": shell})
    with pytest.raises(ValueError):
        make_relation("fermi")


def test_index_range_validation():
    rel = make_relation("iid", 5)
    with pytest.raises(ValueError):
        rel.class_key(0, 3)
    with pytest.raises(ValueError):
        rel.orientation(1, 6)
