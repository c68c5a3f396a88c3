"""Hermitian random-matrix ensembles over an equivalence relation.

One value is drawn per equivalence class (attached to the canonical class
key); every member entry receives that value or its complex conjugate
according to the relation's orientation, so X = X* holds exactly by
construction, bit for bit.  Entries are centered with unit variance and the
matrix is scaled by 1 / sqrt(n).

Randomness is a counter-based generator keyed by (seed, sample index, packed
class key): a splitmix64 finalizer chain feeding Box-Muller.  Values depend
only on those keys, never on evaluation order, so any subset of entries can
be regenerated independently and batch sampling is reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator, List, Optional
from weakref import WeakKeyDictionary

import numpy as np

from .relations import EquivalenceRelation, make_relation

FAMILIES = ("gaussian_complex", "gaussian_real", "rademacher")

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64_MASK = (1 << 64) - 1


def _to_u64(value: int) -> np.uint64:
    return np.uint64(int(value) & _U64_MASK)


def _mix64(x):
    """splitmix64 output function; vectorized over uint64 arrays."""
    with np.errstate(over="ignore"):  # mod-2^64 wraparound is the algorithm
        z = np.asarray(x, dtype=np.uint64) + _GOLDEN
        z = (z ^ (z >> np.uint64(30))) * _MIX1
        z = (z ^ (z >> np.uint64(27))) * _MIX2
        return z ^ (z >> np.uint64(31))


def _uniforms(h):
    # top 53 bits -> (0, 1), never exactly 0 so log() is safe
    return ((h >> np.uint64(11)).astype(np.float64) + 0.5) * (2.0 ** -53)


def derive_seed(seed: int, index: int) -> int:
    """Per-sample child seed; deterministic, order-free."""
    return int(_mix64(_to_u64(seed) ^ _mix64(_to_u64(index))))


def _context(seed: int) -> np.uint64:
    return np.uint64(_mix64(_to_u64(seed)))


@dataclass(frozen=True)
class EntryDistribution:
    """Centered unit-variance entry family.

    gaussian_complex is circularly symmetric ((x + iy)/sqrt(2)), so
    E[a^2] = 0 off the forced-real classes; gaussian_real and rademacher
    are real with E[a^2] = 1.
    """
    family: str = "gaussian_complex"

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown entry family {self.family!r}")

    @property
    def is_complex(self) -> bool:
        return self.family == "gaussian_complex"

    @property
    def is_gaussian(self) -> bool:
        return self.family in ("gaussian_complex", "gaussian_real")


@dataclass(frozen=True)
class CorrelationRule:
    """Joint law of entries within a class.

    Only "equal" is implemented: all members carry the representative draw
    up to conjugation.  The field exists as an extension point for partially
    correlated classes.
    """
    mode: str = "equal"

    def __post_init__(self):
        if self.mode != "equal":
            raise ValueError(f"unsupported correlation mode {self.mode!r}")


@dataclass(frozen=True)
class EnsembleSpec:
    relation: EquivalenceRelation
    distribution: EntryDistribution = EntryDistribution()
    rule: CorrelationRule = field(default_factory=CorrelationRule)
    seed: int = 0


@dataclass(frozen=True)
class HermitianSample:
    """One sampled matrix; entries is n x n, complex128 for complex families
    and float64 for real ones (still exactly Hermitian either way)."""
    n: int
    entries: np.ndarray


def make_spec(kind: str, n: int, family: str = "gaussian_complex",
              seed: int = 0, relation_params: Optional[dict] = None) -> EnsembleSpec:
    rel = make_relation(kind, n, relation_params)
    return EnsembleSpec(rel, EntryDistribution(family), CorrelationRule(), seed)


_class_index_cache: "WeakKeyDictionary[EquivalenceRelation, tuple]" = WeakKeyDictionary()


def _class_index(rel: EquivalenceRelation):
    cached = _class_index_cache.get(rel)
    if cached is None:
        uniq, inv = np.unique(rel.key_grid, return_inverse=True)
        cached = (uniq, inv.reshape(rel.n, rel.n))
        _class_index_cache[rel] = cached
    return cached


def _class_values(keys: np.ndarray, contexts: np.ndarray, family: str):
    """Per-class draws for a batch of contexts.

    Returns (value, forced_real_value) with shape (len(contexts), len(keys)).
    forced_real_value is a real unit-variance draw used by classes whose
    orbit forces a real entry.
    """
    h0 = keys[None, :] ^ contexts[:, None]
    u1 = _uniforms(_mix64(h0))
    u2 = _uniforms(_mix64(h0 + _GOLDEN))
    if family == "rademacher":
        sign = np.where(u1 < 0.5, -1.0, 1.0)
        return sign, sign
    radius = np.sqrt(-2.0 * np.log(u1))
    z0 = radius * np.cos(2.0 * np.pi * u2)
    if family == "gaussian_real":
        return z0, z0
    z1 = radius * np.sin(2.0 * np.pi * u2)
    return (z0 + 1j * z1) / np.sqrt(2.0), z0


def _entries_for_contexts(spec: EnsembleSpec, contexts: np.ndarray) -> np.ndarray:
    rel, family = spec.relation, spec.distribution.family
    n = rel.n
    uniq, inv = _class_index(rel)
    flat = inv.ravel()
    values, reals = _class_values(uniq, contexts, family)
    scale = 1.0 / np.sqrt(n)
    if family != "gaussian_complex":
        return (values[:, flat] * scale).reshape(len(contexts), n, n)
    orient = rel.orientation_grid.ravel()
    ev = values[:, flat]
    out = np.where(orient == 0, reals[:, flat].astype(np.complex128),
                   np.where(orient > 0, ev, np.conj(ev)))
    return (out * scale).reshape(len(contexts), n, n)


def _chunked_contexts(seeds: Iterable[int], chunk: int) -> Iterator[np.ndarray]:
    buf: List[np.uint64] = []
    for s in seeds:
        buf.append(_context(s))
        if len(buf) == chunk:
            yield np.array(buf, dtype=np.uint64)
            buf = []
    if buf:
        yield np.array(buf, dtype=np.uint64)


def iter_matrices(spec: EnsembleSpec, count: int) -> Iterator[np.ndarray]:
    """Yield the `count` matrices of sample_batch one at a time (bounded
    memory; identical values)."""
    n = spec.relation.n
    chunk = max(1, int(2_000_000) // max(1, n * n))
    seeds = (derive_seed(spec.seed, i) for i in range(count))
    for ctxs in _chunked_contexts(seeds, chunk):
        block = _entries_for_contexts(spec, ctxs)
        for i in range(block.shape[0]):
            yield block[i]


def sample_matrix(spec: EnsembleSpec) -> HermitianSample:
    """One matrix drawn directly at spec.seed."""
    ctxs = np.array([_context(spec.seed)], dtype=np.uint64)
    return HermitianSample(spec.relation.n, _entries_for_contexts(spec, ctxs)[0])


def sample_batch(spec: EnsembleSpec, count: int) -> List[HermitianSample]:
    """count matrices at child seeds derive_seed(spec.seed, i); item i equals
    sample_matrix(replace(spec, seed=derive_seed(spec.seed, i)))."""
    if count < 1:
        raise ValueError("count >= 1 required")
    n = spec.relation.n
    return [HermitianSample(n, m) for m in iter_matrices(spec, count)]


def sample_stack(spec: EnsembleSpec, count: int) -> np.ndarray:
    """Batch as one (count, n, n) array; same values as sample_batch."""
    n = spec.relation.n
    out = np.empty((count, n, n),
                   dtype=np.complex128 if spec.distribution.is_complex else np.float64)
    for i, m in enumerate(iter_matrices(spec, count)):
        out[i] = m
    return out


def covariance(spec: EnsembleSpec, pair_a, pair_b) -> complex:
    """E[a(P) a(Q)] for the unscaled entries, exact from the class structure.

    The conjugated kernel follows from Hermitian symmetry:
    E[a(P) conj(a(Q))] = covariance(spec, P, swap(Q)).  Only Gaussian
    families are supported (the value feeds the Wick oracle).
    """
    if not spec.distribution.is_gaussian:
        raise ValueError("covariance is defined for Gaussian families only")
    rel = spec.relation
    if not rel.related(pair_a, pair_b):
        return 0j
    oa = rel.orientation(*pair_a)
    ob = rel.orientation(*pair_b)
    if (oa == 0) != (ob == 0):
        raise ValueError("class mixes forced-real and complex members; "
                         "covariance undefined under the equality rule")
    if oa == 0 or spec.distribution.family == "gaussian_real":
        return 1 + 0j
    return 1 + 0j if oa != ob else 0j
