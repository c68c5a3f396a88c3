"""Mixed-moment predictions under asymptotic freeness, plus Monte Carlo.

Words mix semicircular letters x<i> with diagonal letters d<j>.  Distinct
indices are treated as mutually free; repeated indices are the same
element.  Two independent evaluators compute the predicted normalized
trace: a centering recursion that only uses the freeness axiom, and a
chord-diagram sum over non-crossing same-index pairings of the x letters
weighted by the diagonal content of each region between chords.  Keeping
both routes separate is the point: they must agree exactly.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .ensembles import (EnsembleSpec, derive_seed, make_spec, sample_matrix)
from .spectra import semicircle_moment

Run = Tuple[str, int, int]  # (kind, index, power), power >= 1
Word = Tuple[Run, ...]

_TOKEN = re.compile(r"^([xd])(\d*)(?:\^(\d+))?$")


def _merge_runs(runs: Sequence[Run]) -> Word:
    out: List[Run] = []
    for kind, index, power in runs:
        if power < 1:
            raise ValueError("powers must be >= 1")
        if out and out[-1][0] == kind and out[-1][1] == index:
            out[-1] = (kind, index, out[-1][2] + power)
        else:
            out.append((kind, index, power))
    return tuple(out)


def parse_word(text: str) -> Word:
    """Parse "x d x d", "x1 x2 x1 x2", "x^2 d^2" into canonical runs.

    A bare letter means index 1; adjacent same-letter runs merge.
    """
    tokens = text.replace("*", " ").split()
    if not tokens:
        raise ValueError("empty word")
    runs: List[Run] = []
    for tok in tokens:
        m = _TOKEN.match(tok)
        if m is None:
            raise ValueError(f"bad word token {tok!r}")
        kind, idx, power = m.group(1), m.group(2), m.group(3)
        runs.append((kind, int(idx) if idx else 1, int(power) if power else 1))
    return _merge_runs(runs)


def format_word(word: Word) -> str:
    parts = []
    for kind, index, power in word:
        part = f"{kind}{index}"
        if power != 1:
            part += f"^{power}"
        parts.append(part)
    return " ".join(parts)


def _as_word(word: Union[str, Word]) -> Word:
    if isinstance(word, str):
        return parse_word(word)
    return _merge_runs(word)


MomentSource = Union["DiagonalEnsemble", Sequence, Callable[[int], Fraction]]


def _moment_of(binding: MomentSource, k: int) -> Fraction:
    if hasattr(binding, "moment"):
        return Fraction(binding.moment(k))
    if callable(binding):
        return Fraction(binding(k))
    return Fraction(binding[k])


def _single_moment(kind: str, index: int, power: int, bindings: Dict) -> Fraction:
    if kind == "x":
        return Fraction(semicircle_moment(power))
    if index not in bindings:
        raise ValueError(f"no binding for diagonal letter d{index}")
    return _moment_of(bindings[index], power)


def predict_by_centering(word: Union[str, Word], bindings: Optional[Dict] = None) -> Fraction:
    """Freeness prediction via the centering recursion.

    For an alternating word the trace of the product of centered factors
    vanishes; expanding that identity expresses the full moment through
    strictly shorter words, which recurse the same way.
    """
    bindings = bindings or {}
    memo: Dict[Word, Fraction] = {}

    def phi(runs: Word) -> Fraction:
        if not runs:
            return Fraction(1)
        runs = _merge_runs(runs)
        got = memo.get(runs)
        if got is not None:
            return got
        if len(runs) == 1:
            kind, index, power = runs[0]
            val = _single_moment(kind, index, power, bindings)
        else:
            m = len(runs)
            mus = [_single_moment(k, i, p, bindings) for k, i, p in runs]
            total = Fraction(0)
            for mask in range(2 ** m - 1):  # proper subwords only
                coef = Fraction(1)
                kept = []
                for t in range(m):
                    if mask >> t & 1:
                        kept.append(runs[t])
                    else:
                        coef *= -mus[t]
                if coef != 0:
                    total += coef * phi(tuple(kept))
            val = -total
        memo[runs] = val
        return val

    return phi(_as_word(word))


def _expand(word: Word) -> List[Tuple[str, int]]:
    flat: List[Tuple[str, int]] = []
    for kind, index, power in word:
        flat.extend([(kind, index)] * power)
    return flat


def _nc_same_index(positions: List[int], letters: List[Tuple[str, int]]) -> List[Dict[int, int]]:
    """Non-crossing pairings of x positions whose endpoints share an index."""
    if len(positions) % 2 == 1:
        return []
    if not positions:
        return [{}]
    out: List[Dict[int, int]] = []
    first = positions[0]
    for j in range(1, len(positions), 2):
        partner = positions[j]
        if letters[first][1] != letters[partner][1]:
            continue
        inner = _nc_same_index(positions[1:j], letters)
        outer = _nc_same_index(positions[j + 1:], letters)
        for a in inner:
            for b in outer:
                match = {first: partner, partner: first}
                match.update(a)
                match.update(b)
                out.append(match)
    return out


def _region_moment(indices: List[int], bindings: Dict) -> Fraction:
    if not indices:
        return Fraction(1)
    if len(set(indices)) > 1:
        raise ValueError("chord-diagram regions mixing diagonal indices are "
                         "out of scope for the pairing evaluator")
    if indices[0] not in bindings:
        raise ValueError(f"no binding for diagonal letter d{indices[0]}")
    return _moment_of(bindings[indices[0]], len(indices))


def predict_by_pairings(word: Union[str, Word], bindings: Optional[Dict] = None) -> Fraction:
    """Freeness prediction via non-crossing chord diagrams.

    Sums over non-crossing pairings of the semicircular letters with equal
    indices; each region the chords cut out contributes the moment of its
    diagonal content, read cyclically (the region outside all chords joins
    the word's two ends).
    """
    bindings = bindings or {}
    letters = _expand(_as_word(word))
    xpos = [i for i, (kind, _) in enumerate(letters) if kind == "x"]
    total = Fraction(0)
    for match in _nc_same_index(xpos, letters):
        factor = Fraction(1)
        stack: List[List[int]] = [[]]
        for i, (kind, index) in enumerate(letters):
            if kind == "d":
                stack[-1].append(index)
            elif match[i] > i:
                stack.append([])
            else:
                factor *= _region_moment(stack.pop(), bindings)
        factor *= _region_moment(stack.pop(), bindings)
        total += factor
    return total


def free_prediction(word: Union[str, Word], bindings: Optional[Dict] = None) -> Fraction:
    return predict_by_centering(word, bindings)


class DiagonalEnsemble:
    """Moment source plus a concrete diagonal realization for Monte Carlo."""

    def __init__(self, name: str, moment_fn: Callable[[int], Fraction],
                 realize_fn: Callable[[int, int], np.ndarray]):
        self.name = name
        self._moment_fn = moment_fn
        self._realize_fn = realize_fn

    def moment(self, k: int) -> Fraction:
        if k < 0:
            raise ValueError("moment order must be >= 0")
        return self._moment_fn(k)

    def realize(self, n: int, seed: int = 0) -> np.ndarray:
        values = self._realize_fn(n, seed)
        if len(values) != n:
            raise ValueError("realization has the wrong length")
        return values

    def __repr__(self):
        return f"DiagonalEnsemble({self.name})"


def two_point_diagonal() -> DiagonalEnsemble:
    """Half the diagonal at +1 and half at -1 (exact at even n)."""

    def realize(n, seed):
        values = np.ones(n)
        values[n // 2:] = -1.0
        return values

    return DiagonalEnsemble(
        "two_point",
        lambda k: Fraction(1) if k % 2 == 0 else Fraction(0),
        realize,
    )


def uniform_diagonal(a, b) -> DiagonalEnsemble:
    """Uniform law on [a, b] realized by quantile midpoints."""
    fa, fb = Fraction(a), Fraction(b)
    if fb <= fa:
        raise ValueError("need a < b")

    def moment(k):
        return (fb ** (k + 1) - fa ** (k + 1)) / ((k + 1) * (fb - fa))

    def realize(n, seed):
        lo, hi = float(fa), float(fb)
        return lo + (hi - lo) * (np.arange(n) + 0.5) / n

    return DiagonalEnsemble(f"uniform[{a},{b}]", moment, realize)


def fixed_diagonal(values: Sequence) -> DiagonalEnsemble:
    """Cycle through a fixed value list; n must be a multiple of its length."""
    base = [Fraction(v) for v in values]
    if not base:
        raise ValueError("need at least one value")

    def moment(k):
        return sum(v ** k for v in base) / len(base)

    def realize(n, seed):
        if n % len(base) != 0:
            raise ValueError(f"n must be a multiple of {len(base)}")
        return np.tile(np.array([float(v) for v in base]), n // len(base))

    return DiagonalEnsemble(f"fixed{tuple(float(v) for v in base)}", moment, realize)


def random_sign_diagonal() -> DiagonalEnsemble:
    """iid +/-1 signs; the ideal moments are the even/odd indicator."""

    def realize(n, seed):
        rng = np.random.default_rng(seed)
        return rng.choice(np.array([-1.0, 1.0]), size=n)

    return DiagonalEnsemble(
        "random_signs",
        lambda k: Fraction(1) if k % 2 == 0 else Fraction(0),
        realize,
    )


DIAGONALS = {
    "two_point": two_point_diagonal,
    "random_signs": random_sign_diagonal,
}


@dataclass(frozen=True)
class MomentReport:
    word: str
    n: int
    samples: int
    estimate: float
    std_error: float


def _realizations(word: Word, bindings: Dict, n: int, sample_seed: int) -> Dict:
    mats: Dict[Tuple[str, int], np.ndarray] = {}
    for kind, index, _ in word:
        tag = (kind, index)
        if tag in mats:
            continue
        if kind == "x":
            spec = make_spec("iid", n, "gaussian_complex",
                             seed=derive_seed(sample_seed, index))
            mats[tag] = sample_matrix(spec).entries
        else:
            if index not in bindings:
                raise ValueError(f"no binding for diagonal letter d{index}")
            values = bindings[index].realize(n, derive_seed(sample_seed, 1000 + index))
            mats[tag] = np.diag(values).astype(complex)
    return mats


def estimate_mixed_moment(word: Union[str, Word], bindings: Optional[Dict],
                          n: int, samples: int, seed: int = 0) -> MomentReport:
    """Monte Carlo normalized trace of the word over independent draws."""
    word = _as_word(word)
    bindings = bindings or {}
    if samples < 1:
        raise ValueError("samples must be >= 1")
    values = np.empty(samples)
    for s in range(samples):
        mats = _realizations(word, bindings, n, derive_seed(seed, s))
        prod = np.eye(n, dtype=complex)
        for kind, index, power in word:
            m = mats[(kind, index)]
            for _ in range(power):
                prod = prod @ m
        values[s] = np.trace(prod).real / n
    se = float(values.std(ddof=1) / np.sqrt(samples)) if samples > 1 else 0.0
    return MomentReport(word=format_word(word), n=n, samples=samples,
                        estimate=float(values.mean()), std_error=se)


@dataclass(frozen=True)
class FreenessRow:
    word: str
    n: int
    estimate: float
    std_error: float
    prediction: float
    z_score: float


def freeness_report(words: Sequence[Union[str, Word]], bindings: Optional[Dict],
                    n_ladder: Sequence[int], samples: int,
                    seed: int = 0) -> List[FreenessRow]:
    """Estimates next to predictions for each word across matrix sizes."""
    rows: List[FreenessRow] = []
    for word in words:
        word = _as_word(word)
        pred = float(free_prediction(word, bindings))
        for n in n_ladder:
            rep = estimate_mixed_moment(word, bindings, n, samples,
                                        seed=derive_seed(seed, n))
            gap = rep.estimate - pred
            if rep.std_error > 0.0:
                z = gap / rep.std_error
            else:
                z = 0.0 if gap == 0.0 else math.inf
            rows.append(FreenessRow(word=rep.word, n=n, estimate=rep.estimate,
                                    std_error=rep.std_error, prediction=pred,
                                    z_score=float(z)))
    return rows
