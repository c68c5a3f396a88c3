"""Spectral summaries and reference laws.

The semicircle law on [-2, 2] has moments given by Catalan numbers at even
order and zero at odd order.  The scaled mixture law is the reference for
the kernel-carrying (violating) ensemble: half an atom at zero plus half a
semicircle compressed onto [-sqrt(2), sqrt(2)].  Mixture moments are
evaluated by adaptive quadrature against the stated density rather than a
closed form, so the density expression itself is what gets tested.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np
from scipy.integrate import quad

QUAD_TOL = 1e-9
ZERO_TOL_FACTOR = 1e-8
MOMENT_ORDER_BUDGET = 60


def semicircle_moment(k: int) -> int:
    """k-th moment of the semicircle law: Catalan(k/2) for even k, else 0.

    Exact integer arithmetic; orders above 60 are out of contract and raise.
    """
    if k < 0:
        raise ValueError("moment order must be >= 0")
    if k > MOMENT_ORDER_BUDGET:
        raise OverflowError(f"moment order {k} exceeds contract bound "
                            f"{MOMENT_ORDER_BUDGET}")
    if k % 2 == 1:
        return 0
    half = k // 2
    return math.comb(k, half) // (half + 1)


def _semicircle_cdf(x: float) -> float:
    if x <= -2.0:
        return 0.0
    if x >= 2.0:
        return 1.0
    return 0.5 + x * math.sqrt(4.0 - x * x) / (4.0 * math.pi) \
        + math.asin(x / 2.0) / math.pi


class SemicircleLaw:
    """Density sqrt(4 - x^2) / (2 pi) on [-2, 2]."""

    support = (-2.0, 2.0)
    atom_mass = 0.0
    atom_location = None

    def density(self, x: float) -> float:
        if abs(x) >= 2.0:
            return 0.0
        return math.sqrt(4.0 - x * x) / (2.0 * math.pi)

    def cdf(self, x: float) -> float:
        return _semicircle_cdf(x)

    def cdf_left(self, x: float) -> float:
        return _semicircle_cdf(x)

    def moment(self, k: int) -> float:
        return float(semicircle_moment(k))


class ScaledMixtureLaw:
    """Half an atom at zero, half a semicircle compressed by sqrt(2).

    Continuous part: (1/2) * sqrt(2) * (1/2pi) * sqrt(4 - 2 x^2) on
    x^2 <= 2; total mass 1.  Moments integrate the density by adaptive
    quadrature (tolerance 1e-9) plus the atom's contribution.
    """

    support = (-math.sqrt(2.0), math.sqrt(2.0))
    atom_mass = 0.5
    atom_location = 0.0

    def density(self, x: float) -> float:
        """Continuous-part density (the atom is reported separately)."""
        if x * x >= 2.0:
            return 0.0
        return 0.5 * math.sqrt(2.0) * math.sqrt(4.0 - 2.0 * x * x) / (2.0 * math.pi)

    def cdf(self, x: float) -> float:
        base = 0.5 * _semicircle_cdf(math.sqrt(2.0) * x)
        return base + (0.5 if x >= 0.0 else 0.0)

    def cdf_left(self, x: float) -> float:
        base = 0.5 * _semicircle_cdf(math.sqrt(2.0) * x)
        return base + (0.5 if x > 0.0 else 0.0)

    def moment(self, k: int) -> float:
        atom = 0.5 if k == 0 else 0.0
        lim = math.sqrt(2.0)
        val, _ = quad(lambda x: x ** k * self.density(x), -lim, lim,
                      epsabs=QUAD_TOL, epsrel=QUAD_TOL)
        return atom + val


LAWS = {"semicircle": SemicircleLaw, "mixture": ScaledMixtureLaw}


def reference_law(name: str):
    if name not in LAWS:
        raise ValueError(f"unknown reference law {name!r}")
    return LAWS[name]()


def reference_eval(law, x: Optional[float] = None, k: Optional[int] = None):
    """Evaluate a law: density and cdf at x, or the k-th moment."""
    if (x is None) == (k is None):
        raise ValueError("pass exactly one of x, k")
    if x is not None:
        return {"density": law.density(x), "cdf": law.cdf(x)}
    return {"moment": law.moment(k)}


def _as_entries(sample) -> np.ndarray:
    return np.asarray(getattr(sample, "entries", sample))


def eigenvalues(sample) -> np.ndarray:
    """Sorted eigenvalues; eigensolver failures propagate (never zero-fill)."""
    return np.linalg.eigvalsh(_as_entries(sample))


def empirical_moments(sample_or_eigs, order: int) -> np.ndarray:
    """Array m[0..order] with m[k] = (1/n) sum lambda_i^k; m[0] is exactly 1."""
    arr = np.asarray(sample_or_eigs)
    eigs = eigenvalues(arr) if arr.ndim == 2 else arr
    out = np.empty(order + 1)
    out[0] = 1.0
    powers = np.ones_like(eigs)
    for k in range(1, order + 1):
        powers = powers * eigs
        out[k] = powers.mean()
    return out


def default_zero_tol(eigs: np.ndarray) -> float:
    scale = float(np.abs(eigs).max()) if len(eigs) else 0.0
    return ZERO_TOL_FACTOR * scale


@dataclass(frozen=True)
class SpectralSummary:
    n: int
    eigenvalues: np.ndarray
    moments: np.ndarray
    hist_counts: np.ndarray
    hist_edges: np.ndarray
    atom_at_zero: float
    zero_tol: float


def summarize(sample, order: int = 8, zero_tol: Optional[float] = None,
              bins: Union[str, int] = "fd") -> SpectralSummary:
    """Eigenvalues, moments up to `order`, a Freedman-Diaconis histogram by
    default, and the mass of near-zero eigenvalues at zero_tol (default
    1e-8 times the spectral radius)."""
    eigs = eigenvalues(sample)
    tol = default_zero_tol(eigs) if zero_tol is None else float(zero_tol)
    counts, edges = np.histogram(eigs, bins=bins)
    return SpectralSummary(
        n=len(eigs),
        eigenvalues=eigs,
        moments=empirical_moments(eigs, order),
        hist_counts=counts,
        hist_edges=edges,
        atom_at_zero=float(np.mean(np.abs(eigs) <= tol)),
        zero_tol=tol,
    )


def _summary_eigs(summary_or_eigs) -> np.ndarray:
    if isinstance(summary_or_eigs, SpectralSummary):
        return summary_or_eigs.eigenvalues
    return np.sort(np.asarray(summary_or_eigs, dtype=float))


def atom_mass(summary_or_eigs, zero_tol: Optional[float] = None) -> float:
    eigs = _summary_eigs(summary_or_eigs)
    tol = default_zero_tol(eigs) if zero_tol is None else float(zero_tol)
    return float(np.mean(np.abs(eigs) <= tol))


def rank_at_tol(summary_or_eigs, zero_tol: Optional[float] = None) -> int:
    """Residual-thresholded rank: eigenvalues above the zero tolerance."""
    eigs = _summary_eigs(summary_or_eigs)
    tol = default_zero_tol(eigs) if zero_tol is None else float(zero_tol)
    return int(np.sum(np.abs(eigs) > tol))


def ks_distance(summary_or_eigs, law, zero_tol: Optional[float] = None) -> float:
    """sup |ECDF - law cdf|, checking one-sided limits at every eigenvalue
    and at the law's atom so jump points on both sides are covered.

    When the law has an atom, eigenvalues within the zero tolerance of it
    are counted exactly at the atom (the same classification atom_mass
    uses); otherwise their numerically tiny spread straddles the jump and
    the distance saturates at half the atom's mass.
    """
    eigs = _summary_eigs(summary_or_eigs)
    if len(eigs) == 0:
        raise ValueError("empty spectrum")
    cands = eigs
    if law.atom_location is not None:
        loc = law.atom_location
        tol = default_zero_tol(eigs) if zero_tol is None else float(zero_tol)
        eigs = np.sort(np.where(np.abs(eigs - loc) <= tol, loc, eigs))
        cands = np.append(eigs, loc)
    cands = np.unique(cands)
    n = len(eigs)
    right = np.searchsorted(eigs, cands, side="right") / n
    left = np.searchsorted(eigs, cands, side="left") / n
    d = 0.0
    for t, fl, fr in zip(cands, left, right):
        d = max(d, abs(fr - law.cdf(float(t))), abs(fl - law.cdf_left(float(t))))
    return d
