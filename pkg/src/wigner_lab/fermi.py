"""Shell-restricted effective model on a periodic momentum lattice.

Modes live on {-L/2+1, ..., L/2}^d.  A shell keeps the modes whose kinetic
energy |2 pi k / L|^2 / 2 lies within beta/L of a target energy E; the
band test compares the integer |k|^2 against float bounds, so membership
is exact.  A real potential drawn on the position lattice couples modes
through its Fourier transform at the wrapped momentum difference, and the
resulting shell matrix is rescaled so its entries have variance 1/n.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .common import BudgetError, loglog_slope
from .ensembles import HermitianSample, derive_seed


def _validate_lattice(d: int, L: int) -> None:
    if d not in (2, 3):
        raise ValueError("dimension must be 2 or 3")
    if L < 4 or L % 2 != 0:
        raise ValueError("lattice side must be an even integer >= 4")


@dataclass(frozen=True, eq=False)
class LatticeShell:
    d: int
    L: int
    energy: float
    band: float
    points: np.ndarray  # (n, d) int64, lexicographically sorted

    @property
    def n(self) -> int:
        return len(self.points)


def shell_bounds(d: int, L: int, energy: float, band: float) -> Tuple[float, float]:
    """Bounds on the integer squared norm |k|^2 for shell membership."""
    scale = L * L / (2.0 * math.pi ** 2)
    return (energy - band / L) * scale, (energy + band / L) * scale


def enumerate_shell(d: int, L: int, energy: float, band: float) -> LatticeShell:
    _validate_lattice(d, L)
    if energy <= 0.0 or band <= 0.0:
        raise ValueError("energy and band width must be positive")
    if math.sqrt(2.0 * energy) >= math.pi:
        raise ValueError("energy too high: the shell would leave the lattice")
    axis = np.arange(-L // 2 + 1, L // 2 + 1, dtype=np.int64)
    coords = np.stack(np.meshgrid(*([axis] * d), indexing="ij"), axis=-1)
    coords = coords.reshape(-1, d)
    norms = (coords.astype(np.int64) ** 2).sum(axis=1)
    lo, hi = shell_bounds(d, L, energy, band)
    mask = (norms >= lo) & (norms <= hi)
    points = coords[mask]
    if len(points) == 0:
        warnings.warn(f"empty shell for d={d} L={L} E={energy} band={band}",
                      stacklevel=2)
    return LatticeShell(d=d, L=L, energy=energy, band=band, points=points)


@dataclass(frozen=True, eq=False)
class PotentialField:
    d: int
    L: int
    coupling: float
    seed: int
    values: np.ndarray  # (L,)*d real


def sample_potential(d: int, L: int, coupling: float, seed: int) -> PotentialField:
    """iid centered Gaussian site potential with standard deviation `coupling`."""
    _validate_lattice(d, L)
    if coupling <= 0.0:
        raise ValueError("coupling must be positive")
    rng = np.random.default_rng(seed)
    values = rng.normal(0.0, coupling, size=(L,) * d)
    return PotentialField(d=d, L=L, coupling=coupling, seed=seed, values=values)


@dataclass(frozen=True, eq=False)
class FourierPotential:
    d: int
    L: int
    coupling: float
    values: np.ndarray  # (L,)*d complex, exactly Hermitian under k -> -k


def fourier_potential(field: PotentialField) -> FourierPotential:
    """Normalized Fourier transform, symmetrized so vhat(-k) == conj(vhat(k))
    holds bitwise; self-negative modes come out exactly real."""
    vhat = np.fft.ifftn(field.values)
    L = field.L
    flip = tuple((-np.arange(L)) % L for _ in range(field.d))
    vhat = (vhat + np.conj(vhat[np.ix_(*flip)])) / 2.0
    return FourierPotential(d=field.d, L=field.L, coupling=field.coupling,
                            values=vhat)


def wrap_delta(delta: np.ndarray, L: int) -> np.ndarray:
    """Map integer differences into the centered window {-L/2+1, ..., L/2}."""
    off = L // 2 - 1
    return (delta + off) % L - off


@dataclass(frozen=True, eq=False)
class EffectiveMatrix:
    shell: LatticeShell
    coupling: float
    matrix: np.ndarray  # (n, n) complex
    scale: float  # multiplier that normalizes entries to variance 1/n


def build_effective_matrix(shell: LatticeShell,
                           vhat: FourierPotential) -> EffectiveMatrix:
    if shell.d != vhat.d or shell.L != vhat.L:
        raise ValueError("shell and potential live on different lattices")
    if shell.n == 0:
        raise ValueError("cannot build a matrix on an empty shell")
    L, d, n = shell.L, shell.d, shell.n
    delta = shell.points[:, None, :] - shell.points[None, :, :]
    idx = tuple(np.mod(delta[..., t], L) for t in range(d))
    matrix = vhat.values[idx]
    scale = math.sqrt(L ** d / (vhat.coupling ** 2 * n))
    return EffectiveMatrix(shell=shell, coupling=vhat.coupling,
                           matrix=matrix, scale=scale)


def rescale(em: EffectiveMatrix) -> HermitianSample:
    return HermitianSample(n=em.shell.n, entries=em.scale * em.matrix)


def effective_sample(d: int, L: int, energy: float, band: float,
                     coupling: float, seed: int) -> HermitianSample:
    """One draw of the rescaled shell matrix."""
    shell = enumerate_shell(d, L, energy, band)
    field = sample_potential(d, L, coupling, seed)
    return rescale(build_effective_matrix(shell, fourier_potential(field)))


def lattice_side_for(coupling: float) -> int:
    """Side length tied to the coupling: L = 2 round(coupling^-2 / 2)."""
    if coupling <= 0.0:
        raise ValueError("coupling must be positive")
    L = 2 * round(coupling ** -2 / 2.0)
    if L < 4:
        raise ValueError(f"coupling {coupling} too strong for a usable lattice")
    return L


@dataclass(frozen=True)
class ScanRow:
    coupling: float
    L: int
    n: int
    spectral_width: float


@dataclass(frozen=True)
class ScanResult:
    rows: Tuple[ScanRow, ...]
    width_slope: float  # log spectral width vs log coupling
    size_slope: float  # log shell size vs log coupling


def coupling_scan(d: int, energy: float, band: float,
                  couplings: Sequence[float], seed: int = 0,
                  draws: int = 1) -> ScanResult:
    """Sweep couplings; each sets its own lattice side.  The spectral width
    of the unscaled shell matrix should shrink like coupling^2 while the
    shell size grows, which the two log-log slopes summarize."""
    if draws < 1:
        raise ValueError("draws must be >= 1")
    rows: List[ScanRow] = []
    for i, lam in enumerate(couplings):
        L = lattice_side_for(lam)
        shell = enumerate_shell(d, L, energy, band)
        widths = []
        for j in range(draws):
            field = sample_potential(d, L, lam, derive_seed(derive_seed(seed, i), j))
            em = build_effective_matrix(shell, fourier_potential(field))
            widths.append(float(np.abs(np.linalg.eigvalsh(em.matrix)).max()))
        rows.append(ScanRow(coupling=lam, L=L, n=shell.n,
                            spectral_width=float(np.mean(widths))))
    lams = [r.coupling for r in rows]
    return ScanResult(
        rows=tuple(rows),
        width_slope=loglog_slope(lams, [r.spectral_width for r in rows]),
        size_slope=loglog_slope(lams, [r.n for r in rows]),
    )
