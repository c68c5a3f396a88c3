"""Shell enumeration, Fourier potential, and the effective shell matrix."""

import math

import numpy as np
import pytest

from wigner_lab import (SemicircleLaw, build_effective_matrix, coupling_scan,
                        effective_sample, enumerate_shell, fourier_potential,
                        ks_distance, lattice_side_for, make_relation, rescale,
                        sample_potential, wrap_delta)

BAND = 2.0 * math.pi


def brute_shell(d, L, energy, band):
    """Membership via the kinetic-energy inequality itself."""
    pts = []
    axis = range(-L // 2 + 1, L // 2 + 1)
    for k in np.ndindex(*([L] * d)):
        vec = tuple(sorted(axis)[i] for i in k)
        kinetic = sum((2 * math.pi * c / L) ** 2 for c in vec) / 2.0
        if energy - band / L <= kinetic <= energy + band / L:
            pts.append(vec)
    return set(pts)


def test_shell_golden_sizes():
    for L, want in [(16, 28), (32, 64), (64, 124), (128, 288)]:
        assert enumerate_shell(2, L, 2.0, BAND).n == want


@pytest.mark.parametrize("d,L", [(2, 8), (2, 16), (3, 8)])
def test_shell_matches_energy_inequality(d, L):
    shell = enumerate_shell(d, L, 2.0, BAND)
    got = {tuple(p) for p in shell.points}
    assert got == brute_shell(d, L, 2.0, BAND)


def test_shell_points_sorted_and_in_window():
    shell = enumerate_shell(2, 16, 2.0, BAND)
    pts = [tuple(p) for p in shell.points]
    assert pts == sorted(pts)
    assert all(-7 <= c <= 8 for p in pts for c in p)


def test_shell_closed_under_wrapped_negation():
    shell = enumerate_shell(2, 16, 2.0, BAND)
    got = {tuple(p) for p in shell.points}
    for p in shell.points:
        neg = tuple(int(v) for v in wrap_delta(-p, shell.L))
        assert neg in got


def test_shell_validations():
    with pytest.raises(ValueError):
        enumerate_shell(4, 16, 2.0, BAND)
    with pytest.raises(ValueError):
        enumerate_shell(2, 15, 2.0, BAND)
    with pytest.raises(ValueError):
        enumerate_shell(2, 2, 2.0, BAND)
    with pytest.raises(ValueError):
        enumerate_shell(2, 16, 5.1, BAND)  # sqrt(2E) >= pi
    with pytest.raises(ValueError):
        enumerate_shell(2, 16, 2.0, -1.0)
    with pytest.warns(UserWarning):
        empty = enumerate_shell(2, 6, 2.0, 0.001)
    assert empty.n == 0


def test_wrap_delta_window():
    L = 8
    vals = np.arange(-20, 21)
    wrapped = wrap_delta(vals, L)
    assert wrapped.min() >= -L // 2 + 1 and wrapped.max() <= L // 2
    assert np.all((vals - wrapped) % L == 0)


def test_fourier_constant_field_is_a_delta():
    field = sample_potential(2, 8, 1.0, seed=0)
    const = field.values * 0 + 3.5
    fp = fourier_potential(type(field)(2, 8, 1.0, 0, const))
    assert fp.values[0, 0] == pytest.approx(3.5)
    off = fp.values.copy()
    off[0, 0] = 0
    assert np.abs(off).max() < 1e-13


def test_fourier_single_site_is_flat():
    field = sample_potential(2, 8, 1.0, seed=0)
    site = field.values * 0
    site[2, 5] = 1.0
    fp = fourier_potential(type(field)(2, 8, 1.0, 0, site))
    assert np.allclose(np.abs(fp.values), 1.0 / 64, atol=1e-15)


def test_fourier_symmetry_is_exact():
    fp = fourier_potential(sample_potential(2, 16, 0.3, seed=5))
    L = 16
    flip = (-np.arange(L)) % L
    assert np.array_equal(fp.values, np.conj(fp.values[np.ix_(flip, flip)]))
    # self-negative modes come out exactly real
    for k in ((0, 0), (8, 0), (0, 8), (8, 8)):
        assert fp.values[k].imag == 0.0


def test_fourier_parseval():
    field = sample_potential(2, 16, 0.3, seed=6)
    fp = fourier_potential(field)
    lhs = (np.abs(fp.values) ** 2).sum()
    rhs = (field.values ** 2).sum() / 16 ** 2
    assert lhs == pytest.approx(rhs, rel=1e-10)


def test_fourier_variance_window():
    lam, L = 0.2, 24
    fp = fourier_potential(sample_potential(2, L, lam, seed=3))
    ratio = (np.abs(fp.values) ** 2).mean() * L ** 2 / lam ** 2
    assert 0.9 <= ratio <= 1.1


def test_effective_matrix_structure():
    shell = enumerate_shell(2, 16, 2.0, BAND)
    fp = fourier_potential(sample_potential(2, 16, 0.25, seed=9))
    em = build_effective_matrix(shell, fp)
    n = shell.n
    assert em.matrix.shape == (n, n)
    assert np.array_equal(em.matrix, em.matrix.conj().T)
    assert np.all(em.matrix.diagonal().imag == 0.0)
    # entries read the Fourier potential at the wrapped mode difference
    for i in (0, 3, n - 1):
        for j in (0, 5, n - 2):
            delta = shell.points[i] - shell.points[j]
            assert em.matrix[i, j] == fp.values[tuple(delta % 16)]
    assert em.scale == pytest.approx(math.sqrt(16 ** 2 / (0.25 ** 2 * n)))


def test_effective_matrix_lattice_mismatch():
    shell = enumerate_shell(2, 16, 2.0, BAND)
    fp = fourier_potential(sample_potential(2, 8, 0.25, seed=9))
    with pytest.raises(ValueError):
        build_effective_matrix(shell, fp)


def test_rescaled_entry_variance():
    shell = enumerate_shell(2, 24, 2.0, BAND)
    n = shell.n
    acc = []
    for seed in range(5):
        fp = fourier_potential(sample_potential(2, 24, 0.2, seed=seed))
        X = rescale(build_effective_matrix(shell, fp)).entries
        off = ~np.eye(n, dtype=bool)
        acc.append((np.abs(X[off]) ** 2).mean() * n)
    assert 0.85 <= np.mean(acc) <= 1.15


def test_full_lattice_scale_degenerates_to_coupling_inverse():
    # with the whole lattice in the shell, n = L^d and the normalizer
    # reduces to 1/coupling exactly
    shell = enumerate_shell(2, 4, 2.0, 1000.0)
    assert shell.n == 16
    fp = fourier_potential(sample_potential(2, 4, 1.0, seed=1))
    assert build_effective_matrix(shell, fp).scale == pytest.approx(1.0)


def test_rescaled_spectrum_near_semicircle():
    eigs = np.concatenate([
        np.linalg.eigvalsh(effective_sample(2, 64, 2.0, BAND, 0.125, seed=s).entries)
        for s in range(10)
    ])
    assert ks_distance(np.sort(eigs), SemicircleLaw()) <= 0.1


def test_lattice_side_for_couplings():
    assert [lattice_side_for(c) for c in (1 / 4, 1 / 5, 1 / 6, 1 / 8)] == \
        [16, 24, 36, 64]
    with pytest.raises(ValueError):
        lattice_side_for(2.0)
    with pytest.raises(ValueError):
        lattice_side_for(0.0)


def test_coupling_scan_slopes():
    result = coupling_scan(2, 2.0, BAND, [1 / 4, 1 / 5, 1 / 6, 1 / 8],
                           seed=0, draws=1)
    assert [r.L for r in result.rows] == [16, 24, 36, 64]
    assert [r.n for r in result.rows] == [28, 52, 64, 124]
    assert 1.5 <= result.width_slope <= 2.5
    assert -2.5 <= result.size_slope <= -1.5
    widths = [r.spectral_width for r in result.rows]
    assert widths == sorted(widths, reverse=True)


def test_empty_shell_matrix_rejected():
    with pytest.warns(UserWarning):
        shell = enumerate_shell(2, 6, 2.0, 0.001)
    fp = fourier_potential(sample_potential(2, 6, 0.5, seed=0))
    with pytest.raises(ValueError):
        build_effective_matrix(shell, fp)
