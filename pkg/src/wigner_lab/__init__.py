"""Semicircle-law machinery for Hermitian ensembles with correlated entries.

The package is organized around an equivalence relation on matrix index
pairs: relations build and audit them, ensembles sample matrices that
respect them, spectra compare eigenvalue statistics against reference
laws, partitions count the index sequences behind the moment method,
fermi builds the shell-restricted effective model, and freeness checks
asymptotic-freeness predictions against Monte Carlo traces.
"""

from .common import BudgetError, loglog_slope
from .ensembles import (FAMILIES, CorrelationRule, EnsembleSpec,
                        EntryDistribution, HermitianSample, covariance,
                        derive_seed, iter_matrices, make_spec, sample_batch,
                        sample_matrix, sample_stack)
from .fermi import (EffectiveMatrix, FourierPotential, LatticeShell,
                    PotentialField, build_effective_matrix, coupling_scan,
                    effective_sample, enumerate_shell, fourier_potential,
                    lattice_side_for, rescale, sample_potential, wrap_delta)
from .freeness import (DIAGONALS, DiagonalEnsemble, FreenessRow, MomentReport,
                       estimate_mixed_moment, fixed_diagonal, format_word,
                       free_prediction, freeness_report, parse_word,
                       predict_by_centering, predict_by_pairings,
                       random_sign_diagonal, two_point_diagonal,
                       uniform_diagonal)
from .partitions import (Partition, SequenceCensus, census, count_noncrossing,
                         enumerate_pair_partitions, exact_gaussian_moment,
                         format_blocks, induced_partition, is_crossing,
                         parse_blocks)
from .relations import (DEFAULT_LADDER, KINDS, ConditionReport,
                        EquivalenceRelation, GrowthDiagnostic,
                        check_conditions, growth_diagnostic, make_relation)
from .spectra import (ScaledMixtureLaw, SemicircleLaw, SpectralSummary,
                      atom_mass, default_zero_tol, eigenvalues,
                      empirical_moments, ks_distance, rank_at_tol,
                      reference_eval, reference_law, semicircle_moment,
                      summarize)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
