"""Finite-dimensional verification of the covariant-measurement reductions.

Any phase measurement on a possibly degenerate integer-spectrum generator
can be replaced, without changing the phase-averaged error statistics, by

1. a covariant measurement (phase-average the POVM seed), and then
2. a nondegenerate probe state measured with the canonical POVM.

This module implements both reduction steps on explicit matrices so the
identities can be checked numerically on small systems: the covariant
average, the degeneracy-removing state construction, the canonical POVM,
and the continuity bound |<Phi>_{phi+eps} - <Phi>_phi| <= 4 pi
sqrt(2 <|G|> |eps|) on the mean estimate.

Phase integrals are replaced by exact sums: every integrand is a
trigonometric polynomial of degree bounded by the eigenvalue span, so a
uniform grid of K >= 4 span + 4 points integrates it without quadrature
error.  Estimate labels live on that grid, phi_k = -pi + 2 pi k / K.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .canonical import BoundReport
from .states import Spectrum

__all__ = [
    "DegenerateSystem",
    "DensityMatrix",
    "PovmSet",
    "bias_derivative_identity",
    "canonical_povm",
    "continuity_check",
    "covariant_average",
    "error_density",
    "lemma2_reduction",
    "random_degenerate_system",
    "random_density",
    "random_povm",
    "verify_random_instance",
]

_COMPLETENESS_TOL = 1e-12
_PSD_TOL = 1e-12
_COVARIANCE_TOL = 1e-10


def uniform_estimates(grid_size: int) -> np.ndarray:
    """Estimate labels phi_k = -pi + 2 pi k / K."""
    return -math.pi + 2.0 * math.pi * np.arange(grid_size) / grid_size


def _wrap(angle: np.ndarray | float) -> np.ndarray | float:
    """Wrap into [-pi, pi)."""
    return np.mod(np.asarray(angle) + math.pi, 2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class DegenerateSystem:
    """Integer-spectrum generator with explicit degeneracy labels.

    ``eigenvalues[i]`` is the generator eigenvalue of basis vector i; the
    basis label of vector i is (eigenvalues[i], degeneracy_index[i]).
    """

    eigenvalues: tuple[int, ...]
    basis_labels: tuple[tuple[int, int], ...]
    dimension: int

    def __post_init__(self) -> None:
        if self.dimension != len(self.eigenvalues) or self.dimension != len(
            self.basis_labels
        ):
            raise ValueError("dimension must equal the number of basis vectors")
        for i, (n, d) in enumerate(self.basis_labels):
            if n != self.eigenvalues[i] or d < 1:
                raise ValueError(f"inconsistent basis label {(n, d)} at index {i}")

    @classmethod
    def from_degeneracies(
        cls, values: list[int], degeneracies: list[int]
    ) -> "DegenerateSystem":
        """System with degeneracy D(values[i]) = degeneracies[i]."""
        if len(values) != len(degeneracies) or len(set(values)) != len(values):
            raise ValueError("need distinct values with one degeneracy each")
        eigenvalues: list[int] = []
        labels: list[tuple[int, int]] = []
        for n, count in zip(values, degeneracies):
            if count < 1:
                raise ValueError(f"degeneracy of {n} must be >= 1, got {count}")
            for d in range(1, count + 1):
                eigenvalues.append(int(n))
                labels.append((int(n), d))
        return cls(
            eigenvalues=tuple(eigenvalues),
            basis_labels=tuple(labels),
            dimension=len(eigenvalues),
        )

    @property
    def span(self) -> int:
        return max(self.eigenvalues) - min(self.eigenvalues)

    def distinct_values(self) -> list[int]:
        return sorted(set(self.eigenvalues))

    def indices_of(self, value: int) -> list[int]:
        return [i for i, n in enumerate(self.eigenvalues) if n == value]

    def phase_factors(self, angle: float) -> np.ndarray:
        """Diagonal of e^{iG angle}."""
        return np.exp(1j * angle * np.asarray(self.eigenvalues, dtype=float))


@dataclass(frozen=True)
class PovmSet:
    """POVM with outcomes labelled by a uniform estimate grid.

    operators[k] is the (Hermitian, positive semidefinite) effect of
    estimate phi_k = -pi + 2 pi k / K, and the effects sum to the identity.
    """

    kind: str
    operators: np.ndarray

    def __post_init__(self) -> None:
        ops = np.asarray(self.operators, dtype=complex)
        if ops.ndim != 3 or ops.shape[1] != ops.shape[2] or ops.shape[0] < 1:
            raise ValueError(f"operators must be (K, d, d), got {ops.shape}")
        herm_gap = float(np.max(np.abs(ops - ops.conj().transpose(0, 2, 1))))
        if herm_gap > _PSD_TOL:
            raise ValueError(f"effects are not Hermitian (gap {herm_gap})")
        total = ops.sum(axis=0)
        completeness = float(np.max(np.abs(total - np.eye(ops.shape[1]))))
        if completeness > _COMPLETENESS_TOL:
            raise ValueError(f"effects do not sum to identity (gap {completeness})")
        min_eig = float(np.linalg.eigvalsh(ops)[:, 0].min())
        if min_eig < -_PSD_TOL:
            raise ValueError(f"effect not positive semidefinite (min eig {min_eig})")
        object.__setattr__(self, "operators", ops)

    @property
    def grid_size(self) -> int:
        return self.operators.shape[0]

    @property
    def dimension(self) -> int:
        return self.operators.shape[1]

    def estimates(self) -> np.ndarray:
        return uniform_estimates(self.grid_size)


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, positive semidefinite, unit-trace matrix."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        mat = np.asarray(self.entries, dtype=complex)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValueError(f"entries must be square, got {mat.shape}")
        herm_gap = float(np.max(np.abs(mat - mat.conj().T)))
        if herm_gap > _PSD_TOL:
            raise ValueError(f"not Hermitian (gap {herm_gap})")
        trace_gap = abs(complex(np.trace(mat)) - 1.0)
        if trace_gap > _COMPLETENESS_TOL:
            raise ValueError(f"trace differs from 1 by {trace_gap}")
        min_eig = float(np.linalg.eigvalsh(mat)[0])
        if min_eig < -_PSD_TOL:
            raise ValueError(f"not positive semidefinite (min eig {min_eig})")
        object.__setattr__(self, "entries", mat)

    @property
    def dimension(self) -> int:
        return self.entries.shape[0]

    def shifted(self, system: DegenerateSystem, phase: float) -> np.ndarray:
        """e^{-iG phase} rho e^{iG phase}."""
        u = system.phase_factors(-phase)
        return u[:, None] * self.entries * u[None, :].conj()

    def mean_abs_generator(self, system: DegenerateSystem) -> float:
        probs = np.real(np.diag(self.entries))
        return float(np.abs(np.asarray(system.eigenvalues, float)) @ probs)


def _require_grid(system: DegenerateSystem, grid_size: int) -> None:
    minimum = 4 * system.span + 4
    if grid_size < minimum:
        raise ValueError(
            f"grid size {grid_size} too small for eigenvalue span "
            f"{system.span}; need >= {minimum} for exact phase sums"
        )


def canonical_povm(system: DegenerateSystem, grid_size: int) -> PovmSet:
    """Canonical POVM of a nondegenerate system on a K-point estimate grid.

    Effects M_k[a, b] = e^{-i(n_a - n_b) phi_k} / K, the discretization of
    the covariant family seeded by (1/2pi) sum |n><n'|.
    """
    _require_grid(system, grid_size)
    if any(d != 1 for _, d in system.basis_labels):
        raise ValueError("canonical POVM is defined for nondegenerate systems")
    estimates = uniform_estimates(grid_size)
    ops = np.empty((grid_size, system.dimension, system.dimension), dtype=complex)
    for k, phi in enumerate(estimates):
        u = system.phase_factors(-phi)
        ops[k] = np.outer(u, u.conj()) / grid_size
    return PovmSet(kind="canonical", operators=ops)


def covariant_average(povm: PovmSet, system: DegenerateSystem) -> PovmSet:
    """Covariant POVM with the same phase-averaged error statistics.

    Seed M0 = (1/2pi) sum_k e^{iG phi_k} M_k e^{-iG phi_k}; the returned
    effects are (2pi/K) e^{-iG phi_k} M0 e^{iG phi_k}.  The grid-size
    precondition makes the discrete phase sums exact, so completeness and
    positivity are preserved exactly (up to rounding).
    """
    _require_grid(system, povm.grid_size)
    if povm.dimension != system.dimension:
        raise ValueError("POVM dimension does not match the system")
    seed = _covariant_seed_from_sum(povm, system)
    return _covariant_set_from_seed(seed, system, povm.grid_size)


def _covariant_seed_from_sum(povm: PovmSet, system: DegenerateSystem) -> np.ndarray:
    seed = np.zeros((povm.dimension, povm.dimension), dtype=complex)
    for k, phi in enumerate(povm.estimates()):
        u = system.phase_factors(phi)
        seed += u[:, None] * povm.operators[k] * u[None, :].conj()
    return seed / (2.0 * math.pi)


def _covariant_set_from_seed(
    seed: np.ndarray, system: DegenerateSystem, grid_size: int
) -> PovmSet:
    ops = np.empty((grid_size, seed.shape[0], seed.shape[1]), dtype=complex)
    scale = 2.0 * math.pi / grid_size
    for k, phi in enumerate(uniform_estimates(grid_size)):
        u = system.phase_factors(-phi)
        ops[k] = scale * (u[:, None] * seed * u[None, :].conj())
    return PovmSet(kind="covariant", operators=ops)


def error_density(
    povm: PovmSet,
    rho: DensityMatrix,
    system: DegenerateSystem,
    phase: float = 0.0,
) -> np.ndarray:
    """Outcome probabilities p(phi_k | phase) = Tr(M_k rho_phase)."""
    shifted = rho.shifted(system, phase)
    masses = np.real(
        np.einsum("kab,ba->k", povm.operators, shifted, optimize=True)
    )
    return masses


def _covariant_seed_checked(povm: PovmSet, system: DegenerateSystem) -> np.ndarray:
    """Recover the seed of a covariant set, verifying covariance.

    Raises if the set is not covariant (the seed reconstructed from
    different outcomes disagrees) or if the seed violates the
    normalization blocks <n,d|M0|n,d'> = delta_{dd'} / 2 pi.
    """
    scale = povm.grid_size / (2.0 * math.pi)
    estimates = povm.estimates()
    u0 = system.phase_factors(estimates[0])
    seed = scale * (u0[:, None] * povm.operators[0] * u0[None, :].conj())
    for k in range(1, povm.grid_size):
        u = system.phase_factors(estimates[k])
        other = scale * (u[:, None] * povm.operators[k] * u[None, :].conj())
        if float(np.max(np.abs(other - seed))) > _COVARIANCE_TOL:
            raise ValueError("POVM is not covariant: outcome seeds disagree")
    inv_two_pi = 1.0 / (2.0 * math.pi)
    for n in system.distinct_values():
        idx = system.indices_of(n)
        block = seed[np.ix_(idx, idx)]
        gap = float(np.max(np.abs(block - inv_two_pi * np.eye(len(idx)))))
        if gap > _COVARIANCE_TOL:
            raise ValueError(
                f"covariant seed violates the normalization block at n={n} "
                f"(gap {gap}); input cannot come from a complete POVM"
            )
    return seed


def lemma2_reduction(
    covariant: PovmSet, rho0: DensityMatrix, system: DegenerateSystem
) -> dict:
    """Degeneracy-removing state with identical statistics.

    Returns ``rho_s``, a valid density matrix on the nondegenerate spectrum,
    whose generator distribution equals that of ``rho0`` and whose canonical
    error distribution equals the covariant error distribution of ``rho0``:

        rho_s[n', n] = 2 pi sum_{d, d'} <n',d'|rho0|n,d> <n,d|M0|n',d'>.

    ``spectrum`` embeds the distinct eigenvalues into the contiguous range
    (nonneg 0..max or symmetric -c..c); missing values get zero rows.
    """
    seed = _covariant_seed_checked(covariant, system)
    values = system.distinct_values()
    if min(values) >= 0:
        spectrum = Spectrum(kind="nonneg", cutoff=max(max(values), 1))
        offset = 0
    else:
        cutoff = max(max(abs(v) for v in values), 1)
        spectrum = Spectrum(kind="symmetric", cutoff=cutoff)
        offset = cutoff
    dim = spectrum.dimension
    rho_s = np.zeros((dim, dim), dtype=complex)
    for n in values:
        idx_n = system.indices_of(n)
        for n_p in values:
            idx_np = system.indices_of(n_p)
            block_rho = rho0.entries[np.ix_(idx_np, idx_n)]
            block_seed = seed[np.ix_(idx_n, idx_np)]
            rho_s[n_p + offset, n + offset] = 2.0 * math.pi * np.sum(
                block_rho * block_seed.T
            )
    return {"rho_s": DensityMatrix(entries=rho_s), "spectrum": spectrum}


def continuity_check(
    povm: PovmSet,
    rho: DensityMatrix,
    system: DegenerateSystem,
    eps_grid: list[float],
    phi_samples: int = 16,
) -> BoundReport:
    """Check |<Phi>_{phi+eps} - <Phi>_phi| <= 4 pi sqrt(2 <|G|> |eps|).

    The mean estimate uses reference phase 0, i.e. estimates taken in
    [-pi, pi) as labelled.  Returns the worst margin over a uniform phi
    grid and all eps values.
    """
    estimate_op = np.tensordot(povm.estimates(), povm.operators, axes=(0, 0))
    g_mean = rho.mean_abs_generator(system)

    def mean_estimate(phi: float) -> float:
        return float(np.real(np.trace(estimate_op @ rho.shifted(system, phi))))

    worst = math.inf
    worst_at = (0.0, 0.0)
    for phi in np.linspace(-math.pi, math.pi, phi_samples, endpoint=False):
        base = mean_estimate(float(phi))
        for eps in eps_grid:
            diff = abs(mean_estimate(float(phi) + float(eps)) - base)
            bound = 4.0 * math.pi * math.sqrt(2.0 * g_mean * abs(float(eps)))
            margin = bound - diff
            if margin < worst:
                worst = margin
                worst_at = (float(phi), float(eps))
    return BoundReport(
        margins={"continuity": worst},
        details={
            "mean_abs_generator": g_mean,
            "worst_phi": worst_at[0],
            "worst_eps": worst_at[1],
        },
    )


def bias_derivative_identity(
    povm: PovmSet, rho: DensityMatrix, system: DegenerateSystem, grid_index: int
) -> dict[str, float]:
    """Self-referenced bias derivative versus the antipodal density.

    At true phase phi = phi_k (a grid point), computes the bias
    b_phi(phi) with estimates wrapped into [phi - pi, phi + pi), its
    derivative b'_phi(phi) (analytically, via d rho_phi / d phi =
    -i [G, rho_phi]), and -2 pi times the outcome density at phi + pi.
    For covariant measurements with b identically zero these satisfy
    b' = -2 pi p(phi + pi | phi).
    """
    if povm.grid_size % 2 != 0:
        raise ValueError("antipodal comparison requires an even grid")
    estimates = povm.estimates()
    phi = float(estimates[grid_index])
    wrapped = phi + _wrap(estimates - phi)
    masses = error_density(povm, rho, system, phase=phi)
    bias = float(wrapped @ masses) - phi

    shifted = rho.shifted(system, phi)
    eigs = np.asarray(system.eigenvalues, dtype=float)
    commutator = -1j * (eigs[:, None] - eigs[None, :]) * shifted
    d_masses = np.real(
        np.einsum("kab,ba->k", povm.operators, commutator, optimize=True)
    )
    bias_deriv = float(wrapped @ d_masses) - 1.0

    antipode = (grid_index + povm.grid_size // 2) % povm.grid_size
    density = masses[antipode] * povm.grid_size / (2.0 * math.pi)
    return {
        "bias": bias,
        "bias_derivative": bias_deriv,
        "minus_two_pi_density": -2.0 * math.pi * density,
    }


def random_povm(
    rng: np.random.Generator, dimension: int, grid_size: int
) -> PovmSet:
    """Random POVM by symmetric completion of random positive effects.

    E_k = A_k A_k^dagger with complex Gaussian A_k, normalized through
    S^{-1/2} E_k S^{-1/2} with S = sum E_k, which restores completeness
    exactly while preserving positivity.
    """
    effects = np.empty((grid_size, dimension, dimension), dtype=complex)
    for k in range(grid_size):
        a = rng.standard_normal((dimension, dimension)) + 1j * rng.standard_normal(
            (dimension, dimension)
        )
        effects[k] = a @ a.conj().T
    total = effects.sum(axis=0)
    vals, vecs = np.linalg.eigh(total)
    inv_sqrt = (vecs * (1.0 / np.sqrt(vals))) @ vecs.conj().T
    ops = np.einsum("ab,kbc,cd->kad", inv_sqrt, effects, inv_sqrt, optimize=True)
    ops = 0.5 * (ops + ops.conj().transpose(0, 2, 1))
    # symmetric completion leaves a rounding-level completeness defect
    defect = ops.sum(axis=0) - np.eye(dimension)
    ops[0] -= defect
    return PovmSet(kind="discrete-phase", operators=ops)


def random_density(rng: np.random.Generator, dimension: int) -> DensityMatrix:
    """Random full-rank density matrix rho = B B^dagger / Tr."""
    b = rng.standard_normal((dimension, dimension)) + 1j * rng.standard_normal(
        (dimension, dimension)
    )
    rho = b @ b.conj().T
    return DensityMatrix(entries=rho / np.trace(rho).real)


def average_error_masses(
    povm: PovmSet, rho: DensityMatrix, system: DegenerateSystem
) -> np.ndarray:
    """Phase-averaged error masses by direct summation over the grid.

    p_bar at error phi_j is (1/K) sum_u p(outcome j+u | applied phase
    2 pi u / K): the applied phase runs over one period and the outcome
    index is read off cyclically.  This never forms the covariant seed, so
    it provides an independent route to the distribution that
    ``covariant_average`` produces.
    """
    size = povm.grid_size
    averaged = np.zeros(size)
    for u in range(size):
        masses = error_density(povm, rho, system, phase=2.0 * math.pi * u / size)
        averaged += np.roll(masses, -u)
    return averaged / size


def verify_random_instance(
    seed: int,
    max_dimension: int = 6,
    eps_grid: tuple[float, ...] = (1e-3, 1e-2, 1e-1),
) -> dict[str, float]:
    """Run both reduction lemmas and the continuity bound on one instance.

    Draws a random degenerate system, state, and POVM from ``seed``,
    then reports:

    * ``lemma1_gap``: covariant-average error masses versus the direct
      phase-average of the original POVM,
    * ``lemma2_gap``: canonical masses of the reduced state versus the
      covariant masses of the original state,
    * ``generator_gap``: generator distribution of the reduced state
      versus that of the original,
    * ``continuity_margin``: worst margin of the mean-estimate bound.

    The estimate grid is sized from the embedded nondegenerate spectrum so
    every phase sum involved is exact.
    """
    rng = np.random.default_rng(seed)
    system = random_degenerate_system(rng, max_dimension)
    values = system.distinct_values()
    embedded_span = max(values) if min(values) >= 0 else 2 * max(abs(v) for v in values)
    grid_size = 4 * max(system.span, embedded_span, 1) + 4
    rho = random_density(rng, system.dimension)
    povm = random_povm(rng, system.dimension, grid_size)

    averaged = covariant_average(povm, system)
    covariant_masses = error_density(averaged, rho, system)
    direct = average_error_masses(povm, rho, system)
    lemma1_gap = float(np.max(np.abs(covariant_masses - direct)))

    reduction = lemma2_reduction(averaged, rho, system)
    rho_s: DensityMatrix = reduction["rho_s"]
    spectrum: Spectrum = reduction["spectrum"]
    reduced_system = DegenerateSystem.from_degeneracies(
        [int(v) for v in spectrum.values()], [1] * spectrum.dimension
    )
    canonical = canonical_povm(reduced_system, grid_size)
    reduced_masses = error_density(canonical, rho_s, reduced_system)
    lemma2_gap = float(np.max(np.abs(reduced_masses - covariant_masses)))

    generator_reduced = np.real(np.diag(rho_s.entries))
    generator_original = np.zeros(spectrum.dimension)
    offset = 0 if spectrum.kind == "nonneg" else spectrum.cutoff
    for n in values:
        idx = system.indices_of(n)
        generator_original[n + offset] = float(
            np.real(np.trace(rho.entries[np.ix_(idx, idx)]))
        )
    generator_gap = float(np.max(np.abs(generator_reduced - generator_original)))

    continuity = continuity_check(povm, rho, system, list(eps_grid))
    return {
        "seed": float(seed),
        "dimension": float(system.dimension),
        "grid_size": float(grid_size),
        "lemma1_gap": lemma1_gap,
        "lemma2_gap": lemma2_gap,
        "generator_gap": generator_gap,
        "continuity_margin": continuity.margins["continuity"],
    }


def random_degenerate_system(
    rng: np.random.Generator, max_dimension: int = 6
) -> DegenerateSystem:
    """Random degenerate integer spectrum with total dimension <= max."""
    values: list[int] = []
    degeneracies: list[int] = []
    remaining = int(max_dimension)
    next_value = int(rng.integers(0, 2))
    while remaining > 0:
        count = int(rng.integers(1, min(3, remaining) + 1))
        values.append(next_value)
        degeneracies.append(count)
        remaining -= count
        next_value += int(rng.integers(1, 3))
    return DegenerateSystem.from_degeneracies(values, degeneracies)
