"""Full diagonalization, exact unitary evolution, and infinite-time averages."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DiagonalizationError, ValidationError
from .models import Hamiltonian
from .spincore import StateVector

PARSEVAL_TOL = 1e-10

# eigenvalues closer than this (relative to the spectral norm) are treated as
# one degenerate group when forming infinite-time averages
DEGENERACY_RTOL = 1e-10


@dataclass(frozen=True)
class EigenDecomposition:
    """Ascending spectrum and orthonormal eigenbasis of a Hermitian matrix."""

    energies: np.ndarray
    vectors: np.ndarray

    def __post_init__(self):
        e = np.ascontiguousarray(self.energies, dtype=np.float64)
        v = np.ascontiguousarray(self.vectors)
        e.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "energies", e)
        object.__setattr__(self, "vectors", v)

    @property
    def dim(self) -> int:
        return self.energies.size

    @property
    def spectral_norm(self) -> float:
        return float(max(abs(self.energies[0]), abs(self.energies[-1])))

    @property
    def spectral_width(self) -> float:
        return float(self.energies[-1] - self.energies[0])

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> "EigenDecomposition":
        try:
            energies, vectors = scipy.linalg.eigh(matrix, check_finite=False)
        except scipy.linalg.LinAlgError as exc:  # pragma: no cover - LAPACK rarely fails
            raise DiagonalizationError(str(exc)) from exc
        return cls(energies, vectors)


def diagonalize(hamiltonian: Hamiltonian) -> EigenDecomposition:
    """Full spectrum and eigenbasis; failures carry the realization seed."""
    try:
        return EigenDecomposition.from_matrix(hamiltonian.matrix)
    except DiagonalizationError as exc:
        raise DiagonalizationError(
            f"eigensolver failed for realization seed {hamiltonian.realization.seed}: {exc}"
        ) from exc


@dataclass(frozen=True)
class SpectralState:
    """A pure state expressed in an eigenbasis: |psi> = sum_a C_a |a>."""

    coeffs: np.ndarray
    decomposition: EigenDecomposition

    def __post_init__(self):
        c = np.ascontiguousarray(self.coeffs, dtype=np.complex128)
        total = float(np.sum(np.abs(c) ** 2))
        if abs(total - 1.0) > PARSEVAL_TOL:
            raise ValidationError(f"spectral weights sum to {total!r}, not 1")
        c.flags.writeable = False
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def from_state(cls, eig: EigenDecomposition, state: StateVector) -> "SpectralState":
        coeffs = eig.vectors.conj().T @ state.amplitudes
        return cls(coeffs, eig)

    @property
    def mean_energy(self) -> float:
        return float(np.sum(np.abs(self.coeffs) ** 2 * self.decomposition.energies))


def evolve(spectral: SpectralState, t: float) -> StateVector:
    """State at time t (units 1/J): sum_a C_a exp(-i E_a t) |a> in the computational basis."""
    eig = spectral.decomposition
    phases = np.exp(-1j * eig.energies * t)
    amps = eig.vectors @ (spectral.coeffs * phases)
    amps = amps / np.linalg.norm(amps)
    n_sites = int(round(np.log2(amps.size)))
    return StateVector(amps, n_sites)


def degenerate_groups(energies: np.ndarray, rtol: float = DEGENERACY_RTOL) -> list[slice]:
    """Contiguous groups of eigenvalues closer than rtol * spectral norm."""
    scale = max(abs(float(energies[0])), abs(float(energies[-1])), 1e-300)
    gap_tol = rtol * scale
    groups = []
    start = 0
    for k in range(1, energies.size):
        if energies[k] - energies[k - 1] > gap_tol:
            groups.append(slice(start, k))
            start = k
    groups.append(slice(start, energies.size))
    return groups


def _observable_on_basis(eig: EigenDecomposition, observable) -> np.ndarray:
    """O applied to every eigenvector (columns)."""
    return observable(np.ascontiguousarray(eig.vectors, dtype=np.complex128))


def diagonal_ensemble_average(spectral: SpectralState, observable) -> float:
    """Infinite-time average sum_a |C_a|^2 <a|O|a>.

    `observable` is an apply function mapping (dim, k) arrays column-wise.
    Degenerate groups keep their internal coherences, so the result matches
    the true long-time average also at symmetric parameter corners.
    """
    eig = spectral.decomposition
    c = spectral.coeffs
    ov = _observable_on_basis(eig, observable)
    groups = degenerate_groups(eig.energies)
    if len(groups) == eig.dim:
        diag = np.einsum("da,da->a", eig.vectors.conj(), ov).real
        return float(np.sum(np.abs(c) ** 2 * diag))
    total = 0.0
    for g in groups:
        block = eig.vectors[:, g].conj().T @ ov[:, g]
        total += float((c[g].conj() @ block @ c[g]).real)
    return total


def temporal_fluctuation(spectral: SpectralState, observable) -> float:
    """Long-time variance of <O(t)> around its average.

    Equals sum_{a != b} |C_a|^2 |C_b|^2 |<a|O|b>|^2 for a non-degenerate
    spectrum; degenerate groups are collapsed into single blocks first.
    """
    eig = spectral.decomposition
    c = spectral.coeffs
    ov = _observable_on_basis(eig, observable)
    m = eig.vectors.conj().T @ ov
    w = (c.conj()[:, None] * m) * c[None, :]
    groups = degenerate_groups(eig.energies)
    if len(groups) != eig.dim:
        starts = [g.start for g in groups]
        w = np.add.reduceat(np.add.reduceat(w, starts, axis=0), starts, axis=1)
    abs2 = np.abs(w) ** 2
    fluct = float(abs2.sum() - np.trace(abs2))
    return max(fluct, 0.0)


def expectation(observable, state: StateVector) -> float:
    """<psi|O|psi> for a Hermitian apply-function."""
    return float(np.vdot(state.amplitudes, observable(state.amplitudes)).real)


def log_time_grid(t_min: float = 0.1, t_max: float = 1e4, points_per_decade: int = 60) -> np.ndarray:
    """Logarithmic time grid, points_per_decade per decade, endpoints included."""
    if not 0 < t_min < t_max:
        raise ValidationError("need 0 < t_min < t_max")
    decades = np.log10(t_max / t_min)
    n_points = int(round(decades * points_per_decade)) + 1
    return np.geomspace(t_min, t_max, n_points)


def saturation_window(times: np.ndarray) -> np.ndarray:
    """Boolean mask of the last decade of the grid, the saturated-value convention."""
    t_max = float(times[-1])
    return times >= t_max / 10.0
