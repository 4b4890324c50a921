"""Canonical and microcanonical ensembles, temperature matching, and the
comparison between time-averaged and thermal fluctuations of macroscopic
observables.

k_B = 1; temperatures are carried as inverse temperature beta so that
above-mid-spectrum initial states (negative temperature) need no special
casing.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EnsembleDomainError, NumericalRangeError, ValidationError
from .dynamics import (
    EigenDecomposition,
    SpectralState,
    diagonal_ensemble_average,
    temporal_fluctuation,
)
from .spincore import DirectionField, direction_observable

# default microcanonical half-width as a fraction of the spectral width
DEFAULT_WINDOW_FRACTION = 0.025

MATCH_RTOL = 1e-9
_BETA_CAP_SCALE = 1e3


@dataclass(frozen=True)
class EnsembleSpec:
    """Which ensemble to average over: canonical, microcanonical, or diagonal."""

    kind: str
    beta: float = 0.0
    window_center: float = 0.0
    window_half_width: float = 0.0

    def __post_init__(self):
        if self.kind not in ("canonical", "microcanonical", "diagonal"):
            raise ValidationError(f"unknown ensemble kind {self.kind!r}")

    def count_states(self, eig: EigenDecomposition) -> int:
        if self.kind != "microcanonical":
            return eig.dim
        return int(
            np.count_nonzero(np.abs(eig.energies - self.window_center) <= self.window_half_width)
        )


def eigenbasis_diagonal(eig: EigenDecomposition, observable) -> np.ndarray:
    """<a|O|a> for every eigenstate, via one batched application of O."""
    vectors = np.ascontiguousarray(eig.vectors, dtype=np.complex128)
    ov = observable(vectors)
    return np.einsum("da,da->a", vectors.conj(), ov).real


def boltzmann_weights(energies: np.ndarray, beta: float) -> np.ndarray:
    """Normalized exp(-beta E) weights, shifted to dodge overflow."""
    log_w = -beta * energies
    log_w -= log_w.max()
    w = np.exp(log_w)
    z = w.sum()
    if not np.isfinite(z) or z <= 0.0:
        raise NumericalRangeError(f"all Boltzmann weights underflow at beta={beta}")
    return w / z


def canonical_average(eig: EigenDecomposition, observable, beta: float) -> float:
    """Tr[exp(-beta H) O] / Tr[exp(-beta H)]."""
    if not np.isfinite(beta):
        raise ValidationError("beta must be finite")
    diag = eigenbasis_diagonal(eig, observable)
    return float(boltzmann_weights(eig.energies, beta) @ diag)


def _mean_energy(energies: np.ndarray, beta: float) -> float:
    return float(boltzmann_weights(energies, beta) @ energies)


def match_temperature(eig: EigenDecomposition, e_target: float) -> float:
    """Inverse temperature with canonical mean energy equal to e_target.

    Uses that <H>_beta is strictly decreasing in beta; targets above the
    infinite-temperature mean come back as negative beta.
    """
    energies = eig.energies
    e_min, e_max = float(energies[0]), float(energies[-1])
    if not e_min < e_target < e_max:
        raise EnsembleDomainError(
            f"target energy {e_target} outside the open spectral interval ({e_min}, {e_max})"
        )
    width = e_max - e_min
    tol = MATCH_RTOL * width
    beta_cap = _BETA_CAP_SCALE / width
    lo, hi = -beta_cap, beta_cap  # <H> decreasing: value at lo is high, at hi is low
    if _mean_energy(energies, lo) < e_target - tol or _mean_energy(energies, hi) > e_target + tol:
        raise EnsembleDomainError(
            f"target energy {e_target} not reachable within |beta| <= {beta_cap:.3g}"
        )
    beta = 0.0
    for _ in range(200):
        beta = 0.5 * (lo + hi)
        value = _mean_energy(energies, beta)
        if abs(value - e_target) <= tol:
            return beta
        if value > e_target:
            lo = beta
        else:
            hi = beta
    if abs(_mean_energy(energies, beta) - e_target) > tol:  # pragma: no cover
        raise EnsembleDomainError("temperature bisection failed to reach tolerance")
    return beta


def microcanonical_average(
    eig: EigenDecomposition, observable, e_center: float, half_width: float
) -> float:
    """Unweighted mean of <a|O|a> over eigenstates with |E_a - e_center| <= half_width."""
    mask = np.abs(eig.energies - e_center) <= half_width
    if not np.any(mask):
        nearest = float(eig.energies[np.argmin(np.abs(eig.energies - e_center))])
        raise EnsembleDomainError(
            f"no eigenstate within {half_width} of {e_center}; nearest eigenvalue is {nearest}"
        )
    diag = eigenbasis_diagonal(eig, observable)
    return float(diag[mask].mean())


@dataclass(frozen=True)
class EthReport:
    """Time-averaged vs canonical fluctuation of one macroscopic observable."""

    time_avg_variance: float
    thermal_variance: float
    difference: float
    difference_per_site: float
    difference_per_site_sq: float
    beta: float

    def row(self) -> tuple[float, float, float, float, float]:
        return (
            self.time_avg_variance,
            self.thermal_variance,
            self.difference,
            self.difference_per_site,
            self.difference_per_site_sq,
        )


def eth_fluctuation_report(
    eig: EigenDecomposition, spectral: SpectralState, dirs: DirectionField
) -> EthReport:
    """Compare the long-time variance of A with the matched canonical fluctuation.

    The time average combines the diagonal-ensemble means of A and A^2 with
    the temporal-fluctuation correction; the thermal side evaluates
    <A^2>_T - <A>_T^2 at the temperature matched to the state's energy.
    """
    apply_a = direction_observable(dirs)

    def apply_a2(amps):
        return apply_a(apply_a(amps))

    de_a = diagonal_ensemble_average(spectral, apply_a)
    de_a2 = diagonal_ensemble_average(spectral, apply_a2)
    fluct = temporal_fluctuation(spectral, apply_a)
    time_avg_variance = de_a2 - de_a**2 - fluct

    beta = match_temperature(eig, spectral.mean_energy)
    mean_a = canonical_average(eig, apply_a, beta)
    mean_a2 = canonical_average(eig, apply_a2, beta)
    thermal_variance = mean_a2 - mean_a**2

    n = dirs.n_sites
    difference = time_avg_variance - thermal_variance
    return EthReport(
        time_avg_variance=time_avg_variance,
        thermal_variance=thermal_variance,
        difference=difference,
        difference_per_site=difference / n,
        difference_per_site_sq=difference / n**2,
        beta=beta,
    )
