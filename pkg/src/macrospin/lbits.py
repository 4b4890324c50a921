"""Effective fully-localized model: diagonal pseudospin Hamiltonian, dephasing
dynamics, and the macroscopicity lower bound from signed observables.

The pseudospin tau_z^i is identified with sigma_z^i, so the Hamiltonian is
diagonal in the computational basis and evolution is pure phase rotation.
Couplings between pseudospins decay exponentially with distance over the
localization length xi2.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .models import _z_values
from .macroscopicity import max_signed_variance
from .seeding import rng_from
from .spincore import StateVector, correlation_matrix


@dataclass(frozen=True)
class LbitModel:
    """Diagonal pseudospin Hamiltonian with exponentially decaying pair couplings."""

    n_sites: int
    onsite: np.ndarray
    pair_couplings: np.ndarray
    xi2: float
    seed: int
    triple_couplings: np.ndarray | None = None  # optional hook, never generated
    _energy_table: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        e = np.ascontiguousarray(self.onsite, dtype=np.float64)
        v = np.ascontiguousarray(self.pair_couplings, dtype=np.float64)
        if e.shape != (self.n_sites,) or v.shape != (self.n_sites, self.n_sites):
            raise ValidationError("onsite/pair coupling shapes do not match n_sites")
        if np.any(np.diag(v) != 0.0) or not np.allclose(v, v.T, atol=1e-15):
            raise ValidationError("pair couplings must be symmetric with zero diagonal")
        e.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "onsite", e)
        object.__setattr__(self, "pair_couplings", v)

    def energy_table(self) -> np.ndarray:
        """Diagonal energies E(b) for all basis states; computed once, then shared."""
        if self._energy_table is None:
            z = _z_values(self.n_sites)
            energies = z @ self.onsite + np.einsum("bi,ij,bj->b", z, self.pair_couplings, z)
            if self.triple_couplings is not None:
                w = self.triple_couplings
                n = self.n_sites
                for i in range(n):
                    for j in range(i + 1, n):
                        for k in range(j + 1, n):
                            energies += w[i, j, k] * z[:, i] * z[:, j] * z[:, k]
            energies.flags.writeable = False
            object.__setattr__(self, "_energy_table", energies)
        return self._energy_table


@dataclass(frozen=True)
class LbitAxes:
    """Physical-basis overlap vectors of the pseudospins, |beta_i| <= 1."""

    betas: np.ndarray

    def __post_init__(self):
        b = np.ascontiguousarray(self.betas, dtype=np.float64)
        if b.ndim != 2 or b.shape[1] != 3:
            raise ValidationError("betas must have shape (N, 3)")
        norms = np.linalg.norm(b, axis=1)
        if np.any(norms > 1.0 + 1e-12) or np.any(norms < 1e-12):
            raise ValidationError("each |beta_i| must lie in (0, 1]")
        b.flags.writeable = False
        object.__setattr__(self, "betas", b)

    @property
    def c(self) -> float:
        """min_i |beta_i|^2, the prefactor of the lower bound."""
        return float(np.min(np.sum(self.betas**2, axis=1)))

    @property
    def unit_axes(self) -> np.ndarray:
        return self.betas / np.linalg.norm(self.betas, axis=1, keepdims=True)

    @classmethod
    def along_z(cls, n_sites: int) -> "LbitAxes":
        b = np.zeros((n_sites, 3))
        b[:, 2] = 1.0
        return cls(b)


def generate_lbit_model(
    n_sites: int,
    xi2: float,
    energy_scale: float,
    coupling_scale: float,
    seed: int,
) -> LbitModel:
    """Random model: onsite energies uniform on [-energy_scale, energy_scale],
    pair couplings uniform amplitudes damped by exp(-|i-j|/xi2)."""
    if xi2 <= 0:
        raise ValidationError("xi2 must be positive")
    rng = rng_from(seed, "lbit-model")
    onsite = rng.uniform(-energy_scale, energy_scale, size=n_sites)
    upper = rng.uniform(-1.0, 1.0, size=(n_sites, n_sites))
    dist = np.abs(np.arange(n_sites)[:, None] - np.arange(n_sites)[None, :])
    v = np.triu(upper, 1) * coupling_scale * np.exp(-dist / xi2)
    v = v + v.T
    return LbitModel(n_sites=n_sites, onsite=onsite, pair_couplings=v, xi2=xi2, seed=seed)


def lbit_evolve(model: LbitModel, state: StateVector, t: float) -> StateVector:
    """Phase evolution exp(-i E(b) t) per basis amplitude; O(2^N) per time point."""
    if model.n_sites != state.n_sites:
        raise ValidationError("model and state sizes differ")
    amps = state.amplitudes * np.exp(-1j * model.energy_table() * t)
    return StateVector(amps, state.n_sites)


def macroscopicity_lower_bound(axes: LbitAxes, psi0: StateVector) -> float:
    """c^2 * max over sign patterns of the variance of B = sum_i (+/- beta_hat_i).sigma^(i).

    Evaluated on the initial state; a floor for the macroscopicity retained
    at long times by a deeply localized system.
    """
    if axes.betas.shape[0] != psi0.n_sites:
        raise ValidationError("axes and state sizes differ")
    corr = correlation_matrix(psi0)
    best, _ = max_signed_variance(corr, axes.unit_axes)
    return axes.c**2 * best
