"""Disordered Heisenberg/XXZ/XX Hamiltonians with reproducible disorder sampling.

Spin operators are s = sigma/2.  All couplings in this family are real, so
every Hamiltonian is a real symmetric matrix in the computational basis.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ValidationError
from .seeding import derive_seed
from .spincore import DEFAULT_N_MAX

BOUNDARIES = ("periodic", "open")

# preset couplings: perpendicular/longitudinal exchange, transverse field
PRESETS = {
    "heisenberg": dict(j_perp=1.0, j_z=1.0, gamma=0.1, boundary="periodic"),
    "xx_anderson": dict(j_perp=1.0, j_z=0.0, gamma=0.0, boundary="periodic"),
}


@dataclass(frozen=True)
class ModelParams:
    n_sites: int
    j_perp: float = 1.0
    j_z: float = 1.0
    h_strength: float = 0.0
    gamma: float = 0.0
    boundary: str = "periodic"

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValidationError("chain needs at least 2 sites")
        if self.h_strength < 0:
            raise ValidationError("disorder strength must be non-negative")
        if self.boundary not in BOUNDARIES:
            raise ValidationError(f"boundary must be one of {BOUNDARIES}")


@dataclass(frozen=True)
class DisorderRealization:
    """Random longitudinal fields h_i, uniform on [-h, h], plus the seed that made them."""

    fields: np.ndarray
    seed: int

    def __post_init__(self):
        f = np.ascontiguousarray(self.fields, dtype=np.float64)
        f.flags.writeable = False
        object.__setattr__(self, "fields", f)


@dataclass(frozen=True)
class Hamiltonian:
    matrix: np.ndarray
    params: ModelParams
    realization: DisorderRealization

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


def sample_disorder(
    params: ModelParams, master_seed: int, realization_index: int
) -> DisorderRealization:
    """Draw the field vector for one realization; a pure function of (seed, index)."""
    seed = derive_seed(master_seed, "disorder", realization_index)
    rng = np.random.Generator(np.random.PCG64(seed))
    h = params.h_strength
    fields = rng.uniform(-h, h, size=params.n_sites)
    return DisorderRealization(fields, seed)


def _z_values(n_sites: int) -> np.ndarray:
    """sigma_z eigenvalues z_i(b) = +/-1 for every basis index, shape (2^N, N)."""
    basis = np.arange(2**n_sites, dtype=np.uint64)
    shifts = np.array([n_sites - 1 - i for i in range(n_sites)], dtype=np.uint64)
    bits = (basis[:, None] >> shifts[None, :]) & 1
    return 1.0 - 2.0 * bits.astype(np.float64)


def build_xxz(params: ModelParams, realization: DisorderRealization) -> Hamiltonian:
    """Dense XXZ chain with longitudinal disorder and a transverse field.

    H = sum_i [ j_perp (s_x^i s_x^{i+1} + s_y^i s_y^{i+1}) + j_z s_z^i s_z^{i+1}
                + h_i s_z^i + gamma s_x^i ]
    with s^{N+1} = s^1 under periodic boundary (the i = N-1 bond), omitted when open.
    """
    n = params.n_sites
    if n > DEFAULT_N_MAX:
        raise CapacityError(f"N={n} exceeds the dense-matrix limit n_max={DEFAULT_N_MAX}")
    if realization.fields.shape != (n,):
        raise ValidationError("realization size does not match n_sites")
    if params.boundary == "periodic" and n == 2:
        warnings.warn(
            "periodic chain of 2 sites counts the single bond twice", stacklevel=2
        )

    dim = 2**n
    z = _z_values(n)  # (dim, n)
    bonds = [(i, (i + 1) % n) for i in range(n if params.boundary == "periodic" else n - 1)]

    h_mat = np.zeros((dim, dim), dtype=np.float64)
    diag = z @ (realization.fields / 2.0)
    for i, j in bonds:
        diag += (params.j_z / 4.0) * z[:, i] * z[:, j]
    h_mat[np.diag_indices(dim)] = diag

    basis = np.arange(dim)
    if params.j_perp != 0.0:
        # flip-flop term: j_perp/2 between neighbor pairs with opposite spins
        for i, j in bonds:
            mask = (1 << (n - 1 - i)) | (1 << (n - 1 - j))
            anti = z[:, i] * z[:, j] < 0
            rows = basis[anti]
            h_mat[rows ^ mask, rows] += params.j_perp / 2.0
    if params.gamma != 0.0:
        for i in range(n):
            flip = basis ^ (1 << (n - 1 - i))
            h_mat[flip, basis] += params.gamma / 2.0

    h_mat.flags.writeable = False
    return Hamiltonian(h_mat, params, realization)


def preset_params(
    preset: str, n_sites: int, h_strength: float, n_max: int = DEFAULT_N_MAX
) -> ModelParams:
    if preset not in PRESETS:
        raise ValidationError(f"unknown preset {preset!r}; choose from {sorted(PRESETS)}")
    if n_sites > n_max:
        raise CapacityError(f"N={n_sites} exceeds n_max={n_max}")
    return ModelParams(n_sites=n_sites, h_strength=h_strength, **PRESETS[preset])


def build_preset(
    preset: str,
    n_sites: int,
    h_strength: float,
    master_seed: int,
    realization_index: int,
) -> Hamiltonian:
    """Convenience constructor: sample one disorder realization and build the preset chain."""
    params = preset_params(preset, n_sites, h_strength)
    realization = sample_disorder(params, master_seed, realization_index)
    return build_xxz(params, realization)


def total_sz_values(n_sites: int) -> np.ndarray:
    """Diagonal of J_z = sum_i sigma_z^(i) in the computational basis."""
    return _z_values(n_sites).sum(axis=1)


__all__ = [
    "BOUNDARIES",
    "PRESETS",
    "ModelParams",
    "DisorderRealization",
    "Hamiltonian",
    "sample_disorder",
    "build_xxz",
    "preset_params",
    "build_preset",
    "total_sz_values",
]
