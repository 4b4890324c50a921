"""Pauli algebra on dense 2^N state vectors and initial-state factories.

Basis convention (fixed for all file output): computational z-basis with
site 0 as the most significant bit and the bit value 0 meaning spin up.
hbar = 1 throughout.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from .errors import CapacityError, ValidationError

DEFAULT_N_MAX = 14

NORM_TOL = 1e-12
_AXES = ("x", "y", "z")


def _check_axis(axis: str) -> int:
    try:
        return _AXES.index(axis)
    except ValueError:
        raise ValidationError(f"axis must be one of {_AXES}, got {axis!r}") from None


# ---------------------------------------------------------------------------
# domain types


@dataclass(frozen=True)
class StateVector:
    """Normalized pure state of n_sites spin-1/2 particles."""

    amplitudes: np.ndarray
    n_sites: int

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.n_sites < 1:
            raise ValidationError("n_sites must be positive")
        if amps.shape != (2**self.n_sites,):
            raise ValidationError(
                f"amplitude vector has length {amps.shape}, expected 2^{self.n_sites}"
            )
        norm = np.linalg.norm(amps)
        if abs(norm - 1.0) > NORM_TOL:
            raise ValidationError(f"state norm {norm!r} deviates from 1 by more than {NORM_TOL}")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


@dataclass(frozen=True)
class DirectionField:
    """N unit 3-vectors defining the macroscopic observable sum_i alpha_i . sigma^(i)."""

    directions: np.ndarray

    def __post_init__(self):
        dirs = np.ascontiguousarray(self.directions, dtype=np.float64)
        if dirs.ndim != 2 or dirs.shape[1] != 3 or dirs.shape[0] < 1:
            raise ValidationError(f"directions must have shape (N, 3), got {dirs.shape}")
        norms = np.linalg.norm(dirs, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOL):
            raise ValidationError("every direction must be a unit vector within 1e-12")
        dirs.flags.writeable = False
        object.__setattr__(self, "directions", dirs)

    @property
    def n_sites(self) -> int:
        return self.directions.shape[0]


@dataclass(frozen=True)
class CorrelationMatrix:
    """Real symmetric 3N x 3N covariance of single-site Pauli components.

    For any DirectionField alpha with unit blocks, alpha^T C alpha equals
    the variance of A = sum_i alpha_i . sigma^(i) in the underlying state.
    """

    blocks: np.ndarray
    mean_spins: np.ndarray = field(repr=False)

    def __post_init__(self):
        c = np.ascontiguousarray(self.blocks, dtype=np.float64)
        m = np.ascontiguousarray(self.mean_spins, dtype=np.float64)
        n = m.shape[0]
        if m.ndim != 2 or m.shape[1] != 3 or c.shape != (3 * n, 3 * n):
            raise ValidationError("blocks must be 3Nx3N with mean_spins of shape (N, 3)")
        c.flags.writeable = False
        m.flags.writeable = False
        object.__setattr__(self, "blocks", c)
        object.__setattr__(self, "mean_spins", m)

    @property
    def n_sites(self) -> int:
        return self.mean_spins.shape[0]

    def block(self, i: int, j: int) -> np.ndarray:
        return self.blocks[3 * i : 3 * i + 3, 3 * j : 3 * j + 3]


# ---------------------------------------------------------------------------
# raw-array Pauli kernels (shared by dynamics/thermal/lbits for batched work)


def pauli_apply_array(amps: np.ndarray, n_sites: int, site: int, axis: str) -> np.ndarray:
    """Apply sigma_axis on `site` to amplitudes of shape (2^N,) or (2^N, k).

    Never materializes a 2^N x 2^N matrix; cost O(2^N * k).
    """
    if not 0 <= site < n_sites:
        raise IndexError(f"site {site} out of range for {n_sites} sites")
    ax = _check_axis(axis)
    a = amps.reshape(2**site, 2, -1)
    out = np.empty_like(a)
    if ax == 0:
        out[:, 0, :] = a[:, 1, :]
        out[:, 1, :] = a[:, 0, :]
    elif ax == 1:
        out[:, 0, :] = -1j * a[:, 1, :]
        out[:, 1, :] = 1j * a[:, 0, :]
    else:
        out[:, 0, :] = a[:, 0, :]
        out[:, 1, :] = -a[:, 1, :]
    return out.reshape(amps.shape)


def single_site_unitary_apply(amps: np.ndarray, n_sites: int, site: int, u: np.ndarray) -> np.ndarray:
    """Apply a 2x2 unitary on `site` to amplitudes of shape (2^N,) or (2^N, k)."""
    if not 0 <= site < n_sites:
        raise IndexError(f"site {site} out of range for {n_sites} sites")
    a = amps.reshape(2**site, 2, -1)
    out = np.empty_like(a, dtype=np.complex128)
    out[:, 0, :] = u[0, 0] * a[:, 0, :] + u[0, 1] * a[:, 1, :]
    out[:, 1, :] = u[1, 0] * a[:, 0, :] + u[1, 1] * a[:, 1, :]
    return out.reshape(amps.shape)


def direction_observable(dirs: DirectionField):
    """Apply-function for A = sum_i alpha_i . sigma^(i), acting on (2^N,) or (2^N, k) arrays."""
    n = dirs.n_sites
    d = dirs.directions

    def apply(amps: np.ndarray) -> np.ndarray:
        out = np.zeros(amps.shape, dtype=np.complex128)
        for i in range(n):
            for ax, w in zip(_AXES, d[i]):
                if w != 0.0:
                    out += w * pauli_apply_array(amps, n, i, ax)
        return out

    return apply


def site_pauli_observable(n_sites: int, site: int, axis: str):
    """Apply-function for a single sigma_axis^(site)."""

    def apply(amps: np.ndarray) -> np.ndarray:
        return pauli_apply_array(amps, n_sites, site, axis)

    return apply


# ---------------------------------------------------------------------------
# operations on StateVector


def apply_pauli(state: StateVector, site: int, axis: str) -> StateVector:
    """Return sigma_axis^(site) |psi>; the input is left unmodified."""
    out = pauli_apply_array(state.amplitudes, state.n_sites, site, axis)
    return StateVector(out, state.n_sites)


def pauli_expectation(state: StateVector, site: int, axis: str) -> float:
    """<psi| sigma_axis^(site) |psi> (real for Hermitian sigma)."""
    sig = pauli_apply_array(state.amplitudes, state.n_sites, site, axis)
    return float(np.vdot(state.amplitudes, sig).real)


def correlation_matrix(state: StateVector) -> CorrelationMatrix:
    """Covariance of all single-site Pauli components in one pass.

    Computes the 3N partial vectors sigma_a^(i)|psi> once and forms all
    pairwise inner products (cost O(N^2 2^N)).  Same-site 3x3 blocks are
    set to I - m_i m_i^T, the symmetrized on-site covariance.
    """
    n = state.n_sites
    amps = state.amplitudes
    norm = np.linalg.norm(amps)
    if abs(norm - 1.0) > NORM_TOL:
        raise ValidationError("correlation_matrix requires a normalized state")

    partials = np.empty((3 * n, amps.size), dtype=np.complex128)
    for i in range(n):
        for a, axis in enumerate(_AXES):
            partials[3 * i + a] = pauli_apply_array(amps, n, i, axis)

    m_flat = (partials @ amps.conj()).real
    gram = partials.conj() @ partials.T
    if __debug__:
        # cross-site two-point functions are real for commuting Hermitian factors;
        # only floating-point noise may appear off the same-site blocks
        resid = np.abs(gram.imag).copy()
        for i in range(n):
            resid[3 * i : 3 * i + 3, 3 * i : 3 * i + 3] = 0.0
        assert resid.max() < 1e-10, f"imaginary residue {resid.max():.3e} in two-point functions"

    c = gram.real - np.outer(m_flat, m_flat)
    mean_spins = m_flat.reshape(n, 3)
    eye3 = np.eye(3)
    for i in range(n):
        mi = mean_spins[i]
        c[3 * i : 3 * i + 3, 3 * i : 3 * i + 3] = eye3 - np.outer(mi, mi)
    c = 0.5 * (c + c.T)
    return CorrelationMatrix(c, mean_spins)


def ghz(n_sites: int, n_max: int = DEFAULT_N_MAX) -> StateVector:
    """(|up>^N + |down>^N)/sqrt(2), the GHZ state along z."""
    if n_sites > n_max:
        raise CapacityError(f"N={n_sites} exceeds the dense-vector limit n_max={n_max}")
    if n_sites < 1:
        raise ValidationError("n_sites must be positive")
    amps = np.zeros(2**n_sites, dtype=np.complex128)
    amps[0] = amps[-1] = 1.0 / np.sqrt(2.0)
    return StateVector(amps, n_sites)


def su2_from_angles(phi: float, xi: float, chi: float) -> np.ndarray:
    """SU(2) element from the (phi, xi, chi) parametrization, theta = arcsin(sqrt(chi))."""
    theta = np.arcsin(np.sqrt(chi))
    c, s = np.cos(theta), np.sin(theta)
    return np.array(
        [
            [np.exp(1j * phi) * c, np.exp(1j * xi) * s],
            [-np.exp(-1j * xi) * s, np.exp(-1j * phi) * c],
        ],
        dtype=np.complex128,
    )


def random_su2(rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed SU(2) element; draws phi, xi uniform on [0, 2pi), chi on [0, 1)."""
    phi = rng.uniform(0.0, 2.0 * np.pi)
    xi = rng.uniform(0.0, 2.0 * np.pi)
    chi = rng.uniform(0.0, 1.0)
    return su2_from_angles(phi, xi, chi)


def random_ghz(n_sites: int, rng: np.random.Generator, n_max: int = DEFAULT_N_MAX) -> StateVector:
    """GHZ state in a random local basis: U_1 x ... x U_N |GHZ_N> with Haar U_i."""
    state = ghz(n_sites, n_max=n_max)
    amps = state.amplitudes
    for site in range(n_sites):
        amps = single_site_unitary_apply(amps, n_sites, site, random_su2(rng))
    amps = amps / np.linalg.norm(amps)
    return StateVector(amps, n_sites)


def rotated_neel_ghz(n_sites: int, theta: float, n_max: int = DEFAULT_N_MAX) -> StateVector:
    """Superposition of the two Neel products, rotated site-wise about y by theta.

    theta = 0 leaves the antiferromagnetic superposition in the z basis;
    cos(theta) is the Bloch z-coordinate of the rotated up spin.
    """
    if n_sites % 2 != 0:
        raise ValidationError("rotated Neel states need an even number of sites")
    if not 0.0 <= theta <= np.pi:
        raise ValidationError(f"theta must lie in [0, pi], got {theta}")
    if n_sites > n_max:
        raise CapacityError(f"N={n_sites} exceeds the dense-vector limit n_max={n_max}")
    up_down = sum(1 << (n_sites - 1 - i) for i in range(1, n_sites, 2))
    down_up = sum(1 << (n_sites - 1 - i) for i in range(0, n_sites, 2))
    amps = np.zeros(2**n_sites, dtype=np.complex128)
    amps[up_down] = amps[down_up] = 1.0 / np.sqrt(2.0)
    c, s = np.cos(theta / 2.0), np.sin(theta / 2.0)
    u = np.array([[c, -s], [s, c]], dtype=np.complex128)
    for site in range(n_sites):
        amps = single_site_unitary_apply(amps, n_sites, site, u)
    amps = amps / np.linalg.norm(amps)
    return StateVector(amps, n_sites)


# ---------------------------------------------------------------------------
# binary fixture format: u32 N, then interleaved (re, im) float64, little-endian


def state_to_bytes(state: StateVector) -> bytes:
    inter = np.empty(2 * state.dim, dtype="<f8")
    inter[0::2] = state.amplitudes.real
    inter[1::2] = state.amplitudes.imag
    return struct.pack("<I", state.n_sites) + inter.tobytes()


def state_from_bytes(blob: bytes) -> StateVector:
    (n_sites,) = struct.unpack_from("<I", blob, 0)
    inter = np.frombuffer(blob, dtype="<f8", offset=4)
    if inter.size != 2 ** (n_sites + 1):
        raise ValidationError("byte payload does not match the declared number of sites")
    amps = inter[0::2] + 1j * inter[1::2]
    return StateVector(amps, n_sites)
