"""Runnable invariant suite behind the `macrospin validate` subcommand.

Each check exercises documented invariants of one module and reports a single
pass/fail line; the suite exits nonzero if anything fails.
"""

from __future__ import annotations

import numpy as np

from .dynamics import (
    SpectralState,
    diagonal_ensemble_average,
    diagonalize,
    evolve,
    log_time_grid,
)
from .experiments import ExperimentPlan, run_time_series
from .lbits import generate_lbit_model, lbit_evolve
from .macroscopicity import max_signed_variance, maximize, staggered_variance, variance
from .models import build_preset, preset_params, sample_disorder, total_sz_values
from .seeding import rng_from
from .spincore import (
    DirectionField,
    StateVector,
    correlation_matrix,
    direction_observable,
    ghz,
    pauli_apply_array,
    random_ghz,
    rotated_neel_ghz,
    site_pauli_observable,
)


def _random_state(n: int, rng: np.random.Generator) -> StateVector:
    amps = rng.normal(size=2**n) + 1j * rng.normal(size=2**n)
    return StateVector(amps / np.linalg.norm(amps), n)


def _random_unit_field(n: int, rng: np.random.Generator) -> DirectionField:
    v = rng.normal(size=(n, 3))
    return DirectionField(v / np.linalg.norm(v, axis=1, keepdims=True))


def check_state_norms(quick: bool) -> tuple[bool, str]:
    rng = rng_from(7, "validate-norms")
    sizes = (1, 2, 4) if quick else (1, 2, 4, 6, 8)
    worst = 0.0
    for n in sizes:
        states = [ghz(n), random_ghz(n, rng)]
        if n % 2 == 0:
            states.append(rotated_neel_ghz(n, rng.uniform(0, np.pi)))
        for st in states:
            worst = max(worst, abs(np.linalg.norm(st.amplitudes) - 1.0))
    return worst <= 1e-12, f"worst norm deviation {worst:.2e}"


def check_pauli_involution(quick: bool) -> tuple[bool, str]:
    rng = rng_from(7, "validate-involution")
    n = 3 if quick else 5
    psi = _random_state(n, rng)
    worst = 0.0
    for site in range(n):
        for axis in "xyz":
            twice = pauli_apply_array(
                pauli_apply_array(psi.amplitudes, n, site, axis), n, site, axis
            )
            worst = max(worst, float(np.max(np.abs(twice - psi.amplitudes))))
    return worst <= 1e-12, f"worst double-application deviation {worst:.2e}"


def check_correlation_matrix(quick: bool) -> tuple[bool, str]:
    rng = rng_from(7, "validate-corr")
    n_fields = 100 if quick else 1000
    ok = True
    details = []
    for n in (2, 3, 4):
        psi = _random_state(n, rng)
        corr = correlation_matrix(psi)
        sym = float(np.max(np.abs(corr.blocks - corr.blocks.T)))
        min_eig = float(np.linalg.eigvalsh(corr.blocks)[0])
        traces = [np.trace(corr.block(i, i)) for i in range(n)]
        ok &= sym <= 1e-10 and min_eig >= -1e-9
        ok &= all(2.0 - 1e-9 <= tr <= 3.0 + 1e-9 for tr in traces)
        worst = 0.0
        for _ in range(n_fields):
            dirs = _random_unit_field(n, rng)
            quad = variance(corr, dirs)
            ok &= quad >= -1e-9
            apply_a = direction_observable(dirs)
            a_psi = apply_a(psi.amplitudes)
            direct = float(
                np.vdot(a_psi, a_psi).real - np.vdot(psi.amplitudes, a_psi).real ** 2
            )
            worst = max(worst, abs(quad - direct))
        ok &= worst <= 1e-9
        details.append(f"N={n}: sym {sym:.1e}, min eig {min_eig:.1e}, quad err {worst:.1e}")
    # product pure state: every diagonal block has trace 2
    prod = StateVector(np.kron([1, 0], np.kron([0, 1], [1, 0])).astype(complex), 3)
    corr = correlation_matrix(prod)
    ok &= all(abs(np.trace(corr.block(i, i)) - 2.0) <= 1e-10 for i in range(3))
    return ok, "; ".join(details)


def check_models(quick: bool) -> tuple[bool, str]:
    ok = True
    n = 4 if quick else 6
    params = preset_params("heisenberg", n, 1.0)
    real = sample_disorder(params, 11, 0)
    again = sample_disorder(params, 11, 0)
    ok &= np.array_equal(real.fields, again.fields)
    ham = build_preset("heisenberg", n, 1.0, master_seed=11, realization_index=0)
    herm = float(np.max(np.abs(ham.matrix - ham.matrix.T)))
    ok &= herm <= 1e-12
    # U(1) symmetry at zero transverse field
    from .models import ModelParams, build_xxz

    p0 = ModelParams(n_sites=n, j_perp=1.0, j_z=1.0, h_strength=1.0, gamma=0.0)
    h0 = build_xxz(p0, sample_disorder(p0, 11, 1))
    jz = np.diag(total_sz_values(n))
    comm = float(np.max(np.abs(h0.matrix @ jz - jz @ h0.matrix)))
    ok &= comm <= 1e-10
    return ok, f"hermiticity {herm:.1e}, [H, J_z] {comm:.1e}"


def check_unitarity_parseval(quick: bool) -> tuple[bool, str]:
    n = 4 if quick else 6
    ham = build_preset("heisenberg", n, 1.0, master_seed=13, realization_index=0)
    eig = diagonalize(ham)
    psi0 = random_ghz(n, rng_from(13, "validate-state"))
    spectral = SpectralState.from_state(eig, psi0)
    parseval = abs(float(np.sum(np.abs(spectral.coeffs) ** 2)) - 1.0)
    worst_norm = 0.0
    for t in log_time_grid(0.1, 100.0, 5):
        psi_t = evolve(spectral, float(t))
        worst_norm = max(worst_norm, abs(np.linalg.norm(psi_t.amplitudes) - 1.0))
    ok = parseval <= 1e-10 and worst_norm <= 1e-10
    return ok, f"Parseval {parseval:.1e}, worst norm {worst_norm:.1e}"


def check_diagonal_ensemble_vs_sampled(quick: bool) -> tuple[bool, str]:
    n = 4 if quick else 6
    samples = 500 if quick else 2000
    ham = build_preset("heisenberg", n, 1.0, master_seed=17, realization_index=0)
    eig = diagonalize(ham)
    psi0 = random_ghz(n, rng_from(17, "validate-state"))
    spectral = SpectralState.from_state(eig, psi0)
    obs = site_pauli_observable(n, 0, "z")
    de = diagonal_ensemble_average(spectral, obs)
    rng = rng_from(17, "validate-times")
    values = []
    for t in rng.uniform(0.0, 1e4, size=samples):
        psi_t = evolve(spectral, float(t))
        values.append(float(np.vdot(psi_t.amplitudes, obs(psi_t.amplitudes)).real))
    deviation = abs(float(np.mean(values)) - de)
    tol = 5e-3 if samples >= 2000 else 2e-2
    return deviation <= tol, f"sampled long-time average off by {deviation:.2e}"


def check_optimizer_bounds(quick: bool) -> tuple[bool, str]:
    rng = rng_from(19, "validate-optimizer")
    ok = True
    details = []
    for n in ((2, 3) if quick else (2, 3, 4)):
        psi = _random_state(n, rng)
        corr = correlation_matrix(psi)
        res = maximize(corr, restarts=16)
        ok &= res.value >= n - 1e-6
        ok &= res.value <= n**2 + 1e-6
        stag_best = max(
            staggered_variance(psi, th) for th in np.linspace(0.0, np.pi, 32)
        )
        ok &= res.value >= stag_best - 1e-6
        details.append(f"N={n}: M={res.value:.4f}")
    return ok, "; ".join(details)


def check_sign_enumeration(quick: bool) -> tuple[bool, str]:
    rng = rng_from(23, "validate-signs")
    n = 4 if quick else 5
    psi = _random_state(n, rng)
    corr = correlation_matrix(psi)
    axes = np.zeros((n, 3))
    axes[:, 2] = 1.0
    best, signs = max_signed_variance(corr, axes)
    # brute force over all sign patterns
    z_block = corr.blocks.reshape(n, 3, n, 3)[:, 2, :, 2]
    brute = -np.inf
    for bits in range(1 << n):
        s = np.array([1.0 if bits & (1 << i) else -1.0 for i in range(n)])
        brute = max(brute, float(s @ z_block @ s))
    flipped = float((-signs) @ z_block @ (-signs))
    ok = abs(best - brute) <= 1e-12 and abs(flipped - best) <= 1e-12
    return ok, f"enumerated max {best:.6f}, brute force {brute:.6f}"


def check_lbit_conservation(quick: bool) -> tuple[bool, str]:
    n = 4 if quick else 6
    model = generate_lbit_model(n, xi2=0.5, energy_scale=2.0, coupling_scale=0.5, seed=29)
    psi0 = random_ghz(n, rng_from(29, "validate-lbit"))
    z0 = [
        float(np.vdot(psi0.amplitudes, pauli_apply_array(psi0.amplitudes, n, i, "z")).real)
        for i in range(n)
    ]
    zz0 = float(
        np.vdot(
            psi0.amplitudes,
            pauli_apply_array(pauli_apply_array(psi0.amplitudes, n, 0, "z"), n, 1, "z"),
        ).real
    )
    worst = 0.0
    for t in log_time_grid(0.1, 100.0, 4):
        psi_t = lbit_evolve(model, psi0, float(t))
        worst = max(worst, abs(np.linalg.norm(psi_t.amplitudes) - 1.0))
        for i in range(n):
            z_t = float(
                np.vdot(psi_t.amplitudes, pauli_apply_array(psi_t.amplitudes, n, i, "z")).real
            )
            worst = max(worst, abs(z_t - z0[i]))
        zz_t = float(
            np.vdot(
                psi_t.amplitudes,
                pauli_apply_array(pauli_apply_array(psi_t.amplitudes, n, 0, "z"), n, 1, "z"),
            ).real
        )
        worst = max(worst, abs(zz_t - zz0))
    return worst <= 1e-12, f"worst conserved-quantity drift {worst:.2e}"


def check_scheduling_determinism(quick: bool) -> tuple[bool, str]:
    plan = ExperimentPlan(
        sizes=(4,),
        h_values=(1.0,),
        realizations=2,
        states=1,
        times=(0.0, 1.0, 10.0),
        restarts=4,
        master_seed=31,
        workers=1,
    )
    first = run_time_series(plan).records
    second = run_time_series(plan).records
    from dataclasses import replace

    parallel = run_time_series(replace(plan, workers=2)).records
    ok = first == second and sorted(first, key=lambda r: r.key()) == sorted(
        parallel, key=lambda r: r.key()
    )
    return ok, f"{len(first)} records, reruns and 2-worker run identical: {ok}"


CHECKS = [
    ("state norms", check_state_norms),
    ("pauli involution", check_pauli_involution),
    ("correlation matrix PSD + quadratic form", check_correlation_matrix),
    ("model hermiticity + symmetries + disorder determinism", check_models),
    ("unitarity + Parseval", check_unitarity_parseval),
    ("diagonal ensemble vs sampled time average", check_diagonal_ensemble_vs_sampled),
    ("optimizer floor/ceiling vs staggered sweep", check_optimizer_bounds),
    ("signed-variance enumeration", check_sign_enumeration),
    ("l-bit conservation laws", check_lbit_conservation),
    ("scheduling determinism", check_scheduling_determinism),
]


def run_all(quick: bool = False, echo=print) -> bool:
    all_ok = True
    for name, fn in CHECKS:
        try:
            ok, detail = fn(quick)
        except Exception as exc:  # noqa: BLE001 - a crashed check is a failed check
            ok, detail = False, f"raised {exc!r}"
        all_ok &= ok
        echo(f"[{'ok' if ok else 'FAIL'}] {name}: {detail}")
    return all_ok
