"""Batch experiment orchestration: disorder/state sweeps, parallel execution,
saturation analysis, and CSV/JSON emission.

Record streams are pure functions of the plan (master seed included), so any
run can be replayed from its metadata sidecar.  Workers never change results:
tasks are keyed by index tuples and merged in index order.
"""

from __future__ import annotations

import csv
import json
import logging
import os
import time as _time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from . import __version__
from .errors import CapacityError, RunFailureError, ValidationError
from .dynamics import SpectralState, diagonalize, evolve, log_time_grid, saturation_window
from .macroscopicity import maximize, staggered_variance
from .models import build_xxz, preset_params, sample_disorder, PRESETS
from .seeding import derive_seed, rng_from
from .spincore import DEFAULT_N_MAX, correlation_matrix, ghz, random_ghz, rotated_neel_ghz
from .lbits import generate_lbit_model, lbit_evolve
from .macroscopicity import measure

log = logging.getLogger(__name__)

STATE_KINDS = ("random_ghz", "rotated_neel", "ghz")
REALIZATION_POLICIES = ("desk-scale", "paper-scale")

RECORD_COLUMNS = (
    "n,h,realization,state,t,M,M_over_N,V_stag,theta,seed,restarts,converged"
).split(",")
SUMMARY_COLUMNS = (
    "n,h,theta,t,mean_M_over_N,sem_M_over_N,mean_V_stag_over_N,sem_V_stag_over_N,samples"
).split(",")
SATURATED_COLUMNS = (
    "n,h,theta,sat_M_over_N,sem_M_over_N,sat_V_stag_over_N,sem_V_stag_over_N,samples"
).split(",")
ETH_COLUMNS = (
    "n,h,realization,state,seed,beta,time_avg_variance,thermal_variance,"
    "difference,difference_per_site,difference_per_site_sq"
).split(",")


@dataclass(frozen=True)
class ExperimentPlan:
    """Everything a batch run depends on; hashable, serializable, replayable."""

    preset: str = "heisenberg"
    sizes: tuple[int, ...] = (10,)
    h_values: tuple[float, ...] = (0.5, 5.0)
    realizations: int | str = "desk-scale"
    states: int = 10
    state_kind: str = "random_ghz"
    thetas: tuple[float, ...] = ()
    t_min: float = 0.1
    t_max: float = 1e4
    points_per_decade: int = 60
    times: tuple[float, ...] | None = None
    master_seed: int = 42
    restarts: int = 16
    tol: float = 1e-8
    with_measure: bool = True
    with_staggered: bool = False
    workers: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "h_values", tuple(float(h) for h in self.h_values))
        object.__setattr__(self, "thetas", tuple(float(v) for v in self.thetas))
        if self.times is not None:
            object.__setattr__(self, "times", tuple(float(t) for t in self.times))
        if self.preset not in PRESETS:
            raise ValidationError(f"unknown preset {self.preset!r}")
        if self.state_kind not in STATE_KINDS:
            raise ValidationError(f"state_kind must be one of {STATE_KINDS}")
        if not self.sizes or not self.h_values:
            raise ValidationError("plan needs at least one size and one disorder strength")
        for n in self.sizes:
            if n > DEFAULT_N_MAX:
                raise CapacityError(f"N={n} exceeds n_max={DEFAULT_N_MAX}")
        if isinstance(self.realizations, str):
            if self.realizations not in REALIZATION_POLICIES:
                raise ValidationError(
                    f"realizations must be a positive count or one of {REALIZATION_POLICIES}"
                )
        elif self.realizations < 1:
            raise ValidationError("realization count must be >= 1")
        if self.state_kind == "rotated_neel":
            if not self.thetas:
                raise ValidationError("rotated_neel plans need a non-empty theta list")
            for n in self.sizes:
                if n % 2:
                    raise ValidationError("rotated_neel plans need even sizes")
        elif self.states < 1:
            raise ValidationError("states per realization must be >= 1")

    def realizations_for(self, n: int) -> int:
        if isinstance(self.realizations, int):
            return self.realizations
        if self.realizations == "paper-scale":
            return 10000 if n <= 6 else (1000 if n <= 10 else 200)
        return 50 if n <= 8 else (20 if n == 10 else 10)

    def states_for(self) -> int:
        if self.state_kind == "rotated_neel":
            return len(self.thetas)
        return self.states

    def time_grid(self) -> np.ndarray:
        if self.times is not None:
            return np.asarray(self.times, dtype=float)
        return log_time_grid(self.t_min, self.t_max, self.points_per_decade)

    def window_times(self) -> np.ndarray:
        # explicit time lists are taken as given; the last-decade subset
        # applies only to the generated log grid
        grid = self.time_grid()
        if self.times is not None:
            return grid
        return grid[saturation_window(grid)]

    def disorder_seed(self, n: int, h_index: int, realization: int) -> int:
        stream_master = derive_seed(self.master_seed, "disorder-stream", n, h_index)
        return derive_seed(stream_master, "disorder", realization)

    def seed_table(self, with_fields: bool = False) -> list[dict]:
        rows = []
        for n in self.sizes:
            for h_index, h in enumerate(self.h_values):
                params = preset_params(self.preset, n, h)
                stream_master = derive_seed(self.master_seed, "disorder-stream", n, h_index)
                for r in range(self.realizations_for(n)):
                    row = dict(n=n, h=h, realization=r, seed=self.disorder_seed(n, h_index, r))
                    if with_fields:
                        row["fields"] = list(sample_disorder(params, stream_master, r).fields)
                    rows.append(row)
        return rows


@dataclass(frozen=True)
class RunRecord:
    n: int
    h: float
    realization: int
    state: int
    t: float
    m: float | None
    m_over_n: float | None
    v_stag: float | None
    theta: float | None
    seed: int
    restarts: int | None
    converged: bool | None

    def key(self):
        return (self.n, self.h, self.realization, self.state, self.t)


@dataclass(frozen=True)
class RunResult:
    records: list[RunRecord]
    time_summary: list[dict]
    saturated_summary: list[dict]
    metadata: dict


def _initial_state(plan: ExperimentPlan, n: int, h_index: int, r: int, s: int):
    """Initial state and (for rotated Neel plans) its matched rotation angle."""
    if plan.state_kind == "random_ghz":
        rng = rng_from(plan.master_seed, "state", n, h_index, r, s)
        return random_ghz(n, rng), None
    if plan.state_kind == "ghz":
        return ghz(n), None
    theta = plan.thetas[s]
    return rotated_neel_ghz(n, theta), theta


def _run_realization(args) -> tuple[tuple, list[RunRecord] | None, str | None]:
    """One realization with all its states and times; the unit of parallel work."""
    plan, n, h_index, r, times = args
    h = plan.h_values[h_index]
    try:
        params = preset_params(plan.preset, n, h)
        stream_master = derive_seed(plan.master_seed, "disorder-stream", n, h_index)
        realization = sample_disorder(params, stream_master, r)
        eig = diagonalize(build_xxz(params, realization))
        records = []
        for s in range(plan.states_for()):
            state0, theta = _initial_state(plan, n, h_index, r, s)
            spectral = SpectralState.from_state(eig, state0)
            for t in times:
                psi_t = evolve(spectral, float(t))
                m = m_over_n = restarts = converged = None
                if plan.with_measure:
                    res = maximize(
                        correlation_matrix(psi_t), restarts=plan.restarts, tol=plan.tol
                    )
                    m, m_over_n = res.value, res.value / n
                    restarts, converged = res.restarts_used, res.converged
                v_stag = None
                if plan.with_staggered and theta is not None:
                    v_stag = staggered_variance(psi_t, theta)
                records.append(
                    RunRecord(
                        n=n,
                        h=h,
                        realization=r,
                        state=s,
                        t=float(t),
                        m=m,
                        m_over_n=m_over_n,
                        v_stag=v_stag,
                        theta=theta,
                        seed=realization.seed,
                        restarts=restarts,
                        converged=converged,
                    )
                )
        return (n, h_index, r), records, None
    except Exception as exc:  # noqa: BLE001 - failures are counted, logged, and re-raised in bulk
        seed = derive_seed(
            derive_seed(plan.master_seed, "disorder-stream", n, h_index), "disorder", r
        )
        return (n, h_index, r), None, f"seed={seed}: {exc!r}"


def _effective_workers(plan: ExperimentPlan) -> int:
    workers = plan.workers if plan.workers is not None else (os.cpu_count() or 1)
    cap = os.environ.get("MACROSPIN_THREADS")
    if cap:
        workers = min(workers, max(1, int(cap)))
    return max(1, workers)


def _sem(values: np.ndarray) -> float:
    if values.size < 2:
        return 0.0
    return float(values.std(ddof=1) / np.sqrt(values.size))


def _summarize_over_time(records: list[RunRecord]) -> list[dict]:
    groups: dict[tuple, dict[str, list]] = {}
    for rec in records:
        g = groups.setdefault(
            (rec.n, rec.h, rec.theta, rec.t), {"m": [], "v": []}
        )
        if rec.m_over_n is not None:
            g["m"].append(rec.m_over_n)
        if rec.v_stag is not None:
            g["v"].append(rec.v_stag / rec.n)
    rows = []
    for (n, h, theta, t), g in sorted(groups.items(), key=lambda kv: _sort_key(kv[0])):
        m = np.asarray(g["m"])
        v = np.asarray(g["v"])
        rows.append(
            dict(
                n=n,
                h=h,
                theta=theta,
                t=t,
                mean_M_over_N=float(m.mean()) if m.size else None,
                sem_M_over_N=_sem(m) if m.size else None,
                mean_V_stag_over_N=float(v.mean()) if v.size else None,
                sem_V_stag_over_N=_sem(v) if v.size else None,
                samples=int(max(m.size, v.size)),
            )
        )
    return rows


def _sort_key(key: tuple):
    return tuple(-np.inf if k is None else k for k in key)


def _summarize_saturated(records: list[RunRecord], window: np.ndarray) -> list[dict]:
    """Per (n, h, theta): mean over the saturation window per (realization, state),
    then mean and standard error across those pairs."""
    in_window = set(float(t) for t in window)
    per_pair: dict[tuple, dict[str, list]] = {}
    for rec in records:
        if rec.t not in in_window:
            continue
        g = per_pair.setdefault(
            (rec.n, rec.h, rec.theta, rec.realization, rec.state), {"m": [], "v": []}
        )
        if rec.m_over_n is not None:
            g["m"].append(rec.m_over_n)
        if rec.v_stag is not None:
            g["v"].append(rec.v_stag / rec.n)
    collected: dict[tuple, dict[str, list]] = {}
    for (n, h, theta, _r, _s), g in per_pair.items():
        agg = collected.setdefault((n, h, theta), {"m": [], "v": []})
        if g["m"]:
            agg["m"].append(float(np.mean(g["m"])))
        if g["v"]:
            agg["v"].append(float(np.mean(g["v"])))
    rows = []
    for (n, h, theta), agg in sorted(collected.items(), key=lambda kv: _sort_key(kv[0])):
        m = np.asarray(agg["m"])
        v = np.asarray(agg["v"])
        rows.append(
            dict(
                n=n,
                h=h,
                theta=theta,
                sat_M_over_N=float(m.mean()) if m.size else None,
                sem_M_over_N=_sem(m) if m.size else None,
                sat_V_stag_over_N=float(v.mean()) if v.size else None,
                sem_V_stag_over_N=_sem(v) if v.size else None,
                samples=int(max(m.size, v.size)),
            )
        )
    return rows


def _execute(plan: ExperimentPlan, times: np.ndarray) -> RunResult:
    tasks = [
        (plan, n, h_index, r, times)
        for n in plan.sizes
        for h_index in range(len(plan.h_values))
        for r in range(plan.realizations_for(n))
    ]
    workers = _effective_workers(plan)
    if workers == 1 or len(tasks) == 1:
        outcomes = [_run_realization(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_realization, tasks, chunksize=1))

    records: list[RunRecord] = []
    failures = []
    for key, recs, error in outcomes:
        if error is not None:
            log.error("realization %s failed: %s", key, error)
            failures.append((key, error))
        else:
            records.extend(recs)
    if failures and len(failures) > 0.01 * len(tasks):
        raise RunFailureError(
            f"{len(failures)} of {len(tasks)} realizations failed; first: {failures[0]}"
        )

    window = times[saturation_window(times)] if times.size else times
    metadata = plan_metadata(plan, times, failures)
    return RunResult(
        records=records,
        time_summary=_summarize_over_time(records),
        saturated_summary=_summarize_saturated(records, window),
        metadata=metadata,
    )


def plan_metadata(plan: ExperimentPlan, times: np.ndarray, failures=()) -> dict:
    import scipy

    window = times[saturation_window(times)] if times.size else times
    return {
        "plan": asdict(plan),
        "evaluated_times": [float(t) for t in times],
        "saturation_window": {
            "definition": "mean over the last decade of the time grid",
            "t_lo": float(window[0]) if window.size else None,
            "t_hi": float(window[-1]) if window.size else None,
            "points": int(window.size),
        },
        "realization_counts": {str(n): plan.realizations_for(n) for n in plan.sizes},
        "states_per_realization": plan.states_for(),
        "seed_table": plan.seed_table(with_fields=True),
        "failures": [{"task": list(k), "error": e} for k, e in failures],
        "versions": {
            "macrospin": __version__,
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "timestamp": _time.strftime("%Y-%m-%dT%H:%M:%S"),
    }


def run_time_series(plan: ExperimentPlan) -> RunResult:
    """Full time grid per (realization, state); records plus cross-realization means."""
    return _execute(plan, plan.time_grid())


def run_scaling(plan: ExperimentPlan) -> RunResult:
    """Saturation-window times only; reports saturated M/N per (N, h) with standard errors."""
    return _execute(plan, plan.window_times())


def run_staggered(plan: ExperimentPlan) -> RunResult:
    """Like run_scaling but records the staggered-magnetization variance."""
    if plan.state_kind != "rotated_neel":
        raise ValidationError("staggered runs need state_kind='rotated_neel'")
    return _execute(replace(plan, with_staggered=True), plan.window_times())


# ---------------------------------------------------------------------------
# ETH fluctuation sweep


@dataclass(frozen=True)
class EthRecord:
    n: int
    h: float
    realization: int
    state: int
    seed: int
    beta: float
    time_avg_variance: float
    thermal_variance: float
    difference: float
    difference_per_site: float
    difference_per_site_sq: float


def _run_eth_realization(args):
    from .thermal import eth_fluctuation_report

    plan, n, h_index, r = args
    h = plan.h_values[h_index]
    try:
        params = preset_params(plan.preset, n, h)
        stream_master = derive_seed(plan.master_seed, "disorder-stream", n, h_index)
        realization = sample_disorder(params, stream_master, r)
        eig = diagonalize(build_xxz(params, realization))
        records = []
        for s in range(plan.states_for()):
            state0, _ = _initial_state(plan, n, h_index, r, s)
            spectral = SpectralState.from_state(eig, state0)
            # probe along the direction field that makes the initial state macroscopic
            dirs = measure(state0, restarts=plan.restarts, tol=plan.tol).argmax
            report = eth_fluctuation_report(eig, spectral, dirs)
            records.append(
                EthRecord(
                    n=n,
                    h=h,
                    realization=r,
                    state=s,
                    seed=realization.seed,
                    beta=report.beta,
                    time_avg_variance=report.time_avg_variance,
                    thermal_variance=report.thermal_variance,
                    difference=report.difference,
                    difference_per_site=report.difference_per_site,
                    difference_per_site_sq=report.difference_per_site_sq,
                )
            )
        return (n, h_index, r), records, None
    except Exception as exc:  # noqa: BLE001
        return (n, h_index, r), None, repr(exc)


def run_eth_report(plan: ExperimentPlan) -> list[EthRecord]:
    tasks = [
        (plan, n, h_index, r)
        for n in plan.sizes
        for h_index in range(len(plan.h_values))
        for r in range(plan.realizations_for(n))
    ]
    workers = _effective_workers(plan)
    if workers == 1 or len(tasks) == 1:
        outcomes = [_run_eth_realization(task) for task in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(_run_eth_realization, tasks, chunksize=1))
    records: list[EthRecord] = []
    failures = []
    for key, recs, error in outcomes:
        if error is not None:
            log.error("ETH realization %s failed: %s", key, error)
            failures.append((key, error))
        else:
            records.extend(recs)
    if failures and len(failures) > 0.01 * len(tasks):
        raise RunFailureError(f"{len(failures)} of {len(tasks)} ETH realizations failed")
    return records


# ---------------------------------------------------------------------------
# effective-model dephasing demo


def run_lbit_demo(
    n_sites: int = 8,
    xi2: float = 0.5,
    energy_scale: float = 2.0,
    coupling_scale: float = 0.5,
    seed: int = 42,
    times: np.ndarray | None = None,
    restarts: int = 8,
) -> list[dict]:
    """M/N dynamics for one interacting model and its non-interacting twin.

    Both share the same onsite energies, so any difference is the dephasing
    driven by the pair couplings.
    """
    if times is None:
        times = log_time_grid(0.1, 1e3, 12)
    interacting = generate_lbit_model(n_sites, xi2, energy_scale, coupling_scale, seed)
    free = generate_lbit_model(n_sites, xi2, energy_scale, 0.0, seed)
    state0 = random_ghz(n_sites, rng_from(seed, "lbit-demo-state"))
    rows = []
    meta = {
        "n_sites": n_sites,
        "xi2": xi2,
        "seed": seed,
        "onsite": [float(e) for e in interacting.onsite],
        "pair_couplings": [[float(v) for v in row] for row in interacting.pair_couplings],
        "state_stream": "lbit-demo-state",
        "restarts": restarts,
    }
    for t in times:
        row = {"t": float(t)}
        for label, model in (("interacting", interacting), ("free", free)):
            psi = lbit_evolve(model, state0, float(t))
            res = maximize(correlation_matrix(psi), restarts=restarts)
            row[f"m_over_n_{label}"] = res.value / n_sites
        rows.append(row)
    return rows, meta


# ---------------------------------------------------------------------------
# file output


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_records_csv(records: list[RunRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RECORD_COLUMNS)
        for r in records:
            writer.writerow(
                [
                    _fmt(v)
                    for v in (
                        r.n,
                        r.h,
                        r.realization,
                        r.state,
                        r.t,
                        r.m,
                        r.m_over_n,
                        r.v_stag,
                        r.theta,
                        r.seed,
                        r.restarts,
                        r.converged,
                    )
                ]
            )


def _write_dict_rows(rows: list[dict], columns: list[str], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(col)) for col in columns])


def write_summary_csv(rows: list[dict], path) -> None:
    _write_dict_rows(rows, SUMMARY_COLUMNS, path)


def write_saturated_csv(rows: list[dict], path) -> None:
    _write_dict_rows(rows, SATURATED_COLUMNS, path)


def write_eth_csv(records: list[EthRecord], path) -> None:
    _write_dict_rows([asdict(r) for r in records], ETH_COLUMNS, path)


def write_metadata(metadata: dict, path) -> None:
    with open(path, "w") as fh:
        json.dump(metadata, fh, indent=2)


def write_run_result(result: RunResult, out_dir, prefix: str) -> dict:
    """Write records, summaries, and metadata; returns the path map."""
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "records": os.path.join(out_dir, f"{prefix}_records.csv"),
        "summary": os.path.join(out_dir, f"{prefix}_summary.csv"),
        "saturated": os.path.join(out_dir, f"{prefix}_saturated.csv"),
        "meta": os.path.join(out_dir, f"{prefix}_meta.json"),
    }
    write_records_csv(result.records, paths["records"])
    write_summary_csv(result.time_summary, paths["summary"])
    write_saturated_csv(result.saturated_summary, paths["saturated"])
    write_metadata(result.metadata, paths["meta"])
    return paths
