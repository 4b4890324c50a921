"""Render experiment CSV outputs into the standard figure layouts.

Inputs are the documented macrospin file formats: per-point record CSVs,
time-summary and saturated-summary CSVs, and the JSON metadata sidecar.
Rendering is read-only; identical inputs produce identical plotted data.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

from matplotlib.figure import Figure

FIGURE_IDS = ("fig1", "fig2", "figS1", "figS2L", "figS2R", "figS3")

_MARKERS = "os^vDPX*"


class MissingColumnError(ValueError):
    def __init__(self, column: str, path: str):
        self.column = column
        super().__init__(f"missing column {column!r} in {path}")


class NoDataError(ValueError):
    def __init__(self, path: str, detail: str = "no data rows"):
        super().__init__(f"{detail} in {path}")


@dataclass
class FigureSpec:
    figure: str
    inputs: list[str]
    out: str
    meta: str | None = None
    labels: list[str] = field(default_factory=list)
    dpi: int = 150

    def __post_init__(self):
        if self.figure not in FIGURE_IDS:
            raise ValueError(f"unknown figure id {self.figure!r}; choose from {FIGURE_IDS}")
        if not self.inputs:
            raise ValueError("at least one input CSV is required")


def _load_rows(path: str, required: tuple[str, ...]) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise MissingColumnError(column, path)
        rows = []
        for raw in reader:
            row = {}
            for key, value in raw.items():
                if value is None or value == "":
                    row[key] = None
                else:
                    try:
                        row[key] = float(value)
                    except ValueError:
                        row[key] = value
            rows.append(row)
    if not rows:
        raise NoDataError(path)
    return rows


def _series(rows: list[dict], key_cols: tuple[str, ...]):
    """Split rows into series keyed by the given columns, preserving key order."""
    series: dict[tuple, list[dict]] = {}
    for row in rows:
        key = tuple(row[c] for c in key_cols)
        series.setdefault(key, []).append(row)
    return dict(sorted(series.items(), key=lambda kv: tuple(-1e300 if v is None else v for v in kv[0])))


def _annotate_from_meta(fig: Figure, meta_path: str | None) -> None:
    if not meta_path:
        return
    with open(meta_path) as fh:
        meta = json.load(fh)
    window = meta.get("saturation_window", {})
    counts = meta.get("realization_counts", {})
    note = []
    if window.get("t_lo") is not None:
        note.append(f"saturation window t in [{window['t_lo']:g}, {window['t_hi']:g}]")
    if counts:
        note.append("realizations " + ", ".join(f"N={n}: {c}" for n, c in sorted(counts.items(), key=lambda kv: int(kv[0]))))
    if note:
        fig.text(0.01, 0.008, "; ".join(note), fontsize=6, color="0.35")


def _label_for(key: tuple, key_cols: tuple[str, ...]) -> str:
    parts = []
    for col, val in zip(key_cols, key):
        if val is None:
            continue
        if col == "theta":
            v = math.cos(val)
            parts.append(f"v={0.0 if abs(v) < 1e-9 else v:.2g}")
        else:
            parts.append(f"{col}={val:g}")
    return ", ".join(parts) or "data"


def _render_time_curves(spec: FigureSpec, value_col: str, sem_col: str, key_cols: tuple[str, ...]):
    fig = Figure(figsize=(5.2, 3.6))
    ax = fig.subplots()
    rows = []
    for path in spec.inputs:
        rows.extend(_load_rows(path, ("t", value_col) + key_cols))
    rows = [r for r in rows if r[value_col] is not None]
    if not rows:
        raise NoDataError(spec.inputs[0], f"no usable {value_col} values")
    for key, pts in _series(rows, key_cols).items():
        pts = sorted(pts, key=lambda r: r["t"])
        ts = [p["t"] for p in pts]
        ys = [p[value_col] for p in pts]
        ax.plot(ts, ys, lw=1.4, label=_label_for(key, key_cols))
        sems = [p.get(sem_col) for p in pts]
        if all(s is not None for s in sems):
            lo = [y - s for y, s in zip(ys, sems)]
            hi = [y + s for y, s in zip(ys, sems)]
            ax.fill_between(ts, lo, hi, alpha=0.2)
    ax.set_xscale("log")
    ax.set_xlabel("t (units of 1/J)")
    ax.set_ylabel("M / N")
    ax.legend(fontsize=8)
    return fig, ax


def _render_size_scaling(spec: FigureSpec, value_col: str, sem_col: str, key_cols: tuple[str, ...]):
    fig = Figure(figsize=(5.2, 3.6))
    ax = fig.subplots()
    rows = []
    for path in spec.inputs:
        rows.extend(_load_rows(path, ("n", value_col, sem_col) + key_cols))
    rows = [r for r in rows if r[value_col] is not None]
    if not rows:
        raise NoDataError(spec.inputs[0], f"no usable {value_col} values")
    for k, (key, pts) in enumerate(_series(rows, key_cols).items()):
        pts = sorted(pts, key=lambda r: r["n"])
        ax.errorbar(
            [p["n"] for p in pts],
            [p[value_col] for p in pts],
            yerr=[p[sem_col] or 0.0 for p in pts],
            marker=_MARKERS[k % len(_MARKERS)],
            capsize=3,
            lw=1.2,
            label=_label_for(key, key_cols),
        )
    ax.set_xlabel("N")
    ax.set_ylabel({"sat_V_stag_over_N": "V_stag / N (saturated)"}.get(value_col, "M / N (saturated)"))
    ax.legend(fontsize=8)
    return fig, ax


def _render_fig1(spec: FigureSpec):
    return _render_time_curves(spec, "mean_M_over_N", "sem_M_over_N", ("h",))


def _render_fig2(spec: FigureSpec):
    return _render_size_scaling(spec, "sat_M_over_N", "sem_M_over_N", ("h",))


def _render_figS1(spec: FigureSpec):
    """Single-seed M/N dynamics from raw record CSVs, one curve per input."""
    fig = Figure(figsize=(5.2, 3.6))
    ax = fig.subplots()
    plotted = 0
    for idx, path in enumerate(spec.inputs):
        rows = _load_rows(path, ("t", "M_over_N"))
        pts = sorted((r for r in rows if r["M_over_N"] is not None), key=lambda r: r["t"])
        if not pts:
            raise NoDataError(path, "no usable M_over_N values")
        label = spec.labels[idx] if idx < len(spec.labels) else f"series {idx + 1}"
        ax.plot([p["t"] for p in pts], [p["M_over_N"] for p in pts], lw=1.2, label=label)
        plotted += 1
    if not plotted:
        raise NoDataError(spec.inputs[0])
    ax.set_xscale("log")
    ax.set_xlabel("t (units of 1/J)")
    ax.set_ylabel("M / N")
    ax.legend(fontsize=8)
    return fig, ax


def _render_figS2L(spec: FigureSpec):
    return _render_time_curves(spec, "mean_M_over_N", "sem_M_over_N", ("theta", "h"))


def _render_figS2R(spec: FigureSpec):
    return _render_size_scaling(spec, "sat_M_over_N", "sem_M_over_N", ("theta", "h"))


def _render_figS3(spec: FigureSpec):
    return _render_size_scaling(spec, "sat_V_stag_over_N", "sem_V_stag_over_N", ("theta", "h"))


_RENDERERS = {
    "fig1": _render_fig1,
    "fig2": _render_fig2,
    "figS1": _render_figS1,
    "figS2L": _render_figS2L,
    "figS2R": _render_figS2R,
    "figS3": _render_figS3,
}


def render(spec: FigureSpec):
    """Render one figure spec to its output path; returns the Figure and Axes."""
    fig, ax = _RENDERERS[spec.figure](spec)
    _annotate_from_meta(fig, spec.meta)
    fig.tight_layout(rect=(0, 0.03, 1, 1))
    fig.savefig(spec.out, dpi=spec.dpi)
    return fig, ax
