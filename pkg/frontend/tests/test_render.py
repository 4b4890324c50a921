import json
import math
import os
from pathlib import Path

import pytest

from macrospin_figures import FigureSpec, MissingColumnError, NoDataError, render
from macrospin_figures.cli import main

TIME_SUMMARY_HEADER = "n,h,theta,t,mean_M_over_N,sem_M_over_N,mean_V_stag_over_N,sem_V_stag_over_N,samples"
SATURATED_HEADER = "n,h,theta,sat_M_over_N,sem_M_over_N,sat_V_stag_over_N,sem_V_stag_over_N,samples"
RECORDS_HEADER = "n,h,realization,state,t,M,M_over_N,V_stag,theta,seed,restarts,converged"


def write_time_summary(path, h_values, times, theta=None):
    lines = [TIME_SUMMARY_HEADER]
    for h in h_values:
        for t in times:
            th = "" if theta is None else repr(theta)
            lines.append(f"10,{h},{th},{t},{3.0 + h / t},0.05,,,200")
    path.write_text("\n".join(lines) + "\n")


def write_saturated(path, n_values, h_values, thetas=(None,)):
    lines = [SATURATED_HEADER]
    for theta in thetas:
        for h in h_values:
            for n in n_values:
                th = "" if theta is None else repr(theta)
                v = 1.0 + 0.2 * n * (1 if h > 3 else -1)
                lines.append(f"{n},{h},{th},{5.0 + v},0.1,{4.0 + v},0.08,200")
    path.write_text("\n".join(lines) + "\n")


def write_records(path, times):
    lines = [RECORDS_HEADER]
    for t in times:
        lines.append(f"10,5,0,0,{t},{30 + math.sin(t)},{3.0 + math.sin(t) / 10},,,123,8,true")
    path.write_text("\n".join(lines) + "\n")


def write_meta(path):
    path.write_text(
        json.dumps(
            {
                "saturation_window": {"t_lo": 1000.0, "t_hi": 10000.0, "points": 7},
                "realization_counts": {"10": 20},
            }
        )
    )


class TestFig1:
    def test_five_labeled_curves_log_axis(self, tmp_path):
        csv_path = tmp_path / "summary.csv"
        write_time_summary(csv_path, [0.5, 1.5, 2.5, 4.0, 5.0], [0.1, 1.0, 10.0, 100.0])
        out = tmp_path / "fig1.png"
        fig, ax = render(FigureSpec("fig1", [str(csv_path)], str(out)))
        assert out.exists()
        assert ax.get_xscale() == "log"
        assert len(ax.get_lines()) == 5
        labels = [line.get_label() for line in ax.get_lines()]
        assert labels == ["h=0.5", "h=1.5", "h=2.5", "h=4", "h=5"]

    def test_identical_inputs_identical_data(self, tmp_path):
        csv_path = tmp_path / "summary.csv"
        write_time_summary(csv_path, [0.5], [0.1, 1.0, 10.0])
        spec = lambda out: FigureSpec("fig1", [str(csv_path)], str(tmp_path / out))
        _, ax1 = render(spec("a.png"))
        _, ax2 = render(spec("b.png"))
        assert (ax1.get_lines()[0].get_ydata() == ax2.get_lines()[0].get_ydata()).all()

    def test_meta_annotation(self, tmp_path):
        csv_path = tmp_path / "summary.csv"
        meta_path = tmp_path / "meta.json"
        write_time_summary(csv_path, [0.5], [1.0, 10.0])
        write_meta(meta_path)
        fig, _ = render(
            FigureSpec("fig1", [str(csv_path)], str(tmp_path / "o.png"), meta=str(meta_path))
        )
        notes = [t.get_text() for t in fig.texts]
        assert any("saturation window" in n and "realizations" in n for n in notes)


class TestFig2:
    def test_marker_series_per_h_with_error_bars(self, tmp_path):
        csv_path = tmp_path / "sat.csv"
        write_saturated(csv_path, [6, 8, 10], [1.0, 5.0])
        out = tmp_path / "fig2.png"
        _, ax = render(FigureSpec("fig2", [str(csv_path)], str(out)))
        assert out.exists()
        assert len(ax.containers) == 2  # one errorbar container per h
        assert ax.get_xscale() == "linear"


class TestFigS1:
    def test_two_record_curves(self, tmp_path):
        a, b = tmp_path / "mbl.csv", tmp_path / "anderson.csv"
        times = [1.0, 10.0, 100.0, 1000.0]
        write_records(a, times)
        write_records(b, times)
        out = tmp_path / "figS1.png"
        _, ax = render(
            FigureSpec("figS1", [str(a), str(b)], str(out), labels=["mbl", "anderson"])
        )
        assert out.exists()
        assert ax.get_xscale() == "log"
        assert [line.get_label() for line in ax.get_lines()] == ["mbl", "anderson"]


class TestFigS2AndS3:
    def test_curves_per_rotation(self, tmp_path):
        csv_path = tmp_path / "summary.csv"
        lines = [TIME_SUMMARY_HEADER]
        for theta in (0.0, 1.5707963267948966):
            for t in (0.1, 1.0, 10.0):
                lines.append(f"10,5,{theta},{t},{2 + theta},0.05,,,100")
        csv_path.write_text("\n".join(lines) + "\n")
        _, ax = render(FigureSpec("figS2L", [str(csv_path)], str(tmp_path / "o.png")))
        assert len(ax.get_lines()) == 2
        assert {line.get_label() for line in ax.get_lines()} == {"v=1, h=5", "v=0, h=5"}

    def test_size_scaling_by_rotation(self, tmp_path):
        csv_path = tmp_path / "sat.csv"
        write_saturated(csv_path, [6, 8, 10], [5.0], thetas=(0.0, 1.5707963267948966))
        _, ax = render(FigureSpec("figS2R", [str(csv_path)], str(tmp_path / "o.png")))
        assert len(ax.containers) == 2

    def test_staggered_variant_uses_v_columns(self, tmp_path):
        csv_path = tmp_path / "sat.csv"
        write_saturated(csv_path, [6, 8, 10], [5.0], thetas=(0.0,))
        _, ax = render(FigureSpec("figS3", [str(csv_path)], str(tmp_path / "o.png")))
        assert "V_stag" in ax.get_ylabel()


class TestFailures:
    def test_missing_column_named(self, tmp_path):
        bad = tmp_path / "bad.csv"
        bad.write_text("n,h,t\n10,1,0.1\n")
        with pytest.raises(MissingColumnError, match="mean_M_over_N"):
            render(FigureSpec("fig1", [str(bad)], str(tmp_path / "o.png")))
        assert not (tmp_path / "o.png").exists()

    def test_empty_csv_is_explicit_failure(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text(TIME_SUMMARY_HEADER + "\n")
        with pytest.raises(NoDataError):
            render(FigureSpec("fig1", [str(empty)], str(tmp_path / "o.png")))
        assert not (tmp_path / "o.png").exists()

    def test_unknown_figure_id(self, tmp_path):
        with pytest.raises(ValueError):
            FigureSpec("fig9", ["x.csv"], "o.png")


class TestCli:
    def test_render_ok(self, tmp_path):
        csv_path = tmp_path / "summary.csv"
        write_time_summary(csv_path, [0.5, 5.0], [0.1, 1.0, 10.0])
        out = tmp_path / "fig1.png"
        code = main(["render", "--fig", "fig1", "--in", str(csv_path), "--out", str(out)])
        assert code == 0
        assert out.exists()

    def test_missing_column_exit_code_names_column(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("n,h,t\n10,1,0.1\n")
        code = main(["render", "--fig", "fig1", "--in", str(bad), "--out", str(tmp_path / "o.png")])
        assert code == 4
        assert "mean_M_over_N" in capsys.readouterr().err

    def test_empty_input_exit_code(self, tmp_path, capsys):
        empty = tmp_path / "empty.csv"
        empty.write_text(TIME_SUMMARY_HEADER + "\n")
        code = main(["render", "--fig", "fig1", "--in", str(empty), "--out", str(tmp_path / "o.png")])
        assert code == 4
        assert "no data" in capsys.readouterr().err


ACCEPTANCE_DIR = Path(
    os.environ.get("MACROSPIN_ACCEPTANCE_OUT", Path(__file__).resolve().parents[2] / "out" / "acceptance")
)


@pytest.mark.skipif(
    not (ACCEPTANCE_DIR / "fig1_summary.csv").exists(),
    reason="primary acceptance outputs not present",
)
class TestAcceptanceOutputs:
    """Criterion: render all six figure specs from the real experiment outputs."""

    def test_all_six_figures_render(self, tmp_path):
        d = ACCEPTANCE_DIR
        specs = [
            FigureSpec("fig1", [str(d / "fig1_summary.csv")], str(tmp_path / "fig1.png"),
                       meta=str(d / "fig1_meta.json")),
            FigureSpec("fig2", [str(d / "fig2_saturated.csv")], str(tmp_path / "fig2.png"),
                       meta=str(d / "fig2_meta.json")),
            FigureSpec("figS1",
                       [str(d / "figs1_mbl_records.csv"), str(d / "figs1_anderson_records.csv")],
                       str(tmp_path / "figS1.png"), labels=["interacting", "non-interacting"]),
            FigureSpec("figS2L", [str(d / "figs2_s3_summary.csv")], str(tmp_path / "figS2L.png")),
            FigureSpec("figS2R", [str(d / "figs2_s3_saturated.csv")], str(tmp_path / "figS2R.png")),
            FigureSpec("figS3", [str(d / "figs2_s3_saturated.csv")], str(tmp_path / "figS3.png")),
        ]
        expected_curves = {"fig1": 5, "figS1": 2, "figS2L": 2}
        expected_series = {"fig2": 2, "figS2R": 2, "figS3": 2}
        log_axis = {"fig1", "figS1", "figS2L"}
        for spec in specs:
            fig, ax = render(spec)
            assert Path(spec.out).exists(), spec.figure
            if spec.figure in expected_curves:
                assert len(ax.get_lines()) == expected_curves[spec.figure], spec.figure
            if spec.figure in expected_series:
                assert len(ax.containers) == expected_series[spec.figure], spec.figure
            assert ax.get_xscale() == ("log" if spec.figure in log_axis else "linear")
        print("[criterion 11] PASS: all six figure specs rendered from acceptance outputs")
