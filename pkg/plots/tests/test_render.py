import json

import pytest

from orderlab_plots.cli import main
from orderlab_plots.readers import InputError, read_maxdeg, read_sweep_aggregates
from orderlab_plots.render import FigureSpec, render, render_fit

SWEEP_HEADER = (
    "ensemble,d,density_param,m,kappa,p_int,mode,run_index,seed,edge_count,f,g,"
    "score,optimizer,aggregate,n_runs,f_mean,f_std,f_iqr,f_min,f_max,"
    "g_mean,g_std,g_iqr,g_min,g_max,g_bound,g_bound_vacuous"
)


def aggregate_row(ensemble, d, density, p_int, g_iqr, g_mean=0.1, g_std=0.05, g_bound=0.5):
    return (f"{ensemble},{d},{density},,,{p_int},ancestral,,,,,,,,1,10,"
            f"1.0,0.5,0.6,0.0,2.0,{g_mean},{g_std},{g_iqr},0.0,1.0,{g_bound},0")


def run_row(ensemble, d, density, p_int, g=99.0):
    # Deliberately absurd per-run values: the renderer must never read them.
    return (f"{ensemble},{d},{density},,,{p_int},ancestral,0,123,10,990,{g},"
            f"5.0,heuristic,0,,,,,,,,,,,,,")


def write_sweep_csv(path, densities=(0.2, 0.4, 0.6), coverages=(0.25, 0.5, 0.75),
                    ds=(50, 100, 200, 400), with_runs=False):
    lines = ["# orderlab-sweep v1", SWEEP_HEADER]
    for density in densities:
        for p_int in coverages:
            for d in ds:
                if with_runs:
                    lines.append(run_row("er", d, density, p_int))
                lines.append(aggregate_row("er", d, density, p_int, g_iqr=d**-0.5))
    path.write_text("\n".join(lines) + "\n")
    return path


def write_maxdeg_csv(path, exponent=0.75, ds=(30, 100, 300, 1000), seeds=3):
    lines = ["# orderlab-maxdeg v1",
             "# m=3 kappa=1.0 seed=0 beta_hat=0.75 gamma_hat=2.333 r2=1.0",
             "d,seed_index,max_total_deg,aggregate,mean_max_deg"]
    for d in ds:
        for s in range(seeds):
            lines.append(f"{d},{s},{round(2 * d**exponent)},0,")
        lines.append(f"{d},,,1,{2 * d**exponent!r}")
    path.write_text("\n".join(lines) + "\n")
    return path


class TestReaders:
    def test_sweep_aggregates_only(self, tmp_path):
        path = write_sweep_csv(tmp_path / "sweep.csv", with_runs=True)
        rows = read_sweep_aggregates(path)
        assert len(rows) == 3 * 3 * 4
        assert all(row.stats["g_iqr"] <= 1.0 for row in rows)

    def test_wrong_marker_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# other v1\na,b\n1,2\n")
        with pytest.raises(InputError, match="orderlab-sweep"):
            read_sweep_aggregates(path)

    def test_missing_column_named(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("# orderlab-sweep v1\nensemble,d\ner,5\n")
        with pytest.raises(InputError, match="g_iqr"):
            read_sweep_aggregates(path)

    def test_no_aggregates_rejected(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("\n".join(["# orderlab-sweep v1", SWEEP_HEADER,
                                   run_row("er", 50, 0.4, 0.5)]) + "\n")
        with pytest.raises(InputError, match="no aggregate rows"):
            read_sweep_aggregates(path)

    def test_maxdeg_reader(self, tmp_path):
        data = read_maxdeg(write_maxdeg_csv(tmp_path / "m.csv"))
        assert len(data.means) == 4
        assert data.meta["kappa"] == 1.0


class TestDeviationFigure:
    def test_three_panel_iqr_with_slope_annotations(self, tmp_path):
        csv_path = write_sweep_csv(tmp_path / "sweep.csv")
        out = tmp_path / "fig.png"
        summary = render(FigureSpec(input_csv=str(csv_path), out=str(out)))
        assert out.exists()
        assert len(summary.slopes) == 9  # 3 densities x 3 coverages
        for slope in summary.slopes.values():
            assert -0.55 <= slope <= -0.45

    def test_run_rows_never_affect_curves(self, tmp_path):
        clean = render(FigureSpec(
            input_csv=str(write_sweep_csv(tmp_path / "a.csv")), out=str(tmp_path / "a.png")))
        noisy = render(FigureSpec(
            input_csv=str(write_sweep_csv(tmp_path / "b.csv", with_runs=True)),
            out=str(tmp_path / "b.png")))
        assert clean.slopes == noisy.slopes

    def test_mean_figure_with_bound_overlay(self, tmp_path):
        csv_path = write_sweep_csv(tmp_path / "sweep.csv")
        out = tmp_path / "mean.svg"
        summary = render(FigureSpec(input_csv=str(csv_path), metric="g", stat="mean",
                                    overlay_bound=True, out=str(out)))
        assert out.exists() and summary.out_files == [str(out)]

    def test_bound_overlay_limited_to_mean_fnr(self, tmp_path):
        csv_path = write_sweep_csv(tmp_path / "sweep.csv")
        with pytest.raises(InputError, match="mean-FNR"):
            render(FigureSpec(input_csv=str(csv_path), stat="iqr",
                              overlay_bound=True, out=str(tmp_path / "x.png")))

    def test_empty_csv_errors_without_output(self, tmp_path):
        empty = tmp_path / "empty.csv"
        empty.write_text("")
        out = tmp_path / "fig.png"
        with pytest.raises(InputError):
            render(FigureSpec(input_csv=str(empty), out=str(out)))
        assert not out.exists()

    def test_deterministic_bytes(self, tmp_path):
        csv_path = write_sweep_csv(tmp_path / "sweep.csv")
        outs = []
        for name in ("one.png", "two.png"):
            out = tmp_path / name
            render(FigureSpec(input_csv=str(csv_path), out=str(out)))
            outs.append(out.read_bytes())
        assert outs[0] == outs[1]


class TestFitFigure:
    def test_perfect_power_law_annotations(self, tmp_path):
        csv_path = write_maxdeg_csv(tmp_path / "m.csv", exponent=0.75)
        out = tmp_path / "fit.png"
        summary = render_fit(FigureSpec(input_csv=str(csv_path), out=str(out)))
        assert out.exists()
        assert summary.gamma_hat == pytest.approx(1 / 0.75 + 1, rel=1e-3)
        assert summary.r2 == pytest.approx(1.0, abs=1e-6)

    def test_refuses_two_sizes(self, tmp_path):
        csv_path = write_maxdeg_csv(tmp_path / "m.csv", ds=(30, 100))
        with pytest.raises(InputError, match="at least 3"):
            render_fit(FigureSpec(input_csv=str(csv_path), out=str(tmp_path / "x.png")))


class TestCli:
    def test_deviation_command(self, tmp_path, capsys):
        csv_path = write_sweep_csv(tmp_path / "sweep.csv")
        out = tmp_path / "fig.png"
        assert main(["deviation", "--csv", str(csv_path), "--stat", "iqr",
                     "--out", str(out)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["out"] == [str(out)]
        assert all(-0.55 <= v <= -0.45 for v in payload["slopes"].values())

    def test_maxdeg_command(self, tmp_path, capsys):
        csv_path = write_maxdeg_csv(tmp_path / "m.csv")
        out = tmp_path / "fit.svg"
        assert main(["maxdeg-fit", "--csv", str(csv_path), "--out", str(out)]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert payload["gamma_hat"] == pytest.approx(7 / 3, rel=1e-3)

    def test_bad_input_exit_code(self, tmp_path, capsys):
        missing = tmp_path / "nope.csv"
        assert main(["deviation", "--csv", str(missing), "--out",
                     str(tmp_path / "x.png")]) == 2
