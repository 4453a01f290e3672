"""End-to-end CLI tests: exit codes, artifacts, config precedence.

Everything runs in-process through cli.main(argv) on deliberately small
grids, so the whole module stays fast.
"""

import numpy as np
import pytest

import dswave.cli as cli
import dswave.points as dpt
import dswave.radial as drad

SMALL_GRID = [
    "--nu-spacing", "0.05", "--nu-max", "4",
    "--r-spacing", "0.05", "--r-max", "8",
]


def run(*argv):
    return cli.main(list(argv))


class TestWiring:
    def test_no_command_prints_usage(self, capsys):
        assert run() == 1
        assert "usage" in capsys.readouterr().err

    def test_unknown_flag_exits_1(self):
        with pytest.raises(SystemExit) as info:
            run("optimize", "--nu0", "0.5", "--frobnicate")
        assert info.value.code == 1

    def test_missing_required_flag_exits_1(self):
        with pytest.raises(SystemExit) as info:
            run("optimize")
        assert info.value.code == 1

    def test_version(self, capsys):
        with pytest.raises(SystemExit) as info:
            run("--version")
        assert info.value.code == 0


class TestOptimize:
    def test_step_solution_artifacts(self, tmp_path, capsys):
        out = tmp_path / "opt"
        assert run("optimize", "--nu0", "0.5", *SMALL_GRID,
                   "--out", str(out)) == 0
        assert "optimal" in capsys.readouterr().out
        report = (out / "report.txt").read_text()
        assert "status = optimal" in report
        coords, f = drad.read_radial_csv(out / "spectrum.csv")
        assert coords.size == 81
        assert np.all(f[coords <= 0.45] <= -0.9)
        assert np.mean(np.abs(f[coords >= 1.0])) <= 0.05
        assert (out / "manifest.txt").exists()

    def test_infeasible_exits_2(self, tmp_path, capsys):
        out = tmp_path / "opt"
        code = run("optimize", "--nu0", "0.85", "--m0", "1.2",
                   *SMALL_GRID, "--out", str(out))
        assert code == 2
        assert "infeasible" in capsys.readouterr().err
        assert "status = infeasible" in (out / "report.txt").read_text()
        assert not (out / "spectrum.csv").exists()

    def test_manifest_reproducible(self, tmp_path):
        outs = [tmp_path / "a", tmp_path / "b"]
        for out in outs:
            assert run("optimize", "--nu0", "0.5", *SMALL_GRID,
                       "--out", str(out)) == 0

        def lines_without_out(path):
            return [l for l in path.read_text().splitlines()
                    if not l.startswith("out =")]

        assert (lines_without_out(outs[0] / "manifest.txt")
                == lines_without_out(outs[1] / "manifest.txt"))
        assert ((outs[0] / "spectrum.csv").read_bytes()
                == (outs[1] / "spectrum.csv").read_bytes())


class TestConfigOverlay:
    def test_flags_beat_config_beats_defaults(self, tmp_path):
        config = tmp_path / "run.cfg"
        config.write_text(
            "nu0 = 0.8  # overridden by the explicit flag\n"
            "nu-spacing = 0.05\n"
            "nu-max = 4\n"
            "r-spacing = 0.05\n"
            "r-max = 8\n"
        )
        out = tmp_path / "opt"
        assert run("optimize", "--nu0", "0.5", "--config", str(config),
                   "--out", str(out)) == 0
        manifest = (out / "manifest.txt").read_text()
        assert "nu0 = 0.5" in manifest  # flag won
        assert "nu_spacing = 0.05" in manifest  # config beat the default

    def test_unknown_config_key_exits_1(self, tmp_path, capsys):
        config = tmp_path / "run.cfg"
        config.write_text("nu0 = 0.5\nwibble = 3\n")
        assert run("optimize", "--nu0", "0.5", "--config", str(config),
                   "--out", str(tmp_path / "o")) == 1
        assert "unknown config keys" in capsys.readouterr().err


class TestFeasibility:
    def test_min_m0(self, tmp_path, capsys):
        out = tmp_path / "m0"
        assert run("min-m0", "--nu0", "0.5", "--tol", "0.05",
                   *SMALL_GRID, "--out", str(out)) == 0
        report = (out / "report.txt").read_text()
        value = float(report.split("=")[1])
        assert 1.0 <= value <= 1.1  # the step already peaks at 1 there

    def test_feasible_region_sweep(self, tmp_path):
        out = tmp_path / "fr"
        assert run("feasible-region", "--nu0-range", "0.3:0.5:0.1",
                   "--tol", "0.05", *SMALL_GRID, "--out", str(out)) == 0
        lines = (out / "feasible_region.csv").read_text().splitlines()
        assert lines[0] == "nu0,min_m0"
        rows = [tuple(map(float, l.split(","))) for l in lines[1:]]
        assert [r[0] for r in rows] == pytest.approx([0.3, 0.4, 0.5])
        assert all(np.isfinite(r[1]) and r[1] >= 1.0 for r in rows)

    def test_sweep_needs_a_range(self, tmp_path, capsys):
        assert run("feasible-region", "--out", str(tmp_path / "x")) == 1
        assert "need --nu0" in capsys.readouterr().err


@pytest.fixture()
def pcf_csv(tmp_path):
    grid = drad.RadialGrid.from_spacing(0.05, 3.0)
    target = drad.closed_form_step_pcf(0.5, grid)
    path = tmp_path / "pcf.csv"
    drad.write_radial_csv(path, grid.coords, target.g_values)
    return path


class TestSynthesize:
    def test_writes_sets_and_reports(self, tmp_path, pcf_csv):
        out = tmp_path / "syn"
        assert run("synthesize", "--pcf", str(pcf_csv), "--points", "64",
                   "--sets", "2", "--seed", "3", "--max-iter", "40",
                   "--out", str(out)) == 0
        for i in range(2):
            pts = dpt.load_points(out / f"points_{i:03d}.txt")
            assert pts.n == 64
            report = (out / f"report_{i:03d}.txt").read_text()
            assert f"seed = {3 + i}" in report
            assert "energy = " in report

    def test_deterministic_across_runs(self, tmp_path, pcf_csv):
        outs = [tmp_path / "a", tmp_path / "b"]
        for out in outs:
            assert run("synthesize", "--pcf", str(pcf_csv), "--points", "64",
                       "--sets", "1", "--seed", "3", "--max-iter", "40",
                       "--out", str(out)) == 0
        assert ((outs[0] / "points_000.txt").read_bytes()
                == (outs[1] / "points_000.txt").read_bytes())

    def test_needs_exactly_one_target_kind(self, tmp_path, pcf_csv, capsys):
        assert run("synthesize", "--out", str(tmp_path / "x")) == 1
        assert "exactly one" in capsys.readouterr().err
        assert run("synthesize", "--pcf", str(pcf_csv), "--spectrum",
                   str(pcf_csv), "--out", str(tmp_path / "y")) == 1


class TestAnalyze:
    def test_directory_glob(self, tmp_path, pcf_csv):
        syn = tmp_path / "syn"
        assert run("synthesize", "--pcf", str(pcf_csv), "--points", "64",
                   "--sets", "2", "--seed", "3", "--max-iter", "40",
                   "--out", str(syn)) == 0
        out = tmp_path / "ana"
        assert run("analyze", "--points", str(syn), "--m", "8",
                   "--r-max", "2", "--out", str(out)) == 0
        prof = (out / "radial_p.csv").read_text().splitlines()
        assert prof[0] == "nu,value,stderr"
        assert len(prof) > 1
        coords, g = drad.read_radial_csv(out / "pcf.csv")
        assert coords.size == int(2.0 / 0.02) + 1
        manifest = (out / "manifest.txt").read_text()
        assert "resolved_m = 8" in manifest
        assert "n_points = 64" in manifest

    def test_empty_directory_exits_1(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert run("analyze", "--points", str(empty),
                   "--out", str(tmp_path / "o")) == 1
        assert "no point-set files" in capsys.readouterr().err


@pytest.fixture()
def flat_spectrum_csv(tmp_path):
    grid = drad.RadialGrid.from_spacing(0.01, 1.2)
    path = tmp_path / "flat.csv"
    drad.write_radial_csv(path, grid.coords, np.zeros(grid.count))
    return path


class TestPredictError:
    def test_artifacts(self, tmp_path, flat_spectrum_csv):
        out = tmp_path / "pe"
        assert run("predict-error", "--spectrum", str(flat_spectrum_csv),
                   "--target", "blob:0.15", "--n-points", "256", "--m", "4",
                   "--out", str(out)) == 0
        grid_lines = (out / "error2d.csv").read_text().splitlines()
        assert grid_lines[0] == "k1,k2,value"
        assert len(grid_lines) == 1 + 81
        assert (out / "error_radial.csv").exists()
        assert "dc_value = " in (out / "manifest.txt").read_text()

    def test_filter_needs_width(self, tmp_path, flat_spectrum_csv, capsys):
        assert run("predict-error", "--spectrum", str(flat_spectrum_csv),
                   "--target", "blob:0.15", "--n-points", "256", "--m", "4",
                   "--filter-sigma-px", "0.5",
                   "--out", str(tmp_path / "x")) == 1
        assert "--filter-width" in capsys.readouterr().err


class TestRender:
    def test_full_artifact_set(self, tmp_path, capsys):
        import dswave.imaging as dim

        out = tmp_path / "r"
        assert run("render", "--image", "blob:0.2", "--pattern", "random",
                   "--spp", "1", "--width", "16", "--seed", "5",
                   "--band", "0.0:0.5", "--pixels-csv", "--reference",
                   "--out", str(out)) == 0
        img = dim.read_image(out / "image.pgm")
        assert img.shape == (16, 16)
        assert dim.read_image(out / "reference.pgm").shape == (16, 16)
        assert len((out / "pixels.csv").read_text().splitlines()) == 16
        manifest = (out / "manifest.txt").read_text()
        assert "band_energy = " in manifest
        assert "band energy" in capsys.readouterr().out

    def test_pattern_from_file(self, tmp_path):
        pts = dpt.generate_random(256, seed=1)
        path = tmp_path / "pts.txt"
        dpt.save_points(pts, path)
        out = tmp_path / "r"
        assert run("render", "--image", "zoneplate", "--pattern",
                   f"file:{path}", "--spp", "1", "--width", "16",
                   "--out", str(out)) == 0

    def test_pattern_count_mismatch_exits_1(self, tmp_path, capsys):
        pts = dpt.generate_random(100, seed=1)
        path = tmp_path / "pts.txt"
        dpt.save_points(pts, path)
        assert run("render", "--image", "zoneplate", "--pattern",
                   f"file:{path}", "--spp", "1", "--width", "16",
                   "--out", str(tmp_path / "r")) == 1
        assert "expected 256" in capsys.readouterr().err


class TestVariance:
    def test_prediction_matches_monte_carlo(self, tmp_path, flat_spectrum_csv):
        out = tmp_path / "v"
        assert run("variance", "--spectrum", str(flat_spectrum_csv),
                   "--target", "blob:0.15", "--n-points", "256",
                   "--mc", "50", "--seed", "9", "--out", str(out)) == 0
        fields = dict(
            line.split(" = ")
            for line in (out / "report.txt").read_text().splitlines()
        )
        pred = float(fields["variance"])
        mc = float(fields["monte_carlo"])
        sem = float(fields["monte_carlo_stderr"])
        assert pred > 0.0
        assert abs(mc - pred) <= 4.0 * sem  # measured z = 0.35
        assert fields["realizations"] == "50"
