import json

import numpy as np
import pytest

from gramfield import cli
from gramfield.spectra import EmpiricalSpectrum, read_cdf_csv, write_cdf_csv


def base_config(tmp_path, **overrides):
    doc = {
        "mode": "centered",
        "filter2d": {"dims": 2, "entries": [[0, 0, 1.0, 0.0],
                                            [1, 0, 0.5, 0.0],
                                            [0, 1, 0.25, 0.0]]},
        "N": 16,
        "n": 16,
        "seeds": [0, 1, 2],
        "z_grid": [[0.0, 1.0], [1.0, 2.0]],
        "solver": {"grid_size": 16, "tolerance": 1e-8,
                   "max_iterations": 20000, "damping": 0.5},
        "inversion": {"eta": 1e-2, "step": 0.05, "pad": 1.0},
        "output_dir": str(tmp_path / "out"),
    }
    doc.update(overrides)
    return doc


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return path


class TestRun:
    def test_centered_artifacts_and_cross_check(self, tmp_path):
        path = write_config(tmp_path, base_config(tmp_path))
        cfg = cli.load_config(path)
        summary = cli.run_experiment(cfg)
        out = tmp_path / "out"
        for name in ("pooled_ecdf.csv", "limit_cdf.csv", "stieltjes.csv",
                     "summary.csv", "eigenvalues_seed0.csv"):
            assert (out / name).exists()
        # summary distances must reproduce exactly from the emitted files
        levy, kolmogorov = cli.compare_distributions(
            out / "pooled_ecdf.csv", out / "limit_cdf.csv")
        assert levy == summary["levy_pooled_vs_limit"]
        assert kolmogorov == summary["kolmogorov_pooled_vs_limit"]
        assert summary["bai_holds_all"] == 1

    def test_byte_identical_rerun(self, tmp_path):
        doc = base_config(tmp_path)
        path = write_config(tmp_path, doc)
        cfg = cli.load_config(path)
        cli.run_experiment(cfg)
        blobs = {p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()}
        cli.run_experiment(cli.load_config(path))
        for p in (tmp_path / "out").iterdir():
            assert p.read_bytes() == blobs[p.name]

    def test_threads_match_serial(self, tmp_path):
        doc = base_config(tmp_path)
        path = write_config(tmp_path, doc)
        cli.run_experiment(cli.load_config(path))
        serial = {p.name: p.read_bytes() for p in (tmp_path / "out").iterdir()}
        cli.run_experiment(cli.load_config(path), threads=3)
        for p in (tmp_path / "out").iterdir():
            assert p.read_bytes() == serial[p.name]

    def test_square_identity_is_delta_one(self, tmp_path):
        doc = base_config(
            tmp_path,
            mode="square_toeplitz",
            filter2d={"dims": 2, "entries": []},
            filter1d={"dims": 1, "entries": [[0, 1.0, 0.0]]})
        cfg = cli.load_config(write_config(tmp_path, doc))
        cli.run_experiment(cfg)
        ecdf = read_cdf_csv(tmp_path / "out" / "pooled_ecdf.csv")
        assert ecdf.eval(1.0) == 1.0
        assert ecdf.eval(1.0 - 1e-12) == 0.0

    def test_noncentered_mode_runs(self, tmp_path):
        doc = base_config(
            tmp_path,
            mode="noncentered_pseudodiag",
            lambda_diag=[[1.0, 0.0]] * 16)
        cfg = cli.load_config(write_config(tmp_path, doc))
        summary = cli.run_experiment(cfg)
        assert summary["kolmogorov_pooled_vs_limit"] < 0.5

    def test_real_mode_runs(self, tmp_path):
        doc = base_config(tmp_path, mode="real_case")
        cfg = cli.load_config(write_config(tmp_path, doc))
        summary = cli.run_experiment(cfg)
        assert summary["bai_holds_all"] == 1

    def test_nonconvergence_recorded_not_fatal(self, tmp_path):
        doc = base_config(
            tmp_path,
            solver={"grid_size": 16, "tolerance": 1e-14,
                    "max_iterations": 2, "damping": 0.5})
        cfg = cli.load_config(write_config(tmp_path, doc))
        summary = cli.run_experiment(cfg)
        assert summary["solver_nonconverged"] > 0
        assert (tmp_path / "out" / "limit_cdf.csv").exists()

    def test_env_var_output_dir(self, tmp_path, monkeypatch):
        doc = base_config(tmp_path)
        del doc["output_dir"]
        monkeypatch.setenv(cli.OUTPUT_DIR_ENV, str(tmp_path / "envout"))
        cfg = cli.load_config(write_config(tmp_path, doc))
        cli.run_experiment(cfg)
        assert (tmp_path / "envout" / "summary.csv").exists()


class TestConfigValidation:
    def test_unknown_mode(self, tmp_path):
        doc = base_config(tmp_path, mode="banana")
        with pytest.raises(ValueError):
            cli.load_config(write_config(tmp_path, doc))

    def test_square_needs_square(self, tmp_path):
        doc = base_config(tmp_path, mode="square_toeplitz", N=8, n=16,
                          filter1d={"dims": 1, "entries": [[0, 1.0, 0.0]]})
        with pytest.raises(ValueError):
            cli.load_config(write_config(tmp_path, doc))

    def test_wide_rectangular_rejected(self, tmp_path):
        doc = base_config(tmp_path, N=32, n=16)
        with pytest.raises(ValueError):
            cli.load_config(write_config(tmp_path, doc))

    def test_lower_half_plane_rejected(self, tmp_path):
        doc = base_config(tmp_path, z_grid=[[0.0, -1.0]])
        with pytest.raises(ValueError):
            cli.load_config(write_config(tmp_path, doc))

    def test_real_mode_needs_real_filter(self, tmp_path):
        doc = base_config(
            tmp_path, mode="real_case",
            filter2d={"dims": 2, "entries": [[0, 0, 0.0, 1.0]]})
        with pytest.raises(ValueError):
            cli.load_config(write_config(tmp_path, doc))

    def test_empty_seeds(self, tmp_path):
        doc = base_config(tmp_path, seeds=[])
        with pytest.raises(ValueError):
            cli.load_config(write_config(tmp_path, doc))


class TestCompare:
    def test_file_vs_itself(self, tmp_path):
        vals = np.array([0.1, 0.5, 0.9])
        path = tmp_path / "f.csv"
        write_cdf_csv(EmpiricalSpectrum(eigenvalues=vals, dim=3).ecdf(), path)
        levy, kolmogorov = cli.compare_distributions(path, path)
        assert levy == 0.0
        assert kolmogorov == 0.0

    def test_delta_masses(self, tmp_path):
        p0 = tmp_path / "d0.csv"
        p3 = tmp_path / "d3.csv"
        write_cdf_csv(EmpiricalSpectrum(
            eigenvalues=np.array([0.0]), dim=1).ecdf(), p0)
        write_cdf_csv(EmpiricalSpectrum(
            eigenvalues=np.array([0.3]), dim=1).ecdf(), p3)
        levy, kolmogorov = cli.compare_distributions(p0, p3)
        assert levy == pytest.approx(0.3, abs=1e-8)
        assert kolmogorov == 1.0


class TestSweepAlpha:
    def test_identity_filter_alpha_zero(self):
        from gramfield.symbols import FilterSequence2D
        h = FilterSequence2D({(0, 0): 1})
        rows = cli.sweep_alpha(h, [(8, 8), (16, 16)], [0, 1])
        assert all(r[2] == 0.0 for r in rows)

    def test_decay(self):
        from gramfield.symbols import FilterSequence2D
        h = FilterSequence2D({(0, 0): 1, (1, 1): 1})
        rows = cli.sweep_alpha(h, [(16, 16), (64, 64)], list(range(20)))
        assert rows[1][2] <= 0.5 * rows[0][2]

    def test_validation(self):
        from gramfield.symbols import FilterSequence2D
        h = FilterSequence2D({(0, 0): 1})
        with pytest.raises(ValueError):
            cli.sweep_alpha(h, [(8, 8)], [0])
        with pytest.raises(ValueError):
            cli.sweep_alpha(h, [(8, 8), (16, 16)], [])


class TestMainEntry:
    def test_run_and_compare_verbs(self, tmp_path, capsys):
        path = write_config(tmp_path, base_config(tmp_path))
        assert cli.main(["run", str(path)]) == 0
        captured = capsys.readouterr().out
        assert "kolmogorov_pooled_vs_limit" in captured
        out = tmp_path / "out"
        assert cli.main(["compare", str(out / "pooled_ecdf.csv"),
                         str(out / "pooled_ecdf.csv")]) == 0
        captured = capsys.readouterr().out
        assert captured.splitlines()[-1] == "0,0"

    def test_sweep_alpha_verb(self, tmp_path, capsys):
        doc = {
            "filter2d": {"dims": 2, "entries": [[0, 0, 1.0, 0.0],
                                                [1, 1, 1.0, 0.0]]},
            "sizes": [[16, 16], [32, 32]],
            "seeds": list(range(5)),
        }
        path = tmp_path / "sweep.json"
        path.write_text(json.dumps(doc))
        assert cli.main(["sweep-alpha", str(path)]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "N,n,mean_alpha"
        assert lines[-1] == "monotone_decreasing,1"

    def test_threads_flag(self, tmp_path):
        path = write_config(tmp_path, base_config(tmp_path))
        assert cli.main(["--threads", "2", "run", str(path)]) == 0
