"""End-to-end tests of the command-line interface: artifact formats,
embedded-config reproducibility, and sweep resumption."""
import json
import time

import numpy as np
import pytest

from ucml.cli import main, parse_grid, read_embedded_config


class TestParseGrid:
    def test_single(self):
        assert parse_grid("2.1") == [2.1]

    def test_list(self):
        assert parse_grid("2.1,2.2") == [2.1, 2.2]

    def test_range_inclusive(self):
        assert parse_grid("2.0:2.3:0.1") == pytest.approx([2.0, 2.1, 2.2, 2.3])

    def test_bad_range(self):
        import argparse
        with pytest.raises(argparse.ArgumentTypeError):
            parse_grid("2.0:1.0:0.1")


class TestSimulate:
    def test_writes_field_and_sidecar(self, tmp_path):
        out = tmp_path / "st.csv"
        assert main(["simulate", "--alpha", "0.5", "--h", "2.2",
                     "--max-time", "500", "--seed", "1",
                     "--out", str(out)]) == 0
        lines = out.read_text().splitlines()
        assert lines[0].startswith("# alpha=0.5,h=2.2,delta=0.1,seed=1")
        field = np.array([[float(v) for v in ln.split(",")]
                          for ln in lines[1:]])
        assert np.all(field >= 0)
        sidecar = json.loads((tmp_path / "st.csv.config.json").read_text())
        assert sidecar["classification"] in {"decay", "puff", "slug"}

    def test_rerun_bitwise_identical(self, tmp_path):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for out in (a, b):
            main(["simulate", "--alpha", "0.8", "--h", "2.1",
                  "--max-time", "300", "--seed", "7", "--out", str(out)])
        assert a.read_bytes() == b.read_bytes()


class TestEnsemble:
    def test_embedded_config_reproduces_file(self, tmp_path, capsys):
        out = tmp_path / "ens.csv"
        main(["ensemble", "--alpha", "0.5", "--h", "2.2", "--n", "50",
              "--max-time", "2000", "--seed", "9", "--out", str(out)])
        capsys.readouterr()
        cfg = read_embedded_config(out)
        out2 = tmp_path / "ens2.csv"
        main(["ensemble", "--alpha", str(cfg["alpha"]), "--h", str(cfg["h"]),
              "--delta", str(cfg["delta"]), "--n", str(cfg["n"]),
              "--max-time", str(cfg["max_time"]), "--seed", str(cfg["seed"]),
              "--out", str(out2)])
        capsys.readouterr()
        assert out.read_bytes() == out2.read_bytes()

    def test_summary_json_on_stdout(self, tmp_path, capsys):
        main(["ensemble", "--alpha", "0.1", "--h", "2.5", "--n", "200",
              "--max-time", "2000", "--seed", "0"])
        payload = json.loads(capsys.readouterr().out)
        assert payload["n"] == 200
        assert payload["mean_lifetime"] > 0

    @pytest.mark.parametrize("threads", ["1", "4"])
    def test_thread_flag_never_changes_output(self, tmp_path, threads):
        out = tmp_path / f"t{threads}.csv"
        main(["ensemble", "--alpha", "0.5", "--h", "2.2", "--n", "64",
              "--max-time", "2000", "--seed", "5", "--threads", threads,
              "--out", str(out)])
        ref = tmp_path / "t1.csv"
        if out != ref and ref.exists():
            assert out.read_bytes() == ref.read_bytes()


class TestThresholds:
    def test_saddle_node_on_stdout(self, capsys):
        main(["thresholds", "--delta", "0.1", "--h", "2.1"])
        payload = json.loads(capsys.readouterr().out)
        assert payload["alpha_sn"] == pytest.approx(2.844137, abs=1e-5)
        assert payload["alpha_p"]["2.1"] == pytest.approx(0.23067, abs=1e-5)

    def test_table_artifact(self, tmp_path, capsys):
        out = tmp_path / "thresholds.csv"
        main(["thresholds", "--h", "2.1,2.5", "--out", str(out)])
        capsys.readouterr()
        lines = out.read_text().splitlines()
        assert lines[1] == "h,alpha_p"
        assert len(lines) == 4


class TestPhaseDiagram:
    def run_small(self, tmp_path, resume=False):
        args = ["phase-diagram", "--alpha", "0.1,0.5", "--h", "2.2,2.5",
                "--n", "10", "--max-time", "2000", "--seed", "3",
                "--out", str(tmp_path / "pd")]
        return main(args + (["--resume"] if resume else []))

    def test_grid_complete(self, tmp_path):
        self.run_small(tmp_path)
        lines = (tmp_path / "pd" / "grid.csv").read_text().splitlines()
        assert len(lines) == 2 + 4  # config + header + 4 cells
        labels = {ln.split(",")[-1] for ln in lines[2:]}
        assert labels <= {"decay", "puff", "slug"}

    def test_resume_never_recomputes(self, tmp_path):
        self.run_small(tmp_path)
        cell = next((tmp_path / "pd" / "cells").glob("cell_*.json"))
        before = cell.read_text()
        mtime = cell.stat().st_mtime_ns
        time.sleep(0.01)
        self.run_small(tmp_path, resume=True)
        assert cell.stat().st_mtime_ns == mtime
        assert cell.read_text() == before

    def test_overlay_and_slice_written(self, tmp_path):
        self.run_small(tmp_path)
        assert (tmp_path / "pd" / "alpha_p.csv").exists()
        slice_lines = (tmp_path / "pd" / "lifetime_slice.csv").read_text() \
            .splitlines()
        assert len(slice_lines) == 2 + 2  # one h value, two alphas


class TestLifetimeScaling:
    def test_tables_and_fit(self, tmp_path):
        out = tmp_path / "ls"
        main(["lifetime-scaling", "--alpha", "0.5", "--h", "2.2,2.25,2.3",
              "--n", "300", "--max-time", "50000", "--seed", "7",
              "--out", str(out)])
        fits = json.loads((out / "scaling_fits.json").read_text())
        assert set(fits) == {"0.5"}
        assert fits["0.5"]["B"] > 0
        lines = (out / "lifetimes_alpha0.5.csv").read_text().splitlines()
        assert len(lines) == 2 + 3


class TestFitIntermittency:
    def test_report_schema(self, tmp_path, capsys):
        main(["fit-intermittency", "--h", "2.1", "--n", "40",
              "--delta-alpha", "0.02,0.05,0.1,0.2,0.3", "--seed", "2"])
        payload = json.loads(capsys.readouterr().out)
        assert set(payload) >= {"a", "nu_c", "A", "xi", "residual", "config"}
        assert len(payload["residual"]) == 5
