import csv
import json

import numpy as np
import pytest

from robosnn import nn
from robosnn.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main, read_provenance
from robosnn.data import ar1_series, write_series_csv
from robosnn.experiment import PRESETS, ModelConfig

SMALL = ["--seq-size", "5", "--dense-layers", "1", "--units", "4", "--batch-size", "16", "--max-epochs", "3"]


@pytest.fixture
def dataset(tmp_path):
    path = tmp_path / "ar1.csv"
    write_series_csv(ar1_series(240, mean=10.0, seed=0), path)
    return str(path)


def values_of(path, column=0):
    rows = [l for l in open(path).read().splitlines() if l and not l.startswith("#")]
    return np.array([float(r.split(",")[column]) for r in rows[1:]])


def run(*argv):
    return main([str(a) for a in argv])


class TestPresets:
    def test_table_values(self):
        assert PRESETS == {
            "Daily_Min_Temperature": ModelConfig(30, 2, 64, 32, 0.001, 5),
            "Electricity_Load": ModelConfig(96, 3, 64, 256, 0.001, 5),
            "Monthly_Sunspots": ModelConfig(132, 3, 64, 32, 0.001, 5),
            "Daily_Gold_Price": ModelConfig(30, 2, 32, 16, 0.001, 5),
        }

    def test_preset_resolved_into_provenance(self, dataset, tmp_path):
        out = tmp_path / "run"
        assert run("train", "--dataset", dataset, "--preset", "Daily_Gold_Price", "--max-epochs", "1",
                   "--out", out) == EXIT_OK
        argv = read_provenance(out / "metrics.json")["argv"]
        for flag, value in [("--seq-size", "30"), ("--dense-layers", "2"), ("--batch-size", "16"),
                            ("--units", "32"), ("--learning-rate", "0.001"), ("--patience", "5")]:
            assert argv[argv.index(flag) + 1] == value
        net = nn.loads((out / "checkpoint.json").read_text())
        assert net.dims == [30, 32, 32, 1]


class TestTrain:
    def test_outputs_and_determinism(self, dataset, tmp_path):
        a, b = tmp_path / "a", tmp_path / "b"
        for out in (a, b):
            assert run("train", "--dataset", dataset, *SMALL, "--level", "0.1", "--out", out) == EXIT_OK
        for name in ("metrics.json", "history.csv", "checkpoint.json"):
            assert (a / name).read_bytes() == (b / name).read_bytes()
        metrics = json.loads((a / "metrics.json").read_text())
        assert set(metrics["metrics"]) == {"mae", "rmse", "mase", "n_test"}
        assert metrics["provenance"]["dataset_sha256"]

    def test_loss_from_best_params_file(self, dataset, tmp_path):
        params = tmp_path / "best.json"
        params.write_text(json.dumps({"loss": "robos:a=2,lambda=0.5,eps=0.03"}))
        out = tmp_path / "o"
        assert run("train", "--dataset", dataset, *SMALL, "--loss", f"@{params}", "--out", out) == EXIT_OK
        assert json.loads((out / "metrics.json").read_text())["loss"].startswith("robos:")

    def test_missing_dataset(self, tmp_path):
        assert run("train", "--dataset", tmp_path / "nope.csv", "--out", tmp_path / "o") == EXIT_DATA

    def test_missing_required_argument(self, tmp_path):
        assert run("train", "--out", tmp_path / "o") == EXIT_USAGE

    def test_bad_loss(self, dataset, tmp_path):
        assert run("train", "--dataset", dataset, "--loss", "quantile", "--out", tmp_path / "o") == EXIT_USAGE

    def test_bad_level(self, dataset, tmp_path):
        assert run("train", "--dataset", dataset, *SMALL, "--level", "0.7", "--out", tmp_path / "o") == EXIT_USAGE

    def test_no_command(self):
        assert main([]) == EXIT_USAGE


class TestSweep:
    def test_cardinality(self, dataset, tmp_path):
        out = tmp_path / "sweep"
        assert run("sweep", "--dataset", dataset, *SMALL, "--out", out) == EXIT_OK
        cells = [l for l in (out / "cells.csv").read_text().splitlines() if not l.startswith("#")]
        assert len(cells) == 1 + 25
        rows = list(csv.reader(l for l in (out / "results.csv").read_text().splitlines() if not l.startswith("#")))
        totals = [r for r in rows if r[1] == "Total Avg."]
        assert len(totals) == 3
        header = rows[0]
        assert len(header) - 3 == 5
        # five Total Avg. values per metric, one per loss
        assert all(len(r) - 3 == 5 for r in totals)
        assert json.loads((out / "summary.json").read_text())["cells"] == 25

    def test_total_average_is_mean_of_levels(self, dataset, tmp_path):
        out = tmp_path / "sweep"
        assert run("sweep", "--dataset", dataset, *SMALL, "--loss", "mae", "--loss", "robos",
                   "--level", "0", "--level", "0.2", "--out", out) == EXIT_OK
        rows = list(csv.reader(l for l in (out / "results.csv").read_text().splitlines() if not l.startswith("#")))
        mae_rows = [r for r in rows[1:] if r[2] == "mae"]
        per_level = np.array([[float(v) for v in r[3:]] for r in mae_rows if r[1] != "Total Avg."])
        total = [float(v) for v in next(r for r in mae_rows if r[1] == "Total Avg.")[3:]]
        np.testing.assert_allclose(total, per_level.mean(axis=0), rtol=1e-14)
        table = (out / "results.txt").read_text()
        assert "Total Avg." in table and "RoBoS-NN" in table and "MAE-NN" in table

    def test_parallel_matches_serial(self, dataset, tmp_path):
        args = [*SMALL, "--loss", "mse", "--loss", "logcosh", "--level", "0.05", "--seed", "0", "--seed", "1"]
        assert run("sweep", "--dataset", dataset, *args, "--out", tmp_path / "s") == EXIT_OK
        assert run("sweep", "--dataset", dataset, *args, "--jobs", "2", "--out", tmp_path / "p") == EXIT_OK
        assert (tmp_path / "s" / "results.csv").read_bytes() == (tmp_path / "p" / "results.csv").read_bytes()

    def test_failed_cells_reported(self, tmp_path):
        path = tmp_path / "short.csv"
        write_series_csv(ar1_series(30, seed=0), path)
        # 25 windows leave 20 for training; batch 32 cannot be filled
        out = tmp_path / "o"
        rc = run("sweep", "--dataset", path, "--seq-size", "5", "--batch-size", "32", "--max-epochs", "1",
                 "--loss", "mse", "--level", "0", "--out", out)
        assert rc == EXIT_DATA
        assert json.loads((out / "summary.json").read_text())["failed"]


class TestHpo:
    def test_single_random_trial(self, dataset, tmp_path):
        out = tmp_path / "h"
        assert run("hpo", "--dataset", dataset, *SMALL, "--strategy", "random", "--trials", "1",
                   "--out", out) == EXIT_OK
        lines = [l for l in (out / "trials.csv").read_text().splitlines() if not l.startswith("#")]
        assert len(lines) == 2
        best = json.loads((out / "best_params.json").read_text())
        assert best["best"]["trial"] == 0
        assert best["loss"].startswith("robos:")

    def test_tpe_needs_warmup(self, dataset, tmp_path):
        assert run("hpo", "--dataset", dataset, *SMALL, "--trials", "3", "--out", tmp_path / "h") == EXIT_USAGE


class TestProfile:
    def test_single_square(self, tmp_path):
        assert run("profile", "--loss", "mse", "--range", "-2", "2", "--points", "5", "--out", tmp_path) == EXIT_OK
        lines = [l for l in (tmp_path / "square.csv").read_text().splitlines() if not l.startswith("#")]
        assert lines[0] == "r,value,grad"
        assert len(lines) == 6

    def test_families(self, tmp_path):
        assert run("profile", "--families", "--range", "-20", "20", "--out", tmp_path) == EXIT_OK
        lam_files = sorted(tmp_path.glob("robos_a1_lambda*_eps0.01.csv"))
        assert len(lam_files) == 3
        for f in lam_files:
            lam = float(f.name.split("lambda")[1].split("_")[0])
            vals = values_of(f, column=1)
            assert vals.max() < lam
        assert len(list(tmp_path.glob("robos_a*_lambda1_*.csv"))) == 4

    def test_empty(self, tmp_path):
        assert run("profile", "--out", tmp_path) == EXIT_USAGE


class TestBound:
    def test_zero_weight_checkpoint(self, dataset, tmp_path):
        net = nn.Network([nn.DenseLayer(np.zeros((4, 5)), np.zeros(4), nn.RELU),
                          nn.DenseLayer(np.zeros((1, 4)), np.zeros(1), nn.IDENTITY)])
        ckpt = tmp_path / "c.json"
        ckpt.write_text(nn.dumps(net))
        out = tmp_path / "b"
        assert run("bound", "--checkpoint", ckpt, "--dataset", dataset, "--loss", "robos",
                   "--eps-conf", "0.05", "--out", out) == EXIT_OK
        doc = json.loads((out / "bound.json").read_text())
        n = (240 - 5) * 4 // 5
        assert doc["n"] == n and doc["d"] == 2 and doc["m_f"] == [0.0, 0.0]
        assert doc["bound"] == pytest.approx(np.sqrt(8 * np.log(20) / n), rel=1e-14)
        assert doc["eps_conf"] == 0.05

    def test_from_trained_checkpoint(self, dataset, tmp_path):
        assert run("train", "--dataset", dataset, *SMALL, "--out", tmp_path / "t") == EXIT_OK
        assert run("bound", "--checkpoint", tmp_path / "t" / "checkpoint.json") == EXIT_OK

    def test_eps_domain(self, dataset, tmp_path):
        assert run("train", "--dataset", dataset, *SMALL, "--out", tmp_path / "t") == EXIT_OK
        assert run("bound", "--checkpoint", tmp_path / "t" / "checkpoint.json", "--eps-conf", "2") == EXIT_USAGE


class TestInjectAndReplay:
    def test_inject(self, dataset, tmp_path):
        out = tmp_path / "dirty.csv"
        assert run("inject", "--dataset", dataset, "--seq-size", "5", "--level", "0.2", "--out", out) == EXIT_OK
        clean, dirty = values_of(dataset), values_of(out)
        n_train = 5 + (240 - 5) * 4 // 5
        assert np.count_nonzero(clean != dirty) == int(0.2 * n_train)
        np.testing.assert_array_equal(clean[n_train:], dirty[n_train:])

    def test_replay_reproduces_bytes(self, dataset, tmp_path):
        assert run("train", "--dataset", dataset, *SMALL, "--level", "0.05", "--seed", "3",
                   "--out", tmp_path / "a") == EXIT_OK
        assert run("replay", tmp_path / "a" / "metrics.json", "--out", tmp_path / "b") == EXIT_OK
        for name in ("metrics.json", "history.csv", "checkpoint.json"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_replay_detects_changed_dataset(self, dataset, tmp_path):
        assert run("train", "--dataset", dataset, *SMALL, "--out", tmp_path / "a") == EXIT_OK
        write_series_csv(ar1_series(240, seed=99), dataset)
        assert run("replay", tmp_path / "a" / "metrics.json", "--out", tmp_path / "b") == EXIT_DATA
