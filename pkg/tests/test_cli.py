import pandas as pd
import pytest
import yaml
from typer.testing import CliRunner

from src.adaptive_ssc.cli import app

runner = CliRunner()


@pytest.fixture()
def labeled_csv(tmp_path):
    path = tmp_path / "synthetic.csv"
    result = runner.invoke(app, [
        "synth", "--subspaces", "2", "--subspace-dim", "2", "--ambient-dim", "10",
        "--points", "10", "--seed", "4", "--out", str(path),
    ])
    assert result.exit_code == 0, result.output
    return path


@pytest.fixture()
def config_file(tmp_path, labeled_csv):
    path = tmp_path / "experiment.yaml"
    path.write_text(yaml.safe_dump({"dataset": str(labeled_csv), "k": 3, "kmeans_restarts": 3, "workers": 1}))
    return path


def test_synth_writes_labeled_rows(labeled_csv):
    table = pd.read_csv(labeled_csv, header=None)
    assert table.shape == (20, 11)
    assert sorted(table[10].unique()) == [0, 1]


def test_k_array_command(tmp_path, labeled_csv):
    out = tmp_path / "k.csv"
    result = runner.invoke(app, ["k-array", str(labeled_csv), "--k", "3", "--out", str(out)])
    assert result.exit_code == 0, result.output
    sizes = pd.read_csv(out)
    assert list(sizes.columns) == ["point", "size"]
    assert len(sizes) == 20 and sizes["size"].min() >= 1


def test_noise_command(tmp_path, labeled_csv):
    out = tmp_path / "noisy.csv"
    result = runner.invoke(app, ["noise", str(labeled_csv), "--sigma", "0.5", "--seed", "1", "--out", str(out)])
    assert result.exit_code == 0, result.output
    assert pd.read_csv(out, header=None).shape == (20, 11)


def test_noise_command_rejects_bad_sigma(tmp_path, labeled_csv):
    result = runner.invoke(app, ["noise", str(labeled_csv), "--sigma", "2", "--out", str(tmp_path / "n.csv")])
    assert result.exit_code == 1


def test_cluster_writes_reports_and_dumps(tmp_path, config_file):
    reports, dump = tmp_path / "reports", tmp_path / "dump"
    result = runner.invoke(app, [
        "cluster", "--config", str(config_file), "--trials", "2",
        "--out-dir", str(reports), "--dump-dir", str(dump),
    ])
    assert result.exit_code == 0, result.output
    assert sorted(p.name for p in reports.iterdir()) == ["omp_trial_000.json", "omp_trial_001.json"]
    assert {p.name for p in dump.iterdir()} == {"coefficients.csv", "affinity.csv", "labels.csv"}
    assert len(pd.read_csv(dump / "labels.csv", header=None)) == 20


def test_cluster_missing_dataset_fails(tmp_path):
    result = runner.invoke(app, ["cluster", "--dataset", str(tmp_path / "missing.csv")])
    assert result.exit_code == 1
    assert "Error" in result.output


def test_sweep_then_compare(tmp_path, config_file):
    out, plot, table = tmp_path / "aggregate.csv", tmp_path / "plot.csv", tmp_path / "compare.csv"
    result = runner.invoke(app, [
        "sweep", "--axis", "k", "--values", "2,3", "--config", str(config_file),
        "--out", str(out), "--plot-out", str(plot),
    ])
    assert result.exit_code == 0, result.output
    frame = pd.read_csv(out)
    assert len(frame) == 4
    assert set(frame["method"]) == {"omp", "adaptive-omp"}
    assert len(pd.read_csv(plot)) == 4 * 6

    result = runner.invoke(app, ["compare", str(out), "--out", str(table)])
    assert result.exit_code == 0, result.output
    deltas = pd.read_csv(table)
    assert len(deltas) == 2
    assert {"accr_delta", "time_ratio", "adaptive_loses"} <= set(deltas.columns)


def test_sweep_rejects_unknown_axis(tmp_path, config_file):
    result = runner.invoke(app, [
        "sweep", "--axis", "colour", "--values", "1", "--config", str(config_file),
        "--out", str(tmp_path / "a.csv"),
    ])
    assert result.exit_code == 1


def test_cluster_rejects_zero_workers(config_file):
    result = runner.invoke(app, ["cluster", "--config", str(config_file), "--workers", "0"])
    assert result.exit_code == 1
