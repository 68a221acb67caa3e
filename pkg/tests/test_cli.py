"""CLI subcommands: the full gen-data -> train -> eval -> report chain."""

import numpy as np
import pytest

from snnlzc.cli import main


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("data")
    code = main([
        "gen-data", "--rate-a", "20", "--rate-b", "50",
        "--bins", "1024", "--dt-ms", "1",
        "--train", "20", "--val", "10", "--test", "20",
        "--seed", "11", "--out", str(out),
    ])
    assert code == 0
    return out


@pytest.fixture(scope="module")
def config_file(tmp_path_factory):
    path = tmp_path_factory.mktemp("cfg") / "exp.cfg"
    path.write_text("rule = stdp\nmodel_kind = lif\nn = 16\nmaster_seed = 11\n")
    return path


class TestGenData:
    def test_files_written(self, data_dir):
        for name in ("train.spk", "val.spk", "test.spk"):
            assert (data_dir / name).exists()
        header = (data_dir / "train.spk").read_text().splitlines()[0]
        assert header == "SPIKETRAIN v1 dt_ms=1.0 n_bins=1024"


class TestTrainEval:
    def test_train_then_eval(self, data_dir, config_file, tmp_path):
        run = tmp_path / "run"
        assert main([
            "train", "--model", "lif", "--rule", "stdp",
            "--config", str(config_file), "--data", str(data_dir),
            "--out", str(run),
        ]) == 0
        assert (run / "model.txt").exists()
        assert (run / "classifier.txt").exists()
        report = tmp_path / "eval.csv"
        assert main([
            "eval", "--model", str(run / "model.txt"),
            "--classifier", str(run / "classifier.txt"),
            "--data", str(data_dir), "--report", str(report),
        ]) == 0
        lines = report.read_text().splitlines()
        assert lines[0] == "split,count,correct,accuracy"
        assert len(lines) == 4

    def test_missing_data_exit_code_3(self, config_file, tmp_path):
        assert main([
            "train", "--model", "lif", "--rule", "stdp",
            "--config", str(config_file), "--data", str(tmp_path / "nope"),
            "--out", str(tmp_path / "out"),
        ]) == 3

    def test_bad_config_exit_code_2(self, data_dir, tmp_path):
        bad = tmp_path / "bad.cfg"
        bad.write_text("not_a_key = 1\n")
        assert main([
            "train", "--model", "lif", "--rule", "stdp",
            "--config", str(bad), "--data", str(data_dir),
            "--out", str(tmp_path / "out"),
        ]) == 2


class TestLzc:
    def test_csv_rows(self, data_dir, capsys):
        assert main(["lzc", "--in", str(data_dir / "val.spk"), "--format", "csv"]) == 0
        lines = capsys.readouterr().out.splitlines()
        assert lines[0] == "index,n,C,c"
        assert len(lines) == 11
        first = lines[1].split(",")
        assert first[0] == "0" and first[1] == "1024"
        assert int(first[2]) >= 2
        assert float(first[3]) > 0


class TestSweepReport:
    def test_sweep_then_report(self, data_dir, config_file, tmp_path):
        out_b = tmp_path / "sweep_baseline"
        assert main([
            "sweep", "--mode", "baseline", "--config", str(config_file),
            "--data", str(data_dir), "--budget", "2", "--seeds", "1",
            "--out", str(out_b),
        ]) == 0
        out_e = tmp_path / "sweep_extended"
        assert main([
            "sweep", "--mode", "extended", "--config", str(config_file),
            "--data", str(data_dir), "--budget", "2", "--seeds", "1",
            "--out", str(out_e),
        ]) == 0
        table = tmp_path / "accuracy_table.csv"
        assert main(["report", "--results", str(tmp_path), "--out", str(table)]) == 0
        lines = table.read_text().splitlines()
        assert lines[0] == "model_kind,rule,search_mode,val_acc,test_acc,uplift_pp"
        assert len(lines) == 3

    def test_sweep_determinism(self, data_dir, config_file, tmp_path):
        outs = []
        for name in ("r1", "r2"):
            out = tmp_path / name
            assert main([
                "sweep", "--mode", "baseline", "--config", str(config_file),
                "--data", str(data_dir), "--budget", "2", "--seeds", "1",
                "--out", str(out),
            ]) == 0
            outs.append((out / "results.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_report_empty_exit_code_3(self, tmp_path):
        empty = tmp_path / "none"
        empty.mkdir()
        assert main([
            "report", "--results", str(empty), "--out", str(tmp_path / "t.csv"),
        ]) == 3
