"""Config parsing, dataset synthesis, experiment determinism, reporting."""

from pathlib import Path

import numpy as np
import pytest

from snnlzc.errors import ConfigError, DataError, NoResultsFoundError
from snnlzc.harness import (
    ExperimentConfig,
    TaskSpec,
    config_from_mapping,
    load_config,
    load_dataset,
    parse_config_text,
    report_tables,
    run_experiment,
    synthesize_dataset,
    write_dataset,
)
from snnlzc.learning import default_search_space


class TestConfigParser:
    def test_basic_parsing(self):
        kv = parse_config_text(
            """
            # comment
            rule = stdp
            model_kind = meta
            eta = 0.5          # trailing comment
            epochs = 2
            append_count_features = true
            search.mode = extended
            range.v_th.min = 0.5
            """
        )
        assert kv["rule"] == "stdp"
        assert kv["eta"] == 0.5
        assert kv["epochs"] == 2
        assert kv["append_count_features"] is True
        assert kv["range.v_th.min"] == 0.5

    def test_unknown_key_is_hard_error(self):
        with pytest.raises(ConfigError):
            parse_config_text("ruel = stdp\n")

    def test_duplicate_key_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("eta = 0.1\neta = 0.2\n")

    def test_bad_value_rejected(self):
        with pytest.raises(ConfigError):
            parse_config_text("epochs = soon\n")

    def test_range_override_applied(self):
        cfg = config_from_mapping(
            parse_config_text(
                "rule = stdp\nsearch.mode = extended\n"
                "range.v_th.min = 0.7\nrange.v_th.max = 1.1\n"
            )
        )
        assert cfg.search.ranges["v_th"] == (0.7, 1.1)

    def test_range_for_unsearchable_param_rejected(self):
        with pytest.raises(ConfigError):
            config_from_mapping(
                parse_config_text("search.mode = baseline\nrange.v_th.min = 0.7\n")
            )


class TestTaskSpec:
    def test_equal_rates_rejected(self):
        with pytest.raises(ConfigError):
            TaskSpec(rate_a_hz=30.0, rate_b_hz=30.0)

    def test_counts_must_be_positive(self):
        with pytest.raises(ConfigError):
            TaskSpec(train_count=0)


MINI = TaskSpec(train_count=20, val_count=10, test_count=20)


class TestSynthesis:
    def test_split_sizes_and_balance(self):
        ds = synthesize_dataset(ExperimentConfig(task=MINI, master_seed=1))
        for name, count in (("train", 20), ("val", 10), ("test", 20)):
            bits, labels = ds.split(name)
            assert bits.shape == (count, 1024)
            assert int(labels.sum()) == count // 2

    def test_zero_rate_class_is_silent(self):
        task = TaskSpec(rate_a_hz=0.0, rate_b_hz=50.0, train_count=10,
                        val_count=2, test_count=2)
        ds = synthesize_dataset(ExperimentConfig(task=task, master_seed=1))
        assert ds.train_bits[ds.train_labels == 0].sum() == 0
        assert ds.train_bits[ds.train_labels == 1].sum() > 0

    def test_rate_gap_shows_in_counts(self):
        task = TaskSpec(train_count=100, val_count=2, test_count=2)
        ds = synthesize_dataset(ExperimentConfig(task=task, master_seed=3))
        c0 = ds.train_bits[ds.train_labels == 0].sum(axis=1).mean()
        c1 = ds.train_bits[ds.train_labels == 1].sum(axis=1).mean()
        assert c1 > c0

    def test_deterministic_and_split_independent(self):
        a = synthesize_dataset(ExperimentConfig(task=MINI, master_seed=5))
        b = synthesize_dataset(ExperimentConfig(task=MINI, master_seed=5))
        np.testing.assert_array_equal(a.train_bits, b.train_bits)
        np.testing.assert_array_equal(a.test_bits, b.test_bits)
        assert not np.array_equal(a.train_bits[:10], a.test_bits[:10])

    def test_write_load_round_trip(self, tmp_path):
        ds = synthesize_dataset(ExperimentConfig(task=MINI, master_seed=5))
        write_dataset(tmp_path, ds)
        loaded = load_dataset(tmp_path)
        np.testing.assert_array_equal(loaded.train_bits, ds.train_bits)
        np.testing.assert_array_equal(loaded.val_labels, ds.val_labels)
        assert loaded.grid == ds.grid

    def test_load_missing_file_rejected(self, tmp_path):
        with pytest.raises(DataError):
            load_dataset(tmp_path)


def mini_config(out: Path, rule="stdp", mode="baseline", seed=123) -> ExperimentConfig:
    return ExperimentConfig(
        task=MINI,
        model_kind="lif",
        rule=rule,
        search=default_search_space(mode, "lif", rule, budget=2, inner_seeds=1),
        master_seed=seed,
        output_dir=out,
    )


class TestRunExperiment:
    def test_deterministic_byte_identical_csvs(self, tmp_path):
        r1 = run_experiment(mini_config(tmp_path / "a"))
        r2 = run_experiment(mini_config(tmp_path / "b"))
        assert r1.winner_params == r2.winner_params
        for name in ("results.csv", "search_trace.csv", "model.txt", "classifier.txt"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_artifacts_and_marker(self, tmp_path):
        out = tmp_path / "run"
        result = run_experiment(mini_config(out))
        assert not (out / "RUN_INCOMPLETE").exists()
        for path in result.artifacts.values():
            assert path.exists()
        assert 0.0 <= result.test_acc <= 1.0
        c = result.confusion
        assert c["c0_total"] + c["c1_total"] == MINI.test_count
        assert c["c0_correct"] + c["c1_correct"] == round(result.test_acc * MINI.test_count)

    def test_results_csv_schema(self, tmp_path):
        run_experiment(mini_config(tmp_path / "run"))
        lines = (tmp_path / "run" / "results.csv").read_text().splitlines()
        assert lines[0].startswith("model_kind,rule,search_mode,master_seed,")
        assert len(lines) == 2
        row = dict(zip(lines[0].split(","), lines[1].split(",")))
        assert row["rule"] == "stdp"
        assert row["search_mode"] == "baseline"
        assert float(row["val_acc"]) <= 1.0

    def test_search_trace_has_budget_rows(self, tmp_path):
        run_experiment(mini_config(tmp_path / "run"))
        lines = (tmp_path / "run" / "search_trace.csv").read_text().splitlines()
        assert len(lines) == 3  # header + budget(2)


class TestReportTables:
    def test_uplift_arithmetic(self, tmp_path):
        # Two hand-written results rows: uplift must be recomputed, not copied.
        header = (
            "model_kind,rule,search_mode,master_seed,rate_a_hz,rate_b_hz,n_bins,"
            "dt_ms,train_count,val_count,test_count,budget,inner_seeds,winner_n,"
            "winner_eta,winner_v_th,winner_tau_m_ms,winner_th_jump,"
            "winner_tau_adapt_ms,val_acc,test_acc,c0_correct,c0_total,"
            "c1_correct,c1_total"
        )
        base = "lif,stdp,baseline,0,20.0,50.0,1024,1.0,200,100,200,20,3,16,1.0,,,,,0.85,0.855,86,100,85,100"
        ext = "lif,stdp,extended,0,20.0,50.0,1024,1.0,200,100,200,20,3,16,1.0,0.8,15.0,,,0.96,0.965,97,100,96,100"
        for name, row in (("b", base), ("e", ext)):
            d = tmp_path / name
            d.mkdir()
            (d / "results.csv").write_text(header + "\n" + row + "\n")
        table = report_tables(tmp_path, tmp_path / "accuracy_table.csv")
        ext_row = [r for r in table if r["search_mode"] == "extended"][0]
        assert ext_row["test_acc"] == "96.50"
        assert ext_row["uplift_pp"] == "11.00"
        base_row = [r for r in table if r["search_mode"] == "baseline"][0]
        assert base_row["test_acc"] == "85.50"
        assert base_row["uplift_pp"] == ""

    def test_no_results_raises(self, tmp_path):
        with pytest.raises(NoResultsFoundError):
            report_tables(tmp_path, tmp_path / "t.csv")

    def test_incomplete_runs_skipped(self, tmp_path):
        d = tmp_path / "x"
        d.mkdir()
        (d / "results.csv").write_text("model_kind\nlif\n")
        (d / "RUN_INCOMPLETE").write_text("")
        with pytest.raises(NoResultsFoundError):
            report_tables(tmp_path, tmp_path / "t.csv")
