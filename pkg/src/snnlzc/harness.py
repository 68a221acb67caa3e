"""Experiment orchestration: dataset synthesis, search, persistence, reporting.

The reproducible path from a flat ``key = value`` config file to an accuracy
table.  Every random draw in an experiment comes from a stream derived from
``(master_seed, stream_id)`` with a fixed stream-id allocation, so the whole
TrialResult is a pure function of the config.

Stream-id allocation:

====================  =========================================
stream id             purpose
====================  =========================================
1 / 2 / 3             train / validation / test data synthesis
10                    candidate sampling for the random search
1000 + 64*c + 2*s     candidate c, inner seed s: weight init
1000 + 64*c + 2*s+1   candidate c, inner seed s: data shuffle
====================  =========================================

The final model reuses the winning candidate's best inner-seed streams, so
the model evaluated on the test split is exactly the one validated during
the search.
"""

from __future__ import annotations

import csv
import os
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping

import numpy as np

from .classifier import (
    CentroidClassifier,
    accuracy,
    fit,
    predict_batch,
    write_classifier,
)
from .core import (
    SeedSpec,
    SpikeTrain,
    TimeGrid,
    derive_rng,
    format_float,
    read_spike_trains,
    write_spike_trains,
)
from .encoding import PoissonSpec, demux_bits, generate_poisson
from .errors import ConfigError, DataError, NoResultsFoundError
from .learning import (
    BpConfig,
    SearchOutcome,
    SearchSpace,
    StdpConfig,
    TempotronConfig,
    bp_train,
    default_search_space,
    hyper_search,
    stdp_train,
    tempotron_train,
)
from .network import NetworkModel, forward, init_model, output_features, write_model
from .neuron import LifParams, MetaParams

__all__ = [
    "TaskSpec",
    "ExperimentConfig",
    "TrialResult",
    "Dataset",
    "parse_config_text",
    "load_config",
    "synthesize_dataset",
    "write_dataset",
    "load_dataset",
    "ExperimentRunner",
    "run_experiment",
    "report_tables",
]

# Stream-id allocation (see module docstring).
STREAM_TRAIN = 1
STREAM_VAL = 2
STREAM_TEST = 3
STREAM_SEARCH = 10
STREAM_CANDIDATE_BASE = 1000
STREAM_CANDIDATE_STRIDE = 64

_RULES = ("bp", "stdp", "tempotron")
_MODEL_KINDS = ("lif", "meta")
_DEFAULT_EPOCHS = {"bp": 3, "stdp": 1, "tempotron": 3}
_DEFAULT_ETA = {"bp": 0.2, "stdp": 1.0, "tempotron": 0.05}

# Fixed (non-searched) strength of the input-average modulation of the
# membrane time constant in the adaptive model.
META_TAU_MOD_GAIN = 0.1


@dataclass(frozen=True)
class TaskSpec:
    """The two-class Poisson discrimination task."""

    rate_a_hz: float = 20.0
    rate_b_hz: float = 50.0
    n_bins: int = 1024
    dt_ms: float = 1.0
    train_count: int = 200
    val_count: int = 100
    test_count: int = 200

    def __post_init__(self) -> None:
        if self.rate_a_hz == self.rate_b_hz:
            raise ConfigError("rate_a_hz and rate_b_hz must differ")
        if min(self.rate_a_hz, self.rate_b_hz) < 0:
            raise ConfigError("rates must be >= 0")
        for name in ("train_count", "val_count", "test_count"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1")

    @property
    def grid(self) -> TimeGrid:
        return TimeGrid(dt_ms=self.dt_ms, n_bins=self.n_bins)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce one experiment bit-for-bit."""

    task: TaskSpec = field(default_factory=TaskSpec)
    model_kind: str = "lif"
    rule: str = "bp"
    search: SearchSpace | None = None
    master_seed: int = 0
    output_dir: Path | None = None
    epochs: int | None = None  # None -> per-rule default
    single_n: int = 16
    single_eta: float | None = None  # None -> per-rule default
    stdp_base: StdpConfig = field(default_factory=StdpConfig)
    tempotron_tau_ms: float = 20.0
    tempotron_tau_s_ms: float | None = None
    surrogate_width: float | None = None
    append_count_features: bool = False

    def __post_init__(self) -> None:
        if self.rule not in _RULES:
            raise ConfigError(f"unknown rule {self.rule!r}")
        if self.model_kind not in _MODEL_KINDS:
            raise ConfigError(f"unknown model_kind {self.model_kind!r}")
        if self.epochs is not None and self.epochs < 1:
            raise ConfigError("epochs must be >= 1")
        if self.task.n_bins % self.single_n != 0:
            raise ConfigError(f"n={self.single_n} must divide n_bins={self.task.n_bins}")

    @property
    def rule_epochs(self) -> int:
        return self.epochs if self.epochs is not None else _DEFAULT_EPOCHS[self.rule]

    @property
    def rule_eta(self) -> float:
        return self.single_eta if self.single_eta is not None else _DEFAULT_ETA[self.rule]


@dataclass(frozen=True)
class TrialResult:
    """Outcome of one experiment: winner, accuracies, artifact locations."""

    config: ExperimentConfig
    winner_params: dict[str, float]
    val_acc: float
    test_acc: float
    confusion: dict[str, int]  # per-class correct/total counts
    wall_seconds: float
    artifacts: dict[str, Path]
    search_outcome: SearchOutcome | None = None


@dataclass(frozen=True)
class Dataset:
    """Balanced two-class splits of labeled binary sequences."""

    grid: TimeGrid
    train_bits: np.ndarray
    train_labels: np.ndarray
    val_bits: np.ndarray
    val_labels: np.ndarray
    test_bits: np.ndarray
    test_labels: np.ndarray

    def split(self, name: str) -> tuple[np.ndarray, np.ndarray]:
        return getattr(self, f"{name}_bits"), getattr(self, f"{name}_labels")


# ---------------------------------------------------------------------------
# Config file parsing


_SCALAR_KEYS = {
    "rule": str,
    "model_kind": str,
    "n": int,
    "eta": float,
    "epochs": int,
    "master_seed": int,
    "rate_a_hz": float,
    "rate_b_hz": float,
    "n_bins": int,
    "dt_ms": float,
    "train_count": int,
    "val_count": int,
    "test_count": int,
    "a_plus": float,
    "a_minus": float,
    "tau_plus_ms": float,
    "tau_minus_ms": float,
    "w_min": float,
    "w_max": float,
    "tau_ms": float,
    "tau_s_ms": float,
    "surrogate_width": float,
    "append_count_features": bool,
    "search.mode": str,
    "search.budget": int,
    "search.inner_seeds": int,
    "search.n_choices": str,
}

_RANGE_PARAMS = ("eta", "v_th", "tau_m_ms", "th_jump", "tau_adapt_ms")


def _parse_bool(raw: str) -> bool:
    if raw.lower() in ("true", "1", "yes", "on"):
        return True
    if raw.lower() in ("false", "0", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {raw!r}")


def parse_config_text(text: str, source: str = "<config>") -> dict[str, object]:
    """Parse flat ``key = value`` lines; unknown keys are a hard error."""
    out: dict[str, object] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        if key in _SCALAR_KEYS:
            kind = _SCALAR_KEYS[key]
            try:
                out[key] = _parse_bool(value) if kind is bool else kind(value)
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
            continue
        parts = key.split(".")
        if (
            len(parts) == 3
            and parts[0] == "range"
            and parts[1] in _RANGE_PARAMS
            and parts[2] in ("min", "max")
        ):
            try:
                out[key] = float(value)
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
            continue
        raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
    return out


def _build_search_space(kv: Mapping[str, object], model_kind: str, rule: str) -> SearchSpace | None:
    mode = kv.get("search.mode")
    if mode is None:
        return None
    space = default_search_space(
        str(mode),
        model_kind,
        rule,
        budget=int(kv.get("search.budget", 20)),
        inner_seeds=int(kv.get("search.inner_seeds", 3)),
    )
    ranges = dict(space.ranges)
    for name in _RANGE_PARAMS:
        lo_key, hi_key = f"range.{name}.min", f"range.{name}.max"
        if lo_key in kv or hi_key in kv:
            if name not in ranges:
                raise ConfigError(f"range for {name!r} is not searchable in {mode} mode")
            lo = float(kv.get(lo_key, ranges[name][0]))
            hi = float(kv.get(hi_key, ranges[name][1]))
            ranges[name] = (lo, hi)
    n_choices = space.n_choices
    if "search.n_choices" in kv:
        try:
            n_choices = tuple(int(v) for v in str(kv["search.n_choices"]).split(","))
        except ValueError as exc:
            raise ConfigError(f"bad search.n_choices: {exc}") from exc
    return replace(space, ranges=ranges, n_choices=n_choices)


def config_from_mapping(
    kv: Mapping[str, object], output_dir: Path | None = None
) -> ExperimentConfig:
    """Build an ExperimentConfig from parsed key/value pairs."""
    task = TaskSpec(
        rate_a_hz=float(kv.get("rate_a_hz", 20.0)),
        rate_b_hz=float(kv.get("rate_b_hz", 50.0)),
        n_bins=int(kv.get("n_bins", 1024)),
        dt_ms=float(kv.get("dt_ms", 1.0)),
        train_count=int(kv.get("train_count", 200)),
        val_count=int(kv.get("val_count", 100)),
        test_count=int(kv.get("test_count", 200)),
    )
    rule = str(kv.get("rule", "bp"))
    model_kind = str(kv.get("model_kind", "lif"))
    stdp_base = StdpConfig(
        a_plus=float(kv.get("a_plus", 0.01)),
        a_minus=float(kv.get("a_minus", 0.012)),
        tau_plus_ms=float(kv.get("tau_plus_ms", 20.0)),
        tau_minus_ms=float(kv.get("tau_minus_ms", 20.0)),
        w_min=float(kv.get("w_min", 0.0)),
        w_max=float(kv.get("w_max", 1.0)),
    )
    return ExperimentConfig(
        task=task,
        model_kind=model_kind,
        rule=rule,
        search=_build_search_space(kv, model_kind, rule),
        master_seed=int(kv.get("master_seed", 0)),
        output_dir=output_dir,
        epochs=int(kv["epochs"]) if "epochs" in kv else None,
        single_n=int(kv.get("n", 16)),
        single_eta=float(kv["eta"]) if "eta" in kv else None,
        stdp_base=stdp_base,
        tempotron_tau_ms=float(kv.get("tau_ms", 20.0)),
        tempotron_tau_s_ms=float(kv["tau_s_ms"]) if "tau_s_ms" in kv else None,
        surrogate_width=float(kv["surrogate_width"]) if "surrogate_width" in kv else None,
        append_count_features=bool(kv.get("append_count_features", False)),
    )


def load_config(path: str | Path, output_dir: Path | None = None) -> ExperimentConfig:
    return config_from_mapping(
        parse_config_text(Path(path).read_text(), source=str(path)), output_dir
    )


# ---------------------------------------------------------------------------
# Dataset synthesis and storage


def _synthesize_split(
    task: TaskSpec, count: int, stream_id: int, master_seed: int
) -> tuple[np.ndarray, np.ndarray]:
    rng = derive_rng(SeedSpec(master_seed, stream_id))
    grid = task.grid
    spec_a = PoissonSpec(task.rate_a_hz, grid)
    spec_b = PoissonSpec(task.rate_b_hz, grid)
    bits = np.empty((count, grid.n_bins), dtype=np.uint8)
    labels = np.arange(count, dtype=np.int64) % 2
    for i in range(count):
        spec = spec_a if labels[i] == 0 else spec_b
        bits[i] = generate_poisson(spec, rng).bits
    return bits, labels


def synthesize_dataset(cfg: ExperimentConfig) -> Dataset:
    """Draw the three balanced splits, each from its own random stream.

    Class 0 sequences come from the ``rate_a_hz`` Poisson generator, class 1
    from ``rate_b_hz``.  Labels alternate 0, 1, 0, 1, ... within each split,
    so even counts give an exact 50/50 balance.
    """
    task = cfg.task
    seed = cfg.master_seed
    train = _synthesize_split(task, task.train_count, STREAM_TRAIN, seed)
    val = _synthesize_split(task, task.val_count, STREAM_VAL, seed)
    test = _synthesize_split(task, task.test_count, STREAM_TEST, seed)
    return Dataset(task.grid, train[0], train[1], val[0], val[1], test[0], test[1])


_SPLIT_FILES = {"train": "train.spk", "val": "val.spk", "test": "test.spk"}


def write_dataset(out_dir: str | Path, ds: Dataset) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, fname in _SPLIT_FILES.items():
        bits, labels = ds.split(name)
        trains = [SpikeTrain(ds.grid, row) for row in bits]
        write_spike_trains(out / fname, trains, labels=list(labels))


def load_dataset(data_dir: str | Path) -> Dataset:
    data = Path(data_dir)
    parts = {}
    grid = None
    for name, fname in _SPLIT_FILES.items():
        path = data / fname
        if not path.exists():
            raise DataError(f"missing dataset file {path}")
        trains, labels = read_spike_trains(path)
        if labels is None:
            raise DataError(f"{path}: dataset files must carry labels")
        if grid is None:
            grid = trains[0].grid
        elif trains[0].grid != grid:
            raise DataError(f"{path}: splits disagree on the time grid")
        parts[name] = (
            np.stack([t.bits for t in trains]),
            np.asarray(labels, dtype=np.int64),
        )
    return Dataset(
        grid,
        parts["train"][0], parts["train"][1],
        parts["val"][0], parts["val"][1],
        parts["test"][0], parts["test"][1],
    )


# ---------------------------------------------------------------------------
# Candidate evaluation pipeline


def _layer_params(cfg: ExperimentConfig, overrides: Mapping[str, float]):
    base = LifParams(
        tau_m_ms=float(overrides.get("tau_m_ms", 20.0)),
        v_th=float(overrides.get("v_th", 1.0)),
    )
    if cfg.model_kind == "lif":
        return base
    return MetaParams(
        base=base,
        th_jump=float(overrides.get("th_jump", 0.2)),
        tau_adapt_ms=float(overrides.get("tau_adapt_ms", 50.0)),
        tau_mod_gain=META_TAU_MOD_GAIN,
    )


class ExperimentRunner:
    """Shared state for all candidate evaluations of one experiment.

    Demultiplexed inputs are cached per (split, n) since every candidate
    with the same neuron count sees identical data.  The test split is
    demultiplexed only inside :meth:`final_scores`, once, for the winner.
    """

    def __init__(self, cfg: ExperimentConfig, dataset: Dataset):
        if cfg.task.grid != dataset.grid:
            raise DataError("dataset grid does not match the experiment task")
        self.cfg = cfg
        self.dataset = dataset
        self._demux: dict[tuple[str, int], np.ndarray] = {}

    def _inputs(self, split: str, n: int) -> np.ndarray:
        key = (split, n)
        if key not in self._demux:
            bits, _ = self.dataset.split(split)
            self._demux[key] = np.ascontiguousarray(
                np.stack([demux_bits(row, n) for row in bits])
            )
        return self._demux[key]

    def _grid_for(self, n: int) -> TimeGrid:
        n_bins = self.cfg.task.n_bins
        if n_bins % n != 0:
            raise ConfigError(f"n={n} does not divide n_bins={n_bins}")
        return TimeGrid(dt_ms=self.cfg.task.dt_ms, n_bins=n_bins // n)

    def train_candidate(
        self, params: Mapping[str, float], init_stream: int, shuffle_stream: int
    ) -> tuple[NetworkModel, CentroidClassifier]:
        """Train one model per the experiment's rule and fit its readout."""
        cfg = self.cfg
        n = int(params["n"])
        eta = float(params["eta"])
        grid = self._grid_for(n)
        layer_params = _layer_params(cfg, params)
        rng_init = derive_rng(SeedSpec(cfg.master_seed, init_stream))
        rng_shuffle = derive_rng(SeedSpec(cfg.master_seed, shuffle_stream))
        w_max = cfg.stdp_base.w_max if cfg.rule == "stdp" else None
        model = init_model(
            n, cfg.model_kind, grid, rng_init, layer_params, layer_params, w_max=w_max
        )
        train_x = self._inputs("train", n)
        train_y = self.dataset.train_labels
        epochs = cfg.rule_epochs
        if cfg.rule == "bp":
            bp_cfg = BpConfig(
                eta=eta,
                epochs=epochs,
                surrogate_width=cfg.surrogate_width,
                learn_intrinsic=(cfg.search is not None and cfg.search.mode == "extended"),
            )
            model, _ = bp_train(model, train_x, train_y, bp_cfg, rng_shuffle)
        elif cfg.rule == "stdp":
            stdp_cfg = replace(cfg.stdp_base.scaled(eta), epochs=epochs)
            model = stdp_train(model, train_x, stdp_cfg, rng_shuffle)
        else:
            t_cfg = TempotronConfig(
                eta=eta,
                tau_ms=cfg.tempotron_tau_ms,
                tau_s_ms=cfg.tempotron_tau_s_ms,
                epochs=epochs,
            )
            model = tempotron_train(model, train_x, train_y, t_cfg, rng_shuffle)
        feats = self._features(model, train_x)
        clf = fit(X=feats, y=train_y)
        return model, clf

    def _features(self, model: NetworkModel, inputs: np.ndarray) -> np.ndarray:
        rows = []
        for sample in inputs:
            trace = forward(model, sample)
            f = output_features(trace)
            if self.cfg.append_count_features:
                counts = trace.output_spikes.mean(axis=1)
                f = np.concatenate([f, counts])
            rows.append(f)
        return np.array(rows)

    def score(
        self, model: NetworkModel, clf: CentroidClassifier, split: str, n: int
    ) -> float:
        feats = self._features(model, self._inputs(split, n))
        _, labels = self.dataset.split(split)
        return accuracy(clf, X=feats, y=labels)

    def evaluate(self, cand: int, params: Mapping[str, float], inner_seed: int) -> float:
        """Validation accuracy of one candidate: the search objective."""
        base = STREAM_CANDIDATE_BASE + STREAM_CANDIDATE_STRIDE * cand + 2 * inner_seed
        model, clf = self.train_candidate(params, base, base + 1)
        return self.score(model, clf, "val", int(params["n"]))

    def final_scores(
        self, params: Mapping[str, float], winner_index: int, inner_seed: int
    ) -> tuple[NetworkModel, CentroidClassifier, float, dict[str, int]]:
        """Reproduce the winner's validated training run; touch test once.

        The final model is retrained with the exact streams of the winner's
        best inner seed, so the model whose test accuracy is reported is the
        same model that earned the validation score — a fresh, unvalidated
        init can occasionally land in a degenerate training basin even when
        every searched seed trained fine.
        """
        base = (
            STREAM_CANDIDATE_BASE
            + STREAM_CANDIDATE_STRIDE * winner_index
            + 2 * inner_seed
        )
        model, clf = self.train_candidate(params, base, base + 1)
        n = int(params["n"])
        feats = self._features(model, self._inputs("test", n))
        labels = self.dataset.test_labels
        pred = predict_batch(clf, feats)
        confusion = {}
        for c in (0, 1):
            mask = labels == c
            confusion[f"c{c}_correct"] = int(np.sum(pred[mask] == c))
            confusion[f"c{c}_total"] = int(np.sum(mask))
        test_acc = float(np.mean(pred == labels))
        return model, clf, test_acc, confusion


# ---------------------------------------------------------------------------
# Experiment driver and persistence


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


_WINNER_PARAM_COLS = ("n", "eta", "v_th", "tau_m_ms", "th_jump", "tau_adapt_ms")

_RESULT_COLUMNS = (
    "model_kind", "rule", "search_mode", "master_seed",
    "rate_a_hz", "rate_b_hz", "n_bins", "dt_ms",
    "train_count", "val_count", "test_count", "budget", "inner_seeds",
    "winner_n", "winner_eta", "winner_v_th", "winner_tau_m_ms",
    "winner_th_jump", "winner_tau_adapt_ms",
    "val_acc", "test_acc",
    "c0_correct", "c0_total", "c1_correct", "c1_total",
)


def _fmt(value) -> str:
    if isinstance(value, float):
        return format_float(value)
    return str(value)


def _results_csv_text(cfg: ExperimentConfig, result: TrialResult) -> str:
    task = cfg.task
    row = {
        "model_kind": cfg.model_kind,
        "rule": cfg.rule,
        "search_mode": cfg.search.mode if cfg.search else "none",
        "master_seed": cfg.master_seed,
        "rate_a_hz": task.rate_a_hz,
        "rate_b_hz": task.rate_b_hz,
        "n_bins": task.n_bins,
        "dt_ms": task.dt_ms,
        "train_count": task.train_count,
        "val_count": task.val_count,
        "test_count": task.test_count,
        "budget": cfg.search.budget if cfg.search else "",
        "inner_seeds": cfg.search.inner_seeds if cfg.search else "",
        "val_acc": result.val_acc,
        "test_acc": result.test_acc,
        **result.confusion,
    }
    for name in _WINNER_PARAM_COLS:
        row[f"winner_{name}"] = result.winner_params.get(name, "")
    lines = [",".join(_RESULT_COLUMNS)]
    lines.append(",".join(_fmt(row[c]) for c in _RESULT_COLUMNS))
    return "\n".join(lines) + "\n"


def _search_trace_csv_text(outcome: SearchOutcome) -> str:
    cols = ("index",) + _WINNER_PARAM_COLS + ("score",)
    lines = [",".join(cols)]
    for i, (cand, score) in enumerate(zip(outcome.candidates, outcome.scores)):
        vals = [str(i)]
        vals += [_fmt(cand[p]) if p in cand else "" for p in _WINNER_PARAM_COLS]
        vals.append(_fmt(score))
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"


def run_experiment(cfg: ExperimentConfig, dataset: Dataset | None = None) -> TrialResult:
    """Synthesize data, search, rebuild the winning model, evaluate on test.

    Persists ``model.txt``, ``classifier.txt``, ``results.csv``, and
    ``search_trace.csv`` into ``cfg.output_dir`` (atomically, via
    temp-file-then-rename).  A ``RUN_INCOMPLETE`` marker exists while the
    experiment is in flight and stays behind after a failure, so a
    results.csv on disk is always complete.
    """
    if cfg.output_dir is None:
        raise ConfigError("run_experiment needs an output_dir")
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    marker = out / "RUN_INCOMPLETE"
    marker.write_text("experiment in progress or failed\n")
    started = time.perf_counter()

    if dataset is None:
        dataset = synthesize_dataset(cfg)
    runner = ExperimentRunner(cfg, dataset)

    search = cfg.search
    if search is None:
        # Degenerate single-candidate "search": train at the configured
        # (n, eta) so the plain `train` path reuses the same machinery.
        eta = cfg.rule_eta
        search = SearchSpace(
            mode="baseline",
            ranges={"eta": (eta, eta)},
            n_choices=(cfg.single_n,),
            budget=1,
            inner_seeds=1,
        )

    rng = derive_rng(SeedSpec(cfg.master_seed, STREAM_SEARCH))
    outcome = hyper_search(search, runner.evaluate, rng)
    winner = dict(outcome.winner_params)

    # Best inner seed of the winner (ties break toward the lowest seed);
    # a winner with no per-seed scores (all candidates failed) falls back
    # to seed 0.
    winner_seed_scores = (
        outcome.seed_scores[outcome.winner_index] if outcome.seed_scores else ()
    )
    best_seed = (
        int(np.argmax(winner_seed_scores)) if winner_seed_scores else 0
    )
    model, clf, test_acc, confusion = runner.final_scores(
        winner, outcome.winner_index, best_seed
    )

    artifacts = {
        "model": out / "model.txt",
        "classifier": out / "classifier.txt",
        "results": out / "results.csv",
        "search_trace": out / "search_trace.csv",
    }
    result = TrialResult(
        config=cfg,
        winner_params=winner,
        val_acc=outcome.winner_score,
        test_acc=test_acc,
        confusion=confusion,
        wall_seconds=time.perf_counter() - started,
        artifacts=artifacts,
        search_outcome=outcome,
    )
    write_model(artifacts["model"], model)
    write_classifier(artifacts["classifier"], clf)
    _atomic_write_text(artifacts["results"], _results_csv_text(cfg, result))
    _atomic_write_text(artifacts["search_trace"], _search_trace_csv_text(outcome))
    # Timing is deliberately kept out of the CSVs so reruns are
    # byte-identical; it lands in a sidecar file instead.
    (out / "timing.txt").write_text(f"wall_seconds={result.wall_seconds:.3f}\n")
    marker.unlink()
    return result


# ---------------------------------------------------------------------------
# Reporting


def _pct(x: float) -> str:
    return f"{x * 100.0:.2f}"


def report_tables(
    results_dir: str | Path, out_path: str | Path, plot_dir: str | Path | None = None
) -> list[dict[str, str]]:
    """Aggregate all results.csv files under ``results_dir`` into one table.

    Rows sharing (model_kind, rule, search_mode) are averaged over master
    seeds.  ``uplift_pp`` on an extended row is its mean test accuracy minus
    the matching baseline row's, in percentage points.
    """
    results_dir = Path(results_dir)
    rows = []
    for path in sorted(results_dir.rglob("results.csv")):
        if (path.parent / "RUN_INCOMPLETE").exists():
            continue
        with open(path, newline="") as fh:
            rows.extend(csv.DictReader(fh))
    if not rows:
        raise NoResultsFoundError(f"no completed results.csv under {results_dir}")

    cells: dict[tuple[str, str, str], list[dict[str, str]]] = {}
    for row in rows:
        key = (row["model_kind"], row["rule"], row["search_mode"])
        cells.setdefault(key, []).append(row)

    means = {
        key: (
            float(np.mean([float(r["val_acc"]) for r in group])),
            float(np.mean([float(r["test_acc"]) for r in group])),
        )
        for key, group in cells.items()
    }
    table = []
    for key in sorted(means):
        model_kind, rule, mode = key
        val_acc, test_acc = means[key]
        uplift = ""
        if mode == "extended" and (model_kind, rule, "baseline") in means:
            base_test = means[(model_kind, rule, "baseline")][1]
            uplift = f"{(test_acc - base_test) * 100.0:.2f}"
        table.append(
            {
                "model_kind": model_kind,
                "rule": rule,
                "search_mode": mode,
                "val_acc": _pct(val_acc),
                "test_acc": _pct(test_acc),
                "uplift_pp": uplift,
            }
        )
    cols = ("model_kind", "rule", "search_mode", "val_acc", "test_acc", "uplift_pp")
    lines = [",".join(cols)]
    lines += [",".join(row[c] for c in cols) for row in table]
    _atomic_write_text(Path(out_path), "\n".join(lines) + "\n")
    if plot_dir is not None:
        _write_plots(table, Path(plot_dir))
    return table


def _write_plots(table: list[dict[str, str]], plot_dir: Path) -> None:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plot_dir.mkdir(parents=True, exist_ok=True)
    for model_kind in sorted({row["model_kind"] for row in table}):
        sub = [r for r in table if r["model_kind"] == model_kind]
        rules = sorted({r["rule"] for r in sub})
        modes = ("baseline", "extended")
        fig, ax = plt.subplots(figsize=(6, 4))
        width = 0.35
        x = np.arange(len(rules))
        for k, mode in enumerate(modes):
            vals = []
            for rule in rules:
                match = [r for r in sub if r["rule"] == rule and r["search_mode"] == mode]
                vals.append(float(match[0]["test_acc"]) if match else np.nan)
            ax.bar(x + (k - 0.5) * width, vals, width, label=mode)
        ax.set_xticks(x)
        ax.set_xticklabels(rules)
        ax.set_ylabel("test accuracy (%)")
        ax.set_ylim(0, 100)
        ax.set_title(f"{model_kind} model")
        ax.legend()
        fig.tight_layout()
        fig.savefig(plot_dir / f"accuracy_{model_kind}.png", dpi=120)
        plt.close(fig)
