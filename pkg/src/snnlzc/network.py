"""Three-layer feedforward SNN: input X -> hidden H -> output Z, width n each.

The network is simulated layer by layer over the full grid (feedforward, so
the hidden layer can be integrated to completion before the output layer).
Propagation is same-bin by default; an optional one-bin synaptic delay
between hidden and output is available for sensitivity analysis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .core import SpikeTrain, TimeGrid, format_float
from .errors import DataError, GridMismatchError, LayerWidthMismatchError
from .kernels import simulate_layer
from .lzc import lzc_normalized
from .neuron import LifParams, MetaParams

__all__ = [
    "NetworkModel",
    "ForwardTrace",
    "forward",
    "output_features",
    "init_model",
    "write_model",
    "read_model",
]

KIND_LIF = "lif"
KIND_META = "meta"


@dataclass(frozen=True)
class NetworkModel:
    """Weights, biases, per-layer neuron parameters, and the simulation grid."""

    n: int
    model_kind: str
    w_xh: np.ndarray = field(repr=False)
    w_hz: np.ndarray = field(repr=False)
    b_h: np.ndarray = field(repr=False)
    b_z: np.ndarray = field(repr=False)
    params_h: LifParams | MetaParams
    params_z: LifParams | MetaParams
    grid: TimeGrid
    delay_one_bin: bool = False

    def __post_init__(self) -> None:
        if self.model_kind not in (KIND_LIF, KIND_META):
            raise ValueError(f"model_kind must be 'lif' or 'meta', got {self.model_kind}")
        for name, expect in (
            ("w_xh", (self.n, self.n)),
            ("w_hz", (self.n, self.n)),
            ("b_h", (self.n,)),
            ("b_z", (self.n,)),
        ):
            arr = np.ascontiguousarray(getattr(self, name), dtype=np.float64)
            if arr.shape != expect:
                raise ValueError(f"{name} must have shape {expect}, got {arr.shape}")
            if not np.isfinite(arr).all():
                raise ValueError(f"{name} contains non-finite values")
            object.__setattr__(self, name, arr)
        want_meta = self.model_kind == KIND_META
        for pname in ("params_h", "params_z"):
            p = getattr(self, pname)
            if isinstance(p, MetaParams) != want_meta:
                raise ValueError(f"{pname} does not match model_kind={self.model_kind}")
            base = p.base if isinstance(p, MetaParams) else p
            base.check_grid(self.grid.dt_ms)

    def with_weights(self, w_xh=None, w_hz=None, b_h=None, b_z=None) -> "NetworkModel":
        return replace(
            self,
            w_xh=self.w_xh if w_xh is None else w_xh,
            w_hz=self.w_hz if w_hz is None else w_hz,
            b_h=self.b_h if b_h is None else b_h,
            b_z=self.b_z if b_z is None else b_z,
        )


@dataclass(frozen=True)
class ForwardTrace:
    """Spike rasters (and optionally membrane potentials) from one forward pass."""

    grid: TimeGrid
    hidden_spikes: np.ndarray  # (n, T) uint8
    output_spikes: np.ndarray  # (n, T) uint8
    v_hist_h: np.ndarray | None = None
    v_hist_z: np.ndarray | None = None

    @property
    def output_trains(self) -> list[SpikeTrain]:
        return [SpikeTrain(self.grid, row) for row in self.output_spikes]

    @property
    def hidden_trains(self) -> list[SpikeTrain]:
        return [SpikeTrain(self.grid, row) for row in self.hidden_spikes]


def _layer_kwargs(params: LifParams | MetaParams, dt_ms: float) -> dict:
    if isinstance(params, MetaParams):
        base = params.base
        return dict(
            dt_ms=dt_ms,
            tau_m=base.tau_m_ms,
            r_m=base.r_m,
            v_th=base.v_th,
            v_reset=base.v_reset,
            v_rest=base.v_rest,
            is_meta=True,
            th_jump=params.th_jump,
            tau_adapt=params.tau_adapt_ms,
            tau_mod_gain=params.tau_mod_gain,
            adapt_decay=math.exp(-dt_ms / params.tau_adapt_ms),
        )
    return dict(
        dt_ms=dt_ms,
        tau_m=params.tau_m_ms,
        r_m=params.r_m,
        v_th=params.v_th,
        v_reset=params.v_reset,
        v_rest=params.v_rest,
        is_meta=False,
        th_jump=0.0,
        tau_adapt=1.0,
        tau_mod_gain=0.0,
        adapt_decay=0.0,
    )


def run_layer(
    pre_spikes: np.ndarray,
    w: np.ndarray,
    b: np.ndarray,
    params: LifParams | MetaParams,
    dt_ms: float,
    record_v: bool = False,
) -> tuple[np.ndarray, np.ndarray | None]:
    """Simulate one layer for a single sample; thin wrapper over the kernel."""
    pre = np.ascontiguousarray(pre_spikes, dtype=np.uint8)
    return simulate_layer(pre, w, b, record_v=record_v, **_layer_kwargs(params, dt_ms))


def coerce_inputs(model: NetworkModel, input_trains) -> np.ndarray:
    """Validate and stack n input trains into a (n, T) uint8 array."""
    if isinstance(input_trains, np.ndarray):
        arr = np.ascontiguousarray(input_trains, dtype=np.uint8)
        if arr.shape != (model.n, model.grid.n_bins):
            raise LayerWidthMismatchError(
                f"inputs must have shape {(model.n, model.grid.n_bins)}, got {arr.shape}"
            )
        return arr
    trains = list(input_trains)
    if len(trains) != model.n:
        raise LayerWidthMismatchError(f"expected {model.n} input trains, got {len(trains)}")
    for train in trains:
        if train.grid != model.grid:
            raise GridMismatchError(f"train grid {train.grid} != model grid {model.grid}")
    return np.stack([t.bits for t in trains]).astype(np.uint8)


def forward(model: NetworkModel, input_trains, retain: str = "spikes") -> ForwardTrace:
    """Propagate input spike trains through the network.

    ``retain`` is "spikes" or "potentials"; the latter stores per-bin
    membrane potentials of both layers (needed by Tempotron training).
    Deterministic given model and inputs.
    """
    if retain not in ("spikes", "potentials"):
        raise ValueError(f"unknown retain level {retain!r}")
    record_v = retain == "potentials"
    pre = coerce_inputs(model, input_trains)
    dt = model.grid.dt_ms
    s_h, v_h = run_layer(pre, model.w_xh, model.b_h, model.params_h, dt, record_v)
    s_h_in = s_h
    if model.delay_one_bin:
        s_h_in = np.zeros_like(s_h)
        s_h_in[:, 1:] = s_h[:, :-1]
    s_z, v_z = run_layer(s_h_in, model.w_hz, model.b_z, model.params_z, dt, record_v)
    return ForwardTrace(
        grid=model.grid,
        hidden_spikes=s_h,
        output_spikes=s_z,
        v_hist_h=v_h,
        v_hist_z=v_z,
    )


def output_features(trace: ForwardTrace) -> np.ndarray:
    """Normalized LZC of each output train: the classification feature vector."""
    return np.array([lzc_normalized(row) for row in trace.output_spikes])


def init_model(
    n: int,
    model_kind: str,
    grid: TimeGrid,
    rng: np.random.Generator,
    params_h: LifParams | MetaParams,
    params_z: LifParams | MetaParams,
    input_density: float = 0.06,
    hidden_density: float = 0.03,
    w_max: float | None = None,
    delay_one_bin: bool = False,
) -> NetworkModel:
    """Random uniform weight initialization with activity-preserving scale.

    Each layer draws weights uniform on [0, w_init_max] with w_init_max set
    so the expected initial input current roughly equals the layer threshold
    (mean weight * fan-in * expected pre density * R = v_th); a silent
    network learns nothing under STDP or Tempotron.  ``w_max``, when given,
    additionally caps the draw (used with STDP's hard weight bounds).
    """

    def _scale(params, density):
        base = params.base if isinstance(params, MetaParams) else params
        lim = 2.0 * base.v_th / (base.r_m * n * density)
        if w_max is not None:
            lim = min(lim, w_max)
        return lim

    w_xh = rng.uniform(0.0, _scale(params_h, input_density), size=(n, n))
    w_hz = rng.uniform(0.0, _scale(params_z, hidden_density), size=(n, n))
    return NetworkModel(
        n=n,
        model_kind=model_kind,
        w_xh=w_xh,
        w_hz=w_hz,
        b_h=np.zeros(n),
        b_z=np.zeros(n),
        params_h=params_h,
        params_z=params_z,
        grid=grid,
        delay_one_bin=delay_one_bin,
    )


# --- model file format -------------------------------------------------------
#
# Versioned ASCII, LF endings.  Line 1:
#   SNNMODEL v1 kind=<LIF|META> n=<int> n_bins=<int> dt_ms=<float>
# then sections [w_xh] [w_hz] [b_h] [b_z] [params_h] [params_z]; matrices one
# row per line, space-separated shortest round-trip decimals.  Parameter
# sections hold one row "tau_m_ms r_m v_th v_reset v_rest" plus, for META, a
# second row "th_jump tau_adapt_ms tau_mod_gain".

_MODEL_HEADER = "SNNMODEL v1 "


def _format_rows(arr: np.ndarray) -> list[str]:
    mat = np.atleast_2d(arr)
    return [" ".join(format_float(x) for x in row) for row in mat]


def _params_rows(params: LifParams | MetaParams) -> list[str]:
    base = params.base if isinstance(params, MetaParams) else params
    rows = [
        " ".join(
            format_float(x)
            for x in (base.tau_m_ms, base.r_m, base.v_th, base.v_reset, base.v_rest)
        )
    ]
    if isinstance(params, MetaParams):
        rows.append(
            " ".join(
                format_float(x)
                for x in (params.th_jump, params.tau_adapt_ms, params.tau_mod_gain)
            )
        )
    return rows


def write_model(path: str | Path, model: NetworkModel) -> None:
    kind = "META" if model.model_kind == KIND_META else "LIF"
    header = (
        f"SNNMODEL v1 kind={kind} n={model.n} "
        f"n_bins={model.grid.n_bins} dt_ms={format_float(model.grid.dt_ms)}"
    )
    if model.delay_one_bin:
        header += " delay=1"
    lines = [header]
    for section, rows in (
        ("[w_xh]", _format_rows(model.w_xh)),
        ("[w_hz]", _format_rows(model.w_hz)),
        ("[b_h]", _format_rows(model.b_h)),
        ("[b_z]", _format_rows(model.b_z)),
        ("[params_h]", _params_rows(model.params_h)),
        ("[params_z]", _params_rows(model.params_z)),
    ):
        lines.append(section)
        lines.extend(rows)
    Path(path).write_text("\n".join(lines) + "\n")


def _parse_params(rows: list[list[float]], meta: bool) -> LifParams | MetaParams:
    base = LifParams(*rows[0])
    if not meta:
        if len(rows) != 1:
            raise DataError("[params] section for LIF must have one row")
        return base
    if len(rows) != 2 or len(rows[1]) != 3:
        raise DataError("[params] section for META must have two rows")
    th_jump, tau_adapt_ms, tau_mod_gain = rows[1]
    return MetaParams(
        base=base, th_jump=th_jump, tau_adapt_ms=tau_adapt_ms, tau_mod_gain=tau_mod_gain
    )


def read_model(path: str | Path) -> NetworkModel:
    lines = Path(path).read_text().split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(_MODEL_HEADER):
        raise DataError(f"{path}: missing SNNMODEL v1 header")
    fields = dict(part.split("=", 1) for part in lines[0][len(_MODEL_HEADER):].split(" "))
    try:
        kind = fields["kind"]
        n = int(fields["n"])
        grid = TimeGrid(dt_ms=float(fields["dt_ms"]), n_bins=int(fields["n_bins"]))
        delay = fields.get("delay", "0") == "1"
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: bad header: {exc}") from exc
    if kind not in ("LIF", "META"):
        raise DataError(f"{path}: unknown kind {kind!r}")
    sections: dict[str, list[list[float]]] = {}
    current: list[list[float]] | None = None
    for line in lines[1:]:
        if line.startswith("["):
            current = sections.setdefault(line, [])
        elif current is None:
            raise DataError(f"{path}: content before first section")
        else:
            try:
                current.append([float(tok) for tok in line.split(" ")])
            except ValueError as exc:
                raise DataError(f"{path}: bad numeric row {line!r}") from exc
    required = ("[w_xh]", "[w_hz]", "[b_h]", "[b_z]", "[params_h]", "[params_z]")
    missing = [s for s in required if s not in sections]
    if missing:
        raise DataError(f"{path}: missing sections {missing}")
    meta = kind == "META"
    try:
        return NetworkModel(
            n=n,
            model_kind=KIND_META if meta else KIND_LIF,
            w_xh=np.array(sections["[w_xh]"]),
            w_hz=np.array(sections["[w_hz]"]),
            b_h=np.array(sections["[b_h]"]).reshape(-1),
            b_z=np.array(sections["[b_z]"]).reshape(-1),
            params_h=_parse_params(sections["[params_h]"], meta),
            params_z=_parse_params(sections["[params_z]"], meta),
            grid=grid,
            delay_one_bin=delay,
        )
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from exc
