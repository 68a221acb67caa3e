"""Time discretization, spike-train representation, and deterministic randomness.

Every other module builds on the three types here: a fixed-step time grid,
binary spike trains living on that grid, and seed specifications that derive
independent counter-based random streams.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import DataError, FewerThanTwoSpikesError

__all__ = [
    "TimeGrid",
    "SpikeTrain",
    "SeedSpec",
    "derive_rng",
    "spike_count",
    "inter_spike_intervals",
    "spike_times_ms",
    "write_spike_trains",
    "read_spike_trains",
    "format_float",
]


def format_float(x: float) -> str:
    """Shortest decimal string that round-trips to the identical double."""
    return repr(float(x))


@dataclass(frozen=True)
class TimeGrid:
    """Uniform discretization of a simulation window.

    ``dt_ms`` is the bin duration in milliseconds, ``n_bins`` the number of
    bins; total duration is exactly ``dt_ms * n_bins``.
    """

    dt_ms: float = 1.0
    n_bins: int = 1024

    def __post_init__(self) -> None:
        if not (self.dt_ms > 0):
            raise ValueError(f"dt_ms must be > 0, got {self.dt_ms}")
        if self.n_bins < 1:
            raise ValueError(f"n_bins must be >= 1, got {self.n_bins}")

    @property
    def duration_ms(self) -> float:
        return self.dt_ms * self.n_bins

    @property
    def dt_s(self) -> float:
        return self.dt_ms * 1e-3


@dataclass(frozen=True)
class SpikeTrain:
    """Binary event sequence on a time grid: one bit per bin, 1 = spike.

    Spike times are bin-start times ``k * dt_ms`` for the bins where the bit
    is set.
    """

    grid: TimeGrid
    bits: np.ndarray = field(repr=False)

    def __post_init__(self) -> None:
        bits = np.ascontiguousarray(self.bits, dtype=np.uint8)
        if bits.ndim != 1 or bits.shape[0] != self.grid.n_bins:
            raise ValueError(
                f"bits must be 1-D of length {self.grid.n_bins}, got shape {bits.shape}"
            )
        if bits.size and bits.max() > 1:
            raise ValueError("bits must contain only 0 and 1")
        bits.setflags(write=False)
        object.__setattr__(self, "bits", bits)

    @classmethod
    def from_bits(cls, bits: Sequence[int], dt_ms: float = 1.0) -> "SpikeTrain":
        arr = np.asarray(bits, dtype=np.uint8)
        return cls(TimeGrid(dt_ms=dt_ms, n_bins=arr.shape[0]), arr)

    def to_string(self) -> str:
        return "".join("1" if b else "0" for b in self.bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, SpikeTrain):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.bits, other.bits)


@dataclass(frozen=True)
class SeedSpec:
    """Identifies one deterministic random stream.

    The derived generator state is a pure function of
    ``(master_seed, stream_id)``: distinct stream ids under the same master
    seed give statistically independent streams, and the same pair always
    reproduces the identical bit stream.
    """

    master_seed: int
    stream_id: int = 0

    def __post_init__(self) -> None:
        for name in ("master_seed", "stream_id"):
            v = getattr(self, name)
            if not (0 <= v < 2**64):
                raise ValueError(f"{name} must be an unsigned 64-bit integer, got {v}")


def derive_rng(seed: SeedSpec) -> np.random.Generator:
    """Derive a counter-based random stream from a seed specification.

    Uses the Philox 4x64 counter-based generator with the 128-bit key
    ``master_seed + (stream_id << 64)``.  Splitting by ``stream_id`` rather
    than drawing seeds sequentially lets parallel trials derive their streams
    independently, with no ordering dependence.
    """
    key = seed.master_seed + (seed.stream_id << 64)
    return np.random.Generator(np.random.Philox(key=key))


def spike_count(train: SpikeTrain) -> int:
    """Number of spikes (1-bits) in the train."""
    return int(np.count_nonzero(train.bits))


def spike_times_ms(train: SpikeTrain) -> np.ndarray:
    """Times of all spikes in milliseconds (bin-start convention)."""
    return np.flatnonzero(train.bits).astype(np.float64) * train.grid.dt_ms


def inter_spike_intervals(train: SpikeTrain) -> np.ndarray:
    """Successive differences of spike times in ms; needs >= 2 spikes."""
    times = spike_times_ms(train)
    if times.shape[0] < 2:
        raise FewerThanTwoSpikesError(
            f"need at least 2 spikes, train has {times.shape[0]}"
        )
    return np.diff(times)


# --- spike-train file format -------------------------------------------------
#
# ASCII, LF line endings.  Line 1:
#   SPIKETRAIN v1 dt_ms=<float> n_bins=<int>
# Each following line: one train as '0'/'1' chars of length n_bins, optionally
# followed by a tab and an integer class label.

_HEADER_PREFIX = "SPIKETRAIN v1 "


def write_spike_trains(
    path: str | Path,
    trains: Iterable[SpikeTrain],
    labels: Sequence[int] | None = None,
) -> None:
    trains = list(trains)
    if labels is not None and len(labels) != len(trains):
        raise ValueError("labels length must match train count")
    if not trains:
        raise ValueError("need at least one train to write")
    grid = trains[0].grid
    lines = [f"SPIKETRAIN v1 dt_ms={format_float(grid.dt_ms)} n_bins={grid.n_bins}"]
    for i, train in enumerate(trains):
        if train.grid != grid:
            raise ValueError("all trains in one file must share the grid")
        line = train.to_string()
        if labels is not None:
            line += f"\t{int(labels[i])}"
        lines.append(line)
    Path(path).write_text("\n".join(lines) + "\n")


def read_spike_trains(path: str | Path) -> tuple[list[SpikeTrain], list[int] | None]:
    """Parse a spike-train file; returns (trains, labels-or-None)."""
    text = Path(path).read_text()
    lines = text.split("\n")
    if lines and lines[-1] == "":
        lines.pop()
    if not lines or not lines[0].startswith(_HEADER_PREFIX):
        raise DataError(f"{path}: missing SPIKETRAIN v1 header")
    fields = dict(
        part.split("=", 1) for part in lines[0][len(_HEADER_PREFIX):].split(" ")
    )
    try:
        grid = TimeGrid(dt_ms=float(fields["dt_ms"]), n_bins=int(fields["n_bins"]))
    except (KeyError, ValueError) as exc:
        raise DataError(f"{path}: bad header: {exc}") from exc
    trains: list[SpikeTrain] = []
    labels: list[int] = []
    any_label = False
    for lineno, line in enumerate(lines[1:], start=2):
        bits_str, sep, label_str = line.partition("\t")
        if len(bits_str) != grid.n_bins or set(bits_str) - {"0", "1"}:
            raise DataError(f"{path}:{lineno}: expected {grid.n_bins} '0'/'1' chars")
        bits = np.frombuffer(bits_str.encode("ascii"), dtype=np.uint8) - ord("0")
        trains.append(SpikeTrain(grid, bits))
        if sep:
            any_label = True
            try:
                labels.append(int(label_str))
            except ValueError as exc:
                raise DataError(f"{path}:{lineno}: bad label {label_str!r}") from exc
        elif any_label:
            raise DataError(f"{path}:{lineno}: missing label")
    if not trains:
        raise DataError(f"{path}: no trains")
    return trains, (labels if any_label else None)
