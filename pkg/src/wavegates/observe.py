"""Per-step measurement: electrode potentials, activity, excitation
frequency, snapshot frames, and their file exports.

Observers are plain callables invoked with the current FieldState after
every integration step. Each handles its own sampling cadence. They reduce
immediately and never retain the state's buffers.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import UndefinedActivityError
from .grid import ConductiveGrid, ElectrodeSet
from .imgio import write_pgm, write_png
from .model import FieldState, SimParams, field_on_grid, topology

# Excited nodes in frames are drawn pure red, resting conductive nodes
# black, non-conductive background white.
FRAME_EXCITED = (255, 0, 0)
FRAME_CONDUCTIVE = (0, 0, 0)
FRAME_BACKGROUND = (255, 255, 255)


def neighborhood_indices(grid: ConductiveGrid, pos: tuple[int, int]) -> np.ndarray:
    """Compact indices of conductive nodes with Euclidean distance < 2 of
    pos: the 3x3 neighborhood (diagonals included, straight-2 offsets not)."""
    top = topology(grid)
    x, y = int(pos[0]), int(pos[1])
    out = []
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            xx, yy = x + dx, y + dy
            if 0 <= xx < grid.width and 0 <= yy < grid.height:
                k = top.index_map[yy, xx]
                if k >= 0:
                    out.append(int(k))
    return np.asarray(out, dtype=np.int64)


def probe_potential(state: FieldState, grid: ConductiveGrid, electrode: tuple[int, int]) -> float:
    """Sum of (u - v) over the conductive 3x3 neighborhood of the electrode."""
    idx = neighborhood_indices(grid, electrode)
    if idx.size == 0:
        return 0.0
    return float(np.sum(state.u[idx] - state.v[idx]))


def measure_activity(state: FieldState, grid: ConductiveGrid, params: SimParams) -> float:
    """Fraction of conductive nodes with u strictly above u_active."""
    if grid.conductive_count == 0:
        raise UndefinedActivityError("activity is undefined on an empty mask")
    return float(np.count_nonzero(state.u > params.u_active)) / grid.conductive_count


@dataclass
class PotentialTrace:
    """Potential time series for one electrode and one input pair."""

    electrode: str
    pair: str
    t: np.ndarray
    p: np.ndarray


@dataclass
class ActivityTrace:
    pair: str
    t: np.ndarray
    a: np.ndarray


class FrequencyMatrix:
    """Per-conductive-node excitation counter for one input pair.

    Counts start raw (integers); normalize() divides by the global maximum,
    mapping into [0, 1]. An all-zero matrix normalizes to itself.
    """

    def __init__(self, grid: ConductiveGrid, pair: str, values: np.ndarray | None = None,
                 normalized: bool = False):
        self.grid = grid
        self.pair = pair
        n = topology(grid).n_nodes
        if values is None:
            values = np.zeros(n, dtype=np.int64)
        if values.shape[0] != n:
            raise ValueError("frequency values do not match grid topology")
        self.values = values
        self.normalized = normalized

    def accumulate(self, state: FieldState, params: SimParams) -> "FrequencyMatrix":
        """Return a new matrix with nodes above u_active incremented."""
        if self.normalized:
            raise ValueError("cannot accumulate into a normalized matrix")
        return FrequencyMatrix(
            self.grid, self.pair, self.values + (state.u > params.u_active), normalized=False
        )

    def normalize(self) -> "FrequencyMatrix":
        peak = self.values.max() if self.values.size else 0
        if peak == 0:
            return FrequencyMatrix(self.grid, self.pair, self.values.astype(float), normalized=True)
        return FrequencyMatrix(self.grid, self.pair, self.values / float(peak), normalized=True)

    def coverage_fraction(self) -> float:
        """Fraction of conductive nodes that were ever counted."""
        if self.values.size == 0:
            return 0.0
        return float(np.count_nonzero(self.values)) / self.values.size

    def to_grid(self) -> np.ndarray:
        return field_on_grid(self.values.astype(float), self.grid)


def accumulate_frequency(freq: FrequencyMatrix, state: FieldState, params: SimParams) -> FrequencyMatrix:
    return freq.accumulate(state, params)


def normalize_frequency(freq: FrequencyMatrix) -> FrequencyMatrix:
    return freq.normalize()


def render_frame(state: FieldState, grid: ConductiveGrid, params: SimParams) -> np.ndarray:
    """(h, w, 3) uint8 frame: excited red, conductive black, rest white."""
    img = np.full((grid.height, grid.width, 3), 255, dtype=np.uint8)
    top = topology(grid)
    img[top.ys, top.xs] = FRAME_CONDUCTIVE
    hot = state.u > params.u_display
    img[top.ys[hot], top.xs[hot]] = FRAME_EXCITED
    return img


# --- observers --------------------------------------------------------------


class PotentialProbe:
    """Records p(t) at every electrode with one vectorized gather per step."""

    def __init__(self, grid: ConductiveGrid, electrodes: ElectrodeSet, every: int = 1):
        if every < 1:
            raise ValueError("cadence must be >= 1")
        self.labels = [e.label for e in electrodes]
        self.every = every
        idx_lists = [neighborhood_indices(grid, (e.x, e.y)) for e in electrodes]
        width = max((idx.size for idx in idx_lists), default=0)
        self.gather = np.zeros((len(idx_lists), max(width, 1)), dtype=np.int64)
        self.valid = np.zeros_like(self.gather, dtype=float)
        for i, idx in enumerate(idx_lists):
            self.gather[i, : idx.size] = idx
            self.valid[i, : idx.size] = 1.0
        self.times: list[int] = []
        self.rows: list[np.ndarray] = []

    def __call__(self, state: FieldState) -> None:
        if state.t % self.every:
            return
        diff = state.u[self.gather] - state.v[self.gather]
        self.times.append(state.t)
        self.rows.append((diff * self.valid).sum(axis=1))

    def traces(self, pair: str) -> list[PotentialTrace]:
        t = np.asarray(self.times, dtype=np.int64)
        block = np.vstack(self.rows) if self.rows else np.zeros((0, len(self.labels)))
        return [
            PotentialTrace(electrode=label, pair=pair, t=t, p=block[:, i].copy())
            for i, label in enumerate(self.labels)
        ]


class ActivityMeter:
    def __init__(self, grid: ConductiveGrid, params: SimParams, every: int = 1):
        if grid.conductive_count == 0:
            raise UndefinedActivityError("activity is undefined on an empty mask")
        self.n = grid.conductive_count
        self.threshold = params.u_active
        self.every = every
        self.times: list[int] = []
        self.values: list[float] = []

    def __call__(self, state: FieldState) -> None:
        if state.t % self.every:
            return
        self.times.append(state.t)
        self.values.append(float(np.count_nonzero(state.u > self.threshold)) / self.n)

    def trace(self, pair: str) -> ActivityTrace:
        return ActivityTrace(
            pair=pair, t=np.asarray(self.times, dtype=np.int64), a=np.asarray(self.values)
        )


class CoverageTracker:
    """Which conductive nodes ever exceeded u_active at a sampled step."""

    def __init__(self, grid: ConductiveGrid, params: SimParams, every: int = 1):
        self.threshold = params.u_active
        self.every = every
        self.hot = np.zeros(topology(grid).n_nodes, dtype=bool)

    def __call__(self, state: FieldState) -> None:
        if state.t % self.every:
            return
        self.hot |= state.u > self.threshold

    def fraction(self) -> float:
        if self.hot.size == 0:
            return 0.0
        return float(np.count_nonzero(self.hot)) / self.hot.size


class FrequencyAccumulator:
    """Counts u > u_active per node; doubles as the coverage tracker."""

    def __init__(self, grid: ConductiveGrid, params: SimParams, every: int = 1):
        self.grid = grid
        self.threshold = params.u_active
        self.every = every
        self.counts = np.zeros(topology(grid).n_nodes, dtype=np.int64)

    def __call__(self, state: FieldState) -> None:
        if state.t % self.every:
            return
        self.counts += state.u > self.threshold

    def matrix(self, pair: str) -> FrequencyMatrix:
        return FrequencyMatrix(self.grid, pair, self.counts.copy(), normalized=False)


class RegionActivityTracker:
    """First iteration at which each named node-region exceeded u_active."""

    def __init__(self, grid: ConductiveGrid, params: SimParams,
                 regions: dict[str, np.ndarray], every: int = 1):
        self.threshold = params.u_active
        self.every = every
        self.regions = {name: np.asarray(idx, dtype=np.int64) for name, idx in regions.items()}
        self.first_fired: dict[str, int | None] = {name: None for name in regions}

    def __call__(self, state: FieldState) -> None:
        if state.t % self.every:
            return
        for name, idx in self.regions.items():
            if self.first_fired[name] is None and idx.size:
                if np.any(state.u[idx] > self.threshold):
                    self.first_fired[name] = state.t

    def fired(self) -> dict[str, bool]:
        return {name: t is not None for name, t in self.first_fired.items()}


class FrameRecorder:
    """Writes frame_{pair}_{t:08}.png at a fixed cadence (default 150)."""

    def __init__(self, grid: ConductiveGrid, params: SimParams, out_dir: str | Path,
                 pair: str, every: int = 150):
        self.grid = grid
        self.params = params
        self.out_dir = Path(out_dir)
        self.pair = pair
        self.every = every
        self.written: list[Path] = []

    def __call__(self, state: FieldState) -> None:
        if state.t % self.every:
            return
        self.out_dir.mkdir(parents=True, exist_ok=True)
        path = self.out_dir / f"frame_{self.pair}_{state.t:08d}.png"
        write_png(path, render_frame(state, self.grid, self.params))
        self.written.append(path)


# --- file exports -----------------------------------------------------------


def write_trace_csv(path: str | Path, trace: PotentialTrace) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,value\n")
        for t, p in zip(trace.t, trace.p):
            fh.write(f"{int(t)},{float(p)!r}\n")
    return path


def read_trace_csv(path: str | Path) -> tuple[np.ndarray, np.ndarray]:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if data.size == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0)
    return data[:, 0].astype(np.int64), data[:, 1]


def write_activity_csv(path: str | Path, trace: ActivityTrace) -> Path:
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("t,value\n")
        for t, a in zip(trace.t, trace.a):
            fh.write(f"{int(t)},{float(a)!r}\n")
    return path


def write_frequency_csv(path: str | Path, freq: FrequencyMatrix) -> Path:
    """Sparse CSV: x, y, value for every conductive node (row-major)."""
    top = topology(freq.grid)
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("x,y,value\n")
        if freq.normalized:
            for x, y, val in zip(top.xs, top.ys, freq.values):
                fh.write(f"{int(x)},{int(y)},{float(val)!r}\n")
        else:
            for x, y, val in zip(top.xs, top.ys, freq.values):
                fh.write(f"{int(x)},{int(y)},{int(val)}\n")
    return path


def read_frequency_csv(path: str | Path, grid: ConductiveGrid, pair: str) -> FrequencyMatrix:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    top = topology(grid)
    if data.shape[0] != top.n_nodes:
        raise ValueError(
            f"{path}: {data.shape[0]} rows do not match {top.n_nodes} conductive nodes"
        )
    xs = data[:, 0].astype(np.int64)
    ys = data[:, 1].astype(np.int64)
    if not (np.array_equal(xs, top.xs) and np.array_equal(ys, top.ys)):
        raise ValueError(f"{path}: node ordering does not match the grid")
    values = data[:, 2]
    normalized = bool(np.all(values <= 1.0))
    if not normalized:
        values = values.astype(np.int64)
    return FrequencyMatrix(grid, pair, values, normalized=normalized)


def write_frequency_pgm(path: str | Path, freq: FrequencyMatrix) -> Path:
    """Normalized frequency as 16-bit PGM: value = round(omega * 65535)."""
    if not freq.normalized:
        freq = freq.normalize()
    img = np.rint(freq.to_grid() * 65535.0).astype(np.uint16)
    write_pgm(path, img, maxval=65535)
    return Path(path)
