"""Two-variable excitable dynamics on a masked lattice.

State lives only on conductive nodes, stored compactly in row-major order
of the mask. The update is explicit Euler with the masked five-node
Laplacian; absent neighbors contribute nothing (no-flux). All updates are
simultaneous (Jacobi), never in place, so trajectories are independent of
how the work is partitioned across threads.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .errors import ArtifactIOError, ConfigError, NumericalBlowupError
from .grid import ConductiveGrid

BLOWUP_LIMIT = 1.0e6

CHECKPOINT_MAGIC = b"WGCKPT1\n"


@dataclass(frozen=True)
class SimParams:
    """Model and integration constants.

    c2 controls excitability: 0.09 is fully excitable and propagation
    degrades as it rises toward 0.13.
    """

    dt: float = 0.015
    dx: float = 2.0
    d_u: float = 1.0
    a: float = 0.13
    b: float = 0.013
    c1: float = 0.26
    c2: float = 0.1
    u_display: float = 0.04
    u_active: float = 0.1

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError(f"dt={self.dt} must be > 0")
        if not self.dx > 0:
            raise ConfigError(f"dx={self.dx} must be > 0")
        if not self.d_u >= 0:
            raise ConfigError(f"d_u={self.d_u} must be >= 0")
        if not 0 < self.a < 1:
            raise ConfigError(f"a={self.a} must lie in (0, 1)")
        if not self.b > 0:
            raise ConfigError(f"b={self.b} must be > 0")
        if not self.c1 > 0:
            raise ConfigError(f"c1={self.c1} must be > 0")
        if not self.c2 > 0:
            raise ConfigError(f"c2={self.c2} must be > 0")

    @property
    def inv_dx2(self) -> float:
        return 1.0 / (self.dx * self.dx)


@dataclass(frozen=True)
class Stimulus:
    """Input excitation: impulse (u := 1 once) or current (adds I to du/dt)."""

    center: tuple[int, int]
    radius: float = 5.0
    mode: str = "impulse"
    amplitude: float = 0.0
    duration: int = 0

    def __post_init__(self):
        if self.mode not in ("impulse", "current"):
            raise ConfigError(f"stimulus mode {self.mode!r} must be impulse or current")
        if self.radius < 0:
            raise ConfigError("stimulus radius must be >= 0")
        if self.duration < 0:
            raise ConfigError("stimulus duration must be >= 0")
        if not np.isfinite(self.amplitude):
            raise ConfigError("stimulus amplitude must be finite")


@dataclass(frozen=True)
class InputPair:
    """Which of the two dedicated input sites are excited."""

    x: int
    y: int

    def __post_init__(self):
        if self.x not in (0, 1) or self.y not in (0, 1):
            raise ConfigError(f"input bits must be 0/1, got ({self.x}, {self.y})")

    @property
    def label(self) -> str:
        return f"{self.x}{self.y}"

    @staticmethod
    def parse(text: str) -> "InputPair":
        if len(text) != 2 or any(c not in "01" for c in text):
            raise ConfigError(f"input pair {text!r} must be two bits, e.g. '01'")
        return InputPair(x=int(text[0]), y=int(text[1]))


GATE_PAIRS = (InputPair(0, 1), InputPair(1, 0), InputPair(1, 1))


class GridTopology:
    """Compacted node coordinates and 4-neighbor table for a grid."""

    def __init__(self, grid: ConductiveGrid):
        mask = grid.mask
        h, w = mask.shape
        ys, xs = np.nonzero(mask)  # row-major order
        n = ys.size
        index_map = np.full((h, w), -1, dtype=np.int32)
        index_map[ys, xs] = np.arange(n, dtype=np.int32)
        neighbors = np.full((n, 4), -1, dtype=np.int32)
        for j, (dy, dx) in enumerate(((-1, 0), (1, 0), (0, -1), (0, 1))):
            yy = ys + dy
            xx = xs + dx
            ok = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
            vals = np.full(n, -1, dtype=np.int32)
            vals[ok] = index_map[yy[ok], xx[ok]]
            neighbors[:, j] = vals
        self.ys = ys.astype(np.int32)
        self.xs = xs.astype(np.int32)
        self.index_map = index_map
        self.neighbors = neighbors
        self.n_nodes = n


def topology(grid: ConductiveGrid) -> GridTopology:
    if grid._topology is None:
        grid._topology = GridTopology(grid)
    return grid._topology


@dataclass
class FieldState:
    """Iteration counter plus (u, v) over conductive nodes, compact order."""

    t: int
    u: np.ndarray
    v: np.ndarray

    def copy(self) -> "FieldState":
        return FieldState(t=self.t, u=self.u.copy(), v=self.v.copy())


def resting_state(grid: ConductiveGrid) -> FieldState:
    n = topology(grid).n_nodes
    return FieldState(t=0, u=np.zeros(n), v=np.zeros(n))


def field_on_grid(values: np.ndarray, grid: ConductiveGrid, fill: float = 0.0) -> np.ndarray:
    """Scatter a compact per-node array onto the full 2-D lattice."""
    top = topology(grid)
    out = np.full((grid.height, grid.width), fill, dtype=float)
    out[top.ys, top.xs] = values
    return out


def nodes_within(grid: ConductiveGrid, center: tuple[int, int], radius: float) -> np.ndarray:
    """Compact indices of conductive nodes within Euclidean distance <= radius."""
    top = topology(grid)
    cx, cy = center
    d2 = (top.xs.astype(float) - cx) ** 2 + (top.ys.astype(float) - cy) ** 2
    return np.nonzero(d2 <= radius * radius)[0]


# --- single-node reference operations --------------------------------------


def laplacian(
    state: FieldState, grid: ConductiveGrid, params: SimParams, node: tuple[int, int]
) -> float:
    """Masked five-node Laplacian at one conductive node, evaluated directly.

    Kept deliberately simple; the compiled kernels are checked against it.
    """
    x, y = node
    if not grid.is_conductive(x, y):
        raise ValueError(f"node ({x}, {y}) is not conductive")
    top = topology(grid)
    k = int(top.index_map[y, x])
    uk = float(state.u[k])
    acc = 0.0
    for xx, yy in ((x, y - 1), (x, y + 1), (x - 1, y), (x + 1, y)):
        if grid.is_conductive(xx, yy):
            acc += float(state.u[top.index_map[yy, xx]]) - uk
    return acc * params.inv_dx2


def laplacian_field(state: FieldState, grid: ConductiveGrid, params: SimParams) -> np.ndarray:
    """Masked Laplacian at every conductive node (compiled path)."""
    top = topology(grid)
    out = np.empty_like(state.u)
    kernels.laplacian_all(state.u, top.neighbors, params.inv_dx2, out)
    return out


# --- stepping ---------------------------------------------------------------


def external_current(
    grid: ConductiveGrid, stimuli: list[Stimulus] | tuple[Stimulus, ...]
) -> np.ndarray | None:
    """Summed current-mode amplitudes per node; None when all zero."""
    current = None
    for stim in stimuli:
        if stim.mode != "current" or stim.amplitude == 0.0:
            continue
        if current is None:
            current = np.zeros(topology(grid).n_nodes)
        current[nodes_within(grid, stim.center, stim.radius)] += stim.amplitude
    return current


def _raise_blowup(state_t: int, u: np.ndarray, v: np.ndarray, grid: ConductiveGrid):
    top = topology(grid)
    both = np.abs(np.concatenate((u, v)))
    bad = ~np.isfinite(both)
    k = int(np.argmax(bad)) if bad.any() else int(np.argmax(both))
    n = u.shape[0]
    value = float(both[k]) if np.isfinite(both[k]) else float("nan")
    k = k % n
    raise NumericalBlowupError(state_t, (int(top.xs[k]), int(top.ys[k])), value)


def step(
    state: FieldState,
    grid: ConductiveGrid,
    params: SimParams,
    active_stimuli: list[Stimulus] | tuple[Stimulus, ...] = (),
) -> FieldState:
    """One simultaneous Euler update; returns a fresh state at t + 1."""
    top = topology(grid)
    if state.u.shape[0] != top.n_nodes:
        raise ValueError("state does not match grid topology")
    u_next = np.empty_like(state.u)
    v_next = np.empty_like(state.v)
    current = external_current(grid, active_stimuli)
    if current is None:
        worst, bad = kernels.fhn_step_nostim(
            state.u, state.v, u_next, v_next, top.neighbors,
            params.dt, params.inv_dx2, params.d_u, params.a, params.b, params.c1, params.c2,
        )
    else:
        worst, bad = kernels.fhn_step(
            state.u, state.v, u_next, v_next, top.neighbors, current,
            params.dt, params.inv_dx2, params.d_u, params.a, params.b, params.c1, params.c2,
        )
    if bad or worst > BLOWUP_LIMIT:
        _raise_blowup(state.t + 1, u_next, v_next, grid)
    return FieldState(t=state.t + 1, u=u_next, v=v_next)


def apply_impulse(state: FieldState, grid: ConductiveGrid, stim: Stimulus) -> FieldState:
    """Set u := 1 on conductive nodes within the stimulus radius; v unchanged."""
    if stim.mode != "impulse":
        raise ConfigError("apply_impulse requires an impulse-mode stimulus")
    out = state.copy()
    out.u[nodes_within(grid, stim.center, stim.radius)] = 1.0
    return out


def run(
    grid: ConductiveGrid,
    params: SimParams,
    inputs: InputPair,
    input_sites: tuple[tuple[int, int], tuple[int, int]],
    n_iters: int,
    observers: list = (),
    input_stimulus: Stimulus | None = None,
) -> FieldState:
    """Stimulate per the input pair at t = 0, then integrate n_iters steps.

    Observers are called with the current FieldState after every step, on
    the control thread; they must copy anything they want to keep, because
    the underlying buffers are reused.
    """
    if n_iters < 0:
        raise ConfigError("n_iters must be >= 0")
    kernels.configure_workers()
    top = topology(grid)
    template = input_stimulus or Stimulus(center=(0, 0))
    state = resting_state(grid)
    current = None
    current_until = 0
    for bit, site in ((inputs.x, input_sites[0]), (inputs.y, input_sites[1])):
        if not bit:
            continue
        stim = replace(template, center=(int(site[0]), int(site[1])))
        if stim.mode == "impulse":
            state.u[nodes_within(grid, stim.center, stim.radius)] = 1.0
        else:
            contrib = external_current(grid, [stim])
            if contrib is not None:
                current = contrib if current is None else current + contrib
                current_until = max(current_until, stim.duration)

    u, v = state.u, state.v
    u_next, v_next = np.empty_like(u), np.empty_like(v)
    args = (params.dt, params.inv_dx2, params.d_u, params.a, params.b, params.c1, params.c2)
    view = FieldState(t=0, u=u, v=v)
    for obs in observers:
        obs(view)  # initial state, t = 0
    for t in range(1, n_iters + 1):
        if current is not None and t <= current_until:
            worst, bad = kernels.fhn_step(u, v, u_next, v_next, top.neighbors, current, *args)
        else:
            worst, bad = kernels.fhn_step_nostim(u, v, u_next, v_next, top.neighbors, *args)
        if bad or worst > BLOWUP_LIMIT:
            _raise_blowup(t, u_next, v_next, grid)
        u, u_next = u_next, u
        v, v_next = v_next, v
        view = FieldState(t=t, u=u, v=v)
        for obs in observers:
            obs(view)
    return FieldState(t=n_iters, u=u.copy(), v=v.copy())


# --- checkpoints ------------------------------------------------------------


def save_checkpoint(path, state: FieldState, grid: ConductiveGrid) -> None:
    """Binary dump of (t, u, v) plus the grid hash, for pause/resume."""
    digest = grid.mask_hash().encode()
    header = CHECKPOINT_MAGIC + struct.pack("<QQ", state.t, state.u.shape[0]) + digest
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(state.u.astype("<f8").tobytes())
        fh.write(state.v.astype("<f8").tobytes())


def load_checkpoint(path, grid: ConductiveGrid | None = None) -> tuple[FieldState, str]:
    """Read a checkpoint; verifies the grid hash when a grid is supplied."""
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise ArtifactIOError(f"cannot read checkpoint {path}: {exc}") from exc
    if not raw.startswith(CHECKPOINT_MAGIC):
        raise ArtifactIOError(f"{path}: not a checkpoint file")
    off = len(CHECKPOINT_MAGIC)
    try:
        t, n = struct.unpack_from("<QQ", raw, off)
        off += 16
        digest = raw[off : off + 64].decode()
        off += 64
        need = 2 * n * 8
        if len(raw) - off < need:
            raise ValueError(f"truncated payload: need {need} bytes, have {len(raw) - off}")
        u = np.frombuffer(raw, dtype="<f8", count=n, offset=off).copy()
        v = np.frombuffer(raw, dtype="<f8", count=n, offset=off + n * 8).copy()
    except (struct.error, ValueError, UnicodeDecodeError) as exc:
        raise ArtifactIOError(f"{path}: corrupt checkpoint: {exc}") from exc
    if grid is not None:
        if grid.mask_hash() != digest:
            raise ArtifactIOError(
                f"{path}: checkpoint grid hash {digest[:12]}... does not match the supplied grid"
            )
        if topology(grid).n_nodes != n:
            raise ArtifactIOError(f"{path}: node count {n} does not match grid")
    return FieldState(t=int(t), u=u, v=v), digest
