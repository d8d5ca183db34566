"""Boolean-gate identification from simulation observables.

Four extraction routes share one gate vocabulary:

- structural: which output regions an excitation reaches per input pair,
- frequency: nodes inside high-excitation-frequency domains per input pair,
- activity: whether the steady-state activity average falls in an interval,
- spiking: coincidence patterns of electrode-potential spikes.

Every route reduces an input pair pattern, a subset of {01, 10, 11}, to one
of the seven two-input gates whose output at input 00 is false (the medium
rests at a stable fixed point when unstimulated, so 00 can never fire).
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np
from scipy import ndimage

from .errors import ConfigError
from .grid import ConductiveGrid
from .imgio import write_png
from .model import SimParams, run, topology
from .observe import FrequencyMatrix, PotentialTrace, RegionActivityTracker

PAIR_LABELS = ("01", "10", "11")

DEFAULT_SPIKE_THRESHOLD = 0.05
DEFAULT_MIN_SEPARATION = 300
DEFAULT_COINCIDENCE_WINDOW = 200
DEFAULT_SEGMENTATION_GAP = 1000
DEFAULT_DOMAIN_THRESHOLD = 0.72

FOUR_CONNECTED = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)


class GateKind(Enum):
    """The seven two-input gates with false output at 00.

    Truth vectors are over the stimulated input pairs (01, 10, 11); each
    gate fires exactly on the pairs in its subset, so the kinds biject
    with the non-empty subsets of {01, 10, 11}.
    """

    OR = ("x+y", (True, True, True))
    SELECT_Y = ("y", (True, False, True))
    XOR = ("x⊕y", (True, True, False))
    SELECT_X = ("x", (False, True, True))
    NOT_AND = ("x̄y", (True, False, False))
    AND_NOT = ("xȳ", (False, True, False))
    AND = ("xy", (False, False, True))

    def __init__(self, notation: str, truth: tuple[bool, bool, bool]):
        self.notation = notation
        self.truth = truth

    @property
    def fires_on(self) -> frozenset[str]:
        return frozenset(p for p, hot in zip(PAIR_LABELS, self.truth) if hot)


_SUBSET_TO_GATE = {kind.fires_on: kind for kind in GateKind}

# Column order used for count tables: OR, SELECT_Y, XOR, SELECT_X,
# NOT_AND, AND_NOT, AND.
GATE_COLUMNS = (
    GateKind.OR,
    GateKind.SELECT_Y,
    GateKind.XOR,
    GateKind.SELECT_X,
    GateKind.NOT_AND,
    GateKind.AND_NOT,
    GateKind.AND,
)


def classify_gate(subset) -> GateKind:
    """Map a non-empty subset of firing input pairs to its gate."""
    key = frozenset(subset)
    if not key:
        raise ValueError("empty input-pair subset has no gate")
    unknown = key - set(PAIR_LABELS)
    if unknown:
        raise ValueError(f"unknown input pair labels: {sorted(unknown)}")
    return _SUBSET_TO_GATE[key]


def natural_key(label: str) -> tuple:
    """Sort key ordering E2 before E10."""
    return tuple(int(part) if part.isdigit() else part for part in re.split(r"(\d+)", label))


# --- spiking ------------------------------------------------------------


@dataclass(frozen=True)
class SpikeEvent:
    electrode: str
    pair: str
    t: int
    amplitude: float


@dataclass(frozen=True)
class CoincidenceEvent:
    """Spikes from different input-pair runs landing within one window."""

    t: float
    subset: frozenset[str]
    gate: GateKind


def detect_spikes(
    trace: PotentialTrace,
    threshold: float = DEFAULT_SPIKE_THRESHOLD,
    min_separation: int = DEFAULT_MIN_SEPARATION,
) -> list[SpikeEvent]:
    """Local maxima of p(t) above threshold, left to right, dropping any
    candidate closer than min_separation iterations to the last accepted one.

    A plateau counts once, at its first sample. Endpoints are not peaks.
    """
    if min_separation < 0:
        raise ValueError("min_separation must be >= 0")
    t, p = np.asarray(trace.t), np.asarray(trace.p)
    if p.size < 3:
        return []
    interior = np.arange(1, p.size - 1)
    is_peak = (p[interior] > p[interior - 1]) & (p[interior] >= p[interior + 1])
    candidates = interior[is_peak & (p[interior] > threshold)]
    spikes: list[SpikeEvent] = []
    last_t = None
    for i in candidates:
        when = int(t[i])
        if last_t is not None and when - last_t < min_separation:
            continue
        spikes.append(
            SpikeEvent(electrode=trace.electrode, pair=trace.pair, t=when, amplitude=float(p[i]))
        )
        last_t = when
    return spikes


def merge_coincidences(
    spikes01: list[SpikeEvent],
    spikes10: list[SpikeEvent],
    spikes11: list[SpikeEvent],
    window: int = DEFAULT_COINCIDENCE_WINDOW,
) -> list[CoincidenceEvent]:
    """Cluster spikes across the three runs, earliest first.

    Pop the earliest unconsumed spike, consume every spike strictly less
    than window iterations after it (any trace), and emit one event whose
    subset names the traces represented and whose time is the mean of the
    consumed spike times.
    """
    pool = sorted(spikes01 + spikes10 + spikes11, key=lambda s: (s.t, s.pair))
    events: list[CoincidenceEvent] = []
    i = 0
    while i < len(pool):
        t0 = pool[i].t
        j = i
        while j < len(pool) and pool[j].t - t0 < window:
            j += 1
        cluster = pool[i:j]
        subset = frozenset(s.pair for s in cluster)
        center = float(np.mean([s.t for s in cluster]))
        events.append(CoincidenceEvent(t=center, subset=subset, gate=classify_gate(subset)))
        i = j
    return events


@dataclass
class GateCountTable:
    """Per-electrode gate realization counts in fixed column order."""

    electrodes: list[str]
    counts: np.ndarray  # (n_electrodes, 7) int64, columns = GATE_COLUMNS

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (len(self.electrodes), len(GATE_COLUMNS)):
            raise ValueError("count matrix shape does not match electrodes and gate columns")
        if np.any(self.counts < 0):
            raise ValueError("gate counts must be >= 0")

    @property
    def totals(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    def _with_total(self) -> np.ndarray:
        return np.column_stack([self.counts, self.totals])

    def averages(self) -> np.ndarray:
        return self._with_total().mean(axis=0)

    def stdevs(self) -> np.ndarray:
        """Sample standard deviation per column; zero for a single row."""
        block = self._with_total()
        if block.shape[0] < 2:
            return np.zeros(block.shape[1])
        return block.std(axis=0, ddof=1)

    def medians(self) -> np.ndarray:
        return np.median(self._with_total(), axis=0)

    def row(self, electrode: str) -> dict[GateKind, int]:
        i = self.electrodes.index(electrode)
        return {kind: int(self.counts[i, k]) for k, kind in enumerate(GATE_COLUMNS)}


def segment_realizations(
    events: list[CoincidenceEvent], segmentation_gap: int = DEFAULT_SEGMENTATION_GAP
) -> list[CoincidenceEvent]:
    """Collapse a time-sorted event list into separated gate realizations.

    Consecutive events whose centers differ by at most segmentation_gap
    belong to one realization whose subset is the union of theirs; only a
    larger gap starts a new realization.
    """
    if not events:
        return []
    out: list[CoincidenceEvent] = []
    group = [events[0]]
    for ev in events[1:]:
        if ev.t - group[-1].t > segmentation_gap:
            out.append(_collapse(group))
            group = [ev]
        else:
            group.append(ev)
    out.append(_collapse(group))
    return out


def _collapse(group: list[CoincidenceEvent]) -> CoincidenceEvent:
    subset = frozenset().union(*(ev.subset for ev in group))
    center = float(np.mean([ev.t for ev in group]))
    return CoincidenceEvent(t=center, subset=subset, gate=classify_gate(subset))


def count_gates(
    events_by_electrode: dict[str, list[CoincidenceEvent]],
    segmentation_gap: int = DEFAULT_SEGMENTATION_GAP,
) -> GateCountTable:
    """Segment each electrode's events into realizations and tally kinds.

    Electrodes are ordered naturally (E2 before E10). The table carries
    average, sample standard deviation, and median helpers per column.
    """
    labels = sorted(events_by_electrode, key=natural_key)
    counts = np.zeros((len(labels), len(GATE_COLUMNS)), dtype=np.int64)
    col = {kind: k for k, kind in enumerate(GATE_COLUMNS)}
    for i, label in enumerate(labels):
        events = sorted(events_by_electrode[label], key=lambda ev: ev.t)
        for realization in segment_realizations(events, segmentation_gap):
            counts[i, col[realization.gate]] += 1
    return GateCountTable(electrodes=labels, counts=counts)


def rank_gates(table: GateCountTable) -> list[list[str]]:
    """Gate hierarchy by descending pooled total count.

    SELECT_X and SELECT_Y pool into one "SELECT" entry. Exact ties share
    a group; within a group names sort alphabetically.
    """
    if not table.electrodes:
        raise ValueError("cannot rank an empty table")
    col_totals = table.counts.sum(axis=0)
    pooled: dict[str, int] = {}
    for k, kind in enumerate(GATE_COLUMNS):
        name = "SELECT" if kind in (GateKind.SELECT_X, GateKind.SELECT_Y) else kind.name
        pooled[name] = pooled.get(name, 0) + int(col_totals[k])
    groups: dict[int, list[str]] = {}
    for name, total in pooled.items():
        groups.setdefault(total, []).append(name)
    return [sorted(groups[total]) for total in sorted(groups, reverse=True)]


# --- frequency domains --------------------------------------------------


@dataclass(frozen=True)
class FrequencyDomain:
    """4-connected component of nodes with normalized frequency above the
    domain threshold, for one input pair."""

    pair: str
    nodes: frozenset[tuple[int, int]]
    centroid: tuple[float, float]

    @property
    def size(self) -> int:
        return len(self.nodes)


def extract_domains(
    freq: FrequencyMatrix, threshold: float = DEFAULT_DOMAIN_THRESHOLD
) -> list[FrequencyDomain]:
    """High-frequency domains: 4-connected components of {omega > threshold}."""
    if not freq.normalized:
        raise ValueError("extract_domains needs a normalized frequency matrix")
    top = topology(freq.grid)
    hot = np.zeros((freq.grid.height, freq.grid.width), dtype=bool)
    hot[top.ys, top.xs] = freq.values > threshold
    labels, n = ndimage.label(hot, structure=FOUR_CONNECTED)
    domains = []
    for comp in range(1, n + 1):
        ys, xs = np.nonzero(labels == comp)
        nodes = frozenset((int(x), int(y)) for x, y in zip(xs, ys))
        centroid = (float(xs.mean()), float(ys.mean()))
        domains.append(FrequencyDomain(pair=freq.pair, nodes=nodes, centroid=centroid))
    domains.sort(key=lambda d: (d.centroid[1], d.centroid[0]))
    return domains


def frequency_gate_sites(
    domains01: list[FrequencyDomain],
    domains10: list[FrequencyDomain],
    domains11: list[FrequencyDomain],
    target: GateKind,
) -> list[tuple[int, int]]:
    """Nodes whose domain membership across the three runs matches the
    target's truth vector, row-major order."""
    members = []
    for doms in (domains01, domains10, domains11):
        nodes: set[tuple[int, int]] = set()
        for d in doms:
            nodes |= d.nodes
        members.append(nodes)
    everywhere = members[0] | members[1] | members[2]
    want = target.truth
    hits = [pos for pos in everywhere if tuple(pos in m for m in members) == want]
    hits.sort(key=lambda pos: (pos[1], pos[0]))
    return hits


def render_domain_overlay(
    grid: ConductiveGrid,
    domains01: list[FrequencyDomain],
    domains10: list[FrequencyDomain],
    domains11: list[FrequencyDomain],
) -> np.ndarray:
    """Color-coded (h, w, 3) map: (01) domains black, (10) red, (11) green,
    other conductive nodes light gray, background white. Later layers win
    where domains overlap, so black sits on top."""
    img = np.full((grid.height, grid.width, 3), 255, dtype=np.uint8)
    top = topology(grid)
    img[top.ys, top.xs] = (200, 200, 200)
    for doms, color in (
        (domains11, (0, 160, 0)),
        (domains10, (255, 0, 0)),
        (domains01, (0, 0, 0)),
    ):
        for d in doms:
            for x, y in d.nodes:
                img[y, x] = color
    return img


def write_domain_overlay(path, grid, domains01, domains10, domains11) -> Path:
    img = render_domain_overlay(grid, domains01, domains10, domains11)
    write_png(path, img)
    return Path(path)


# --- activity intervals --------------------------------------------------


def activity_gate(averages: dict[str, float], interval: tuple[float, float]) -> GateKind | None:
    """Interval classifier over mean activities for the three input pairs.

    An input pair reads logical True when its average activity lies inside
    the closed interval. All-False patterns return None.
    """
    lo, hi = float(interval[0]), float(interval[1])
    if hi < lo:
        raise ValueError(f"empty interval [{lo}, {hi}]")
    missing = [p for p in PAIR_LABELS if p not in averages]
    if missing:
        raise ValueError(f"missing activity averages for pairs: {missing}")
    subset = frozenset(p for p in PAIR_LABELS if lo <= float(averages[p]) <= hi)
    if not subset:
        return None
    return classify_gate(subset)


# --- structural channel functions ----------------------------------------


def channel_functions(
    grid: ConductiveGrid,
    params: SimParams,
    input_sites: tuple[tuple[int, int], tuple[int, int]],
    output_regions: dict[str, np.ndarray],
    n_iters: int,
    input_stimulus=None,
    every: int = 1,
) -> dict[str, GateKind | None]:
    """Which gate each output region implements, by direct simulation.

    Runs the three input pairs; a region fires for a pair when any of its
    nodes exceeds u_active at any sampled iteration. The per-region subset
    of firing pairs names the gate; a region that never fires maps to None.
    """
    from .model import GATE_PAIRS

    fired_by_pair: dict[str, dict[str, bool]] = {}
    for pair in GATE_PAIRS:
        tracker = RegionActivityTracker(grid, params, output_regions, every=every)
        run(grid, params, pair, input_sites, n_iters,
            observers=[tracker], input_stimulus=input_stimulus)
        fired_by_pair[pair.label] = tracker.fired()

    out: dict[str, GateKind | None] = {}
    for name in output_regions:
        subset = frozenset(p for p in PAIR_LABELS if fired_by_pair[p][name])
        out[name] = classify_gate(subset) if subset else None
    return out


# --- file exports ---------------------------------------------------------


def write_gate_count_csv(path, table: GateCountTable) -> Path:
    """Count table as CSV: one row per electrode, one column per gate
    notation plus Total, then Average, StDev, and Median summary rows."""
    path = Path(path)
    headers = [kind.notation for kind in GATE_COLUMNS]
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("electrode," + ",".join(headers) + ",Total\n")
        for label, row, total in zip(table.electrodes, table.counts, table.totals):
            cells = ",".join(str(int(c)) for c in row)
            fh.write(f"{label},{cells},{int(total)}\n")
        for name, values in (
            ("Average", table.averages()),
            ("StDev", table.stdevs()),
            ("Median", table.medians()),
        ):
            cells = ",".join(f"{v:.2f}" for v in values)
            fh.write(f"{name},{cells}\n")
    return path


def write_event_csv(path, events_by_electrode: dict[str, list[CoincidenceEvent]]) -> Path:
    """Coincidence event log: electrode, t, subset (sorted pair labels
    joined by +), gate name."""
    path = Path(path)
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("electrode,t,subset,gate\n")
        for label in sorted(events_by_electrode, key=natural_key):
            for ev in sorted(events_by_electrode[label], key=lambda e: e.t):
                subset = "+".join(sorted(ev.subset))
                fh.write(f"{label},{ev.t!r},{subset},{ev.gate.name}\n")
    return path


def read_spike_params(obj: dict) -> dict:
    """Validate optional spiking-analysis overrides from a config mapping."""
    out = {
        "threshold": DEFAULT_SPIKE_THRESHOLD,
        "min_separation": DEFAULT_MIN_SEPARATION,
        "window": DEFAULT_COINCIDENCE_WINDOW,
        "segmentation_gap": DEFAULT_SEGMENTATION_GAP,
    }
    for key in out:
        if key in obj:
            val = obj[key]
            if not isinstance(val, (int, float)) or val < 0:
                raise ConfigError(f"spiking parameter {key} must be a number >= 0")
            out[key] = val
    out["min_separation"] = int(out["min_separation"])
    out["window"] = int(out["window"])
    out["segmentation_gap"] = int(out["segmentation_gap"])
    return out
