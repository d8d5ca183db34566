"""Offline analysis over a previously written artifact directory.

Each mode re-derives gate identifications from the raw observer exports
(trace_*.csv, activity_*.csv, freq_*.csv) without re-running simulations,
so recorded experiments can be re-analyzed under different thresholds.
"""

from __future__ import annotations

import re
import warnings
from pathlib import Path

import numpy as np

from . import gates as gates_mod
from .errors import ArtifactIOError, ConfigError
from .grid import ConductiveGrid
from .model import nodes_within, topology
from .observe import FrequencyMatrix, PotentialTrace, read_trace_csv

MODES = ("spiking", "frequency", "activity", "structural")

TRACE_RE = re.compile(r"^trace_([A-Za-z0-9-]+)_(01|10|11)\.csv$")
ACTIVITY_RE = re.compile(r"^activity_(01|10|11)\.csv$")
FREQ_RE = re.compile(r"^freq_(01|10|11)\.csv$")


def _artifact_dir(path) -> Path:
    path = Path(path)
    if not path.is_dir():
        raise ArtifactIOError(f"artifact directory {path} does not exist")
    return path


def load_traces(artifact_dir) -> dict[str, dict[str, PotentialTrace]]:
    """All potential traces in the directory, keyed electrode then pair."""
    artifact_dir = _artifact_dir(artifact_dir)
    out: dict[str, dict[str, PotentialTrace]] = {}
    for path in sorted(artifact_dir.iterdir()):
        m = TRACE_RE.match(path.name)
        if not m:
            continue
        electrode, pair = m.group(1), m.group(2)
        try:
            t, p = read_trace_csv(path)
        except ValueError as exc:
            raise ArtifactIOError(f"cannot parse {path}: {exc}") from exc
        out.setdefault(electrode, {})[pair] = PotentialTrace(
            electrode=electrode, pair=pair, t=t, p=p
        )
    return out


def grid_from_frequency_csv(path) -> tuple[ConductiveGrid, np.ndarray, bool]:
    """Reconstruct the conductive mask and node values from a freq CSV.

    Returns (grid, values in topology order, normalized flag). Values of
    at most 1 everywhere are taken as normalized; bare counts otherwise.
    """
    try:
        with warnings.catch_warnings():
            # a header-only file is reported as "holds no nodes" below
            warnings.simplefilter("ignore", UserWarning)
            data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ArtifactIOError(f"cannot parse {path}: {exc}") from exc
    if data.size == 0:
        raise ArtifactIOError(f"{path} holds no nodes")
    xs = data[:, 0].astype(np.int64)
    ys = data[:, 1].astype(np.int64)
    vals = data[:, 2]
    if xs.min() < 0 or ys.min() < 0:
        raise ArtifactIOError(f"{path} holds negative coordinates")
    mask = np.zeros((int(ys.max()) + 1, int(xs.max()) + 1), dtype=bool)
    mask[ys, xs] = True
    if np.count_nonzero(mask) != len(xs):
        raise ArtifactIOError(f"{path} lists a node position twice")
    grid = ConductiveGrid(mask)
    top = topology(grid)
    values = np.empty(top.n_nodes, dtype=float)
    values[top.index_map[ys, xs]] = vals
    normalized = bool(np.all(values <= 1.0))
    return grid, values, normalized


def load_frequency_matrices(
    artifact_dir, grid: ConductiveGrid | None = None
) -> dict[str, FrequencyMatrix]:
    """Frequency matrices per pair; the grid is rebuilt from node
    positions unless one is supplied."""
    artifact_dir = _artifact_dir(artifact_dir)
    out: dict[str, FrequencyMatrix] = {}
    for path in sorted(artifact_dir.iterdir()):
        m = FREQ_RE.match(path.name)
        if not m:
            continue
        pair = m.group(1)
        rebuilt, values, normalized = grid_from_frequency_csv(path)
        use = grid if grid is not None else rebuilt
        if grid is not None:
            if topology(grid).n_nodes != values.shape[0]:
                raise ConfigError(
                    f"{path.name} has {values.shape[0]} nodes but the supplied "
                    f"grid has {topology(grid).n_nodes}"
                )
            remap = np.empty_like(values)
            ys, xs = np.nonzero(rebuilt.mask)
            h, w = grid.mask.shape
            if int(ys.max()) >= h or int(xs.max()) >= w:
                raise ConfigError(f"{path.name} nodes fall outside the supplied grid mask")
            target = topology(grid).index_map[ys, xs]
            if np.any(target < 0):
                raise ConfigError(f"{path.name} nodes fall outside the supplied grid mask")
            remap[target] = values[topology(rebuilt).index_map[ys, xs]]
            values = remap
        out[pair] = FrequencyMatrix(
            use, pair, values if normalized else values.astype(np.int64), normalized=normalized
        )
    return out


def analyze_spiking(artifact_dir, outdir: Path, options: dict) -> dict:
    opts = gates_mod.read_spike_params(options)
    traces = load_traces(artifact_dir)
    if not traces:
        raise ArtifactIOError(f"no trace_*.csv files in {artifact_dir}")
    events = {}
    for electrode, by_pair in traces.items():
        spikes = {
            pair: gates_mod.detect_spikes(
                trace, threshold=opts["threshold"], min_separation=opts["min_separation"]
            )
            for pair, trace in by_pair.items()
        }
        events[electrode] = gates_mod.merge_coincidences(
            spikes.get("01", []), spikes.get("10", []), spikes.get("11", []),
            window=opts["window"],
        )
    table = gates_mod.count_gates(events, segmentation_gap=opts["segmentation_gap"])
    written = [
        gates_mod.write_event_csv(outdir / "events.csv", events),
        gates_mod.write_gate_count_csv(outdir / "gate_counts.csv", table),
    ]
    return {
        "hierarchy": gates_mod.rank_gates(table),
        "totals": {
            kind.name: int(t)
            for kind, t in zip(gates_mod.GATE_COLUMNS, table.counts.sum(axis=0))
        },
        "electrodes": table.electrodes,
        "written": [str(p) for p in written],
    }


def analyze_frequency(artifact_dir, outdir: Path, options: dict,
                      grid: ConductiveGrid | None = None) -> dict:
    threshold = float(options.get("domain_threshold", gates_mod.DEFAULT_DOMAIN_THRESHOLD))
    matrices = load_frequency_matrices(artifact_dir, grid=grid)
    if not matrices:
        raise ArtifactIOError(f"no freq_*.csv files in {artifact_dir}")
    domains = {
        pair: gates_mod.extract_domains(matrix.normalize(), threshold=threshold)
        for pair, matrix in matrices.items()
    }
    by_pair = {p: domains.get(p, []) for p in gates_mod.PAIR_LABELS}
    any_grid = next(iter(matrices.values())).grid
    written = [
        gates_mod.write_domain_overlay(
            outdir / "domains.png", any_grid, by_pair["01"], by_pair["10"], by_pair["11"]
        )
    ]
    site_counts = {}
    sites_csv = outdir / "gate_sites.csv"
    with open(sites_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("gate,x,y\n")
        for kind in gates_mod.GATE_COLUMNS:
            sites = gates_mod.frequency_gate_sites(
                by_pair["01"], by_pair["10"], by_pair["11"], kind
            )
            site_counts[kind.name] = len(sites)
            for x, y in sites:
                fh.write(f"{kind.name},{x},{y}\n")
    written.append(sites_csv)
    return {
        "domain_counts": {p: len(d) for p, d in sorted(domains.items())},
        "gate_site_counts": site_counts,
        "written": [str(p) for p in written],
    }


def analyze_activity(artifact_dir, options: dict) -> dict:
    artifact_dir = _artifact_dir(artifact_dir)
    tail = int(options.get("tail_start", 0))
    means: dict[str, float] = {}
    for path in sorted(artifact_dir.iterdir()):
        m = ACTIVITY_RE.match(path.name)
        if not m:
            continue
        try:
            t, a = read_trace_csv(path)
        except ValueError as exc:
            raise ArtifactIOError(f"cannot parse {path}: {exc}") from exc
        sel = t >= tail
        means[m.group(1)] = float(a[sel].mean()) if np.any(sel) else 0.0
    if not means:
        raise ArtifactIOError(f"no activity_*.csv files in {artifact_dir}")
    gates = []
    for iv in options.get("intervals", []):
        lo, hi = float(iv[0]), float(iv[1])
        if set(means) == set(gates_mod.PAIR_LABELS):
            kind = gates_mod.activity_gate(means, (lo, hi))
            gates.append({"interval": [lo, hi], "gate": kind.name if kind else None})
        else:
            raise ConfigError("interval classification needs all three pairs recorded")
    return {"tail_start": tail, "means": dict(sorted(means.items())), "gates": gates}


def analyze_structural(artifact_dir, options: dict) -> dict:
    """Structural gates from recorded node coverage.

    A node with a nonzero excitation count fired at least once, which is
    exactly the region-firing criterion, so freq_*.csv files double as the
    coverage record. Region definitions come from the scenario config.
    """
    regions = options.get("regions")
    if not regions:
        raise ConfigError("structural analysis needs region definitions (pass a config)")
    matrices = load_frequency_matrices(artifact_dir, grid=options.get("grid"))
    if not matrices:
        raise ArtifactIOError(f"no freq_*.csv files in {artifact_dir}")
    any_grid = next(iter(matrices.values())).grid
    out = {}
    for region in regions:
        label = region["label"]
        center = (int(region["center"][0]), int(region["center"][1]))
        radius = float(region.get("radius", 2.0))
        idx = nodes_within(any_grid, center, radius)
        if idx.size == 0:
            raise ConfigError(f"region {label!r} contains no conductive nodes")
        subset = frozenset(
            pair for pair, matrix in matrices.items() if np.any(matrix.values[idx] > 0)
        )
        kind = gates_mod.classify_gate(subset) if subset else None
        out[label] = {"fires_on": sorted(subset), "gate": kind.name if kind else None}
    return out


def analyze(artifact_dir, mode: str, options: dict | None = None, outdir=None) -> dict:
    """Dispatch one analysis mode over an artifact directory.

    Derived files are written next to the inputs unless outdir is given.
    """
    options = dict(options or {})
    if mode not in MODES:
        raise ConfigError(f"unknown analysis mode {mode!r}; choose from {list(MODES)}")
    artifact_dir = _artifact_dir(artifact_dir)
    outdir = Path(outdir) if outdir is not None else artifact_dir
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactIOError(f"cannot create output directory {outdir}: {exc}") from exc
    if mode == "spiking":
        result = analyze_spiking(artifact_dir, outdir, options)
    elif mode == "frequency":
        result = analyze_frequency(artifact_dir, outdir, options, grid=options.get("grid"))
    elif mode == "activity":
        result = analyze_activity(artifact_dir, options)
    else:
        result = analyze_structural(artifact_dir, options)
    return {"mode": mode, "result": result}
