"""Declarative experiment scenarios: load and validate a JSON config,
run the requested input pairs with the requested observers, apply the
selected analyses, and emit a deterministic artifact directory.

Re-running a scenario reproduces byte-identical artifacts; nothing here
depends on wall-clock time, the worker count, or any RNG.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import gates as gates_mod
from . import observe
from .errors import ArtifactIOError, ConfigError
from .grid import (
    ConductiveGrid,
    ElectrodeSet,
    GeometrySpec,
    ThresholdSpec,
    place_electrodes,
    synthesize,
    threshold_mask,
)
from .imgio import load_image
from .model import (
    GATE_PAIRS,
    InputPair,
    SimParams,
    Stimulus,
    nodes_within,
    run,
    save_checkpoint,
)

ANALYSES = ("structural", "frequency", "activity", "spiking")

DEFAULT_N_ITERS = 142000
DEFAULT_ACTIVITY_TAIL = 80000

LABEL_RE = re.compile(r"^[A-Za-z0-9-]+$")

SWEEPABLE = (
    "c2",
    "u_active",
    "u_display",
    "n_iters",
    "spike_threshold",
    "min_separation",
    "coincidence_window",
    "segmentation_gap",
    "domain_threshold",
)


@dataclass(frozen=True)
class Region:
    """Named disc of conductive nodes used as a structural output port."""

    label: str
    center: tuple[int, int]
    radius: float


@dataclass
class Scenario:
    grid: ConductiveGrid
    params: SimParams
    electrodes: ElectrodeSet
    input_labels: tuple[str, str]
    pairs: tuple[InputPair, ...]
    n_iters: int
    stimulus: Stimulus
    cadence: dict
    record_frames: bool
    analyses: tuple[str, ...]
    spiking: dict
    frequency_opts: dict
    activity_opts: dict
    regions: tuple[Region, ...]
    resolved: dict = field(repr=False, default_factory=dict)

    @property
    def input_sites(self) -> tuple[tuple[int, int], tuple[int, int]]:
        ex = self.electrodes.get(self.input_labels[0])
        ey = self.electrodes.get(self.input_labels[1])
        return ((ex.x, ex.y), (ey.x, ey.y))


def _require(obj: dict, key: str, context: str):
    if key not in obj:
        raise ConfigError(f"{context}: missing required key {key!r}")
    return obj[key]


def _as_int(value, context: str) -> int:
    if isinstance(value, bool) or not isinstance(value, (int, float)) or value != int(value):
        raise ConfigError(f"{context}: expected an integer, got {value!r}")
    return int(value)


def _build_grid(obj: dict, base_dir: Path) -> tuple[ConductiveGrid, dict]:
    if not isinstance(obj, dict):
        raise ConfigError("grid section must be a mapping")
    has_image = "image" in obj
    has_geometry = "geometry" in obj
    if has_image == has_geometry:
        raise ConfigError("grid section needs exactly one of 'image' or 'geometry'")
    if has_image:
        path = Path(obj["image"])
        if not path.is_absolute():
            path = base_dir / path
        tspec = ThresholdSpec()
        if "threshold" in obj:
            t = obj["threshold"]
            try:
                tspec = ThresholdSpec(
                    r_min=int(t.get("r_min", 40)),
                    g_min=int(t.get("g_min", 19)),
                    b_min=int(t.get("b_min", 19)),
                )
            except (AttributeError, TypeError, ValueError) as exc:
                raise ConfigError(f"grid.threshold: {exc}") from exc
        grid = threshold_mask(load_image(path), tspec)
        resolved = {
            "image": str(path),
            "threshold": {"r_min": tspec.r_min, "g_min": tspec.g_min, "b_min": tspec.b_min},
        }
    else:
        g = obj["geometry"]
        if not isinstance(g, dict):
            raise ConfigError("grid.geometry must be a mapping")
        width = _as_int(_require(g, "width", "grid.geometry"), "grid.geometry.width")
        height = _as_int(_require(g, "height", "grid.geometry"), "grid.geometry.height")
        shapes = _require(g, "shapes", "grid.geometry")
        if not isinstance(shapes, list):
            raise ConfigError("grid.geometry.shapes must be a list")
        grid = synthesize(width, height, GeometrySpec.from_obj(shapes))
        resolved = {"geometry": {"width": width, "height": height, "shapes": shapes}}
    if grid.conductive_count == 0:
        raise ConfigError("the configured grid has no conductive nodes")
    return grid, resolved


def _build_params(obj: dict) -> SimParams:
    defaults = SimParams()
    if obj is None:
        return defaults
    if not isinstance(obj, dict):
        raise ConfigError("params section must be a mapping")
    fields = ("dt", "dx", "d_u", "a", "b", "c1", "c2", "u_active", "u_display")
    unknown = set(obj) - set(fields)
    if unknown:
        raise ConfigError(f"params: unknown keys {sorted(unknown)}")
    kwargs = {}
    for name in fields:
        if name in obj:
            val = obj[name]
            if isinstance(val, bool) or not isinstance(val, (int, float)):
                raise ConfigError(f"params.{name}: expected a number, got {val!r}")
            kwargs[name] = float(val)
    return SimParams(**kwargs)


def _build_electrodes(cfg: dict, grid: ConductiveGrid) -> tuple[ElectrodeSet, list[dict]]:
    coords: list[tuple[str, int, int]] = []
    listed = cfg.get("electrodes", [])
    if not isinstance(listed, list):
        raise ConfigError("electrodes must be a list")
    for i, e in enumerate(listed):
        try:
            label, x, y = str(e["label"]), int(e["x"]), int(e["y"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"electrodes[{i}]: {exc}") from exc
        coords.append((label, x, y))
    layout = cfg.get("electrode_grid")
    if layout is not None:
        try:
            x0, y0 = float(layout["x0"]), float(layout["y0"])
            dx, dy = float(layout["dx"]), float(layout["dy"])
            nx, ny = int(layout["nx"]), int(layout["ny"])
            prefix = str(layout.get("prefix", "E"))
            start = int(layout.get("start", 1))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"electrode_grid: {exc}") from exc
        if nx < 1 or ny < 1:
            raise ConfigError("electrode_grid: nx and ny must be >= 1")
        k = start
        for j in range(ny):
            for i in range(nx):
                coords.append((f"{prefix}{k}", int(round(x0 + i * dx)), int(round(y0 + j * dy))))
                k += 1
    for label, _, _ in coords:
        if not LABEL_RE.match(label):
            raise ConfigError(
                f"electrode label {label!r} may only use letters, digits, and hyphens"
            )
    electrodes = place_electrodes(grid, coords)
    resolved = [{"label": e.label, "x": e.x, "y": e.y} for e in electrodes]
    return electrodes, resolved


def _build_stimulus(obj) -> Stimulus:
    if obj is None:
        return Stimulus(center=(0, 0))
    if not isinstance(obj, dict):
        raise ConfigError("stimulus section must be a mapping")
    mode = obj.get("mode", "impulse")
    try:
        return Stimulus(
            center=(0, 0),
            radius=float(obj.get("radius", 5.0)),
            mode=mode,
            amplitude=float(obj.get("amplitude", 1.0)),
            duration=int(obj.get("duration", 0)),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"stimulus: {exc}") from exc


def _build_regions(obj, grid: ConductiveGrid) -> tuple[Region, ...]:
    if obj is None:
        return ()
    listed = obj.get("regions", [])
    if not isinstance(listed, list):
        raise ConfigError("structural.regions must be a list")
    regions = []
    seen = set()
    for i, r in enumerate(listed):
        try:
            label = str(r["label"])
            center = (int(r["center"][0]), int(r["center"][1]))
            radius = float(r.get("radius", 2.0))
        except (KeyError, TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"structural.regions[{i}]: {exc}") from exc
        if not LABEL_RE.match(label):
            raise ConfigError(f"region label {label!r} may only use letters, digits, and hyphens")
        if label in seen:
            raise ConfigError(f"duplicate region label {label!r}")
        seen.add(label)
        if nodes_within(grid, center, radius).size == 0:
            raise ConfigError(f"region {label!r} contains no conductive nodes")
        regions.append(Region(label=label, center=center, radius=radius))
    return tuple(regions)


def load_scenario(source, base_dir: Path | None = None, overrides: dict | None = None) -> Scenario:
    """Build a validated Scenario from a JSON file path or a config dict.

    Dotted-path overrides (e.g. {"params.c2": 0.107}) are applied to the
    raw config before validation.
    """
    if isinstance(source, (str, Path)):
        path = Path(source)
        base_dir = base_dir or path.parent
        try:
            with open(path, "r", encoding="utf-8") as fh:
                cfg = json.load(fh)
        except OSError as exc:
            raise ArtifactIOError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    else:
        cfg = json.loads(json.dumps(source))
        base_dir = base_dir or Path.cwd()
    if not isinstance(cfg, dict):
        raise ConfigError("config root must be a JSON object")
    for key, value in (overrides or {}).items():
        _apply_override(cfg, key, value)

    known = {
        "grid", "params", "electrodes", "electrode_grid", "inputs", "pairs", "n_iters",
        "stimulus", "cadence", "record_frames", "analyses", "spiking", "frequency",
        "activity", "structural", "output",
    }
    unknown = set(cfg) - known
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")

    grid, grid_resolved = _build_grid(_require(cfg, "grid", "config"), Path(base_dir))
    params = _build_params(cfg.get("params"))
    electrodes, electrodes_resolved = _build_electrodes(cfg, grid)

    inputs = cfg.get("inputs", ["E7", "E17"])
    if not (isinstance(inputs, list) and len(inputs) == 2):
        raise ConfigError("inputs must be a two-element list of electrode labels")
    input_labels = (str(inputs[0]), str(inputs[1]))
    for label in input_labels:
        electrodes.get(label)  # raises ConfigError when missing

    raw_pairs = cfg.get("pairs", ["01", "10", "11"])
    if not isinstance(raw_pairs, list) or not raw_pairs:
        raise ConfigError("pairs must be a non-empty list")
    pairs = tuple(InputPair.parse(p) for p in raw_pairs)
    if len(set(pairs)) != len(pairs):
        raise ConfigError("pairs contains duplicates")

    n_iters = _as_int(cfg.get("n_iters", DEFAULT_N_ITERS), "n_iters")
    if n_iters < 0:
        raise ConfigError("n_iters must be >= 0")

    stimulus = _build_stimulus(cfg.get("stimulus"))

    cadence = {"potential": 1, "activity": 1, "frequency": 1, "frames": 150}
    for key, val in (cfg.get("cadence") or {}).items():
        if key not in cadence:
            raise ConfigError(f"cadence: unknown observer {key!r}")
        val = _as_int(val, f"cadence.{key}")
        if val < 1:
            raise ConfigError(f"cadence.{key} must be >= 1")
        cadence[key] = val

    analyses = cfg.get("analyses", [])
    if not isinstance(analyses, list):
        raise ConfigError("analyses must be a list")
    bad = [a for a in analyses if a not in ANALYSES]
    if bad:
        raise ConfigError(f"unknown analyses {bad}; choose from {list(ANALYSES)}")
    if "spiking" in analyses and len(electrodes) == 0:
        raise ConfigError("spiking analysis needs at least one electrode")

    spiking = gates_mod.read_spike_params(cfg.get("spiking") or {})

    frequency_opts = {"domain_threshold": gates_mod.DEFAULT_DOMAIN_THRESHOLD}
    for key, val in (cfg.get("frequency") or {}).items():
        if key != "domain_threshold":
            raise ConfigError(f"frequency: unknown key {key!r}")
        if isinstance(val, bool) or not isinstance(val, (int, float)) or not 0 <= val <= 1:
            raise ConfigError("frequency.domain_threshold must be a number in [0, 1]")
        frequency_opts["domain_threshold"] = float(val)

    activity_opts = {"intervals": [], "tail_start": DEFAULT_ACTIVITY_TAIL}
    act = cfg.get("activity") or {}
    if not isinstance(act, dict):
        raise ConfigError("activity section must be a mapping")
    if "tail_start" in act:
        tail = _as_int(act["tail_start"], "activity.tail_start")
        if tail < 0:
            raise ConfigError("activity.tail_start must be >= 0")
        activity_opts["tail_start"] = tail
    for i, iv in enumerate(act.get("intervals", [])):
        try:
            lo, hi = float(iv[0]), float(iv[1])
        except (TypeError, ValueError, IndexError) as exc:
            raise ConfigError(f"activity.intervals[{i}]: {exc}") from exc
        if hi < lo:
            raise ConfigError(f"activity.intervals[{i}]: empty interval [{lo}, {hi}]")
        activity_opts["intervals"].append([lo, hi])

    regions = _build_regions(cfg.get("structural"), grid)
    if "structural" in analyses and not regions:
        raise ConfigError("structural analysis needs structural.regions")

    record_frames = bool(cfg.get("record_frames", False))

    resolved = {
        "grid": grid_resolved,
        "params": {
            "dt": params.dt, "dx": params.dx, "d_u": params.d_u, "a": params.a,
            "b": params.b, "c1": params.c1, "c2": params.c2,
            "u_active": params.u_active, "u_display": params.u_display,
        },
        "electrodes": electrodes_resolved,
        "inputs": list(input_labels),
        "pairs": [p.label for p in pairs],
        "n_iters": n_iters,
        "stimulus": {
            "mode": stimulus.mode, "radius": stimulus.radius,
            "amplitude": stimulus.amplitude, "duration": stimulus.duration,
        },
        "cadence": cadence,
        "record_frames": record_frames,
        "analyses": list(analyses),
        "spiking": spiking,
        "frequency": frequency_opts,
        "activity": activity_opts,
        "structural": {
            "regions": [
                {"label": r.label, "center": list(r.center), "radius": r.radius}
                for r in regions
            ]
        },
        "mask_sha256": grid.mask_hash(),
    }
    if "output" in cfg:
        resolved["output"] = str(cfg["output"])

    return Scenario(
        grid=grid,
        params=params,
        electrodes=electrodes,
        input_labels=input_labels,
        pairs=pairs,
        n_iters=n_iters,
        stimulus=stimulus,
        cadence=cadence,
        record_frames=record_frames,
        analyses=tuple(analyses),
        spiking=spiking,
        frequency_opts=frequency_opts,
        activity_opts=activity_opts,
        regions=regions,
        resolved=resolved,
    )


def _apply_override(cfg: dict, dotted: str, value) -> None:
    parts = dotted.split(".")
    node = cfg
    for part in parts[:-1]:
        nxt = node.get(part)
        if nxt is None:
            nxt = node[part] = {}
        if not isinstance(nxt, dict):
            raise ConfigError(f"override {dotted!r}: {part!r} is not a mapping")
        node = nxt
    node[parts[-1]] = value


def _sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def _canonical_numbers(obj):
    """Collapse integral floats to ints so JSON output does not depend on
    whether a caller wrote 5 or 5.0 for the same value."""
    if isinstance(obj, dict):
        return {k: _canonical_numbers(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_canonical_numbers(v) for v in obj]
    if isinstance(obj, float) and obj.is_integer():
        return int(obj)
    return obj


def _dump_json(path: Path, obj) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(_canonical_numbers(obj), fh, indent=2, sort_keys=True)
        fh.write("\n")


class _Artifacts:
    """Collects written files and hashes them for the summary manifest."""

    def __init__(self, outdir: Path):
        self.outdir = outdir
        self.paths: list[Path] = []

    def add(self, path: Path) -> Path:
        self.paths.append(Path(path))
        return path

    def manifest(self) -> dict[str, str]:
        out = {}
        for path in self.paths:
            rel = path.relative_to(self.outdir).as_posix()
            out[rel] = _sha256_file(path)
        return dict(sorted(out.items()))


def run_scenario(scenario: Scenario, outdir) -> dict:
    """Execute every requested input pair, analyze, and write artifacts.

    Returns the summary that is also written to summary.json: resolved
    config digest, per-analysis results, and a sha256 manifest of every
    artifact file.
    """
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactIOError(f"cannot create output directory {outdir}: {exc}") from exc
    art = _Artifacts(outdir)

    config_text = json.dumps(
        _canonical_numbers(scenario.resolved), indent=2, sort_keys=True
    ) + "\n"
    config_path = outdir / "resolved_config.json"
    with open(config_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(config_text)
    art.add(config_path)

    want = set(scenario.analyses)
    probes: dict[str, observe.PotentialProbe] = {}
    meters: dict[str, observe.ActivityMeter] = {}
    freqs: dict[str, observe.FrequencyAccumulator] = {}
    trackers: dict[str, observe.RegionActivityTracker] = {}
    coverage: dict[str, float] = {}

    region_nodes = {
        r.label: nodes_within(scenario.grid, r.center, r.radius) for r in scenario.regions
    }

    for pair in scenario.pairs:
        label = pair.label
        observers = []
        cover = observe.CoverageTracker(scenario.grid, scenario.params)
        observers.append(cover)
        if "spiking" in want and len(scenario.electrodes):
            probes[label] = observe.PotentialProbe(
                scenario.grid, scenario.electrodes, every=scenario.cadence["potential"]
            )
            observers.append(probes[label])
        if "activity" in want:
            meters[label] = observe.ActivityMeter(
                scenario.grid, scenario.params, every=scenario.cadence["activity"]
            )
            observers.append(meters[label])
        if "frequency" in want:
            freqs[label] = observe.FrequencyAccumulator(
                scenario.grid, scenario.params, every=scenario.cadence["frequency"]
            )
            observers.append(freqs[label])
        if "structural" in want and region_nodes:
            trackers[label] = observe.RegionActivityTracker(
                scenario.grid, scenario.params, region_nodes
            )
            observers.append(trackers[label])
        if scenario.record_frames:
            observers.append(
                observe.FrameRecorder(
                    scenario.grid,
                    scenario.params,
                    outdir / "frames",
                    label,
                    every=scenario.cadence["frames"],
                )
            )
            recorder = observers[-1]
        else:
            recorder = None

        final = run(
            scenario.grid,
            scenario.params,
            pair,
            scenario.input_sites,
            scenario.n_iters,
            observers=observers,
            input_stimulus=scenario.stimulus,
        )
        coverage[label] = cover.fraction()

        ckpt = outdir / f"state_{label}.ckpt"
        save_checkpoint(ckpt, final, scenario.grid)
        art.add(ckpt)
        if recorder is not None:
            for path in recorder.written:
                art.add(path)
        if label in probes:
            for trace in probes[label].traces(label):
                art.add(
                    observe.write_trace_csv(
                        outdir / f"trace_{trace.electrode}_{label}.csv", trace
                    )
                )
        if label in meters:
            art.add(
                observe.write_activity_csv(
                    outdir / f"activity_{label}.csv", meters[label].trace(label)
                )
            )
        if label in freqs:
            norm = freqs[label].matrix(label).normalize()
            art.add(observe.write_frequency_csv(outdir / f"freq_{label}.csv", norm))
            art.add(observe.write_frequency_pgm(outdir / f"freq_{label}.pgm", norm))

    results: dict = {"coverage": dict(sorted(coverage.items()))}
    results["coverage"]["any"] = _union_coverage(scenario, freqs, coverage)

    if "spiking" in want:
        results["spiking"] = _spiking_analysis(scenario, probes, art, outdir)
    if "frequency" in want:
        results["frequency"] = _frequency_analysis(scenario, freqs, art, outdir)
    if "activity" in want:
        results["activity"] = _activity_analysis(scenario, meters)
        art.add(_write_activity_means(outdir, results["activity"]))
    if "structural" in want:
        results["structural"] = _structural_analysis(scenario, trackers)
        art.add(_write_structural_csv(outdir, results["structural"]))

    summary = {
        "config_sha256": hashlib.sha256(config_text.encode()).hexdigest(),
        "n_pairs": len(scenario.pairs),
        "analyses": results,
        "manifest": art.manifest(),
    }
    _dump_json(outdir / "summary.json", summary)
    return summary


def _union_coverage(scenario, freqs, coverage) -> float:
    # with frequency accumulators the union is exact; otherwise fall back
    # to the max single-pair coverage, which equals the union for nested
    # excitation footprints
    if freqs and len(freqs) == len(scenario.pairs):
        union = None
        for acc in freqs.values():
            hot = acc.counts > 0
            union = hot if union is None else (union | hot)
        if union is None or union.size == 0:
            return 0.0
        return float(np.count_nonzero(union)) / union.size
    return max(coverage.values(), default=0.0)


def _spiking_analysis(scenario, probes, art: _Artifacts, outdir: Path) -> dict:
    opts = scenario.spiking
    spikes_by_electrode: dict[str, dict[str, list]] = {
        e.label: {p: [] for p in gates_mod.PAIR_LABELS} for e in scenario.electrodes
    }
    for pair_label, probe in probes.items():
        for trace in probe.traces(pair_label):
            spikes_by_electrode[trace.electrode][pair_label] = gates_mod.detect_spikes(
                trace, threshold=opts["threshold"], min_separation=opts["min_separation"]
            )
    events = {
        label: gates_mod.merge_coincidences(
            by_pair["01"], by_pair["10"], by_pair["11"], window=opts["window"]
        )
        for label, by_pair in spikes_by_electrode.items()
    }
    table = gates_mod.count_gates(events, segmentation_gap=opts["segmentation_gap"])
    hierarchy = gates_mod.rank_gates(table)
    art.add(gates_mod.write_event_csv(outdir / "events.csv", events))
    art.add(gates_mod.write_gate_count_csv(outdir / "gate_counts.csv", table))
    return {
        "hierarchy": hierarchy,
        "totals": {
            kind.name: int(t)
            for kind, t in zip(gates_mod.GATE_COLUMNS, table.counts.sum(axis=0))
        },
        "n_events": {label: len(evs) for label, evs in sorted(events.items())},
    }


def _frequency_analysis(scenario, freqs, art: _Artifacts, outdir: Path) -> dict:
    threshold = scenario.frequency_opts["domain_threshold"]
    domains = {}
    for pair_label, acc in freqs.items():
        domains[pair_label] = gates_mod.extract_domains(
            acc.matrix(pair_label).normalize(), threshold=threshold
        )
    by_pair = {p: domains.get(p, []) for p in gates_mod.PAIR_LABELS}
    art.add(
        gates_mod.write_domain_overlay(
            outdir / "domains.png", scenario.grid, by_pair["01"], by_pair["10"], by_pair["11"]
        )
    )
    dom_csv = outdir / "domains.csv"
    with open(dom_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("pair,domain,size,centroid_x,centroid_y\n")
        for pair_label in sorted(domains):
            for i, d in enumerate(domains[pair_label]):
                fh.write(
                    f"{pair_label},{i},{d.size},{float(d.centroid[0])!r},"
                    f"{float(d.centroid[1])!r}\n"
                )
    art.add(dom_csv)
    sites_csv = outdir / "gate_sites.csv"
    site_counts = {}
    with open(sites_csv, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("gate,x,y\n")
        for kind in gates_mod.GATE_COLUMNS:
            sites = gates_mod.frequency_gate_sites(
                by_pair["01"], by_pair["10"], by_pair["11"], kind
            )
            site_counts[kind.name] = len(sites)
            for x, y in sites:
                fh.write(f"{kind.name},{x},{y}\n")
    art.add(sites_csv)
    return {
        "domain_counts": {p: len(d) for p, d in sorted(domains.items())},
        "gate_site_counts": site_counts,
    }


def _activity_analysis(scenario, meters) -> dict:
    tail = scenario.activity_opts["tail_start"]
    means = {}
    for pair_label, meter in meters.items():
        trace = meter.trace(pair_label)
        sel = trace.t >= tail
        means[pair_label] = float(trace.a[sel].mean()) if np.any(sel) else 0.0
    gate_per_interval = []
    if len(means) == len(gates_mod.PAIR_LABELS):
        for lo, hi in scenario.activity_opts["intervals"]:
            kind = gates_mod.activity_gate(means, (lo, hi))
            gate_per_interval.append(
                {"interval": [lo, hi], "gate": kind.name if kind else None}
            )
    return {
        "tail_start": tail,
        "means": dict(sorted(means.items())),
        "gates": gate_per_interval,
    }


def _write_activity_means(outdir: Path, result: dict) -> Path:
    path = outdir / "activity_means.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("pair,mean\n")
        for pair_label, mean in result["means"].items():
            fh.write(f"{pair_label},{float(mean)!r}\n")
    return path


def _structural_analysis(scenario, trackers) -> dict:
    fired: dict[str, set] = {r.label: set() for r in scenario.regions}
    for pair_label, tracker in trackers.items():
        for name, hit in tracker.fired().items():
            if hit:
                fired[name].add(pair_label)
    out = {}
    for r in scenario.regions:
        subset = frozenset(fired[r.label])
        kind = gates_mod.classify_gate(subset) if subset else None
        out[r.label] = {
            "fires_on": sorted(subset),
            "gate": kind.name if kind else None,
        }
    return out


def _write_structural_csv(outdir: Path, result: dict) -> Path:
    path = outdir / "structural_gates.csv"
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("region,fires_on,gate\n")
        for label, info in result.items():
            fires = "+".join(info["fires_on"])
            fh.write(f"{label},{fires},{info['gate'] or ''}\n")
    return path


def sweep(config_source, parameter: str, values: list, outdir, base_dir=None) -> dict:
    """Run the scenario once per parameter value and compare coverage.

    The parameter must name one of the sweepable scalars; each run writes
    a full artifact directory under outdir plus a comparative sweep.csv
    and sweep_summary.json at the top.
    """
    if parameter not in SWEEPABLE:
        raise ConfigError(
            f"parameter {parameter!r} is not sweepable; choose from {list(SWEEPABLE)}"
        )
    outdir = Path(outdir)
    try:
        outdir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise ArtifactIOError(f"cannot create output directory {outdir}: {exc}") from exc

    rows = []
    for value in values:
        overrides = {_override_path(parameter): value}
        scenario = load_scenario(config_source, base_dir=base_dir, overrides=overrides)
        subdir = outdir / f"{parameter}_{value}"
        summary = run_scenario(scenario, subdir)
        rows.append(
            {
                "value": value,
                "dir": subdir.name,
                "coverage": summary["analyses"]["coverage"],
                "config_sha256": summary["config_sha256"],
            }
        )

    csv_path = outdir / "sweep.csv"
    pair_cols = sorted({p for row in rows for p in row["coverage"] if p != "any"})
    with open(csv_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("value," + ",".join(f"coverage_{p}" for p in pair_cols) + ",coverage_any\n")
        for row in rows:
            cells = [repr(float(row["coverage"].get(p, 0.0))) for p in pair_cols]
            fh.write(
                f"{row['value']}," + ",".join(cells)
                + f",{float(row['coverage']['any'])!r}\n"
            )

    report = {"parameter": parameter, "runs": rows}
    _dump_json(outdir / "sweep_summary.json", report)
    return report


def _override_path(parameter: str) -> str:
    if parameter in ("c2", "u_active", "u_display"):
        return f"params.{parameter}"
    if parameter == "n_iters":
        return "n_iters"
    if parameter == "spike_threshold":
        return "spiking.threshold"
    if parameter == "coincidence_window":
        return "spiking.window"
    if parameter in ("min_separation", "segmentation_gap"):
        return f"spiking.{parameter}"
    if parameter == "domain_threshold":
        return "frequency.domain_threshold"
    raise ConfigError(f"parameter {parameter!r} is not sweepable")
