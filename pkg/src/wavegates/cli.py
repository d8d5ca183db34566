"""Command-line front end.

Subcommands mirror the library: simulate runs one scenario config, sweep
repeats it over a parameter range, analyze re-derives gates from recorded
artifacts, render turns a saved state or frequency matrix into a PNG, and
serve exposes the same operations over HTTP.

Exit codes: 0 success, 2 configuration error, 3 artifact I/O error,
4 numerical blowup. The worker count is controlled only by the
WAVEGATES_WORKERS environment variable and never changes results.
"""

from __future__ import annotations

import argparse
import copy
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .errors import ArtifactIOError, ConfigError, WavegatesError
from .imgio import load_pgm, write_png
from .model import load_checkpoint
from .observe import render_frame
from .scenario import load_scenario, run_scenario, sweep

RAMP_STOPS = "zero values map to white, low counts to dark red, the peak to yellow"


def _parse_set(values: list[str]) -> dict:
    overrides = {}
    for item in values:
        if "=" not in item:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        key, _, raw = item.partition("=")
        try:
            overrides[key] = json.loads(raw)
        except json.JSONDecodeError:
            overrides[key] = raw
    return overrides


def _resolve_output(args_output, scenario_output) -> Path:
    if args_output:
        return Path(args_output)
    if scenario_output:
        return Path(scenario_output)
    raise ConfigError("no output directory: pass -o or set 'output' in the config")


def _print_summary(obj) -> None:
    json.dump(obj, sys.stdout, indent=2, sort_keys=True)
    sys.stdout.write("\n")


def cmd_simulate(args) -> int:
    overrides = _parse_set(args.set or [])
    scenario = load_scenario(args.config, overrides=overrides)
    outdir = _resolve_output(args.output, scenario.resolved.get("output"))
    summary = run_scenario(scenario, outdir)
    _print_summary(summary)
    return 0


def cmd_sweep(args) -> int:
    overrides = _parse_set(args.set or [])
    values = []
    for raw in args.values:
        try:
            values.append(json.loads(raw))
        except json.JSONDecodeError as exc:
            raise ConfigError(f"sweep value {raw!r} is not a number") from exc
    base = load_scenario(args.config, overrides=overrides)
    outdir = _resolve_output(args.output, base.resolved.get("output"))
    cfg = copy.deepcopy(base.resolved)
    cfg.pop("mask_sha256", None)
    cfg.pop("output", None)
    if not cfg["structural"]["regions"]:
        cfg.pop("structural")
    report = sweep(cfg, args.param, values, outdir, base_dir=Path(args.config).parent)
    _print_summary(report)
    return 0


def cmd_analyze(args) -> int:
    from .analysis import analyze

    options: dict = {}
    if args.spike_threshold is not None:
        options["threshold"] = args.spike_threshold
    if args.min_separation is not None:
        options["min_separation"] = args.min_separation
    if args.window is not None:
        options["window"] = args.window
    if args.segmentation_gap is not None:
        options["segmentation_gap"] = args.segmentation_gap
    if args.domain_threshold is not None:
        options["domain_threshold"] = args.domain_threshold
    if args.tail_start is not None:
        options["tail_start"] = args.tail_start
    intervals = []
    for raw in args.interval or []:
        parts = raw.split(":")
        if len(parts) != 2:
            raise ConfigError(f"--interval expects lo:hi, got {raw!r}")
        try:
            intervals.append([float(parts[0]), float(parts[1])])
        except ValueError as exc:
            raise ConfigError(f"--interval expects numbers, got {raw!r}") from exc
    if intervals:
        options["intervals"] = intervals

    if args.config:
        scenario = load_scenario(args.config)
        options.setdefault("grid", scenario.grid)
        if scenario.regions:
            options.setdefault(
                "regions", scenario.resolved["structural"]["regions"]
            )
        if "tail_start" not in options:
            options["tail_start"] = scenario.activity_opts["tail_start"]
        if "intervals" not in options and scenario.activity_opts["intervals"]:
            options["intervals"] = scenario.activity_opts["intervals"]

    report = analyze(args.artifact_dir, args.mode, options, outdir=args.output)
    _print_summary(report)
    return 0


def _ramp(norm: np.ndarray) -> np.ndarray:
    """Map normalized frequency to RGB; zero stays white."""
    h, w = norm.shape
    img = np.full((h, w, 3), 255, dtype=np.uint8)
    hot = norm > 0
    v = norm[hot]
    img[hot, 0] = np.rint(255 * (0.25 + 0.75 * v)).astype(np.uint8)
    img[hot, 1] = np.rint(255 * np.clip((v - 0.5) * 2.0, 0.0, 1.0)).astype(np.uint8)
    img[hot, 2] = 0
    return img


def render_file(input_path, output_path, config_path=None) -> Path:
    """Render a saved checkpoint, frequency PGM, or frequency CSV to PNG."""
    src = Path(input_path)
    if not src.exists():
        raise ArtifactIOError(f"input {src} does not exist")
    out = Path(output_path)
    suffix = src.suffix.lower()
    if suffix == ".ckpt":
        if not config_path:
            raise ConfigError("rendering a checkpoint needs --config to rebuild the grid")
        scenario = load_scenario(config_path)
        state, _ = load_checkpoint(src, scenario.grid)
        write_png(out, render_frame(state, scenario.grid, scenario.params))
    elif suffix == ".pgm":
        img = load_pgm(src).astype(float)
        peak = img.max()
        write_png(out, _ramp(img / peak if peak > 0 else img))
    elif suffix == ".csv":
        from .analysis import grid_from_frequency_csv
        from .model import topology

        grid, values, _ = grid_from_frequency_csv(src)
        norm = values / values.max() if values.max() > 0 else values
        top = topology(grid)
        field = np.zeros((grid.height, grid.width))
        field[top.ys, top.xs] = norm
        img = _ramp(field)
        cold = np.zeros_like(field, dtype=bool)
        cold[top.ys, top.xs] = norm == 0
        img[cold] = (200, 200, 200)
        write_png(out, img)
    else:
        raise ConfigError(f"cannot render {src.name}: expected .ckpt, .pgm, or .csv")
    return out


def cmd_render(args) -> int:
    out = render_file(args.input, args.output, args.config)
    _print_summary({"written": str(out)})
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service.app import app

    uvicorn.run(app, host=args.host, port=args.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="wavegates",
        description="Excitation-wave logic on conductive networks.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario config")
    p.add_argument("config", help="scenario JSON file")
    p.add_argument("-o", "--output", help="artifact directory")
    p.add_argument("--set", action="append", metavar="KEY=VALUE",
                   help="override a config field (dotted path, JSON value)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="repeat a scenario over parameter values")
    p.add_argument("config")
    p.add_argument("--param", required=True, help="sweepable parameter name")
    p.add_argument("--values", required=True, nargs="+", help="one or more values")
    p.add_argument("-o", "--output")
    p.add_argument("--set", action="append", metavar="KEY=VALUE")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("analyze", help="re-derive gates from recorded artifacts")
    p.add_argument("artifact_dir")
    p.add_argument("--mode", required=True,
                   choices=["spiking", "frequency", "activity", "structural"])
    p.add_argument("-o", "--output", help="write derived files here instead of in place")
    p.add_argument("--config", help="scenario config supplying grid, regions, intervals")
    p.add_argument("--spike-threshold", type=float)
    p.add_argument("--min-separation", type=int)
    p.add_argument("--window", type=int)
    p.add_argument("--segmentation-gap", type=int)
    p.add_argument("--domain-threshold", type=float)
    p.add_argument("--tail-start", type=int)
    p.add_argument("--interval", action="append", metavar="LO:HI",
                   help="activity interval, repeatable")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("render", help=f"PNG from .ckpt, .pgm, or freq .csv ({RAMP_STOPS})")
    p.add_argument("input")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--config", help="scenario config, required for checkpoints")
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("serve", help="run the HTTP service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except WavegatesError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
