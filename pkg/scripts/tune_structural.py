"""Tuning run that fixed the structural-gate geometry in
configs/structural_gate.json.

The device is a bus with five output ports:

* z1 hangs off the bus to the LEFT of a width staircase (a one-way
  ramp: gradual 3 -> 16 widening left-to-right, abrupt 16 -> 3 drop
  right-to-left).  A front entering from the right dies at the drop,
  so z1 fires only when the left input was stimulated: z1 = x.
* z2 and z3 hang off the bus to the RIGHT of the staircase and are
  reached from either end: z2 = z3 = x + y.
* z4 and z5 sit inside a wide chamber fed by two narrow inlets whose
  mouths are 8 nodes apart.  A single inlet front enters the chamber
  as a fragment below the critical size and dies within a few nodes;
  two near-simultaneous fronts merge into a front wide enough to
  cross: z4 = z5 = xy.

Free parameters fixed by this run: the x position of the right input
port (which sets the arrival stagger of the two chamber inlets for
pair 11) and the total iteration budget.  Route lengths from the two
inputs to the chamber mouths differ, and the staircase conducts about
40 percent slower per node than a plain channel, so the port position
is scanned until the mouth-arrival offset for pair 11 falls well
inside the merge tolerance (about +-2500 iterations; single-front
death was measured at 3 to 6 nodes of chamber penetration).

Usage:
    python3 scripts/tune_structural.py            verify the frozen geometry
    python3 scripts/tune_structural.py --scan     repeat the port-position scan
"""

import argparse
import json
from pathlib import Path

from wavegates.model import InputPair, nodes_within, run
from wavegates.observe import RegionActivityTracker
from wavegates.scenario import load_scenario

CONFIG = Path(__file__).resolve().parent.parent / "configs" / "structural_gate.json"

FROZEN_PORT_X = 296
SCAN_PORT_XS = (288, 292, 296, 300)


def scenario_with_port(port_x: int):
    with open(CONFIG, "r", encoding="utf-8") as fh:
        cfg = json.load(fh)
    shapes = cfg["grid"]["geometry"]["shapes"]
    bus = max(
        (s for s in shapes if s["type"] == "channel" and s["start"][1] == s["end"][1] == 24),
        key=lambda s: s["end"][0],
    )
    bus["end"][0] = port_x
    for e in cfg["electrodes"]:
        if e["label"] == "E17":
            e["x"] = port_x - 2
    cfg["analyses"] = ["structural"]
    return load_scenario(cfg, base_dir=CONFIG.parent)


def case_analysis(scenario, extra_points=None, n_iters=None):
    """Run all three input pairs and report per-region first arrivals."""
    region_nodes = {
        r.label: nodes_within(scenario.grid, r.center, r.radius) for r in scenario.regions
    }
    for name, pt in (extra_points or {}).items():
        region_nodes[name] = nodes_within(scenario.grid, pt, 2.0)
    table = {}
    for pair in (InputPair(0, 1), InputPair(1, 0), InputPair(1, 1)):
        tracker = RegionActivityTracker(scenario.grid, scenario.params, region_nodes)
        run(
            scenario.grid,
            scenario.params,
            pair,
            scenario.input_sites,
            n_iters or scenario.n_iters,
            observers=[tracker],
            input_stimulus=scenario.stimulus,
        )
        table[pair.label] = tracker.first_fired
    return table


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--scan", action="store_true", help="scan right-port positions")
    args = parser.parse_args()

    if args.scan:
        mouths = {"mouthA": (144, 56), "mouthB": (152, 56)}
        for port_x in SCAN_PORT_XS:
            scenario = scenario_with_port(port_x)
            table = case_analysis(scenario, extra_points=mouths, n_iters=170000)
            first = table["11"]
            a, b = first["mouthA"], first["mouthB"]
            offset = None if a is None or b is None else a - b
            fired = sorted(k for k, t in first.items() if t is not None and k.startswith("z"))
            print(f"port_x={port_x}: pair 11 mouth offset={offset}, fired={fired}")
        print(f"frozen choice: port_x={FROZEN_PORT_X}")
        return

    scenario = scenario_with_port(FROZEN_PORT_X)
    table = case_analysis(scenario)
    print("first arrivals (iteration of first excitation in each region):")
    for pair_label in ("01", "10", "11"):
        first = table[pair_label]
        cells = ", ".join(f"{z}={first[z]}" for z in ("z1", "z2", "z3", "z4", "z5"))
        print(f"  pair {pair_label}: {cells}")
    truth = {
        z: frozenset(p for p in ("01", "10", "11") if table[p][z] is not None)
        for z in ("z1", "z2", "z3", "z4", "z5")
    }
    expected = {
        "z1": frozenset({"10", "11"}),
        "z2": frozenset({"01", "10", "11"}),
        "z3": frozenset({"01", "10", "11"}),
        "z4": frozenset({"11"}),
        "z5": frozenset({"11"}),
    }
    for z, subset in truth.items():
        status = "ok" if subset == expected[z] else "MISMATCH"
        print(f"  {z}: fires on {sorted(subset)} [{status}]")
    if truth != expected:
        raise SystemExit(1)
    print("geometry reproduces z1=x, z2=z3=x+y, z4=z5=xy")


if __name__ == "__main__":
    main()
