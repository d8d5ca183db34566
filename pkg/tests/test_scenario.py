"""Scenario loading, artifact production, and parameter sweeps."""

import copy
import hashlib
import json

import pytest

from wavegates import ConfigError, load_scenario, run_scenario, sweep
from wavegates.model import load_checkpoint
from wavegates.scenario import SWEEPABLE


class TestLoadScenario:
    def test_resolved_defaults(self, tiny_config):
        sc = load_scenario(tiny_config)
        r = sc.resolved
        assert r["params"]["dt"] == 0.015 and r["params"]["c2"] == 0.1
        assert r["inputs"] == ["E7", "E17"]
        assert r["pairs"] == ["01", "10", "11"]
        assert r["stimulus"]["mode"] == "impulse"
        assert r["cadence"] == {"potential": 1, "activity": 1, "frequency": 1, "frames": 150}
        assert r["spiking"] == {
            "threshold": 0.05, "min_separation": 300, "window": 200, "segmentation_gap": 1000,
        }
        assert r["frequency"] == {"domain_threshold": 0.72}
        assert len(r["mask_sha256"]) == 64
        assert sc.grid.mask_hash() == r["mask_sha256"]
        assert sc.input_sites == ((6, 4), (73, 4))

    def test_config_file_round_trip(self, tiny_config, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(tiny_config))
        sc = load_scenario(path)
        assert sc.grid.conductive_count == load_scenario(tiny_config).grid.conductive_count

    def test_overrides_dotted_paths(self, tiny_config):
        sc = load_scenario(tiny_config, overrides={"params.c2": 0.107, "n_iters": 10})
        assert sc.params.c2 == 0.107
        assert sc.n_iters == 10
        assert sc.resolved["params"]["c2"] == 0.107

    @pytest.mark.parametrize(
        "mutate,match",
        [
            (lambda c: c.pop("grid"), "missing required key"),
            (lambda c: c.update(bogus=1), "unknown config keys"),
            (lambda c: c["grid"].update(image="x.png"), "exactly one"),
            (lambda c: c["params"].update(gamma=2), "unknown keys"),
            (lambda c: c.update(pairs=[]), "non-empty"),
            (lambda c: c.update(pairs=["01", "01"]), "duplicates"),
            (lambda c: c.update(pairs=["31"]), "two bits"),
            (lambda c: c.update(inputs=["E7"]), "two-element"),
            (lambda c: c.update(inputs=["E7", "E99"]), "not defined"),
            (lambda c: c.update(n_iters=-5), ">= 0"),
            (lambda c: c.update(n_iters=2.5), "integer"),
            (lambda c: c.update(cadence={"potential": 0}), ">= 1"),
            (lambda c: c.update(cadence={"sound": 1}), "unknown observer"),
            (lambda c: c.update(analyses=["magic"]), "unknown analyses"),
            (lambda c: c.update(activity={"intervals": [[0.2, 0.1]]}), "empty interval"),
            (lambda c: c["electrodes"].append({"label": "bad_name", "x": 1, "y": 4}), "letters"),
            (lambda c: c["electrodes"].append({"label": "E7", "x": 1, "y": 4}), "duplicate"),
            (
                lambda c: c["structural"]["regions"].append(
                    {"label": "void", "center": [1, 0], "radius": 0.1}
                ),
                "no conductive nodes",
            ),
            (
                lambda c: c["structural"]["regions"].append(
                    {"label": "near-x", "center": [12, 4], "radius": 2.0}
                ),
                "duplicate region",
            ),
        ],
    )
    def test_validation_failures(self, tiny_config, mutate, match):
        cfg = copy.deepcopy(tiny_config)
        mutate(cfg)
        with pytest.raises(ConfigError, match=match):
            load_scenario(cfg)

    def test_structural_analysis_requires_regions(self, tiny_config):
        cfg = copy.deepcopy(tiny_config)
        cfg.pop("structural")
        with pytest.raises(ConfigError, match="structural.regions"):
            load_scenario(cfg)

    def test_source_dict_not_mutated(self, tiny_config):
        snapshot = copy.deepcopy(tiny_config)
        load_scenario(tiny_config, overrides={"params.c2": 0.12})
        assert tiny_config == snapshot

    def test_electrode_grid_layout(self, tiny_config):
        cfg = copy.deepcopy(tiny_config)
        cfg["electrode_grid"] = {
            "x0": 10, "y0": 4, "dx": 20, "dy": 0, "nx": 3, "ny": 1,
            "prefix": "G", "start": 5,
        }
        sc = load_scenario(cfg)
        labels = [e.label for e in sc.electrodes]
        assert labels == ["E7", "E17", "M1", "G5", "G6", "G7"]
        assert (sc.electrodes.get("G6").x, sc.electrodes.get("G6").y) == (30, 4)


class TestRunScenario:
    def test_artifacts_manifest_and_results(self, tiny_config, tmp_path):
        sc = load_scenario(tiny_config)
        outdir = tmp_path / "out"
        summary = run_scenario(sc, outdir)

        config_bytes = (outdir / "resolved_config.json").read_bytes()
        assert summary["config_sha256"] == hashlib.sha256(config_bytes).hexdigest()
        assert summary["n_pairs"] == 3

        manifest = summary["manifest"]
        expected_names = {
            "resolved_config.json",
            "events.csv", "gate_counts.csv",
            "domains.png", "domains.csv", "gate_sites.csv",
            "activity_means.csv", "structural_gates.csv",
        }
        for pair in ("01", "10", "11"):
            expected_names |= {
                f"state_{pair}.ckpt", f"activity_{pair}.csv",
                f"freq_{pair}.csv", f"freq_{pair}.pgm",
            }
            for electrode in ("E7", "E17", "M1"):
                expected_names.add(f"trace_{electrode}_{pair}.csv")
        assert set(manifest) == expected_names
        for rel, digest in manifest.items():
            data = (outdir / rel).read_bytes()
            assert hashlib.sha256(data).hexdigest() == digest, rel

        results = summary["analyses"]
        assert set(results["coverage"]) == {"01", "10", "11", "any"}
        assert 0.0 < results["coverage"]["11"] <= 1.0
        assert results["coverage"]["any"] >= max(
            results["coverage"][p] for p in ("01", "10", "11")
        )
        # impulse footprint covers the near-x region for pairs with x set
        assert results["structural"]["near-x"] == {
            "fires_on": ["10", "11"], "gate": "SELECT_X",
        }
        assert results["structural"]["mid"]["gate"] is None
        assert results["activity"]["gates"] == [{"interval": [0.0, 1.0], "gate": "OR"}]
        assert set(results["spiking"]["totals"]) == {
            "OR", "SELECT_Y", "XOR", "SELECT_X", "NOT_AND", "AND_NOT", "AND",
        }

    def test_reruns_are_byte_identical(self, tiny_config, tmp_path):
        sc = load_scenario(tiny_config)
        s1 = run_scenario(sc, tmp_path / "a")
        s2 = run_scenario(load_scenario(tiny_config), tmp_path / "b")
        assert s1["manifest"] == s2["manifest"]
        assert s1["config_sha256"] == s2["config_sha256"]

    def test_checkpoint_matches_grid(self, tiny_config, tmp_path):
        sc = load_scenario(tiny_config)
        run_scenario(sc, tmp_path)
        state, digest = load_checkpoint(tmp_path / "state_11.ckpt", sc.grid)
        assert state.t == sc.n_iters
        assert digest == sc.resolved["mask_sha256"]

    def test_frames_recorded_when_requested(self, tiny_config, tmp_path):
        cfg = copy.deepcopy(tiny_config)
        cfg.update(record_frames=True, n_iters=300, pairs=["11"], analyses=[])
        cfg.pop("structural")
        cfg["cadence"] = {"frames": 100}
        summary = run_scenario(load_scenario(cfg), tmp_path)
        frames = [name for name in summary["manifest"] if name.startswith("frames/")]
        assert frames == [
            "frames/frame_11_00000000.png",
            "frames/frame_11_00000100.png",
            "frames/frame_11_00000200.png",
            "frames/frame_11_00000300.png",
        ]


class TestSweep:
    def test_c2_sweep_layout(self, tiny_config, tmp_path):
        cfg = copy.deepcopy(tiny_config)
        cfg.update(pairs=["10"], n_iters=500, analyses=[])
        cfg.pop("structural")
        cfg.pop("activity")
        report = sweep(cfg, "c2", [0.1, 0.11], tmp_path)
        assert report["parameter"] == "c2"
        assert [row["value"] for row in report["runs"]] == [0.1, 0.11]
        for row, c2 in zip(report["runs"], (0.1, 0.11)):
            subdir = tmp_path / row["dir"]
            assert subdir.name == f"c2_{c2}"
            resolved = json.loads((subdir / "resolved_config.json").read_text())
            assert resolved["params"]["c2"] == c2
        lines = (tmp_path / "sweep.csv").read_text().splitlines()
        assert lines[0] == "value,coverage_10,coverage_any"
        assert len(lines) == 3
        saved = json.loads((tmp_path / "sweep_summary.json").read_text())
        assert saved["parameter"] == "c2"
        assert len(saved["runs"]) == 2

    def test_unsweepable_parameter_rejected(self, tiny_config, tmp_path):
        with pytest.raises(ConfigError, match="not sweepable"):
            sweep(tiny_config, "dx", [1, 2], tmp_path)
        assert "c2" in SWEEPABLE and "n_iters" in SWEEPABLE
