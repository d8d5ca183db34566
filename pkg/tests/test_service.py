"""HTTP service endpoints over the same operations the CLI exposes."""

import json

import pytest
from conftest import tiny_config_dict
from fastapi.testclient import TestClient

from wavegates import __version__
from wavegates.service.app import app


@pytest.fixture(scope="module")
def client():
    with TestClient(app) as c:
        yield c


@pytest.fixture(scope="module")
def served_run(client, tmp_path_factory):
    """One /simulate call, shared read-only by the endpoint tests."""
    base = tmp_path_factory.mktemp("svc")
    config_path = base / "tiny.json"
    config_path.write_text(json.dumps(tiny_config_dict()))
    outdir = base / "artifacts"
    resp = client.post(
        "/simulate",
        json={"scenario": tiny_config_dict(), "output_dir": str(outdir)},
    )
    assert resp.status_code == 200, resp.text
    return config_path, outdir, resp.json()


def test_health(client):
    resp = client.get("/health")
    assert resp.status_code == 200
    assert resp.json() == {"status": "ok", "version": __version__}


def test_openapi_lists_endpoints(client):
    paths = client.get("/openapi.json").json()["paths"]
    assert {"/health", "/simulate", "/sweep", "/analyze", "/render"} <= set(paths)


class TestSimulate:
    def test_artifacts_written(self, served_run):
        _, outdir, body = served_run
        assert body["output_dir"] == str(outdir)
        summary = body["summary"]
        assert summary["n_pairs"] == 3
        for rel in summary["manifest"]:
            assert (outdir / rel).is_file()

    def test_matches_direct_run(self, served_run, tiny_config, tmp_path):
        from wavegates import load_scenario, run_scenario

        _, _, body = served_run
        direct = run_scenario(load_scenario(tiny_config), tmp_path)
        assert body["summary"]["manifest"] == direct["manifest"]

    def test_domain_config_error_is_422(self, client, tmp_path):
        cfg = tiny_config_dict()
        cfg["electrodes"] = []
        resp = client.post(
            "/simulate", json={"scenario": cfg, "output_dir": str(tmp_path)}
        )
        assert resp.status_code == 422
        body = resp.json()
        assert body["exit_code"] == 2 and "E7" in body["error"]

    def test_extra_field_rejected_by_schema(self, client, tmp_path):
        cfg = tiny_config_dict()
        cfg["verbosity"] = 3
        resp = client.post(
            "/simulate", json={"scenario": cfg, "output_dir": str(tmp_path)}
        )
        assert resp.status_code == 422
        assert "detail" in resp.json()

    def test_overrides(self, client, tmp_path):
        cfg = tiny_config_dict()
        resp = client.post("/simulate", json={
            "scenario": cfg,
            "output_dir": str(tmp_path),
            "overrides": {"n_iters": 50, "params.c2": 0.105,
                          "analyses": [], "pairs": ["11"]},
        })
        assert resp.status_code == 200, resp.text
        resolved = json.loads((tmp_path / "resolved_config.json").read_text())
        assert resolved["n_iters"] == 50
        assert resolved["params"]["c2"] == 0.105


class TestAnalyze:
    def test_spiking(self, client, served_run, tmp_path):
        _, outdir, body = served_run
        resp = client.post("/analyze", json={
            "artifact_dir": str(outdir), "mode": "spiking",
            "output_dir": str(tmp_path),
        })
        assert resp.status_code == 200, resp.text
        report = resp.json()
        assert report["mode"] == "spiking"
        assert report["result"]["totals"] == \
            body["summary"]["analyses"]["spiking"]["totals"]
        assert (tmp_path / "events.csv").is_file()

    def test_structural_with_config_path(self, client, served_run, tmp_path):
        config_path, outdir, body = served_run
        resp = client.post("/analyze", json={
            "artifact_dir": str(outdir), "mode": "structural",
            "config_path": str(config_path), "output_dir": str(tmp_path),
        })
        assert resp.status_code == 200, resp.text
        assert resp.json()["result"] == body["summary"]["analyses"]["structural"]

    def test_missing_artifacts_is_500_exit_3(self, client, tmp_path):
        resp = client.post("/analyze", json={
            "artifact_dir": str(tmp_path / "nothing"), "mode": "spiking",
        })
        assert resp.status_code == 500
        assert resp.json()["exit_code"] == 3

    def test_bad_mode_rejected_by_schema(self, client, served_run):
        _, outdir, _ = served_run
        resp = client.post(
            "/analyze", json={"artifact_dir": str(outdir), "mode": "psychic"}
        )
        assert resp.status_code == 422
        assert "detail" in resp.json()


class TestRender:
    def test_checkpoint(self, client, served_run, tmp_path):
        config_path, outdir, _ = served_run
        out = tmp_path / "state.png"
        resp = client.post("/render", json={
            "input_path": str(outdir / "state_01.ckpt"),
            "output_path": str(out),
            "config_path": str(config_path),
        })
        assert resp.status_code == 200, resp.text
        assert resp.json() == {"written": str(out)}
        assert out.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_checkpoint_without_config_is_422(self, client, served_run, tmp_path):
        _, outdir, _ = served_run
        resp = client.post("/render", json={
            "input_path": str(outdir / "state_01.ckpt"),
            "output_path": str(tmp_path / "x.png"),
        })
        assert resp.status_code == 422
        assert resp.json()["exit_code"] == 2


def test_sweep(client, tmp_path):
    resp = client.post("/sweep", json={
        "scenario": tiny_config_dict(),
        "parameter": "c2",
        "values": [0.1, 0.11],
        "output_dir": str(tmp_path),
        "overrides": {"n_iters": 200, "analyses": [], "pairs": ["10"]},
    })
    assert resp.status_code == 200, resp.text
    report = resp.json()["report"]
    assert report["parameter"] == "c2"
    assert [r["value"] for r in report["runs"]] == [0.1, 0.11]
    assert (tmp_path / "sweep.csv").is_file()
