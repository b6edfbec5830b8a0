import pytest
from fastapi.testclient import TestClient

import gafocus
from gafocus import harness
from gafocus.service.app import create_app

SMALL_RUN = {
    "seed": 7,
    "n_modes": 64,
    "population_size": 8,
    "offspring_per_iteration": 4,
    "max_iterations": 12,
    "baseline_samples": 200,
}


@pytest.fixture(scope="module")
def client():
    return TestClient(create_app())


def test_health(client):
    body = client.get("/health").json()
    assert body == {"status": "ok", "version": gafocus.__version__}


def test_profiles(client):
    body = client.get("/profiles").json()
    assert body == {"profiles": ["pc-matlab", "ultrascale-plus", "virtex5"]}


def test_timing(client):
    body = client.post("/timing", json={"profile": "virtex5", "iterations": 2000}).json()
    assert body["speedup_vs_pc_matlab"] == 150.0
    assert body["nominal_per_iteration_ms"] == 8.0


def test_timing_unknown_profile(client):
    resp = client.post("/timing", json={"profile": "zynq"})
    assert resp.status_code == 422


def test_schedule_rates_exponential(client):
    body = client.post("/schedule/rates", json={"k_from": 0, "k_to": 2}).json()
    assert body["k"] == [0, 1, 2]
    assert body["rate"][0] == 0.06
    assert body["rate_numerator"][0] == 1966


def test_schedule_rates_linear_starts_at_one(client):
    body = client.post(
        "/schedule/rates",
        json={"schedule": "linear-clamped", "k_from": 0, "k_to": 3},
    ).json()
    assert body["k"] == [1, 2, 3]
    assert body["rate_numerator"] == [2000, 1988, 1976]


def test_run_matches_harness(client):
    resp = client.post("/run", json=SMALL_RUN)
    assert resp.status_code == 200
    body = resp.json()
    assert body["series"] is None

    config = harness.build_config(overrides=SMALL_RUN)
    _, summary = harness.compute_run(config)
    assert body["summary"] == summary


def test_run_with_series(client):
    body = client.post("/run", json={**SMALL_RUN, "include_series": True}).json()
    series = body["series"]
    assert series["iteration"] == list(range(1, 13))
    assert len(series["zeta"]) == len(series["f_xi"]) == len(series["eta"]) == 12
    assert max(series["f_xi"]) == 1.0
    assert series["eta"][-1] == 0.0
    assert series["zeta"][-1] == body["summary"]["final_zeta"]


def test_run_bad_schedule(client):
    resp = client.post("/run", json={**SMALL_RUN, "schedule": "geometric"})
    assert resp.status_code == 422


def test_run_bad_type(client):
    resp = client.post("/run", json={**SMALL_RUN, "seed": "lots"})
    assert resp.status_code == 422


def test_sweep(client):
    body = client.post("/sweep", json={**SMALL_RUN, "d_values": [80.0, 400.0]}).json()
    assert [run["d"] for run in body["runs"]] == [80.0, 400.0]
    finals = [run["summary"]["final_zeta"] for run in body["runs"]]
    assert body["sweep_max_zeta"] == max(finals)
    assert {run["summary"]["ga_seed"] for run in body["runs"]} == {harness.ga_seed(7, 0)}


def test_repeat(client):
    body = client.post(
        "/repeat", json={**SMALL_RUN, "n_repeats": 2, "iterations_per_repeat": 5}
    ).json()
    assert body["n_repeats"] == 2
    assert len(body["summaries"]) == 2
    assert body["final_zetas"] == [s["final_zeta"] for s in body["summaries"]]
    assert body["cv_final_zeta"] == pytest.approx(
        body["std_final_zeta"] / body["mean_final_zeta"]
    )
    config = harness.build_config(
        overrides={**SMALL_RUN, "n_repeats": 2, "iterations_per_repeat": 5}
    )
    expected = [summary for _, summary in harness.compute_repeat(config)]
    assert body["summaries"] == expected


def test_analyze_round_trip(client, tmp_path):
    config = harness.build_config(overrides=SMALL_RUN)
    trace, summary = harness.compute_run(config)
    path = tmp_path / "trace.csv"
    harness.write_trace_csv(trace, str(path))

    body = client.post("/analyze", json={"trace_csv": path.read_text()}).json()
    assert body["config_seed"] is None  # seeds are not stored in the CSV
    for key in ("final_zeta", "max_eta", "optimal_stop_k", "f_xi_at_kstar"):
        assert body[key] == summary[key], key


def test_analyze_malformed(client):
    resp = client.post("/analyze", json={"trace_csv": "not,a,trace\n1,2,3\n"})
    assert resp.status_code == 422
    assert ":1:" in resp.json()["detail"]
