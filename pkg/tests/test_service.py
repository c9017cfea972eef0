import numpy as np
import pytest
from fastapi.testclient import TestClient

from mcle import engine
from mcle.engine import create_session, run_to_completion
from mcle.prior import PriorSchedule
from mcle.sampler import StrategyConfig
from mcle.service import create_app


@pytest.fixture()
def client(tiny_bundle):
    with TestClient(create_app(tiny_bundle)) as c:
        yield c


def _create(client, **overrides):
    body = {"class": "c0", "strategy": "mcle", "prior": "constant",
            "max_iters": 10}
    body.update(overrides)
    return client.post("/sessions", json=body)


def test_healthz(client):
    r = client.get("/healthz")
    assert r.status_code == 200
    assert r.json() == "ok"


def test_create_session(client):
    r = _create(client)
    assert r.status_code == 201
    body = r.json()
    assert body["t"] == 0
    assert body["status"] == "awaiting_query"
    r2 = _create(client)
    assert r2.json()["session_id"] != body["session_id"]


def test_create_unknown_class(client):
    r = _create(client, **{"class": "zzz"})
    assert r.status_code == 400
    assert r.json()["error"]["field"] == "class"


def test_create_unknown_strategy(client):
    r = _create(client, strategy="entropy")
    assert r.status_code == 400
    assert r.json()["error"]["field"] == "strategy"


def test_create_unknown_field_rejected(client):
    r = _create(client, verbosity=3)
    assert r.status_code == 400
    assert "verbosity" in r.json()["error"]["message"]


def test_capacity(tiny_bundle):
    with TestClient(create_app(tiny_bundle, max_sessions=1)) as client:
        assert _create(client).status_code == 201
        r = _create(client)
        assert r.status_code == 409


def test_unknown_session_404(client):
    assert client.get("/sessions/nope/query").status_code == 404
    assert client.get("/sessions/nope/state").status_code == 404
    assert client.post("/sessions/nope/label",
                       json={"sample_id": 0, "label": 1}).status_code == 404


def test_first_query_is_prior_top_score(client, tiny_bundle):
    sid = _create(client).json()["session_id"]
    r = client.get(f"/sessions/{sid}/query")
    assert r.status_code == 200
    q = r.json()
    # expected: the top prior-scored unlabeled train sample
    ref = create_session(tiny_bundle, "c0", oracle_kind="external")
    ids, scores = engine.current_scores(ref)
    assert q["sample_id"] == int(ids[np.argmax(scores)])
    assert q["intended_zone"] == "F_plus"
    assert q["t"] == 0
    # idempotent re-read
    assert client.get(f"/sessions/{sid}/query").json()["sample_id"] == q["sample_id"]


def test_label_round_trip(client, tiny_bundle):
    sid = _create(client).json()["session_id"]
    truth = tiny_bundle.labels.column("c0")
    q = client.get(f"/sessions/{sid}/query").json()
    r = client.post(f"/sessions/{sid}/label",
                    json={"sample_id": q["sample_id"],
                          "label": int(truth[q["sample_id"]])})
    assert r.status_code == 200
    body = r.json()
    assert body["t"] == 1
    assert "test_ap" in body
    assert abs(sum(body["tracker"].values()) - 1.0) < 1e-9


def test_label_mismatch_409(client):
    sid = _create(client).json()["session_id"]
    q = client.get(f"/sessions/{sid}/query").json()
    r = client.post(f"/sessions/{sid}/label",
                    json={"sample_id": q["sample_id"] + 1, "label": 1})
    assert r.status_code == 409
    state = client.get(f"/sessions/{sid}/state").json()
    assert state["t"] == 0


def test_label_invalid_value_422(client):
    sid = _create(client).json()["session_id"]
    client.get(f"/sessions/{sid}/query")
    r = client.post(f"/sessions/{sid}/label", json={"sample_id": 0, "label": 0})
    assert r.status_code == 422


def test_finished_session_410(client, tiny_bundle):
    sid = _create(client, max_iters=1).json()["session_id"]
    truth = tiny_bundle.labels.column("c0")
    q = client.get(f"/sessions/{sid}/query").json()
    client.post(f"/sessions/{sid}/label",
                json={"sample_id": q["sample_id"],
                      "label": int(truth[q["sample_id"]])})
    assert client.get(f"/sessions/{sid}/query").status_code == 410


def test_state_after_three_labels(client, tiny_bundle):
    sid = _create(client).json()["session_id"]
    truth = tiny_bundle.labels.column("c0")
    for _ in range(3):
        q = client.get(f"/sessions/{sid}/query").json()
        client.post(f"/sessions/{sid}/label",
                    json={"sample_id": q["sample_id"],
                          "label": int(truth[q["sample_id"]])})
    state = client.get(f"/sessions/{sid}/state").json()
    assert len(state["query_log"]) == 3
    assert state["t"] == 3
    n_unlabeled = tiny_bundle.pool.train_indices.size - 3
    assert sum(state["zone_histogram"].values()) == n_unlabeled
    assert abs(sum(state["tracker"].values()) - 1.0) < 1e-9
    assert state["n_pos"] + state["n_neg"] == 3
    assert state["rho"] == pytest.approx(
        state["n_pos"] / 3 if state["n_pos"] else 0.0)
    assert len(state["curve"]) == 4
    assert state["projection"]["labeled"]
    assert state["projection"]["query"] is None  # nothing proposed yet
    client.get(f"/sessions/{sid}/query")
    state = client.get(f"/sessions/{sid}/state").json()
    assert state["projection"]["query"] is not None


def test_transport_independence(client, tiny_bundle):
    """Service-driven session equals a simulated-oracle replay."""
    sid = _create(client).json()["session_id"]
    truth = tiny_bundle.labels.column("c0")
    served = []
    for _ in range(10):
        q = client.get(f"/sessions/{sid}/query").json()
        lab = int(truth[q["sample_id"]])
        client.post(f"/sessions/{sid}/label",
                    json={"sample_id": q["sample_id"], "label": lab})
        served.append((q["sample_id"], lab))
    sim = create_session(tiny_bundle, "c0", strategy=StrategyConfig(kind="mcle"),
                         schedule=PriorSchedule(kind="constant"), max_iters=10)
    run_to_completion(sim)
    assert [(r.sample_id, r.label) for r in sim.query_log] == served
    state = client.get(f"/sessions/{sid}/state").json()
    assert state["query_log"] == [
        {"t": r.t, "sample_id": r.sample_id, "intended_zone": r.intended_zone,
         "actual_zone": r.actual_zone, "score": r.score, "label": r.label,
         "rho_after": r.rho_after, "tracker_after": r.tracker_after}
        for r in sim.query_log]


def test_checkpoint_resume(tiny_bundle, tmp_path):
    ckpt = tmp_path / "ckpt"
    with TestClient(create_app(tiny_bundle, checkpoint_dir=str(ckpt))) as client:
        sid = _create(client).json()["session_id"]
        truth = tiny_bundle.labels.column("c0")
        for _ in range(4):
            q = client.get(f"/sessions/{sid}/query").json()
            client.post(f"/sessions/{sid}/label",
                        json={"sample_id": q["sample_id"],
                              "label": int(truth[q["sample_id"]])})
        before = client.get(f"/sessions/{sid}/state").json()
    # lifespan shutdown wrote checkpoints; a fresh app restores them
    with TestClient(create_app(tiny_bundle, checkpoint_dir=str(ckpt))) as client:
        after = client.get(f"/sessions/{sid}/state").json()
        assert after == before
        # the restored session keeps serving queries
        q = client.get(f"/sessions/{sid}/query").json()
        assert q["t"] == 4
