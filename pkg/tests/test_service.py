import json
import threading
import urllib.error
import urllib.request

import numpy as np
import pytest

from goaltalk.checkpoint import save_checkpoint
from goaltalk.env import AgentState
from goaltalk.nets import GoalWeightNet
from goaltalk.policy import Policy, select_topic
from goaltalk.service import SessionService, make_server

from conftest import small_table, small_world  # noqa: F401


@pytest.fixture()
def service(small_world, small_table):
    return SessionService(small_world["graph"], small_table)


@pytest.fixture()
def server(service):
    srv = make_server(service, "127.0.0.1", 0)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()


def call(srv, method, path, body=None):
    host, port = srv.server_address[:2]
    req = urllib.request.Request(f"http://{host}:{port}{path}", method=method)
    data = None
    if body is not None:
        data = json.dumps(body).encode()
        req.add_header("Content-Type", "application/json")
    try:
        with urllib.request.urlopen(req, data=data, timeout=10) as resp:
            return resp.status, json.loads(resp.read().decode())
    except urllib.error.HTTPError as exc:
        return exc.code, json.loads(exc.read().decode())


def labels_of(world):
    return world["graph"].labels


def far_pair(world):
    g = world["graph"]
    s, t = world["test_pairs"][0]
    return g.labels[s], g.labels[t]


def test_create_and_state(server, small_world):
    start, goal = far_pair(small_world)
    status, doc = call(server, "POST", "/api/sessions",
                       {"start": start, "goal": goal, "policy": "greedy_goal"})
    assert status == 201
    assert doc["api_version"] == 1
    sid = doc["session_id"]
    # first proposal is adjacent to the start topic
    g = small_world["graph"]
    assert doc["agent_topic"] in {g.labels[t] for t in g.adjacency[g.topic_id(start)]}

    status, view = call(server, "GET", f"/api/sessions/{sid}")
    assert status == 200
    assert view["status"] == "active"
    assert view["turns"] == []
    assert len(view["diagnostics"]) == 1
    assert view["candidates"], "score breakdown exposed for the pending decision"


def test_create_validation_errors(server, small_world):
    start, goal = far_pair(small_world)
    cases = [
        ({"start": start, "goal": start, "policy": "random"}, 400),
        ({"start": "nope", "goal": goal, "policy": "random"}, 400),
        ({"start": start, "goal": goal, "policy": "wat"}, 400),
        ({"start": start, "goal": goal, "policy": "goal_weight"}, 400),  # checkpoint required
    ]
    for body, expected in cases:
        status, doc = call(server, "POST", "/api/sessions", body)
        assert status == expected, doc
        assert "error" in doc
    status, doc = call(server, "POST", "/api/sessions",
                       {"start": start, "goal": goal, "policy": "goal_weight"})
    assert "checkpoint required" in doc["error"]


def test_checkpoint_shape_mismatch_422(server, small_world, tmp_path):
    path = tmp_path / "bad.json"
    net = GoalWeightNet(seed=0)
    save_checkpoint(path, "goal_weight", net)
    doc = json.loads(path.read_text())
    del doc["params"]["mlp_w2"]
    path.write_text(json.dumps(doc))
    start, goal = far_pair(small_world)
    status, out = call(server, "POST", "/api/sessions",
                       {"start": start, "goal": goal, "policy": "goal_weight",
                        "checkpoint": str(path)})
    assert status == 422


def test_cooperative_then_topics_then_quit(server, small_world):
    start, goal = far_pair(small_world)
    status, doc = call(server, "POST", "/api/sessions",
                       {"start": start, "goal": goal, "policy": "greedy_pref"})
    sid = doc["session_id"]
    if doc["status"] != "active":
        pytest.skip("proposal hit the goal immediately")

    status, doc = call(server, "POST", f"/api/sessions/{sid}/respond",
                       {"mode": "cooperative", "preference": 0.9})
    assert status == 200
    assert doc["turns"][0]["response"]["kind"] == "cooperative"
    if doc["status"] != "active":
        pytest.skip("short world: session ended early")

    # mention two in-scope topics
    status, nbrs = call(server, "GET",
                        f"/api/graph/neighbors?topic={doc['turns'][-1]['agent_topic']}&hops=3")
    # scope is measured around the current pending topic
    pending = doc["agent_topic"]
    status, nbrs = call(server, "GET", f"/api/graph/neighbors?topic={pending}&hops=3")
    assert status == 200
    picks = [n["label"] for n in nbrs["neighbors"][:2]]
    status, doc = call(server, "POST", f"/api/sessions/{sid}/respond",
                       {"mode": "topics",
                        "mentions": [{"label": p, "preference": 0.5} for p in picks]})
    assert status == 200, doc
    if doc["status"] != "active":
        pytest.skip("short world: session ended early")
    assert doc["turns"][-1]["response"]["kind"] == "topics"

    status, doc = call(server, "POST", f"/api/sessions/{sid}/respond", {"mode": "quit"})
    assert status == 200
    assert doc["status"] == "ended(quit)"
    # ended is absorbing
    status, doc = call(server, "POST", f"/api/sessions/{sid}/respond",
                       {"mode": "cooperative"})
    assert status == 409
    status, view = call(server, "GET", f"/api/sessions/{sid}")
    assert view["status"] == "ended(quit)"
    assert view["turns"], "transcript retained after quit"


def test_respond_validation(server, small_world):
    start, goal = far_pair(small_world)
    _, doc = call(server, "POST", "/api/sessions",
                  {"start": start, "goal": goal, "policy": "greedy_pref"})
    sid = doc["session_id"]
    pending = doc["agent_topic"]
    status, out = call(server, "POST", f"/api/sessions/{sid}/respond",
                       {"mode": "topics", "mentions": [{"label": "nope", "preference": 0.4}]})
    assert status == 400
    # too many mentions
    _, nbrs = call(server, "GET", f"/api/graph/neighbors?topic={pending}&hops=3")
    labels = [n["label"] for n in nbrs["neighbors"][:4]]
    if len(labels) == 4:
        status, out = call(server, "POST", f"/api/sessions/{sid}/respond",
                           {"mode": "topics",
                            "mentions": [{"label": l, "preference": 0.4} for l in labels]})
        assert status == 400
    # out-of-scope mention names the offender
    far_label = None
    g = small_world["graph"]
    scope = {n["label"] for n in nbrs["neighbors"]} | {pending}
    for lab in g.labels:
        if lab not in scope:
            far_label = lab
            break
    if far_label:
        status, out = call(server, "POST", f"/api/sessions/{sid}/respond",
                           {"mode": "topics", "mentions": [{"label": far_label,
                                                            "preference": 0.4}]})
        assert status == 400
        assert far_label in out["error"]


def test_graph_neighbors_contract(server, small_world):
    g = small_world["graph"]
    label = g.labels[0]
    status, doc = call(server, "GET", f"/api/graph/neighbors?topic={label}&hops=1")
    assert status == 200
    got = {n["label"]: n["hops"] for n in doc["neighbors"]}
    assert got == {g.labels[t]: 1 for t in g.adjacency[0]}
    hops_sorted = [(n["hops"], n["label"]) for n in doc["neighbors"]]
    assert hops_sorted == sorted(hops_sorted)

    status, _ = call(server, "GET", "/api/graph/neighbors?topic=ghost&hops=1")
    assert status == 404
    status, _ = call(server, "GET", f"/api/graph/neighbors?topic={label}&hops=4")
    assert status == 400
    status, _ = call(server, "GET", "/api/sessions/doesnotexist")
    assert status == 404


def test_unknown_session_404(server):
    status, _ = call(server, "POST", "/api/sessions/zzz/respond", {"mode": "quit"})
    assert status == 404


def test_next_topic_reproducible_offline(service, small_world, small_table):
    g = small_world["graph"]
    start, goal = small_world["test_pairs"][1]
    session = service.create_session({
        "start": g.labels[start], "goal": g.labels[goal], "policy": "greedy_goal"})
    # replay the same history offline through the shared decision path
    twin = AgentState(g, small_table, start, goal, service.env_cfg, service.dist_cfg)
    proposals = [session.view()["pending_topic"]]
    for _ in range(3):
        if session.status != "active":
            break
        session.respond({"mode": "cooperative", "preference": 0.7})
        view = session.view()
        if view["pending_topic"] is not None:
            proposals.append(view["pending_topic"])
    pol = Policy("greedy_goal")
    offline = []
    for i, label in enumerate(proposals):
        ds = twin.decision_state(i + 1)
        topic, _ = select_topic(pol, ds)
        offline.append(g.labels[topic])
        twin.apply_response(topic, __import__("goaltalk.dialogue", fromlist=["d"]).cooperative(topic, 0.7))
    assert offline == proposals


def test_human_observations_share_code_path(service, small_world):
    g = small_world["graph"]
    start, goal = small_world["test_pairs"][2]
    session = service.create_session({
        "start": g.labels[start], "goal": g.labels[goal], "policy": "greedy_pref"})
    if session.status != "active":
        pytest.skip("instant goal")
    pending = session.pending_topic
    session.respond({"mode": "cooperative", "preference": 0.63})
    assert session.agent.obs.entries.get(pending) == 0.63


def test_session_timeout_at_turn_limit(small_world, small_table):
    from goaltalk.env import EnvConfig

    g = small_world["graph"]
    svc = SessionService(g, small_table, env_cfg=EnvConfig(max_turns=2))
    start, goal = small_world["test_pairs"][0]
    session = svc.create_session({"start": g.labels[start], "goal": g.labels[goal],
                                  "policy": "greedy_pref"})
    steps = 0
    while session.status == "active" and steps < 5:
        session.respond({"mode": "cooperative", "preference": 0.6})
        steps += 1
    assert session.status in ("ended(timeout)", "ended(success)")
    if session.status == "ended(timeout)":
        assert len(session.view()["turns"]) == 2


def test_ended_session_persists_transcript(tmp_path, small_world, small_table):
    import json as json_mod

    g = small_world["graph"]
    path = tmp_path / "sessions.jsonl"
    svc = SessionService(g, small_table, transcript_path=str(path))
    start, goal = small_world["test_pairs"][1]
    session = svc.create_session({"start": g.labels[start], "goal": g.labels[goal],
                                  "policy": "greedy_goal"})
    if session.status == "active":
        svc.respond(session.id, {"mode": "quit"})
    docs = [json_mod.loads(line) for line in path.read_text().splitlines()]
    assert len(docs) == 1
    doc = docs[0]
    assert {"start", "goal", "outcome", "turns", "seed", "tolerance_k"} <= set(doc)
    assert doc["turns"][-1]["response_kind"] in ("quit", None)
