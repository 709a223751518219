"""Live dialogue sessions over HTTP, for a human playing the user.

The session engine reuses the exact decision path of simulated episodes
(AgentState + select_topic), so every proposed topic is reproducible
offline from the same history. The HTTP layer is a thin JSON adapter:

    POST /api/sessions
    POST /api/sessions/{id}/respond
    GET  /api/sessions/{id}
    GET  /api/graph/neighbors?topic=...&hops=...
"""

import json
import secrets
import threading
import time
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from urllib.parse import urlparse, parse_qs

import numpy as np

from goaltalk import dialogue
from goaltalk.checkpoint import load_checkpoint
from goaltalk.distance import DistanceCache, DistanceConfig
from goaltalk.env import AgentState, EnvConfig
from goaltalk.errors import DataError, GoaltalkError, TopicNotFoundError
from goaltalk.kg import khop_ball
from goaltalk.policy import (POLICY_KINDS, TRAINABLE_KINDS, Policy, select_topic)

API_VERSION = 1
DEFAULT_COOPERATIVE_PREFERENCE = 0.8
MENTION_SCOPE_HOPS = 3


class ApiError(GoaltalkError):
    def __init__(self, status, message):
        super().__init__(message)
        self.status = status


class DialogueSession:
    """One live dialogue: the agent proposes, a human responds."""

    def __init__(self, session_id, graph, embeddings, pol, start, goal,
                 env_cfg, dist_cfg, dist_cache, rng_seed, tolerance_hint=None):
        self.id = session_id
        self.graph = graph
        self.policy = pol
        self.agent = AgentState(graph, embeddings, start, goal, env_cfg, dist_cfg, dist_cache)
        self.rng = np.random.default_rng(rng_seed)
        self.rng_seed = rng_seed
        self.tolerance_hint = tolerance_hint
        self.status = "active"
        self.outcome = None
        self.created_at = time.time()
        self.pending_topic = None
        self.diagnostics = []
        self.last_candidates = []
        self.lock = threading.Lock()
        self._propose()

    # -- agent side ----------------------------------------------------------

    def _propose(self):
        t = self.agent.history.turn_count + 1
        if t > self.agent.env_cfg.max_turns:
            self._end(dialogue.TIMEOUT)
            return
        try:
            ds = self.agent.decision_state(t)
        except GoaltalkError:
            self._end(dialogue.TIMEOUT)
            return
        topic, diag = select_topic(self.policy, ds, rng=self.rng, explore_epsilon=0.0)
        f = ds["factors"]
        self.pending_topic = topic
        self.last_candidates = diag["scores"]
        self.diagnostics.append({
            "turn": t,
            "agent_topic": self.graph.labels[topic],
            "gw": diag["gw"],
            "cd": diag["cd"],
            "factors": {"turn_norm": f.turn_norm, "gcd_norm": f.gcd_norm, "eus": f.eus},
            "est_distance_to_goal": self.agent.distance_to_goal(topic),
            "est_satisfaction": f.eus,
        })
        if topic == self.agent.goal:
            self.agent.history.append(dialogue.Turn(topic, None))
            self.pending_topic = None
            self._end(dialogue.SUCCESS)

    def _end(self, outcome):
        self.status = f"ended({outcome})"
        self.outcome = outcome
        self.agent.history.outcome = outcome

    # -- human side ------------------------------------------------------------

    def respond(self, body):
        if self.status != "active":
            raise ApiError(409, f"session already {self.status}")
        mode = body.get("mode")
        if mode == "cooperative":
            pref = body.get("preference", DEFAULT_COOPERATIVE_PREFERENCE)
            pref = self._check_preference(pref)
            response = dialogue.cooperative(self.pending_topic, pref)
        elif mode == "topics":
            response = self._topics_response(body.get("mentions"))
        elif mode == "quit":
            response = dialogue.quit_response()
        else:
            raise ApiError(400, f"mode must be cooperative|topics|quit, got {mode!r}")

        agent_topic = self.pending_topic
        self.pending_topic = None
        self.agent.history.append(dialogue.Turn(agent_topic, response))
        if response.is_quit:
            self._end(dialogue.QUIT_OUTCOME)
            return
        self.agent.apply_response(agent_topic, response)
        self._propose()

    def _check_preference(self, pref):
        try:
            pref = float(pref)
        except (TypeError, ValueError):
            raise ApiError(400, f"preference must be a number, got {pref!r}") from None
        if not 0.0 <= pref <= 1.0:
            raise ApiError(400, f"preference must lie in [0, 1], got {pref}")
        return pref

    def _topics_response(self, mentions):
        if not isinstance(mentions, list) or not mentions:
            raise ApiError(400, "topics mode needs a non-empty mentions list")
        if len(mentions) > 3:
            raise ApiError(400, f"at most 3 mentions allowed, got {len(mentions)}")
        scope = khop_ball(self.graph, self.pending_topic, MENTION_SCOPE_HOPS)
        pairs = []
        seen = set()
        for m in mentions:
            label = m.get("label") if isinstance(m, dict) else None
            if label is None:
                raise ApiError(400, "each mention needs {label, preference}")
            try:
                topic = self.graph.topic_id(label)
            except TopicNotFoundError:
                raise ApiError(400, f"unknown topic label {label!r}") from None
            if topic == self.pending_topic or topic not in scope:
                raise ApiError(400, f"topic {label!r} is outside the {MENTION_SCOPE_HOPS}-hop "
                                    "scope of the current topic")
            if topic in seen:
                raise ApiError(400, f"duplicate mention {label!r}")
            seen.add(topic)
            pairs.append((topic, self._check_preference(m.get("preference"))))
        return dialogue.topic_mentions(pairs)

    # -- views -----------------------------------------------------------------

    def view(self):
        hist = self.agent.history
        turns = []
        for turn in hist.turns:
            resp = None
            if turn.response is not None:
                resp = {
                    "kind": turn.response.kind,
                    "mentions": [{"label": self.graph.labels[t], "preference": p}
                                 for t, p in turn.response.mentions],
                }
            turns.append({"agent_topic": self.graph.labels[turn.agent_topic],
                          "response": resp})
        candidates = []
        if self.status == "active" and self.last_candidates:
            candidates = [{
                "label": self.graph.labels[c.topic],
                "est_distance": c.est_distance,
                "est_preference": c.est_preference,
                "rank_d": c.rank_d,
                "rank_p": c.rank_p,
                "score": c.score,
            } for c in self.last_candidates]
        return {
            "api_version": API_VERSION,
            "session_id": self.id,
            "status": self.status,
            "outcome": self.outcome,
            "start": self.graph.labels[hist.start],
            "goal": self.graph.labels[hist.goal],
            "policy": self.policy.kind,
            "tolerance_hint": self.tolerance_hint,
            "turn_limit": self.agent.env_cfg.max_turns,
            "pending_topic": None if self.pending_topic is None
                             else self.graph.labels[self.pending_topic],
            "turns": turns,
            "diagnostics": self.diagnostics,
            "candidates": candidates,
        }


class SessionService:
    """Holds the world plus live sessions; thread-safe."""

    def __init__(self, graph, embeddings, env_cfg=None, dist_cfg=None,
                 default_checkpoints=None, transcript_path=None):
        self.graph = graph
        self.embeddings = embeddings
        self.env_cfg = env_cfg or EnvConfig()
        self.dist_cfg = dist_cfg or DistanceConfig()
        self.dist_cache = DistanceCache()
        self.default_checkpoints = default_checkpoints or {}
        self.transcript_path = transcript_path
        self.sessions = {}
        self._lock = threading.Lock()
        self._counter = 0

    # -- operations ------------------------------------------------------------

    def create_session(self, body):
        start_label = body.get("start")
        goal_label = body.get("goal")
        kind = body.get("policy")
        for name, value in (("start", start_label), ("goal", goal_label), ("policy", kind)):
            if not isinstance(value, str) or not value:
                raise ApiError(400, f"field {name!r} is required")
        if kind not in POLICY_KINDS:
            raise ApiError(400, f"unknown policy {kind!r}; choose from {sorted(POLICY_KINDS)}")
        try:
            start = self.graph.topic_id(start_label)
        except TopicNotFoundError:
            raise ApiError(400, f"unknown topic label {start_label!r}") from None
        try:
            goal = self.graph.topic_id(goal_label)
        except TopicNotFoundError:
            raise ApiError(400, f"unknown topic label {goal_label!r}") from None
        if start == goal:
            raise ApiError(400, "start and goal topics must differ")

        pol = self._resolve_policy(kind, body.get("checkpoint"))
        tolerance_hint = body.get("tolerance_hint")
        with self._lock:
            self._counter += 1
            seed = body.get("seed", self._counter)
            session_id = secrets.token_hex(8)
            session = DialogueSession(session_id, self.graph, self.embeddings, pol,
                                      start, goal, self.env_cfg, self.dist_cfg,
                                      self.dist_cache, rng_seed=seed,
                                      tolerance_hint=tolerance_hint)
            self.sessions[session_id] = session
        return session

    def _resolve_policy(self, kind, checkpoint_path):
        if kind not in TRAINABLE_KINDS:
            return Policy(kind)
        if checkpoint_path is None:
            if kind in self.default_checkpoints:
                return self.default_checkpoints[kind]
            raise ApiError(400, f"checkpoint required for policy {kind!r}")
        try:
            loaded_kind, net, _ = load_checkpoint(checkpoint_path)
        except DataError as exc:
            raise ApiError(422, f"checkpoint rejected: {exc}") from None
        if loaded_kind != kind:
            raise ApiError(422, f"checkpoint holds {loaded_kind!r}, session wants {kind!r}")
        return Policy(kind, net)

    def get_session(self, session_id):
        session = self.sessions.get(session_id)
        if session is None:
            raise ApiError(404, f"unknown session {session_id!r}")
        return session

    def respond(self, session_id, body):
        session = self.get_session(session_id)
        with session.lock:
            session.respond(body)
            if session.status != "active" and self.transcript_path:
                self._persist(session)
        return session

    def _persist(self, session):
        # evaluation transcript shape; human sessions have no true preference
        # oracle, so simulator-only fields carry the stated value or null
        view = session.view()
        turns = []
        for i, turn in enumerate(view["turns"]):
            resp = turn["response"]
            stated = None
            if resp is not None and resp["kind"] == "cooperative":
                stated = resp["mentions"][0]["preference"]
            diag = view["diagnostics"][i] if i < len(view["diagnostics"]) else {}
            turns.append({
                "agent_topic": turn["agent_topic"],
                "agent_topic_pref": stated,
                "response_kind": None if resp is None else resp["kind"],
                "mentions": [] if resp is None else
                            [[m["label"], m["preference"]] for m in resp["mentions"]],
                "us_true": None,
                "est_distance": diag.get("est_distance_to_goal"),
                "gw": diag.get("gw"),
                "cd": diag.get("cd"),
                "factors": diag.get("factors"),
            })
        doc = {
            "start": view["start"], "goal": view["goal"],
            "tolerance_k": view["tolerance_hint"],
            "outcome": view["outcome"], "seed": session.rng_seed, "turns": turns,
        }
        with self._lock, open(self.transcript_path, "a", encoding="utf-8") as fh:
            fh.write(json.dumps(doc, sort_keys=True) + "\n")

    def graph_neighbors(self, label, hops):
        if hops not in (1, 2, 3):
            raise ApiError(400, f"hops must be 1..3, got {hops}")
        try:
            center = self.graph.topic_id(label)
        except TopicNotFoundError:
            raise ApiError(404, f"unknown topic label {label!r}") from None
        ball = khop_ball(self.graph, center, hops)
        rows = [{"label": self.graph.labels[t], "hops": d}
                for t, d in ball.items() if t != center]
        rows.sort(key=lambda r: (r["hops"], r["label"]))
        return rows


# -- HTTP adapter ---------------------------------------------------------------


def _session_body(session):
    doc = session.view()
    doc["agent_topic"] = doc["pending_topic"]
    return doc


class _Handler(BaseHTTPRequestHandler):
    service = None  # injected by make_server
    server_version = "goaltalk"

    def log_message(self, fmt, *args):  # silence default stderr chatter
        pass

    def _send(self, status, doc):
        body = json.dumps(doc, sort_keys=True).encode("utf-8")
        self.send_response(status)
        self.send_header("Content-Type", "application/json; charset=utf-8")
        self.send_header("Content-Length", str(len(body)))
        self.send_header("Access-Control-Allow-Origin", "*")
        self.end_headers()
        self.wfile.write(body)

    def _error(self, status, message):
        self._send(status, {"api_version": API_VERSION, "error": message})

    def _read_json(self):
        length = int(self.headers.get("Content-Length", 0))
        raw = self.rfile.read(length) if length else b"{}"
        try:
            doc = json.loads(raw.decode("utf-8"))
        except (UnicodeDecodeError, json.JSONDecodeError) as exc:
            raise ApiError(400, f"request body is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ApiError(400, "request body must be a JSON object")
        return doc

    def do_OPTIONS(self):
        self.send_response(204)
        self.send_header("Access-Control-Allow-Origin", "*")
        self.send_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS")
        self.send_header("Access-Control-Allow-Headers", "Content-Type")
        self.end_headers()

    def do_POST(self):
        try:
            path = urlparse(self.path).path.rstrip("/")
            if path == "/api/sessions":
                session = self.service.create_session(self._read_json())
                self._send(201, _session_body(session))
            elif path.startswith("/api/sessions/") and path.endswith("/respond"):
                session_id = path[len("/api/sessions/"):-len("/respond")]
                session = self.service.respond(session_id, self._read_json())
                self._send(200, _session_body(session))
            else:
                self._error(404, f"no such route {path}")
        except ApiError as exc:
            self._error(exc.status, str(exc))
        except GoaltalkError as exc:
            self._error(400, str(exc))

    def do_GET(self):
        try:
            parsed = urlparse(self.path)
            path = parsed.path.rstrip("/")
            if path.startswith("/api/sessions/"):
                session_id = path[len("/api/sessions/"):]
                session = self.service.get_session(session_id)
                self._send(200, session.view())
            elif path == "/api/graph/neighbors":
                q = parse_qs(parsed.query)
                label = q.get("topic", [None])[0]
                if label is None:
                    raise ApiError(400, "query parameter `topic` is required")
                try:
                    hops = int(q.get("hops", ["3"])[0])
                except ValueError:
                    raise ApiError(400, "query parameter `hops` must be an integer") from None
                rows = self.service.graph_neighbors(label, hops)
                self._send(200, {"api_version": API_VERSION, "topic": label,
                                 "hops": hops, "neighbors": rows})
            else:
                self._error(404, f"no such route {path}")
        except ApiError as exc:
            self._error(exc.status, str(exc))
        except GoaltalkError as exc:
            self._error(400, str(exc))


def make_server(service, host="127.0.0.1", port=0):
    handler = type("BoundHandler", (_Handler,), {"service": service})
    return ThreadingHTTPServer((host, port), handler)
