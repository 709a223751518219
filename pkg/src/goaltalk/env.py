"""Dialogue environment: agent-side state, reward shaping, episode runner.

AgentState is the single decision-state assembly used both for simulated
episodes and for live human sessions, so observations and candidate rules
cannot drift between the two.
"""

import math
from dataclasses import dataclass

import numpy as np

from goaltalk import dialogue, simulator
from goaltalk.distance import DistanceCache, DistanceConfig, estimate_distance
from goaltalk.errors import ConfigError, EmptyCandidatesError
from goaltalk.kg import one_hop_candidates
from goaltalk.nets import FactorVector
from goaltalk.policy import select_topic, rank_descending_distance, rank_ascending_preference
from goaltalk.preferences import ObservationSet, assemble_preferences, fit_user_vector
from goaltalk.records import EpisodeRecord, TurnRecord
from goaltalk.replay import StateFeatures, Transition

COLD_START_EUS = 0.5


@dataclass(frozen=True)
class RewardConfig:
    alpha: float = 100.0
    lambda_decay: float = 0.02
    gamma: float = 0.9
    r_quit: float = -10.0
    r_success: float = 20.0
    r_fail: float = -10.0
    printed_goal_sign: bool = False  # flips the goal term to d_t - d_{t-1}

    def __post_init__(self):
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma must lie in (0, 1), got {self.gamma}")
        if self.lambda_decay < 0.0:
            raise ConfigError(f"lambda decay must be non-negative, got {self.lambda_decay}")


@dataclass(frozen=True)
class EnvConfig:
    max_turns: int = 20
    ridge_beta: float = 0.01

    def __post_init__(self):
        if self.max_turns < 1:
            raise ConfigError(f"max turns must be >= 1, got {self.max_turns}")


def step_reward(prev, cur, turn, event, cfg):
    """Sum of the five reward components for one turn.

    prev/cur carry {'us', 'd'}; event is None, 'quit', 'success', or 'fail'.
    The goal term rewards progress (d_{t-1} - d_t) unless the config asks
    for the opposite printed sign.
    """
    r_us = cfg.alpha * (cur["us"] - prev["us"])
    delta = (cur["d"] - prev["d"]) if cfg.printed_goal_sign else (prev["d"] - cur["d"])
    r_goal = math.exp(-cfg.lambda_decay * turn) * delta
    bonus = {"quit": cfg.r_quit, "success": cfg.r_success, "fail": cfg.r_fail}.get(event, 0.0)
    return r_us + r_goal + bonus


class AgentState:
    """What the agent knows mid-dialogue: history, observations, anchors."""

    def __init__(self, graph, embeddings, start, goal, env_cfg=None,
                 dist_cfg=None, dist_cache=None):
        if start == goal:
            raise ConfigError("start and goal topics must differ")
        graph.check_topic(start)
        graph.check_topic(goal)
        self.graph = graph
        self.embeddings = embeddings
        self.env_cfg = env_cfg or EnvConfig()
        self.dist_cfg = dist_cfg or DistanceConfig()
        self.dist_cache = dist_cache if dist_cache is not None else DistanceCache()
        self.history = dialogue.DialogueHistory(start, goal)
        self.obs = ObservationSet()
        self.coop_seq = []
        self.anchors = [start]
        self.introduced = {start}
        self._response_topic_turns = []  # per responded turn: topics the user talked about

    @property
    def goal(self):
        return self.history.goal

    def distance_to_goal(self, topic):
        return estimate_distance(self.graph, topic, self.goal, self.dist_cfg, self.dist_cache)

    def estimated_preferences(self):
        u_hat = fit_user_vector(self.obs, self.embeddings, self.env_cfg.ridge_beta)
        return assemble_preferences(self.obs, u_hat, self.embeddings)

    def estimated_satisfaction(self, prefs):
        """Mean estimated preference of the user's past utterance topics."""
        if not self._response_topic_turns:
            return COLD_START_EUS
        per_turn = [float(np.mean([prefs.values[t] for t in topics]))
                    for topics in self._response_topic_turns]
        return float(np.mean(per_turn))

    def decision_state(self, turn_index):
        """Features and candidates for the decision at 1-based `turn_index`."""
        candidates = one_hop_candidates(self.graph, self.anchors, self.introduced)
        if not candidates:
            raise EmptyCandidatesError(f"no candidates from anchors {self.anchors}")
        prefs = self.estimated_preferences()
        gcd = min(self.distance_to_goal(a) for a in self.anchors)
        eus = self.estimated_satisfaction(prefs)
        factors = FactorVector(
            turn_norm=turn_index / self.env_cfg.max_turns,
            gcd_norm=gcd / self.dist_cfg.d_max,
            eus=eus,
            cd=0.5,  # realized cd comes from the policy net, if any
        )
        cand = [(t, self.distance_to_goal(t), float(prefs.values[t])) for t in candidates]
        return {
            "turn": turn_index,
            "factors": factors,
            "coop_seq": tuple(self.coop_seq),
            "candidates": cand,
        }

    def state_features(self, ds):
        rank_d = rank_descending_distance([(t, d) for t, d, _ in ds["candidates"]])
        rank_p = rank_ascending_preference([(t, p) for t, _, p in ds["candidates"]])
        cand_ranks = tuple((t, rank_d[t], rank_p[t]) for t, _, _ in ds["candidates"])
        f = ds["factors"]
        return StateFeatures((f.turn_norm, f.gcd_norm, f.eus), ds["coop_seq"], cand_ranks)

    def apply_response(self, agent_topic, response):
        """Fold a user response into observations, cooperation codes, anchors."""
        for topic, pref in response.mentions:
            self.obs.observe(topic, pref)
        self.coop_seq.append(0 if response.is_cooperative else 1)
        self.introduced.add(agent_topic)
        if response.is_cooperative:
            self.anchors = [agent_topic]
            self._response_topic_turns.append([agent_topic])
        else:
            mentioned = [t for t, _ in response.mentions]
            self.anchors = mentioned
            self._response_topic_turns.append(mentioned)


def run_episode(graph, embeddings, pol, profile, pair, reward_cfg=None, env_cfg=None,
                sim_cfg=None, rng=None, collect=False, explore_epsilon=0.0,
                dist_cfg=None, dist_cache=None):
    """Play one dialogue; returns (EpisodeRecord, transitions).

    The episode ends when the agent introduces the goal topic (success), the
    user quits, the turn limit passes (timeout), or candidates dead-end
    (failure, counted as timeout).
    """
    reward_cfg = reward_cfg or RewardConfig()
    env_cfg = env_cfg or EnvConfig()
    sim_cfg = sim_cfg or simulator.SimulatorConfig()
    rng = rng if rng is not None else np.random.default_rng(profile.rng_seed)
    start, goal = pair

    agent = AgentState(graph, embeddings, start, goal, env_cfg, dist_cfg, dist_cache)
    record = EpisodeRecord(
        start=graph.labels[start], goal=graph.labels[goal],
        tolerance_k=profile.tolerance_k, outcome=dialogue.ONGOING,
        seed=profile.rng_seed)
    transitions = []
    pending = None  # (state_features, action, reward) awaiting its next state
    prev = {"us": profile.preference(start), "d": agent.distance_to_goal(start)}
    outcome = dialogue.TIMEOUT  # overwritten unless the loop exits exhausted

    for t in range(1, env_cfg.max_turns + 1):
        try:
            ds = agent.decision_state(t)
        except EmptyCandidatesError:
            if pending is not None and collect:
                sf, action, r = pending
                transitions.append(Transition(sf, action, r + reward_cfg.r_fail, None, True))
                pending = None
            outcome = dialogue.TIMEOUT
            break
        sf = agent.state_features(ds) if collect else None
        if pending is not None and collect:
            p_sf, p_action, p_r = pending
            transitions.append(Transition(p_sf, p_action, p_r, sf, False))
            pending = None

        action, diag = select_topic(pol, ds, rng=rng, explore_epsilon=explore_epsilon)
        ed_action = agent.distance_to_goal(action)
        f = ds["factors"]
        turn_rec = TurnRecord(
            agent_topic=graph.labels[action],
            agent_topic_pref=profile.preference(action),
            response_kind=None, mentions=[], us_true=0.0,
            est_distance=ed_action, gw=diag["gw"], cd=diag["cd"],
            factors={"turn_norm": f.turn_norm, "gcd_norm": f.gcd_norm, "eus": f.eus})

        if action == goal:
            agent.history.append(dialogue.Turn(action, None))
            us_t = simulator.satisfaction(profile, agent.history)
            cur = {"us": us_t, "d": 0.0}
            r = step_reward(prev, cur, t, "success", reward_cfg)
            turn_rec.us_true = us_t
            record.turns.append(turn_rec)
            if collect:
                transitions.append(Transition(sf, action, r, None, True))
            outcome = dialogue.SUCCESS
            break

        response = simulator.respond(profile, graph, agent.history, action, sim_cfg, rng)
        agent.history.append(dialogue.Turn(action, response))
        us_t = simulator.satisfaction(profile, agent.history)
        cur = {"us": us_t, "d": ed_action}
        turn_rec.us_true = us_t
        turn_rec.response_kind = response.kind
        turn_rec.mentions = [(graph.labels[m], p) for m, p in response.mentions]
        record.turns.append(turn_rec)

        if response.is_quit:
            r = step_reward(prev, cur, t, "quit", reward_cfg)
            if collect:
                transitions.append(Transition(sf, action, r, None, True))
            outcome = dialogue.QUIT_OUTCOME
            break

        if t == env_cfg.max_turns:
            r = step_reward(prev, cur, t, "fail", reward_cfg)
            if collect:
                transitions.append(Transition(sf, action, r, None, True))
            outcome = dialogue.TIMEOUT
            break

        r = step_reward(prev, cur, t, None, reward_cfg)
        agent.apply_response(action, response)
        if collect:
            pending = (sf, action, r)
        prev = cur

    agent.history.outcome = outcome
    record.outcome = outcome
    return record, transitions
