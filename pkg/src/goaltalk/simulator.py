"""Tolerance-parameterized non-cooperative user simulator.

Each simulated user owns a hidden vector whose dot products with topic
embeddings, min-max normalized, are the true per-topic preferences.
Satisfaction is the running mean of per-turn mean preferences; thresholds
shrunk by the tolerance trait pick between cooperating, mentioning
preferred off-path topics, and quitting.
"""

from dataclasses import dataclass

import numpy as np

from goaltalk.errors import ConfigError, UndefinedStateError
from goaltalk.kg import ball_array
from goaltalk import dialogue


@dataclass(frozen=True)
class SimulatorConfig:
    q_c_star: float = 0.5
    q_q_star: float = 0.4
    mention_hops: int = 3
    max_mentions: int = 3
    max_sample_attempts: int = 20

    def __post_init__(self):
        if not 0.0 < self.q_q_star < self.q_c_star < 1.0:
            raise ConfigError(
                f"thresholds must satisfy 0 < quit ({self.q_q_star}) < cooperative "
                f"({self.q_c_star}) < 1")
        if self.mention_hops < 1 or self.max_mentions < 1:
            raise ConfigError("mention scope and cap must be positive")


@dataclass
class UserProfile:
    user_vector: np.ndarray
    preferences: np.ndarray  # per-topic, min-max normalized into [0, 1]
    tolerance_k: float
    q_cooperative: float
    q_quit: float
    rng_seed: int

    def preference(self, topic):
        return float(self.preferences[topic])


def sample_profile(embeddings, tolerance_k, seed, cfg=None):
    """Draw a user: Gaussian hidden vector, min-max normalized preferences,
    thresholds shrunk by 1/tolerance."""
    cfg = cfg or SimulatorConfig()
    if tolerance_k <= 0:
        raise ConfigError(f"tolerance must be positive, got {tolerance_k}")
    rng = np.random.default_rng(seed)
    u = rng.normal(0.0, np.sqrt(2.0), size=embeddings.dim)
    raw = embeddings.rows @ u
    lo, hi = raw.min(), raw.max()
    if hi - lo <= 0:
        raise ConfigError("degenerate embedding/user draw: constant preference scores")
    prefs = (raw - lo) / (hi - lo)
    return UserProfile(
        user_vector=u,
        preferences=prefs,
        tolerance_k=float(tolerance_k),
        q_cooperative=cfg.q_c_star / tolerance_k,
        q_quit=cfg.q_q_star / tolerance_k,
        rng_seed=int(seed),
    )


def turn_value(profile, turn):
    """Mean true preference over the turn's distinct topics."""
    topics = turn.distinct_topics()
    return float(sum(profile.preference(t) for t in topics) / len(topics))


def satisfaction(profile, history, pending_agent_topic=None):
    """Cumulative mean of per-turn mean preferences.

    A pending agent topic counts as one more turn containing only itself,
    which is how the user judges the agent's current proposal.
    """
    values = [turn_value(profile, t) for t in history.turns]
    if pending_agent_topic is not None:
        values.append(profile.preference(pending_agent_topic))
    if not values:
        raise UndefinedStateError("satisfaction needs at least one turn or a pending topic")
    return float(sum(values) / len(values))


def _mention_pool(graph, agent_topic, hops):
    ball = ball_array(graph, agent_topic, hops)
    pool = np.flatnonzero(ball >= 0)
    return [int(t) for t in pool if t != agent_topic]


def respond(profile, graph, history, agent_topic, cfg=None, rng=None):
    """One user reply to the agent's proposed topic: cooperate, mention
    preferred off-path topics, or quit, by decision-time satisfaction."""
    cfg = cfg or SimulatorConfig()
    rng = rng if rng is not None else np.random.default_rng(profile.rng_seed)
    graph.check_topic(agent_topic)

    us = satisfaction(profile, history, pending_agent_topic=agent_topic)
    if us > profile.q_cooperative:
        return dialogue.cooperative(agent_topic, profile.preference(agent_topic))
    if us <= profile.q_quit:
        return dialogue.quit_response()

    pool = _mention_pool(graph, agent_topic, cfg.mention_hops)
    if not pool:
        raise UndefinedStateError(f"topic {agent_topic} has no {cfg.mention_hops}-hop neighborhood")
    selected = []
    for _ in range(cfg.max_sample_attempts):
        selected = [t for t in pool if rng.random() < profile.preference(t)]
        if selected:
            break
    if not selected:
        selected = [max(pool, key=lambda t: (profile.preference(t), -t))]
    if len(selected) > cfg.max_mentions:
        selected = sorted(selected, key=lambda t: (-profile.preference(t), t))[:cfg.max_mentions]
    selected.sort()
    return dialogue.topic_mentions([(t, profile.preference(t)) for t in selected])


MIXED_TOLERANCES = (0.8, 1.0, 1.2)


def mixed_profile_source(embeddings, seeds, cfg=None):
    """Profiles with tolerance drawn uniformly from the mixed set, one per seed."""
    cfg = cfg or SimulatorConfig()
    for seed in seeds:
        k = MIXED_TOLERANCES[int(np.random.default_rng(seed).integers(len(MIXED_TOLERANCES)))]
        yield sample_profile(embeddings, k, seed, cfg)
