"""Topic selection policies.

Scores blend two 1-based ranks: goal-closeness (closest candidate gets the
largest rank) and estimated preference (most preferred gets the largest
rank), weighted by a goal weight gw. Baselines are the gw extremes plus a
uniform-random chooser; the trainable kinds produce gw from ScalarBlend or
GoalWeightNet.
"""

from dataclasses import dataclass

from goaltalk.errors import ConfigError, EmptyCandidatesError
from goaltalk.nets import FactorVector, GoalWeightNet, ScalarBlend  # noqa: F401 (re-export)

RANDOM = "random"
GREEDY_GOAL = "greedy_goal"
GREEDY_PREF = "greedy_pref"
SCALAR_BLEND = "scalar_blend"
GOAL_WEIGHT = "goal_weight"
POLICY_KINDS = (RANDOM, GREEDY_GOAL, GREEDY_PREF, SCALAR_BLEND, GOAL_WEIGHT)
TRAINABLE_KINDS = (SCALAR_BLEND, GOAL_WEIGHT)


@dataclass
class CandidateScore:
    topic: int
    est_distance: float
    est_preference: float
    rank_d: int
    rank_p: int
    score: float


@dataclass
class Policy:
    kind: str
    net: object = None  # GoalWeightNet or ScalarBlend for the trainable kinds

    def __post_init__(self):
        if self.kind not in POLICY_KINDS:
            raise ConfigError(f"unknown policy kind {self.kind!r}")
        if self.kind in TRAINABLE_KINDS and self.net is None:
            raise ConfigError(f"policy {self.kind!r} requires a parameter checkpoint")

    @property
    def trainable(self):
        return self.kind in TRAINABLE_KINDS


def rank_descending_distance(pairs):
    """topic -> rank; the closest topic gets rank n, ties favor smaller id."""
    if not pairs:
        raise EmptyCandidatesError("cannot rank an empty candidate list")
    order = sorted(pairs, key=lambda p: (-p[1], -p[0]))
    return {topic: pos for pos, (topic, _) in enumerate(order, start=1)}


def rank_ascending_preference(pairs):
    """topic -> rank; the most preferred topic gets rank n, ties favor smaller id."""
    if not pairs:
        raise EmptyCandidatesError("cannot rank an empty candidate list")
    order = sorted(pairs, key=lambda p: (p[1], -p[0]))
    return {topic: pos for pos, (topic, _) in enumerate(order, start=1)}


def score_candidates(candidates, gw):
    """Blend the two rank maps with weight gw; input order is preserved.

    `candidates` holds (topic, est_distance, est_preference) triples.
    """
    if not candidates:
        raise EmptyCandidatesError("empty candidate set")
    if not 0.0 <= gw <= 1.0:
        raise ConfigError(f"goal weight must lie in [0, 1], got {gw}")
    rank_d = rank_descending_distance([(t, d) for t, d, _ in candidates])
    rank_p = rank_ascending_preference([(t, p) for t, _, p in candidates])
    scored = []
    for topic, d, p in candidates:
        rd, rp = rank_d[topic], rank_p[topic]
        scored.append(CandidateScore(topic, d, p, rd, rp, gw * rd + (1.0 - gw) * rp))
    return scored


def _argmax(scored, key):
    best = scored[0]
    for c in scored[1:]:
        if key(c) > key(best) or (key(c) == key(best) and c.topic < best.topic):
            best = c
    return best


def select_topic(policy, state, rng=None, explore_epsilon=0.0):
    """Choose the next topic; returns (topic, diagnostics).

    `state` needs `candidates` [(topic, ed, ep)] and, for the goal-weight
    net, `factors` (FactorVector) and `coop_seq`. With explore_epsilon > 0
    a uniform random candidate overrides the argmax at that rate.
    """
    candidates = state["candidates"]
    if not candidates:
        raise EmptyCandidatesError("empty candidate set")

    gw = None
    cd = None
    if policy.kind == RANDOM:
        topic = candidates[int(rng.integers(len(candidates)))][0]
        return topic, {"gw": None, "cd": None, "scores": None, "explored": False}

    if policy.kind == GREEDY_GOAL:
        gw = 1.0
    elif policy.kind == GREEDY_PREF:
        gw = 0.0
    elif policy.kind == SCALAR_BLEND:
        gw = policy.net.goal_weight()
    else:
        factors = state["factors"]
        cache = policy.net.forward(
            [[factors.turn_norm, factors.gcd_norm, factors.eus]], [list(state["coop_seq"])])
        gw = float(cache["gw"][0])
        cd = float(cache["cd"][0])

    scored = score_candidates(candidates, gw)
    choice = _argmax(scored, key=lambda c: c.score)
    explored = False
    if explore_epsilon > 0.0 and rng.random() < explore_epsilon:
        choice = scored[int(rng.integers(len(scored)))]
        explored = True
    return choice.topic, {"gw": gw, "cd": cd, "scores": scored, "explored": explored}
