"""Soft topic-to-topic distance: exact within a hop limit, fuzzy beyond it.

Two radius-(D/2) balls are grown from the endpoints; if they intersect the
distance is the minimum summed hop count through the overlap (exact for
true distances <= D), otherwise the fuzzy constant d_max is returned.
Ball arrays and pair estimates are cached per (graph, config).
"""

import threading
from dataclasses import dataclass, field

from goaltalk.errors import ConfigError
from goaltalk.kg import ball_array
from goaltalk import kernels


@dataclass(frozen=True)
class DistanceConfig:
    limit_D: int = 6
    d_max: float = 7.0

    def __post_init__(self):
        if self.limit_D <= 0 or self.limit_D % 2 != 0:
            raise ConfigError(f"distance limit must be a positive even integer, got {self.limit_D}")
        if self.d_max <= self.limit_D:
            raise ConfigError(f"d_max must exceed the distance limit, got {self.d_max}")

    @property
    def radius_r(self):
        return self.limit_D // 2


@dataclass
class DistanceCache:
    """Symmetric pair memo plus per-topic ball arrays.

    Values are deterministic, so concurrent last-write-wins inserts are safe.
    """
    memo: dict = field(default_factory=dict)
    balls: dict = field(default_factory=dict)
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False)

    def ball(self, graph, topic, radius):
        got = self.balls.get(topic)
        if got is None:
            got = ball_array(graph, topic, radius)
            with self._lock:
                self.balls[topic] = got
        return got


def estimate_distance(graph, i, j, cfg=None, cache=None):
    """Estimated hop distance between topics i and j.

    Exact when the true distance is <= limit_D, else cfg.d_max.
    """
    cfg = cfg or DistanceConfig()
    graph.check_topic(i)
    graph.check_topic(j)
    if i == j:
        return 0.0
    key = (i, j) if i < j else (j, i)
    if cache is not None:
        got = cache.memo.get(key)
        if got is not None:
            return got

    r = cfg.radius_r
    if cache is not None:
        ball_i = cache.ball(graph, i, r)
        ball_j = cache.ball(graph, j, r)
    else:
        ball_i = ball_array(graph, i, r)
        ball_j = ball_array(graph, j, r)
    best = kernels.pair_ball_distance(ball_i, ball_j)
    value = float(best) if best >= 0 else cfg.d_max

    if cache is not None:
        with cache._lock:
            cache.memo[key] = value
    return value


def goal_difficulty(graph, current, goal, cfg=None, cache=None):
    """Distance-to-goal difficulty of the currently talked topic."""
    return estimate_distance(graph, current, goal, cfg, cache)
