"""Evaluation metrics: time-discounted goal completion, satisfaction,
Pareto-front reporting, and Pearson correlation."""

import math
from dataclasses import dataclass, field

import numpy as np

from goaltalk.errors import UndefinedMetricError


def gcr(records, lambda_decay=0.02):
    """Mean of e^(-lambda * T_k) over succeeded episodes, 0 for the rest."""
    if not records:
        raise UndefinedMetricError("GCR over zero episodes")
    total = 0.0
    for rec in records:
        if rec.succeeded:
            total += math.exp(-lambda_decay * rec.turn_count)
    return total / len(records)


def us_metric(records):
    """Mean over episodes of the per-episode mean per-turn preference."""
    if not records:
        raise UndefinedMetricError("US over zero episodes")
    return float(sum(rec.episode_us() for rec in records) / len(records))


@dataclass(frozen=True)
class MetricPair:
    gcr: float
    us: float

    def dominates(self, other):
        ge = self.gcr >= other.gcr and self.us >= other.us
        gt = self.gcr > other.gcr or self.us > other.us
        return ge and gt


@dataclass
class RoundResultSet:
    rounds: list                  # MetricPair per evaluation round
    front: list = field(default_factory=list)
    reported: MetricPair = None   # component-wise mean of the front
    mean: MetricPair = None
    sd: MetricPair = None


def pareto_report(rounds):
    """Non-dominated front of per-round results plus its component means."""
    if not rounds:
        raise UndefinedMetricError("Pareto report over zero rounds")
    front = [p for p in rounds if not any(q.dominates(p) for q in rounds)]
    reported = MetricPair(float(np.mean([p.gcr for p in front])),
                          float(np.mean([p.us for p in front])))
    mean = MetricPair(float(np.mean([p.gcr for p in rounds])),
                      float(np.mean([p.us for p in rounds])))
    sd = MetricPair(float(np.std([p.gcr for p in rounds])),
                    float(np.std([p.us for p in rounds])))
    return RoundResultSet(list(rounds), front, reported, mean, sd)


def pearson(xs, ys):
    """(coefficient, degenerate flag); zero-variance input reports (0, True)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise ValueError("pearson needs two equally sized 1-D sequences")
    if len(xs) < 3:
        raise UndefinedMetricError("correlation needs at least 3 pairs")
    sx = xs.std()
    sy = ys.std()
    # constant sequences can carry ~1e-17 of float noise from the mean
    if sx < 1e-12 or sy < 1e-12:
        return 0.0, True
    r = float(((xs - xs.mean()) * (ys - ys.mean())).mean() / (sx * sy))
    return r, False
