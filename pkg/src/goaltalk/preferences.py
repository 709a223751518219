"""User-vector fitting and full preference assembly.

Observed (topic, preference) pairs constrain a linear model p = E u; the
user vector is recovered with the ridge normal equation, falling back to
gradient descent when the system is ill-conditioned. Unobserved topics get
the clamped model prediction; observed topics pass through untouched.
"""

from dataclasses import dataclass, field

import numpy as np

from goaltalk.errors import ConfigError

COLD_START_PREFERENCE = 0.5
CONDITION_LIMIT = 1e12
GD_LEARNING_RATE = 0.05
GD_MAX_ITERS = 500
GD_GRAD_TOL = 1e-8


@dataclass
class ObservationSet:
    """Latest observed preference per topic, values clamped to [0, 1]."""
    entries: dict = field(default_factory=dict)

    def observe(self, topic, preference):
        self.entries[topic] = min(1.0, max(0.0, float(preference)))

    def __len__(self):
        return len(self.entries)

    def items_sorted(self):
        return sorted(self.entries.items())


@dataclass
class EstimatedPreferences:
    values: np.ndarray        # full vector over topics, in [0, 1]
    observed_mask: np.ndarray  # True where the value came from an observation
    user_vector: np.ndarray


def _ridge_gradient_descent(E, p, beta, dim):
    """Minimize (1/n)(`||Eu - p||^2 + beta ||u||^2`); same argmin as the
    normal equation, scaled so the fixed step size is stable for unit rows."""
    n = len(p)
    u = np.zeros(dim)
    EtE = E.T @ E
    Etp = E.T @ p
    for _ in range(GD_MAX_ITERS):
        grad = (2.0 / n) * (EtE @ u - Etp + beta * u)
        if np.abs(grad).max() < GD_GRAD_TOL:
            break
        u -= GD_LEARNING_RATE * grad
    return u


def fit_user_vector(obs, embeddings, ridge_beta=0.01):
    """Solve (E^T E + beta I) u = E^T p over the observed topics.

    An empty observation set yields the zero vector (cold start is handled
    by `assemble_preferences`).
    """
    if ridge_beta < 0:
        raise ConfigError(f"ridge beta must be non-negative, got {ridge_beta}")
    dim = embeddings.dim
    if len(obs) == 0:
        return np.zeros(dim)

    topics, prefs = zip(*obs.items_sorted())
    E = embeddings.rows[list(topics)]
    p = np.asarray(prefs, dtype=np.float64)
    A = E.T @ E + ridge_beta * np.eye(dim)
    if np.linalg.cond(A) > CONDITION_LIMIT:
        return _ridge_gradient_descent(E, p, ridge_beta, dim)
    return np.linalg.solve(A, E.T @ p)


def assemble_preferences(obs, u_hat, embeddings):
    """Full preference vector: observations verbatim, predictions clamped.

    With no observations at all, every topic gets the neutral cold-start
    value instead of the all-zero clamp of a zero user vector.
    """
    u_hat = np.asarray(u_hat, dtype=np.float64)
    if u_hat.shape != (embeddings.dim,):
        raise ConfigError(f"user vector shape {u_hat.shape} != embedding dim {embeddings.dim}")
    n = len(embeddings.labels)
    mask = np.zeros(n, dtype=bool)
    if len(obs) == 0:
        values = np.full(n, COLD_START_PREFERENCE)
        return EstimatedPreferences(values, mask, u_hat)

    values = np.clip(embeddings.rows @ u_hat, 0.0, 1.0)
    for topic, pref in obs.entries.items():
        values[topic] = pref
        mask[topic] = True
    return EstimatedPreferences(values, mask, u_hat)
