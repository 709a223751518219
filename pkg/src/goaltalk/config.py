"""Flat JSON run configuration: all hyperparameters in one document.

`paper` preset carries the published constants; `desk` shrinks the world
and raises the learning rate so a full train/eval cycle fits on a desk.
"""

import json
from dataclasses import dataclass, asdict, fields

from goaltalk.errors import ConfigError


@dataclass
class RunConfig:
    # world / data
    embedding_dim: int = 50
    world_nodes: int = 300
    world_edges_per_node: int = 2
    world_pairs: int = 100
    world_min_pair_distance: int = 2
    world_max_pair_distance: int = 6
    # distance estimation
    distance_limit: int = 6
    d_max: float = 7.0
    # dialogue / rewards
    max_turns: int = 20
    gamma: float = 0.9
    lambda_decay: float = 0.02
    alpha: float = 100.0
    r_quit: float = -10.0
    r_success: float = 20.0
    r_fail: float = -10.0
    # training
    epsilon: float = 0.2
    learning_rate: float = 1e-7
    epochs: int = 100
    batch_size: int = 100
    memory_capacity: int = 2000
    target_sync_interval: int = 50
    # preference estimation
    ridge_beta: float = 0.01
    # net sizes
    gru_hidden: int = 16
    mlp_hidden: int = 32
    # simulator
    q_c_star: float = 0.5
    q_q_star: float = 0.4
    mention_hops: int = 3
    max_mentions: int = 3
    # embedding walks
    walks_per_node: int = 10
    walk_length: int = 20
    window: int = 3
    negatives: int = 5
    walk_learning_rate: float = 0.025
    walk_epochs: int = 3
    # evaluation
    eval_rounds: int = 100
    # misc
    seed: int = 0

    def validate(self):
        positive_ints = ["embedding_dim", "world_nodes", "world_edges_per_node", "world_pairs",
                         "max_turns", "epochs", "batch_size", "memory_capacity",
                         "target_sync_interval", "gru_hidden", "mlp_hidden", "mention_hops",
                         "max_mentions", "walks_per_node", "walk_length", "window",
                         "negatives", "walk_epochs", "eval_rounds"]
        for key in positive_ints:
            v = getattr(self, key)
            if not isinstance(v, int) or (v <= 0 and not (key == "epochs" and v == 0)):
                raise ConfigError(f"{key}: must be a positive integer, got {v!r}")
        if self.epochs < 0:
            raise ConfigError(f"epochs: must be >= 0, got {self.epochs}")
        if self.distance_limit <= 0 or self.distance_limit % 2:
            raise ConfigError(f"distance_limit: must be a positive even integer, got {self.distance_limit}")
        if self.d_max <= self.distance_limit:
            raise ConfigError(f"d_max: must exceed distance_limit, got {self.d_max}")
        if not 0.0 <= self.epsilon <= 1.0:
            raise ConfigError(f"epsilon: must lie in [0, 1], got {self.epsilon}")
        if not 0.0 < self.gamma < 1.0:
            raise ConfigError(f"gamma: must lie in (0, 1), got {self.gamma}")
        if self.lambda_decay < 0:
            raise ConfigError(f"lambda_decay: must be >= 0, got {self.lambda_decay}")
        if self.learning_rate <= 0 or self.walk_learning_rate <= 0:
            raise ConfigError("learning_rate: must be positive")
        if self.ridge_beta < 0:
            raise ConfigError(f"ridge_beta: must be >= 0, got {self.ridge_beta}")
        if not 0.0 < self.q_q_star < self.q_c_star < 1.0:
            raise ConfigError(f"q_q_star/q_c_star: need 0 < {self.q_q_star} < {self.q_c_star} < 1")
        if self.batch_size > self.memory_capacity:
            raise ConfigError("batch_size: cannot exceed memory_capacity")
        if not 1 <= self.world_min_pair_distance <= self.world_max_pair_distance:
            raise ConfigError("world_min_pair_distance: need 1 <= min <= max")
        return self

    def to_json(self):
        return json.dumps(asdict(self), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        cfg = cls(**doc)
        return cfg.validate()

    @classmethod
    def from_json(cls, text):
        try:
            doc = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from None
        if not isinstance(doc, dict):
            raise ConfigError("config JSON must be a flat object")
        return cls.from_dict(doc)


PRESETS = {
    # published constants: big epochs, tiny lr
    "paper": {},
    # desk-scale recipe: same world defaults, Adam-friendly lr, short run
    "desk": {"learning_rate": 1e-3, "epochs": 10, "eval_rounds": 5},
}


def preset(name):
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}")
    base = RunConfig()
    for key, value in PRESETS[name].items():
        setattr(base, key, value)
    return base.validate()
