"""Experience replay: transitions over rank-featured candidate sets."""

from dataclasses import dataclass


@dataclass(frozen=True)
class StateFeatures:
    """Everything needed to recompute Q-values for one decision."""
    factors3: tuple            # (turn_norm, gcd_norm, eus)
    coop_seq: tuple            # cooperation codes before this decision
    cand_ranks: tuple          # ((topic, rank_d, rank_p), ...)

    def ranks_of(self, topic):
        for t, rd, rp in self.cand_ranks:
            if t == topic:
                return rd, rp
        raise KeyError(topic)


@dataclass(frozen=True)
class Transition:
    state: StateFeatures
    action: int
    reward: float
    next_state: StateFeatures  # None when terminal
    terminal: bool


class ReplayMemory:
    """Fixed-capacity ring buffer with a uniform sampler."""

    def __init__(self, capacity=2000):
        if capacity <= 0:
            raise ValueError("capacity must be positive")
        self.capacity = capacity
        self._items = []
        self._next = 0

    def push(self, transition):
        if len(self._items) < self.capacity:
            self._items.append(transition)
        else:
            self._items[self._next] = transition
        self._next = (self._next + 1) % self.capacity

    def __len__(self):
        return len(self._items)

    def items(self):
        return list(self._items)

    def sample(self, rng, batch_size):
        if batch_size > len(self._items):
            raise ValueError(f"cannot sample {batch_size} from {len(self._items)} items")
        idx = rng.choice(len(self._items), size=batch_size, replace=False)
        return [self._items[int(i)] for i in idx]
