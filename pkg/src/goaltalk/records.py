"""Episode transcripts consumed by the metrics and written as JSON lines."""

from dataclasses import dataclass, field, asdict

from goaltalk import dialogue


@dataclass
class TurnRecord:
    agent_topic: str
    agent_topic_pref: float      # the user's true preference of the agent topic
    response_kind: str           # cooperative | topics | quit | None (goal reached)
    mentions: list               # [(label, preference)] for topic responses
    us_true: float               # simulator-side satisfaction after this turn
    est_distance: float          # estimated distance from the agent topic to the goal
    gw: float = None
    cd: float = None
    factors: dict = None         # {turn_norm, gcd_norm, eus}


@dataclass
class EpisodeRecord:
    start: str
    goal: str
    tolerance_k: float
    outcome: str
    seed: int
    turns: list = field(default_factory=list)

    @property
    def turn_count(self):
        return len(self.turns)

    @property
    def succeeded(self):
        return self.outcome == dialogue.SUCCESS

    def turn_values(self):
        """Per-turn mean true preference over the distinct turn topics."""
        values = []
        for t in self.turns:
            prefs = [t.agent_topic_pref]
            prefs += [p for label, p in t.mentions if label != t.agent_topic]
            values.append(sum(prefs) / len(prefs))
        return values

    def episode_us(self):
        values = self.turn_values()
        if not values:
            return 0.0  # zero-turn episodes are unreachable on connected worlds
        return float(sum(values) / len(values))

    def to_dict(self):
        return asdict(self)


def record_from_dict(doc):
    turns = [TurnRecord(**t) for t in doc.pop("turns", [])]
    rec = EpisodeRecord(**doc)
    rec.turns = [
        TurnRecord(t.agent_topic, t.agent_topic_pref, t.response_kind,
                   [tuple(m) for m in t.mentions], t.us_true, t.est_distance,
                   t.gw, t.cd, t.factors)
        for t in turns
    ]
    return rec
