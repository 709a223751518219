"""Dialogue state shared by the simulator, environment, and services."""

from dataclasses import dataclass, field

COOPERATIVE = "cooperative"
TOPICS = "topics"      # off-path topic mentions (non-cooperative)
QUIT = "quit"

ONGOING = "ongoing"
SUCCESS = "success"
QUIT_OUTCOME = "quit"
TIMEOUT = "timeout"


@dataclass(frozen=True)
class UserResponse:
    """One user reply: cooperative echo, off-path mentions, or quit.

    `mentions` holds (topic, preference) pairs; a cooperative response
    carries exactly the agent's topic, a quit carries nothing.
    """
    kind: str
    mentions: tuple = ()

    def __post_init__(self):
        if self.kind not in (COOPERATIVE, TOPICS, QUIT):
            raise ValueError(f"unknown response kind {self.kind!r}")
        if self.kind == COOPERATIVE and len(self.mentions) != 1:
            raise ValueError("cooperative response carries exactly one (topic, preference)")
        if self.kind == TOPICS:
            topics = [t for t, _ in self.mentions]
            if not 1 <= len(topics) <= 3:
                raise ValueError("topic mentions must number 1..3")
            if len(set(topics)) != len(topics):
                raise ValueError("topic mentions must be duplicate-free")
        if self.kind == QUIT and self.mentions:
            raise ValueError("quit carries no mentions")

    @property
    def is_quit(self):
        return self.kind == QUIT

    @property
    def is_cooperative(self):
        return self.kind == COOPERATIVE


def cooperative(topic, preference):
    return UserResponse(COOPERATIVE, ((topic, float(preference)),))


def topic_mentions(pairs):
    return UserResponse(TOPICS, tuple((t, float(p)) for t, p in pairs))


def quit_response():
    return UserResponse(QUIT)


@dataclass
class Turn:
    agent_topic: int
    response: UserResponse = None  # None only on the final goal-reaching turn

    def distinct_topics(self):
        """Topic set the turn talked about: agent topic plus user mentions."""
        topics = [self.agent_topic]
        if self.response is not None:
            for t, _ in self.response.mentions:
                if t != self.agent_topic:
                    topics.append(t)
        return topics


@dataclass
class DialogueHistory:
    start: int
    goal: int
    turns: list = field(default_factory=list)
    outcome: str = ONGOING

    def append(self, turn):
        if self.outcome != ONGOING:
            raise ValueError("history already ended")
        if self.turns and self.turns[-1].response is not None and self.turns[-1].response.is_quit:
            raise ValueError("a quit response must be final")
        self.turns.append(turn)

    @property
    def turn_count(self):
        return len(self.turns)

    def cooperation_codes(self):
        """0 for cooperative turns, 1 for non-cooperative topic mentions.

        Quit and response-less turns end the episode and are never part of a
        later decision, so they carry no code.
        """
        codes = []
        for turn in self.turns:
            if turn.response is None or turn.response.is_quit:
                continue
            codes.append(0 if turn.response.is_cooperative else 1)
        return codes
