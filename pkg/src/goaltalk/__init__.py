"""goaltalk: a desk-scale lab for goal-directed topic dialogue policies.

A knowledge-graph world, a tolerance-parameterized non-cooperative user
simulator, a learned goal-weight policy trained by deep Q-learning,
baselines, an evaluation protocol, and an HTTP session service for playing
the user against a trained agent.
"""

__version__ = "0.1.0"
