import numpy as np
import pytest

from goaltalk import dialogue, simulator
from goaltalk.embeddings import EmbeddingTable
from goaltalk.errors import ConfigError, UndefinedStateError

from conftest import bfs_oracle, path_graph, random_connected_graph, small_table, small_world  # noqa: F401


def profile_with(prefs, k=1.0):
    prefs = np.asarray(prefs, dtype=np.float64)
    return simulator.UserProfile(
        user_vector=np.zeros(2), preferences=prefs, tolerance_k=k,
        q_cooperative=0.5 / k, q_quit=0.4 / k, rng_seed=0)


def test_sample_profile_deterministic(small_table):
    a = simulator.sample_profile(small_table, 1.0, seed=5)
    b = simulator.sample_profile(small_table, 1.0, seed=5)
    assert np.array_equal(a.user_vector, b.user_vector)
    assert np.array_equal(a.preferences, b.preferences)


def test_profile_minmax_attains_bounds(small_table):
    p = simulator.sample_profile(small_table, 1.0, seed=1)
    assert p.preferences.min() == 0.0
    assert p.preferences.max() == 1.0


def test_thresholds_shrink_with_tolerance(small_table):
    p = simulator.sample_profile(small_table, 0.8, seed=1)
    assert p.q_cooperative == pytest.approx(0.625)
    assert p.q_quit == pytest.approx(0.5)
    p1 = simulator.sample_profile(small_table, 1.0, seed=1)
    assert (p1.q_cooperative, p1.q_quit) == (0.5, 0.4)
    assert p1.q_quit < p1.q_cooperative


def test_nonpositive_tolerance_rejected(small_table):
    with pytest.raises(ConfigError):
        simulator.sample_profile(small_table, 0.0, seed=1)


def test_satisfaction_single_cooperative_turn():
    prof = profile_with([0.0, 0.6, 0.2])
    h = dialogue.DialogueHistory(0, 2)
    h.append(dialogue.Turn(1, dialogue.cooperative(1, 0.6)))
    assert simulator.satisfaction(prof, h) == pytest.approx(0.6)


def test_satisfaction_hand_example():
    # turn 1 value 0.6; turn 2: agent 0.8 plus mentions 0.2 and 0.4
    prof = profile_with([0.6, 0.8, 0.2, 0.4, 0.0])
    h = dialogue.DialogueHistory(4, 4)
    h.append(dialogue.Turn(0, dialogue.cooperative(0, 0.6)))
    h.append(dialogue.Turn(1, dialogue.topic_mentions([(2, 0.2), (3, 0.4)])))
    us = simulator.satisfaction(prof, h)
    assert us == pytest.approx((0.6 + (0.2 + 0.4 + 0.8) / 3) / 2)
    assert us == pytest.approx(0.53333333333, abs=1e-9)


def test_satisfaction_pending_only():
    prof = profile_with([0.3, 0.9])
    h = dialogue.DialogueHistory(0, 1)
    assert simulator.satisfaction(prof, h, pending_agent_topic=1) == pytest.approx(0.9)


def test_satisfaction_undefined_without_turns():
    prof = profile_with([0.3])
    h = dialogue.DialogueHistory(0, 0)
    with pytest.raises(UndefinedStateError):
        simulator.satisfaction(prof, h)


def test_respond_branches_by_thresholds():
    g = path_graph(8)
    h = dialogue.DialogueHistory(0, 7)
    rng = np.random.default_rng(0)
    # single pending topic; US equals its preference exactly
    coop = profile_with(np.full(8, 0.60))
    coop.preferences[3] = 0.60
    assert simulator.respond(coop, g, h, 3, rng=rng).kind == "cooperative"
    mid = profile_with(np.full(8, 0.45))
    assert simulator.respond(mid, g, h, 3, rng=rng).kind == "topics"
    low = profile_with(np.full(8, 0.35))
    assert simulator.respond(low, g, h, 3, rng=rng).kind == "quit"


def test_respond_branch_exactness_randomized():
    g = random_connected_graph(40, 30, seed=6)
    rng = np.random.default_rng(12)
    for trial in range(400):
        prefs = rng.random(g.n_topics)
        k = float(rng.choice([0.8, 1.0, 1.2]))
        prof = profile_with(prefs, k=k)
        h = dialogue.DialogueHistory(0, 1)
        for t in range(int(rng.integers(0, 4))):
            topic = int(rng.integers(g.n_topics))
            if rng.random() < 0.5:
                h.append(dialogue.Turn(topic, dialogue.cooperative(topic, prefs[topic])))
            else:
                m = int(rng.integers(g.n_topics))
                h.append(dialogue.Turn(topic, dialogue.topic_mentions([(m, prefs[m])])))
        pending = int(rng.integers(g.n_topics))
        us = simulator.satisfaction(prof, h, pending_agent_topic=pending)
        resp = simulator.respond(prof, g, h, pending, rng=np.random.default_rng(trial))
        if us > prof.q_cooperative:
            assert resp.kind == "cooperative"
            assert resp.mentions == ((pending, prefs[pending]),)
        elif us > prof.q_quit:
            assert resp.kind == "topics"
        else:
            assert resp.kind == "quit"


def test_mentions_within_scope_and_cap():
    g = random_connected_graph(50, 40, seed=9)
    rng = np.random.default_rng(3)
    cfg = simulator.SimulatorConfig()
    found = 0
    for trial in range(300):
        prefs = rng.random(g.n_topics)
        prof = profile_with(prefs)
        prof = profile_with(np.clip(prefs, 0.41, 0.49))  # force the middle branch
        h = dialogue.DialogueHistory(0, 1)
        pending = int(rng.integers(g.n_topics))
        resp = simulator.respond(prof, g, h, pending, cfg, np.random.default_rng(trial))
        assert resp.kind == "topics"
        found += 1
        topics = [t for t, _ in resp.mentions]
        assert 1 <= len(topics) <= 3
        assert len(set(topics)) == len(topics)
        oracle = bfs_oracle(g, pending)
        for t, p in resp.mentions:
            assert t != pending
            assert oracle.get(t, 99) <= cfg.mention_hops
            assert p == prof.preferences[t]
    assert found == 300


def test_monotone_tolerance():
    g = path_graph(6)
    prefs = np.full(6, 0.55)
    h = dialogue.DialogueHistory(0, 5)
    lo = profile_with(prefs, k=0.8)
    hi = profile_with(prefs, k=1.2)
    assert lo.q_cooperative > hi.q_cooperative
    r_lo = simulator.respond(lo, g, h, 2, rng=np.random.default_rng(0))
    r_hi = simulator.respond(hi, g, h, 2, rng=np.random.default_rng(0))
    # cooperative at low tolerance implies cooperative at high tolerance
    if r_lo.kind == "cooperative":
        assert r_hi.kind == "cooperative"


def test_reported_values_in_range(small_table, small_world):
    g = small_world["graph"]
    prof = simulator.sample_profile(small_table, 1.0, seed=33)
    h = dialogue.DialogueHistory(0, 5)
    rng = np.random.default_rng(1)
    for pending in range(0, 30, 3):
        resp = simulator.respond(prof, g, h, pending, rng=rng)
        for _, p in resp.mentions:
            assert 0.0 <= p <= 1.0
        us = simulator.satisfaction(prof, h, pending_agent_topic=pending)
        assert 0.0 <= us <= 1.0


def test_mixed_source_deterministic_and_balanced(small_table):
    seeds = list(range(3000))
    ks = [p.tolerance_k for p in simulator.mixed_profile_source(small_table, seeds)]
    ks2 = [p.tolerance_k for p in simulator.mixed_profile_source(small_table, seeds)]
    assert ks == ks2
    for k in simulator.MIXED_TOLERANCES:
        frac = ks.count(k) / len(ks)
        assert abs(frac - 1 / 3) < 0.03
    sample = next(simulator.mixed_profile_source(small_table, [7]))
    assert sample.preferences.min() == 0.0 and sample.preferences.max() == 1.0
