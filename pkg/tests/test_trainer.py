import math

import numpy as np
import pytest

from goaltalk import dialogue, simulator, trainer as tmod
from goaltalk.env import EnvConfig, RewardConfig, run_episode, step_reward
from goaltalk.errors import ConfigError, ContractViolationError
from goaltalk.nets import GoalWeightNet, ScalarBlend
from goaltalk.policy import Policy
from goaltalk.replay import ReplayMemory, StateFeatures, Transition

from conftest import small_table, small_world  # noqa: F401


def make_state(cands, factors3=(0.1, 0.5, 0.5), seq=(0, 1)):
    return StateFeatures(tuple(factors3), tuple(seq), tuple(cands))


def test_replay_eviction_keeps_last_capacity():
    mem = ReplayMemory(capacity=5)
    items = [Transition(make_state([(i, 1, 1)]), i, float(i), None, True) for i in range(9)]
    for tr in items:
        mem.push(tr)
    assert len(mem) == 5
    assert sorted(t.action for t in mem.items()) == [4, 5, 6, 7, 8]


def test_replay_sample_uniform_subset():
    mem = ReplayMemory(capacity=10)
    for i in range(10):
        mem.push(Transition(make_state([(i, 1, 1)]), i, 0.0, None, True))
    batch = mem.sample(np.random.default_rng(0), 4)
    assert len(batch) == 4
    assert len({t.action for t in batch}) == 4


def test_step_reward_components():
    cfg = RewardConfig()
    # satisfaction delta alone
    r = step_reward({"us": 0.5, "d": 3.0}, {"us": 0.51, "d": 3.0}, 1, None, cfg)
    assert r == pytest.approx(1.0)
    # goal progress alone: t=5, d 4 -> 3
    r = step_reward({"us": 0.5, "d": 4.0}, {"us": 0.5, "d": 3.0}, 5, None, cfg)
    assert r == pytest.approx(math.exp(-0.1), abs=1e-12)
    # event bonuses
    base = {"us": 0.5, "d": 2.0}
    assert step_reward(base, base, 3, "success", cfg) == pytest.approx(20.0)
    assert step_reward(base, base, 3, "quit", cfg) == pytest.approx(-10.0)
    assert step_reward(base, base, 3, "fail", cfg) == pytest.approx(-10.0)
    # decomposition: components add up
    r = step_reward({"us": 0.4, "d": 4.0}, {"us": 0.43, "d": 2.0}, 2, "success", cfg)
    assert r == pytest.approx(100 * 0.03 + math.exp(-0.04) * 2.0 + 20.0)


def test_step_reward_printed_sign_flag():
    cfg = RewardConfig(printed_goal_sign=True)
    r = step_reward({"us": 0.5, "d": 4.0}, {"us": 0.5, "d": 3.0}, 5, None, cfg)
    assert r == pytest.approx(-math.exp(-0.1))


def test_q_value_and_contract():
    net = ScalarBlend(init_raw=0.0)  # gw = 0.5
    state = make_state([(7, 2, 3), (8, 3, 1)])
    q = tmod.q_value(net, state, 7)
    assert q == pytest.approx(3 + 0.5 * (2 - 3))
    with pytest.raises(ContractViolationError):
        tmod.q_value(net, state, 99)


def test_q_affine_in_gw():
    state = make_state([(1, 2, 3), (2, 3, 1), (3, 1, 2)])
    qs = []
    for raw, gw in ((-40.0, 0.0), (0.0, 0.5), (40.0, 1.0)):
        qs.append(tmod.q_value(ScalarBlend(init_raw=raw), state, 1))
    assert qs[0] == pytest.approx(3.0)
    assert qs[1] == pytest.approx(2.5)
    assert qs[2] == pytest.approx(2.0)


def test_bellman_target_cases():
    cfg = RewardConfig()
    net = ScalarBlend(init_raw=40.0)  # gw = 1 -> Q = rank_d
    term = Transition(make_state([(0, 1, 1)]), 0, 20.0, None, True)
    assert tmod.bellman_target(term, net, cfg) == 20.0
    nxt = make_state([(5, 2, 1), (6, 1, 2)])
    tr = Transition(make_state([(0, 1, 1)]), 0, 1.0, nxt, False)
    assert tmod.bellman_target(tr, net, cfg) == pytest.approx(1.0 + 0.9 * 2.0)
    single = Transition(make_state([(0, 1, 1)]), 0, 3.0,
                        make_state([(9, 1, 1)]), False)
    assert tmod.bellman_target(single, net, cfg) == pytest.approx(3.0 + 0.9 * 1.0)
    zero_gamma = RewardConfig(gamma=1e-12)
    assert tmod.bellman_target(tr, net, zero_gamma) == pytest.approx(1.0)


def test_loss_hand_example():
    # residuals 1 and 3 -> loss (1 + 9) / 2 = 5
    net = ScalarBlend(init_raw=40.0)  # gw=1: Q = rank_d
    s1 = make_state([(0, 2, 1), (1, 1, 2)])
    s2 = make_state([(0, 3, 1), (1, 1, 3)])
    batch = [
        Transition(s1, 0, 3.0, None, True),   # Q=2, target=3 -> residual 1
        Transition(s2, 0, 6.0, None, True),   # Q=3, target=6 -> residual 3
    ]
    loss, grads = tmod.compute_loss_and_grads(net, batch, net.clone(), RewardConfig())
    assert loss == pytest.approx(5.0)


def test_zero_residual_zero_gradient():
    net = ScalarBlend(init_raw=0.0)
    s = make_state([(0, 2, 2), (1, 1, 1)])  # rank_d == rank_p -> Q independent of gw
    batch = [Transition(s, 0, 2.0, None, True)]
    loss, grads = tmod.compute_loss_and_grads(net, batch, net.clone(), RewardConfig())
    assert loss == pytest.approx(0.0)
    assert np.allclose(grads["beta_raw"], 0.0)


def test_full_loss_gradcheck_all_paths():
    rng = np.random.default_rng(17)
    reward_cfg = RewardConfig()
    # small rewards keep finite differences noise-free
    batch = []
    for b in range(4):
        n = int(rng.integers(2, 5))
        ids = rng.choice(20, size=n, replace=False)
        rd = rng.permutation(n) + 1
        rp = rng.permutation(n) + 1
        state = StateFeatures(tuple(rng.random(3)),
                              tuple(int(v) for v in rng.integers(0, 2, size=b % 3)),
                              tuple((int(i), int(d), int(p)) for i, d, p in zip(ids, rd, rp)))
        n2 = int(rng.integers(2, 4))
        ids2 = rng.choice(20, size=n2, replace=False)
        nxt = StateFeatures(tuple(rng.random(3)),
                            tuple(int(v) for v in rng.integers(0, 2, size=2)),
                            tuple((int(i), int(d), int(p)) for i, d, p in
                                  zip(ids2, rng.permutation(n2) + 1, rng.permutation(n2) + 1)))
        terminal = b % 2 == 0
        batch.append(Transition(state, int(ids[0]), float(rng.normal()),
                                None if terminal else nxt, terminal))

    for point in range(5):
        net = GoalWeightNet(gru_hidden=4, mlp_hidden=5, seed=100 + point)
        target = net.clone()
        x0 = net.flatten()
        loss, grads = tmod.compute_loss_and_grads(net, batch, target, reward_cfg)
        ga = np.concatenate([grads[k].ravel() for k in net.param_names()])

        def f(flat):
            net.unflatten(flat)
            l, _ = tmod.compute_loss_and_grads(net, batch, target, reward_cfg)
            return l

        gf = np.zeros_like(x0)
        h = 1e-5
        for i in range(len(x0)):
            xp = x0.copy(); xp[i] += h
            xm = x0.copy(); xm[i] -= h
            gf[i] = (f(xp) - f(xm)) / (2 * h)
        net.unflatten(x0)
        rel = np.abs(ga - gf) / np.maximum(np.maximum(np.abs(ga), np.abs(gf)), 1e-4)
        assert rel.max() < 1e-4

    # scalar-blend path
    sb = ScalarBlend(init_raw=0.3)
    loss, grads = tmod.compute_loss_and_grads(sb, batch, sb.clone(), reward_cfg)
    x0 = sb.flatten()

    def fsb(flat):
        sb.unflatten(flat)
        l, _ = tmod.compute_loss_and_grads(sb, batch, ScalarBlend(init_raw=0.3), reward_cfg)
        return l

    h = 1e-5
    gf = (fsb(x0 + h) - fsb(x0 - h)) / (2 * h)
    sb.unflatten(x0)
    rel = abs(grads["beta_raw"][0] - gf) / max(abs(gf), abs(grads["beta_raw"][0]), 1e-4)
    assert rel < 1e-4


def test_train_step_noop_until_batch_full():
    tr = tmod.Trainer("scalar_blend", tmod.TrainConfig(batch_size=8, memory_capacity=16))
    assert tr.train_step(np.random.default_rng(0)) is None


def test_run_episode_adjacent_goal_success(small_world, small_table):
    g = small_world["graph"]
    start = 0
    goal = g.adjacency[0][0]
    prof = simulator.sample_profile(small_table, 1.0, seed=3)
    rec, trans = run_episode(g, small_table, Policy("greedy_goal"), prof, (start, goal),
                             rng=np.random.default_rng(0), collect=True)
    assert rec.outcome == "success"
    assert rec.turn_count == 1
    assert trans[0].terminal
    assert trans[0].reward >= 20.0 - 100.0  # includes the +20 bonus


def test_run_episode_quit_reward(small_world, small_table):
    g = small_world["graph"]
    prof = simulator.sample_profile(small_table, 1.0, seed=5)
    prof.preferences[:] = 0.0  # everything is hated: immediate quit
    pair = small_world["train_pairs"][0]
    rec, trans = run_episode(g, small_table, Policy("greedy_goal"), prof, pair,
                             rng=np.random.default_rng(0), collect=True)
    assert rec.outcome == "quit"
    assert rec.turn_count == 1
    assert trans[-1].terminal
    # reward carries the strongly negative quit bonus
    assert trans[-1].reward <= -10.0 + 100.0 * 1.0


def test_run_episode_timeout(small_world, small_table):
    g = small_world["graph"]
    prof = simulator.sample_profile(small_table, 1.0, seed=6)
    prof.preferences[:] = 0.55  # always cooperative, never quits
    # unreachable goal keeps the episode running to the turn limit
    far = next(p for p in small_world["train_pairs"])
    pol = Policy("greedy_pref")
    rec, trans = run_episode(g, small_table, pol, prof, far,
                             rng=np.random.default_rng(1), collect=True,
                             env_cfg=EnvConfig(max_turns=6))
    if rec.outcome == "timeout":
        assert rec.turn_count == 6
        assert trans[-1].terminal


def test_transitions_chain_and_actions_in_candidates(small_world, small_table):
    g = small_world["graph"]
    prof = simulator.sample_profile(small_table, 1.0, seed=8)
    pair = small_world["train_pairs"][1]
    rec, trans = run_episode(g, small_table, Policy("greedy_pref"), prof, pair,
                             rng=np.random.default_rng(2), collect=True)
    assert len(trans) == rec.turn_count
    for tr in trans:
        assert any(t == tr.action for t, _, _ in tr.state.cand_ranks)
    for a, b in zip(trans, trans[1:]):
        assert not a.terminal
        assert a.next_state == b.state
    assert trans[-1].terminal


def test_train_epochs_zero_checkpoint_equals_init(small_world, small_table):
    g = small_world["graph"]
    cfg = tmod.TrainConfig(epochs=0, seed=4)
    tr, curve = tmod.train("goal_weight", g, small_table, small_world["train_pairs"],
                           cfg=cfg)
    init = GoalWeightNet(seed=4)
    for k in init.param_names():
        assert np.array_equal(tr.net.params[k], init.params[k])
    assert curve == []


def test_train_deterministic(small_world, small_table):
    g = small_world["graph"]
    cfg = tmod.TrainConfig(epochs=1, learning_rate=1e-3, batch_size=8,
                           memory_capacity=64, seed=9)
    runs = []
    for _ in range(2):
        tr, curve = tmod.train("goal_weight", g, small_table,
                               small_world["train_pairs"][:6], cfg=cfg)
        runs.append((tr.net.flatten(), curve))
    assert np.array_equal(runs[0][0], runs[1][0])
    for ra, rb in zip(runs[0][1], runs[1][1]):
        assert ra["epoch"] == rb["epoch"]
        assert ra["loss"] == rb["loss"]
        assert ra["mean_reward"] == rb["mean_reward"]


def test_train_config_validation():
    with pytest.raises(ConfigError):
        tmod.TrainConfig(epsilon=1.5)
    with pytest.raises(ConfigError):
        tmod.TrainConfig(batch_size=100, memory_capacity=50)
    with pytest.raises(ConfigError):
        tmod.Trainer("random")
