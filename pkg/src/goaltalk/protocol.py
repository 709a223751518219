"""Evaluation protocol: multi-round paired-seed runs, tolerance sweeps,
factor ablations, and factor/goal-weight correlation extraction."""

import json
from dataclasses import dataclass, field

import numpy as np

from goaltalk import metrics, simulator, trainer as trainer_mod
from goaltalk.distance import DistanceCache
from goaltalk.env import EnvConfig, RewardConfig, run_episode
from goaltalk.errors import ConfigError, UndefinedMetricError
from goaltalk.records import record_from_dict


@dataclass
class ProtocolResult:
    policy_name: str
    tolerance: object            # float or "mixed"
    rounds: int
    result: metrics.RoundResultSet
    records: list = field(default_factory=list)
    gw_values: list = field(default_factory=list)

    @property
    def mean_gw(self):
        return float(np.mean(self.gw_values)) if self.gw_values else float("nan")

    @property
    def sd_gw(self):
        return float(np.std(self.gw_values)) if self.gw_values else float("nan")

    def tsv_row(self):
        r = self.result
        return "\t".join([
            self.policy_name, str(self.tolerance), str(self.rounds),
            repr(r.reported.gcr), repr(r.sd.gcr), repr(r.reported.us), repr(r.sd.us),
            repr(self.mean_gw), repr(self.sd_gw),
        ])


RESULTS_HEADER = "policy\ttolerance\trounds\tgcr\tgcr_sd\tus\tus_sd\tmean_gw\tsd_gw"


def run_protocol(pol, policy_name, graph, embeddings, pairs, tolerance, rounds=100,
                 seed=0, reward_cfg=None, env_cfg=None, sim_cfg=None, keep_records=True):
    """Evaluate a policy: one episode per pair per round, epsilon = 0.

    Profile seeds depend only on (seed, round, pair index), so different
    policies evaluated with the same seed meet identical users.
    """
    if not pairs:
        raise ConfigError("evaluation needs a non-empty pair set")
    reward_cfg = reward_cfg or RewardConfig()
    env_cfg = env_cfg or EnvConfig()
    sim_cfg = sim_cfg or simulator.SimulatorConfig()
    dist_cache = DistanceCache()

    round_pairs = []
    all_records = []
    gw_values = []
    for rnd in range(1, rounds + 1):
        round_records = []
        for pair_index, pair in enumerate(pairs):
            prof_seed, episode_seed = trainer_mod.profile_seed_for(seed, rnd, pair_index)
            profile = trainer_mod.make_profile(embeddings, tolerance, prof_seed, sim_cfg)
            rng = np.random.default_rng(episode_seed)
            record, _ = run_episode(graph, embeddings, pol, profile, pair,
                                    reward_cfg, env_cfg, sim_cfg, rng,
                                    collect=False, explore_epsilon=0.0,
                                    dist_cache=dist_cache)
            round_records.append(record)
            for turn in record.turns:
                if turn.gw is not None:
                    gw_values.append(turn.gw)
        round_pairs.append(metrics.MetricPair(
            metrics.gcr(round_records, reward_cfg.lambda_decay),
            metrics.us_metric(round_records)))
        if keep_records:
            all_records.extend(round_records)
    return ProtocolResult(policy_name, tolerance, rounds,
                          metrics.pareto_report(round_pairs), all_records, gw_values)


def tolerance_sweep(pol, policy_name, graph, embeddings, pairs, k_values, rounds=100,
                    seed=0, **kw):
    """Per-tolerance protocol runs plus goal-weight statistics."""
    rows = []
    for k in k_values:
        res = run_protocol(pol, policy_name, graph, embeddings, pairs, k, rounds,
                           seed=seed, **kw)
        rows.append({
            "k": k,
            "gcr": res.result.reported.gcr,
            "us": res.result.reported.us,
            "mean_gw": res.mean_gw,
            "sd_gw": res.sd_gw,
            "result": res,
        })
    return rows


SWEEP_HEADER = "k\tgcr\tus\tmean_gw\tsd_gw"


def sweep_tsv_rows(rows):
    return [
        "\t".join([repr(float(r["k"])), repr(r["gcr"]), repr(r["us"]),
                   repr(r["mean_gw"]), repr(r["sd_gw"])])
        for r in rows
    ]


def ablate_factors(kind, disable, graph, embeddings, train_pairs, test_pairs,
                   tolerance="mixed", train_cfg=None, rounds=5, eval_seed=0, **kw):
    """Train with factors replaced by a constant at the MLP input, train the
    unablated twin on identical seeds, and evaluate both on paired seeds.

    Returns {"full": ProtocolResult, "ablated": ProtocolResult}.
    """
    if not disable:
        raise ConfigError("ablation needs at least one factor to disable")
    out = {}
    for label, disabled in (("full", ()), ("ablated", tuple(disable))):
        cfg = train_cfg or trainer_mod.TrainConfig()
        trained, _ = trainer_mod.train(
            kind, graph, embeddings, train_pairs, tolerance=tolerance, cfg=cfg,
            reward_cfg=kw.get("reward_cfg"), env_cfg=kw.get("env_cfg"),
            sim_cfg=kw.get("sim_cfg"), disabled_factors=disabled)
        out[label] = run_protocol(trained.policy(), f"{kind}[{label}]", graph, embeddings,
                                  test_pairs, tolerance, rounds, seed=eval_seed,
                                  reward_cfg=kw.get("reward_cfg"), env_cfg=kw.get("env_cfg"),
                                  sim_cfg=kw.get("sim_cfg"))
    return out


def factor_correlation(records):
    """Per-factor (value, gw) pairs and Pearson coefficients from transcripts."""
    pairs = {"turn": [], "gcd": [], "eus": [], "cd": []}
    for rec in records:
        for turn in rec.turns:
            if turn.gw is None or turn.factors is None:
                continue
            pairs["turn"].append((turn.factors["turn_norm"], turn.gw))
            pairs["gcd"].append((turn.factors["gcd_norm"], turn.gw))
            pairs["eus"].append((turn.factors["eus"], turn.gw))
            if turn.cd is not None:
                pairs["cd"].append((turn.cd, turn.gw))
    result = {}
    for name, pts in pairs.items():
        if len(pts) < 3:
            raise UndefinedMetricError(f"factor {name}: fewer than 3 (value, gw) pairs")
        xs = [a for a, _ in pts]
        ys = [b for _, b in pts]
        r, degenerate = metrics.pearson(xs, ys)
        result[name] = {"pairs": pts, "pearson": r, "degenerate": degenerate}
    return result


CORRELATION_HEADER = "factor\tvalue\tgw"


def correlation_tsv_rows(correlations):
    rows = []
    for name in ("turn", "gcd", "eus", "cd"):
        for value, gw in correlations[name]["pairs"]:
            rows.append(f"{name}\t{value!r}\t{gw!r}")
    return rows


def write_transcripts(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec.to_dict(), sort_keys=True) + "\n")


def read_transcripts(path):
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(record_from_dict(json.loads(line)))
    return records
