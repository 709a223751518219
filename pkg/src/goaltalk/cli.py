"""Command-line surface: gen-world, embed, train, eval, ablate, sweep,
serve, play.

Every command resolves its config as preset < config file < flags, logs
the result into its output directory, and exits 0 on success, 1 on config
errors, 2 on data errors, 3 on runtime failures.
"""

import argparse
import json
import os
import sys

import numpy as np

from goaltalk import protocol, trainer as trainer_mod
from goaltalk.checkpoint import load_checkpoint, save_checkpoint
from goaltalk.config import RunConfig, preset
from goaltalk.distance import DistanceConfig
from goaltalk.embeddings import WalkParams, load_embeddings, save_embeddings, train_embeddings
from goaltalk.env import EnvConfig, RewardConfig
from goaltalk.errors import ConfigError, DataError, GoaltalkError
from goaltalk.kg import load_triples
from goaltalk.nets import FACTOR_NAMES
from goaltalk.policy import POLICY_KINDS, TRAINABLE_KINDS, Policy
from goaltalk.simulator import SimulatorConfig
from goaltalk.worldgen import SyntheticWorldSpec, load_pairs, write_world


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(1)


def _resolve_config(args):
    cfg = preset(args.preset)
    if args.config:
        try:
            with open(args.config, "r", encoding="utf-8") as fh:
                file_cfg = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        for key, value in file_cfg.items():
            if not hasattr(cfg, key):
                raise ConfigError(f"unknown config key {key!r}")
            setattr(cfg, key, value)
    for key, value in (args.set or []):
        if not hasattr(cfg, key):
            raise ConfigError(f"unknown config key {key!r}")
        current = getattr(cfg, key)
        try:
            setattr(cfg, key, type(current)(json.loads(value))
                    if not isinstance(current, str) else value)
        except (ValueError, json.JSONDecodeError):
            raise ConfigError(f"cannot parse override {key}={value!r}") from None
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    if getattr(args, "epochs", None) is not None:
        cfg.epochs = args.epochs
    if getattr(args, "lr", None) is not None:
        cfg.learning_rate = args.lr
    if getattr(args, "rounds", None) is not None:
        cfg.eval_rounds = args.rounds
    if getattr(args, "dim", None) is not None:
        cfg.embedding_dim = args.dim
    return cfg.validate()


def _log_config(cfg, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "resolved_config.json"), "w", encoding="utf-8") as fh:
        fh.write(cfg.to_json())


def _load_world(world_dir, cfg):
    triples_path = os.path.join(world_dir, "triples.tsv")
    try:
        with open(triples_path, "r", encoding="utf-8") as fh:
            graph = load_triples(fh)
    except OSError as exc:
        raise DataError(f"cannot read {triples_path}: {exc}") from None
    return graph


def _load_table(path, graph):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return load_embeddings(fh, graph)
    except OSError as exc:
        raise DataError(f"cannot read embeddings {path}: {exc}") from None


def _cfg_objects(cfg):
    reward_cfg = RewardConfig(alpha=cfg.alpha, lambda_decay=cfg.lambda_decay, gamma=cfg.gamma,
                              r_quit=cfg.r_quit, r_success=cfg.r_success, r_fail=cfg.r_fail)
    env_cfg = EnvConfig(max_turns=cfg.max_turns, ridge_beta=cfg.ridge_beta)
    sim_cfg = SimulatorConfig(q_c_star=cfg.q_c_star, q_q_star=cfg.q_q_star,
                              mention_hops=cfg.mention_hops, max_mentions=cfg.max_mentions)
    return reward_cfg, env_cfg, sim_cfg


def _policy_from_args(args):
    kind = args.policy
    if kind not in POLICY_KINDS:
        raise ConfigError(f"unknown policy {kind!r}; choose from {sorted(POLICY_KINDS)}")
    if kind in TRAINABLE_KINDS:
        if not args.checkpoint:
            raise ConfigError(f"policy {kind!r} requires --checkpoint")
        loaded_kind, net, _ = load_checkpoint(args.checkpoint)
        if loaded_kind != kind:
            raise ConfigError(f"checkpoint holds {loaded_kind!r}, not {kind!r}")
        return Policy(kind, net)
    return Policy(kind)


def _parse_tolerance(token):
    if token == "mixed":
        return "mixed"
    try:
        value = float(token)
    except ValueError:
        raise ConfigError(f"tolerance must be a number or 'mixed', got {token!r}") from None
    if value <= 0:
        raise ConfigError(f"tolerance must be positive, got {value}")
    return value


# -- commands --------------------------------------------------------------------


def cmd_gen_world(args):
    cfg = _resolve_config(args)
    spec = SyntheticWorldSpec(
        node_count=args.nodes or cfg.world_nodes,
        edges_per_node=args.edges_per_node or cfg.world_edges_per_node,
        seed=cfg.seed,
        pair_count=args.pairs or cfg.world_pairs,
        min_pair_distance=cfg.world_min_pair_distance,
        max_pair_distance=cfg.world_max_pair_distance,
    )
    paths = write_world(spec, args.out)
    _log_config(cfg, args.out)
    print(f"world written: {paths['triples']} "
          f"({spec.node_count} nodes, {spec.pair_count} pairs)")
    return 0


def cmd_embed(args):
    cfg = _resolve_config(args)
    graph = _load_world(args.world, cfg)
    params = WalkParams(walks_per_node=cfg.walks_per_node, walk_length=cfg.walk_length,
                        window=cfg.window, negatives=cfg.negatives,
                        learning_rate=cfg.walk_learning_rate, epochs=cfg.walk_epochs,
                        seed=cfg.seed)
    table = train_embeddings(graph, cfg.embedding_dim, params)
    save_embeddings(table, args.out)
    _log_config(cfg, os.path.dirname(os.path.abspath(args.out)) or ".")
    print(f"embeddings written: {args.out} ({table.rows.shape[0]}x{table.rows.shape[1]})")
    return 0


def _probe_fn(graph, table, probe_pairs, tolerance, cfg, cfgs):
    reward_cfg, env_cfg, sim_cfg = cfgs

    def probe(pol):
        res = protocol.run_protocol(pol, "probe", graph, table, probe_pairs, tolerance,
                                    rounds=1, seed=cfg.seed + 7777,
                                    reward_cfg=reward_cfg, env_cfg=env_cfg, sim_cfg=sim_cfg,
                                    keep_records=False)
        return res.result.reported.gcr, res.result.reported.us
    return probe


def cmd_train(args):
    cfg = _resolve_config(args)
    graph = _load_world(args.world, cfg)
    table = _load_table(args.embeddings, graph)
    train_pairs = load_pairs(os.path.join(args.world, "pairs_train.tsv"), graph)
    probe_path = os.path.join(args.world, "pairs_test.tsv")
    probe_pairs = load_pairs(probe_path, graph) if os.path.exists(probe_path) else None
    if args.policy not in TRAINABLE_KINDS:
        raise ConfigError(f"--policy must be one of {sorted(TRAINABLE_KINDS)}")
    tolerance = _parse_tolerance(args.tolerance)
    disabled = _parse_disable(args.disable)

    cfgs = _cfg_objects(cfg)
    reward_cfg, env_cfg, sim_cfg = cfgs
    train_cfg = trainer_mod.TrainConfig(
        epsilon=cfg.epsilon, learning_rate=cfg.learning_rate, batch_size=cfg.batch_size,
        epochs=cfg.epochs, memory_capacity=cfg.memory_capacity,
        target_sync_interval=cfg.target_sync_interval, seed=cfg.seed)

    os.makedirs(args.out, exist_ok=True)
    _log_config(cfg, args.out)
    log_path = os.path.join(args.out, "train_log.tsv")
    with open(log_path, "w", encoding="utf-8") as log:
        log.write("epoch\tloss\tmean_reward\tprobe_gcr\tprobe_us\n")

        def log_fn(row):
            log.write(f"{row['epoch']}\t{row['loss']!r}\t{row['mean_reward']!r}"
                      f"\t{row['probe_gcr']!r}\t{row['probe_us']!r}\n")
            print(f"epoch {row['epoch']:>3}  loss {row['loss']:.4f}  "
                  f"reward {row['mean_reward']:+.3f}  probe gcr {row['probe_gcr']:.4f} "
                  f"us {row['probe_us']:.4f}")

        probe = (_probe_fn(graph, table, probe_pairs, tolerance, cfg, cfgs)
                 if probe_pairs else None)
        trained, _ = trainer_mod.train(
            args.policy, graph, table, train_pairs, tolerance=tolerance,
            cfg=train_cfg, reward_cfg=reward_cfg, env_cfg=env_cfg, sim_cfg=sim_cfg,
            probe_fn=probe, log_fn=log_fn, disabled_factors=disabled)

    ckpt_path = os.path.join(args.out, "checkpoint.json")
    save_checkpoint(ckpt_path, args.policy, trained.net, trained.updates)
    print(f"checkpoint written: {ckpt_path}")
    return 0


def cmd_eval(args):
    cfg = _resolve_config(args)
    graph = _load_world(args.world, cfg)
    table = _load_table(args.embeddings, graph)
    pairs = load_pairs(os.path.join(args.world, args.pairs_file), graph)
    pol = _policy_from_args(args)
    reward_cfg, env_cfg, sim_cfg = _cfg_objects(cfg)
    tolerances = [_parse_tolerance(tok) for tok in args.tolerance.split(",") if tok]

    os.makedirs(args.out, exist_ok=True)
    _log_config(cfg, args.out)
    results_path = os.path.join(args.out, "results.tsv")
    with open(results_path, "w", encoding="utf-8") as fh:
        fh.write(protocol.RESULTS_HEADER + "\n")
        for tol in tolerances:
            res = protocol.run_protocol(pol, args.policy, graph, table, pairs, tol,
                                        rounds=cfg.eval_rounds, seed=cfg.seed,
                                        reward_cfg=reward_cfg, env_cfg=env_cfg,
                                        sim_cfg=sim_cfg)
            fh.write(res.tsv_row() + "\n")
            tag = str(tol).replace(".", "_")
            protocol.write_transcripts(res.records,
                                       os.path.join(args.out, f"transcripts_{tag}.jsonl"))
            if args.policy == "goal_weight":  # factor/goal-weight pairs for plotting
                corr = protocol.factor_correlation(res.records)
                with open(os.path.join(args.out, f"correlations_{tag}.tsv"), "w",
                          encoding="utf-8") as cf:
                    cf.write(protocol.CORRELATION_HEADER + "\n")
                    for line in protocol.correlation_tsv_rows(corr):
                        cf.write(line + "\n")
                    summary = {k: round(v["pearson"], 6) for k, v in corr.items()}
                print(f"{args.policy} k={tol}: factor correlations {summary}")
            print(f"{args.policy} k={tol}: gcr {res.result.reported.gcr:.4f} "
                  f"us {res.result.reported.us:.4f}")
    print(f"results written: {results_path}")
    return 0


def cmd_sweep(args):
    cfg = _resolve_config(args)
    graph = _load_world(args.world, cfg)
    table = _load_table(args.embeddings, graph)
    pairs = load_pairs(os.path.join(args.world, args.pairs_file), graph)
    pol = _policy_from_args(args)
    reward_cfg, env_cfg, sim_cfg = _cfg_objects(cfg)
    k_values = [float(tok) for tok in args.k_values.split(",") if tok]
    if not k_values:
        raise ConfigError("--k-values must name at least one tolerance")

    rows = protocol.tolerance_sweep(pol, args.policy, graph, table, pairs, k_values,
                                    rounds=cfg.eval_rounds, seed=cfg.seed,
                                    reward_cfg=reward_cfg, env_cfg=env_cfg, sim_cfg=sim_cfg)
    os.makedirs(args.out, exist_ok=True)
    _log_config(cfg, args.out)
    sweep_path = os.path.join(args.out, "sweep.tsv")
    with open(sweep_path, "w", encoding="utf-8") as fh:
        fh.write(protocol.SWEEP_HEADER + "\n")
        for line in protocol.sweep_tsv_rows(rows):
            fh.write(line + "\n")
    for r in rows:
        print(f"k={r['k']}: gcr {r['gcr']:.4f} us {r['us']:.4f} "
              f"gw {r['mean_gw']:.3f}+/-{r['sd_gw']:.3f}")
    print(f"sweep written: {sweep_path}")
    return 0


def _parse_disable(raw):
    if not raw:
        return ()
    names = tuple(tok.strip() for tok in raw.split(",") if tok.strip())
    for name in names:
        if name not in FACTOR_NAMES:
            raise ConfigError(f"unknown factor {name!r}; choose from {FACTOR_NAMES}")
    return names


def cmd_ablate(args):
    cfg = _resolve_config(args)
    graph = _load_world(args.world, cfg)
    table = _load_table(args.embeddings, graph)
    train_pairs = load_pairs(os.path.join(args.world, "pairs_train.tsv"), graph)
    test_pairs = load_pairs(os.path.join(args.world, "pairs_test.tsv"), graph)
    disable = _parse_disable(args.disable)
    if not disable:
        raise ConfigError("--disable must name at least one factor")
    tolerance = _parse_tolerance(args.tolerance)
    reward_cfg, env_cfg, sim_cfg = _cfg_objects(cfg)
    train_cfg = trainer_mod.TrainConfig(
        epsilon=cfg.epsilon, learning_rate=cfg.learning_rate, batch_size=cfg.batch_size,
        epochs=cfg.epochs, memory_capacity=cfg.memory_capacity,
        target_sync_interval=cfg.target_sync_interval, seed=cfg.seed)

    out = protocol.ablate_factors("goal_weight", disable, graph, table, train_pairs,
                                  test_pairs, tolerance=tolerance, train_cfg=train_cfg,
                                  rounds=cfg.eval_rounds, eval_seed=cfg.seed,
                                  reward_cfg=reward_cfg, env_cfg=env_cfg, sim_cfg=sim_cfg)
    os.makedirs(args.out, exist_ok=True)
    _log_config(cfg, args.out)
    path = os.path.join(args.out, "ablation.tsv")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("variant\tdisabled\tgcr\tus\n")
        for label, res in out.items():
            disabled = ",".join(disable) if label == "ablated" else "-"
            fh.write(f"{label}\t{disabled}\t{res.result.reported.gcr!r}"
                     f"\t{res.result.reported.us!r}\n")
            print(f"{label:>8}: gcr {res.result.reported.gcr:.4f} "
                  f"us {res.result.reported.us:.4f}")
    print(f"ablation written: {path}")
    return 0


def _build_service(args, cfg):
    from goaltalk.service import SessionService

    graph = _load_world(args.world, cfg)
    table = _load_table(args.embeddings, graph)
    _, env_cfg, _ = _cfg_objects(cfg)
    dist_cfg = DistanceConfig(limit_D=cfg.distance_limit, d_max=cfg.d_max)
    defaults = {}
    if args.checkpoint:
        kind, net, _ = load_checkpoint(args.checkpoint)
        defaults[kind] = Policy(kind, net)
    return SessionService(graph, table, env_cfg, dist_cfg, defaults,
                          transcript_path=args.transcripts)


def cmd_serve(args):
    from goaltalk.service import make_server

    cfg = _resolve_config(args)
    service = _build_service(args, cfg)
    server = make_server(service, args.host, args.port)
    host, port = server.server_address[:2]
    print(f"session service listening on http://{host}:{port}/api/ "
          f"({service.graph.n_topics} topics)")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        server.shutdown()
    return 0


def cmd_play(args):
    cfg = _resolve_config(args)
    service = _build_service(args, cfg)
    body = {"start": args.start, "goal": args.goal, "policy": args.policy}
    if args.checkpoint:
        body["checkpoint"] = args.checkpoint
    try:
        session = service.create_session(body)
    except GoaltalkError as exc:
        raise ConfigError(str(exc)) from None
    print(f"session {session.id}: lead from {args.start!r} toward {args.goal!r} "
          f"(policy {args.policy}); you are the user")
    print("reply with: c [pref] | t label=pref[,label=pref...] | q")
    while session.status == "active":
        view = session.view()
        diag = view["diagnostics"][-1]
        gw = diag["gw"]
        print(f"\n[turn {diag['turn']}/{view['turn_limit']}] agent proposes: "
              f"{view['pending_topic']}  "
              f"(gw {gw if gw is None else round(gw, 3)}, "
              f"est dist {diag['est_distance_to_goal']}, eus {round(diag['est_satisfaction'], 3)})")
        line = input("you> ").strip()
        try:
            if line.startswith("c"):
                rest = line[1:].strip()
                req = {"mode": "cooperative"}
                if rest:
                    req["preference"] = float(rest)
            elif line.startswith("t"):
                mentions = []
                for tok in line[1:].strip().split(","):
                    label, _, pref = tok.partition("=")
                    mentions.append({"label": label.strip(),
                                     "preference": float(pref) if pref else 0.5})
                req = {"mode": "topics", "mentions": mentions}
            elif line.startswith("q"):
                req = {"mode": "quit"}
            else:
                print("unrecognized input; use c | t | q")
                continue
            session.respond(req)
        except GoaltalkError as exc:
            print(f"rejected: {exc}")
        except ValueError as exc:
            print(f"bad input: {exc}")
    print(f"\nsession over: {session.status} after {len(session.view()['turns'])} turns")
    return 0


# -- wiring ----------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="goaltalk",
                     description="desk-scale lab for goal-directed topic dialogue policies")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, out_required=True):
        p.add_argument("--config", help="flat JSON config file")
        p.add_argument("--preset", default="desk", choices=["desk", "paper"])
        p.add_argument("--seed", type=int)
        p.add_argument("--set", nargs="*", metavar="KEY=VALUE", type=_kv,
                       help="override any config key")
        if out_required:
            p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("gen-world", help="generate a synthetic world")
    common(p)
    p.add_argument("--nodes", type=int)
    p.add_argument("--edges-per-node", type=int)
    p.add_argument("--pairs", type=int)
    p.set_defaults(func=cmd_gen_world)

    p = sub.add_parser("embed", help="train topic embeddings for a world")
    common(p, out_required=False)
    p.add_argument("--world", required=True)
    p.add_argument("--out", required=True, help="output embeddings TSV")
    p.add_argument("--dim", type=int)
    p.set_defaults(func=cmd_embed)

    p = sub.add_parser("train", help="train a goal-weight or scalar-blend policy")
    common(p)
    p.add_argument("--world", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--policy", default="goal_weight")
    p.add_argument("--tolerance", default="mixed")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--disable", help="comma list of factors to hold constant")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="run the evaluation protocol")
    common(p)
    p.add_argument("--world", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--policy", required=True)
    p.add_argument("--checkpoint")
    p.add_argument("--tolerance", default="0.8,1.0,1.2,mixed")
    p.add_argument("--rounds", type=int)
    p.add_argument("--pairs-file", default="pairs_test.tsv")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("sweep", help="tolerance sweep with goal-weight statistics")
    common(p)
    p.add_argument("--world", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--policy", default="goal_weight")
    p.add_argument("--checkpoint")
    p.add_argument("--k-values", default="0.4,0.6,0.8,1.0,1.2,1.4,1.6")
    p.add_argument("--rounds", type=int)
    p.add_argument("--pairs-file", default="pairs_test.tsv")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("ablate", help="train/eval with factors disabled vs the full model")
    common(p)
    p.add_argument("--world", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--disable", required=True)
    p.add_argument("--tolerance", default="mixed")
    p.add_argument("--epochs", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--rounds", type=int)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("serve", help="start the HTTP session service")
    common(p, out_required=False)
    p.add_argument("--world", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--checkpoint", help="default checkpoint for trainable policies")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8023)
    p.add_argument("--transcripts", help="append ended sessions to this JSONL file")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("play", help="interactive terminal session (you are the user)")
    common(p, out_required=False)
    p.add_argument("--world", required=True)
    p.add_argument("--embeddings", required=True)
    p.add_argument("--start", required=True)
    p.add_argument("--goal", required=True)
    p.add_argument("--policy", default="greedy_goal")
    p.add_argument("--checkpoint")
    p.add_argument("--transcripts")
    p.set_defaults(func=cmd_play)

    return parser


def _kv(token):
    key, sep, value = token.partition("=")
    if not sep:
        raise argparse.ArgumentTypeError(f"expected KEY=VALUE, got {token!r}")
    return key, value


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return args.func(args)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 1
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except GoaltalkError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except KeyboardInterrupt:
        return 3


if __name__ == "__main__":
    sys.exit(main())
