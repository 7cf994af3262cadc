"""Command-line entry point.

Subcommands: campaign (dataset generation), fit-norm (normalizer fitting),
train (dqn offline / ppo against the simulator), evaluate (one policy or
checkpoint), compare (trade-off table + CDF CSVs). Exit codes: 0 ok,
1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import dataclasses
import os
import sys

from . import SCHEMA_VERSIONS, __version__
from .campaign import (
    CampaignSpec,
    load_manifest,
    load_transitions,
    manifest_seeds,
    run_campaign,
    iter_reports,
)
from .config import ScenarioConfig
from .drl.checkpoint import load_checkpoint, save_checkpoint
from .drl.common import TrainConfig
from .drl.dqn import dqn_train_offline
from .drl.env import SimulatorEnv
from .drl.policy import CheckpointPolicy
from .drl.ppo import ppo_train
from .evaluate import (
    baseline_factory,
    checkpoint_factory,
    eval_seeds,
    evaluate,
    write_compare_outputs,
)
from .reward import NormalizerSet, fit_normalizers, get_weights


def _add_scenario_args(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("scenario overrides")
    group.add_argument("--scenario", metavar="FILE", help="scenario YAML file")
    kinds = {"int": int, "float": float, "str": str, int: int, float: float, str: str}
    for f in dataclasses.fields(ScenarioConfig):
        if f.name == "seed":
            continue  # per-run seeds come from the seed-base flags
        flag = "--" + f.name.replace("_", "-")
        group.add_argument(flag, type=kinds[f.type], default=None, help=f"override {f.name}")


def _scenario_from_args(args) -> ScenarioConfig:
    cfg = ScenarioConfig.from_yaml(args.scenario) if args.scenario else ScenarioConfig()
    overrides = {}
    for f in dataclasses.fields(ScenarioConfig):
        if f.name == "seed":
            continue
        value = getattr(args, f.name, None)
        if value is not None:
            overrides[f.name] = value
    return cfg.replace(**overrides) if overrides else cfg


def _split_policy_list(text: str) -> list[str]:
    """Split a comma-separated policy list, keeping heuristic params intact."""
    out: list[str] = []
    for token in text.split(","):
        if (
            out
            and out[-1].split(":")[0] in ("static", "dynamic")
            and ":" in out[-1]
            and out[-1].count(",") < 2
            and token.strip().isdigit()
        ):
            out[-1] += "," + token
        else:
            out.append(token.strip())
    return [t for t in out if t]


def _int_list(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def cmd_campaign(args) -> int:
    spec = CampaignSpec.from_yaml(args.spec) if args.spec else CampaignSpec()
    if args.runs_per_combo is not None:
        spec.runs_per_combo = args.runs_per_combo
    if args.seed_base is not None:
        spec.seed_base = args.seed_base
    if args.policies:
        spec.policies = _split_policy_list(args.policies)
    if args.placements:
        spec.placements = [p.strip() for p in args.placements.split(",") if p.strip()]
    if args.scenario:
        spec.scenario = ScenarioConfig.from_yaml(args.scenario)
    overrides = {
        f.name: getattr(args, f.name)
        for f in dataclasses.fields(ScenarioConfig)
        if f.name != "seed" and getattr(args, f.name, None) is not None
    }
    if overrides:
        spec.scenario = spec.scenario.replace(**overrides)
    manifest = run_campaign(spec, args.out, workers=args.workers)
    failed = [r["run_id"] for r in manifest["runs"] if r.get("status") != "ok"]
    ok = len(manifest["runs"]) - len(failed)
    print(f"campaign: {ok}/{len(manifest['runs'])} runs ok -> {args.out}/manifest.json")
    if failed:
        print(f"campaign: failed runs: {', '.join(failed)}", file=sys.stderr)
        return 1
    return 0


def cmd_fit_norm(args) -> int:
    manifest = load_manifest(args.manifest)
    base_dir = os.path.dirname(os.path.abspath(args.manifest))
    norms = fit_normalizers(iter_reports(manifest, base_dir), n_quantiles=args.quantiles)
    digest = norms.save(args.out)
    print(f"fit-norm: wrote {args.out} (hash {digest[:12]}...)")
    return 0


def _train_config_from_args(args) -> TrainConfig:
    cfg = TrainConfig()
    for name in ("max_timesteps", "eval_every", "eval_episodes", "batch_size",
                 "learning_rate", "cql_alpha", "rem_heads", "rollout_steps",
                 "entropy_coef", "seed"):
        value = getattr(args, name, None)
        if value is not None:
            setattr(cfg, name, value)
    if args.trunk is not None:
        cfg.trunk = _int_list(args.trunk)
    if args.no_conv:
        cfg.conv_filters = 0
    return cfg


def cmd_train(args) -> int:
    weights = get_weights(args.weights)
    norms = NormalizerSet.load(args.norm)
    cfg = _train_config_from_args(args)
    scenario = _scenario_from_args(args)

    if args.algo == "dqn":
        transitions = load_transitions(args.corpus, weights, norms,
                                       shuffle_seed=cfg.seed)
        eval_fn = None
        if args.eval_seed_base is not None:
            env = SimulatorEnv(scenario, weights, norms,
                               train_seed_base=0, eval_seed_base=args.eval_seed_base)

            def eval_fn(net):
                total = 0.0
                for ep in range(cfg.eval_episodes):
                    state = env.reset(eval_episode=ep)
                    done = False
                    while not done:
                        state, reward, done = env.step(net.greedy(state))
                        total += reward
                return total / cfg.eval_episodes

        model, history = dqn_train_offline(transitions, cfg, eval_fn=eval_fn)
    else:
        if args.train_seed_base is None or args.eval_seed_base is None:
            print("train: ppo requires --train-seed-base and --eval-seed-base",
                  file=sys.stderr)
            return 2
        env = SimulatorEnv(scenario, weights, norms,
                           train_seed_base=args.train_seed_base,
                           eval_seed_base=args.eval_seed_base)
        hidden = _int_list(args.hidden) if args.hidden else None
        model, history = ppo_train(env, cfg, hidden=hidden)

    save_checkpoint(args.out, model, weights.name, weights.quantile_kind,
                    norms.content_hash(), cfg)
    evals = history.get("eval_returns") or []
    tail = f", last eval return {evals[-1]:.4f}" if evals else ""
    print(f"train: wrote {args.out} ({args.algo}, weights {weights.name}{tail})")
    return 0


def _policy_entries(args, norms: NormalizerSet | None):
    entries = []
    for spec in _split_policy_list(args.policies or ""):
        entries.append((spec, baseline_factory(spec)))
    for path in (args.checkpoints.split(",") if args.checkpoints else []):
        ckpt = load_checkpoint(path.strip())
        if norms is None:
            raise ValueError("--norm is required to evaluate checkpoints")
        policy = CheckpointPolicy(ckpt, norms)
        entries.append((policy.name, checkpoint_factory(policy)))
    return entries


def _training_seeds(args) -> set[int] | None:
    if getattr(args, "train_manifest", None):
        return manifest_seeds(load_manifest(args.train_manifest))
    return None


def cmd_evaluate(args) -> int:
    norms = NormalizerSet.load(args.norm) if args.norm else None
    entries = _policy_entries(args, norms)
    if len(entries) != 1:
        print("evaluate: provide exactly one --policies entry or one --checkpoints path",
              file=sys.stderr)
        return 2
    scenario = _scenario_from_args(args)
    seeds = eval_seeds(args.seed_base, args.runs)
    name, factory = entries[0]
    result = evaluate(name, factory, scenario, seeds, training_seeds=_training_seeds(args))
    print(f"evaluate: {name}: throughput {result.throughput_pct:.1f}% "
          f"energy {result.energy_pct:.1f}% of always-on over {args.runs} runs "
          f"(seeds {seeds[0]}..{seeds[-1]})")
    if args.out:
        write_compare_outputs([result], args.out)
        print(f"evaluate: wrote {args.out}/tradeoff.csv")
    return 0


def cmd_compare(args) -> int:
    norms = NormalizerSet.load(args.norm) if args.norm else None
    entries = _policy_entries(args, norms)
    if not entries:
        print("compare: no policies given", file=sys.stderr)
        return 2
    scenario = _scenario_from_args(args)
    seeds = eval_seeds(args.seed_base, args.runs)
    training_seeds = _training_seeds(args)

    reference = evaluate("always-on", baseline_factory("always-on"), scenario, seeds,
                         training_seeds=training_seeds)
    results = [reference]
    for name, factory in entries:
        if name == "always-on":
            continue
        results.append(
            evaluate(name, factory, scenario, seeds,
                     training_seeds=training_seeds, reference=reference)
        )
    table = write_compare_outputs(results, args.out)
    for r in results:
        print(f"compare: {r.name}: throughput {r.throughput_pct:.1f}% "
              f"energy {r.energy_pct:.1f}%")
    print(f"compare: wrote {table}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ranes",
        description="Cell sleep-mode control lab: simulate, train, evaluate.",
    )
    parser.add_argument(
        "--version", action="version",
        version=f"ranes {__version__} (schemas: "
                + ", ".join(f"{k}={v}" for k, v in sorted(SCHEMA_VERSIONS.items())) + ")",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("campaign", help="generate a dataset campaign")
    p.add_argument("--spec", metavar="FILE", help="campaign YAML spec")
    p.add_argument("--out", required=True, metavar="DIR")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--runs-per-combo", type=int, default=None)
    p.add_argument("--seed-base", type=int, default=None)
    p.add_argument("--policies", default=None, help="comma-separated policy specs")
    p.add_argument("--placements", default=None, help="comma-separated placement modes")
    _add_scenario_args(p)
    p.set_defaults(func=cmd_campaign)

    p = sub.add_parser("fit-norm", help="fit normalizers on a campaign corpus")
    p.add_argument("--manifest", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="FILE")
    p.add_argument("--quantiles", type=int, default=1000)
    p.set_defaults(func=cmd_fit_norm)

    p = sub.add_parser("train", help="train a DRL agent")
    p.add_argument("--algo", choices=("dqn", "ppo"), required=True)
    p.add_argument("--weights", required=True, help="weight-set name, e.g. DQN or PPO-1")
    p.add_argument("--corpus", metavar="MANIFEST", help="training corpus (dqn)")
    p.add_argument("--norm", required=True, metavar="FILE")
    p.add_argument("--out", required=True, metavar="CKPT")
    p.add_argument("--max-timesteps", type=int, default=None, dest="max_timesteps")
    p.add_argument("--eval-every", type=int, default=None, dest="eval_every")
    p.add_argument("--eval-episodes", type=int, default=None, dest="eval_episodes")
    p.add_argument("--batch-size", type=int, default=None, dest="batch_size")
    p.add_argument("--learning-rate", type=float, default=None, dest="learning_rate")
    p.add_argument("--cql-alpha", type=float, default=None, dest="cql_alpha")
    p.add_argument("--rem-heads", type=int, default=None, dest="rem_heads")
    p.add_argument("--rollout-steps", type=int, default=None, dest="rollout_steps")
    p.add_argument("--entropy-coef", type=float, default=None, dest="entropy_coef")
    p.add_argument("--trunk", default=None, help="comma-separated trunk sizes")
    p.add_argument("--hidden", default=None, help="comma-separated ppo hidden sizes")
    p.add_argument("--no-conv", action="store_true")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--train-seed-base", type=int, default=None)
    p.add_argument("--eval-seed-base", type=int, default=None)
    _add_scenario_args(p)
    p.set_defaults(func=cmd_train)

    for name, fn in (("evaluate", cmd_evaluate), ("compare", cmd_compare)):
        p = sub.add_parser(name, help=f"{name} policies/checkpoints")
        p.add_argument("--policies", default=None, help="comma-separated policy specs")
        p.add_argument("--checkpoints", default=None, help="comma-separated checkpoint paths")
        p.add_argument("--norm", default=None, metavar="FILE")
        p.add_argument("--runs", type=int, default=5)
        p.add_argument("--seed-base", type=int, default=900000, dest="seed_base")
        p.add_argument("--train-manifest", default=None,
                       help="manifest whose seeds must not be reused")
        p.add_argument("--out", default=None if name == "evaluate" else "compare-out",
                       metavar="DIR")
        _add_scenario_args(p)
        p.set_defaults(func=fn)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BrokenPipeError:
        return 1
    except Exception as exc:  # runtime failures -> exit 1 with a message
        print(f"ranes {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
