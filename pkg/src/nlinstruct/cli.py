"""Command-line entry points.

    nlinstruct generate      random state pairs for annotation (plus a
                             test-only gold sidecar)
    nlinstruct tune          grid search over the source domains
    nlinstruct train         train a model and write it to disk
    nlinstruct eval          full experiment: tune, train, score, report
    nlinstruct parse         n-best parses for one utterance over a state
    nlinstruct significance  paired bootstrap between two reports

Exit codes: 0 success, 2 configuration error, 3 data error, 4 runtime
failure.
"""

from __future__ import annotations

import argparse
import json
import sys

from . import dataio, training
from .domains import builtin_domains, generate_state_pair, get_domain
from .errors import ConfigError, DataError, NlinstructError, ParseFailure
from .evaluation import (
    ExampleScore,
    ExperimentSpec,
    InstrumentedRegistry,
    mean_credit,
    paired_bootstrap,
    run_experiment,
)
from .parser import ParserConfig, Pipeline, predict
from .training import DomainPartition, TrainConfig, adagrad, gmdp

import os
import random


def _load_splits(path) -> dict[str, dict[str, list]]:
    """A dataset file holds one split; a directory holds train/test files."""
    by_domain: dict[str, dict[str, list]] = {}

    def absorb(examples, split):
        for ex in examples:
            by_domain.setdefault(ex.domain_id, {}).setdefault(split, []).append(ex)

    if os.path.isdir(path):
        train = os.path.join(path, "train.jsonl")
        test = os.path.join(path, "test.jsonl")
        if not os.path.exists(train):
            raise DataError(f"{path}: expected train.jsonl in dataset directory")
        absorb(dataio.read_dataset(train), "train")
        if os.path.exists(test):
            absorb(dataio.read_dataset(test), "test")
    else:
        absorb(dataio.read_dataset(path), "train")
    if not by_domain:
        raise DataError(f"{path}: dataset is empty")
    return by_domain


def _registry(config) -> InstrumentedRegistry:
    dataset = config.get("dataset")
    if not dataset:
        raise ConfigError("config needs a 'dataset' path")
    splits = _load_splits(dataset)
    domains = {d.id: d for d in builtin_domains()}
    unknown = sorted(set(splits) - set(domains))
    if unknown:
        raise DataError(f"dataset references unregistered domains: {unknown}")
    from .domains.base import validate_state_for_domain

    for domain_id, by_split in splits.items():
        for examples in by_split.values():
            for ex in examples:
                validate_state_for_domain(ex.initial, domains[domain_id])
                validate_state_for_domain(ex.desired, domains[domain_id])
    return InstrumentedRegistry(domains, splits)


def _parser_config(config) -> ParserConfig:
    return ParserConfig(
        beam_size=config["beam_size"], max_rules=config["max_rule_applications"]
    )


def _train_config(config) -> TrainConfig:
    section = dict(config.get("train", {}))
    if "domain_ordering" in section and section["domain_ordering"] is not None:
        section["domain_ordering"] = tuple(section["domain_ordering"])
    section.setdefault("seed", config["seed"])
    return TrainConfig(**section)


def _apply_flag_overrides(args, config) -> dict:
    if getattr(args, "seed", None) is not None:
        config["seed"] = args.seed
    if getattr(args, "target_domain", None):
        config["target_domain"] = args.target_domain
    if getattr(args, "algorithm", None):
        config["algorithm"] = args.algorithm
    if getattr(args, "no_new_features", False):
        config["use_new_features"] = False
    if getattr(args, "no_logic_filter", False):
        config["use_logic_filter"] = False
    if getattr(args, "in_domain", False):
        config["in_domain"] = True
    return config


def cmd_generate(args) -> int:
    domain = get_domain(args.domain)
    config = dataio.load_run_config(args.config) if args.config else dict(dataio.DEFAULTS)
    ranges = config.get("generation", {}).get(domain.id)
    rng = random.Random(args.seed)
    examples = []
    gold = []
    for method in domain.methods:
        for i in range(args.count):
            state, call, result = generate_state_pair(domain, method, rng, ranges)
            ex_id = f"{domain.id}-{method.name}-{i:04d}"
            examples.append(
                dataio.Example(ex_id, domain.id, state, "", result)
            )
            gold.append((ex_id, call, ""))
    dataio.write_dataset(args.out, examples, header={"domain": domain.id, "seed": args.seed})
    dataio.write_gold_sidecar(args.out + ".gold.jsonl", gold)
    print(f"wrote {len(examples)} state pairs to {args.out}")
    return 0


def cmd_tune(args) -> int:
    config = _apply_flag_overrides(args, dataio.load_run_config(args.config))
    target = config.get("target_domain")
    if not target:
        raise ConfigError("tune needs a target_domain")
    registry = _registry(config)
    algorithm = config["algorithm"]
    sources = [d for d in registry.domain_ids if d != target]
    pipeline = Pipeline(
        registry.domain,
        _parser_config(config),
        use_new_features=config["use_new_features"],
        use_filter=config["use_logic_filter"],
    )
    examples_by_domain = {d: registry.examples(d, "train") for d in sources}
    grid = training.build_grid(algorithm, sources, config["seed"], config.get("grid"))
    tuned = training.tune_hyperparameters(
        sources, examples_by_domain, grid, algorithm, pipeline,
        lambda w, ex: mean_credit(pipeline, w, ex),
    )
    dataio.atomic_write_json(args.out, tuned.to_json())
    print(f"selected configuration written to {args.out}")
    return 0


def cmd_train(args) -> int:
    config = _apply_flag_overrides(args, dataio.load_run_config(args.config))
    registry = _registry(config)
    if args.tuned:
        with open(args.tuned, "r", encoding="utf-8") as fh:
            tconfig = TrainConfig.from_json(json.load(fh))
    else:
        tconfig = _train_config(config)
    pipeline = Pipeline(
        registry.domain,
        _parser_config(config),
        use_new_features=config["use_new_features"],
        use_filter=config["use_logic_filter"],
    )
    target = config.get("target_domain")
    if config["in_domain"]:
        if not target:
            raise ConfigError("in-domain training needs a target_domain")
        pool = registry.examples(target, "train")
        weights = adagrad(pool, {}, tconfig, pipeline)
        partition = None
    else:
        domains = [d for d in registry.domain_ids if d != target]
        if not domains:
            raise DataError("no training domains left after excluding the target")
        examples_by_domain = {d: registry.examples(d, "train") for d in domains}
        if config["algorithm"] == "gmdp":
            ordering = list(tconfig.domain_ordering or domains)
            partition = DomainPartition(
                tuple(ordering[: tconfig.partition_size]),
                tuple(ordering[tconfig.partition_size:]),
            )
            weights = gmdp(partition, examples_by_domain, tconfig, pipeline)
        else:
            pool = [ex for d in domains for ex in examples_by_domain[d]]
            weights = adagrad(pool, {}, tconfig, pipeline)
            partition = None
    training.save_model(
        args.out, weights, tconfig, partition,
        extra={"ablation": {
            "use_new_features": config["use_new_features"],
            "use_logic_filter": config["use_logic_filter"],
        }},
    )
    print(f"model written to {args.out} ({len(weights)} weights)")
    return 0


def cmd_eval(args) -> int:
    config = _apply_flag_overrides(args, dataio.load_run_config(args.config))
    registry = _registry(config)
    if args.ablation_suite:
        from .evaluation import ablation_table

        table = ablation_table(
            registry, _parser_config(config), config.get("grid"), config["seed"]
        )
        dataio.atomic_write_json(args.out, table)
        width = max(len(d) for d in table["domains"])
        print("model        " + "  ".join(f"{d:>{width}}" for d in table["domains"]) + "      avg")
        for row in table["rows"]:
            cells = "  ".join(f"{row['per_domain'][d]:{width}.1f}" for d in table["domains"])
            print(f"{row['label']:12s} {cells}  {row['average']:7.1f}")
        return 0
    target = config.get("target_domain")
    if not target:
        raise ConfigError("eval needs a target_domain")
    spec = ExperimentSpec(
        target_domain=target,
        use_gmdp=config["algorithm"] == "gmdp",
        use_new_features=config["use_new_features"],
        use_logic_filter=config["use_logic_filter"],
        in_domain=config["in_domain"],
        seed=config["seed"],
    )
    report = run_experiment(spec, registry, _parser_config(config), config.get("grid"))
    dataio.atomic_write_json(args.out, report)
    accuracy = report["accuracy"]
    shown = "no data" if accuracy is None else f"{accuracy:.1f}"
    print(f"{spec.label()} on {target}: accuracy {shown}; report written to {args.out}")
    return 0


def cmd_parse(args) -> int:
    from .domains.base import validate_state_for_domain

    domain = get_domain(args.domain)
    with open(args.state, "r", encoding="utf-8") as fh:
        state = dataio.state_from_json(domain.id, json.load(fh))
    validate_state_for_domain(state, domain)
    weights = {}
    if args.model:
        weights, _, _ = training.load_model(args.model)
    config = ParserConfig(beam_size=args.beam_size, max_rules=args.max_rules)
    try:
        prediction = predict(args.utterance, state, domain, config, weights,
                             use_filter=not args.no_logic_filter)
    except ParseFailure:
        print("parse failure: no surviving candidate")
        return 4
    ranked = sorted(prediction.candidates, key=lambda d: (-d.score, d.lf.printed))
    for rank, deriv in enumerate(ranked[: args.nbest], start=1):
        print(f"{rank}. score={deriv.score:+.4f} size={deriv.size_used}  {deriv.lf.printed}")
        if args.explain:
            for name in sorted(deriv.feats):
                print(f"     {name} = {deriv.feats[name]:g}")
    return 0


def cmd_significance(args) -> int:
    def scores(path):
        with open(path, "r", encoding="utf-8") as fh:
            report = json.load(fh)
        return [
            ExampleScore(r["id"], r["credit"], r["tie_count"], r["correct_in_tie"], r["parse_failed"])
            for r in report["per_example"]
        ]

    p, significant = paired_bootstrap(
        scores(args.report_a), scores(args.report_b),
        iterations=args.iterations, alpha=args.alpha, seed=args.seed,
    )
    verdict = "significant" if significant else "not significant"
    print(f"p-value {p:.4f} at alpha {args.alpha}: {verdict}")
    return 0


def build_arg_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlinstruct", description=__doc__,
                                 formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="random state pairs for one domain")
    p.add_argument("--domain", required=True)
    p.add_argument("--count", type=int, required=True, help="pairs per interface method")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--config", default=None)
    p.set_defaults(func=cmd_generate)

    def experiment_flags(p):
        p.add_argument("--config", required=True)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--target-domain", default=None)
        p.add_argument("--algorithm", choices=("gmdp", "adagrad"), default=None)
        p.add_argument("--no-new-features", action="store_true")
        p.add_argument("--no-logic-filter", action="store_true")
        p.add_argument("--in-domain", action="store_true")

    p = sub.add_parser("tune", help="hyper-parameter grid search")
    experiment_flags(p)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_tune)

    p = sub.add_parser("train", help="train and save a model")
    experiment_flags(p)
    p.add_argument("--tuned", default=None, help="configuration file written by tune")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="full experiment with report")
    experiment_flags(p)
    p.add_argument("--out", required=True)
    p.add_argument("--ablation-suite", action="store_true",
                   help="run all eight trainer/feature/filter rows over every domain")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("parse", help="n-best parses for one utterance")
    p.add_argument("utterance")
    p.add_argument("--domain", required=True)
    p.add_argument("--state", required=True, help="JSON file with one state object")
    p.add_argument("--model", default=None)
    p.add_argument("--nbest", type=int, default=5)
    p.add_argument("--beam-size", type=int, default=200)
    p.add_argument("--max-rules", type=int, default=15)
    p.add_argument("--no-logic-filter", action="store_true")
    p.add_argument("--explain", action="store_true", help="print feature values")
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("significance", help="paired bootstrap between two reports")
    p.add_argument("report_a")
    p.add_argument("report_b")
    p.add_argument("--iterations", type=int, default=10000)
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_significance)
    return ap


def main(argv=None) -> int:
    args = build_arg_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 3
    except (NlinstructError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4


if __name__ == "__main__":
    raise SystemExit(main())
