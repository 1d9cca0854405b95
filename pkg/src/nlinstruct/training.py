"""Log-linear scoring, the regularized likelihood objective, AdaGrad, and
two-step training over a domain partition.

The model assigns each candidate z the probability

    p(z) = exp(score(z)) / sum_z' exp(score(z'))

and the objective is the L1-regularized log-likelihood of the desired
denotation, i.e. of the total probability mass on candidates whose
execution yields the desired state. Candidates are re-generated with the
current weights at every visit, because beam contents depend on the scores.

Two-step training first runs AdaGrad over the examples of one domain subset
and uses the learned weights to initialize a second AdaGrad run over the
remaining training domains; the second run starts with fresh step-size
accumulators. The point is to optimize for domains the first step never
saw, which is also how the trained parser will be used.
"""

from __future__ import annotations

import itertools
import json
import logging
import math
import random
from dataclasses import dataclass

from . import kernels
from .errors import DataError, NlinstructError
from .parser import Pipeline

log = logging.getLogger(__name__)

ADAGRAD_EPS = 1e-8


@dataclass
class TrainConfig:
    l1: float = 0.001
    step_size: float = 0.1
    iterations: int = 3  # second-step passes for two-step training
    iterations_step1: int = 2
    partition_size: int = 3  # domains assigned to the first step
    domain_ordering: tuple[str, ...] | None = None
    seed: int = 0
    reset_accumulators: bool = True

    def __post_init__(self):
        if self.l1 < 0:
            raise NlinstructError("l1 coefficient must be >= 0")
        if self.step_size <= 0:
            raise NlinstructError("step size must be > 0")
        if self.iterations < 0 or self.iterations_step1 < 0:
            raise NlinstructError("iteration counts must be >= 0")

    def to_json(self) -> dict:
        return {
            "l1": self.l1,
            "step_size": self.step_size,
            "iterations": self.iterations,
            "iterations_step1": self.iterations_step1,
            "partition_size": self.partition_size,
            "domain_ordering": list(self.domain_ordering) if self.domain_ordering else None,
            "seed": self.seed,
            "reset_accumulators": self.reset_accumulators,
        }

    @classmethod
    def from_json(cls, data: dict) -> "TrainConfig":
        data = dict(data)
        ordering = data.get("domain_ordering")
        data["domain_ordering"] = tuple(ordering) if ordering else None
        return cls(**data)


@dataclass(frozen=True)
class DomainPartition:
    d1: tuple[str, ...]
    d2: tuple[str, ...]

    def __post_init__(self):
        if not self.d1 or not self.d2:
            raise NlinstructError("both partition sides must be non-empty")
        if set(self.d1) & set(self.d2):
            raise NlinstructError("partition sides overlap")


def score(weights: dict, feats: dict) -> float:
    return kernels.dot(weights, feats)


def candidate_distribution(weights: dict, candidates: list) -> list[float]:
    """Softmax over candidate scores; candidates are (derivation, features)
    pairs or anything exposing ``.features``."""
    if not candidates:
        raise NlinstructError("cannot normalize an empty candidate list")
    scores = [kernels.dot(weights, _feats(c)) for c in candidates]
    top = max(scores)
    exps = [math.exp(s - top) for s in scores]
    z = sum(exps)
    return [e / z for e in exps]


def _feats(candidate) -> dict:
    if hasattr(candidate, "features"):
        return candidate.features
    return candidate[1]


def _logsumexp(scores: list[float]) -> float:
    top = max(scores)
    return top + math.log(sum(math.exp(s - top) for s in scores))


def example_log_likelihood(weights: dict, candidates: list, denotations: list,
                           desired) -> tuple[float, dict] | None:
    """Log-probability of the desired denotation and its gradient in theta.

    The gradient is the difference between the feature expectation over
    correct candidates and the full feature expectation. Returns None when
    no candidate denotes the desired state (such examples are skipped)."""
    if not candidates:
        raise NlinstructError("no candidates")
    feats = [_feats(c) for c in candidates]
    scores = [kernels.dot(weights, f) for f in feats]
    correct = [i for i, d in enumerate(denotations) if d == desired]
    if not correct:
        return None
    lse_all = _logsumexp(scores)
    lse_correct = _logsumexp([scores[i] for i in correct])
    logp = lse_correct - lse_all
    correct_set = set(correct)
    grad: dict = {}
    for i, f in enumerate(feats):
        coef = -math.exp(scores[i] - lse_all)
        if i in correct_set:
            coef += math.exp(scores[i] - lse_correct)
        if coef:
            kernels.add_scaled(grad, f, coef)
    return logp, grad


class EpochStats:
    """Per-epoch bookkeeping: how many examples yielded no usable signal."""

    def __init__(self):
        self.epochs: list[dict] = []

    def record(self, epoch: int, seen: int, skipped_parse: int, skipped_gold: int):
        self.epochs.append(
            {
                "epoch": epoch,
                "examples": seen,
                "parse_failures": skipped_parse,
                "no_gold_candidate": skipped_gold,
            }
        )


def adagrad(
    examples: list,
    init: dict,
    config: TrainConfig,
    pipeline: Pipeline,
    iterations: int | None = None,
    sumsq: dict | None = None,
    stats: EpochStats | None = None,
) -> dict:
    """Stochastic per-example ascent with per-coordinate AdaGrad step sizes
    and proximal L1 truncation. Examples are reshuffled every pass with a
    generator seeded from the configuration, so runs are reproducible."""
    weights = dict(init)
    if sumsq is None:
        sumsq = {}
    rng = random.Random(config.seed)
    passes = config.iterations if iterations is None else iterations
    for epoch in range(passes):
        order = list(examples)
        rng.shuffle(order)
        skipped_parse = skipped_gold = 0
        for ex in order:
            cands = pipeline.analyze(ex, weights)
            if not cands:
                skipped_parse += 1
                continue
            result = example_log_likelihood(
                weights, cands, [c.denotation for c in cands], ex.desired
            )
            if result is None:
                skipped_gold += 1
                continue
            _, grad = result
            kernels.adagrad_update(weights, sumsq, grad, config.step_size, config.l1, ADAGRAD_EPS)
        log.info(
            "epoch %d: %d examples, %d parse failures, %d without gold candidate",
            epoch, len(order), skipped_parse, skipped_gold,
        )
        if stats is not None:
            stats.record(epoch, len(order), skipped_parse, skipped_gold)
    return weights


def gmdp(
    partition: DomainPartition,
    examples_by_domain: dict[str, list],
    config: TrainConfig,
    pipeline: Pipeline,
    stats: EpochStats | None = None,
) -> dict:
    """Two-step training: AdaGrad over the first partition side from zero,
    then AdaGrad over the second side initialized at the first result."""
    missing = [d for d in partition.d1 + partition.d2 if d not in examples_by_domain]
    if missing:
        raise NlinstructError(f"partition names domains without examples: {missing}")
    d1_examples = [ex for d in partition.d1 for ex in examples_by_domain[d]]
    d2_examples = [ex for d in partition.d2 for ex in examples_by_domain[d]]
    sumsq: dict = {}
    theta1 = adagrad(d1_examples, {}, config, pipeline,
                     iterations=config.iterations_step1, sumsq=sumsq, stats=stats)
    if not config.reset_accumulators:
        return adagrad(d2_examples, theta1, config, pipeline,
                       iterations=config.iterations, sumsq=sumsq, stats=stats)
    return adagrad(d2_examples, theta1, config, pipeline,
                   iterations=config.iterations, stats=stats)


# ---------------------------------------------------------------------------
# Hyper-parameter search
# ---------------------------------------------------------------------------

GRID_L1 = (0.001, 0.01)
GRID_STEP_SIZE = (0.01, 0.1)
GRID_ITERATIONS = (1, 2, 3)
GRID_PARTITION_SIZES = (3, 4)
GRID_ITERATIONS_STEP1 = (2, 4)
GRID_NUM_ORDERINGS = 3


def build_grid(
    algorithm: str,
    training_domains: list[str],
    seed: int = 0,
    overrides: dict | None = None,
) -> list[TrainConfig]:
    """The grid-search configurations, in a fixed enumeration order.

    For two-step training the grid crosses regularization, step size,
    second-step iterations, first-step size of the partition, a few random
    domain orderings, and first-step iterations (144 points by default).
    ``overrides`` replaces any of the axes with explicit value lists."""
    o = overrides or {}
    l1s = tuple(o.get("l1", GRID_L1))
    steps = tuple(o.get("step_size", GRID_STEP_SIZE))
    iters = tuple(o.get("iterations", GRID_ITERATIONS))
    grid: list[TrainConfig] = []
    if algorithm == "adagrad":
        for l1, step, it in itertools.product(l1s, steps, iters):
            grid.append(TrainConfig(l1=l1, step_size=step, iterations=it, seed=seed))
        return grid
    if algorithm != "gmdp":
        raise NlinstructError(f"unknown algorithm {algorithm!r}")
    sizes = tuple(o.get("partition_sizes", GRID_PARTITION_SIZES))
    step1_iters = tuple(o.get("iterations_step1", GRID_ITERATIONS_STEP1))
    num_orderings = o.get("num_orderings", GRID_NUM_ORDERINGS)
    rng = random.Random(seed)
    orderings = []
    for _ in range(num_orderings):
        perm = list(training_domains)
        rng.shuffle(perm)
        orderings.append(tuple(perm))
    for l1, step, it, m, ordering, it1 in itertools.product(
        l1s, steps, iters, sizes, orderings, step1_iters
    ):
        grid.append(
            TrainConfig(
                l1=l1, step_size=step, iterations=it, iterations_step1=it1,
                partition_size=m, domain_ordering=ordering, seed=seed,
            )
        )
    return grid


def partition_for_fold(config: TrainConfig, sources: list[str]) -> DomainPartition | None:
    """Split the fold's source domains by the config's ordering: the first
    ``partition_size`` of the ordering (restricted to the fold) go to the
    first step. None when a side would be empty."""
    ordering = [d for d in (config.domain_ordering or sources) if d in sources]
    m = config.partition_size
    if not 0 < m < len(ordering):
        return None
    return DomainPartition(tuple(ordering[:m]), tuple(ordering[m:]))


def tune_hyperparameters(
    training_domains: list[str],
    examples_by_domain: dict[str, list],
    grid: list[TrainConfig],
    algorithm: str,
    pipeline: Pipeline,
    accuracy_fn,
) -> TrainConfig:
    """Leave-one-domain-out grid search over the training domains.

    Every domain is held out once; each configuration trains on the rest
    and is scored (by ``accuracy_fn(weights, examples)``) on the held-out
    domain's examples. Highest mean accuracy wins; ties go to the earliest
    grid entry. A single-point grid is returned directly."""
    if not grid:
        raise NlinstructError("empty hyper-parameter grid")
    if len(grid) == 1:
        return grid[0]
    totals = [0.0] * len(grid)
    counts = [0] * len(grid)
    for held_out in training_domains:
        sources = [d for d in training_domains if d != held_out]
        eval_examples = examples_by_domain[held_out]
        for gi, cfg in enumerate(grid):
            if algorithm == "gmdp":
                partition = partition_for_fold(cfg, sources)
                if partition is None:
                    continue
                weights = gmdp(partition, examples_by_domain, cfg, pipeline)
            else:
                pool = [ex for d in sources for ex in examples_by_domain[d]]
                weights = adagrad(pool, {}, cfg, pipeline)
            acc = accuracy_fn(weights, eval_examples)
            totals[gi] += acc
            counts[gi] += 1
            log.info("tuning: held-out=%s grid[%d] accuracy=%.3f", held_out, gi, acc)
    best, best_mean = None, -1.0
    for gi in range(len(grid)):
        if counts[gi] == 0:
            continue
        mean = totals[gi] / counts[gi]
        if mean > best_mean:
            best, best_mean = gi, mean
    if best is None:
        raise NlinstructError("no grid configuration was valid for any fold")
    return grid[best]


def final_partition(tuned: TrainConfig, training_domains: list[str]) -> DomainPartition:
    """Partition for the final model: the tuned split grew by one domain, on
    whichever side was larger during tuning, keeping the size ratio close."""
    ordering = list(tuned.domain_ordering or training_domains)
    if set(ordering) != set(training_domains):
        raise NlinstructError("tuned ordering does not cover the training domains")
    m = tuned.partition_size
    fold_d1, fold_d2 = m, len(training_domains) - 1 - m
    d1_size = m + 1 if fold_d1 >= fold_d2 else m
    return DomainPartition(tuple(ordering[:d1_size]), tuple(ordering[d1_size:]))


# ---------------------------------------------------------------------------
# Model files
# ---------------------------------------------------------------------------

MODEL_FORMAT = "nlinstruct-model"
MODEL_VERSION = 1


def save_model(path, weights: dict, config: TrainConfig,
               partition: DomainPartition | None = None, extra: dict | None = None) -> None:
    from .dataio import atomic_write_json

    payload = {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "weights": {k: weights[k] for k in sorted(weights)},
        "train_config": config.to_json(),
        "partition": {"d1": list(partition.d1), "d2": list(partition.d2)} if partition else None,
    }
    if extra:
        payload.update(extra)
    atomic_write_json(path, payload)


def load_model(path) -> tuple[dict, TrainConfig, DomainPartition | None]:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DataError(f"{path}: not valid JSON ({exc})") from None
    if payload.get("format") != MODEL_FORMAT:
        raise DataError(f"{path}: not a model file")
    if payload.get("version") != MODEL_VERSION:
        raise DataError(f"{path}: unsupported model version {payload.get('version')}")
    weights = {str(k): float(v) for k, v in payload["weights"].items()}
    config = TrainConfig.from_json(payload["train_config"])
    part = payload.get("partition")
    partition = DomainPartition(tuple(part["d1"]), tuple(part["d2"])) if part else None
    return weights, config, partition
