"""Accuracy with fractional tie credit, experiment protocols, and the
paired bootstrap significance test.

The zero-shot protocol trains and tunes strictly without the target domain;
an instrumented registry records every domain/example access together with
the protocol phase so that isolation is checkable after the fact rather
than assumed.
"""

from __future__ import annotations

import contextlib
import logging
import time
from dataclasses import dataclass

import numpy as np

from .domains.base import Domain, Example
from .errors import NlinstructError
from .parser import Candidate, ParserConfig, Pipeline
from .training import (
    adagrad,
    build_grid,
    final_partition,
    gmdp,
    tune_hyperparameters,
)

log = logging.getLogger(__name__)


@dataclass
class ExampleScore:
    example_id: str
    credit: float
    tie_count: int
    correct_in_tie: int
    parse_failed: bool

    def to_json(self) -> dict:
        return {
            "id": self.example_id,
            "credit": self.credit,
            "tie_count": self.tie_count,
            "correct_in_tie": self.correct_in_tie,
            "parse_failed": self.parse_failed,
        }


def credit_candidates(candidates: list[Candidate], desired) -> tuple[float, int, int]:
    """Fractional credit: among the maximal-score candidates, the fraction
    whose denotation is the desired state."""
    top = max(c.deriv.score for c in candidates)
    tied = [c for c in candidates if c.deriv.score == top]
    correct = sum(1 for c in tied if c.denotation == desired)
    return correct / len(tied), len(tied), correct


def score_example(pipeline: Pipeline, weights: dict, example: Example) -> ExampleScore:
    candidates = pipeline.analyze(example, weights)
    if not candidates:
        return ExampleScore(example.id, 0.0, 0, 0, True)
    credit, ties, correct = credit_candidates(candidates, example.desired)
    return ExampleScore(example.id, credit, ties, correct, False)


def mean_credit(pipeline: Pipeline, weights: dict, examples: list[Example]) -> float:
    if not examples:
        raise NlinstructError("cannot average over zero examples")
    return sum(score_example(pipeline, weights, ex).credit for ex in examples) / len(examples)


# ---------------------------------------------------------------------------
# Instrumented access to domains and data
# ---------------------------------------------------------------------------

PHASE_IDLE = "idle"
PHASE_TUNING = "tuning"
PHASE_TRAINING = "training"
PHASE_EVALUATION = "evaluation"


class InstrumentedRegistry:
    """Hands out domains and example lists, logging (phase, kind, domain id)
    for every access. The experiment runner flips the phase; the isolation
    check then asserts the target domain was only touched for evaluation."""

    def __init__(self, domains: dict[str, Domain], dataset: dict[str, dict[str, list[Example]]]):
        self._domains = dict(domains)
        self._dataset = dataset
        self.phase = PHASE_IDLE
        self.accesses: list[tuple[str, str, str]] = []

    @property
    def domain_ids(self) -> list[str]:
        return sorted(self._dataset)

    def domain(self, domain_id: str) -> Domain:
        self.accesses.append((self.phase, "domain", domain_id))
        return self._domains[domain_id]

    def examples(self, domain_id: str, split: str) -> list[Example]:
        self.accesses.append((self.phase, "examples", domain_id))
        splits = self._dataset.get(domain_id)
        if splits is None or split not in splits:
            raise NlinstructError(f"no {split!r} examples for domain {domain_id!r}")
        return splits[split]

    def has_split(self, domain_id: str, split: str) -> bool:
        return split in self._dataset.get(domain_id, {})

    @contextlib.contextmanager
    def in_phase(self, phase: str):
        previous = self.phase
        self.phase = phase
        try:
            yield
        finally:
            self.phase = previous

    def violations(self, target: str) -> list[tuple[str, str, str]]:
        return [
            entry
            for entry in self.accesses
            if entry[2] == target and entry[0] in (PHASE_TUNING, PHASE_TRAINING)
        ]


@dataclass
class ExperimentSpec:
    target_domain: str
    use_gmdp: bool = True
    use_new_features: bool = True
    use_logic_filter: bool = True
    in_domain: bool = False
    seed: int = 0

    def label(self) -> str:
        name = "gmdp" if self.use_gmdp else "adagrad"
        if not self.use_new_features:
            name += "-F"
        if not self.use_logic_filter:
            name += "-A"
        if self.in_domain:
            name += " (in-domain)"
        return name


def _cv_folds(examples: list[Example], k: int, seed: int) -> list[tuple[list, list]]:
    import random as _random

    order = list(examples)
    _random.Random(seed).shuffle(order)
    folds = [order[i::k] for i in range(k)]
    out = []
    for i in range(k):
        held = folds[i]
        rest = [ex for j, fold in enumerate(folds) if j != i for ex in fold]
        if held and rest:
            out.append((rest, held))
    return out


def run_experiment(
    spec: ExperimentSpec,
    registry: InstrumentedRegistry,
    parser_config: ParserConfig | None = None,
    grid_overrides: dict | None = None,
) -> dict:
    """Tune, train and score one experiment; returns the report as a dict.

    Zero-shot: tuning is leave-one-out over the source domains, the final
    model trains on all of them, scoring happens on the target's test split
    (or its only split when no test split exists, which is still unseen).
    In-domain: 3-fold cross-validation on the target's training split, with
    plain AdaGrad (the two-step trainer partitions domains, and there is
    only one)."""
    target = spec.target_domain
    if target not in registry.domain_ids:
        raise NlinstructError(f"no data for target domain {target!r}")
    pipeline = Pipeline(
        registry.domain,
        parser_config,
        use_new_features=spec.use_new_features,
        use_filter=spec.use_logic_filter,
    )
    algorithm = "gmdp" if spec.use_gmdp and not spec.in_domain else "adagrad"
    accuracy_fn = lambda weights, examples: mean_credit(pipeline, weights, examples)
    started = time.time()

    if spec.in_domain:
        with registry.in_phase(PHASE_TUNING):
            train_examples = registry.examples(target, "train")
            grid = build_grid("adagrad", [target], spec.seed, grid_overrides)
            if len(grid) == 1:
                tuned = grid[0]
            else:
                folds = _cv_folds(train_examples, 3, spec.seed)
                totals = [0.0] * len(grid)
                for rest, held in folds:
                    for gi, cfg in enumerate(grid):
                        totals[gi] += accuracy_fn(adagrad(rest, {}, cfg, pipeline), held)
                tuned = grid[max(range(len(grid)), key=lambda gi: (totals[gi], -gi))]
        partition = None
        with registry.in_phase(PHASE_TRAINING):
            weights = adagrad(registry.examples(target, "train"), {}, tuned, pipeline)
    else:
        sources = [d for d in registry.domain_ids if d != target]
        if not sources:
            raise NlinstructError("zero-shot experiments need at least one source domain")
        with registry.in_phase(PHASE_TUNING):
            examples_by_domain = {d: registry.examples(d, "train") for d in sources}
            grid = build_grid(algorithm, sources, spec.seed, grid_overrides)
            tuned = tune_hyperparameters(
                sources, examples_by_domain, grid, algorithm, pipeline, accuracy_fn
            )
        with registry.in_phase(PHASE_TRAINING):
            if algorithm == "gmdp":
                partition = final_partition(tuned, sources)
                weights = gmdp(partition, examples_by_domain, tuned, pipeline)
            else:
                partition = None
                pool = [ex for d in sources for ex in examples_by_domain[d]]
                weights = adagrad(pool, {}, tuned, pipeline)

    with registry.in_phase(PHASE_EVALUATION):
        split = "test" if registry.has_split(target, "test") else "train"
        if spec.in_domain and split != "test":
            raise NlinstructError("in-domain experiments need a test split")
        test_examples = registry.examples(target, split)
        scores = [score_example(pipeline, weights, ex) for ex in test_examples]

    # in-domain training touches the target by design; isolation is a
    # zero-shot property
    violations = [] if spec.in_domain else registry.violations(target)
    report = {
        "experiment": {
            "target_domain": target,
            "label": spec.label(),
            "use_gmdp": spec.use_gmdp,
            "use_new_features": spec.use_new_features,
            "use_logic_filter": spec.use_logic_filter,
            "in_domain": spec.in_domain,
            "seed": spec.seed,
        },
        "tuned_config": tuned.to_json(),
        "partition": {"d1": list(partition.d1), "d2": list(partition.d2)} if partition else None,
        "test_split": split,
        "accuracy": (100.0 * sum(s.credit for s in scores) / len(scores)) if scores else None,
        "no_data": not scores,
        "per_example": [s.to_json() for s in scores],
        "isolation": {
            "target_accesses_outside_evaluation": len(violations),
            "clean": not violations,
        },
        "weights": {k: weights[k] for k in sorted(weights)},
        "runtime_seconds": round(time.time() - started, 3),
    }
    if violations:
        log.warning("protocol isolation violated for %s: %s", target, violations[:5])
    return report


ABLATION_ROWS = (
    ("GMDP", True, True, True),
    ("GMDP-F", True, False, True),
    ("GMDP-A", True, True, False),
    ("GMDP-FA", True, False, False),
    ("AdaGrad", False, True, True),
    ("AdaGrad-F", False, False, True),
    ("AdaGrad-A", False, True, False),
    ("AdaGrad-FA", False, False, False),
)


def ablation_table(
    registry: InstrumentedRegistry,
    parser_config: ParserConfig | None = None,
    grid_overrides: dict | None = None,
    seed: int = 0,
    rows=ABLATION_ROWS,
) -> dict:
    """The eight-row trainer/feature/filter comparison over every target
    domain, plus a per-row average."""
    domains = registry.domain_ids
    table: dict = {"domains": domains, "rows": []}
    for label, use_gmdp, use_feats, use_filter in rows:
        per_domain = {}
        for target in domains:
            spec = ExperimentSpec(
                target_domain=target, use_gmdp=use_gmdp,
                use_new_features=use_feats, use_logic_filter=use_filter, seed=seed,
            )
            report = run_experiment(spec, registry, parser_config, grid_overrides)
            per_domain[target] = report["accuracy"]
        values = [v for v in per_domain.values() if v is not None]
        table["rows"].append(
            {
                "label": label,
                "per_domain": per_domain,
                "average": sum(values) / len(values) if values else None,
            }
        )
    return table


def paired_bootstrap(
    scores_a: list[ExampleScore],
    scores_b: list[ExampleScore],
    iterations: int = 10000,
    alpha: float = 0.05,
    seed: int = 0,
) -> tuple[float, bool]:
    """One-sided paired bootstrap on per-example credits.

    Resamples example indices with replacement; the p-value is the fraction
    of resamples in which the first system's mean does not exceed the
    second's. When the first system is not ahead on the observed data the
    test reports p = 1.0."""
    ids_a = [s.example_id for s in scores_a]
    ids_b = [s.example_id for s in scores_b]
    if ids_a != ids_b:
        raise NlinstructError("score lists are not aligned on the same examples")
    if not scores_a:
        raise NlinstructError("empty score lists")
    a = np.array([s.credit for s in scores_a], dtype=float)
    b = np.array([s.credit for s in scores_b], dtype=float)
    if a.mean() <= b.mean():
        return 1.0, False
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, len(a), size=(iterations, len(a)))
    p = float(np.mean(a[idx].mean(axis=1) <= b[idx].mean(axis=1)))
    return p, p < alpha
