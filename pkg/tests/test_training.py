from __future__ import annotations

import math
import random
from dataclasses import replace

import pytest

from nlinstruct.errors import NlinstructError
from nlinstruct.training import (
    DomainPartition,
    TrainConfig,
    adagrad,
    build_grid,
    candidate_distribution,
    example_log_likelihood,
    final_partition,
    gmdp,
    load_model,
    partition_for_fold,
    save_model,
    score,
    tune_hyperparameters,
)

from conftest import make_toy_world


class FakeCandidate:
    def __init__(self, features, denotation):
        self.features = features
        self.denotation = denotation


def test_score_is_a_sparse_dot_product():
    assert score({}, {}) == 0.0
    assert score({"a": 2.0}, {"a": 1.0, "b": 5.0}) == 2.0


def test_score_is_linear():
    theta = {"a": 1.5, "b": -0.5}
    f1, f2 = {"a": 2.0}, {"a": 1.0, "b": 4.0}
    merged = {"a": 3.0, "b": 4.0}
    assert math.isclose(score(theta, merged), score(theta, f1) + score(theta, f2))


def test_distribution_single_candidate():
    assert candidate_distribution({}, [FakeCandidate({}, None)]) == [1.0]


def test_distribution_equal_scores():
    cands = [FakeCandidate({"a": 1.0}, None), FakeCandidate({"a": 1.0}, None)]
    assert candidate_distribution({"a": 3.0}, cands) == [0.5, 0.5]


def test_distribution_log_two_gap():
    cands = [FakeCandidate({"a": 1.0}, None), FakeCandidate({}, None)]
    probs = candidate_distribution({"a": math.log(2.0)}, cands)
    assert math.isclose(probs[0], 2 / 3, rel_tol=1e-12)
    assert math.isclose(probs[1], 1 / 3, rel_tol=1e-12)


def test_distribution_sums_to_one():
    rng = random.Random(0)
    for _ in range(50):
        cands = [
            FakeCandidate({f"f{i}": rng.uniform(-2, 2) for i in range(rng.randint(1, 6))}, None)
            for _ in range(rng.randint(1, 9))
        ]
        theta = {f"f{i}": rng.uniform(-3, 3) for i in range(6)}
        assert abs(sum(candidate_distribution(theta, cands)) - 1.0) < 1e-9


def test_loglik_degenerate_single_correct():
    logp, grad = example_log_likelihood({}, [FakeCandidate({"x": 1.0}, "goal")], ["goal"], "goal")
    assert logp == 0.0
    assert all(abs(v) < 1e-15 for v in grad.values())


def test_loglik_two_identical_candidates_one_correct():
    cands = [FakeCandidate({"x": 1.0}, "goal"), FakeCandidate({"x": 1.0}, "other")]
    logp, grad = example_log_likelihood({"x": 0.7}, cands, ["goal", "other"], "goal")
    assert math.isclose(logp, math.log(0.5), rel_tol=1e-12)
    assert all(abs(v) < 1e-12 for v in grad.values())


def test_no_correct_candidate_is_skipped():
    assert example_log_likelihood({}, [FakeCandidate({}, "a")], ["a"], "goal") is None


def _random_instance(rng):
    features = [f"f{i}" for i in range(rng.randint(2, 8))]
    cands = []
    denots = []
    n = rng.randint(2, 7)
    correct_at = rng.randrange(n)
    for i in range(n):
        feats = {k: round(rng.uniform(-2, 2), 3) for k in rng.sample(features, rng.randint(1, len(features)))}
        denot = "goal" if (i == correct_at or rng.random() < 0.3) else f"other{i}"
        cands.append(FakeCandidate(feats, denot))
        denots.append(denot)
    theta = {k: round(rng.uniform(-1, 1), 3) for k in features}
    return theta, cands, denots


def gradient_matches_finite_differences(rng, instances: int) -> int:
    """Shared oracle: central finite differences of the log-likelihood."""
    checked = 0
    for _ in range(instances):
        theta, cands, denots = _random_instance(rng)
        out = example_log_likelihood(theta, cands, denots, "goal")
        assert out is not None
        _, grad = out
        keys = set(grad) | {k for c in cands for k in c.features}
        h = 1e-5
        for k in keys:
            up = dict(theta)
            up[k] = up.get(k, 0.0) + h
            down = dict(theta)
            down[k] = down.get(k, 0.0) - h
            f_up = example_log_likelihood(up, cands, denots, "goal")[0]
            f_down = example_log_likelihood(down, cands, denots, "goal")[0]
            fd = (f_up - f_down) / (2 * h)
            analytic = grad.get(k, 0.0)
            assert abs(analytic - fd) <= 1e-5 * max(1.0, abs(fd), abs(analytic)), (
                k, analytic, fd,
            )
        checked += 1
    return checked


def test_gradient_matches_finite_differences():
    assert gradient_matches_finite_differences(random.Random(17), 30) == 30


# ---------------------------------------------------------------------------
# Training over the toy domain
# ---------------------------------------------------------------------------


_toy_world = make_toy_world


def test_adagrad_zero_iterations_returns_init():
    _, examples, pipeline = _toy_world()
    init = {"w": 1.25}
    out = adagrad(examples["toya"], init, TrainConfig(iterations=0), pipeline, iterations=0)
    assert out == init and out is not init


def test_huge_l1_forces_exact_zeros():
    _, examples, pipeline = _toy_world()
    cfg = TrainConfig(l1=10.0, step_size=0.01, iterations=2)
    out = adagrad(examples["toya"], {}, cfg, pipeline)
    assert out == {}


def test_adagrad_learns_the_separable_toy_problem():
    from nlinstruct.evaluation import mean_credit

    _, examples, pipeline = _toy_world(per_domain=16)
    cfg = TrainConfig(l1=0.001, step_size=0.1, iterations=3)
    weights = adagrad(examples["toya"], {}, cfg, pipeline)
    assert mean_credit(pipeline, weights, examples["toya"]) >= 0.95


def test_one_unregularized_pass_increases_example_likelihood():
    cands = [
        FakeCandidate({"a": 1.0, "b": 0.5}, "goal"),
        FakeCandidate({"a": 0.2, "c": 1.0}, "other"),
        FakeCandidate({"b": 1.5}, "other"),
    ]
    denots = [c.denotation for c in cands]
    theta = {"a": 0.1, "b": -0.2, "c": 0.3}
    before, grad = example_log_likelihood(theta, cands, denots, "goal")
    import nlinstruct.kernels as kernels

    kernels.adagrad_update(theta, {}, grad, 1e-3, 0.0, 1e-8)
    after, _ = example_log_likelihood(theta, cands, denots, "goal")
    assert after > before


def test_training_is_deterministic():
    _, examples, pipeline = _toy_world()
    cfg = TrainConfig(l1=0.01, step_size=0.1, iterations=2, seed=5)
    a = adagrad(examples["toya"], {}, cfg, pipeline)
    b = adagrad(examples["toya"], {}, cfg, pipeline)
    assert a == b


def test_gmdp_zero_second_step_returns_first_step_weights():
    _, examples, pipeline = _toy_world()
    cfg = TrainConfig(iterations=0, iterations_step1=2)
    part = DomainPartition(("toya",), ("toyb",))
    two_step = gmdp(part, examples, cfg, pipeline)
    direct = adagrad(examples["toya"], {}, cfg, pipeline, iterations=2)
    assert two_step == direct


def test_gmdp_zero_first_step_is_bitwise_plain_adagrad():
    _, examples, pipeline = _toy_world()
    cfg = TrainConfig(iterations=2, iterations_step1=0, seed=9)
    part = DomainPartition(("toya",), ("toyb",))
    two_step = gmdp(part, examples, cfg, pipeline)
    plain = adagrad(examples["toyb"], {}, cfg, pipeline, iterations=2)
    assert two_step == plain  # dict equality on floats, i.e. bit-for-bit


def test_gmdp_swapped_partitions_is_still_deterministic():
    _, examples, pipeline = _toy_world()
    cfg = TrainConfig(iterations=1, iterations_step1=1, seed=3)
    ab = gmdp(DomainPartition(("toya",), ("toyb",)), examples, cfg, pipeline)
    ba = gmdp(DomainPartition(("toyb",), ("toya",)), examples, cfg, pipeline)
    ab2 = gmdp(DomainPartition(("toya",), ("toyb",)), examples, cfg, pipeline)
    assert ab == ab2
    assert isinstance(ba, dict)


def test_partition_validation():
    with pytest.raises(NlinstructError):
        DomainPartition((), ("a",))
    with pytest.raises(NlinstructError):
        DomainPartition(("a",), ("a", "b"))


# ---------------------------------------------------------------------------
# Grid search
# ---------------------------------------------------------------------------


def test_gmdp_grid_has_144_points():
    grid = build_grid("gmdp", ["d1", "d2", "d3", "d4", "d5", "d6"], seed=0)
    assert len(grid) == 144
    orderings = {g.domain_ordering for g in grid}
    assert len(orderings) == 3
    assert all(sorted(o) == ["d1", "d2", "d3", "d4", "d5", "d6"] for o in orderings)


def test_adagrad_grid_has_12_points():
    assert len(build_grid("adagrad", ["a", "b", "c"], seed=0)) == 12


def test_grid_overrides_shrink_the_search():
    grid = build_grid(
        "gmdp", ["a", "b", "c", "d"], seed=1,
        overrides={"l1": [0.01], "step_size": [0.1], "iterations": [2],
                   "partition_sizes": [2], "iterations_step1": [1], "num_orderings": 1},
    )
    assert len(grid) == 1


def test_singleton_grid_is_selected_without_training():
    cfg = TrainConfig(l1=0.5)
    calls = {"n": 0}

    def accuracy_fn(weights, examples):
        calls["n"] += 1
        return 0.0

    chosen = tune_hyperparameters(["a", "b", "c"], {}, [cfg], "adagrad", None, accuracy_fn)
    assert chosen is cfg and calls["n"] == 0


def test_tuning_ties_break_toward_earliest_grid_entry():
    _, examples, pipeline = _toy_world(("toya", "toyb", "toyc"), per_domain=4)
    grid = [TrainConfig(iterations=0, seed=1), TrainConfig(iterations=0, seed=2)]
    chosen = tune_hyperparameters(
        list(examples), examples, grid, "adagrad", pipeline,
        lambda w, ex: 0.5,
    )
    assert chosen is grid[0]


def test_partition_for_fold_excludes_held_out_domain():
    cfg = TrainConfig(partition_size=2, domain_ordering=("a", "b", "c", "d"))
    part = partition_for_fold(cfg, ["a", "c", "d"])
    assert part == DomainPartition(("a", "c"), ("d",))
    assert partition_for_fold(replace(cfg, partition_size=3), ["a", "c", "d"]) is None


def test_final_partition_grows_the_larger_side():
    # tuned over 5-domain folds with M=3: (3,2) -> final (4,2) over 6
    cfg = TrainConfig(partition_size=3, domain_ordering=("a", "b", "c", "d", "e", "f"))
    part = final_partition(cfg, ["a", "b", "c", "d", "e", "f"])
    assert part.d1 == ("a", "b", "c", "d") and part.d2 == ("e", "f")
    # tuned (2,3) -> final (2,4)
    cfg = TrainConfig(partition_size=2, domain_ordering=("a", "b", "c", "d", "e", "f"))
    part = final_partition(cfg, ["a", "b", "c", "d", "e", "f"])
    assert part.d1 == ("a", "b") and part.d2 == ("c", "d", "e", "f")
    # equal fold sides grow the first
    cfg = TrainConfig(partition_size=2, domain_ordering=("a", "b", "c", "d", "e"))
    part = final_partition(cfg, ["a", "b", "c", "d", "e"])
    assert part.d1 == ("a", "b", "c") and part.d2 == ("d", "e")


def test_model_round_trip(tmp_path):
    cfg = TrainConfig(l1=0.01, step_size=0.1, iterations=2, domain_ordering=("a", "b"))
    weights = {"cooc|x|y": 1.5, "size>2": -0.25}
    path = tmp_path / "model.json"
    save_model(path, weights, cfg, DomainPartition(("a",), ("b",)))
    w2, cfg2, part2 = load_model(path)
    assert w2 == weights
    assert cfg2 == cfg
    assert part2 == DomainPartition(("a",), ("b",))
