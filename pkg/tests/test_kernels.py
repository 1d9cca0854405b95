"""Backend equivalence: the compiled kernels and the pure-Python fallback
must agree bit for bit, since trained weights are compared exactly."""

from __future__ import annotations

import math
import random

from nlinstruct import _pykernels
from nlinstruct import kernels


def _random_sparse(rng, keys, fill):
    return {k: rng.uniform(-3, 3) for k in keys if rng.random() < fill}


def _cases(n=200, seed=0):
    rng = random.Random(seed)
    keys = [f"feat|{i}" for i in range(30)]
    for _ in range(n):
        yield _random_sparse(rng, keys, 0.4), _random_sparse(rng, keys, 0.4), rng


def test_backend_is_reported():
    assert kernels.BACKEND in ("cython", "python")


def test_dot_matches_python_backend_exactly():
    for weights, feats, _ in _cases():
        assert kernels.dot(weights, feats) == _pykernels.dot(weights, feats)


def test_add_scaled_matches_python_backend_exactly():
    for acc, feats, rng in _cases():
        scale = rng.uniform(-2, 2)
        a, b = dict(acc), dict(acc)
        kernels.add_scaled(a, feats, scale)
        _pykernels.add_scaled(b, feats, scale)
        assert a == b


def test_adagrad_update_matches_python_backend_exactly():
    for weights, grad, rng in _cases():
        sumsq_a = {k: abs(v) for k, v in _random_sparse(rng, list(weights), 0.5).items()}
        wa, sa = dict(weights), dict(sumsq_a)
        wb, sb = dict(weights), dict(sumsq_a)
        kernels.adagrad_update(wa, sa, grad, 0.1, 0.01, 1e-8)
        _pykernels.adagrad_update(wb, sb, grad, 0.1, 0.01, 1e-8)
        assert wa == wb and sa == sb


def test_dot_ignores_missing_keys():
    assert kernels.dot({"a": 2.0}, {"b": 10.0}) == 0.0
    assert kernels.dot({"a": 2.0}, {"a": 1.5, "b": 10.0}) == 3.0


def test_dot_is_order_independent():
    feats_fwd = {"a": 1.0, "b": 2.0, "c": 3.0}
    feats_rev = dict(reversed(list(feats_fwd.items())))
    weights = {"a": 0.1234567, "b": -9.87, "c": 3.1415}
    assert kernels.dot(weights, feats_fwd) == kernels.dot(weights, feats_rev)


def test_adagrad_update_truncates_small_weights_to_exact_zero():
    weights, sumsq = {}, {}
    kernels.adagrad_update(weights, sumsq, {"w": 1e-6}, 0.1, 10.0, 1e-8)
    assert weights == {}
    assert sumsq["w"] == 1e-6 * 1e-6


def test_adagrad_update_applies_per_coordinate_rates():
    weights, sumsq = {}, {}
    kernels.adagrad_update(weights, sumsq, {"w": 2.0}, 0.5, 0.0, 0.0)
    # first step: lr = 0.5 / sqrt(4) = 0.25; ascent by lr * 2
    assert math.isclose(weights["w"], 0.5)
    kernels.adagrad_update(weights, sumsq, {"w": 2.0}, 0.5, 0.0, 0.0)
    assert math.isclose(weights["w"], 0.5 + 0.5 / math.sqrt(8.0) * 2.0)
