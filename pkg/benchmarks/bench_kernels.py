"""Compare the compiled sparse kernels against the pure-Python fallback.

Micro-benchmarks time the three kernel operations directly on both
backends; the end-to-end benchmark times one training epoch in a
subprocess per backend (the backend is chosen at import time, so it takes
a fresh interpreter to switch).

    python benchmarks/bench_kernels.py            # micro only
    python benchmarks/bench_kernels.py --end-to-end
"""

from __future__ import annotations

import argparse
import os
import random
import subprocess
import sys
import time

from nlinstruct import _pykernels

try:
    from nlinstruct import _ckernels
except ImportError:
    _ckernels = None


def _vectors(n_vectors: int, n_keys: int, fill: float, seed: int = 0):
    rng = random.Random(seed)
    keys = [f"cooc|phrase{i}|predicate{i % 7}" for i in range(n_keys)]
    return [
        {k: rng.uniform(-2, 2) for k in keys if rng.random() < fill}
        for _ in range(n_vectors)
    ]


def _time(fn, repeats: int = 5) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def micro(backends) -> None:
    weights = _vectors(1, 4000, 0.5, seed=1)[0]
    feats = _vectors(2000, 60, 0.3, seed=2)
    grads = _vectors(500, 60, 0.3, seed=3)

    rows = []
    for name, mod in backends:
        t_dot = _time(lambda: [mod.dot(weights, f) for f in feats])
        acc: dict = {}
        t_add = _time(lambda: [mod.add_scaled(acc, f, 0.25) for f in feats])
        w, s = dict(weights), {}
        t_upd = _time(lambda: [mod.adagrad_update(w, s, g, 0.1, 0.001, 1e-8) for g in grads])
        rows.append((name, t_dot, t_add, t_upd))

    print(f"{'backend':10s} {'dot x2000':>12s} {'add x2000':>12s} {'update x500':>12s}")
    for name, t_dot, t_add, t_upd in rows:
        print(f"{name:10s} {t_dot * 1e3:10.2f} ms {t_add * 1e3:10.2f} ms {t_upd * 1e3:10.2f} ms")
    if len(rows) == 2:
        base = rows[1]
        fast = rows[0]
        print(
            f"speedup: dot {base[1] / fast[1]:.2f}x, add {base[2] / fast[2]:.2f}x, "
            f"update {base[3] / fast[3]:.2f}x"
        )


_END_TO_END = r"""
import random, time
from nlinstruct import kernels
from nlinstruct.synthetic import build_domain_corpus
from nlinstruct.domains import get_domain
from nlinstruct.parser import Pipeline, ParserConfig
from nlinstruct.training import TrainConfig, adagrad

domain = get_domain("workforce")
examples = [ex for ex, _ in build_domain_corpus(domain, 60, seed=5)]
pipeline = Pipeline(lambda _d: domain, ParserConfig(beam_size=20, max_rules=9))
start = time.perf_counter()
adagrad(examples, {}, TrainConfig(l1=0.001, step_size=0.1, iterations=1), pipeline)
print(f"{kernels.BACKEND}: one epoch over {len(examples)} examples in "
      f"{time.perf_counter() - start:.2f}s")
"""


def end_to_end() -> None:
    for env in ({}, {"NLINSTRUCT_FORCE_PYTHON": "1"}):
        merged = dict(os.environ)
        merged.update(env)
        subprocess.run([sys.executable, "-c", _END_TO_END], env=merged, check=True)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--end-to-end", action="store_true",
                    help="also time one training epoch per backend")
    args = ap.parse_args()
    backends = []
    if _ckernels is not None:
        backends.append(("cython", _ckernels))
    else:
        print("compiled kernels unavailable; benchmarking the fallback only")
    backends.append(("python", _pykernels))
    micro(backends)
    if args.end_to_end:
        end_to_end()


if __name__ == "__main__":
    main()
