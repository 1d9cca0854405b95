# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled sparse vector kernels.

Semantics mirror nlinstruct._pykernels exactly, including sorted-key
iteration so both backends produce bit-identical floats.
"""

from libc.math cimport sqrt

BACKEND = "cython"


def dot(dict weights, dict feats):
    cdef double total = 0.0
    cdef object w
    for k in sorted(feats):
        w = weights.get(k)
        if w is not None:
            total += (<double> w) * (<double> feats[k])
    return total


def add_scaled(dict acc, dict feats, double scale):
    for k in sorted(feats):
        acc[k] = (<double> acc.get(k, 0.0)) + (<double> feats[k]) * scale


def adagrad_update(dict weights, dict sumsq, dict grad,
                   double step_size, double l1, double eps):
    cdef double g, s, lr, w, shrink
    for k in sorted(grad):
        g = <double> grad[k]
        if g == 0.0:
            continue
        s = (<double> sumsq.get(k, 0.0)) + g * g
        sumsq[k] = s
        lr = step_size / sqrt(s + eps)
        w = (<double> weights.get(k, 0.0)) + lr * g
        shrink = l1 * lr
        if w > shrink:
            w -= shrink
        elif w < -shrink:
            w += shrink
        else:
            w = 0.0
        if w == 0.0:
            weights.pop(k, None)
        else:
            weights[k] = w
