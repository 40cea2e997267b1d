"""Independent reference computations used to freeze expected values.

Nothing here calls the code under test: sups over events are taken by
enumerating subsets and trace norms come from singular values.
"""

import itertools

import numpy as np


def subsets(n):
    for r in range(n + 1):
        yield from itertools.combinations(range(n), r)


def sup_over_events(p, q):
    p = np.asarray(p, dtype=float)
    q = np.asarray(q, dtype=float)
    return max(sum(p[i] - q[i] for i in s) for s in subsets(len(p)))


def trace_norm_distance(r1, r2):
    return 0.5 * float(np.linalg.svd(np.asarray(r1) - np.asarray(r2), compute_uv=False).sum())


def operator_norm(a):
    return float(np.linalg.svd(np.asarray(a), compute_uv=False).max())


def event_sup_operator_norm(delta):
    n = len(delta)
    best = 0.0
    for s in subsets(n):
        if s:
            best = max(best, operator_norm(sum(delta[i] for i in s)))
    return best


def metdev_brute(rows1, rows2):
    n = len(rows1)
    return max(
        abs(sup_over_events(rows1[i], rows1[j]) - sup_over_events(rows2[i], rows2[j]))
        for i in range(n)
        for j in range(n)
    )


def sup_over_events_vectorized(p, q):
    """Same as :func:`sup_over_events`, enumerating subsets as 0/1 rows."""
    n = len(p)
    indicator = np.array(list(itertools.product((0.0, 1.0), repeat=n)))
    return float((indicator @ (np.asarray(p) - np.asarray(q))).max())
