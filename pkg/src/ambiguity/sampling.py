"""Seeded random states, POVMs, measures and explanations for checks and demos."""

from __future__ import annotations

import numpy as np

from .domains import DetectorDomain, KnobDomain
from .measures import ParamProbMeasure
from .quantum import Explanation


def random_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


def random_density(dim: int, rng: np.random.Generator, rank: int | None = None) -> np.ndarray:
    """Ginibre-distributed density matrix of the given rank (full by default)."""
    rank = dim if rank is None else rank
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    return rho / np.trace(rho).real


def random_povm(dim: int, n_outcomes: int, rng: np.random.Generator) -> np.ndarray:
    """``S^-1/2 A_i S^-1/2`` for random positive ``A_i`` with ``S = sum A_i``."""
    a = []
    for _ in range(n_outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        a.append(g @ g.conj().T)
    a = np.array(a)
    w, v = np.linalg.eigh(a.sum(axis=0))
    s_inv_half = (v / np.sqrt(w)) @ v.conj().T
    ops = s_inv_half @ a @ s_inv_half
    return 0.5 * (ops + np.swapaxes(ops, -1, -2).conj())


def random_binary_povm(dim: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Random ``(E, I - E)`` with ``0 <= E <= I``."""
    u = random_unitary(dim, rng)
    e = (u * rng.uniform(0.0, 1.0, dim)) @ u.conj().T
    e = 0.5 * (e + e.conj().T)
    return e, np.eye(dim) - e


def random_measure(
    knob_domain: KnobDomain,
    detector_domain: DetectorDomain,
    rng: np.random.Generator,
    distinct_rows: int | None = None,
) -> ParamProbMeasure:
    """Dirichlet rows; with ``distinct_rows`` the rows are drawn from a pool that size."""
    n, a = knob_domain.size, detector_domain.size
    if distinct_rows is None:
        rows = rng.dirichlet(np.ones(a), n)
    else:
        pool = rng.dirichlet(np.ones(a), distinct_rows)
        rows = pool[rng.integers(0, distinct_rows, n)]
    return ParamProbMeasure(knob_domain, detector_domain, rows)


def random_explanation(
    knob_domain: KnobDomain,
    detector_domain: DetectorDomain,
    dim: int,
    rng: np.random.Generator,
) -> Explanation:
    """Independent random state and POVM at every setting."""
    n, a = knob_domain.size, detector_domain.size
    rho = np.array([random_density(dim, rng, rank=int(rng.integers(1, dim + 1))) for _ in range(n)])
    povm = np.array([random_povm(dim, a, rng) for _ in range(n)])
    return Explanation(knob_domain, detector_domain, rho, povm)
