"""Finite-dimensional operator layer: states, POVMs and explanations.

Operators are plain complex ``numpy`` arrays.  An :class:`Explanation` stacks
them per knob setting: ``rho`` has shape ``(n_settings, d, d)`` and ``povm``
has shape ``(n_settings, n_atoms, d, d)``, both in domain enumeration order.
All eigen-decompositions go through ``numpy.linalg.eigh``/``eigvalsh``.
"""

from __future__ import annotations

import itertools
from collections.abc import Callable
from typing import NamedTuple

import numpy as np

from .domains import Assignment, DetectorDomain, KnobDomain
from .errors import DimMismatch, InvalidOperator, KnobDomainMismatch, PairInvalid
from .measures import ParamProbMeasure, _half_l1, _joint_representatives, metric_deviation

EPS_PSD = 1e-9
EPS_TRACE = 1e-9
EPS_COMPLETE = 1e-9
# events are enumerated exhaustively up to this many atoms
EXHAUSTIVE_MAX_ATOMS = 12


def herm_tolerance(a: np.ndarray) -> float:
    return 1e-12 * (float(np.abs(a).max(initial=0.0)) + 1.0)


def is_hermitian(a) -> bool:
    a = np.asarray(a)
    return a.ndim >= 2 and a.shape[-1] == a.shape[-2] and bool(
        np.all(np.abs(a - np.swapaxes(a, -1, -2).conj()) <= herm_tolerance(a))
    )


def _hermitize(a: np.ndarray) -> np.ndarray:
    return 0.5 * (a + np.swapaxes(a, -1, -2).conj())


def check_density(rho, eps_psd: float = EPS_PSD) -> np.ndarray:
    """Validate one or a stack of density matrices; returns a complex copy."""
    rho = np.array(rho, dtype=complex)
    if rho.ndim < 2 or rho.shape[-1] != rho.shape[-2]:
        raise InvalidOperator(f"density operator must be square, got shape {rho.shape}")
    if not is_hermitian(rho):
        raise InvalidOperator("density operator is not hermitian")
    rho = _hermitize(rho)
    low = np.linalg.eigvalsh(rho).min(axis=-1)
    if np.any(low < -eps_psd):
        raise InvalidOperator(f"density operator has eigenvalue {low.min()!r} < 0")
    tr = np.trace(rho, axis1=-2, axis2=-1).real
    if np.any(np.abs(tr - 1.0) > EPS_TRACE):
        raise InvalidOperator(f"density operator has trace {tr.ravel()[np.argmax(np.abs(tr - 1).ravel())]!r}")
    return rho


def check_povm(ops, eps_psd: float = EPS_PSD) -> np.ndarray:
    """Validate a stack ``(..., n_atoms, d, d)`` of detection operators."""
    ops = np.array(ops, dtype=complex)
    if ops.ndim < 3 or ops.shape[-1] != ops.shape[-2]:
        raise InvalidOperator(f"POVM must be a stack of square matrices, got {ops.shape}")
    if not is_hermitian(ops):
        raise InvalidOperator("detection operator is not hermitian")
    ops = _hermitize(ops)
    low = np.linalg.eigvalsh(ops).min(axis=-1)
    if np.any(low < -eps_psd):
        raise InvalidOperator(f"detection operator has eigenvalue {low.min()!r} < 0")
    total = ops.sum(axis=-3)
    gap = np.abs(total - np.eye(ops.shape[-1])).max()
    if gap > EPS_COMPLETE:
        raise InvalidOperator(f"detection operators sum to identity only within {gap!r}")
    return ops


def born(rho: np.ndarray, povm: np.ndarray) -> np.ndarray:
    """``Tr[rho M_a]`` for every atom, broadcasting over leading setting axes."""
    return np.einsum("...ij,...aji->...a", rho, povm, optimize=False).real


class Explanation:
    """A Hilbert-space dimension with a density operator and a POVM per setting."""

    def __init__(
        self,
        knob_domain: KnobDomain,
        detector_domain: DetectorDomain,
        rho,
        povm,
        validate: bool = True,
    ):
        rho = np.asarray(rho, dtype=complex)
        povm = np.asarray(povm, dtype=complex)
        n, a = knob_domain.size, detector_domain.size
        if rho.ndim != 3 or rho.shape[0] != n:
            raise DimMismatch(f"rho stack has shape {rho.shape}, expected ({n}, d, d)")
        d = rho.shape[1]
        if povm.shape != (n, a, d, d):
            raise DimMismatch(f"povm stack has shape {povm.shape}, expected {(n, a, d, d)}")
        if validate:
            rho = check_density(rho)
            povm = check_povm(povm)
        rho.setflags(write=False)
        povm.setflags(write=False)
        self.knob_domain = knob_domain
        self.detector_domain = detector_domain
        self.rho = rho
        self.povm = povm

    @classmethod
    def from_maps(
        cls,
        knob_domain: KnobDomain,
        detector_domain: DetectorDomain,
        rho_fn: Callable[[Assignment], np.ndarray],
        povm_fn: Callable[[Assignment, Assignment], np.ndarray],
    ) -> Explanation:
        settings = knob_domain.elements()
        atoms = detector_domain.elements()
        rho = np.array([rho_fn(k) for k in settings], dtype=complex)
        povm = np.array([[povm_fn(k, w) for w in atoms] for k in settings], dtype=complex)
        return cls(knob_domain, detector_domain, rho, povm)

    @property
    def dim(self) -> int:
        return self.rho.shape[1]

    def rho_of(self, setting) -> np.ndarray:
        return self.rho[self.knob_domain.index(setting)]

    def povm_of(self, setting) -> np.ndarray:
        return self.povm[self.knob_domain.index(setting)]

    def operator(self, setting, atom) -> np.ndarray:
        return self.povm[self.knob_domain.index(setting), self.detector_domain.index(atom)]

    def __repr__(self):
        return f"Explanation(dim={self.dim}, {self.knob_domain!r}, {self.detector_domain!r})"


def trace_rule(e: Explanation) -> ParamProbMeasure:
    return ParamProbMeasure(e.knob_domain, e.detector_domain, born(e.rho, e.povm))


def trace_distance(rho1, rho2) -> float:
    rho1 = np.asarray(rho1)
    rho2 = np.asarray(rho2)
    if rho1.shape != rho2.shape:
        raise DimMismatch(f"states have shapes {rho1.shape} and {rho2.shape}")
    eig = np.linalg.eigvalsh(_hermitize(rho1 - rho2))
    return float(0.5 * np.sort(np.abs(eig)).sum())


def op_norm(a) -> float:
    """Operator norm of a hermitian matrix (largest absolute eigenvalue)."""
    a = np.asarray(a)
    if a.size == 0:
        return 0.0
    return float(np.abs(np.linalg.eigvalsh(_hermitize(a))).max())


def pairwise_trace_distances(rhos: np.ndarray) -> np.ndarray:
    rhos = np.asarray(rhos)
    n = rhos.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        eig = np.linalg.eigvalsh(_hermitize(rhos[i][None] - rhos))
        out[i] = 0.5 * np.sort(np.abs(eig), axis=-1).sum(axis=-1)
    np.fill_diagonal(out, 0.0)
    return 0.5 * (out + out.T)


def _stack(x, attr: str):
    """Accept an Explanation or a bare stacked array."""
    if isinstance(x, Explanation):
        return x.knob_domain, getattr(x, attr)
    return None, np.asarray(x)


def _same_knobs(d1, d2, n1: int, n2: int):
    if d1 is not None and d2 is not None and d1 != d2:
        raise KnobDomainMismatch("metric deviation needs a common knob domain")
    if n1 != n2:
        raise KnobDomainMismatch(f"{n1} settings vs {n2} settings")


def metdev_density(e1, e2) -> float:
    """Metric deviation between two parametrized density operators.

    The Hilbert-space dimensions may differ.
    """
    d1, r1 = _stack(e1, "rho")
    d2, r2 = _stack(e2, "rho")
    _same_knobs(d1, d2, r1.shape[0], r2.shape[0])
    reps = _joint_representatives(r1, r2)
    return metric_deviation(
        pairwise_trace_distances(r1[reps]), pairwise_trace_distances(r2[reps])
    )


def event_sup_method(n_atoms: int) -> str:
    return "exhaustive" if n_atoms <= EXHAUSTIVE_MAX_ATOMS else "heuristic"


def _subset_indicator(n: int) -> np.ndarray:
    return np.array(list(itertools.product((0.0, 1.0), repeat=n)))


def event_sup_norm(delta: np.ndarray) -> float:
    """Sup over events of the operator norm of summed atom differences.

    ``delta`` has shape ``(n_atoms, d, d)``.  Small atom sets are enumerated
    exhaustively.  Larger ones fall back to single atoms plus, for each
    eigenvector ``v`` of a single-atom difference, the events collecting the
    atoms with ``<v|delta_a|v>`` positive or negative; this is a lower bound.
    """
    delta = np.asarray(delta)
    n = delta.shape[0]
    if n == 0:
        return 0.0
    if n <= EXHAUSTIVE_MAX_ATOMS:
        sums = np.einsum("sa,aij->sij", _subset_indicator(n), delta)
        return float(np.abs(np.linalg.eigvalsh(_hermitize(sums))).max())
    best = max(op_norm(d) for d in delta)
    _, vecs = np.linalg.eigh(_hermitize(delta))
    for a in range(n):
        for v in vecs[a].T:
            weights = np.einsum("i,aij,j->a", v.conj(), delta, v).real
            for mask in (weights > 0, weights < 0):
                if mask.any():
                    best = max(best, op_norm(delta[mask].sum(axis=0)))
    return best


def povm_distance(m1: np.ndarray, m2: np.ndarray) -> float:
    """Uniform operator-norm distance between two POVMs on the same space."""
    m1 = np.asarray(m1)
    m2 = np.asarray(m2)
    if m1.shape != m2.shape:
        raise DimMismatch(f"POVMs have shapes {m1.shape} and {m2.shape}")
    return event_sup_norm(m1 - m2)


def pairwise_povm_distances(povms: np.ndarray) -> np.ndarray:
    n = povms.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(i + 1, n):
            out[i, j] = out[j, i] = povm_distance(povms[i], povms[j])
    return out


def metdev_povm(e1, e2) -> float:
    """Metric deviation between two parametrized POVMs.

    Hilbert spaces and detector domains may both differ.
    """
    d1, m1 = _stack(e1, "povm")
    d2, m2 = _stack(e2, "povm")
    _same_knobs(d1, d2, m1.shape[0], m2.shape[0])
    reps = _joint_representatives(m1, m2)
    return metric_deviation(
        pairwise_povm_distances(m1[reps]), pairwise_povm_distances(m2[reps])
    )


def helstrom_povm(rho1, rho2) -> tuple[np.ndarray, np.ndarray]:
    """Optimal binary POVM ``(E_plus, E_minus)`` for telling ``rho1`` from ``rho2``.

    ``E_plus`` projects onto the strictly positive eigenspace of
    ``rho1 - rho2``; eigenvalues within ``1e-12 * max|lambda|`` of zero go to
    ``E_minus``.
    """
    rho1 = np.asarray(rho1, dtype=complex)
    rho2 = np.asarray(rho2, dtype=complex)
    if rho1.shape != rho2.shape:
        raise DimMismatch(f"states have shapes {rho1.shape} and {rho2.shape}")
    lam, vecs = np.linalg.eigh(_hermitize(rho1 - rho2))
    cut = 1e-12 * float(np.abs(lam).max(initial=0.0))
    pos = vecs[:, lam > cut]
    e_plus = pos @ pos.conj().T
    e_minus = np.eye(rho1.shape[0], dtype=complex) - e_plus
    return e_plus, e_minus


def helstrom_error(rho1, rho2) -> float:
    """Minimum error probability for equal priors."""
    return min(max(0.5 * (1.0 - trace_distance(rho1, rho2)), 0.0), 0.5)


def success_value(e_plus, e_minus, rho1, rho2) -> float:
    """``Tr[E+ rho1] + Tr[E- rho2]``, twice the success probability."""
    return float(np.trace(e_plus @ rho1).real + np.trace(e_minus @ rho2).real)


class BoundCheck(NamedTuple):
    lhs: float
    rhs: float
    holds: bool
    method: str


def results_bound_check(e: Explanation, k1, k2, slack: float = 1e-9) -> BoundCheck:
    """Check that an outcome-distribution gap is covered by state and POVM gaps.

    ``lhs`` is the distance between the implied outcome distributions at the
    two settings; ``rhs`` is the trace distance of the states plus the
    event-sup operator-norm distance of the POVMs.
    """
    try:
        i = e.knob_domain.index(k1)
        j = e.knob_domain.index(k2)
    except Exception as exc:
        raise PairInvalid(str(exc)) from None
    p = born(e.rho[[i, j]], e.povm[[i, j]])
    lhs = float(_half_l1(p[0], p[1]))
    rhs = trace_distance(e.rho[i], e.rho[j]) + povm_distance(e.povm[i], e.povm[j])
    return BoundCheck(lhs, rhs, lhs <= rhs + slack, event_sup_method(e.detector_domain.size))


def pure_state(vec) -> np.ndarray:
    v = np.asarray(vec, dtype=complex)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def projector_basis(dim: int) -> np.ndarray:
    """Stack of the computational-basis projectors, shape ``(dim, dim, dim)``."""
    out = np.zeros((dim, dim, dim), dtype=complex)
    for i in range(dim):
        out[i, i, i] = 1.0
    return out
