"""Several explanations for one statement of results.

Three canonical members of the inverse image of a measure under the trace
rule are built here.  They span the range of state distinguishability:

* :func:`explain_all_in_measurement` puts every setting dependence into the
  POVM on a one-dimensional space, so all states coincide;
* :func:`explain_all_in_state` gives each class of equal rows its own basis
  state, so distinct classes are perfectly distinguishable;
* :func:`explain_sqrt` uses amplitude vectors ``sqrt(mu(k, .))`` with a fixed
  projective measurement, giving intermediate trace distances.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domains import Assignment, KnobDomain, combine_settings
from .errors import DomainMismatch, FactorizationInvalid
from .measures import EPS_EQ, ParamProbMeasure, _half_l1, induced_partition
from .quantum import Explanation, born, projector_basis


@dataclass(frozen=True)
class Factorization:
    """Split of a knob domain into state-side and measurement-side knobs."""

    state_knobs: KnobDomain
    meas_knobs: KnobDomain

    @classmethod
    def from_names(cls, domain: KnobDomain, state_names) -> Factorization:
        state_names = set(state_names)
        unknown = state_names - set(domain.names)
        if unknown:
            raise FactorizationInvalid(f"unknown knobs {sorted(unknown)}")
        state = KnobDomain(k for k in domain.knobs if k.name in state_names)
        return cls(state, domain - state)

    def check(self, domain: KnobDomain) -> None:
        if (self.state_knobs & self.meas_knobs) or (self.state_knobs | self.meas_knobs) != domain:
            raise FactorizationInvalid(
                f"{self.state_knobs!r} and {self.meas_knobs!r} do not partition {domain!r}"
            )

    def split(self, setting: Assignment) -> tuple[Assignment, Assignment]:
        return (
            setting.restrict(self.state_knobs.names),
            setting.restrict(self.meas_knobs.names),
        )


def explain_all_in_measurement(mu: ParamProbMeasure) -> Explanation:
    n, a = mu.table.shape
    rho = np.ones((n, 1, 1), dtype=complex)
    povm = mu.table.astype(complex).reshape(n, a, 1, 1)
    return Explanation(mu.knob_domain, mu.detector_domain, rho, povm)


def explain_all_in_state(
    mu: ParamProbMeasure,
    factorization: Factorization | None = None,
    eps_eq: float = EPS_EQ,
) -> Explanation:
    """One orthonormal basis state per class of settings with equal rows.

    Without a factorization the classes are those of :func:`induced_partition`
    and the POVM is setting independent.  With one, classes are formed over
    state-side settings (``a ~ a'`` when ``mu(a, b) = mu(a', b)`` for every
    measurement-side ``b``) and the POVM depends only on ``b``.
    """
    kd = mu.knob_domain
    if factorization is None:
        part = induced_partition(mu, eps_eq)
        c = len(part)
        reps = [kd.index(r) for r in part.representatives]
        diag = mu.table[reps].T  # (atoms, classes)
        povm_one = np.zeros((mu.detector_domain.size, c, c), dtype=complex)
        idx = np.arange(c)
        povm_one[:, idx, idx] = diag
        povm = np.broadcast_to(povm_one, (kd.size,) + povm_one.shape)
        labels = part.labels
    else:
        factorization.check(kd)
        part = induced_partition(mu, eps_eq, fold=factorization.meas_knobs)
        c = len(part)
        meas = factorization.meas_knobs
        povm_b = np.zeros((meas.size, mu.detector_domain.size, c, c), dtype=complex)
        for bi, b in enumerate(meas.elements()):
            for ci, rep in enumerate(part.representatives):
                povm_b[bi, :, ci, ci] = mu.row(combine_settings(rep, b))
        labels = np.empty(kd.size, dtype=int)
        b_index = np.empty(kd.size, dtype=int)
        for i, k in enumerate(kd.elements()):
            a_part, b_part = factorization.split(k)
            labels[i] = part.class_of(a_part)
            b_index[i] = meas.index(b_part)
        povm = povm_b[b_index]
    rho = np.zeros((kd.size, c, c), dtype=complex)
    rho[np.arange(kd.size), labels, labels] = 1.0
    return Explanation(kd, mu.detector_domain, rho, povm)


def sqrt_amplitudes(mu: ParamProbMeasure) -> np.ndarray:
    # rounding can leave entries a hair below zero
    return np.sqrt(np.clip(mu.table, 0.0, None))


def explain_sqrt(mu: ParamProbMeasure) -> Explanation:
    amps = sqrt_amplitudes(mu).astype(complex)
    rho = np.einsum("ki,kj->kij", amps, amps.conj())
    n, a = mu.table.shape
    povm = np.broadcast_to(projector_basis(a), (n, a, a, a))
    return Explanation(mu.knob_domain, mu.detector_domain, rho, povm)


def bhattacharyya(p, q) -> float:
    return float(np.sqrt(np.clip(p, 0, None) * np.clip(q, 0, None)).sum())


def sqrt_trace_distance(p, q) -> float:
    """Closed form for the trace distance between two ``explain_sqrt`` states."""
    sp = np.sqrt(np.clip(p, 0, None))
    sq = np.sqrt(np.clip(q, 0, None))
    # 1 - F from the Hellinger form avoids cancellation when F is near 1
    one_minus_f = min(0.5 * float(((sp - sq) ** 2).sum()), 1.0)
    return float(np.sqrt(one_minus_f * (2.0 - one_minus_f)))


class VerifyReport(NamedTuple):
    ok: bool
    deviation: float  # sup over settings and events
    max_entry_gap: float
    setting: Assignment
    atom: Assignment


def verify_explains(e: Explanation, mu: ParamProbMeasure, tol: float = 1e-10) -> VerifyReport:
    """Compare the measure implied by ``e`` with ``mu``.

    The returned location is the (setting, atom) cell with the largest gap.
    Validation of the implied measure is skipped so badly broken
    explanations still get a report.
    """
    if e.knob_domain != mu.knob_domain or e.detector_domain != mu.detector_domain:
        raise DomainMismatch("explanation and measure are over different domains")
    implied = born(e.rho, e.povm)
    # sup over events of |implied - mu|; equals half L1 only when both rows sum to 1
    diff = np.sort(implied - mu.table, axis=-1)
    pos = np.where(diff > 0, diff, 0.0).sum(axis=-1)
    neg = -np.where(diff < 0, diff, 0.0)[:, ::-1].sum(axis=-1)
    deviation = float(np.maximum(pos, neg).max())
    gaps = np.abs(implied - mu.table)
    i, j = np.unravel_index(int(np.argmax(gaps)), gaps.shape)
    return VerifyReport(
        deviation <= tol,
        deviation,
        float(gaps[i, j]),
        mu.knob_domain.elements()[i],
        mu.detector_domain.elements()[j],
    )


class InequivalenceVerdict(NamedTuple):
    possible: bool
    witness: tuple[Assignment, Assignment] | None
    # sup over measurement settings of the row distance for the witness pair
    witness_distance: float | None


def check_inequivalence_condition(
    mu: ParamProbMeasure, factorization: Factorization, eps_eq: float = EPS_EQ
) -> InequivalenceVerdict:
    """Whether metrically inequivalent state assignments can explain ``mu``.

    They are ruled out only when every pair of state-side settings is
    perfectly separated (distance 1 within ``eps_eq``) by some
    measurement-side setting.  Otherwise the first pair lacking such a
    separating setting is returned as witness.
    """
    kd = mu.knob_domain
    factorization.check(kd)
    a_dom, b_dom = factorization.state_knobs, factorization.meas_knobs
    a_elems = a_dom.elements()
    rows = np.array(
        [[mu.row(combine_settings(a, b)) for b in b_dom.elements()] for a in a_elems]
    )
    for i in range(len(a_elems)):
        for j in range(i + 1, len(a_elems)):
            best = float(_half_l1(rows[i], rows[j]).max())
            if best < 1.0 - eps_eq:
                return InequivalenceVerdict(True, (a_elems[i], a_elems[j]), best)
    return InequivalenceVerdict(False, None, None)


def canonical_explanations(mu: ParamProbMeasure, eps_eq: float = EPS_EQ) -> dict[str, Explanation]:
    return {
        "measurement": explain_all_in_measurement(mu),
        "state": explain_all_in_state(mu, eps_eq=eps_eq),
        "sqrt": explain_sqrt(mu),
    }
