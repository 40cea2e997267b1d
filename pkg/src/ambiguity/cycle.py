"""Extending two explanations of the same measure until their results conflict.

Given explanations ``e`` and ``e'`` of one measure on a knob domain ``K``,
the knob domain grows to ``K | K_copy | B`` where ``K_copy`` is a renamed
copy of ``K`` and ``B`` is a two-setting knob.  At a full setting
``(k_state, k_meas, b)`` the state is ``rho(k_state)``.  At ``b0`` the POVM
is the original ``M(k_meas)``, so the diagonal ``(k, k, b0)`` reproduces
the original results.  At ``b1`` it is the Helstrom measurement for a chosen
pair ``(k1, k2)``.  That measurement reads off the trace distance of the pair,
so the two extended measures differ whenever the explanations disagree on it.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from .domains import Assignment, Knob, KnobDomain, combine_settings
from .errors import (
    DetectorTooSmall,
    GrowthCapExceeded,
    NoInequivalentPair,
    NotAnExplanation,
    PairInvalid,
)
from .explanations import explain_all_in_measurement, explain_all_in_state, verify_explains
from .measures import EPS_EQ, ParamProbMeasure, _half_l1, metdev_ppm
from .quantum import (
    Explanation,
    born,
    helstrom_povm,
    pairwise_trace_distances,
    trace_rule,
)

TOL_CONFLICT = 1e-6
VERIFY_TOL = 1e-9
COPY_SUFFIX = "#m"
B_LABELS = ("b0", "b1")
MAX_SETTINGS = 100_000


@dataclass(frozen=True)
class ExtendedDomain:
    base: KnobDomain
    copy: KnobDomain
    extra: KnobDomain
    copy_names: tuple[tuple[str, str], ...]  # (base name, copy name)

    @property
    def full(self) -> KnobDomain:
        return self.base | self.copy | self.extra

    @property
    def extra_name(self) -> str:
        return self.extra.names[0]

    def setting(self, k_state, k_meas, b: str) -> Assignment:
        rename = dict(self.copy_names)
        return combine_settings(
            Assignment(k_state),
            Assignment(k_meas).rename(rename),
            {self.extra_name: b},
        )

    def index_arrays(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """For each full setting: base index of the state part, base index of
        the measurement part, and the index of the extra setting."""
        full = self.full
        multi = np.unravel_index(np.arange(full.size), full.shape)
        axis = {name: i for i, name in enumerate(full.names)}
        copy_of = dict(self.copy_names)
        shape = self.base.shape
        if self.base:
            state = np.ravel_multi_index([multi[axis[n]] for n in self.base.names], shape)
            meas = np.ravel_multi_index(
                [multi[axis[copy_of[n]]] for n in self.base.names], shape
            )
        else:
            state = meas = np.zeros(full.size, dtype=int)
        return state, meas, multi[axis[self.extra_name]]


def _fresh_name(stem: str, taken: set[str]) -> str:
    if stem not in taken:
        return stem
    i = 2
    while f"{stem}{i}" in taken:
        i += 1
    return f"{stem}{i}"


def extend_domain(base: KnobDomain, suffix: str = COPY_SUFFIX) -> ExtendedDomain:
    """Build ``base | copy | B`` with fresh knob names for the copy and ``B``."""
    taken = set(base.names)
    i = 1
    while True:
        tag = suffix if i == 1 else f"{suffix}{i}"
        names = {n: n + tag for n in base.names}
        if not taken & set(names.values()):
            break
        i += 1
    copy = KnobDomain(Knob(names[k.name], k.settings) for k in base.knobs)
    extra_name = _fresh_name("B", taken | set(names.values()))
    extra = KnobDomain([Knob(extra_name, B_LABELS)])
    return ExtendedDomain(base, copy, extra, tuple(sorted(names.items())))


def _pair_indices(domain: KnobDomain, pair) -> tuple[int, int]:
    k1, k2 = pair
    if k1 not in domain or k2 not in domain:
        raise PairInvalid(f"pair {k1!r}, {k2!r} is not in {domain!r}")
    i, j = domain.index(k1), domain.index(k2)
    if i == j:
        raise PairInvalid("the two settings of the pair must differ")
    return i, j


def helstrom_stack(rho1, rho2, n_atoms: int) -> np.ndarray:
    """Binary Helstrom POVM on the first two atoms, zero on the rest."""
    if n_atoms < 2:
        raise DetectorTooSmall("need at least two atoms to place a binary POVM")
    e_plus, e_minus = helstrom_povm(rho1, rho2)
    out = np.zeros((n_atoms,) + e_plus.shape, dtype=complex)
    out[0] = e_plus
    out[1] = e_minus
    return out


def extend_explanation(e: Explanation, ext: ExtendedDomain, pair) -> Explanation:
    if e.knob_domain != ext.base:
        raise PairInvalid("explanation is not over the base of the extended domain")
    i, j = _pair_indices(e.knob_domain, pair)
    b1_ops = helstrom_stack(e.rho[i], e.rho[j], e.detector_domain.size)
    state, meas, b = ext.index_arrays()
    rho = e.rho[state]
    povm = np.where((b == 0)[:, None, None, None], e.povm[meas], b1_ops[None])
    return Explanation(ext.full, e.detector_domain, rho, povm)


@dataclass
class SideReport:
    """Checks on one extended explanation."""

    distance: float  # trace distance of the pair
    mu_hat: ParamProbMeasure
    envelope_exact: bool  # diagonal at b0 equals the original trace rule bit for bit
    envelope_gap: float  # ... and its distance from the given measure
    helstrom_atom_gap: float  # max over k_meas of | |p1(w*) - p2(w*)| - distance |
    helstrom_event_gap: float  # same with the sup over events


@dataclass
class CycleReport:
    pair: tuple[Assignment, Assignment]
    D: float
    D_prime: float
    metdev: float
    conflict: bool
    extended: ExtendedDomain
    first: SideReport
    second: SideReport
    tol_conflict: float = TOL_CONFLICT
    notes: list[str] = field(default_factory=list)

    @property
    def mu_hat(self) -> ParamProbMeasure:
        return self.first.mu_hat

    @property
    def mu_hat_prime(self) -> ParamProbMeasure:
        return self.second.mu_hat

    @property
    def gap(self) -> float:
        return abs(self.D - self.D_prime)


def _side(e: Explanation, ext: ExtendedDomain, mu: ParamProbMeasure, i: int, j: int) -> SideReport:
    pair = (ext.base.elements()[i], ext.base.elements()[j])
    e_hat = extend_explanation(e, ext, pair)
    mu_hat = trace_rule(e_hat)
    state, meas, b = ext.index_arrays()

    diag = np.flatnonzero((state == meas) & (b == 0))
    diag = diag[np.argsort(state[diag])]
    original = born(e.rho, e.povm)
    envelope = mu_hat.table[diag]
    exact = bool(np.array_equal(envelope, np.clip(original, 0.0, 1.0)))
    env_gap = float(_half_l1(envelope, mu.table).max())

    distance = float(pairwise_trace_distances(e.rho[[i, j]])[0, 1])
    atom_gap = event_gap = 0.0
    for m in range(ext.base.size):
        r1 = np.flatnonzero((state == i) & (meas == m) & (b == 1))[0]
        r2 = np.flatnonzero((state == j) & (meas == m) & (b == 1))[0]
        p1, p2 = mu_hat.table[r1], mu_hat.table[r2]
        atom_gap = max(atom_gap, abs(abs(p1[0] - p2[0]) - distance))
        event_gap = max(event_gap, abs(float(_half_l1(p1, p2)) - distance))
    return SideReport(distance, mu_hat, exact, env_gap, atom_gap, event_gap)


def run_cycle(
    mu: ParamProbMeasure,
    e: Explanation,
    e_prime: Explanation,
    pair: Sequence | None = None,
    tol_conflict: float = TOL_CONFLICT,
    verify_tol: float = VERIFY_TOL,
) -> CycleReport:
    """Extend both explanations around one pair of settings and compare.

    Without ``pair`` the pair with the largest trace-distance gap between the
    two explanations is used (first in enumeration order on ties).
    """
    for name, expl in (("first", e), ("second", e_prime)):
        check = verify_explains(expl, mu, verify_tol)
        if not check.ok:
            raise NotAnExplanation(
                f"{name} explanation misses the measure by {check.deviation!r} "
                f"at {check.setting!r}, {check.atom!r}"
            )
    gaps = np.abs(pairwise_trace_distances(e.rho) - pairwise_trace_distances(e_prime.rho))
    if gaps.size == 0 or gaps.max() <= tol_conflict:
        raise NoInequivalentPair(
            f"state metric deviation {float(gaps.max(initial=0.0))!r} <= {tol_conflict!r}"
        )
    if pair is None:
        upper = np.triu(gaps, 1)
        i, j = (int(x) for x in np.unravel_index(int(np.argmax(upper)), upper.shape))
    else:
        i, j = _pair_indices(mu.knob_domain, pair)

    ext = extend_domain(mu.knob_domain)
    first = _side(e, ext, mu, i, j)
    second = _side(e_prime, ext, mu, i, j)
    metdev = metdev_ppm(first.mu_hat, second.mu_hat)
    D, D_prime = first.distance, second.distance
    elems = mu.knob_domain.elements()
    report = CycleReport(
        pair=(elems[i], elems[j]),
        D=D,
        D_prime=D_prime,
        metdev=metdev,
        conflict=abs(D - D_prime) > tol_conflict,
        extended=ext,
        first=first,
        second=second,
        tol_conflict=tol_conflict,
    )
    if D < D_prime:
        report.notes.append("second explanation separates the pair better (D < D')")
    return report


def envelope_slice(report: CycleReport, which: str = "first") -> ParamProbMeasure:
    """The extended measure restricted to ``(k, k, b0)``, as a measure on ``K``."""
    side = report.first if which == "first" else report.second
    ext = report.extended
    rows = [side.mu_hat.row(ext.setting(k, k, B_LABELS[0])) for k in ext.base.elements()]
    return ParamProbMeasure(ext.base, side.mu_hat.detector_domain, rows)


REJECT_RULES = ("keep-first", "keep-second")


def iterate_cycle(
    mu: ParamProbMeasure,
    reject_rule: str = "keep-first",
    rounds: int = 1,
    first: tuple[Explanation, Explanation] | None = None,
    tol_conflict: float = TOL_CONFLICT,
    eps_eq: float = EPS_EQ,
    max_settings: int = MAX_SETTINGS,
) -> list[CycleReport]:
    """Repeat the cycle, each time adopting one extended measure as the new given one.

    ``reject_rule`` says which extended measure survives.  Rounds after the
    first (and the first too unless ``first`` is given) use the
    all-in-measurement and all-in-state explanations of the current measure.
    """
    if reject_rule not in REJECT_RULES:
        raise ValueError(f"reject_rule must be one of {REJECT_RULES}")
    if rounds < 1:
        raise ValueError("rounds must be at least 1")
    reports = []
    current = mu
    for r in range(rounds):
        grown = current.knob_domain.size ** 2 * len(B_LABELS)
        if grown > max_settings:
            raise GrowthCapExceeded(
                f"round {r + 1} would need {grown} settings (cap {max_settings})"
            )
        if r == 0 and first is not None:
            e, e_prime = first
        else:
            e = explain_all_in_measurement(current)
            e_prime = explain_all_in_state(current, eps_eq=eps_eq)
        report = run_cycle(current, e, e_prime, tol_conflict=tol_conflict)
        reports.append(report)
        current = report.mu_hat if reject_rule == "keep-first" else report.mu_hat_prime
    return reports
