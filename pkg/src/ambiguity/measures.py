"""Parametrized probability measures over finite knob and detector domains.

A :class:`ParamProbMeasure` stores one probability vector per knob setting,
indexed by the enumeration order of the two domains.  Events are subsets of
atoms, so the distance between two distributions (the sup over events of the
probability gap) reduces to half the L1 distance.

Distances are computed by summing the sorted absolute differences.  The
result therefore depends only on the multiset of per-atom gaps, which makes
it bit-for-bit invariant under relabeling the atoms.
"""

from __future__ import annotations

from collections.abc import Callable, Iterable, Mapping
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse.csgraph import connected_components

from .domains import (
    Assignment,
    DetectorDomain,
    Event,
    KnobDomain,
    combine_settings,
)
from .errors import (
    CannotDropAll,
    ChainAmbiguity,
    DomainMismatch,
    InvalidInput,
    KnobDomainMismatch,
    NotNormalized,
    UnknownDetector,
)

EPS_NORM = 1e-9
EPS_EQ = 1e-9


class ParamProbMeasure:
    """Map from (setting, atom) to a probability, normalized per setting.

    ``table[i, j]`` is the probability of atom ``detector_domain.elements()[j]``
    at setting ``knob_domain.elements()[i]``.  Entries must lie in [0, 1] and
    rows must sum to 1, both within ``eps_norm``; anything further off raises
    rather than being renormalized.  Rounding-level excursions below 0 or
    above 1 are clipped.
    """

    def __init__(
        self,
        knob_domain: KnobDomain,
        detector_domain: DetectorDomain,
        table,
        eps_norm: float = EPS_NORM,
    ):
        table = np.array(table, dtype=float)
        shape = (knob_domain.size, detector_domain.size)
        if table.shape != shape:
            raise DomainMismatch(f"table has shape {table.shape}, domains need {shape}")
        if not np.all(np.isfinite(table)):
            raise InvalidInput("probability table contains non-finite values")
        if table.min() < -eps_norm or table.max() > 1 + eps_norm:
            raise InvalidInput(
                f"probabilities outside [0, 1]: min {table.min()!r}, max {table.max()!r}"
            )
        sums = table.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > eps_norm)
        if bad.size:
            i = int(bad[0])
            raise NotNormalized(
                f"probabilities at setting {knob_domain.elements()[i]!r} sum to {sums[i]!r}"
            )
        table = np.clip(table, 0.0, 1.0)
        table.setflags(write=False)
        self.knob_domain = knob_domain
        self.detector_domain = detector_domain
        self.table = table

    @classmethod
    def from_entries(
        cls,
        knob_domain: KnobDomain,
        detector_domain: DetectorDomain,
        entries: Iterable[tuple[Mapping, Mapping, float]],
        eps_norm: float = EPS_NORM,
    ) -> ParamProbMeasure:
        """Build from ``(setting, atom, p)`` triples; missing pairs are 0."""
        table = np.zeros((knob_domain.size, detector_domain.size))
        for setting, atom, p in entries:
            table[knob_domain.index(setting), detector_domain.index(atom)] = p
        return cls(knob_domain, detector_domain, table, eps_norm)

    @classmethod
    def from_function(
        cls,
        knob_domain: KnobDomain,
        detector_domain: DetectorDomain,
        fn: Callable[[Assignment], Iterable[float]],
        eps_norm: float = EPS_NORM,
    ) -> ParamProbMeasure:
        rows = [list(fn(k)) for k in knob_domain.elements()]
        return cls(knob_domain, detector_domain, rows, eps_norm)

    @property
    def settings(self) -> tuple[Assignment, ...]:
        return self.knob_domain.elements()

    @property
    def atoms(self) -> tuple[Assignment, ...]:
        return self.detector_domain.elements()

    def row(self, setting) -> np.ndarray:
        return self.table[self.knob_domain.index(setting)]

    def prob(self, setting, atom) -> float:
        return float(self.table[self.knob_domain.index(setting), self.detector_domain.index(atom)])

    def __eq__(self, other):
        if not isinstance(other, ParamProbMeasure):
            return NotImplemented
        return (
            self.knob_domain == other.knob_domain
            and self.detector_domain == other.detector_domain
            and np.array_equal(self.table, other.table)
        )

    __hash__ = None

    def __repr__(self):
        return f"ParamProbMeasure({self.knob_domain!r}, {self.detector_domain!r})"


def event_prob(mu: ParamProbMeasure, setting, event) -> float:
    """Probability of an event (``Event`` or iterable of atoms) at one setting."""
    if isinstance(event, Event):
        if event.domain != mu.detector_domain:
            raise DomainMismatch("event belongs to a different detector domain")
        idx = event.indices()
    else:
        idx = sorted({mu.detector_domain.index(a) for a in event})
    row = mu.row(setting)
    return float(row[idx].sum()) if idx else 0.0


def _half_l1(p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Half L1 along the last axis, summed in sorted order."""
    gaps = np.sort(np.abs(p - q), axis=-1)
    return 0.5 * gaps.sum(axis=-1)


def d_uniform(nu, nu_prime, eps_norm: float = EPS_NORM) -> float:
    """Sup over events of ``nu(ev) - nu_prime(ev)`` for two atom distributions."""
    p = np.asarray(nu, dtype=float)
    q = np.asarray(nu_prime, dtype=float)
    if p.shape != q.shape or p.ndim != 1:
        raise DomainMismatch(f"distributions have shapes {p.shape} and {q.shape}")
    for v in (p, q):
        if abs(v.sum() - 1.0) > eps_norm or v.min() < -eps_norm:
            raise NotNormalized(f"not a probability vector: {v.tolist()}")
    return float(_half_l1(p, q))


def pairwise_distances(rows: np.ndarray) -> np.ndarray:
    """Symmetric matrix of ``d_uniform`` between all pairs of rows."""
    rows = np.asarray(rows, dtype=float)
    n = rows.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        out[i] = _half_l1(rows[i][None, :], rows)
    # enforce exact symmetry; both triangles hold the same sorted sums already
    return np.minimum(out, out.T)


def distance_matrix(mu: ParamProbMeasure) -> np.ndarray:
    return pairwise_distances(mu.table)


def uniform_metric_ppm(mu1: ParamProbMeasure, mu2: ParamProbMeasure) -> float:
    """Sup over settings and events of ``mu1 - mu2``."""
    if mu1.knob_domain != mu2.knob_domain or mu1.detector_domain != mu2.detector_domain:
        raise DomainMismatch("uniform metric needs identical knob and detector domains")
    return float(_half_l1(mu1.table, mu2.table).max())


def metric_deviation(dist1: np.ndarray, dist2: np.ndarray) -> float:
    """Largest gap between two pairwise-distance tables on the same index set."""
    dist1 = np.asarray(dist1)
    dist2 = np.asarray(dist2)
    if dist1.shape != dist2.shape:
        raise KnobDomainMismatch(f"distance tables {dist1.shape} vs {dist2.shape}")
    if dist1.size == 0:
        return 0.0
    return float(np.abs(dist1 - dist2).max())


def _joint_representatives(*tables: np.ndarray) -> np.ndarray:
    """Indices of settings with distinct joint rows across all tables.

    Pairwise-distance sups only depend on which distinct rows occur, so they
    can be evaluated on these representatives alone.
    """
    parts = []
    for t in tables:
        t = t.reshape(t.shape[0], -1)
        parts.extend([t.real, t.imag] if np.iscomplexobj(t) else [t])
    flat = np.hstack(parts)
    _, first = np.unique(flat, axis=0, return_index=True)
    return np.sort(first)


def metdev_ppm(mu: ParamProbMeasure, mu_prime: ParamProbMeasure) -> float:
    """Metric deviation of two measures sharing a knob domain.

    The detector domains may differ.
    """
    if mu.knob_domain != mu_prime.knob_domain:
        raise KnobDomainMismatch("metric deviation needs a common knob domain")
    reps = _joint_representatives(mu.table, mu_prime.table)
    return metric_deviation(
        pairwise_distances(mu.table[reps]),
        pairwise_distances(mu_prime.table[reps]),
    )


@dataclass
class PartitionWithMetric:
    """Quotient of a knob domain by equal outcome distributions.

    ``classes[i]`` lists the settings of class ``i`` in enumeration order;
    its first entry is the representative.  ``distances`` holds the induced
    metric between classes.  For a finite domain the induced topology is
    exactly the collection of unions of classes, see :meth:`is_open`.
    """

    domain: KnobDomain
    classes: tuple[tuple[Assignment, ...], ...]
    distances: np.ndarray
    labels: np.ndarray
    eps_eq: float = EPS_EQ
    # (class_i, class_j, distance) for cross-class pairs closer than 2 * eps_eq
    ambiguous_pairs: list[tuple[int, int, float]] = field(default_factory=list)

    @property
    def representatives(self) -> tuple[Assignment, ...]:
        return tuple(c[0] for c in self.classes)

    def __len__(self):
        return len(self.classes)

    def class_of(self, setting) -> int:
        return int(self.labels[self.domain.index(setting)])

    def quotient_distance(self, k1, k2) -> float:
        return float(self.distances[self.class_of(k1), self.class_of(k2)])

    def is_open(self, subset: Iterable) -> bool:
        """Whether a set of settings is a union of classes."""
        members = {self.domain.index(k) for k in subset}
        touched = {int(self.labels[i]) for i in members}
        return all(
            self.domain.index(k) in members for c in touched for k in self.classes[c]
        )

    def same_as(self, other: PartitionWithMetric, atol: float = 0.0) -> bool:
        return (
            self.domain == other.domain
            and np.array_equal(self.labels, other.labels)
            and self.distances.shape == other.distances.shape
            and bool(np.all(np.abs(self.distances - other.distances) <= atol))
        )


def cluster(dist: np.ndarray, eps_eq: float) -> tuple[np.ndarray, list[tuple[int, int, float]]]:
    """Single-linkage clusters of points within ``eps_eq``.

    Returns class labels numbered by first member and the cross-class pairs
    closer than ``2 * eps_eq``.  Raises :class:`ChainAmbiguity` when chaining
    puts two points more than ``eps_eq`` apart into one class.
    """
    n = dist.shape[0]
    _, raw = connected_components(dist <= eps_eq, directed=False)
    order: dict[int, int] = {}
    labels = np.empty(n, dtype=int)
    for i, r in enumerate(raw):
        labels[i] = order.setdefault(int(r), len(order))
    same = labels[:, None] == labels[None, :]
    if n and dist[same].max() > eps_eq:
        i, j = np.unravel_index(np.argmax(np.where(same, dist, -1.0)), dist.shape)
        raise ChainAmbiguity(
            f"points {i} and {j} chain into one class at distance {dist[i, j]!r} > {eps_eq!r}"
        )
    close = []
    for i, j in zip(*np.nonzero(~same & (dist < 2 * eps_eq))):
        a, b = int(labels[i]), int(labels[j])
        if a < b:
            close.append((a, b, float(dist[i, j])))
    return labels, sorted(set(close))


def _folded_rows(mu: ParamProbMeasure, fold: KnobDomain | None):
    """Rows grouped by the non-folded knobs: shape (n_index, n_fold, n_atoms)."""
    if fold is None or not fold:
        return mu.knob_domain, mu.table[:, None, :]
    if not fold <= mu.knob_domain:
        raise KnobDomainMismatch(f"{fold!r} is not part of {mu.knob_domain!r}")
    index_domain = mu.knob_domain - fold
    rows = np.empty((index_domain.size, fold.size, mu.detector_domain.size))
    for i, a in enumerate(index_domain.elements()):
        for j, b in enumerate(fold.elements()):
            rows[i, j] = mu.table[mu.knob_domain.index(combine_settings(a, b))]
    return index_domain, rows


def induced_partition(
    mu: ParamProbMeasure,
    eps_eq: float = EPS_EQ,
    fold: KnobDomain | None = None,
) -> PartitionWithMetric:
    """Partition of settings into classes with equal outcome distributions.

    With ``fold`` given, the folded knobs are absorbed into the point being
    compared: each remaining setting ``a`` maps to the whole family of rows
    ``mu(a, b)`` over ``b`` in ``fold``, with the sup over ``b`` as distance.
    """
    domain, rows = _folded_rows(mu, fold)
    flat = rows.reshape(rows.shape[0], -1)
    _, first, inverse = np.unique(flat, axis=0, return_index=True, return_inverse=True)
    inverse = inverse.reshape(-1)
    # distinct rows in order of first appearance
    rank = np.argsort(first, kind="stable")
    distinct_of = np.empty_like(rank)
    distinct_of[rank] = np.arange(rank.size)
    distinct = rows[first[rank]]

    n = distinct.shape[0]
    dist = np.zeros((n, n))
    for i in range(n):
        dist[i] = _half_l1(distinct[i][None], distinct).max(axis=-1)
    dist = np.minimum(dist, dist.T)
    group_labels, ambiguous = cluster(dist, eps_eq)

    labels = group_labels[distinct_of[inverse]]
    elements = domain.elements()
    classes = tuple(
        tuple(elements[i] for i in np.flatnonzero(labels == c))
        for c in range(int(labels.max()) + 1)
    )
    reps = np.array([domain.index(c[0]) for c in classes])
    rep_rows = rows[reps]
    c = len(classes)
    class_dist = np.zeros((c, c))
    for i in range(c):
        class_dist[i] = _half_l1(rep_rows[i][None], rep_rows).max(axis=-1)
    class_dist = np.minimum(class_dist, class_dist.T)
    return PartitionWithMetric(domain, classes, class_dist, labels, eps_eq, ambiguous)


def lemma_metdev_zero(
    mu: ParamProbMeasure, mu_prime: ParamProbMeasure, eps_eq: float = EPS_EQ
) -> bool:
    """Whether both measures induce the same partition and quotient metric."""
    if mu.knob_domain != mu_prime.knob_domain:
        raise KnobDomainMismatch("comparison needs a common knob domain")
    p1 = induced_partition(mu, eps_eq)
    p2 = induced_partition(mu_prime, eps_eq)
    return p1.same_as(p2, atol=eps_eq)


def marginalize(mu: ParamProbMeasure, drop: Iterable[str]) -> ParamProbMeasure:
    """Sum out the named detectors."""
    drop = set(drop)
    names = mu.detector_domain.names
    unknown = drop - set(names)
    if unknown:
        raise UnknownDetector(f"no detectors named {sorted(unknown)}")
    if not drop:
        return mu
    if drop == set(names):
        raise CannotDropAll("at least one detector must remain")
    dropped = DetectorDomain(mu.detector_domain.factor(n) for n in drop)
    kept = mu.detector_domain - dropped
    cube = mu.table.reshape((mu.knob_domain.size,) + mu.detector_domain.shape)
    axes = tuple(1 + names.index(n) for n in sorted(drop))
    table = cube.sum(axis=axes).reshape(mu.knob_domain.size, kept.size)
    return ParamProbMeasure(mu.knob_domain, kept, table)
