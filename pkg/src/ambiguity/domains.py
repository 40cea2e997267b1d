"""Knob and detector domains as unordered products of named finite sets.

A domain is a set of named factors (knobs or detectors).  Factors are
identified by name; two factors with the same name must carry the same label
list, otherwise the operation raises :class:`NameClash`.  Domains form a
distributive lattice under ``|`` (join), ``&`` (meet) and ``<=``; ``-`` drops
the factors of the right operand.

Elements of a domain are :class:`Assignment` objects mapping every factor
name to one of its labels.  They are enumerated in a fixed order: factors
sorted by name, labels in their declared order, last factor varying fastest.
"""

from __future__ import annotations

import itertools
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass
from functools import cached_property, reduce

from .errors import DomainMismatch, NameClash, OverlappingDomains


def _check_labels(kind: str, name: str, labels: tuple[str, ...]) -> None:
    if not isinstance(name, str) or not name:
        raise ValueError(f"{kind} name must be a nonempty string, got {name!r}")
    if len(labels) == 0:
        raise ValueError(f"{kind} {name!r} needs at least one label")
    if len(set(labels)) != len(labels):
        raise ValueError(f"{kind} {name!r} has repeated labels: {list(labels)}")
    for label in labels:
        if not isinstance(label, str):
            raise ValueError(f"{kind} {name!r}: labels must be strings, got {label!r}")


@dataclass(frozen=True)
class Knob:
    name: str
    settings: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "settings", tuple(self.settings))
        _check_labels("knob", self.name, self.settings)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.settings


@dataclass(frozen=True)
class Detector:
    name: str
    outcomes: tuple[str, ...]

    def __post_init__(self):
        object.__setattr__(self, "outcomes", tuple(self.outcomes))
        _check_labels("detector", self.name, self.outcomes)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.outcomes


class Assignment(Mapping):
    """Immutable, hashable map from factor name to label."""

    __slots__ = ("_items", "_hash")

    def __init__(self, mapping: Mapping[str, str] | Iterable[tuple[str, str]] = ()):
        items = dict(mapping)
        self._items = tuple(sorted(items.items()))
        self._hash = hash(self._items)

    def __getitem__(self, name):
        for key, value in self._items:
            if key == name:
                return value
        raise KeyError(name)

    def __iter__(self):
        return (key for key, _ in self._items)

    def __len__(self):
        return len(self._items)

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if isinstance(other, Assignment):
            return self._items == other._items
        if isinstance(other, Mapping):
            return dict(self._items) == dict(other)
        return NotImplemented

    def __repr__(self):
        body = ", ".join(f"{k}:{v}" for k, v in self._items)
        return "{" + body + "}"

    def restrict(self, names: Iterable[str]) -> Assignment:
        keep = set(names)
        return Assignment((k, v) for k, v in self._items if k in keep)

    def rename(self, mapping: Mapping[str, str]) -> Assignment:
        return Assignment((mapping.get(k, k), v) for k, v in self._items)


# Elements of knob domains and detector domains share one representation.
Setting = Assignment
AtomicOutcome = Assignment


class _Domain:
    """Shared machinery for :class:`KnobDomain` and :class:`DetectorDomain`."""

    _factor_type: type = object
    _kind = "factor"

    def __init__(self, factors: Iterable = ()):
        by_name: dict[str, object] = {}
        for factor in factors:
            if not isinstance(factor, self._factor_type):
                raise TypeError(
                    f"{type(self).__name__} takes {self._factor_type.__name__} "
                    f"factors, got {type(factor).__name__}"
                )
            if factor.name in by_name:
                raise NameClash(
                    f"{self._kind} {factor.name!r} appears twice in one domain"
                )
            by_name[factor.name] = factor
        self._factors = tuple(by_name[name] for name in sorted(by_name))

    @property
    def factors(self) -> tuple:
        return self._factors

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(f.name for f in self._factors)

    def factor(self, name: str):
        for f in self._factors:
            if f.name == name:
                return f
        raise KeyError(name)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(f.labels) for f in self._factors)

    @property
    def size(self) -> int:
        """Number of elements; the empty domain has exactly one."""
        n = 1
        for k in self.shape:
            n *= k
        return n

    @cached_property
    def _elements(self) -> tuple[Assignment, ...]:
        names = self.names
        return tuple(
            Assignment(zip(names, combo))
            for combo in itertools.product(*(f.labels for f in self._factors))
        )

    @cached_property
    def _positions(self) -> dict[Assignment, int]:
        return {a: i for i, a in enumerate(self._elements)}

    def elements(self) -> tuple[Assignment, ...]:
        return self._elements

    def index(self, element: Mapping[str, str]) -> int:
        key = element if isinstance(element, Assignment) else Assignment(element)
        try:
            return self._positions[key]
        except KeyError:
            raise DomainMismatch(f"{element!r} is not an element of {self!r}") from None

    def __contains__(self, element) -> bool:
        if not isinstance(element, Mapping):
            return False
        key = element if isinstance(element, Assignment) else Assignment(element)
        return key in self._positions

    def __iter__(self) -> Iterator[Assignment]:
        return iter(self._elements)

    def __eq__(self, other):
        if type(other) is not type(self):
            return NotImplemented
        return self._factors == other._factors

    def __hash__(self):
        return hash((type(self).__name__, self._factors))

    def __repr__(self):
        body = ", ".join(f"{f.name}{list(f.labels)}" for f in self._factors)
        return f"{type(self).__name__}({body})"

    def __or__(self, other):
        return join(self, other)

    def __and__(self, other):
        return meet(self, other)

    def __sub__(self, other):
        return diff(self, other)

    def __le__(self, other):
        return leq(self, other)

    def __lt__(self, other):
        return leq(self, other) and self != other

    def __bool__(self):
        # truthiness means "has factors", not "has elements"
        return bool(self._factors)


class KnobDomain(_Domain):
    _factor_type = Knob
    _kind = "knob"

    @property
    def knobs(self) -> tuple[Knob, ...]:
        return self._factors


class DetectorDomain(_Domain):
    _factor_type = Detector
    _kind = "detector"

    @property
    def detectors(self) -> tuple[Detector, ...]:
        return self._factors


def _pair(d1: _Domain, d2: _Domain) -> tuple[dict, dict]:
    if type(d1) is not type(d2):
        raise TypeError(
            f"cannot combine {type(d1).__name__} with {type(d2).__name__}"
        )
    f1 = {f.name: f for f in d1.factors}
    f2 = {f.name: f for f in d2.factors}
    for name in f1.keys() & f2.keys():
        if f1[name] != f2[name]:
            raise NameClash(
                f"{d1._kind} {name!r} has labels {list(f1[name].labels)} "
                f"in one domain and {list(f2[name].labels)} in the other"
            )
    return f1, f2


def join(d1, d2):
    f1, f2 = _pair(d1, d2)
    return type(d1)({**f1, **f2}.values())


def meet(d1, d2):
    f1, f2 = _pair(d1, d2)
    return type(d1)(f for name, f in f1.items() if name in f2)


def diff(d1, d2):
    """Factors of ``d1`` whose names do not occur in ``d2``."""
    f1, f2 = _pair(d1, d2)
    return type(d1)(f for name, f in f1.items() if name not in f2)


def leq(d1, d2) -> bool:
    f1, f2 = _pair(d1, d2)
    return f1.keys() <= f2.keys()


def join_all(domains: Iterable):
    return reduce(join, domains)


def combine_settings(*parts: Mapping[str, str]) -> Assignment:
    """Merge assignments over pairwise disjoint domains into one element of their join."""
    merged: dict[str, str] = {}
    for part in parts:
        overlap = merged.keys() & part.keys()
        if overlap:
            raise OverlappingDomains(
                f"cannot combine settings sharing factors {sorted(overlap)}"
            )
        merged.update(part)
    return Assignment(merged)


def enumerate_settings(domain: _Domain) -> tuple[Assignment, ...]:
    return domain.elements()


@dataclass(frozen=True)
class Event:
    """A subset of the atoms of a detector domain."""

    domain: DetectorDomain
    atoms: frozenset

    def __post_init__(self):
        atoms = frozenset(
            a if isinstance(a, Assignment) else Assignment(a) for a in self.atoms
        )
        for atom in atoms:
            if atom not in self.domain:
                raise DomainMismatch(f"atom {atom!r} not in {self.domain!r}")
        object.__setattr__(self, "atoms", atoms)

    def indices(self) -> list[int]:
        return sorted(self.domain.index(a) for a in self.atoms)

    def complement(self) -> Event:
        return Event(self.domain, frozenset(self.domain.elements()) - self.atoms)

    @classmethod
    def everything(cls, domain: DetectorDomain) -> Event:
        return cls(domain, frozenset(domain.elements()))


def all_events(domain: DetectorDomain) -> Iterator[Event]:
    """Every subset of the atom set (the finite sigma-algebra), smallest first."""
    atoms = domain.elements()
    for r in range(len(atoms) + 1):
        for combo in itertools.combinations(atoms, r):
            yield Event(domain, frozenset(combo))
