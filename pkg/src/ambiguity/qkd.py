"""BB84 under two explanations of the same outcome statistics.

The textbook explanation prepares one of four qubit states and lets Bob
measure in his chosen basis.  Cross-basis state pairs then sit at trace
distance ``2**-0.5``, so an eavesdropper deciding between them errs with
probability at least ``(1 - 2**-0.5) / 2``.  The all-in-state explanation
reproduces exactly the same outcome table with mutually orthogonal states,
under which the same pairs are told apart without error.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domains import Assignment, Detector, DetectorDomain, Knob, KnobDomain
from .explanations import (
    Factorization,
    InequivalenceVerdict,
    VerifyReport,
    check_inequivalence_condition,
    explain_all_in_state,
    verify_explains,
)
from .measures import ParamProbMeasure
from .quantum import (
    Explanation,
    helstrom_error,
    metdev_density,
    pure_state,
    trace_distance,
    trace_rule,
)

ALICE = Knob("alice", ("0Z", "1Z", "0X", "1X"))
BOB = Knob("bob", ("Z", "X"))
DETECTOR = Detector("click", ("0", "1"))

_S = 2 ** -0.5
KETS = {
    "0Z": np.array([1.0, 0.0]),
    "1Z": np.array([0.0, 1.0]),
    "0X": np.array([_S, _S]),
    "1X": np.array([_S, -_S]),
}
# Bob's outcome "0"/"1" projects onto the bit-0/bit-1 state of his basis
BASIS_KETS = {"Z": (KETS["0Z"], KETS["1Z"]), "X": (KETS["0X"], KETS["1X"])}
CROSS_BASIS_DISTANCE = _S


@dataclass(frozen=True)
class BB84Scenario:
    knob_domain: KnobDomain
    detector_domain: DetectorDomain
    standard: Explanation
    mu: ParamProbMeasure
    factorization: Factorization

    @property
    def alice_settings(self) -> tuple[Assignment, ...]:
        return self.factorization.state_knobs.elements()

    def setting(self, alice: str, bob: str = "Z") -> Assignment:
        return Assignment({ALICE.name: alice, BOB.name: bob})


def bb84_build() -> BB84Scenario:
    kd = KnobDomain([ALICE, BOB])
    dd = DetectorDomain([DETECTOR])

    def rho(k):
        return pure_state(KETS[k[ALICE.name]])

    def povm(k, atom):
        return pure_state(BASIS_KETS[k[BOB.name]][int(atom[DETECTOR.name])])

    standard = Explanation.from_maps(kd, dd, rho, povm)
    mu = trace_rule(standard)
    fact = Factorization(KnobDomain([ALICE]), KnobDomain([BOB]))
    return BB84Scenario(kd, dd, standard, mu, fact)


class PairError(NamedTuple):
    first: str
    second: str
    trace_distance: float
    helstrom_error: float
    # trace distance equals the 2**-0.5 ceiling quoted for BB84 state pairs
    at_ceiling: bool


def _alice_state(e: Explanation, alice: str) -> np.ndarray:
    # the state depends only on Alice's knob in both explanations used here
    return e.rho_of({ALICE.name: alice, BOB.name: BOB.settings[0]})


def pair_error(e: Explanation, a1: str, a2: str) -> PairError:
    r1, r2 = _alice_state(e, a1), _alice_state(e, a2)
    td = trace_distance(r1, r2)
    return PairError(a1, a2, td, helstrom_error(r1, r2), abs(td - CROSS_BASIS_DISTANCE) < 1e-12)


def error_table(e: Explanation) -> list[PairError]:
    return [pair_error(e, a1, a2) for a1, a2 in itertools.combinations(ALICE.settings, 2)]


def bb84_security_floor(s: BB84Scenario) -> list[PairError]:
    return error_table(s.standard)


class InsecureAlternative(NamedTuple):
    explanation: Explanation
    verification: VerifyReport
    errors: list[PairError]
    verdict: InequivalenceVerdict
    metdev_density: float


def bb84_insecure_alternative(s: BB84Scenario, tol: float = 1e-10) -> InsecureAlternative:
    alt = explain_all_in_state(s.mu, s.factorization)
    return InsecureAlternative(
        alt,
        verify_explains(alt, s.mu, tol),
        error_table(alt),
        check_inequivalence_condition(s.mu, s.factorization),
        metdev_density(s.standard, alt),
    )
