"""End-to-end acceptance checks, one test per criterion.

Each test is timed against its runtime budget; the terminal summary prints a
PASS/FAIL line per criterion.
"""

import json
import time

import numpy as np
import pytest
from hypothesis import given, settings

from ambiguity.cli import main
from ambiguity.cycle import run_cycle
from ambiguity.domains import DetectorDomain, KnobDomain
from ambiguity.explanations import (
    canonical_explanations,
    explain_all_in_measurement,
    explain_all_in_state,
    verify_explains,
)
from ambiguity.measures import ParamProbMeasure, d_uniform, induced_partition, metdev_ppm
from ambiguity.qkd import bb84_build, bb84_insecure_alternative
from ambiguity.quantum import helstrom_povm, metdev_density, results_bound_check, success_value, trace_distance
from ambiguity.sampling import random_binary_povm, random_density, random_explanation, random_measure

from conftest import detector, knob, knob_domains
from oracles import sup_over_events_vectorized

FLOOR = 0.5 * (1 - 2 ** -0.5)


class Budget:
    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.start
        if exc[0] is None:
            assert self.elapsed < self.seconds, f"took {self.elapsed:.2f} s, budget {self.seconds} s"


def domains(n_settings, n_atoms):
    return KnobDomain([knob("A", n_settings)]), DetectorDomain([detector("D", n_atoms)])


@pytest.mark.criterion(1, "BB84 error floor via the bb84 verb")
def test_bb84_floor(capsys):
    with Budget(1.0):
        assert main(["bb84"]) == 0
        rep = json.loads(capsys.readouterr().out)
    pairs = {tuple(r["pair"]): r for r in rep["standard"]["errors"]}
    cross = pairs[("0Z", "0X")]
    assert abs(cross["helstromError"] - FLOOR) <= 1e-8
    assert abs(cross["traceDistance"] - 2 ** -0.5) <= 1e-10


@pytest.mark.criterion(2, "BB84 alternative explanation distinguishes every pair")
def test_bb84_insecurity():
    with Budget(1.0):
        s = bb84_build()
        alt = bb84_insecure_alternative(s, tol=1e-10)
    assert verify_explains(alt.explanation, s.mu, 1e-10).ok
    assert len(alt.errors) == 6
    for p in alt.errors:
        assert abs(p.helstrom_error) <= 1e-10
    assert alt.verdict.possible
    (w1, w2) = alt.verdict.witness
    # the witness pairs preparations from different bases
    assert w1["alice"][1] != w2["alice"][1]


@pytest.mark.criterion(3, "three canonical explanations for 100 random measures")
def test_inverse_image_diversity():
    rng = np.random.default_rng(3)
    kd, dd = domains(4, 3)
    multi_class = 0
    with Budget(10.0):
        for _ in range(100):
            mu = random_measure(kd, dd, rng, distinct_rows=int(rng.integers(1, 5)))
            expl = canonical_explanations(mu)
            for name, e in expl.items():
                assert verify_explains(e, mu, 1e-10).ok, name
            if len(induced_partition(mu)) >= 2:
                multi_class += 1
                assert metdev_density(expl["measurement"], expl["state"]) == 1.0
    assert multi_class > 50


@pytest.mark.criterion(4, "cycle conflict on a two-setting measure")
def test_cycle_conflict():
    rng = np.random.default_rng(4)
    kd, dd = domains(2, 3)
    with Budget(5.0):
        mu = random_measure(kd, dd, rng)
        assert not np.array_equal(mu.table[0], mu.table[1])
        rep = run_cycle(mu, explain_all_in_measurement(mu), explain_all_in_state(mu))
    for side in (rep.first, rep.second):
        assert side.envelope_exact
        assert side.helstrom_atom_gap <= 1e-9
        assert side.helstrom_event_gap <= 1e-9
    assert abs(rep.metdev - abs(rep.D - rep.D_prime)) <= 1e-9
    assert rep.conflict


@pytest.mark.criterion(5, "results bound on 200 random explanations")
def test_results_bound():
    rng = np.random.default_rng(5)
    checked = 0
    with Budget(30.0):
        for _ in range(200):
            n, a, dim = (int(x) for x in rng.integers(1, 5, size=3))
            kd, dd = domains(max(n, 2), a)
            e = random_explanation(kd, dd, dim, rng)
            elems = kd.elements()
            for i in range(len(elems)):
                for j in range(i + 1, len(elems)):
                    chk = results_bound_check(e, elems[i], elems[j])
                    assert chk.lhs <= chk.rhs + 1e-9, (chk, dim, a)
                    checked += 1
    assert checked >= 200


@pytest.mark.criterion(6, "half-L1 equals the exhaustive event sup")
def test_event_sup_oracle():
    rng = np.random.default_rng(6)
    with Budget(30.0):
        for _ in range(100):
            n = int(rng.integers(1, 13))
            p, q = rng.dirichlet(np.ones(n)), rng.dirichlet(np.ones(n))
            assert abs(d_uniform(p, q) - sup_over_events_vectorized(p, q)) <= 1e-12


LATTICE_CASES = 1000


@pytest.mark.criterion(7, "lattice laws on 1000 generated cases")
def test_lattice_laws():
    seen = []

    @settings(max_examples=LATTICE_CASES, deadline=None, database=None)
    @given(knob_domains, knob_domains, knob_domains)
    def laws(x, y, z):
        seen.append(1)
        assert x | y == y | x and x & y == y & x
        assert (x | y) | z == x | (y | z) and (x & y) & z == x & (y & z)
        assert x | x == x and x & x == x
        assert x | (x & y) == x and x & (x | y) == x
        assert x & (y | z) == (x & y) | (x & z)
        assert x | (y & z) == (x | y) & (x | z)
        assert (x - y) | (x & y) == x and (x - y) & y == KnobDomain()

    laws()
    assert len(seen) >= LATTICE_CASES


@pytest.mark.criterion(8, "atom relabelling leaves metdev and partitions unchanged")
def test_relabel_invariance():
    rng = np.random.default_rng(8)
    kd, dd = domains(6, 4)
    for _ in range(100):
        mu = random_measure(kd, dd, rng, distinct_rows=int(rng.integers(1, 7)))
        relabelled = ParamProbMeasure(kd, dd, mu.table[:, rng.permutation(dd.size)])
        assert metdev_ppm(mu, relabelled) == 0.0
        p1, p2 = induced_partition(mu), induced_partition(relabelled)
        assert p1.classes == p2.classes
        assert np.array_equal(p1.distances, p2.distances)


@pytest.mark.criterion(9, "Helstrom measurement is optimal for dim-3 pairs")
def test_helstrom_optimality():
    rng = np.random.default_rng(9)
    for _ in range(100):
        r1, r2 = random_density(3, rng), random_density(3, rng)
        best = success_value(*helstrom_povm(r1, r2), r1, r2)
        assert abs(best - (1 + trace_distance(r1, r2))) <= 1e-9
        for _ in range(50):
            assert success_value(*random_binary_povm(3, rng), r1, r2) <= best + 1e-9
