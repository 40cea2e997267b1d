import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ambiguity.domains import Detector, DetectorDomain, Event, Knob, KnobDomain
from ambiguity.errors import (
    CannotDropAll,
    ChainAmbiguity,
    DomainMismatch,
    KnobDomainMismatch,
    NotNormalized,
    UnknownDetector,
)
from ambiguity.measures import (
    ParamProbMeasure,
    d_uniform,
    distance_matrix,
    event_prob,
    induced_partition,
    lemma_metdev_zero,
    marginalize,
    metdev_ppm,
    uniform_metric_ppm,
)
from ambiguity.qkd import bb84_build
from ambiguity.sampling import random_measure

from conftest import detector, knob
from oracles import metdev_brute, sup_over_events

K2 = KnobDomain([knob("A", 2)])
D2 = DetectorDomain([detector("D", 2)])


def prob_vectors(n):
    return arrays(float, n, elements=st.floats(0.01, 1.0)).map(lambda v: v / v.sum())


def test_measure_validation():
    with pytest.raises(NotNormalized):
        ParamProbMeasure(K2, D2, [[0.5, 0.4], [1.0, 0.0]])
    with pytest.raises(DomainMismatch):
        ParamProbMeasure(K2, D2, [[1.0, 0.0]])
    with pytest.raises(ValueError):
        ParamProbMeasure(K2, D2, [[1.5, -0.5], [1.0, 0.0]])
    with pytest.raises(ValueError):
        ParamProbMeasure(K2, D2, [[np.nan, 1.0], [1.0, 0.0]])


def test_rounding_level_entries_are_clipped():
    mu = ParamProbMeasure(K2, D2, [[1 + 1e-12, -1e-12], [0.5, 0.5]])
    assert mu.table.min() == 0.0 and mu.table.max() == 1.0
    assert not mu.table.flags.writeable


def test_from_entries_defaults_missing_to_zero():
    entries = [({"A": "a0"}, {"D": "0"}, 1.0), ({"A": "a1"}, {"D": "1"}, 1.0)]
    mu = ParamProbMeasure.from_entries(K2, D2, entries)
    assert mu.table.tolist() == [[1.0, 0.0], [0.0, 1.0]]


def test_event_prob():
    mu = ParamProbMeasure(K2, D2, [[0.25, 0.75], [0.5, 0.5]])
    ev = Event(D2, frozenset([D2.elements()[1]]))
    assert event_prob(mu, {"A": "a0"}, ev) == 0.75
    assert event_prob(mu, {"A": "a0"}, []) == 0.0


def test_d_uniform_examples():
    # sup over the four events of {0, 1} is 0.25, attained on {1}
    assert d_uniform([0.5, 0.5], [0.25, 0.75]) == pytest.approx(sup_over_events([0.25, 0.75], [0.5, 0.5]))
    assert d_uniform([0.5, 0.5], [0.25, 0.75]) == 0.25
    assert d_uniform([1.0, 0.0], [0.0, 1.0]) == 1.0
    with pytest.raises(DomainMismatch):
        d_uniform([1.0], [0.5, 0.5])
    with pytest.raises(NotNormalized):
        d_uniform([0.7, 0.7], [0.5, 0.5])


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 8).flatmap(lambda n: st.tuples(prob_vectors(n), prob_vectors(n))))
def test_d_uniform_matches_event_sup(pq):
    p, q = pq
    assert abs(d_uniform(p, q) - sup_over_events(p, q)) <= 1e-12


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 6).flatmap(lambda n: st.tuples(prob_vectors(n), prob_vectors(n), prob_vectors(n))))
def test_d_uniform_metric_axioms(pqr):
    p, q, r = pqr
    assert d_uniform(p, p) == 0.0
    assert d_uniform(p, q) == d_uniform(q, p)
    assert 0.0 <= d_uniform(p, q) <= 1.0
    assert d_uniform(p, r) <= d_uniform(p, q) + d_uniform(q, r) + 1e-15


def _pair_of_measures(rng, n=4, a=3):
    kd = KnobDomain([knob("A", n)])
    dd = DetectorDomain([detector("D", a)])
    return random_measure(kd, dd, rng), random_measure(kd, dd, rng)


def test_metdev_matches_brute_force(rng):
    for _ in range(20):
        m1, m2 = _pair_of_measures(rng)
        assert metdev_ppm(m1, m2) == pytest.approx(metdev_brute(m1.table, m2.table), abs=1e-12)


def test_metdev_simple_example():
    # two settings split perfectly by one measure, identical under the other
    m1 = ParamProbMeasure(K2, D2, [[1.0, 0.0], [0.0, 1.0]])
    m2 = ParamProbMeasure(K2, D2, [[1.0, 0.0], [1.0, 0.0]])
    assert metdev_ppm(m1, m2) == 1.0


def test_metdev_pseudometric_and_bounded_by_twice_uniform(rng):
    for _ in range(20):
        m1, m2 = _pair_of_measures(rng)
        m3 = _pair_of_measures(rng)[0]
        assert metdev_ppm(m1, m1) == 0.0
        assert metdev_ppm(m1, m2) == metdev_ppm(m2, m1)
        assert metdev_ppm(m1, m3) <= metdev_ppm(m1, m2) + metdev_ppm(m2, m3) + 1e-15
        assert metdev_ppm(m1, m2) <= 2 * uniform_metric_ppm(m1, m2) + 1e-15


def test_metdev_allows_different_detectors_but_not_knobs(rng):
    kd = KnobDomain([knob("A", 3)])
    m1 = random_measure(kd, DetectorDomain([detector("D", 2)]), rng)
    m2 = random_measure(kd, DetectorDomain([detector("E", 5)]), rng)
    assert metdev_ppm(m1, m2) >= 0.0
    with pytest.raises(KnobDomainMismatch):
        metdev_ppm(m1, random_measure(KnobDomain([knob("B", 3)]), m1.detector_domain, rng))


def test_relabelled_atoms_have_zero_metdev(rng):
    kd = KnobDomain([knob("A", 5)])
    dd = DetectorDomain([detector("D", 4)])
    for _ in range(10):
        mu = random_measure(kd, dd, rng, distinct_rows=3)
        nu = ParamProbMeasure(kd, dd, mu.table[:, rng.permutation(4)])
        assert metdev_ppm(mu, nu) == 0.0
        assert lemma_metdev_zero(mu, nu)


def test_partition_classes_and_topology():
    kd = KnobDomain([knob("A", 4)])
    mu = ParamProbMeasure(kd, D2, [[1, 0], [0.5, 0.5], [1, 0], [0.5, 0.5]])
    part = induced_partition(mu)
    k = kd.elements()
    assert part.classes == ((k[0], k[2]), (k[1], k[3]))
    assert part.representatives == (k[0], k[1])
    assert part.distances.tolist() == [[0.0, 0.5], [0.5, 0.0]]
    assert part.quotient_distance(k[2], k[3]) == 0.5
    assert part.is_open([k[0], k[2]])
    assert not part.is_open([k[0]])
    assert part.is_open([])


def test_partition_merges_within_eps_and_flags_near_pairs():
    kd = KnobDomain([knob("A", 3)])
    rows = [[0.5, 0.5], [0.5 + 4e-10, 0.5 - 4e-10], [0.5 + 1.6e-9, 0.5 - 1.6e-9]]
    part = induced_partition(ParamProbMeasure(kd, D2, rows))
    assert len(part) == 2
    assert [len(c) for c in part.classes] == [2, 1]
    assert part.ambiguous_pairs and part.ambiguous_pairs[0][:2] == (0, 1)


def test_chain_ambiguity_raises():
    kd = KnobDomain([knob("A", 3)])
    step = 0.8e-9
    rows = [[0.5 + i * step, 0.5 - i * step] for i in range(3)]
    with pytest.raises(ChainAmbiguity):
        induced_partition(ParamProbMeasure(kd, D2, rows))


def test_bb84_partition_plain_and_folded():
    s = bb84_build()
    plain = induced_partition(s.mu)
    # rows (1,0), (0,1) and (1/2,1/2) are the only distinct ones
    assert len(plain) == 3
    folded = induced_partition(s.mu, fold=KnobDomain([s.factorization.meas_knobs.knobs[0]]))
    assert len(folded) == 4
    assert folded.distances[0, 2] == pytest.approx(0.5)
    assert folded.distances[0, 1] == pytest.approx(1.0)


def test_marginalize_example():
    dd = DetectorDomain([Detector("X", ["0", "1"]), Detector("Y", ["0", "1"])])
    kd = KnobDomain([Knob("A", ["a"])])
    mu = ParamProbMeasure(kd, dd, [[0.1, 0.2, 0.3, 0.4]])
    mx = marginalize(mu, ["Y"])
    my = marginalize(mu, ["X"])
    assert mx.detector_domain.names == ("X",)
    np.testing.assert_allclose(mx.table, [[0.3, 0.7]], atol=1e-15)
    np.testing.assert_allclose(my.table, [[0.4, 0.6]], atol=1e-15)
    assert marginalize(mu, []) is mu
    with pytest.raises(UnknownDetector):
        marginalize(mu, ["Z"])
    with pytest.raises(CannotDropAll):
        marginalize(mu, ["X", "Y"])


def test_marginalize_order_independent(rng):
    dd = DetectorDomain([detector("X", 2), detector("Y", 3), detector("Z", 2)])
    mu = random_measure(KnobDomain([knob("A", 3)]), dd, rng)
    a = marginalize(marginalize(mu, ["X"]), ["Z"])
    b = marginalize(marginalize(mu, ["Z"]), ["X"])
    c = marginalize(mu, ["Z", "X"])
    np.testing.assert_allclose(a.table, b.table, atol=1e-15)
    np.testing.assert_allclose(a.table, c.table, atol=1e-15)


def test_distance_matrix_shape_and_symmetry(rng):
    mu = _pair_of_measures(rng, n=6)[0]
    d = distance_matrix(mu)
    assert d.shape == (6, 6)
    assert np.array_equal(d, d.T)
    assert np.all(np.diag(d) == 0)
