import itertools
import math

import numpy as np
import pytest

from bosonctx import CapExceededError, DimensionError
from bosonctx.contextuality import (
    HALF,
    CycleExperiment,
    EventSpec,
    InequalityReport,
    MeasurementScenario,
    PairTable,
    Pattern,
    UnsupportedInputError,
    classical_bound_bruteforce,
    coincidence_profile,
    event_probability,
    event_probability_forward,
    event_state,
    measurement_distribution,
    ncycle_report,
    nodisturbance_check,
    nodisturbance_extremal_assignment,
    overlap_matrix,
    pair_table_from_quantum,
    projector_exclusivity_contrast,
    random_state,
    specker_experiment,
    specker_report,
)
from bosonctx.fock import FockState, inner_product, make_basis, normalize
from bosonctx.interferometer import random_unitary

S2 = math.sqrt(2)


def displayed_event(n, k):
    """Hand-built expansion of event k: photon k reflected, photon k+1 transmitted."""
    ones = [1] * n
    up, lo = list(ones), list(ones)
    up[k], up[(k + 1) % n] = 2, 0
    lo[k], lo[(k + 1) % n] = 0, 2
    return {tuple(ones): -1j * S2 / 2, tuple(up): 0.5, tuple(lo): -0.5}


def dense_overlap(a, b):
    keys = set(a) | set(b)
    return abs(sum(np.conj(a.get(k, 0)) * b.get(k, 0) for k in keys)) ** 2


# scenario and event plumbing


def test_specker_scenarios_follow_fibers():
    exp = specker_experiment()
    assert [s.mixed for s in exp.scenarios] == [(0, 1), (1, 2), (2, 0)]
    assert [s.idle for s in exp.scenarios] == [(2,), (0,), (1,)]
    assert [e.target for e in exp.events] == [(2, 0, 1), (1, 2, 0), (0, 1, 2)]
    assert exp.labels == ["_ab", "_bc", "a_c"]


def test_kcbs_labels():
    assert CycleExperiment(5).labels == ["_ab", "_bc", "_cd", "_de", "a_e"]


def test_mirror_pattern_target():
    s = MeasurementScenario(0, 0, 1, 3)
    assert EventSpec(s, Pattern.REFLECTED_LOWER, (1, 1, 1)).target == (0, 2, 1)
    assert EventSpec(s, Pattern.REFLECTED_LOWER, (1, 1, 1)).label == "a_b"


def test_bad_scenarios():
    with pytest.raises(ValueError):
        MeasurementScenario(0, 1, 1, 3)
    with pytest.raises(IndexError):
        MeasurementScenario(0, 0, 3, 3)
    with pytest.raises(ValueError):
        CycleExperiment(2)


# event states


@pytest.mark.parametrize("k", range(3))
def test_event_states_match_displayed_expansions(k):
    e = specker_experiment().events[k]
    got = event_state(e)
    want = displayed_event(3, k)
    assert set(got.terms) == set(want)
    for key, amp in want.items():
        assert abs(got.amplitude(key) - amp) <= 1e-12


def test_event_probability_bunching():
    e = specker_experiment().events[0]
    assert abs(event_probability((1, 1, 1), e) - 0.5) <= 1e-12


def test_event_probability_forward_backward(rng):
    exp = specker_experiment()
    for _ in range(5):
        psi = random_state(3, 3, rng)
        for e in exp.events:
            assert abs(event_probability(psi, e) - event_probability_forward(psi, e)) <= 1e-12


def test_event_probability_forward_prepared_state():
    # U† |target> evolved forward by U must land on |target> with certainty
    e = specker_experiment().events[0]
    prepared = event_state(e)
    assert abs(event_probability_forward(prepared, e) - 1.0) <= 1e-12
    assert abs(event_probability(prepared, e) - 1.0) <= 1e-12


def test_event_probability_other_sector():
    e = specker_experiment().events[0]
    assert event_probability((1, 1, 0), e) == 0


# overlaps


def test_specker_overlaps():
    ov = overlap_matrix(specker_experiment().events)
    off = ov[~np.eye(3, dtype=bool)]
    assert np.all(np.abs(off - 0.25) <= 1e-12)
    assert np.all(np.diag(ov) == 1)


def test_overlap_of_repeated_event():
    e = specker_experiment().events[1]
    assert np.allclose(overlap_matrix([e, e]), 1.0, atol=1e-12)


def test_kcbs_overlaps_against_hand_expansion():
    exp = CycleExperiment(5)
    ov = overlap_matrix(exp.events)
    for i, j in itertools.combinations(range(5), 2):
        oracle = dense_overlap(displayed_event(5, i), displayed_event(5, j))
        assert abs(ov[i, j] - oracle) <= 1e-12
    for k in range(5):
        assert abs(ov[k, (k + 1) % 5] - 0.25) <= 1e-12


def test_overlap_needs_two_events():
    with pytest.raises(ValueError):
        overlap_matrix(specker_experiment().events[:1])
    with pytest.raises(DimensionError):
        overlap_matrix([make_basis((1, 1)), make_basis((1, 1, 1))])


# measurement statistics


def test_measurement_distribution_bunching():
    out = measurement_distribution((1, 1, 1), specker_experiment().scenarios[0])
    assert abs(out.both_upper - 0.5) <= 1e-12
    assert abs(out.both_lower - 0.5) <= 1e-12
    assert out.coincidence == 0
    assert abs(sum(out) - 1) <= 1e-12


def test_measurement_distribution_no_mixing():
    out = measurement_distribution((1, 1, 1), MeasurementScenario(0, 0, 1, 3, t=1.0))
    assert out == (0.0, 0.0, 1.0)


def test_measurement_distribution_full_reflection():
    # t = 0: a†_u a†_l -> (i a†_l)(i a†_u), coincidence amplitude -1
    out = measurement_distribution((1, 1, 1), MeasurementScenario(0, 0, 1, 3, t=0.0))
    assert out.both_upper == 0 and out.both_lower == 0
    assert abs(out.coincidence - 1) <= 1e-12


def test_measurement_distribution_rejects_other_inputs():
    s = MeasurementScenario(0, 0, 1, 3)
    with pytest.raises(UnsupportedInputError):
        measurement_distribution((2, 0, 1), s)
    with pytest.raises(DimensionError):
        measurement_distribution((1, 1), s)


def test_exclusivity_as_measured():
    for n in (3, 4, 5):
        assert all(abs(p) <= 1e-12 for p in coincidence_profile(CycleExperiment(n)))


# reports


def test_specker_report():
    rep = specker_report()
    assert all(abs(p - 0.5) <= 1e-12 for p in rep.probabilities)
    assert abs(rep.lhs - 1.5) <= 1e-12
    assert rep.classical_bound == 1
    assert rep.nodisturbance_bound == 1.5
    assert rep.violated
    assert rep.lhs == sum(rep.probabilities)


def test_specker_report_without_mixing():
    # event_probability gives 0 for every event when t = 1
    rep = specker_report(t=1.0)
    assert rep.lhs == 0 and not rep.violated


@pytest.mark.parametrize(
    "n, lhs, bound, violated",
    [(3, 1.5, 1, True), (4, 2.0, 2, False), (5, 2.5, 2, True), (6, 3.0, 3, False), (7, 3.5, 3, True)],
)
def test_ncycle_report(n, lhs, bound, violated):
    rep = ncycle_report(n)
    assert abs(rep.lhs - lhs) <= 1e-12
    assert rep.classical_bound == bound
    assert rep.violated is violated
    assert rep.lhs == sum(rep.probabilities)


def test_ncycle_range():
    with pytest.raises(ValueError):
        ncycle_report(2)
    with pytest.raises(CapExceededError):
        ncycle_report(13)


def test_report_round_trip():
    rep = ncycle_report(5)
    again = InequalityReport.from_dict(__import__("json").loads(rep.to_json()))
    assert again == rep
    assert list(rep.to_dict()) == list(InequalityReport.FIELDS)


def test_report_text_and_csv():
    rep = specker_report()
    text = rep.to_text()
    assert "VIOLATED" in text and "1.500000000000" in text
    assert rep.to_csv().splitlines()[0] == "key,value"


# classical bound


def brute_force_oracle(n):
    best = 0
    for labels in itertools.product((0, 1), repeat=n):  # 1 = reflected
        best = max(best, sum(labels[k] == 1 and labels[(k + 1) % n] == 0 for k in range(n)))
    return best


@pytest.mark.parametrize("n", range(3, 13))
def test_classical_bound(n):
    assert classical_bound_bruteforce(n) == brute_force_oracle(n) == n // 2


def test_classical_bound_paper_values():
    assert classical_bound_bruteforce(3) == 1
    assert classical_bound_bruteforce(5) == 2
    assert classical_bound_bruteforce(7) == 3


def test_classical_bound_caps():
    with pytest.raises(CapExceededError):
        classical_bound_bruteforce(25)
    with pytest.raises(ValueError):
        classical_bound_bruteforce(2)


# pair tables


def test_extremal_assignment():
    table = nodisturbance_extremal_assignment(3)
    assert table.is_valid(tol=0.0)
    assert table.lhs() == 1.5
    assert list(table.singles()) == [0.5, 0.5, 0.5]
    for n in (4, 5, 9):
        t = nodisturbance_extremal_assignment(n)
        assert np.all(t.joint.sum(axis=(1, 2)) == 1)
        assert t.lhs() == n / 2


def test_quantum_pair_table_equals_extremal():
    for n in (3, 5):
        q = pair_table_from_quantum(n)
        assert np.max(np.abs(q.joint - nodisturbance_extremal_assignment(n).joint)) <= 1e-12
        assert np.all(q.joint[:, 1, 1] == 0)
        assert np.all(np.abs(q.joint.sum(axis=(1, 2)) - 1) <= 1e-12)


def test_pair_table_validation():
    bad = np.broadcast_to([[0.0, 0.5], [0.25, 0.25]], (3, 2, 2))
    t = PairTable(bad)
    assert t.exclusivity_residual() == 0.25
    assert not t.is_valid()
    with pytest.raises(ValueError):
        PairTable(np.zeros((2, 2, 2)))


# no-disturbance


def test_nodisturbance_photon_a():
    exp = specker_experiment()
    res = nodisturbance_check(0, exp.contexts_of(0))
    assert res.contexts == (0, 2)
    assert all(abs(m - 0.5) <= 1e-12 for m in res.marginals)
    assert res.discrepancy <= 1e-12
    # p(_ab) from the two-photon scattering, in either context
    assert all(abs(p - 0.5) <= 1e-12 for p in res.pattern_probabilities)


def test_nodisturbance_no_mixing():
    exp = specker_experiment(t=1.0)
    assert nodisturbance_check(0, exp.contexts_of(0)).marginals == (0.0, 0.0)


def test_nodisturbance_asymmetric():
    t = 0.8
    exp = specker_experiment(t)
    res = nodisturbance_check(0, exp.contexts_of(0))
    # oracle: single photon amplitude to cross is i r, |i r|^2 = 1 - t^2
    assert all(abs(m - 0.36) <= 1e-12 for m in res.marginals)
    assert res.discrepancy <= 1e-12


def test_nodisturbance_random_t(rng):
    for t in rng.uniform(0, 1, 20):
        exp = CycleExperiment(5, t)
        for k in range(5):
            assert nodisturbance_check(k, exp.contexts_of(k)).discrepancy <= 1e-12


def test_nodisturbance_particle_not_mixed():
    exp = specker_experiment()
    with pytest.raises(ValueError):
        nodisturbance_check(2, [exp.scenarios[0]])


# projector contrast


def test_contrast_flags_specker_events():
    rep = projector_exclusivity_contrast(specker_experiment().events)
    assert rep.flagged and not rep.orthogonal
    assert abs(rep.max_overlap - 0.25) <= 1e-12


def test_bessel_for_orthonormal_triple(rng):
    triple = [make_basis(k) for k in [(1, 0, 0), (0, 1, 0), (0, 0, 1)]]
    rep = projector_exclusivity_contrast(triple, rng=rng)
    assert rep.orthogonal and rep.bessel_ok
    assert all(s <= 1 + 1e-12 for s in rep.bessel_sums)


def test_parseval_in_span(rng):
    u = random_unitary(3, rng).matrix
    triple = [FockState(3, {(1, 0, 0): u[0, k], (0, 1, 0): u[1, k], (0, 0, 1): u[2, k]})
              for k in range(3)]
    psi = normalize(FockState(3, {(1, 0, 0): 0.3, (0, 1, 0): 1j, (0, 0, 1): -0.4}))
    assert abs(sum(abs(inner_product(e, psi)) ** 2 for e in triple) - 1) <= 1e-12
    assert projector_exclusivity_contrast(triple, rng=rng).bessel_ok


def test_bessel_strict_in_larger_sector(rng):
    # three orthonormal kets inside the 10-dimensional 3-photon sector
    triple = [make_basis(k) for k in [(3, 0, 0), (1, 1, 1), (0, 0, 3)]]
    rep = projector_exclusivity_contrast(triple, samples=50, rng=rng)
    assert rep.bessel_ok and max(rep.bessel_sums) < 1
