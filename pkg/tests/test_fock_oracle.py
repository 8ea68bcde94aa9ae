import math

import numpy as np
import pytest

from bosegas.fock_oracle import (
    TruncatedFock,
    annihilator_combination,
    evolve,
    field_matrix,
    gauge_average_matrix,
    gibbs_expectation,
    inverse_number_expectation,
    low_block_deviation,
    number_operator,
    regularized_number_expectation,
    resolvent_matrix,
    weyl_conjugated_resolvent,
    weyl_matrix,
)


def test_space_validation():
    with pytest.raises(ValueError):
        TruncatedFock(2, 70, (1.0, 2.0))  # dimension beyond the cap
    with pytest.raises(ValueError):
        TruncatedFock(1, 10, (0.0,))
    with pytest.raises(ValueError):
        TruncatedFock(1, 10, (1.0, 2.0))


def test_field_matrix_basics():
    space = TruncatedFock(1, 20, (1.0,))
    zero = field_matrix(space, np.array([0.0j]))
    assert np.max(np.abs(zero)) == 0.0
    c = np.array([1.0 + 0.5j])
    c *= np.sqrt(2.0) / np.linalg.norm(c)
    phi = field_matrix(space, c)
    assert np.max(np.abs(phi - phi.conj().T)) == 0.0
    # vacuum two-point <O, phi(f)^2 O> = ||f||^2 / 2
    assert (phi @ phi)[0, 0].real == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        field_matrix(space, np.array([1.0, 2.0]))


def test_resolvent_trivial_and_reflection():
    space = TruncatedFock(1, 20, (1.0,))
    r = resolvent_matrix(space, 1.0, np.array([0.0j]))
    assert np.max(np.abs(r + 1j * np.eye(space.dimension))) == 0.0
    c = np.array([0.7 - 0.2j])
    assert np.array_equal(resolvent_matrix(space, -1.3 + 0.2j, c),
                          -resolvent_matrix(space, 1.3 - 0.2j, -c))
    with pytest.raises(ValueError):
        resolvent_matrix(space, 1.0j, c)


def test_ccr_identity_low_block():
    space = TruncatedFock(1, 100, (1.0,))
    f = np.array([0.6 + 0.2j])
    g = np.array([0.3 - 0.5j])
    rf = resolvent_matrix(space, 1.0, f)
    rg = resolvent_matrix(space, 1.2, g)
    lhs = rf @ rg - rg @ rf
    rhs = 1j * np.vdot(f, g).imag * rf @ rg @ rg @ rf
    assert low_block_deviation(space, lhs, rhs, margin=75) < 1e-8


def test_weyl_relation_low_block():
    space = TruncatedFock(1, 60, (1.0,))
    f = np.array([0.6 + 0.2j])
    g = np.array([0.3 - 0.5j])
    lhs = weyl_matrix(space, f) @ weyl_matrix(space, g)
    rhs = np.exp(-0.5j * np.vdot(f, g).imag) * weyl_matrix(space, f + g)
    assert low_block_deviation(space, lhs, rhs, margin=30) < 1e-8


def test_gibbs_normalization_and_occupation():
    space = TruncatedFock(1, 60, (1.0,))
    beta = 1.0
    assert gibbs_expectation(space, beta, 0.0, np.eye(space.dimension)) == pytest.approx(1.0)
    n = number_operator(space, np.array([1.0 + 0j]))
    got = gibbs_expectation(space, math.log(2.0), 0.0, n).real
    assert abs(got - 1.0) < 1e-9  # (e^{ln 2} - 1)^{-1}
    with pytest.raises(ValueError):
        gibbs_expectation(space, beta, 2.0, n)


def test_gibbs_weyl_expectation():
    space = TruncatedFock(1, 60, (1.0,))
    beta = math.log(2.0)
    c = np.array([0.8 - 0.3j])
    got = gibbs_expectation(space, beta, 0.0, weyl_matrix(space, c))
    form = 0.5 / np.tanh(0.5 * beta) * abs(c[0]) ** 2
    assert abs(got - np.exp(-0.5 * form)) < 1e-6


def test_oracle_truncation_stability():
    # reported values stay put under n_max -> n_max + 10
    beta, mu = 1.0, 0.0
    vals = []
    for n_max in (70, 80):
        space = TruncatedFock(1, n_max, (1.0,))
        r = resolvent_matrix(space, 1.0, np.array([1.0 + 0j]))
        vals.append(gibbs_expectation(space, beta, mu, r @ r))
    assert abs(vals[0] - vals[1]) < 1e-8


def test_gauge_average():
    space = TruncatedFock(1, 24, (1.0,))
    eye = np.eye(space.dimension)
    assert np.max(np.abs(gauge_average_matrix(space, eye, 0) - eye)) < 1e-14
    assert np.max(np.abs(gauge_average_matrix(space, eye, 2))) < 1e-14
    c = np.array([0.8 - 0.3j])
    r = resolvent_matrix(space, 1.0, c)
    avg = gauge_average_matrix(space, r, 0)
    n = number_operator(space, np.array([1.0 + 0j]))
    assert np.max(np.abs(avg @ n - n @ avg)) < 1e-10
    # trapezoid is exact for trigonometric polynomials: doubling changes nothing
    n_base = 4 * space.n_max
    a1 = gauge_average_matrix(space, r, 0, n_base)
    a2 = gauge_average_matrix(space, r, 0, 2 * n_base)
    assert np.max(np.abs(a1 - a2)) < 1e-12
    with pytest.raises(ValueError):
        gauge_average_matrix(space, eye, 0, n_phases=4)


def test_regularized_number_monotone_limit():
    space = TruncatedFock(1, 60, (1.0,))
    beta = math.log(2.0)
    c = np.array([1.0 + 0j])
    cold = regularized_number_expectation(TruncatedFock(1, 20, (1.0,)), 60.0, 0.0, c, 0.1)
    assert abs(cold) < 1e-12
    vals = [regularized_number_expectation(space, beta, 0.0, c, eps)
            for eps in (1.0, 0.1, 0.01)]
    assert vals[0] < vals[1] < vals[2] < 1.0 + 1e-9
    assert vals[2] == pytest.approx(1.0, abs=0.05)


def test_condensation_probe_sequence():
    space = TruncatedFock(1, 1000, (1.0,))
    seq = [inverse_number_expectation(space, 1.0, 1.0 - dmu, np.array([3.0 + 0j]))
           for dmu in (1.0, 0.3, 0.1, 0.03)]
    assert all(b < a for a, b in zip(seq, seq[1:]))
    assert seq[-1] < 0.05


def test_weyl_conjugated_resolvent():
    space = TruncatedFock(1, 120, (1.0,))
    c = np.array([1.0 + 0j])
    direct, series, dev = weyl_conjugated_resolvent(space, np.array([0.0j]), 1.0, c, 10)
    assert dev == 0.0
    e = np.array([0.4j])  # pairing modulus 0.4
    _, _, dev30 = weyl_conjugated_resolvent(space, e, 1.0, c, 30)
    _, _, dev5 = weyl_conjugated_resolvent(space, e, 1.0, c, 5)
    assert dev30 < 1e-8
    assert dev5 / dev30 > 1e4
    with pytest.raises(ValueError):
        weyl_conjugated_resolvent(space, np.array([2.0j]), 1.0, c, 10)


def test_displacement_increment_matches_pairing_square():
    # conjugating by W(sqrt2 e) adds |<e,f>|^2 to the particle count
    space = TruncatedFock(1, 60, (1.0,))
    beta = 1.0
    e = np.array([0.3 - 0.4j])
    f = np.array([0.9 + 0.1j])
    n = number_operator(space, f)
    w = weyl_matrix(space, np.sqrt(2.0) * e)
    base = gibbs_expectation(space, beta, 0.0, n).real
    shifted = gibbs_expectation(space, beta, 0.0, w.conj().T @ n @ w).real
    assert shifted - base == pytest.approx(abs(np.vdot(e, f)) ** 2, abs=1e-8)


def test_time_evolution_phases():
    space = TruncatedFock(1, 30, (1.0,))
    c = np.array([0.5 + 0.2j])
    r = resolvent_matrix(space, 1.0, c)
    ev = evolve(space, 0.0, 0.7, r)
    # evolution preserves the Gibbs expectation of gauge-invariant parts
    assert gibbs_expectation(space, 1.0, 0.0, gauge_average_matrix(space, ev, 0)) == \
        pytest.approx(gibbs_expectation(space, 1.0, 0.0, gauge_average_matrix(space, r, 0)),
                      abs=1e-12)
    # a(f) annihilates the vacuum
    a = annihilator_combination(space, c)
    assert np.max(np.abs(a[:, 0])) == 0.0
