import numpy as np
import pytest

from bosegas.single_particle import (
    DomainStatus,
    FreeLaplacian,
    HarmonicTrap,
    LimitKind,
    ScaleOverflowError,
    TestFunction,
    basis_function,
    domain_classify,
    expand_in_model_basis,
    gauge_rotate,
    gaussian,
    ground_overlap,
    hermite_functions,
    inner_product,
    partition_function,
    partition_function_spectral,
    project_out_ground,
)
from bosegas.quadrature import legendre_panel


def random_test_function(rng, dim=1, scale=1.0, max_index=4):
    coeffs = {}
    for _ in range(3):
        idx = tuple(int(rng.integers(0, max_index + 1)) for _ in range(dim))
        coeffs[idx] = complex(rng.standard_normal(), rng.standard_normal())
    return TestFunction(dim, scale, coeffs)


def test_basis_orthonormality_quadrature():
    # Gram matrix of h_0..h_8 from quadrature must be the identity
    x, w = legendre_panel(-15.0, 15.0, 240)
    h = hermite_functions(8, x)
    gram = (h * w) @ h.T
    assert np.max(np.abs(gram - np.eye(9))) < 1e-12


def test_inner_product_trivial_cases():
    h0 = basis_function(1, 1.0, (0,))
    h1 = basis_function(1, 1.0, (1,))
    assert inner_product(h0, h0) == pytest.approx(1.0)
    assert inner_product(h0, h1) == 0.0


def test_mixed_scale_gaussian_overlap():
    # closed-form overlap sqrt(2 s1 s2 / (s1^2 + s2^2))
    got = inner_product(gaussian(1, 1.0), gaussian(1, 2.0))
    assert abs(got - np.sqrt(4.0 / 5.0)) < 1e-10


def test_inner_product_sesquilinear_and_dimension_check():
    rng = np.random.default_rng(0)
    f = random_test_function(rng)
    g = random_test_function(rng)
    z = 0.7 - 0.2j
    assert inner_product(f.scaled(z), g) == pytest.approx(np.conj(z) * inner_product(f, g))
    assert inner_product(f, g.scaled(z)) == pytest.approx(z * inner_product(f, g))
    with pytest.raises(Exception):
        inner_product(f, gaussian(2, 1.0))


def test_gauge_rotate():
    rng = np.random.default_rng(1)
    f = random_test_function(rng)
    g = random_test_function(rng)
    assert gauge_rotate(f, 0.0).coeffs == f.coeffs
    twice = gauge_rotate(gauge_rotate(f, np.pi), np.pi)
    for k, c in f.coeffs.items():
        assert twice.coeffs[k] == pytest.approx(c)
    u = 0.7
    assert inner_product(gauge_rotate(f, u), gauge_rotate(g, u)) == pytest.approx(
        inner_product(f, g))


def test_partition_function_closed_form_and_spectral():
    m = HarmonicTrap(1.0, 1)
    assert partition_function(m, 1.0) == pytest.approx(1.0 / (2.0 * np.sinh(1.0)), abs=1e-15)
    m2 = HarmonicTrap(1.0, 2)
    assert partition_function(m2, 1.0) == pytest.approx((2.0 * np.sinh(1.0)) ** -2, abs=1e-15)
    assert abs(partition_function(m, 1.0) - partition_function_spectral(m, 1.0, 200)) < 1e-12
    with pytest.raises(ScaleOverflowError):
        partition_function(HarmonicTrap(100000.0, 1), 1e-3)


def test_eigenvalue_scaling_covariance():
    unit = HarmonicTrap(1.0, 2)
    scaled = HarmonicTrap(3.0, 2)
    for idx in [(0, 0), (1, 2), (4, 1)]:
        assert scaled.eigenvalue(idx) == unit.eigenvalue(idx) / 9.0


def test_project_out_ground():
    m = HarmonicTrap(1.0, 1)
    e0 = m.eigenfunction((0,))
    e1 = m.eigenfunction((1,))
    assert project_out_ground(m, e0).is_zero()
    assert project_out_ground(m, e1).coeffs == e1.coeffs
    rng = np.random.default_rng(2)
    f = random_test_function(rng)
    assert abs(inner_product(e0, project_out_ground(m, f))) == 0.0
    with pytest.raises(ValueError):
        project_out_ground(m, gaussian(1, 2.0))


def test_fourier_self_duality():
    # momentum evaluator must equal the numerically transformed function
    x = np.linspace(-18.0, 18.0, 36001)
    p = np.array([0.3, 1.1, -2.0, 4.5])
    for k in range(5):
        f = basis_function(1, 1.0, (k,))
        fx = f.evaluate(x[:, None])
        ft = np.trapezoid(fx * np.exp(-1j * np.outer(p, x)), x, axis=1) / np.sqrt(2 * np.pi)
        exact = f.evaluate_momentum(p[:, None])
        assert np.max(np.abs(ft - exact)) < 1e-10


def test_domain_classification_cases():
    assert domain_classify(FreeLaplacian(3), LimitKind.FREE_ZERO_MODE,
                           gaussian(3, 1.0)).status is DomainStatus.REGULAR
    assert domain_classify(FreeLaplacian(1), LimitKind.FREE_ZERO_MODE,
                           gaussian(1, 1.0)).status is DomainStatus.DIVERGENT
    assert domain_classify(FreeLaplacian(1), LimitKind.FREE_ZERO_MODE,
                           basis_function(1, 1.0, (1,))).status is DomainStatus.REGULAR
    trap = HarmonicTrap(1.0, 1)
    assert domain_classify(trap, LimitKind.TRAP_GROUND,
                           trap.eigenfunction((0,))).status is DomainStatus.DIVERGENT
    assert domain_classify(trap, LimitKind.TRAP_GROUND,
                           trap.eigenfunction((1,))).status is DomainStatus.REGULAR
    with pytest.raises(ValueError):
        domain_classify(trap, LimitKind.TRAP_GROUND, TestFunction(1, 1.0, {}))


def test_trap_regular_iff_projection_invariant():
    trap = HarmonicTrap(1.0, 1)
    rng = np.random.default_rng(3)
    for _ in range(5):
        f = random_test_function(rng)
        verdict = domain_classify(trap, LimitKind.TRAP_GROUND, f)
        unchanged = abs(inner_product(f, f)
                        - inner_product(project_out_ground(trap, f),
                                        project_out_ground(trap, f))) < 1e-20
        assert (verdict.status is DomainStatus.REGULAR) == unchanged


def test_expand_in_model_basis_roundtrip():
    trap = HarmonicTrap(2.0, 1)
    f = gaussian(1, 1.0)
    converted = expand_in_model_basis(trap, f)
    assert converted.scale == 2.0
    assert converted.norm_squared() == pytest.approx(1.0, abs=1e-10)
    # overlaps with the original agree with the direct mixed-scale value
    assert inner_product(converted, converted).real == pytest.approx(1.0, abs=1e-10)
    assert abs(ground_overlap(trap, f) - converted.coeffs[(0,)]) < 1e-12
