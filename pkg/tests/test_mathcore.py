import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matvcs.errors import DimensionError, DomainError, PoleError, TruncationError
from matvcs.mathcore import (
    SpecialFunctionConfig,
    dagger,
    gamma_fn,
    hermitian_modulus,
    kummer_1f1,
    kummer_1f1_derivative,
    log_gamma,
    pochhammer,
    pochhammer_gamma_ratio,
)

mpmath.mp.dps = 40


def complex_matrices(n):
    part = st.floats(-3, 3, allow_nan=False)
    return st.lists(st.tuples(part, part), min_size=n * n, max_size=n * n).map(
        lambda xs: np.array([complex(a, b) for a, b in xs]).reshape(n, n))


# -- matrix kernel ----------------------------------------------------------------

def test_modulus_of_identity_is_identity():
    np.testing.assert_allclose(hermitian_modulus(np.eye(3)), np.eye(3), atol=1e-15)


def test_modulus_of_diagonal():
    np.testing.assert_allclose(hermitian_modulus(np.diag([2j, -3])), np.diag([2, 3]), atol=1e-15)


def test_modulus_squares_back_random():
    rng = np.random.default_rng(0)
    M = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    R = hermitian_modulus(M)
    np.testing.assert_allclose(R @ R, M @ dagger(M), atol=1e-12)


def test_modulus_rejects_non_square():
    with pytest.raises(DimensionError):
        hermitian_modulus(np.ones((2, 3)))


@given(complex_matrices(3))
def test_modulus_is_hermitian_psd(M):
    R = hermitian_modulus(M)
    np.testing.assert_allclose(R, dagger(R), atol=1e-12)
    assert np.linalg.eigvalsh(R).min() >= -1e-12


@given(st.integers(0, 10_000))
def test_modulus_reproduces_mm_dagger_for_conditioned_matrices(seed):
    rng = np.random.default_rng(seed)
    U, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    V, _ = np.linalg.qr(rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3)))
    s = np.exp(rng.uniform(0, math.log(1e6), 3))
    s[0] = 1.0
    M = U @ np.diag(s) @ V
    R = hermitian_modulus(M)
    target = M @ dagger(M)
    assert np.linalg.norm(R @ R - target) / np.linalg.norm(target) <= 1e-10


@given(complex_matrices(2))
def test_dagger_involution_and_trace_cyclicity(M):
    np.testing.assert_array_equal(dagger(dagger(M)), M)
    a = np.trace(dagger(M) @ M)
    b = np.trace(M @ dagger(M))
    assert abs(a - b) <= 1e-12 * max(1.0, abs(a))
    assert a.real >= 0
    assert abs(a.real - np.sum(np.abs(M) ** 2)) <= 1e-12 * max(1.0, a.real)


# -- Gamma and Pochhammer -------------------------------------------------------

@pytest.mark.parametrize("x, expected", [(1.0, 1.0), (5.0, 24.0)])
def test_gamma_trivial(x, expected):
    assert gamma_fn(x) == pytest.approx(expected, rel=1e-15)


def test_gamma_half_against_mpmath():
    assert gamma_fn(0.5) == pytest.approx(float(mpmath.sqrt(mpmath.pi)), rel=1e-15)


@pytest.mark.parametrize("x", [0.0, -1.0, -2.5])
def test_gamma_domain(x):
    with pytest.raises(DomainError):
        gamma_fn(x)
    with pytest.raises(DomainError):
        log_gamma(x)


@given(st.floats(0.01, 150))
def test_log_gamma_matches_mpmath(x):
    assert log_gamma(x) == pytest.approx(float(mpmath.loggamma(x)), rel=1e-13, abs=1e-13)


def test_pochhammer_examples():
    assert pochhammer(3.7, 0) == 1.0
    assert pochhammer(2, 3) == 24
    assert pochhammer(2.5, 4) == pytest.approx(gamma_fn(6.5) / gamma_fn(2.5), rel=1e-12)


@given(st.floats(0.1, 20), st.integers(0, 50))
def test_pochhammer_product_equals_gamma_ratio(a, n):
    assert pochhammer(a, n) == pytest.approx(pochhammer_gamma_ratio(a, n), rel=1e-12)


# -- confluent hypergeometric ---------------------------------------------------

def test_kummer_trivial():
    assert kummer_1f1(0.3, 1.7, 0.0) == 1.0
    assert kummer_1f1(1, 1, 2.0) == pytest.approx(math.exp(2.0), rel=1e-14)


def test_kummer_one_two_one_is_e_minus_one():
    assert kummer_1f1(1, 2, 1.0) == pytest.approx(math.e - 1, rel=1e-14)


@given(st.floats(-30, 30))
def test_kummer_exp_identity(x):
    assert kummer_1f1(1, 1, x) == pytest.approx(math.exp(x), rel=1e-12)


@given(st.floats(-2, 4), st.floats(0.3, 6), st.floats(-25, 25))
def test_kummer_matches_mpmath(a, b, x):
    ref = float(mpmath.hyp1f1(a, b, x))
    assert kummer_1f1(a, b, x) == pytest.approx(ref, rel=1e-10, abs=1e-12 * max(1.0, math.exp(min(x, 0.0))))


@pytest.mark.parametrize("b", [0.0, -1.0, -3.0])
def test_kummer_pole(b):
    with pytest.raises(PoleError):
        kummer_1f1(0.5, b, 1.0)


def test_kummer_truncation_error_carries_residual():
    with pytest.raises(TruncationError) as info:
        kummer_1f1(1.0, 1.5, 40.0, SpecialFunctionConfig(max_terms=5))
    assert info.value.residual > 0


@pytest.mark.parametrize("x", [-2.0, 0.3, 3.0])
def test_kummer_derivative_finite_difference(x):
    h = 1e-5
    fd = (kummer_1f1(0.7, 1.9, x + h) - kummer_1f1(0.7, 1.9, x - h)) / (2 * h)
    assert kummer_1f1_derivative(0.7, 1.9, x) == pytest.approx(fd, rel=1e-8)


def test_config_validation():
    with pytest.raises(ValueError):
        SpecialFunctionConfig(series_tolerance=0)
    with pytest.raises(ValueError):
        SpecialFunctionConfig(max_terms=0)


@pytest.mark.parametrize("x", [-1e6, -2.0, 0.5, 3.0])
def test_kummer_terminating_series_is_polynomial(x):
    assert kummer_1f1(0.0, -0.75, x) == 1.0
    assert kummer_1f1(-1.0, -0.5, x) == pytest.approx(1 + 2 * x, rel=1e-15)
    assert kummer_1f1(-2.0, 1.5, x) == pytest.approx(1 - 4 * x / 3 + 4 * x * x / 15, rel=1e-14)
