import cmath
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matvcs.audit import audit_moment, audit_moments
from matvcs.errors import PreconditionError, SingularityError
from matvcs.susy import (
    ProductMoments,
    RhoParams,
    SU2Element,
    broken_susy_cs,
    broken_susy_model,
    build_rho_cs,
    haar_su2,
    monte_carlo_resolution,
    radial_moment,
    rho_energies,
    rho_model,
    rho_moments,
    rho_normalization,
    rho_potentials,
    rho_u,
    su2_rotated_cs,
)
from matvcs.vcs import FockTruncation

pytestmark = pytest.mark.filterwarnings("ignore::RuntimeWarning")

TRUNC = FockTruncation(2, tail_tolerance=1e-16)


def canonical(z):
    n = np.arange(60)
    c = np.array([z ** k / math.sqrt(math.factorial(k)) for k in n])
    return c / np.linalg.norm(c)


# -- spectrum and moments --------------------------------------------------------------

def test_ground_energy_of_minus_branch():
    assert rho_energies(RhoParams(), 0, "-") == 0.0


@pytest.mark.parametrize("eps", [0.0, 0.5, 1.0])
def test_shifted_plus_spectrum(eps):
    p = RhoParams(epsilon=eps)
    e0 = rho_energies(p, 0, "+")
    for n in range(51):
        assert rho_energies(p, n, "+") - e0 == 2 * n
        if n:
            assert rho_energies(p, n, "-") == rho_energies(p, n - 1, "+")


def test_energy_argument_checks():
    with pytest.raises(ValueError):
        rho_energies(RhoParams(), -1, "+")
    with pytest.raises(ValueError):
        rho_energies(RhoParams(), 1, "x")


def test_moments_at_zero():
    assert rho_moments(RhoParams(epsilon=0.3), 0) == (1.0, 1.0)


def test_minus_moment_example():
    assert rho_moments(RhoParams(epsilon=1.0), 3)[1] == pytest.approx(192.0, rel=1e-15)


def test_plus_moment_telescopes():
    p = RhoParams(epsilon=0.7)
    for n in range(1, 30):
        prod = math.prod(rho_energies(p, k, "+") - rho_energies(p, 0, "+") for k in range(1, n + 1))
        assert rho_moments(p, n)[0] == pytest.approx(prod, rel=1e-13)


@pytest.mark.parametrize("eps", [-0.5, 0.5, 1.0, 2.0, 7.3])
def test_minus_moment_recursion(eps):
    p = RhoParams(epsilon=eps)
    for n in range(51):
        ratio = rho_moments(p, n + 1)[1] / rho_moments(p, n)[1]
        assert ratio == pytest.approx(2 * (n + (eps + 3) / 2), rel=1e-13)


@pytest.mark.parametrize("args", [dict(gamma=-1.0), dict(epsilon=-1.0), dict(epsilon=-2.0)])
def test_parameter_validation(args):
    with pytest.raises(Exception):
        RhoParams(**args)


def test_strict_positivity():
    p = RhoParams(gamma=0.0, epsilon=1.0, beta=0.0)
    assert RhoParams(gamma=0.0, epsilon=1.0, beta=0.0, strict=True) == RhoParams(0.0, 1.0, 0.0, True)
    assert p.positivity_problems() == p.positivity_problems()
    with pytest.raises(Exception):
        RhoParams(gamma=0.0, epsilon=1.0, beta=1e6, strict=True)


# -- states ------------------------------------------------------------------------

def test_vacuum_normalization():
    p = RhoParams(epsilon=0.5)
    assert rho_normalization(p, 0, 0) == 2.0
    assert build_rho_cs(p, 0, 0, 0, TRUNC).normalization_constant == 2.0


@given(st.floats(0, 4), st.floats(0.01, 4))
def test_kummer_identity_at_unit_epsilon(r1, r2):
    expected = math.exp(r1 ** 2 / 2) + 2 * (math.exp(r2 ** 2 / 2) - 1) / r2 ** 2
    assert rho_normalization(RhoParams(), r1, r2) == pytest.approx(expected, rel=1e-12)


def test_series_normalization_matches_closed_form():
    p = RhoParams(epsilon=0.5)
    states = [build_rho_cs(p, 0.7j, 2.0, j, TRUNC) for j in range(2)]
    closed = rho_normalization(p, 0.7, 2.0)
    assert states[0].normalization_constant == pytest.approx(closed, rel=1e-10)
    series = sum(np.sum(np.abs(s.coefficients) ** 2) for s in states)
    assert series == pytest.approx(closed, rel=1e-10)
    assert sum(s.norm_squared() for s in states) == pytest.approx(1.0, abs=1e-12)


# -- potentials -------------------------------------------------------------------------

def test_plus_potential_asymptotics():
    p = RhoParams(gamma=0.25, epsilon=1.0)
    x = 1e4
    vp, _ = rho_potentials(p, x)
    assert vp - x * x / 2 == pytest.approx(1.0 - 0.25 - 1.5, abs=1e-7)


@pytest.mark.parametrize("x", [0.3, 1.0, 2.5])
def test_minus_potential_collapses_at_unit_epsilon(x):
    g = 0.25
    p = RhoParams(gamma=g, epsilon=1.0, beta=0.0)
    u, du = rho_u(p, x)
    assert u == 1.0 and du == 0.0
    _, vm = rho_potentials(p, x)
    assert vm == pytest.approx(x * x / 2 + g * (g + 2) / (2 * x * x) - 1 - g - 0.5, rel=1e-14)


@pytest.mark.parametrize("beta", [0.0, 0.1])
@pytest.mark.parametrize("x", [0.4, 1.3])
def test_u_derivative_by_finite_difference(beta, x):
    p = RhoParams(gamma=0.3, epsilon=0.4, beta=beta)
    h = 1e-6
    fd = (rho_u(p, x + h)[0] - rho_u(p, x - h)[0]) / (2 * h)
    assert rho_u(p, x)[1] == pytest.approx(fd, rel=1e-7, abs=1e-9)


def test_vanishing_u_is_reported():
    # gamma = 0, epsilon = 3: u = 1F1(-1; -1/2; -x^2) = 1 - 2 x^2, zero at x = 1/sqrt(2)
    p = RhoParams(gamma=0.0, epsilon=3.0)
    assert rho_u(p, 0.5)[0] == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(SingularityError):
        rho_potentials(p, 1 / math.sqrt(2))


def test_potentials_need_positive_coordinate():
    with pytest.raises(ValueError):
        rho_potentials(RhoParams(), 0.0)


# -- measures ---------------------------------------------------------------------------

def test_corrected_minus_weight_moment():
    eps = 0.5
    c = 1 / (2 ** ((eps + 1) / 2) * math.gamma((eps + 3) / 2))
    got = radial_moment(lambda r: c * r ** (eps + 2) * np.exp(-r * r / 2), 5)
    assert got == pytest.approx(rho_moments(RhoParams(epsilon=eps), 5)[1], rel=1e-8)


def test_corrected_plus_weight_moments():
    for n in range(21):
        got = radial_moment(lambda r: r * np.exp(-r * r / 2), n)
        assert got / rho_moments(RhoParams(), n)[0] == pytest.approx(1.0, abs=1e-8)


@pytest.mark.parametrize("n, expected", [(0, 1.0), (1, 0.5), (3, 0.25)])
def test_printed_measure_minus_component_at_unit_epsilon(n, expected):
    model = rho_model(RhoParams(epsilon=1.0))
    res = audit_moment(model.family, model.variable, model.measures["printed"], model.normalization, n)
    assert res.matrix[1, 1].real == pytest.approx(expected, abs=1e-10)
    assert res.matrix[0, 0].real == pytest.approx(1.0, abs=1e-10)


@pytest.mark.parametrize("eps", [0.5, 1.0, 2.0])
def test_printed_measure_level_zero(eps):
    model = rho_model(RhoParams(epsilon=eps))
    res = audit_moment(model.family, model.variable, model.measures["printed"], model.normalization, 0)
    b = (eps + 3) / 2
    assert res.deviation == pytest.approx(abs(4 / (2 ** b * math.gamma(b)) - 1), abs=1e-10)


# -- broken SUSY ---------------------------------------------------------------------------

def test_product_moments_precondition():
    with pytest.raises(PreconditionError):
        ProductMoments([1.0, 2.0])
    pm = ProductMoments([0.0, 1.0, 1.0])
    with pytest.raises(PreconditionError):
        pm(2)


def test_product_moments_values():
    pm = ProductMoments(lambda n: 2.0 * n)
    for n in range(20):
        assert pm(n) == pytest.approx(2.0 ** n * math.factorial(n), rel=1e-13)


@pytest.mark.parametrize("j", [0, 1])
def test_unit_spacing_gives_canonical_states(j):
    z1, z2 = 0.9 - 0.4j, 1.3j
    s = broken_susy_cs(lambda n: float(n), z1, z2, j, TRUNC).normalized()
    z = (z1, z2)[j]
    ref = canonical(z)
    L = min(len(ref), s.shape[0])
    np.testing.assert_allclose(s[:L, j] / np.linalg.norm(s[:, j]), ref[:L], atol=1e-14)
    assert not s[:, 1 - j].any()


@given(st.floats(0, 2), st.floats(0, 2 * math.pi))
def test_conjugate_pair_norms_and_total(r, th):
    z = cmath.rect(r, th)
    states = [broken_susy_cs(lambda n: 2.0 * n, z, z.conjugate(), j, TRUNC) for j in range(2)]
    a, b = (s.norm_squared() for s in states)
    assert a == pytest.approx(b, abs=1e-14)
    assert a + b == pytest.approx(1.0, abs=1e-12)


def test_broken_susy_measure_audit():
    model = broken_susy_model()
    res = audit_moments(model.family, model.variable, model.measures["gaussian"], model.normalization, range(11))
    assert all(r.passed for r in res)


# -- SU(2) rotations ---------------------------------------------------------------------

def test_su2_validation():
    with pytest.raises(PreconditionError):
        SU2Element(1.0, 1.0)
    with pytest.raises(PreconditionError):
        SU2Element.from_matrix(np.diag([1.0, -1.0]))
    with pytest.raises(PreconditionError):
        SU2Element.from_matrix(np.eye(3))
    U = haar_su2(np.random.default_rng(1))
    M = U.matrix
    np.testing.assert_allclose(M.conj().T @ M, np.eye(2), atol=1e-12)
    assert abs(np.linalg.det(M) - 1) <= 1e-12
    assert SU2Element.from_matrix(M) == U


def test_identity_rotation_is_unrotated():
    for j in range(2):
        a = su2_rotated_cs(lambda n: 2.0 * n, 1 + 1j, 0.4, np.eye(2), j, TRUNC)
        b = broken_susy_cs(lambda n: 2.0 * n, 1 + 1j, 0.4, j, TRUNC)
        np.testing.assert_allclose(a.coefficients, b.coefficients, atol=1e-15)


def test_rotation_rejects_non_special_unitary():
    with pytest.raises(PreconditionError):
        su2_rotated_cs(lambda n: 2.0 * n, 1, 1, np.diag([1j, 1j]), 0)


def test_normalization_invariant_under_haar_rotations():
    rng = np.random.default_rng(7)
    z = 1.1 + 0.6j
    pm = ProductMoments(lambda n: 2.0 * n)
    base = sum(broken_susy_cs(pm, z, z.conjugate(), j, TRUNC).norm_squared() for j in range(2))
    for _ in range(100):
        U = haar_su2(rng)
        total = sum(su2_rotated_cs(pm, z, z.conjugate(), U, j, TRUNC).norm_squared() for j in range(2))
        assert total == pytest.approx(base, abs=1e-12)


def test_small_monte_carlo_resolution():
    rep = monte_carlo_resolution(max_level=1, n_samples=50_000, seed=3, n_streams=4, tol=5e-2)
    assert rep.passed
    assert rep.deviation <= 6 * rep.standard_error + 1e-3
    again = monte_carlo_resolution(max_level=1, n_samples=50_000, seed=3, n_streams=4, tol=5e-2)
    np.testing.assert_array_equal(rep.blocks, again.blocks)
