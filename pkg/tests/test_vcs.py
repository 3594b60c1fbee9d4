import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from matvcs.errors import ConvergenceError, DimensionError, PreconditionError
from matvcs.families import csc_example, diagonal_family, log_factorial_moment, rotation, su2_matrix
from matvcs.jaynes_cummings import JCParams, build_jc_cs, jc_family, weights_G
from matvcs.vcs import (
    FockTruncation,
    MatrixVariable,
    MomentFamily,
    build_particular_class,
    build_scalar_cs,
    build_vcs_rz,
    build_vcs_zr,
    inner_product,
    normalization_rz,
    series_terms,
    total_norm,
    zr_condition_report,
)

T1 = FockTruncation(1, tail_tolerance=1e-16)
T2 = FockTruncation(2, tail_tolerance=1e-16)


def identity_family(n=2, ordering="rz"):
    return MomentFamily(n, lambda m: np.eye(n) / math.sqrt(math.factorial(m)), name="id", ordering=ordering,
                        invertible_all_m=True, r0_identity=True, commutes_with_Z=True)


# -- scalar coherent states -------------------------------------------------------

def test_scalar_vacuum():
    s = build_scalar_cs(math.factorial, 0.0, T1)
    assert s.normalization_constant == 1.0
    np.testing.assert_array_equal(s.normalized()[:, 0], np.eye(s.n_levels)[0])


def test_scalar_canonical_normalization_is_e():
    assert build_scalar_cs(math.factorial, 1.0, T1).normalization_constant == pytest.approx(math.e, rel=1e-15)


def test_scalar_scaled_factorial_normalization():
    s = build_scalar_cs(lambda n: 1.02 ** n * math.factorial(n), 1.0, T1)
    assert s.normalization_constant == pytest.approx(math.exp(1 / 1.02), rel=1e-14)


def test_scalar_divergent_series_reports_partial_sums():
    with pytest.raises(ConvergenceError) as info:
        build_scalar_cs(lambda n: 1.0, 1.5, FockTruncation(1, level_cutoff=50))
    assert len(info.value.partial_sums) == 51
    assert np.all(np.diff(info.value.partial_sums) > 0)


@given(st.floats(0, 4), st.floats(0, 2 * math.pi))
def test_scalar_state_has_unit_norm(r, th):
    s = build_scalar_cs(math.factorial, r * np.exp(1j * th), T1)
    assert s.norm_squared() == pytest.approx(1.0, abs=1e-14)
    assert s.tail_bound <= 1e-16 * s.normalization_constant


# -- R-Z ordering -----------------------------------------------------------------

def test_rz_zero_label_gives_basis_vector():
    for j in range(2):
        s = build_vcs_rz(identity_family(), np.zeros((2, 2)), j, T2)
        expected = np.zeros((s.n_levels, 2))
        expected[0, j] = 1.0
        np.testing.assert_array_equal(s.coefficients, expected)


def test_zero_label_normalization_is_trace_of_identity():
    assert normalization_rz(identity_family(), np.zeros((2, 2)), T2).value == 2.0


@pytest.mark.parametrize("r", [0.5, 1.0, 2.0])
def test_csc_a_normalization(r):
    m = csc_example("a")
    N = normalization_rz(m.family, m.Z([r]), T2).value
    assert N == pytest.approx(4 * math.exp(r * r), rel=1e-12)


def test_diagonal_jc_components_are_scalar_states():
    p = JCParams(1.0, 0.5, 0.1)
    z = (0.9 + 0.4j, -0.3 + 1.1j)
    vec = [build_jc_cs(p, *z, j, T2) for j in range(2)]
    for j, w in enumerate(p.slopes):
        sc = build_scalar_cs(lambda n, w=w: w ** n * math.factorial(n), z[j], T1)
        L = min(sc.n_levels, vec[j].n_levels)
        np.testing.assert_allclose(vec[j].coefficients[:L, j], sc.coefficients[:L, 0], rtol=1e-13, atol=1e-300)
        np.testing.assert_array_equal(vec[j].coefficients[:, 1 - j], 0)


@given(st.floats(0, 3), st.floats(0, 3), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_rz_norms_sum_to_one(r1, r2, t1, t2):
    fam = jc_family(JCParams(1.0, 0.5, 0.1))
    Z = np.diag([r1 * np.exp(1j * t1), r2 * np.exp(1j * t2)])
    states = [build_vcs_rz(fam, Z, j, T2) for j in range(2)]
    assert abs(total_norm(states) - 1) <= 1e-14


@given(st.integers(0, 1000))
def test_incremental_power_matches_direct_power(seed):
    rng = np.random.default_rng(seed)
    Z = 0.8 * (rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))) / math.sqrt(2)
    fam = identity_family()
    terms = series_terms(fam, Z, FockTruncation(2, level_cutoff=40, adaptive=False)).terms
    for m in (1, 7, 20, 40):
        direct = fam.R(m) @ np.linalg.matrix_power(Z, m)
        assert np.max(np.abs(terms[m] - direct)) <= 1e-13 * max(1.0, np.max(np.abs(direct)))


def test_dimension_mismatch():
    with pytest.raises(DimensionError):
        build_vcs_rz(identity_family(), np.zeros((3, 3)), 0, T2)
    with pytest.raises(DimensionError):
        build_vcs_rz(identity_family(), np.zeros((2, 2)), 2, T2)


def test_r0_identity_flag_is_enforced():
    with pytest.raises(PreconditionError):
        MomentFamily(2, lambda m: 2 * np.eye(2), r0_identity=True)


def test_generator_shape_is_checked():
    fam = MomentFamily(2, lambda m: np.eye(3))
    with pytest.raises(DimensionError):
        fam.R(0)


def test_matrix_variable_at_zero_phase_is_amplitude():
    var = MatrixVariable(lambda r: np.array([[r[0], 1.0], [0.0, -r[0]]]))
    np.testing.assert_array_equal(var.matrix([0.7]), var.amplitude(np.array([0.7])))
    np.testing.assert_allclose(var.matrix([0.7], [0.3]), var.amplitude(np.array([0.7])) * np.exp(0.3j))


# -- Z-R ordering (Clifford-type) ---------------------------------------------------

def test_zr_zero_label():
    fam = identity_family(ordering="zr")
    s = build_vcs_zr(fam, np.zeros((2, 2)), 1, T2)
    np.testing.assert_array_equal(s.coefficients[0], fam.R(0)[:, 1])
    assert np.all(s.coefficients[1:] == 0)


def test_zr_scalar_reduces_to_canonical():
    fam = identity_family(1, "zr")
    z = 0.6 - 1.2j
    a = build_vcs_zr(fam, np.array([[z]]), 0, T1)
    b = build_scalar_cs(math.factorial, z, T1)
    np.testing.assert_allclose(a.normalized(), b.normalized(), atol=1e-15)


def test_zr_unitary_label_gives_e():
    U = su2_matrix(0.3, 1.1, -0.7)
    fam = identity_family(ordering="zr")
    rho, f, rdev, zdev = zr_condition_report(fam, U, 20)
    assert f == pytest.approx(1.0, abs=1e-14)
    s = build_vcs_zr(fam, U, 0, T2)
    assert s.normalization_constant == pytest.approx(math.e, rel=1e-14)
    assert s.norm_squared() == pytest.approx(1.0, abs=1e-14)
    assert max(rdev, zdev) <= 1e-10


def test_zr_condition_violation_names_level():
    fam = MomentFamily(2, lambda m: np.diag([1.0, 2.0 ** -m]), ordering="zr")
    with pytest.raises(PreconditionError, match=r"R\(1\)"):
        build_vcs_zr(fam, np.eye(2) * 0.5, 0, T2)
    with pytest.raises(PreconditionError, match=r"Z\^1"):
        build_vcs_zr(identity_family(ordering="zr"), np.diag([1.0, 0.5]), 0, T2)


def test_zr_trace_convention_is_n_times_state_convention():
    U = 1.3 * su2_matrix(0.3, 1.1, -0.7)
    fam = identity_family(ordering="zr")
    a = build_vcs_zr(fam, U, 0, T2, convention="state")
    b = build_vcs_zr(fam, U, 0, T2, convention="trace")
    assert b.normalization_constant == pytest.approx(2 * a.normalization_constant, rel=1e-15)
    assert total_norm([build_vcs_zr(fam, U, j, T2, convention="trace") for j in range(2)]) == pytest.approx(1, abs=1e-14)


# -- orthogonal-conjugation class ---------------------------------------------------

def _rho(w):
    return lambda m: 1.0 / math.sqrt(w ** m * math.factorial(m))


def test_particular_class_identity_is_diagonal():
    pc = build_particular_class(np.eye(2), [lambda z: z] * 2, [0.5, 1.5j], [_rho(1.0), _rho(2.0)], T2)
    assert np.count_nonzero(pc.Z - np.diag(np.diag(pc.Z))) == 0
    assert np.count_nonzero(pc.family.R(3) - np.diag(np.diag(pc.family.R(3)))) == 0


def test_particular_class_normalization_formula():
    z = [1.2 * np.exp(0.4j), 0.7 * np.exp(-2.0j)]
    w = (1.0, 0.5)
    pc = build_particular_class(rotation(0.7), [lambda z: z] * 2, z, [_rho(w[0]), _rho(w[1])], T2)
    N = normalization_rz(pc.family, pc.Z, T2).value
    expected = sum(math.exp(abs(zi) ** 2 / wi) for zi, wi in zip(z, w))
    assert N == pytest.approx(expected, rel=1e-13)
    assert total_norm(pc.states) == pytest.approx(1.0, abs=1e-14)


@given(st.floats(0, 2 * math.pi), st.floats(0.1, 2), st.floats(0.1, 2), st.integers(0, 12), st.integers(0, 12))
def test_particular_class_products_are_diagonal(x, r1, r2, m, l):
    pc = build_particular_class(rotation(x), [lambda z: z] * 2, [r1 * 1j, r2], [_rho(1.0), _rho(0.5)], T2)
    A = pc.family.R(m) @ np.linalg.matrix_power(pc.Z, m)
    B = pc.family.R(l) @ np.linalg.matrix_power(pc.Z, l)
    P = A @ B.conj().T
    assert abs(P[0, 1]) <= 1e-12 and abs(P[1, 0]) <= 1e-12
    d = [_rho(1.0)(m) * _rho(1.0)(l) * (r1 * 1j) ** m * np.conj(r1 * 1j) ** l,
         _rho(0.5)(m) * _rho(0.5)(l) * r2 ** (m + l)]
    np.testing.assert_allclose(np.diag(P), d, atol=1e-12)


def test_particular_class_rejects_non_orthogonal():
    with pytest.raises(PreconditionError):
        build_particular_class(np.array([[1.0, 0.1], [0.0, 1.0]]), [lambda z: z] * 2, [1, 1],
                               [_rho(1), _rho(1)], T2)


# -- inner products and export --------------------------------------------------------

def test_orthogonal_components_of_diagonal_family():
    fam = diagonal_family([log_factorial_moment(), log_factorial_moment(0.5)], "d")
    Z = np.diag([1 + 1j, 0.5])
    a, b = (build_vcs_rz(fam, Z, j, T2) for j in range(2))
    assert inner_product(a, b) == 0
    assert inner_product(a, a).real + inner_product(b, b).real == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize("r1, r2", [(0.0, 0.0), (1.0, 0.5), (2.0, 2.0)])
def test_jc_first_component_norm_is_G(r1, r2):
    p = JCParams(1.0, 0.5, 0.1)
    s = build_jc_cs(p, r1, r2, 0, T2)
    G, _ = weights_G(p, r1, r2)
    assert inner_product(s, s).real == pytest.approx(G, abs=1e-10)


def test_inner_product_dimension_mismatch():
    a = build_scalar_cs(math.factorial, 1.0, T1)
    b = build_jc_cs(JCParams(1.0, 0.5, 0.1), 1.0, 1.0, 0, T2)
    with pytest.raises(DimensionError):
        inner_product(a, b)


def test_json_rows():
    s = build_scalar_cs(math.factorial, 0.5, T1)
    rows = json.loads(s.to_json())
    assert rows[0][0] == 0 and rows[0][1] == [pytest.approx(math.exp(-0.125))]
    assert len(rows) == s.n_levels


def test_truncation_validation():
    with pytest.raises(ValueError):
        FockTruncation(0)
    with pytest.raises(ValueError):
        FockTruncation(2, tail_tolerance=0)
