"""Construction of scalar coherent states and matrix-moment vector coherent states.

A vector coherent state lives in C^n (x) H.  We store it as a stack of
coefficient vectors ``v_m`` in C^n, one per Fock level ``m``, together with the
normalization constant ``N`` that the stack has to be divided by.  Keeping ``N``
apart lets the same object serve both the "sum over components equals one"
convention and the "each state has unit norm" convention.

Component indices are 0-based throughout: component 0 is the first canonical
basis vector of C^n.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .errors import ConvergenceError, DimensionError, PreconditionError
from .mathcore import as_square, dagger

logger = logging.getLogger(__name__)

__all__ = [
    "FockTruncation",
    "MomentFamily",
    "MatrixVariable",
    "VcsState",
    "SeriesTerms",
    "Normalization",
    "series_terms",
    "build_scalar_cs",
    "build_vcs_rz",
    "build_vcs_zr",
    "normalization_rz",
    "build_particular_class",
    "ParticularClass",
    "zr_condition_report",
    "inner_product",
    "total_norm",
]

_POWER_CHECK_LEVELS = (8, 64)


@dataclass(frozen=True)
class FockTruncation:
    """How many Fock levels to keep.

    With ``adaptive=True`` the series is extended until the last term is below
    ``tail_tolerance`` relative to the running sum, never past ``level_cutoff``.
    With ``adaptive=False`` exactly ``level_cutoff + 1`` levels are kept.
    """

    n_components: int
    level_cutoff: int = 512
    tail_tolerance: float = 1e-14
    adaptive: bool = True

    def __post_init__(self):
        if self.n_components < 1:
            raise ValueError("n_components must be positive")
        if self.level_cutoff < 1:
            raise ValueError("level_cutoff must be positive")
        if not self.tail_tolerance > 0:
            raise ValueError("tail_tolerance must be positive")


@dataclass(frozen=True, eq=False)
class MomentFamily:
    """The moment matrices ``R(m)`` of a vector coherent state family.

    ``ordering`` is ``"rz"`` when the state coefficients are ``R(m) Z^m`` and
    ``"zr"`` when they are ``Z^m R(m)``.  With ``extended=True`` the matrices
    are kept in long double; that matters when ``R(m)`` has to cancel a part
    of ``Z^m`` that grows geometrically faster than what survives.
    """

    dimension: int
    generator: Callable[[int], np.ndarray]
    name: str = "custom"
    ordering: str = "rz"
    invertible_all_m: bool = False
    r0_identity: bool = False
    commutes_with_Z: bool = False
    extended: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.ordering not in ("rz", "zr"):
            raise ValueError("ordering must be 'rz' or 'zr'")
        if self.r0_identity:
            R0 = self.R(0)
            if not np.array_equal(R0, np.eye(self.dimension)):
                raise PreconditionError(f"family {self.name!r} flags R(0)=I but R(0) = {R0}")

    def R(self, m: int) -> np.ndarray:
        if m < 0:
            raise ValueError("level must be nonnegative")
        try:
            return self._cache[m]
        except KeyError:
            pass
        Rm = np.asarray(self.generator(m), dtype=self.dtype)
        if Rm.shape != (self.dimension, self.dimension):
            raise DimensionError(f"R({m}) has shape {Rm.shape}, expected {(self.dimension,) * 2}")
        Rm.setflags(write=False)
        self._cache[m] = Rm
        return Rm

    @property
    def dtype(self):
        return np.clongdouble if self.extended else np.complex128

    def term(self, m: int, Zm: np.ndarray) -> np.ndarray:
        """``R(m) Z^m`` or ``Z^m R(m)`` according to the ordering; works on stacks."""
        if self.ordering == "rz":
            return self.R(m) @ Zm
        return Zm @ self.R(m)

    def with_ordering(self, ordering: str) -> "MomentFamily":
        return MomentFamily(
            self.dimension, self.generator, name=self.name, ordering=ordering,
            invertible_all_m=self.invertible_all_m, r0_identity=self.r0_identity,
            commutes_with_Z=self.commutes_with_Z, extended=self.extended,
        )


@dataclass(frozen=True, eq=False)
class MatrixVariable:
    """Parametrisation of the matrix label ``Z`` by radii and phases.

    ``amplitude`` maps radii of shape ``(..., n_radii)`` to ``A(r)`` of shape
    ``(..., n, n)``; it is the value of ``Z`` when every phase is zero.
    ``assemble(r, phases)`` builds ``Z`` at one point; by default it is
    ``A(r) e^{i zeta}`` with a single scalar phase.
    """

    amplitude: Callable[[np.ndarray], np.ndarray]
    n_radii: int = 1
    n_phases: int = 1
    assemble: Callable[[np.ndarray, np.ndarray], np.ndarray] | None = None

    def matrix(self, r, phases=None) -> np.ndarray:
        r = np.atleast_1d(np.asarray(r, dtype=float))
        if r.shape != (self.n_radii,):
            raise DimensionError(f"expected {self.n_radii} radii, got {r.shape}")
        phases = np.zeros(self.n_phases) if phases is None else np.atleast_1d(np.asarray(phases, dtype=float))
        if self.assemble is not None:
            return np.asarray(self.assemble(r, phases), dtype=complex)
        return np.asarray(self.amplitude(r), dtype=complex) * np.exp(1j * phases[0])


class SeriesTerms(NamedTuple):
    terms: np.ndarray  # (M+1, n, n): R(m) Z^m or Z^m R(m), complex128
    trace_sum: float   # sum_m Tr[T_m^dagger T_m]
    tail_bound: float  # estimate of the dropped part of trace_sum


class Normalization(NamedTuple):
    value: float
    tail_bound: float
    n_levels: int


@dataclass(frozen=True, eq=False)
class VcsState:
    """Truncated coefficient stack of a (vector) coherent state.

    ``coefficients[m]`` is the unnormalised vector ``v_m``; the state is
    ``N^{-1/2} sum_m v_m (x) phi_m`` with ``N = normalization_constant``.
    """

    coefficients: np.ndarray
    normalization_constant: float
    truncation: FockTruncation
    component: int | None = None
    weights: tuple | None = None
    tail_bound: float = 0.0
    label: str = ""

    def __post_init__(self):
        c = np.asarray(self.coefficients, dtype=complex)
        if c.ndim != 2:
            raise DimensionError("coefficients must have shape (levels, n_components)")
        if not self.normalization_constant > 0:
            raise ValueError("normalization constant must be positive")
        c.setflags(write=False)
        object.__setattr__(self, "coefficients", c)

    @property
    def n_levels(self) -> int:
        return self.coefficients.shape[0]

    @property
    def n_components(self) -> int:
        return self.coefficients.shape[1]

    def normalized(self) -> np.ndarray:
        return self.coefficients / math.sqrt(self.normalization_constant)

    def norm_squared(self) -> float:
        return float(np.sum(np.abs(self.coefficients) ** 2) / self.normalization_constant)

    def padded(self, n_levels: int) -> "VcsState":
        """Copy of the state with zero coefficients appended up to ``n_levels``."""
        extra = n_levels - self.n_levels
        if extra < 0:
            raise ValueError("cannot pad to fewer levels")
        c = np.vstack([self.coefficients, np.zeros((extra, self.n_components), complex)])
        return VcsState(c, self.normalization_constant, self.truncation, self.component,
                        self.weights, self.tail_bound, self.label)

    def replace_coefficients(self, coefficients, label: str | None = None) -> "VcsState":
        return VcsState(coefficients, self.normalization_constant, self.truncation, self.component,
                        self.weights, self.tail_bound, self.label if label is None else label)

    def to_rows(self) -> list:
        """``[m, [Re v_m], [Im v_m]]`` rows of the normalised state."""
        v = self.normalized()
        return [[m, v[m].real.tolist(), v[m].imag.tolist()] for m in range(self.n_levels)]

    def to_json(self) -> str:
        return json.dumps(self.to_rows())


def _check_power(P: np.ndarray, Z: np.ndarray, m: int) -> np.ndarray:
    direct = np.linalg.matrix_power(Z, m)
    scale = max(np.linalg.norm(direct), np.finfo(float).tiny)
    drift = np.linalg.norm(P - direct) / scale
    if drift > 1e-12:
        logger.warning("power drift %.3e at m=%d, resynchronising with direct power", drift, m)
        return direct
    return P


def series_terms(family: MomentFamily, Z, trunc: FockTruncation) -> SeriesTerms:
    """Accumulate ``T_m`` (``R(m) Z^m`` or ``Z^m R(m)``) until the trace series settles.

    The tail bound is ``t_M q / (1 - q)`` with ``q = t_M / t_{M-1}``, the
    geometric estimate from the last two trace contributions.
    """
    Z = as_square(Z)
    n = family.dimension
    if Z.shape[0] != n or trunc.n_components != n:
        raise DimensionError(f"family has dimension {n}, Z is {Z.shape}, truncation has {trunc.n_components}")
    P = np.eye(n, dtype=complex)
    terms = []
    traces = []
    total = 0.0
    tail = math.inf
    for m in range(trunc.level_cutoff + 1):
        if m > 0:
            P = P @ Z
            if m in _POWER_CHECK_LEVELS:
                P = _check_power(P, Z, m)
        T = family.term(m, P)
        t = float(np.real(np.vdot(T, T)))
        T = T.astype(complex)
        if not math.isfinite(t):
            raise ConvergenceError(f"non-finite term at level {m}", partial_sums=np.cumsum(traces))
        terms.append(T)
        traces.append(t)
        total += t
        if m >= 1:
            prev = traces[-2]
            if t == 0.0:
                q = 0.0
            elif prev == 0.0:
                q = math.inf
            else:
                q = t / prev
            tail = t * q / (1.0 - q) if q < 1.0 else math.inf
            if trunc.adaptive and q < 1.0 and t <= trunc.tail_tolerance * total and tail <= trunc.tail_tolerance * total:
                break
    else:
        if trunc.adaptive:
            raise ConvergenceError(
                f"normalization series for {family.name!r} not settled within {trunc.level_cutoff} levels "
                f"(last term ratio {traces[-1] / traces[-2] if traces[-2] else math.inf:.3g})",
                partial_sums=np.cumsum(traces),
            )
    return SeriesTerms(np.array(terms), total, tail)


def normalization_rz(family: MomentFamily, A, trunc: FockTruncation) -> Normalization:
    """``N = sum_m Tr[(R(m)A^m)^dagger (R(m)A^m)]`` with its tail estimate."""
    st = series_terms(family, A, trunc)
    return Normalization(st.trace_sum, st.tail_bound, st.terms.shape[0])


def build_scalar_cs(rho: Callable[[int], float], z: complex, trunc: FockTruncation | None = None) -> VcsState:
    """Coherent state ``N^{-1/2} sum_m z^m / sqrt(rho(m)) phi_m`` in one component."""
    trunc = trunc or FockTruncation(1)
    fam = MomentFamily(1, lambda m: np.array([[1.0 / math.sqrt(rho(m))]]), name="scalar")
    st = series_terms(fam, np.array([[z]], dtype=complex), trunc)
    return VcsState(st.terms[:, :, 0], st.trace_sum, trunc, component=0, tail_bound=st.tail_bound,
                    label="scalar")


def build_vcs_rz(family: MomentFamily, Z, j: int, trunc: FockTruncation) -> VcsState:
    """State ``|Z, j>`` with coefficients ``R(m) Z^m chi^j``.

    ``N`` is the trace series, so the squared norms summed over ``j`` equal one.
    """
    if family.ordering != "rz":
        family = family.with_ordering("rz")
    st = series_terms(family, Z, trunc)
    _check_component(j, family.dimension)
    return VcsState(st.terms[:, :, j], st.trace_sum, trunc, component=j, tail_bound=st.tail_bound,
                    label=f"{family.name}:rz")


def zr_condition_report(family: MomentFamily, Z, levels: int) -> tuple[np.ndarray, float, float, float]:
    """Deviations from ``R R^dagger = R^dagger R = rho I`` and ``Z^m Z^m^dagger = f^m I``.

    Returns ``(rho, f, max_r_dev, max_z_dev)``, deviations relative to ``rho(m)`` and ``f^m``.
    """
    Z = as_square(Z)
    n = Z.shape[0]
    eye = np.eye(n)
    ZZ = Z @ dagger(Z)
    f = float(np.real(np.trace(ZZ))) / n
    rho = np.empty(levels + 1)
    r_dev = 0.0
    z_dev = 0.0
    P = eye.astype(complex)
    for m in range(levels + 1):
        Rm = family.R(m)
        rr = Rm @ dagger(Rm)
        rho[m] = float(np.real(np.trace(rr))) / n
        scale = max(rho[m], np.finfo(float).tiny)
        r_dev = max(r_dev, np.max(np.abs(rr - rho[m] * eye)) / scale,
                    np.max(np.abs(dagger(Rm) @ Rm - rho[m] * eye)) / scale)
        if m > 0:
            P = P @ Z
        fm = f ** m
        if fm > 0:
            z_dev = max(z_dev, np.max(np.abs(P @ dagger(P) - fm * eye)) / fm,
                        np.max(np.abs(dagger(P) @ P - fm * eye)) / fm)
    return rho, f, r_dev, z_dev


def build_vcs_zr(family: MomentFamily, Z, j: int, trunc: FockTruncation,
                 convention: str = "state", condition_tol: float = 1e-10) -> VcsState:
    """State with coefficients ``Z^m R(m) chi^j`` for the Clifford-type class.

    The family must satisfy ``R(m) R(m)^dagger = rho(m) I`` and ``Z^m`` must be
    a multiple of a unitary, ``Z^m Z^m^dagger = f^m I``; the first failing
    level is named in the error.  With ``convention="state"`` each state has
    unit norm and ``N = sum_m f^m rho(m)``.  With ``convention="trace"`` the
    norms summed over ``j`` equal one (``N`` is ``n`` times larger).
    """
    if convention not in ("state", "trace"):
        raise ValueError("convention must be 'state' or 'trace'")
    if family.ordering != "zr":
        family = family.with_ordering("zr")
    _check_component(j, family.dimension)
    st = series_terms(family, Z, trunc)
    M = st.terms.shape[0] - 1
    Z = as_square(Z)
    eye = np.eye(family.dimension)
    P = eye.astype(complex)
    f = float(np.real(np.trace(Z @ dagger(Z)))) / family.dimension
    for m in range(M + 1):
        Rm = family.R(m)
        rr = Rm @ dagger(Rm)
        rho = float(np.real(np.trace(rr))) / family.dimension
        scale = max(rho, np.finfo(float).tiny)
        if (np.max(np.abs(rr - rho * eye)) > condition_tol * scale
                or np.max(np.abs(dagger(Rm) @ Rm - rho * eye)) > condition_tol * scale):
            raise PreconditionError(f"R({m}) R({m})^dagger is not a multiple of the identity")
        if m > 0:
            P = P @ Z
            fm = f ** m
            if fm > 0 and (np.max(np.abs(P @ dagger(P) - fm * eye)) > condition_tol * fm
                           or np.max(np.abs(dagger(P) @ P - fm * eye)) > condition_tol * fm):
                raise PreconditionError(f"Z^{m} Z^{m}^dagger is not f^{m} times the identity")
    N = st.trace_sum if convention == "trace" else st.trace_sum / family.dimension
    tail = st.tail_bound if convention == "trace" else st.tail_bound / family.dimension
    return VcsState(st.terms[:, :, j], N, trunc, component=j, tail_bound=tail,
                    label=f"{family.name}:zr:{convention}")


class ParticularClass(NamedTuple):
    family: MomentFamily
    Z: np.ndarray
    states: list


def build_particular_class(B, f_list: Sequence[Callable[[complex], complex]], z_list: Sequence[complex],
                           rho_list: Sequence[Callable[[int], float]], trunc: FockTruncation,
                           orth_tol: float = 1e-12) -> ParticularClass:
    """Orthogonal-conjugation class: ``Z = B diag(f_i(z_i)) B^T`` and row ``i`` of ``R(m)`` is ``rho_i(m) C_i^T``.

    ``C_i`` is column ``i`` of ``B``, so ``R(m) = diag(rho_i(m)) B^T``.
    """
    B = np.asarray(B, dtype=float)
    n = B.shape[0]
    if B.shape != (n, n):
        raise DimensionError("B must be square")
    if not (len(f_list) == len(z_list) == len(rho_list) == n):
        raise DimensionError("need one f_i, z_i and rho_i per dimension")
    eye = np.eye(n)
    if np.max(np.abs(B @ B.T - eye)) > orth_tol or np.max(np.abs(B.T @ B - eye)) > orth_tol:
        raise PreconditionError("B is not orthogonal")
    d = np.array([f(z) for f, z in zip(f_list, z_list)], dtype=complex)
    Z = B @ np.diag(d) @ B.T
    rhos = tuple(rho_list)

    def gen(m):
        return np.diag([r(m) for r in rhos]) @ B.T

    family = MomentFamily(n, gen, name="particular_class")
    states = [build_vcs_rz(family, Z, j, trunc) for j in range(n)]
    return ParticularClass(family, Z, states)


def inner_product(s1: VcsState, s2: VcsState) -> complex:
    """``<s1|s2>`` honouring each state's normalization constant."""
    if s1.n_components != s2.n_components:
        raise DimensionError("states live in different component spaces")
    L = max(s1.n_levels, s2.n_levels)
    a = s1.padded(L).coefficients if s1.n_levels < L else s1.coefficients
    b = s2.padded(L).coefficients if s2.n_levels < L else s2.coefficients
    return complex(np.vdot(a, b) / math.sqrt(s1.normalization_constant * s2.normalization_constant))


def total_norm(states: Sequence[VcsState]) -> float:
    """``sum_j <Z,j|Z,j>`` over a list of component states."""
    return float(sum(inner_product(s, s).real for s in states))


def _check_component(j: int, n: int) -> None:
    if not 0 <= j < n:
        raise DimensionError(f"component index {j} outside 0..{n - 1}")
