"""Supersymmetric radial oscillator states and the broken-SUSY / SU(2) rotated states.

Component 0 carries the ``H_+`` levels and component 1 the ``H_-`` levels.
Only ``epsilon`` enters the coherent states; ``gamma`` and ``beta`` shape the
partner potentials.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np
from scipy import special

from .audit import QuadratureConfig, RadialMeasure, _gl_1d
from .errors import ParameterError, PreconditionError, SingularityError
from .families import VCSModel, diagonal_family, diagonal_variable, log_factorial_moment
from .mathcore import DEFAULT_CONFIG, SpecialFunctionConfig, kummer_1f1, pochhammer
from .vcs import FockTruncation, MomentFamily, VcsState, build_vcs_rz

__all__ = [
    "RhoParams",
    "SU2Element",
    "rho_energies",
    "rho_moments",
    "rho_family",
    "rho_normalization",
    "build_rho_cs",
    "rho_u",
    "rho_potentials",
    "rho_measures",
    "rho_model",
    "radial_moment",
    "ProductMoments",
    "broken_susy_cs",
    "su2_rotated_cs",
    "broken_susy_model",
    "haar_su2",
    "monte_carlo_resolution",
]

_SINGULAR_U = 1e-10


def _rgamma(x: float) -> float:
    """``1/Gamma(x)``, zero at the poles."""
    try:
        return 1.0 / math.gamma(x)
    except ValueError:
        return 0.0


@dataclass(frozen=True)
class RhoParams:
    """``gamma >= 0``, ``epsilon > -1`` and the mixing constant ``beta``.

    The positivity conditions on ``gamma``, ``beta`` only matter for the
    potentials; with ``strict=False`` a violation is a warning, not an error.
    """

    gamma: float = 0.0
    epsilon: float = 1.0
    beta: float = 0.0
    strict: bool = False

    def __post_init__(self):
        if not self.gamma >= 0:
            raise ParameterError(f"gamma must be >= 0, got {self.gamma}")
        if not self.epsilon > -1:
            raise ParameterError(f"epsilon must be > -1, got {self.epsilon}")
        problems = self.positivity_problems()
        if problems:
            msg = "; ".join(problems)
            if self.strict:
                raise ParameterError(msg)
            warnings.warn(msg, RuntimeWarning, stacklevel=3)

    @property
    def b(self) -> float:
        """``(epsilon + 3)/2``, the Pochhammer base of ``rho_-``."""
        return 0.5 * (self.epsilon + 3.0)

    def positivity_problems(self) -> list[str]:
        g, e = self.gamma, self.epsilon
        # Gamma(-g-1/2)/Gamma(e/2-g-1), written with reciprocals so poles give 0 or inf
        r_num = _rgamma(-g - 0.5)
        r_den = _rgamma(0.5 * e - g - 1.0)
        out = []
        if r_num == 0.0:
            out.append(f"Gamma(-gamma-1/2) has a pole at gamma = {g}")
            return out
        ratio = r_den / r_num
        if not ratio > 0:
            out.append(f"Gamma(-gamma-1/2)/Gamma(epsilon/2-gamma-1) = {ratio:.6g} is not positive")
            return out
        bound = ratio * math.gamma(0.5 * (1 + e)) / math.gamma(2.5 + g)
        if not abs(self.beta) < bound:
            out.append(f"|beta| = {abs(self.beta)} is not below {bound:.6g}")
        return out


def rho_energies(p: RhoParams, n: int, branch: str) -> float:
    """``E_n^+ = 2n + 1 + epsilon``; ``E_0^- = 0`` and ``E_{n+1}^- = E_n^+``."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    if branch == "+":
        return 2.0 * n + 1.0 + p.epsilon
    if branch == "-":
        return 0.0 if n == 0 else 2.0 * (n - 1) + 1.0 + p.epsilon
    raise ValueError("branch must be '+' or '-'")


def rho_moments(p: RhoParams, n: int) -> tuple[float, float]:
    """``(2^n n!, 2^n ((epsilon+3)/2)_n)``."""
    return 2.0 ** n * math.factorial(n), 2.0 ** n * pochhammer(p.b, n)


def rho_family(p: RhoParams) -> MomentFamily:
    b = p.b
    lg_b = math.lgamma(b)

    def log_minus(m):
        return m * math.log(2.0) + math.lgamma(m + b) - lg_b

    return diagonal_family([log_factorial_moment(2.0), log_minus], name=f"rho[eps={p.epsilon:g}]")


def rho_normalization(p: RhoParams, r1: float, r2: float, cfg: SpecialFunctionConfig | None = None) -> float:
    """``e^{r1^2/2} + 1F1(1; (epsilon+3)/2; r2^2/2)``."""
    return math.exp(0.5 * r1 * r1) + kummer_1f1(1.0, p.b, 0.5 * r2 * r2, cfg or DEFAULT_CONFIG)


def build_rho_cs(p: RhoParams, z1: complex, z2: complex, j: int, trunc: FockTruncation | None = None) -> VcsState:
    return build_vcs_rz(rho_family(p), np.diag([z1, z2]), j, trunc or FockTruncation(2, tail_tolerance=1e-16))


# -- potentials ---------------------------------------------------------------

def rho_u(p: RhoParams, x: float, cfg: SpecialFunctionConfig | None = None) -> tuple[float, float]:
    """``u(x)`` and ``u'(x)`` for ``u = 1F1((1-e)/2; -g-1/2; -x^2) + beta x^{2g+3} 1F1(2+g-e/2; 5/2+g; -x^2)``."""
    cfg = cfg or DEFAULT_CONFIG
    g, e = p.gamma, p.epsilon
    a1, b1 = 0.5 * (1.0 - e), -g - 0.5
    a2, b2 = 2.0 + g - 0.5 * e, 2.5 + g
    y = -x * x
    u = kummer_1f1(a1, b1, y, cfg)
    du = -2.0 * x * (a1 / b1) * kummer_1f1(a1 + 1.0, b1 + 1.0, y, cfg) if a1 != 0.0 else 0.0
    if p.beta:
        k = 2.0 * g + 3.0
        f2 = kummer_1f1(a2, b2, y, cfg)
        df2 = -2.0 * x * (a2 / b2) * kummer_1f1(a2 + 1.0, b2 + 1.0, y, cfg)
        u += p.beta * x ** k * f2
        du += p.beta * (k * x ** (k - 1.0) * f2 + x ** k * df2)
    return u, du


def rho_potentials(p: RhoParams, x: float, cfg: SpecialFunctionConfig | None = None) -> tuple[float, float]:
    """``(V_+(x), V_-(x))`` for ``x > 0``; raises SingularityError where ``|u(x)| < 1e-10``."""
    if not x > 0:
        raise ValueError("the radial coordinate must be positive")
    g, e = p.gamma, p.epsilon
    v_plus = 0.5 * x * x + (g + 1.0) ** 2 / (2.0 * x * x) + e - g - 1.5
    u, du = rho_u(p, x, cfg)
    if abs(u) < _SINGULAR_U:
        raise SingularityError(f"u({x}) = {u:.3e} vanishes; V_- is singular there")
    L = du / u
    v_minus = 0.5 * x * x + g * (g + 2.0) / (2.0 * x * x) - e - g - 0.5 + L * (2.0 * x - 2.0 * (g + 1.0) / x + L)
    return v_plus, v_minus


# -- measures -----------------------------------------------------------------

def _vector_normalization(p: RhoParams):
    def normalization(r):
        r = np.asarray(r, float)
        return np.exp(0.5 * r[..., 0] ** 2) + special.hyp1f1(1.0, p.b, 0.5 * r[..., 1] ** 2)

    return normalization


def rho_measures(p: RhoParams) -> tuple[RadialMeasure, RadialMeasure]:
    """``(printed, corrected)`` measures.

    The printed one is ``N r1 r2 e^{-(r1^2+r2^2)/2} / (pi^2 2^b Gamma(b))``
    with ``b = (epsilon+3)/2``.  The corrected one is ``N w_+(r1) w_-(r2)/(2 pi)^2``
    with ``w_+ = r e^{-r^2/2}`` and ``w_- = r^{e+2} e^{-r^2/2} / (2^{(e+1)/2} Gamma(b))``,
    whose moments are exactly ``rho_+(n)`` and ``rho_-(n)``.
    """
    b, e = p.b, p.epsilon
    N = _vector_normalization(p)
    c_printed = 1.0 / (math.pi ** 2 * 2.0 ** b * math.gamma(b))
    c_minus = 1.0 / (2.0 ** (0.5 * (e + 1.0)) * math.gamma(b))

    def printed(r):
        r = np.asarray(r, float)
        r1, r2 = r[..., 0], r[..., 1]
        return N(r) * c_printed * r1 * r2 * np.exp(-0.5 * (r1 ** 2 + r2 ** 2))

    def corrected(r):
        r = np.asarray(r, float)
        r1, r2 = r[..., 0], r[..., 1]
        w_plus = r1 * np.exp(-0.5 * r1 ** 2)
        w_minus = c_minus * r2 ** (e + 2.0) * np.exp(-0.5 * r2 ** 2)
        return N(r) * w_plus * w_minus / (2.0 * math.pi) ** 2

    dom = ((0.0, math.inf), (0.0, math.inf))
    # r^(e+2) is a fractional power of t = r^2 near the origin: grade the first panel
    graded = QuadratureConfig(grading=24)
    return (RadialMeasure("printed", printed, dom, n_phases=2, notes="printed constant"),
            RadialMeasure("corrected", corrected, dom, n_phases=2, quadrature=graded,
                          notes="weights reproduce rho_+ and rho_-"))


def radial_moment(weight: Callable[[np.ndarray], np.ndarray], n: int, grading: int = 24, nodes: int = 32) -> float:
    """``int_0^inf weight(r) r^{2n} dr`` by graded Gauss-Legendre in ``t = r^2``."""
    cfg = QuadratureConfig(panels=32, nodes=nodes, grading=grading)
    hi = max(64.0, 8.0 * (n + 4))
    t, wt = _gl_1d(0.0, hi, cfg, nodes)
    r = np.sqrt(t)
    return float(np.sum(weight(r) * r ** (2 * n) * wt / (2.0 * r)))


def rho_model(p: RhoParams) -> VCSModel:
    printed, corrected = rho_measures(p)
    return VCSModel(rho_family(p), diagonal_variable(2), _vector_normalization(p),
                    {"printed": printed, "corrected": corrected}, description="SUSY radial oscillator")


# -- broken SUSY ---------------------------------------------------------------

class ProductMoments:
    """``rho(n) = e_1 e_2 ... e_n`` for a strictly increasing spectrum with ``e_0 = 0``.

    Stores log-values; the ordering is checked as levels are first requested.
    """

    def __init__(self, energies: Callable[[int], float] | Sequence[float]):
        self._e = energies if callable(energies) else (lambda n, seq=tuple(energies): seq[n])
        if self._e(0) != 0:
            raise PreconditionError("the shifted spectrum must start at e_0 = 0")
        self._logs = [0.0]
        self._last = 0.0

    def log(self, n: int) -> float:
        while len(self._logs) <= n:
            k = len(self._logs)
            ek = float(self._e(k))
            if not ek > self._last:
                raise PreconditionError(f"spectrum not strictly increasing at level {k}: {ek} <= {self._last}")
            self._logs.append(self._logs[-1] + math.log(ek))
            self._last = ek
        return self._logs[n]

    def __call__(self, n: int) -> float:
        return math.exp(self.log(n))


def _scalar_family(moments: ProductMoments, name: str) -> MomentFamily:
    return MomentFamily(2, lambda m: math.exp(-0.5 * moments.log(m)) * np.eye(2), name=name,
                        invertible_all_m=True, r0_identity=True, commutes_with_Z=True)


def broken_susy_cs(energies, z1: complex, z2: complex, j: int, trunc: FockTruncation | None = None) -> VcsState:
    """``Z^n / sqrt(rho(n))`` with one moment sequence shared by both components."""
    fam = _scalar_family(energies if isinstance(energies, ProductMoments) else ProductMoments(energies), "broken_susy")
    return build_vcs_rz(fam, np.diag([z1, z2]), j, trunc or FockTruncation(2, tail_tolerance=1e-16))


@dataclass(frozen=True)
class SU2Element:
    """``[[a, -conj(b)], [b, conj(a)]]`` with ``|a|^2 + |b|^2 = 1``."""

    a: complex
    b: complex

    def __post_init__(self):
        if abs(abs(self.a) ** 2 + abs(self.b) ** 2 - 1.0) > 1e-12:
            raise PreconditionError("|a|^2 + |b|^2 must equal 1")

    @property
    def matrix(self) -> np.ndarray:
        a, b = complex(self.a), complex(self.b)
        return np.array([[a, -b.conjugate()], [b, a.conjugate()]])

    @classmethod
    def from_matrix(cls, U, tol: float = 1e-12) -> "SU2Element":
        U = np.asarray(U, dtype=complex)
        if U.shape != (2, 2):
            raise PreconditionError("SU(2) elements are 2x2")
        if np.max(np.abs(U.conj().T @ U - np.eye(2))) > tol or abs(np.linalg.det(U) - 1.0) > tol:
            raise PreconditionError("matrix is not special unitary")
        if abs(U[0, 1] + np.conj(U[1, 0])) > tol or abs(U[1, 1] - np.conj(U[0, 0])) > tol:
            raise PreconditionError("matrix is not special unitary")
        return cls(complex(U[0, 0]), complex(U[1, 0]))


def haar_su2(rng: np.random.Generator, size: int | None = None):
    """Haar-random SU(2) via a uniform point on the unit 3-sphere.

    With ``size`` given, returns a ``(size, 2, 2)`` array instead of one element.
    """
    q = rng.normal(size=(1 if size is None else size, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    a = q[:, 0] + 1j * q[:, 1]
    b = q[:, 2] + 1j * q[:, 3]
    if size is None:
        return SU2Element(complex(a[0]), complex(b[0]))
    U = np.empty((size, 2, 2), complex)
    U[:, 0, 0], U[:, 0, 1] = a, -np.conj(b)
    U[:, 1, 0], U[:, 1, 1] = b, np.conj(a)
    return U


def su2_rotated_cs(energies, z1: complex, z2: complex, U, j: int,
                   trunc: FockTruncation | None = None) -> VcsState:
    """Coefficients ``(U Z U^dagger)^n / sqrt(rho(n)) chi_j``; the trace normalization is that of the unrotated state."""
    if not isinstance(U, SU2Element):
        U = SU2Element.from_matrix(U)
    M = U.matrix
    moments = energies if isinstance(energies, ProductMoments) else ProductMoments(energies)
    Z = M @ np.diag([z1, z2]) @ M.conj().T
    return build_vcs_rz(_scalar_family(moments, "broken_susy_su2"), Z, j,
                        trunc or FockTruncation(2, tail_tolerance=1e-16))


def broken_susy_model(scale: float = 2.0) -> VCSModel:
    """Equally spaced spectrum ``e_n = scale * n`` with its Gaussian measure."""
    fam = _scalar_family(ProductMoments(lambda n: scale * n), f"broken_susy[{scale:g}n]")

    def normalization(r):
        r = np.asarray(r, float)
        return np.exp(r[..., 0] ** 2 / scale) + np.exp(r[..., 1] ** 2 / scale)

    def weight(r):
        r = np.asarray(r, float)
        r1, r2 = r[..., 0], r[..., 1]
        return r1 * r2 / (math.pi * scale) ** 2 * (np.exp(-r2 ** 2 / scale) + np.exp(-r1 ** 2 / scale))

    m = RadialMeasure("gaussian", weight, ((0.0, math.inf), (0.0, math.inf)), n_phases=2)
    return VCSModel(fam, diagonal_variable(2), normalization, {"gaussian": m}, description="broken SUSY")


class MonteCarloReport(NamedTuple):
    blocks: np.ndarray         # (L, L, 2, 2) estimate of the resolution operator
    deviation: float
    standard_error: float
    n_samples: int
    seed: int
    tol: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol


def monte_carlo_resolution(max_level: int = 2, n_samples: int = 1_000_000, seed: int = 0,
                           n_streams: int = 10, tol: float = 1e-2) -> MonteCarloReport:
    """Sampled ``int sum_j |Z,U,j><Z,U,j| dmu(Z) dnu(U)`` for ``e_n = 2n`` on levels ``<= max_level``.

    With the measure ``N r1 r2 e^{-(r1^2+r2^2)/2} dr dtheta / (4 pi^2)`` the
    factor ``N`` cancels the normalization, the radii are Rayleigh distributed
    and the phases uniform, so the estimator is the plain sample mean of
    ``T_m T_{m'}^dagger`` with ``T_m = (U Z U^dagger)^m / sqrt(rho(m))``.
    Streams come from ``SeedSequence(seed).spawn`` and are summed in order.
    """
    L = max_level + 1
    rho = np.array([2.0 ** m * math.factorial(m) for m in range(L)])
    per_stream = [n_samples // n_streams + (1 if i < n_samples % n_streams else 0) for i in range(n_streams)]
    total = np.zeros((L, L, 2, 2), complex)
    total_sq = np.zeros((L, L, 2, 2))
    for child, count in zip(np.random.SeedSequence(seed).spawn(n_streams), per_stream):
        rng = np.random.default_rng(child)
        r = rng.rayleigh(1.0, size=(count, 2))
        th = rng.uniform(0.0, 2.0 * math.pi, size=(count, 2))
        U = haar_su2(rng, count)
        z = r * np.exp(1j * th)
        T = np.empty((L, count, 2, 2), complex)
        for m in range(L):
            D = np.zeros((count, 2, 2), complex)
            D[:, 0, 0], D[:, 1, 1] = z[:, 0] ** m, z[:, 1] ** m
            T[m] = U @ D @ np.conj(np.swapaxes(U, -1, -2)) / math.sqrt(rho[m])
        for m in range(L):
            for k in range(L):
                prod = T[m] @ np.conj(np.swapaxes(T[k], -1, -2))
                total[m, k] += prod.sum(axis=0)
                total_sq[m, k] += (np.abs(prod) ** 2).sum(axis=0)
    mean = total / n_samples
    var = total_sq / n_samples - np.abs(mean) ** 2
    stderr = float(np.sqrt(np.max(var) / n_samples))
    target = np.zeros_like(mean)
    for m in range(L):
        target[m, m] = np.eye(2)
    dev = float(np.max(np.abs(mean - target)))
    return MonteCarloReport(mean, dev, stderr, n_samples, seed, tol)
