"""Two-level atom coupled to one field mode, in the rotating-wave approximation.

Units are hbar = 1.  ``Delta = omega - omega0`` is the detuning,
``delta = (Delta / 2 kappa)^2`` and ``r(n) = sqrt(delta + n)``.  In the weak
coupling regime the diagonal Hamiltonian is ``H_D = diag(omega_+, omega_-) n``
with ``omega_pm = omega +- kappa^2 / Delta``, and the coherent states use
``rho_pm(n) = omega_pm^n n!``.

Component 0 is the ``+`` branch and component 1 the ``-`` branch.  Mean values
are ``<psi|F|psi>`` without dividing by ``<psi|psi>``: a single component state
``|Z,k>`` has squared norm ``G`` or ``script G``, not one.
"""

from __future__ import annotations

import cmath
import math
import warnings
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from .audit import RadialMeasure
from .errors import ParameterError
from .families import VCSModel, diagonal_family, diagonal_variable, log_factorial_moment, rotation
from .vcs import FockTruncation, MomentFamily, VcsState, build_vcs_rz

__all__ = [
    "JCParams",
    "JCObservables",
    "exact_energies",
    "weak_coupling_slopes",
    "weak_coupling_error",
    "build_hjc_truncated",
    "hjc_branches",
    "jc_family",
    "jc_model",
    "jc_measure",
    "build_jc_cs",
    "build_rotated_cs",
    "build_rotated_cs_closed_form",
    "general_cs",
    "expectation",
    "closed_form_observables",
    "series_observables",
    "rotated_moments",
    "printed_rotated_moments",
    "time_evolve",
]

DEFAULT_TRUNCATION = FockTruncation(2, level_cutoff=512, tail_tolerance=1e-17)


@dataclass(frozen=True)
class JCParams:
    omega: float
    omega0: float
    kappa: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.omega, self.omega0, self.kappa)):
            raise ParameterError("parameters must be finite")
        if not self.detuning > 0:
            raise ParameterError(f"detuning omega - omega0 must be positive, got {self.detuning}")
        if not self.kappa > 0 or not self.omega > 0:
            raise ParameterError("omega and kappa must be positive")
        if self.kappa / self.omega > 2.0 * math.sqrt(self.delta + 1.0):
            raise ParameterError("kappa/omega exceeds 2 sqrt(delta + 1); upper branch may be degenerate")
        if not self.omega_minus > 0:
            raise ParameterError(f"omega_- = {self.omega_minus} must be positive")

    @property
    def detuning(self) -> float:
        return self.omega - self.omega0

    @property
    def delta(self) -> float:
        return (self.detuning / (2.0 * self.kappa)) ** 2

    @property
    def omega_plus(self) -> float:
        return self.omega + self.kappa ** 2 / self.detuning

    @property
    def omega_minus(self) -> float:
        return self.omega - self.kappa ** 2 / self.detuning

    @property
    def slopes(self) -> tuple[float, float]:
        return self.omega_plus, self.omega_minus


def exact_energies(p: JCParams, n):
    """``(E_n^+, E_n^-)`` with ``E_n^+ = omega n + kappa r(n)``, ``E_n^- = omega (n+1) - kappa r(n+1)``."""
    n = np.asarray(n, dtype=float)
    if np.any(n < 0):
        raise ValueError("n must be nonnegative")
    e_plus = p.omega * n + p.kappa * np.sqrt(p.delta + n)
    e_minus = p.omega * (n + 1) - p.kappa * np.sqrt(p.delta + n + 1)
    if e_plus.ndim == 0:
        return float(e_plus), float(e_minus)
    return e_plus, e_minus


def weak_coupling_slopes(p: JCParams) -> tuple[float, float]:
    return p.slopes


def weak_coupling_error(p: JCParams, n) -> tuple[np.ndarray, np.ndarray]:
    """``|e_n^pm / n - omega_pm|`` for ``n >= 1``."""
    n = np.atleast_1d(np.asarray(n, dtype=float))
    if np.any(n < 1):
        raise ValueError("n must be at least 1")
    ep, em = exact_energies(p, n)
    ep0, em0 = exact_energies(p, 0)
    return np.abs((ep - ep0) / n - p.omega_plus), np.abs((em - em0) / n - p.omega_minus)


def build_hjc_truncated(p: JCParams, M: int) -> np.ndarray:
    """Matrix of ``H_JC`` on ``|n, up>`` (index 2n) and ``|n, down>`` (index 2n+1), ``n <= M``.

    ``sigma_pm = (sigma_1 +- i sigma_2)/2``, so the coupling joins ``|n, up>``
    and ``|n+1, down>`` with amplitude ``kappa sqrt(n+1)``.
    """
    if M < 2:
        raise ValueError("M must be at least 2")
    dim = 2 * (M + 1)
    H = np.zeros((dim, dim))
    n = np.arange(M + 1)
    H[2 * n, 2 * n] = p.omega * (n + 0.5) + 0.5 * p.omega0
    H[2 * n + 1, 2 * n + 1] = p.omega * (n + 0.5) - 0.5 * p.omega0
    k = np.arange(M)
    H[2 * k, 2 * (k + 1) + 1] = p.kappa * np.sqrt(k + 1)
    H[2 * (k + 1) + 1, 2 * k] = p.kappa * np.sqrt(k + 1)
    return H


def hjc_branches(H: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Branch energies ``E^+`` (levels 0..M) and ``E^-`` (levels 0..M-1) from a truncated matrix.

    Each invariant pair ``{|n, up>, |n+1, down>}`` is diagonalised on its own and
    sorted within the pair; ``|0, down>`` is the lowest ``+`` level.  The edge
    state ``|M, up>`` has lost its partner and is left out.
    """
    M = H.shape[0] // 2 - 1
    e_plus = np.empty(M + 1)
    e_minus = np.empty(M)
    e_plus[0] = H[1, 1]
    for n in range(M):
        idx = [2 * n, 2 * (n + 1) + 1]
        lo, hi = np.linalg.eigvalsh(H[np.ix_(idx, idx)])
        e_minus[n] = lo
        e_plus[n + 1] = hi
    return e_plus, e_minus


# -- coherent states --------------------------------------------------------

def jc_family(p: JCParams) -> MomentFamily:
    """``R(n) = diag(rho_+(n), rho_-(n))^{-1/2}`` in the R-Z ordering."""
    return diagonal_family([log_factorial_moment(p.omega_plus), log_factorial_moment(p.omega_minus)], name="jc")


def _log_norm(p: JCParams, r1, r2):
    a = np.asarray(r1, float) ** 2 / p.omega_plus
    b = np.asarray(r2, float) ** 2 / p.omega_minus
    return a, b


def jc_normalization(p: JCParams, r1, r2):
    a, b = _log_norm(p, r1, r2)
    return np.exp(a) + np.exp(b)


def jc_measure(p: JCParams) -> RadialMeasure:
    """``r1 r2 / (pi^2 w+ w-) e^{-r1^2/w+} e^{-r2^2/w-} N(Z)`` on ``dr1 dr2`` with two free phases.

    The product with ``N`` is expanded into two terms so nothing overflows.
    """
    wp, wm = p.slopes

    def weight(r):
        r = np.asarray(r, float)
        r1, r2 = r[..., 0], r[..., 1]
        return r1 * r2 / (math.pi ** 2 * wp * wm) * (np.exp(-r2 ** 2 / wm) + np.exp(-r1 ** 2 / wp))

    return RadialMeasure("jc", weight, ((0.0, math.inf), (0.0, math.inf)), n_phases=2)


def jc_model(p: JCParams, x: float = 0.0) -> VCSModel:
    """JC family as a ``VCSModel``; a nonzero ``x`` conjugates both ``R`` and ``Z`` by ``U(x)``."""
    fam = jc_family(p)
    var = diagonal_variable(2)
    if x:
        U = rotation(x)
        base = fam

        def gen(m):
            # U U^T = I exactly; keep R(0) free of rounding
            return np.eye(2) if m == 0 else U @ base.R(m) @ U.T

        fam = MomentFamily(2, gen, name="jc_rotated", invertible_all_m=True, r0_identity=True,
                           commutes_with_Z=True)
        amp, asm = var.amplitude, var.assemble
        var = type(var)(lambda r: U @ amp(r) @ U.T, 2, 2, lambda r, ph: U @ asm(r, ph) @ U.T)

    def normalization(r):
        r = np.asarray(r, float)
        return jc_normalization(p, r[..., 0], r[..., 1])

    return VCSModel(fam, var, normalization, {"jc": jc_measure(p)}, description="Jaynes-Cummings, weak coupling")


def build_jc_cs(p: JCParams, z1: complex, z2: complex, j: int, trunc: FockTruncation | None = None) -> VcsState:
    return build_vcs_rz(jc_family(p), np.diag([z1, z2]), j, trunc or DEFAULT_TRUNCATION)


def build_rotated_cs(p: JCParams, z1: complex, z2: complex, x: float, k: int,
                     trunc: FockTruncation | None = None) -> VcsState:
    """Coefficients ``U R(n)^{-1/2} Z^n U^dagger chi_k`` summed as an R-Z series with conjugated data."""
    U = rotation(x)
    base = jc_family(p)
    fam = MomentFamily(2, lambda m: U @ base.R(m) @ U.T, name="jc_rotated")
    return build_vcs_rz(fam, U @ np.diag([z1, z2]) @ U.T, k, trunc or DEFAULT_TRUNCATION)


def _scalar_coefficients(z: complex, w: float, levels: int) -> np.ndarray:
    n = np.arange(levels)
    logmag = np.zeros(levels)
    if z != 0:
        logmag = n * math.log(abs(z)) - 0.5 * (n * math.log(w) + np.array([math.lgamma(k + 1) for k in n]))
        out = np.exp(logmag) * np.exp(1j * cmath.phase(z) * n)
    else:
        out = np.zeros(levels, complex)
        out[0] = 1.0
    return out


def build_rotated_cs_closed_form(p: JCParams, z1: complex, z2: complex, x: float, k: int, levels: int) -> VcsState:
    """Same state assembled from the two scalar states with ``cos^2``, ``sin^2`` and ``sin cos`` weights."""
    c, s = math.cos(x), math.sin(x)
    d1 = _scalar_coefficients(z1, p.omega_plus, levels)
    d2 = _scalar_coefficients(z2, p.omega_minus, levels)
    if k == 0:
        coeffs = np.column_stack([c * c * d1 + s * s * d2, s * c * (d1 - d2)])
    elif k == 1:
        coeffs = np.column_stack([s * c * (d1 - d2), s * s * d1 + c * c * d2])
    else:
        raise ValueError("k must be 0 or 1")
    N = float(jc_normalization(p, abs(z1), abs(z2)))
    return VcsState(coeffs, N, FockTruncation(2, level_cutoff=max(levels - 1, 1), adaptive=False),
                    component=k, label="jc_rotated:closed")


def general_cs(states: Sequence[VcsState], weights: Sequence[complex], tol: float = 1e-12) -> VcsState:
    """``sum_k c_k |Z,k>`` with ``sum |c_k|^2 = 1``; the result carries ``N = 1``."""
    weights = np.asarray(weights, dtype=complex)
    if len(states) != len(weights) or not states:
        raise ValueError("need one weight per state")
    if abs(np.sum(np.abs(weights) ** 2) - 1.0) > tol:
        raise ParameterError("weights must satisfy sum |c_k|^2 = 1")
    L = max(s.n_levels for s in states)
    acc = np.zeros((L, states[0].n_components), complex)
    for c, s in zip(weights, states):
        acc += c * s.padded(L).normalized()
    tail = sum(abs(c) ** 2 * s.tail_bound / s.normalization_constant for c, s in zip(weights, states))
    return VcsState(acc, 1.0, states[0].truncation, weights=tuple(weights.tolist()), tail_bound=tail,
                    label="general")


# -- observables --------------------------------------------------------------

_OPERATORS = ("A", "A+", "H_D", "H_D2", "Q", "P", "Q2", "P2")


def _lower(v, scale):
    out = np.zeros_like(v)
    n = np.sqrt(np.arange(1, v.shape[0]))[:, None]
    out[:-1] = n * v[1:] * scale
    return out


def _raise(v, scale):
    out = np.zeros_like(v)
    n = np.sqrt(np.arange(1, v.shape[0]))[:, None]
    out[1:] = n * v[:-1] * scale
    return out


def expectation(p: JCParams, op: str, state: VcsState, leak_tol: float = 1e-10):
    """``<psi|F|psi>`` for ``F`` in ``A, A+, H_D, H_D2, Q, P, Q2, P2``.

    ``A = diag(sqrt(w+), sqrt(w-)) (x) a`` and ``H_D = A^dagger A``.  Two zero
    levels are appended before any raising operator acts, so nothing is lost
    off the top of the stack.
    """
    if op not in _OPERATORS:
        raise ValueError(f"unknown operator {op!r}; choose from {_OPERATORS}")
    if state.tail_bound > leak_tol * state.normalization_constant:
        warnings.warn(f"state truncation tail {state.tail_bound:.2e} is large for mean values", RuntimeWarning)
    v = state.padded(state.n_levels + 2).normalized()
    scale = np.sqrt(np.array(p.slopes))
    n = np.arange(v.shape[0])[:, None]
    w = np.array(p.slopes)[None, :]
    if op == "H_D":
        return float(np.sum(w * n * np.abs(v) ** 2))
    if op == "H_D2":
        return float(np.sum((w * n) ** 2 * np.abs(v) ** 2))
    Av = _lower(v, scale)
    Adv = _raise(v, scale)
    if op == "A":
        return complex(np.vdot(v, Av))
    if op == "A+":
        return complex(np.vdot(v, Adv))
    if op == "Q":
        return float(np.real(np.vdot(v, Av + Adv)) / math.sqrt(2))
    if op == "P":
        return float(np.real(np.vdot(v, Av - Adv) / 1j) / math.sqrt(2))
    sign = 1.0 if op == "Q2" else -1.0
    # <F^2> for F = (A + s A^dagger)/c reduces to norms and overlaps of Av, Adv
    AAv = _lower(Av, scale)
    val = np.vdot(v, AAv) + np.vdot(AAv, v) + sign * (np.vdot(Av, Av) + np.vdot(Adv, Adv))
    return float(sign * np.real(val) / 2.0)


@dataclass(frozen=True)
class JCObservables:
    """Mean values on a JC coherent state.

    ``None`` marks a value that is undefined at that point (zero denominator).
    ``printed_snr`` is the alternative SNR closed form kept for comparison; it is
    not ``mean_Q / var_Q`` in general.
    """

    mean_A: complex
    mean_Adag: complex
    mean_HD: float
    mean_HD2: float
    mean_Q: float
    mean_P: float
    var_Q: float
    var_P: float
    var_HD: float
    snr: float | None
    mandel: float | None
    printed_snr: float | None = None

    def as_record(self) -> dict:
        out = {}
        for key, val in asdict(self).items():
            if isinstance(val, complex):
                out[key] = [val.real, val.imag]
            else:
                out[key] = val
        return out


def weights_G(p: JCParams, r1: float, r2: float) -> tuple[float, float]:
    """``(G, script G)`` over the shared denominator ``e^{r1^2/w+} + e^{r2^2/w-}``."""
    a, b = _log_norm(p, r1, r2)
    m = max(float(a), float(b))
    ea, eb = math.exp(a - m), math.exp(b - m)
    den = ea + eb
    return ea / den, eb / den


def _ratio(num, den):
    return None if den == 0 else num / den


def closed_form_observables(p: JCParams, z1: complex, z2: complex, k: int) -> JCObservables:
    """Closed forms on ``|Z,k>`` (``k = 0`` is the ``+`` component)."""
    G, Gs = weights_G(p, abs(z1), abs(z2))
    if k == 0:
        z, g, gbar, w = complex(z1), G, Gs, p.omega_plus
    elif k == 1:
        z, g, gbar, w = complex(z2), Gs, G, p.omega_minus
    else:
        raise ValueError("k must be 0 or 1")
    r, th = abs(z), cmath.phase(z)
    r2 = r * r
    cos2, sin2 = math.cos(th) ** 2, math.sin(th) ** 2
    mean_HD = r2 * g
    mean_HD2 = r2 * (r2 + w) * g
    mean_Q = math.sqrt(2) * r * math.cos(th) * g
    var_Q = 2 * r2 * cos2 * g * gbar + 0.5 * w * g
    var_HD = r2 * r2 * g * gbar + r2 * w * g
    printed = None
    if k == 0:
        printed = _ratio(2 * r2 * cos2 * G * G, 4 * r2 * cos2 * G * Gs + p.omega_minus * Gs)
    return JCObservables(
        mean_A=z * g,
        mean_Adag=z.conjugate() * g,
        mean_HD=mean_HD,
        mean_HD2=mean_HD2,
        mean_Q=mean_Q,
        mean_P=math.sqrt(2) * r * math.sin(th) * g,
        var_Q=var_Q,
        var_P=2 * r2 * sin2 * g * gbar + 0.5 * w * g,
        var_HD=var_HD,
        snr=_ratio(mean_Q, var_Q),
        mandel=None if mean_HD == 0 else r2 * gbar + w - 1.0,
        printed_snr=printed,
    )


def series_observables(p: JCParams, state: VcsState) -> JCObservables:
    """The same quantities computed from the coefficient stack."""
    mA = expectation(p, "A", state)
    hd = expectation(p, "H_D", state)
    hd2 = expectation(p, "H_D2", state)
    q = expectation(p, "Q", state)
    pp = expectation(p, "P", state)
    var_q = expectation(p, "Q2", state) - q * q
    var_p = expectation(p, "P2", state) - pp * pp
    var_hd = hd2 - hd * hd
    return JCObservables(
        mean_A=mA,
        mean_Adag=expectation(p, "A+", state),
        mean_HD=hd,
        mean_HD2=hd2,
        mean_Q=q,
        mean_P=pp,
        var_Q=var_q,
        var_P=var_p,
        var_HD=var_hd,
        snr=_ratio(q, var_q),
        mandel=None if hd == 0 else var_hd / hd - 1.0,
    )


def rotated_moments(p: JCParams, z1: complex, z2: complex, x: float, k: int) -> tuple[float, float]:
    """``(<H_D>, <H_D^2>)`` on the rotated state ``|Z,U,k>``, including the cross terms.

    With ``d_i(n)`` the scalar coefficients, the sums
    ``sum_n n^p d_i(n) conj(d_i'(n))`` are ``e^u``, ``u e^u`` and ``(u^2+u) e^u``
    for ``u = z_i conj(z_i') / sqrt(w_i w_i')``.
    """
    U = rotation(x)
    w = np.array(p.slopes)
    z = np.array([z1, z2], dtype=complex)
    a, b = _log_norm(p, abs(z1), abs(z2))
    shift = max(float(a), float(b))
    N = math.exp(a - shift) + math.exp(b - shift)
    S1 = np.empty((2, 2), complex)
    S2 = np.empty((2, 2), complex)
    for i in range(2):
        for j in range(2):
            u = z[i] * np.conj(z[j]) / math.sqrt(w[i] * w[j])
            e = np.exp(u - shift)
            S1[i, j] = u * e / N
            S2[i, j] = (u * u + u) * e / N
    hd = hd2 = 0.0
    for c in range(2):
        amp = U[c, :] * U[k, :]
        hd += w[c] * float(np.real(amp @ S1 @ amp))
        hd2 += w[c] ** 2 * float(np.real(amp @ S2 @ amp))
    return hd, hd2


def printed_rotated_moments(p: JCParams, r1: float, r2: float, x: float, k: int) -> tuple[float, float]:
    """The shorter forms without cross terms; they agree with ``rotated_moments`` only in special cases."""
    G, Gs = weights_G(p, r1, r2)
    wp, wm = p.slopes
    c2, s2 = math.cos(x) ** 2, math.sin(x) ** 2
    if k == 0:
        hd = r1 ** 2 * c2 * G + r2 ** 2 * wp / wm * s2 * Gs
        hd2 = r1 ** 2 * (r1 ** 2 + wp) * c2 * G + wp ** 2 * r2 ** 2 * (r2 ** 2 + wm) / wm ** 2 * s2 * Gs
    elif k == 1:
        hd = r1 ** 2 * wm / wp * s2 * G + r2 ** 2 * c2 * Gs
        hd2 = wm ** 2 * r1 ** 2 * (r1 ** 2 + wp) / wp ** 2 * s2 * G + r2 ** 2 * (r2 ** 2 + wm) * c2 * Gs
    else:
        raise ValueError("k must be 0 or 1")
    return hd, hd2


def time_evolve(p: JCParams, state: VcsState, t: float) -> VcsState:
    """Apply ``e^{-i H_D t}``: level ``n`` of component ``c`` picks up ``e^{-i w_c n t}``."""
    n = np.arange(state.n_levels)[:, None]
    w = np.array(p.slopes)[None, :]
    return state.replace_coefficients(state.coefficients * np.exp(-1j * w * n * t), label=f"{state.label}@t={t}")
