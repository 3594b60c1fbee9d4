"""Small dense-matrix kernel and the special functions used across the package.

Everything here is a pure function of its inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, DomainError, PoleError, TruncationError

__all__ = [
    "SpecialFunctionConfig",
    "as_square",
    "dagger",
    "hermitian_modulus",
    "gamma_fn",
    "log_gamma",
    "pochhammer",
    "pochhammer_gamma_ratio",
    "kummer_1f1",
    "kummer_1f1_derivative",
]


@dataclass(frozen=True)
class SpecialFunctionConfig:
    series_tolerance: float = 1e-14
    max_terms: int = 10_000

    def __post_init__(self):
        if not self.series_tolerance > 0:
            raise ValueError("series_tolerance must be positive")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_CONFIG = SpecialFunctionConfig()


def as_square(M) -> np.ndarray:
    """Return ``M`` as a complex 2-D square array or raise DimensionError."""
    M = np.asarray(M, dtype=complex)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {M.shape}")
    return M


def dagger(M: np.ndarray) -> np.ndarray:
    """Conjugate transpose over the last two axes (works on stacks)."""
    return np.conj(np.swapaxes(M, -1, -2))


def hermitian_modulus(M) -> np.ndarray:
    """Positive semidefinite square root of ``M M^dagger``.

    The Hermitian product is diagonalised with ``eigh``; eigenvalues that come
    out slightly negative from rounding are clamped to zero.
    """
    M = as_square(M)
    H = M @ dagger(M)
    H = 0.5 * (H + dagger(H))
    w, V = np.linalg.eigh(H)
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)) @ dagger(V)


def gamma_fn(x: float) -> float:
    if not x > 0:
        raise DomainError(f"gamma_fn is defined here for x > 0 only, got {x!r}")
    return math.gamma(x)


def log_gamma(x: float) -> float:
    if not x > 0:
        raise DomainError(f"log_gamma is defined here for x > 0 only, got {x!r}")
    return math.lgamma(x)


def pochhammer(a: float, n: int) -> float:
    """Rising factorial a(a+1)...(a+n-1), with (a)_0 = 1."""
    if n < 0 or int(n) != n:
        raise DomainError(f"pochhammer needs a nonnegative integer n, got {n!r}")
    out = 1.0
    for k in range(int(n)):
        out *= a + k
    return out


def pochhammer_gamma_ratio(a: float, n: int) -> float:
    """Gamma(a+n)/Gamma(a) through log-gamma; a must be positive."""
    if a <= 0:
        raise DomainError("gamma-ratio form requires a > 0")
    return math.exp(math.lgamma(a + n) - math.lgamma(a))


def _check_pole(b: float, atol: float = 1e-12) -> None:
    if b <= atol and abs(b - round(b)) < atol:
        raise PoleError(f"1F1 has a pole at b = {b!r} (non-positive integer)")


def _series_nonneg(a: float, b: float, x: float, cfg: SpecialFunctionConfig) -> float:
    # Direct Maclaurin series for x >= 0.  Once k exceeds max(-a, -b), every later
    # term ratio is bounded by q = x/(k+1) * max(1, (a+k)/(b+k)), so the tail is at
    # most |t_k| q/(1-q).  We only trust that bound once q < 1/2.
    term = 1.0
    total = 1.0
    k0 = max(0.0, -a, -b)
    tail = math.inf
    for k in range(cfg.max_terms):
        ratio_num = (a + k) * x
        if ratio_num == 0.0:
            return total
        term *= ratio_num / ((b + k) * (k + 1))
        total += term
        j = k + 1
        if j > k0:
            q = x / (j + 1) * max(1.0, (a + j) / (b + j))
            if q < 0.5:
                tail = abs(term) * q / (1.0 - q)
                if tail <= cfg.series_tolerance * abs(total):
                    return total
    raise TruncationError(
        f"1F1({a}, {b}, {x}) not converged after {cfg.max_terms} terms",
        residual=tail,
    )


def kummer_1f1(a: float, b: float, x: float, cfg: SpecialFunctionConfig | None = None) -> float:
    """Confluent hypergeometric function 1F1(a; b; x) for real arguments.

    Negative ``x`` goes through Kummer's transformation
    ``1F1(a,b,x) = e^x 1F1(b-a, b, -x)`` so the summed series has no
    alternating cancellation once past its first few terms.
    """
    cfg = cfg or DEFAULT_CONFIG
    _check_pole(b)
    if x == 0.0 or a == 0.0:
        return 1.0
    if a < 0.0 and a == round(a):
        # terminating series: a polynomial of degree -a, summed as is
        term = total = 1.0
        for k in range(int(-a)):
            term *= (a + k) * x / ((b + k) * (k + 1))
            total += term
        return total
    if x < 0.0:
        return math.exp(x) * _series_nonneg(b - a, b, -x, cfg)
    return _series_nonneg(a, b, x, cfg)


def kummer_1f1_derivative(a: float, b: float, x: float, cfg: SpecialFunctionConfig | None = None) -> float:
    """d/dx 1F1(a; b; x) = (a/b) 1F1(a+1; b+1; x)."""
    _check_pole(b)
    if a == 0.0:
        return 0.0
    return a / b * kummer_1f1(a + 1.0, b + 1.0, x, cfg)
