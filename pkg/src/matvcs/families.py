"""Ready-made families: the rotated 2x2 examples, the orthogonal-conjugation class,
the Clifford-type Z-R class, diagonal (multi-level Hamiltonian) families, and the
small families used to exercise the ladder algebra.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .audit import RadialMeasure
from .vcs import MatrixVariable, MomentFamily


@dataclass(frozen=True, eq=False)
class VCSModel:
    """A family together with its matrix label, closed-form ``N`` and candidate measures."""

    family: MomentFamily
    variable: MatrixVariable
    normalization: Callable[[np.ndarray], np.ndarray]
    measures: dict = field(default_factory=dict)
    description: str = ""
    # "trace": N is the full trace series; "state": each |Z,j> has unit norm (Z-R Clifford class)
    convention: str = "trace"

    def Z(self, r, phases=None) -> np.ndarray:
        return self.variable.matrix(r, phases)


PI_LD = np.longdouble("3.14159265358979323846264338327950288")


def rotation(x) -> np.ndarray:
    """``[[cos x, -sin x], [sin x, cos x]]`` in the precision of ``x``."""
    c, s = np.cos(x), np.sin(x)
    return np.array([[c, -s], [s, c]])


def su2_matrix(alpha: float, beta: float, gamma: float) -> np.ndarray:
    a = math.cos(alpha) * np.exp(1j * beta)
    b = math.sin(alpha) * np.exp(1j * gamma)
    return np.array([[a, -np.conj(b)], [b, np.conj(a)]])


# -- rotated 2x2 examples ---------------------------------------------------

_EX22 = {
    # x, lambda scale, mu scale, base of rho_1, base of rho_2
    "a": (PI_LD / 4, 1.0, 2.0, 1.0, 4.0),
    "b": (PI_LD / 6, 3.0, 2.0, 9.0, 4.0),
}


def csc_example(case: str = "a") -> VCSModel:
    """``Z = U(x) diag(lambda(r), mu(r)) U(x)^T e^{i zeta}`` with the cot/csc moment matrices.

    ``R(m) = [[rho1 cot x, rho1], [rho2, -rho2 cot x]]``.  Because
    ``rho_1^2 lambda^{2m} = rho_2^2 mu^{2m} = r^{2m}/m!`` in both cases, the
    trace series is ``2 csc^2(x) e^{r^2}``.

    Measures: ``"stated"`` uses ``W = N e^{-r^2}/4`` with ``dnu = (2/pi) r dr``;
    ``"csc_scaled"`` uses ``W = N e^{-r^2} / (2 csc^2 x)``, which reduces to
    ``"stated"`` when ``x = pi/4``.

    ``R(m)`` must cancel the faster-growing eigencomponent of ``Z^m`` (by a
    factor ``(mu/lambda)^m``), so the family and ``A(r)`` are evaluated in long
    double.
    """
    x, lam, mu, b1, b2 = _EX22[case]
    U = rotation(x)
    cot = np.cos(x) / np.sin(x)
    csc2 = float(1 / np.sin(x) ** 2)

    def gen(m):
        lf = np.longdouble(math.lgamma(m + 1))
        r1 = np.exp(-0.5 * (m * np.log(np.longdouble(b1)) + lf))
        r2 = np.exp(-0.5 * (m * np.log(np.longdouble(b2)) + lf))
        return np.array([[r1 * cot, r1], [r2, -r2 * cot]])

    def amplitude(r):
        r = np.asarray(r, float)[..., 0]
        d = np.zeros(r.shape + (2, 2))
        d[..., 0, 0] = lam * r
        d[..., 1, 1] = mu * r
        return U @ d @ U.T

    def normalization(r):
        r = np.asarray(r, float)[..., 0]
        return 2.0 * csc2 * np.exp(r * r)

    family = MomentFamily(2, gen, name=f"csc_{case}", invertible_all_m=True, extended=True)
    variable = MatrixVariable(amplitude, n_radii=1, n_phases=1)

    def stated(r):
        rr = np.asarray(r)[..., 0]
        return normalization(r) * np.exp(-rr ** 2) / 4.0 * (2.0 / math.pi) * rr

    def scaled(r):
        rr = np.asarray(r)[..., 0]
        return normalization(r) * np.exp(-rr ** 2) / (2.0 * csc2) * (2.0 / math.pi) * rr

    measures = {
        "stated": RadialMeasure("stated", stated, ((0.0, math.inf),), 1),
        "csc_scaled": RadialMeasure("csc_scaled", scaled, ((0.0, math.inf),), 1),
    }
    return VCSModel(family, variable, normalization, measures,
                    description=f"rotated 2x2 example, case ({case})")


# -- orthogonal conjugation class ---------------------------------------------

def particular_class_model(B=None, omegas: Sequence[float] = (1.0, 0.5)) -> VCSModel:
    """Orthogonal-conjugation class with ``f_i(z) = z`` and ``rho_i(m) = (omega_i^m m!)^{-1/2}``.

    ``R(m) = diag(rho_i(m)) B^T`` so ``R(m) Z^m = diag(rho_i z_i^m) B^T``; the
    trace series is ``sum_i exp(r_i^2 / omega_i)``.  The Gaussian product
    measure below resolves the identity.
    """
    omegas = tuple(float(w) for w in omegas)
    n = len(omegas)
    B = rotation(0.3) if B is None else np.asarray(B, float)
    Bt = B.T

    def gen(m):
        return np.diag([1.0 / math.sqrt(w ** m * math.factorial(m)) for w in omegas]) @ Bt

    def amplitude(r):
        r = np.asarray(r, float)
        d = np.zeros(r.shape[:-1] + (n, n))
        idx = np.arange(n)
        d[..., idx, idx] = r
        return B @ d @ Bt

    def assemble(r, ph):
        return B @ np.diag(np.asarray(r) * np.exp(1j * np.asarray(ph))) @ Bt

    w = np.array(omegas)

    def normalization(r):
        return np.sum(np.exp(np.asarray(r, float) ** 2 / w), axis=-1)

    def weight(r):
        r = np.asarray(r, float)
        return normalization(r) * np.prod(r * np.exp(-r ** 2 / w) / (math.pi * w), axis=-1)

    family = MomentFamily(n, gen, name="particular_class", invertible_all_m=True)
    variable = MatrixVariable(amplitude, n_radii=n, n_phases=n, assemble=assemble)
    measure = RadialMeasure("gaussian_product", weight, tuple((0.0, math.inf) for _ in range(n)), n)
    return VCSModel(family, variable, normalization, {"gaussian_product": measure},
                    description="orthogonal conjugation class")


# -- Clifford-type class in the Z-R ordering -------------------------------

def clifford_zr_model(su2_angles=(0.4, 0.9, -0.3), twist: float = 0.0) -> VCSModel:
    """``Z = r S e^{i theta}`` with ``S`` in SU(2) and ``R(m) = W^m / sqrt(m!)``, ``W = exp(i twist sigma_3)``.

    ``Z^m Z^m^dagger = r^{2m} I`` and ``R R^dagger = I/m!``, so every state has
    norm ``sum_m r^{2m}/m! = e^{r^2}``.  With ``twist = 0`` the moment matrices
    commute with ``Z``; any other value gives a non-commuting probe.
    """
    S = su2_matrix(*su2_angles)
    W = np.diag([np.exp(1j * twist), np.exp(-1j * twist)])

    def gen(m):
        return np.linalg.matrix_power(W, m) / math.sqrt(math.factorial(m))

    def amplitude(r):
        r = np.asarray(r, float)[..., 0]
        return r[..., None, None] * S

    def normalization(r):
        return np.exp(np.asarray(r, float)[..., 0] ** 2)

    def weight(r):
        rr = np.asarray(r, float)[..., 0]
        return normalization(r) * rr * np.exp(-rr ** 2) / math.pi

    family = MomentFamily(2, gen, name="clifford_zr" if twist == 0 else "clifford_zr_probe", ordering="zr",
                          invertible_all_m=True, r0_identity=True, commutes_with_Z=(twist == 0))
    variable = MatrixVariable(amplitude, n_radii=1, n_phases=1)
    measure = RadialMeasure("gaussian", weight, ((0.0, math.inf),), 1)
    return VCSModel(family, variable, normalization, {"gaussian": measure},
                    description="Clifford-type Z-R class", convention="state")


# -- diagonal families --------------------------------------------------------

def diagonal_family(log_moments: Sequence[Callable[[int], float]], name: str) -> MomentFamily:
    """``R(m) = diag(rho_k(m))^{-1/2}`` from log-moments; ``rho_k(0) = 1`` is required."""
    logs = tuple(log_moments)
    for lr in logs:
        if lr(0) != 0.0:
            raise ValueError("diagonal families need rho(0) = 1")

    def gen(m):
        return np.diag([math.exp(-0.5 * lr(m)) for lr in logs])

    return MomentFamily(len(logs), gen, name=name, invertible_all_m=True, r0_identity=True,
                        commutes_with_Z=True)


def diagonal_variable(n: int) -> MatrixVariable:
    """``Z = diag(r_k e^{i theta_k})`` with one radius and one phase per component."""

    def amplitude(r):
        r = np.asarray(r, float)
        d = np.zeros(r.shape[:-1] + (n, n))
        idx = np.arange(n)
        d[..., idx, idx] = r
        return d

    def assemble(r, ph):
        return np.diag(np.asarray(r) * np.exp(1j * np.asarray(ph)))

    return MatrixVariable(amplitude, n_radii=n, n_phases=n, assemble=assemble)


def log_factorial_moment(scale: float = 1.0) -> Callable[[int], float]:
    """``log(scale^m m!)``."""
    ls = math.log(scale)
    return lambda m: m * ls + math.lgamma(m + 1)


# -- ladder algebra test families ----------------------------------------------

def coupled_family() -> MomentFamily:
    """Z-R family built from the conjugate transpose of case (a)'s moment matrices.

    Its quotients are ``x_m = (1/(4 sqrt m)) [[3, 1], [1, 3]]``.  ``R(0)`` is not
    the identity here.
    """
    K = np.array([[1.0, 1.0], [1.0, -1.0]])

    def gen(m):
        a = 1.0 / math.sqrt(math.factorial(m))
        b = 1.0 / math.sqrt(4.0 ** m * math.factorial(m))
        return (np.diag([a, b]) @ K).T

    return MomentFamily(2, gen, name="coupled_example", ordering="zr", invertible_all_m=True)


def canonical_scalar_family(log_rho: Callable[[int], float] | None = None) -> MomentFamily:
    """One-component family ``R(m) = rho(m)^{-1/2}``; defaults to ``rho(m) = m!``."""
    log_rho = log_rho or log_factorial_moment()
    fam = diagonal_family([log_rho], name="canonical_scalar")
    return fam.with_ordering("zr")


def random_invertible_family(n: int = 3, seed: int = 0) -> MomentFamily:
    """Generic Z-R family ``R(m) = G_m G_{m-1} ... G_1`` with well-conditioned random ``G_k``."""
    rng = np.random.default_rng(seed)
    cache = {}

    def G(k):
        if k not in cache:
            X = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
            q, _ = np.linalg.qr(X)
            scale = np.diag(rng.uniform(0.6, 1.4, n)) / math.sqrt(k)
            cache[k] = q @ scale
        return cache[k]

    # drawing in order keeps the family reproducible however levels are requested
    def gen(m):
        for k in range(1, m + 1):
            G(k)
        out = np.eye(n, dtype=complex)
        for k in range(1, m + 1):
            out = G(k) @ out
        return out

    return MomentFamily(n, gen, name=f"random_invertible_{n}", ordering="zr", invertible_all_m=True,
                        r0_identity=True)
