"""Matrix-factorial oscillator algebra built on the quotients ``x_m = R(m) R(m-1)^{-1}``.

States are handled as coefficient stacks of shape ``(levels, n)``: row ``m``
is the C^n vector attached to ``phi_m``.  Operator indices (``k``, ``l``) and
component indices are 0-based.  ``k=None`` selects the global operator.

Conventions at level 0: ``A`` annihilates it, and ``x_0^{-1}`` is taken to be
the zero matrix so that ``N`` also vanishes there (the scalar case
``x_m^{-1} = sqrt(m)`` gives the same).
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import AlgebraError, DimensionError
from .mathcore import dagger
from .vcs import FockTruncation, MomentFamily, VcsState, series_terms

__all__ = [
    "ElementaryMatrix",
    "LadderContext",
    "apply_annihilation",
    "apply_creation",
    "apply_number",
    "CommutatorCheck",
    "commutator_action",
    "commutator_table",
    "table_to_csv",
    "eigenstate_residual",
    "adjoint_gap",
    "hermitian_quotients",
    "COUPLED_C",
    "COUPLED_D",
    "COUPLED_E",
    "coupled_rational_checks",
    "coupled_identities",
]

COMMUTATORS = ("A,A+", "N,A", "N,A+")


@dataclass(frozen=True)
class ElementaryMatrix:
    """``E_{ij}``: one in row ``i``, column ``j``, zero elsewhere."""

    i: int
    j: int
    n: int

    def __post_init__(self):
        if not (0 <= self.i < self.n and 0 <= self.j < self.n):
            raise DimensionError(f"indices ({self.i}, {self.j}) outside a {self.n}x{self.n} matrix")

    def matrix(self) -> np.ndarray:
        E = np.zeros((self.n, self.n))
        E[self.i, self.j] = 1.0
        return E

    def product(self, other: "ElementaryMatrix") -> "ElementaryMatrix | None":
        """``E_{ij} E_{kl} = delta_{jk} E_{il}``; ``None`` stands for the zero matrix."""
        if self.n != other.n:
            raise DimensionError("elementary matrices of different sizes")
        return ElementaryMatrix(self.i, other.j, self.n) if self.j == other.i else None


def _right_divide(num: np.ndarray, den: np.ndarray, cond_limit: float, m: int) -> np.ndarray:
    """``num @ inv(den)`` with the columns of ``den`` equilibrated first.

    Moment matrices often carry column scales that drift apart geometrically in
    m; dividing them out keeps the solve accurate where ``cond(den)`` alone
    would suggest otherwise.
    """
    num = np.asarray(num, complex)
    den = np.asarray(den, complex)
    scale = np.linalg.norm(den, axis=0)
    if np.any(scale == 0):
        raise AlgebraError(f"R({m - 1}) has a zero column, x_{m} undefined")
    core = den / scale
    if np.linalg.cond(core) > cond_limit:
        raise AlgebraError(f"R({m - 1}) is singular to working precision, x_{m} undefined")
    return np.linalg.solve(core.T, (num / scale).T).T


class LadderContext:
    """Cached quotients ``x_m`` and their inverses for ``1 <= m <= max_level + 1``.

    States may occupy levels ``0..max_level``; the extra quotient lets creation
    from the top level report how much norm it pushes out.
    ``x_m x_{m-1} ... x_1 R(0) = R(m)`` is rebuilt for every level and must hold
    to ``factorial_tol``; when ``R(0) = I`` this is the matrix factorial.
    """

    def __init__(self, family: MomentFamily, max_level: int, cond_limit: float = 1e12,
                 factorial_tol: float = 1e-12):
        if max_level < 1:
            raise ValueError("max_level must be at least 1")
        self.family = family
        self.max_level = int(max_level)
        self.n = family.dimension
        x = [np.full((self.n, self.n), np.nan, complex)]
        xinv = [np.zeros((self.n, self.n), complex)]
        self._top = self.max_level + 1
        for m in range(1, self._top + 1):
            xm = _right_divide(family.R(m), family.R(m - 1), cond_limit, m)
            c = np.linalg.cond(xm)
            if not c <= cond_limit:
                raise AlgebraError(f"x_{m} has condition number {c:.3g}, above {cond_limit:.0e}")
            x.append(xm)
            xinv.append(np.linalg.inv(xm))
        self._x = np.array(x)
        self._xinv = np.array(xinv)
        self._x.setflags(write=False)
        self._xinv.setflags(write=False)
        self.factorial_error = self._rebuild_check()
        if self.factorial_error > factorial_tol:
            raise AlgebraError(f"x_m! R(0) misses R(m) by {self.factorial_error:.3e}")

    def _rebuild_check(self) -> float:
        P = self.family.R(0).copy()
        worst = 0.0
        for m in range(1, self._top + 1):
            P = self._x[m] @ P
            worst = max(worst, float(np.max(np.abs(P - self.family.R(m)))))
        return worst

    def x(self, m: int) -> np.ndarray:
        if not 1 <= m <= self._top:
            raise IndexError(f"x_m cached for 1 <= m <= {self._top}, asked for {m}")
        return self._x[m]

    def x_inv(self, m: int) -> np.ndarray:
        if not 0 <= m <= self._top:
            raise IndexError(f"x_m^-1 cached for 0 <= m <= {self._top}, asked for {m}")
        return self._xinv[m]

    def factorial(self, m: int) -> np.ndarray:
        """``x_m x_{m-1} ... x_1`` (identity for m = 0)."""
        P = np.eye(self.n, dtype=complex)
        for k in range(1, m + 1):
            P = self.x(k) @ P
        return P

    def basis(self, j: int, m: int, levels: int | None = None) -> np.ndarray:
        """Coefficient stack of ``chi^j (x) phi_m``."""
        levels = self.max_level + 1 if levels is None else levels
        v = np.zeros((levels, self.n), complex)
        v[m, j] = 1.0
        return v


def _projector(k, n):
    if k is None:
        return None
    if not 0 <= k < n:
        raise DimensionError(f"operator index {k} outside 0..{n - 1}")
    E = np.zeros((n, n))
    E[k, k] = 1.0
    return E


def _unwrap(ctx, state):
    if isinstance(state, VcsState):
        coeffs = state.coefficients
    else:
        coeffs = np.asarray(state, dtype=complex)
    if coeffs.ndim != 2 or coeffs.shape[1] != ctx.n:
        raise DimensionError(f"expected a (levels, {ctx.n}) coefficient stack, got {coeffs.shape}")
    if coeffs.shape[0] > ctx.max_level + 1:
        raise DimensionError(f"state has {coeffs.shape[0]} levels, context covers {ctx.max_level + 1}")
    return coeffs


def _wrap(state, coeffs):
    return state.replace_coefficients(coeffs) if isinstance(state, VcsState) else coeffs


def apply_annihilation(ctx: LadderContext, k, state):
    """``A_k (v (x) phi_m) = x_m^{-1} E_k v (x) phi_{m-1}``; ``k=None`` gives ``A = sum_k A_k``."""
    v = _unwrap(ctx, state)
    E = _projector(k, ctx.n)
    out = np.zeros_like(v)
    for m in range(1, v.shape[0]):
        w = v[m] if E is None else E @ v[m]
        out[m - 1] = ctx.x_inv(m) @ w
    return _wrap(state, out)


def apply_creation(ctx: LadderContext, k, state, return_leakage: bool = False):
    """``A_k^dagger (v (x) phi_m) = x_{m+1}^{-1} E_k v (x) phi_{m+1}``.

    Whatever would land above the stored levels is dropped; with
    ``return_leakage=True`` its norm is returned alongside the result.
    """
    v = _unwrap(ctx, state)
    E = _projector(k, ctx.n)
    L = v.shape[0]
    out = np.zeros_like(v)
    leakage = 0.0
    for m in range(L):
        w = v[m] if E is None else E @ v[m]
        if not np.any(w):
            continue
        image = ctx.x_inv(m + 1) @ w
        if m + 1 < L:
            out[m + 1] = image
        else:
            leakage = float(np.linalg.norm(image))
    result = _wrap(state, out)
    return (result, leakage) if return_leakage else result


def apply_number(ctx: LadderContext, k, state):
    """``N_k = (x_m^{-1} E_k)^2`` on level ``m``; the global ``N`` is ``x_m^{-1} Diag(x_m^{-1})``."""
    v = _unwrap(ctx, state)
    out = np.zeros_like(v)
    for m in range(v.shape[0]):
        xi = ctx.x_inv(m)
        if k is None:
            out[m] = xi @ (np.diag(xi) * v[m])
        else:
            E = _projector(k, ctx.n)
            out[m] = xi @ E @ xi @ E @ v[m]
    return _wrap(state, out)


class CommutatorCheck(NamedTuple):
    pair: str
    k: int | None
    l: int | None
    j: int
    m: int
    composed: np.ndarray
    closed_form: np.ndarray

    @property
    def deviation(self) -> float:
        return float(np.max(np.abs(self.composed - self.closed_form)))


def _ops(pair):
    if pair == "A,A+":
        return apply_annihilation, apply_creation
    if pair == "N,A":
        return apply_number, apply_annihilation
    if pair == "N,A+":
        return apply_number, apply_creation
    raise ValueError(f"unknown commutator {pair!r}; choose from {COMMUTATORS}")


def _closed_form_indexed(ctx, pair, k, l, j, m, L):
    n = ctx.n
    out = np.zeros((L, n), complex)
    d_lj = 1.0 if l == j else 0.0
    d_kj = 1.0 if k == j else 0.0
    chi = np.eye(n)
    if pair == "A,A+":
        xa, xb = ctx.x_inv(m + 1), ctx.x_inv(m)
        out[m] = d_lj * xa[k, l] * (xa @ chi[k]) - d_kj * xb[l, k] * (xb @ chi[l])
    elif pair == "N,A":
        if m == 0:
            return out
        xp, xc = ctx.x_inv(m - 1), ctx.x_inv(m)
        out[m - 1] = (d_lj * xp[k, k] * xc[k, l] * (xp @ chi[k])
                      - d_kj * xc[l, k] * xc[k, k] * (xc @ chi[l]))
    else:
        xn, xc = ctx.x_inv(m + 1), ctx.x_inv(m)
        out[m + 1] = xn @ (d_lj * xn[k, k] * xn[k, l] * chi[k] - d_kj * xc[l, k] * xc[k, k] * chi[l])
    return out


def _closed_form_global(ctx, pair, j, m, L):
    # These are the global formulas as usually written; they treat the x_m as
    # mutually commuting, so they agree with composition for diagonal families.
    out = np.zeros((L, ctx.n), complex)
    e = np.eye(ctx.n)[j]
    if pair == "A,A+":
        xa, xb = ctx.x_inv(m + 1), ctx.x_inv(m)
        out[m] = (xa @ xa - xb @ xb) @ e
    elif pair == "N,A":
        if m == 0:
            return out
        xc, xp = ctx.x_inv(m), ctx.x_inv(m - 1)
        out[m - 1] = -(xc @ xc - xp @ xp) @ (xc @ e)
    else:
        xn, xc = ctx.x_inv(m + 1), ctx.x_inv(m)
        out[m + 1] = xn @ (xn - xc @ xc @ ctx.x(m + 1)) @ (xn @ e)
    return out


def commutator_action(ctx: LadderContext, pair: str, j: int, m: int, k: int | None = None,
                      l: int | None = None) -> CommutatorCheck:
    """Commutator on ``chi^j (x) phi_m`` by composition and by its closed form.

    ``pair`` is one of ``"A,A+"``, ``"N,A"``, ``"N,A+"``.  Give both ``k`` and
    ``l`` for the indexed commutator ``[X_k, Y_l]``, neither for the global one.
    Only interior levels ``0 <= m < max_level`` are accepted.
    """
    if (k is None) != (l is None):
        raise ValueError("give both operator indices or neither")
    if not 0 <= m < ctx.max_level:
        raise ValueError(f"level {m} is not interior (need 0 <= m < {ctx.max_level})")
    X, Y = _ops(pair)
    L = ctx.max_level + 1
    v = ctx.basis(j, m, L)
    composed = X(ctx, k, Y(ctx, l, v)) - Y(ctx, l, X(ctx, k, v))
    if k is None:
        closed = _closed_form_global(ctx, pair, j, m, L)
    else:
        closed = _closed_form_indexed(ctx, pair, k, l, j, m, L)
    return CommutatorCheck(pair, k, l, j, m, composed, closed)


def commutator_table(ctx: LadderContext, pair: str, indexed: bool = True, levels=None) -> list[tuple[int, float]]:
    """``(m, max deviation)`` over all components (and all ``k, l`` when indexed)."""
    levels = range(ctx.max_level) if levels is None else levels
    idx = [(k, l) for k in range(ctx.n) for l in range(ctx.n)] if indexed else [(None, None)]
    rows = []
    for m in levels:
        worst = 0.0
        for j in range(ctx.n):
            for k, l in idx:
                worst = max(worst, commutator_action(ctx, pair, j, m, k, l).deviation)
        rows.append((m, worst))
    return rows


def table_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["m", "max_deviation"])
    for m, dev in rows:
        w.writerow([m, repr(dev)])
    return buf.getvalue()


def eigenstate_residual(ctx: LadderContext, Z, j: int, trunc: FockTruncation) -> float:
    """``|| A|Z,j> - Z|Z,j> ||`` over levels ``0..M-1`` of the Z-R state.

    The state is normalised with the trace series.  For families that commute
    with ``Z`` this is at rounding level; otherwise it measures how far the
    eigenvalue relation is from holding.
    """
    family = ctx.family if ctx.family.ordering == "zr" else ctx.family.with_ordering("zr")
    Z = np.asarray(Z, dtype=complex)
    st = series_terms(family, Z, trunc)
    levels = min(st.terms.shape[0], ctx.max_level + 1)
    if levels < 2:
        return 0.0
    v = st.terms[:levels, :, j] / math.sqrt(st.trace_sum)
    lowered = apply_annihilation(ctx, None, v)[: levels - 1]
    scaled = v[: levels - 1] @ Z.T
    return float(np.linalg.norm(lowered - scaled))


def adjoint_gap(ctx: LadderContext, u, v) -> float:
    """``|<A^dagger u, v> - <u, A v>|`` with the top level of ``u`` excluded."""
    u = np.asarray(u, complex).copy()
    u[-1] = 0.0
    lhs = np.vdot(apply_creation(ctx, None, u), v)
    rhs = np.vdot(u, apply_annihilation(ctx, None, v))
    return float(abs(lhs - rhs))


def hermitian_quotients(ctx: LadderContext, tol: float = 1e-12) -> bool:
    return all(np.max(np.abs(ctx.x(m) - dagger(ctx.x(m)))) <= tol for m in range(1, ctx.max_level + 1))


# -- the worked 2x2 example ---------------------------------------------------

COUPLED_C = np.array([[3.0, -1.0], [-1.0, 3.0]]) / 2.0
COUPLED_D = np.array([[5.0, -3.0], [-3.0, 5.0]]) / 2.0
COUPLED_E = np.array([[3.0, 1.0], [1.0, 3.0]]) / 4.0


def coupled_rational_checks() -> dict:
    """``E C = C E = I`` and ``C^2 = D`` in exact rational arithmetic."""
    from fractions import Fraction as F

    C = [[F(3, 2), F(-1, 2)], [F(-1, 2), F(3, 2)]]
    D = [[F(5, 2), F(-3, 2)], [F(-3, 2), F(5, 2)]]
    E = [[F(3, 4), F(1, 4)], [F(1, 4), F(3, 4)]]

    def mul(X, Y):
        return [[sum(X[i][k] * Y[k][j] for k in range(2)) for j in range(2)] for i in range(2)]

    eye = [[F(1), F(0)], [F(0), F(1)]]
    return {"EC=I": mul(E, C) == eye, "CE=I": mul(C, E) == eye, "C^2=D": mul(C, C) == D}


def coupled_identities(ctx: LadderContext) -> dict:
    """Largest deviation of each operator identity over all basis vectors on interior levels.

    Keys ending in ``(diagnostic)`` are the short forms of ``[N, A]`` and
    ``[N, A^dagger]`` quoted for this example; with a non-diagonal ``x_m`` they
    do not follow from the ladder definitions and are reported, not asserted.
    """
    C, D, E = COUPLED_C, COUPLED_D, COUPLED_E
    L = ctx.max_level + 1
    sq = np.sqrt(np.arange(L))
    worst = dict.fromkeys(["A = C (x) a", "A+ = C (x) a+", "N = 3/2 C (x) n", "[A, A+] = D (x) I",
                           "[EA, (EA)+] = I", "[N, A] = -DA (diagnostic)", "[N, A+] = DA+ (diagnostic)"], 0.0)

    def bump(key, a, b):
        worst[key] = max(worst[key], float(np.max(np.abs(a - b))))

    def tilde_lower(v):
        return apply_annihilation(ctx, None, v) @ E.T

    def tilde_raise(v):
        return apply_creation(ctx, None, v @ E.T)

    for m in range(ctx.max_level):
        for j in range(ctx.n):
            v = ctx.basis(j, m, L)
            e = np.eye(ctx.n)[j]
            lowered = np.zeros((L, ctx.n), complex)
            if m:
                lowered[m - 1] = sq[m] * (C @ e)
            raised = np.zeros((L, ctx.n), complex)
            raised[m + 1] = sq[m + 1] * (C @ e)
            bump("A = C (x) a", apply_annihilation(ctx, None, v), lowered)
            bump("A+ = C (x) a+", apply_creation(ctx, None, v), raised)
            num = np.zeros((L, ctx.n), complex)
            num[m] = 1.5 * m * (C @ e)
            bump("N = 3/2 C (x) n", apply_number(ctx, None, v), num)
            comm = np.zeros((L, ctx.n), complex)
            comm[m] = D @ e
            bump("[A, A+] = D (x) I", commutator_action(ctx, "A,A+", j, m).composed, comm)
            canon = tilde_lower(tilde_raise(v)) - tilde_raise(tilde_lower(v))
            bump("[EA, (EA)+] = I", canon, v)
            na = commutator_action(ctx, "N,A", j, m).composed
            bump("[N, A] = -DA (diagnostic)", na, -(apply_annihilation(ctx, None, v) @ D.T))
            nad = commutator_action(ctx, "N,A+", j, m).composed
            bump("[N, A+] = DA+ (diagnostic)", nad, apply_creation(ctx, None, v) @ D.T)
    return worst
