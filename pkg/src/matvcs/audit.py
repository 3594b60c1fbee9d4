"""Quadrature checks of the matrix moment conditions behind a resolution of the identity.

For a family with moment matrices ``R(m)`` and label ``Z`` whose phases enter
as ``e^{i m zeta}``, the angular integrals collapse to Kronecker deltas, and the
resolution of the identity reduces to one matrix condition per Fock level:

    (2 pi)^p  integral  N(r)^{-1} T_m(r) T_m(r)^dagger W(r) dr  =  I_n,

with ``T_m = R(m) A(r)^m`` (or ``A(r)^m R(m)``) and ``p`` independent phases.
The angular part is applied exactly and never integrated numerically.  The
radial integral uses ``t = r^2`` per coordinate and composite Gauss-Legendre
panels, with optional geometric grading towards ``t = 0`` for weights that
behave like fractional powers there.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy.linalg import block_diag

from .errors import AccuracyError, PreconditionError
from .mathcore import dagger
from .vcs import MatrixVariable, MomentFamily

__all__ = [
    "QuadratureConfig",
    "RadialMeasure",
    "AuditResult",
    "ResolutionReport",
    "moment_matrix",
    "audit_moment",
    "audit_moments",
    "audit_resolution",
    "reports_to_json",
    "reports_to_csv",
]


@dataclass(frozen=True)
class QuadratureConfig:
    panels: int = 16
    nodes: int = 16
    grading: int = 0
    tail_ratio: float = 1e-18
    max_extent: float = 512.0  # in t = r^2; keeps exp(r^2) weights finite

    def __post_init__(self):
        if self.nodes < 2 or self.panels < 1:
            raise ValueError("need at least 2 nodes and 1 panel")
        if not self.tail_ratio > 0:
            raise ValueError("tail_ratio must be positive")


@dataclass(frozen=True, eq=False)
class RadialMeasure:
    """Radial density ``W(r) dnu`` on a product of intervals, plus ``n_phases`` free phases.

    ``weight`` takes radii of shape ``(P, k)`` and returns ``(P,)`` values of
    the density with respect to ``dr_1 ... dr_k``.  Each phase contributes an
    exact factor ``2 pi``; constants such as ``1/pi^2`` belong in ``weight``.
    """

    name: str
    weight: Callable[[np.ndarray], np.ndarray]
    domain: tuple = ((0.0, math.inf),)
    n_phases: int = 1
    quadrature: QuadratureConfig = field(default_factory=QuadratureConfig)
    notes: str = ""

    @property
    def n_radii(self) -> int:
        return len(self.domain)

    @property
    def angular_factor(self) -> float:
        return (2 * math.pi) ** self.n_phases

    def check_nonnegative(self, samples: int = 256, seed: int = 0) -> bool:
        rng = np.random.default_rng(seed)
        cols = []
        for lo, hi in self.domain:
            top = hi if math.isfinite(hi) else lo + 8.0
            cols.append(rng.uniform(lo, top, samples))
        return bool(np.all(np.asarray(self.weight(np.column_stack(cols))) >= 0))


@dataclass(frozen=True)
class AuditResult:
    family: str
    measure: str
    m: int
    matrix: np.ndarray
    deviation: float
    refinement_change: float
    tol: float

    @property
    def passed(self) -> bool:
        return self.deviation <= self.tol and self.refinement_change < self.tol / 10

    def as_record(self) -> dict:
        return {"family": self.family, "measure": self.measure, "m": self.m,
                "deviation": self.deviation, "pass": self.passed}


@dataclass(frozen=True)
class ResolutionReport:
    family: str
    measure: str
    operator: np.ndarray
    deviation: float
    per_level: tuple
    tol: float

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.per_level)


def moment_matrix(family: MomentFamily, A, m: int) -> np.ndarray:
    """``T_m T_m^dagger`` with ``T_m = R(m) A^m`` (or ``A^m R(m)``); ``A`` may be a stack."""
    A = np.asarray(A).astype(family.dtype)
    T = family.term(m, np.linalg.matrix_power(A, m))
    return (T @ dagger(T)).astype(complex)


def _panel_edges(lo: float, hi: float, cfg: QuadratureConfig) -> np.ndarray:
    edges = np.linspace(lo, hi, cfg.panels + 1)
    if cfg.grading and lo == 0.0:
        first = edges[1]
        graded = first * 2.0 ** -np.arange(cfg.grading, 0, -1)
        edges = np.concatenate([[0.0], graded, edges[1:]])
    return edges


def _gl_1d(lo: float, hi: float, cfg: QuadratureConfig, nodes: int):
    x, w = np.polynomial.legendre.leggauss(nodes)
    edges = _panel_edges(lo, hi, cfg)
    a, b = edges[:-1, None], edges[1:, None]
    t = (0.5 * (b - a) * x + 0.5 * (a + b)).ravel()
    wt = (0.5 * (b - a) * w).ravel()
    return t, wt


def _tensor_grid(t_ranges, cfg: QuadratureConfig, nodes: int):
    """Nodes in r-space and weights w.r.t. dr_1...dr_k from panels in t = r^2."""
    rs, ws = [], []
    for lo, hi in t_ranges:
        t, wt = _gl_1d(lo, hi, cfg, nodes)
        r = np.sqrt(t)
        rs.append(r)
        ws.append(wt / (2.0 * r))
    grids = np.meshgrid(*rs, indexing="ij")
    wgrids = np.meshgrid(*ws, indexing="ij")
    r = np.column_stack([g.ravel() for g in grids])
    w = np.prod(np.column_stack([g.ravel() for g in wgrids]), axis=1)
    return r, w


def _density(measure: RadialMeasure, normalization, r: np.ndarray) -> np.ndarray:
    with np.errstate(over="ignore", invalid="ignore"):
        d = measure.angular_factor * np.asarray(measure.weight(r), float) / np.asarray(normalization(r), float)
    return np.where(np.isfinite(d), d, 0.0)


def _t_ranges(measure: RadialMeasure, extent: float):
    out = []
    for lo, hi in measure.domain:
        out.append((lo * lo, hi * hi if math.isfinite(hi) else extent))
    return out


def _find_extent(family, variable, measure, normalization, m_max: int) -> float:
    """Smallest power-of-two extent in t where the top-level integrand is negligible."""
    cfg = measure.quadrature
    if all(math.isfinite(hi) for _, hi in measure.domain):
        return 0.0
    extent = 8.0
    coarse = 33
    while extent <= cfg.max_extent:
        axes = []
        for lo, hi in measure.domain:
            if math.isfinite(hi):
                axes.append(np.linspace(lo, hi, coarse))
            else:
                axes.append(np.sqrt(np.linspace(lo * lo, extent, coarse)))
        grids = np.meshgrid(*axes, indexing="ij")
        r = np.column_stack([g.ravel() for g in grids])
        A = variable.amplitude(r)
        vals = np.real(np.trace(moment_matrix(family, A, m_max), axis1=-2, axis2=-1))
        vals = np.abs(vals * _density(measure, normalization, r))
        peak = vals.max()
        outer = np.zeros(len(r), bool)
        for d, (lo, hi) in enumerate(measure.domain):
            if not math.isfinite(hi):
                outer |= np.isclose(r[:, d], math.sqrt(extent))
        if peak == 0.0 or vals[outer].max() <= cfg.tail_ratio * peak:
            return extent
        extent *= 2.0
    raise AccuracyError(f"integrand for m={m_max} does not decay within t <= {cfg.max_extent}")


def _integrate_levels(family, variable, measure, normalization, levels: Sequence[int], extent: float, nodes: int):
    r, w = _tensor_grid(_t_ranges(measure, extent), measure.quadrature, nodes)
    dens = _density(measure, normalization, r) * w
    A = np.asarray(variable.amplitude(r)).astype(family.dtype)
    n = family.dimension
    out = {}
    wanted = set(levels)
    P = np.broadcast_to(np.eye(n, dtype=A.dtype), A.shape).copy()
    for m in range(max(levels) + 1):
        if m > 0:
            P = P @ A
        if m in wanted:
            T = family.term(m, P)
            integrand = (T @ dagger(T)).astype(complex)
            eig = np.linalg.eigvalsh(0.5 * (integrand + dagger(integrand)))
            if np.any(eig[:, 0] < -1e-12 * np.maximum(eig[:, -1], 1.0)):
                raise PreconditionError(f"moment integrand at level {m} is not positive semidefinite")
            out[m] = np.einsum("p,pij->ij", dens, integrand)
    return out


def audit_moments(family: MomentFamily, variable: MatrixVariable, measure: RadialMeasure,
                  normalization: Callable[[np.ndarray], np.ndarray], levels: Sequence[int],
                  tol: float = 1e-8) -> list[AuditResult]:
    """Audit several levels on one shared quadrature grid (fine grid doubles the nodes)."""
    levels = list(levels)
    if variable.n_radii != measure.n_radii:
        raise PreconditionError("measure and matrix variable disagree on the number of radii")
    if not measure.check_nonnegative():
        raise PreconditionError(f"weight of measure {measure.name!r} is negative somewhere")
    extent = _find_extent(family, variable, measure, normalization, max(levels))
    nodes = measure.quadrature.nodes
    coarse = _integrate_levels(family, variable, measure, normalization, levels, extent, nodes)
    fine = _integrate_levels(family, variable, measure, normalization, levels, extent, 2 * nodes)
    eye = np.eye(family.dimension)
    results = []
    for m in levels:
        change = float(np.max(np.abs(fine[m] - coarse[m])))
        dev = float(np.max(np.abs(fine[m] - eye)))
        results.append(AuditResult(family.name, measure.name, m, fine[m], dev, change, tol))
    return results


def audit_moment(family: MomentFamily, variable: MatrixVariable, measure: RadialMeasure,
                 normalization: Callable[[np.ndarray], np.ndarray], m: int, tol: float = 1e-8) -> AuditResult:
    """Integrated level-``m`` moment matrix and its deviation from the identity."""
    return audit_moments(family, variable, measure, normalization, [m], tol)[0]


def audit_resolution(family: MomentFamily, variable: MatrixVariable, measure: RadialMeasure,
                     normalization: Callable[[np.ndarray], np.ndarray], max_level: int,
                     tol: float = 1e-8, phase_samples: int = 4, seed: int = 0) -> ResolutionReport:
    """Block-diagonal truncated resolution operator on ``n (M+1)`` dimensions.

    The reduction to diagonal blocks relies on the equal-level product
    ``T_m T_m^dagger`` not depending on the phases; that is spot-checked at a
    few random points before anything is integrated.
    """
    _check_phase_invariance(family, variable, max_level, phase_samples, seed)
    per = audit_moments(family, variable, measure, normalization, range(max_level + 1), tol)
    op = block_diag(*[r.matrix for r in per])
    dev = float(np.max(np.abs(op - np.eye(op.shape[0]))))
    return ResolutionReport(family.name, measure.name, op, dev, tuple(per), tol)


def _check_phase_invariance(family, variable, max_level, samples, seed):
    if samples <= 0:
        return
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        r = rng.uniform(0.1, 1.5, variable.n_radii)
        ph = rng.uniform(0, 2 * math.pi, variable.n_phases)
        Z0 = variable.matrix(r)
        Z = variable.matrix(r, ph)
        for m in (1, max(1, max_level)):
            a = moment_matrix(family, Z0, m)
            b = moment_matrix(family, Z, m)
            if np.max(np.abs(a - b)) > 1e-10 * max(1.0, np.max(np.abs(a))):
                raise PreconditionError(
                    f"level-{m} moment matrix of {family.name!r} depends on the phases; "
                    "the angular reduction does not apply")


def reports_to_json(results: Sequence[AuditResult]) -> str:
    return json.dumps([r.as_record() for r in results], sort_keys=True, indent=1)


def reports_to_csv(results: Sequence[AuditResult]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["family", "measure", "m", "deviation", "refinement_change", "pass"])
    for r in results:
        writer.writerow([r.family, r.measure, r.m, repr(r.deviation), repr(r.refinement_change), r.passed])
    return buf.getvalue()
