"""Named families with their parameters, used by the command line and the checks."""

from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .families import VCSModel, clifford_zr_model, csc_example, particular_class_model
from .jaynes_cummings import JCParams, jc_model
from .susy import RhoParams, broken_susy_model, rho_model
from .vcs import FockTruncation, build_vcs_rz, build_vcs_zr, normalization_rz

FAMILIES = ("csc_a", "csc_b", "particular", "clifford", "jc", "rho", "broken_susy")

DEFAULT_MEASURE = {
    "csc_a": "stated",
    "csc_b": "stated",
    "particular": "gaussian_product",
    "clifford": "gaussian",
    "jc": "jc",
    "rho": "corrected",
    "broken_susy": "gaussian",
}

# parameter-file keys each family understands, with defaults
FAMILY_KEYS = {
    "csc_a": {},
    "csc_b": {},
    "particular": {"omega1": 1.0, "omega2": 0.5},
    "clifford": {"alpha": 0.4, "beta": 0.9, "gamma": -0.3},
    "jc": {"omega": 1.0, "omega0": 0.5, "kappa": 0.1},
    "rho": {"gamma": 0.0, "epsilon": 1.0, "beta": 0.0},
    "broken_susy": {"scale": 2.0},
}


def build_model(name: str, params: dict | None = None) -> VCSModel:
    if name not in FAMILIES:
        raise KeyError(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    p = dict(FAMILY_KEYS[name])
    p.update({k: v for k, v in (params or {}).items() if k in p})
    if name in ("csc_a", "csc_b"):
        return csc_example(name[-1])
    if name == "particular":
        return particular_class_model(omegas=(float(p["omega1"]), float(p["omega2"])))
    if name == "clifford":
        return clifford_zr_model((float(p["alpha"]), float(p["beta"]), float(p["gamma"])))
    if name == "jc":
        return jc_model(JCParams(float(p["omega"]), float(p["omega0"]), float(p["kappa"])))
    if name == "rho":
        return rho_model(RhoParams(float(p["gamma"]), float(p["epsilon"]), float(p["beta"])))
    return broken_susy_model(float(p["scale"]))


def component_states(model: VCSModel, Z, trunc: FockTruncation, convention: str | None = None) -> list:
    n = model.family.dimension
    if model.family.ordering == "zr":
        conv = convention or model.convention
        return [build_vcs_zr(model.family, Z, j, trunc, convention=conv) for j in range(n)]
    return [build_vcs_rz(model.family, Z, j, trunc) for j in range(n)]


def series_normalization(model: VCSModel, Z, trunc: FockTruncation) -> float:
    """Series value of ``N`` in the model's own convention."""
    N = normalization_rz(model.family, Z, trunc).value
    return N / model.family.dimension if model.convention == "state" else N


class NormCheck(NamedTuple):
    radii: tuple
    phases: tuple
    total_norm: float
    norm_deviation: float       # |sum_j <Z,j|Z,j> - target|
    closed_form_deviation: float  # relative gap between series N and the closed form

    def passed(self, tol: float) -> bool:
        return self.norm_deviation <= tol and self.closed_form_deviation <= tol


def normalization_checks(model: VCSModel, n_samples: int = 20, radius_max: float = 3.0, seed: int = 0,
                         trunc: FockTruncation | None = None, convention: str | None = None) -> list[NormCheck]:
    """Random labels with radii in ``[0, radius_max]``.

    ``convention="trace"`` forces the summed-norm convention on Z-R models; under
    per-state normalization the target for the summed norms is ``n``.
    """
    rng = np.random.default_rng(seed)
    var = model.variable
    n = model.family.dimension
    trunc = trunc or FockTruncation(n, tail_tolerance=1e-16)
    conv = convention or model.convention
    target = float(n) if conv == "state" else 1.0
    out = []
    for _ in range(n_samples):
        r = rng.uniform(0.0, radius_max, var.n_radii)
        ph = rng.uniform(0.0, 2 * math.pi, var.n_phases)
        Z = var.matrix(r, ph)
        states = component_states(model, Z, trunc, conv)
        total = sum(float(np.sum(np.abs(s.coefficients) ** 2)) / s.normalization_constant for s in states)
        closed = float(model.normalization(r))
        series = series_normalization(model, Z, trunc)
        out.append(NormCheck(tuple(r.tolist()), tuple(ph.tolist()), total, abs(total - target),
                             abs(series - closed) / closed))
    return out
