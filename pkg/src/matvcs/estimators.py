"""scikit-learn style wrappers for batch work over grids of labels.

Both transformers take rows ``(r1, theta1, r2, theta2)``.  There is nothing to
learn; ``fit`` validates parameters and records the input width.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .jaynes_cummings import JCParams, build_jc_cs, closed_form_observables
from .susy import RhoParams, build_rho_cs
from .vcs import FockTruncation

_OBS_FIELDS = ("mean_HD", "mean_HD2", "mean_Q", "mean_P", "var_Q", "var_P", "var_HD")


def _labels(X):
    X = check_array(X, dtype=float)
    if X.shape[1] != 4:
        raise ValueError(f"expected rows (r1, theta1, r2, theta2), got {X.shape[1]} columns")
    if np.any(X[:, [0, 2]] < 0):
        raise ValueError("radii must be nonnegative")
    z1 = X[:, 0] * np.exp(1j * X[:, 1])
    z2 = X[:, 2] * np.exp(1j * X[:, 3])
    return X, z1, z2


class CoherentStateEncoder(TransformerMixin, BaseEstimator):
    """Map labels to the normalised coefficients of ``|Z, component>``.

    Output columns are ``Re`` then ``Im`` of the ``(n_levels, 2)`` stack,
    flattened level-major; states are truncated or zero padded to ``n_levels``.
    """

    def __init__(self, model="jc", component=0, n_levels=32, omega=1.0, omega0=0.5, kappa=0.1,
                 epsilon=1.0):
        self.model = model
        self.component = component
        self.n_levels = n_levels
        self.omega = omega
        self.omega0 = omega0
        self.kappa = kappa
        self.epsilon = epsilon

    def fit(self, X, y=None):
        X, _, _ = _labels(X)
        if self.model == "jc":
            self.params_ = JCParams(self.omega, self.omega0, self.kappa)
        elif self.model == "rho":
            self.params_ = RhoParams(epsilon=self.epsilon)
        else:
            raise ValueError(f"model must be 'jc' or 'rho', got {self.model!r}")
        if self.component not in (0, 1):
            raise ValueError("component must be 0 or 1")
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        X, z1, z2 = _labels(X)
        build = build_jc_cs if self.model == "jc" else build_rho_cs
        trunc = FockTruncation(2, tail_tolerance=1e-16)
        out = np.zeros((X.shape[0], 2 * 2 * self.n_levels))
        for i, (a, b) in enumerate(zip(z1, z2)):
            v = build(self.params_, a, b, self.component, trunc).normalized()[: self.n_levels]
            block = np.zeros((self.n_levels, 2), complex)
            block[: v.shape[0]] = v
            out[i] = np.concatenate([block.real.ravel(), block.imag.ravel()])
        return out


class JCObservableTransformer(TransformerMixin, BaseEstimator):
    """Closed-form mean values and dispersions on ``|Z, component>`` for each label row."""

    def __init__(self, omega=1.0, omega0=0.5, kappa=0.1, component=0):
        self.omega = omega
        self.omega0 = omega0
        self.kappa = kappa
        self.component = component

    def fit(self, X, y=None):
        X, _, _ = _labels(X)
        self.params_ = JCParams(self.omega, self.omega0, self.kappa)
        self.n_features_in_ = X.shape[1]
        return self

    def transform(self, X):
        check_is_fitted(self, "params_")
        _, z1, z2 = _labels(X)
        rows = []
        for a, b in zip(z1, z2):
            obs = closed_form_observables(self.params_, complex(a), complex(b), self.component)
            rows.append([getattr(obs, f) for f in _OBS_FIELDS])
        return np.array(rows, dtype=float).reshape(-1, len(_OBS_FIELDS))

    def get_feature_names_out(self, input_features=None):
        return np.array(_OBS_FIELDS, dtype=object)
