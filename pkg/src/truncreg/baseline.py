"""Cyclic coordinate-descent Lasso, the comparison method for the robust estimator."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .estimators import RecoveryResult, _result


@dataclass(frozen=True)
class LassoConfig:
    lam: float = 0.1
    tol: float = 1e-8
    max_iter: int = 100_000

    def __post_init__(self):
        if self.lam < 0:
            raise ValueError(f"lambda must be nonnegative, got {self.lam}")
        if not self.tol > 0:
            raise ValueError(f"tol must be positive, got {self.tol}")
        if int(self.max_iter) < 1:
            raise ValueError(f"max_iter must be >= 1, got {self.max_iter}")


def lasso_objective(X, y, theta, lam):
    r = y - X @ theta
    return float(r @ r + lam * np.abs(theta).sum())


def duality_gap(X, y, theta, lam):
    """Primal minus dual objective for ``|X theta - y|^2 + lam |theta|_1``."""
    r = y - X @ theta
    primal = float(r @ r + lam * np.abs(theta).sum())
    corr = np.max(np.abs(X.T @ r)) if X.shape[1] else 0.0
    scale = 1.0 if 2.0 * corr <= lam else lam / (2.0 * corr)
    nu = 2.0 * scale * r
    dual = float(-nu @ nu / 4.0 + nu @ y)
    return primal - dual


@njit(cache=True)
def _sweep(Xf, col_sq, theta, r, coords, half_lam):
    m = Xf.shape[0]
    max_change = 0.0
    for k in coords:
        cs = col_sq[k]
        if cs == 0.0:
            continue
        old = theta[k]
        rho = cs * old
        for i in range(m):
            rho += Xf[i, k] * r[i]
        if rho > half_lam:
            new = (rho - half_lam) / cs
        elif rho < -half_lam:
            new = (rho + half_lam) / cs
        else:
            new = 0.0
        if new != old:
            delta = new - old
            for i in range(m):
                r[i] -= delta * Xf[i, k]
            theta[k] = new
            if abs(delta) > max_change:
                max_change = abs(delta)
    return max_change


def lasso_fit(X, y, config: LassoConfig = LassoConfig(), theta0=None, trace=None) -> RecoveryResult:
    """Minimise ``|X theta - y|_2^2 + lam |theta|_1`` by cyclic coordinate descent.

    Full sweeps alternate with sweeps over the current active set; the solver
    stops when a full sweep moves no coordinate by ``tol`` or more.
    ``theta0`` warm-starts the iterate.  If ``trace`` is a list, the objective
    after every sweep is appended to it.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: X{X.shape}, y{y.shape}")
    m, d = X.shape
    Xf = np.asfortranarray(X)
    col_sq = np.einsum("ij,ij->j", X, X)
    if theta0 is None:
        theta = np.zeros(d)
        r = y.copy()
    else:
        theta = np.array(theta0, dtype=float)
        r = y - X @ theta
    half_lam = config.lam / 2.0
    all_coords = np.arange(d)

    sweeps = 0
    converged = False
    while sweeps < config.max_iter:
        change = _sweep(Xf, col_sq, theta, r, all_coords, half_lam)
        sweeps += 1
        if trace is not None:
            trace.append(lasso_objective(X, y, theta, config.lam))
        if change < config.tol:
            converged = True
            break
        active = np.flatnonzero(theta)
        while sweeps < config.max_iter:
            change = _sweep(Xf, col_sq, theta, r, active, half_lam)
            sweeps += 1
            if trace is not None:
                trace.append(lasso_objective(X, y, theta, config.lam))
            if change < config.tol:
                break
    return _result(theta, config.lam, iterations=sweeps, converged=converged)


class LassoCD(RegressorMixin, BaseEstimator):
    """Lasso on the normalised design ``X / sqrt(m)``, ``y / sqrt(m)``.

    The normalisation makes the objective ``mean((y - X theta)^2) + lam |theta|_1``,
    so ``lam`` lives on the same scale as the truncated estimators.
    """

    def __init__(self, lam=0.1, tol=1e-8, max_iter=100_000):
        self.lam = lam
        self.tol = tol
        self.max_iter = max_iter

    def fit(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        root_m = math.sqrt(X.shape[0])
        self.n_features_in_ = X.shape[1]
        self.result_ = lasso_fit(X / root_m, y / root_m,
                                 LassoConfig(self.lam, self.tol, self.max_iter))
        self.coef_ = self.result_.theta_hat
        self.n_iter_ = self.result_.iterations
        return self

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return check_array(X) @ self.coef_
