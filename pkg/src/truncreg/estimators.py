"""Truncated-moment estimators for single-index models.

Each sample ``(x_i, y_i)`` is rewritten as a direction ``U_i = sqrt(d) x_i / |x_i|``
and a scalar ``q_i = |x_i| y_i / sqrt(d)`` so that ``q_i U_i = y_i x_i``.  Only
the scalar is truncated at level ``tau``, and every estimator here is a
function of the averaged statistic ``b = mean(q_trunc_i * U_i)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_array, check_is_fitted, check_X_y

from .distributions import Dataset, check_spd


class DegenerateInputError(ValueError):
    """Raised when a measurement row is identically zero."""


@dataclass(frozen=True)
class TruncationConfig:
    kappa: float = 1.0
    scale_c: float = 1.0
    tau_override: Optional[float] = None

    def __post_init__(self):
        if not 0 < self.kappa <= 1:
            raise ValueError(f"kappa must lie in (0, 1], got {self.kappa}")
        if not self.scale_c > 0:
            raise ValueError(f"scale_c must be positive, got {self.scale_c}")
        if self.tau_override is not None and not self.tau_override > 0:
            raise ValueError(f"tau_override must be positive, got {self.tau_override}")

    def tau(self, m: int) -> float:
        """Truncation level ``c * m^(1 / (2 (1 + kappa)))`` unless overridden."""
        if self.tau_override is not None:
            return float(self.tau_override)
        return self.scale_c * m ** (1.0 / (2.0 * (1.0 + self.kappa)))


@dataclass
class TransformedData:
    u_tilde: np.ndarray
    q: np.ndarray


@dataclass
class RecoveryResult:
    theta_hat: np.ndarray
    lambda_used: float = 0.0
    tau_used: float = float("nan")
    nnz: int = 0
    rank: Optional[int] = None
    iterations: int = 0
    converged: bool = True


def _result(theta, lam, tau=float("nan"), iterations=0, converged=True, rank=None):
    theta = np.asarray(theta, dtype=float)
    return RecoveryResult(
        theta_hat=theta,
        lambda_used=float(lam),
        tau_used=float(tau),
        nnz=int(np.count_nonzero(theta)),
        rank=rank,
        iterations=int(iterations),
        converged=converged,
    )


def transform(dataset: Dataset) -> TransformedData:
    X, y = dataset.X, dataset.y
    d = X.shape[1]
    norms = np.linalg.norm(X, axis=1)
    zero = np.flatnonzero(norms == 0)
    if zero.size:
        raise DegenerateInputError(f"measurement row {int(zero[0])} is identically zero")
    sqrt_d = math.sqrt(d)
    u_tilde = (sqrt_d / norms)[:, None] * X
    q = norms * y / sqrt_d
    return TransformedData(u_tilde=u_tilde, q=q)


def truncate(q, tau: float):
    """Clip magnitudes at ``tau`` keeping signs: ``sign(q) * min(|q|, tau)``."""
    if not tau > 0:
        raise ValueError(f"tau must be positive, got {tau}")
    return np.clip(q, -tau, tau)


def robust_direction(data: TransformedData, config: TruncationConfig) -> np.ndarray:
    m = data.q.shape[0]
    if m < 1:
        raise ValueError("need at least one sample")
    q_trunc = truncate(data.q, config.tau(m))
    return q_trunc @ data.u_tilde / m


def truncated_loss(theta, data: TransformedData, config: TruncationConfig) -> float:
    """Empirical loss ``|theta|^2 - 2 <b, theta>`` on (possibly held-out) data."""
    theta = np.ravel(theta)
    b = robust_direction(data, config)
    return float(theta @ theta - 2.0 * b @ theta)


def _soft(b, thresh):
    # |b| == thresh maps to exactly zero
    return np.sign(b) * np.maximum(np.abs(b) - thresh, 0.0)


def soft_threshold_estimate(b, lam: float) -> RecoveryResult:
    """Exact minimiser of ``|theta|^2 - 2<b, theta> + lam |theta|_1``."""
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    return _result(_soft(np.asarray(b, dtype=float), lam / 2.0), lam)


def project_l1_ball(b, radius: float) -> np.ndarray:
    """Euclidean projection onto ``{|theta|_1 <= radius}`` by sorting magnitudes."""
    if not radius > 0:
        raise ValueError(f"radius must be positive, got {radius}")
    b = np.asarray(b, dtype=float)
    a = np.abs(b)
    if a.sum() <= radius:
        return b.copy()
    srt = np.sort(a)[::-1]
    css = np.cumsum(srt) - radius
    ks = np.arange(1, a.size + 1)
    rho = np.flatnonzero(srt - css / ks > 0)[-1]
    shift = css[rho] / (rho + 1.0)
    return np.sign(b) * np.maximum(a - shift, 0.0)


def constrained_estimate(data: TransformedData, config: TruncationConfig, radius: float) -> RecoveryResult:
    b = robust_direction(data, config)
    theta = project_l1_ball(b, radius)
    return _result(theta, 0.0, config.tau(data.q.shape[0]))


def nuclear_soft_threshold(B, lam: float) -> RecoveryResult:
    """Singular-value soft thresholding by ``lam / 2``.

    Minimises ``|theta|_F^2 - 2<B, theta> + lam |theta|_*``.
    """
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    B = np.asarray(B, dtype=float)
    U, sv, Vt = np.linalg.svd(B, full_matrices=False)
    shrunk = np.maximum(sv - lam / 2.0, 0.0)
    theta = (U * shrunk) @ Vt
    return _result(theta, lam, rank=int(np.count_nonzero(shrunk)))


def nonisotropic_estimate(
    data: TransformedData,
    config: TruncationConfig,
    sigma_half,
    lam: float,
    tol: float = 1e-8,
    max_iter: int = 10_000,
    penalty: str = "sigma",
) -> RecoveryResult:
    """Penalised estimator for designs with covariance ``Sigma = S @ S``.

    Minimises ``|S theta|^2 - 2 <b, S theta> + lam * pen(theta)`` where ``pen``
    is ``|S theta|_1`` (``penalty="sigma"``) or ``|theta|_1`` (``penalty="l1"``).
    The first is solved exactly through ``phi = S theta``; the second by FISTA
    with step ``1 / (2 lambda_max(Sigma))`` and adaptive restart, stopping once
    the sup-norm change between iterates drops below ``tol``.
    """
    d = data.u_tilde.shape[1]
    S = check_spd(sigma_half, d, name="sigma_half")
    if lam < 0:
        raise ValueError(f"lambda must be nonnegative, got {lam}")
    tau = config.tau(data.q.shape[0])
    b = robust_direction(data, config)

    if penalty == "sigma":
        phi = _soft(b, lam / 2.0)
        return _result(np.linalg.solve(S, phi), lam, tau)
    if penalty != "l1":
        raise ValueError(f"penalty must be 'sigma' or 'l1', got {penalty!r}")

    sigma = S @ S
    lin = S @ b
    step = 1.0 / (2.0 * np.linalg.eigvalsh(sigma)[-1])

    def objective(theta):
        return theta @ sigma @ theta - 2.0 * lin @ theta + lam * np.abs(theta).sum()

    theta = np.zeros(d)
    z = theta.copy()
    t = 1.0
    f_prev = objective(theta)
    converged = False
    it = 0
    for it in range(1, max_iter + 1):
        grad = 2.0 * (sigma @ z - lin)
        theta_new = _soft(z - step * grad, step * lam)
        f_new = objective(theta_new)
        if f_new > f_prev:
            # restart momentum
            t = 1.0
            z = theta.copy()
            grad = 2.0 * (sigma @ z - lin)
            theta_new = _soft(z - step * grad, step * lam)
            f_new = objective(theta_new)
        t_new = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * t * t))
        z = theta_new + ((t - 1.0) / t_new) * (theta_new - theta)
        delta = np.max(np.abs(theta_new - theta))
        theta, t, f_prev = theta_new, t_new, f_new
        if delta < tol:
            converged = True
            break
    return _result(theta, lam, tau, iterations=it, converged=converged)


# -- scikit-learn style wrappers ---------------------------------------------


class _TruncatedBase(BaseEstimator):
    """Shared fit/predict/score plumbing; subclasses implement ``_solve``."""

    def _config(self):
        return TruncationConfig(kappa=self.kappa, scale_c=self.scale_c, tau_override=self.tau)

    def _transformed(self, X, y):
        X, y = check_X_y(X, y, y_numeric=True)
        return transform(Dataset(X, y))

    def fit(self, X, y):
        data = self._transformed(X, y)
        self.n_features_in_ = data.u_tilde.shape[1]
        config = self._config()
        self.tau_ = config.tau(data.q.shape[0])
        self.direction_ = robust_direction(data, config)
        self.result_ = self._solve(data, config)
        self.coef_ = np.ravel(self.result_.theta_hat)
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X)
        return X @ self.coef_

    def predict(self, X):
        """Index values ``<x, theta_hat>``; use ``np.sign`` for 1-bit labels."""
        return self.decision_function(X)

    def score(self, X, y):
        """Negative held-out truncated loss (larger is better)."""
        check_is_fitted(self, "coef_")
        data = self._transformed(X, y)
        return -truncated_loss(self.coef_, data, TruncationConfig(kappa=self.kappa))


class TruncatedSoftThreshold(_TruncatedBase):
    """l1-penalised truncated estimator; closed-form soft thresholding of ``b``.

    Parameters
    ----------
    lam : float
        Regularisation strength; coordinates of ``b`` below ``lam / 2`` in
        magnitude are zeroed.
    kappa : float
        Moment exponent in (0, 1]; truncation level is
        ``scale_c * m ** (1 / (2 * (1 + kappa)))``.
    scale_c : float
        Multiplier of the truncation level.
    tau : float or None
        Fixed truncation level overriding ``kappa`` and ``scale_c``.
    """

    def __init__(self, lam=0.1, kappa=1.0, scale_c=1.0, tau=None):
        self.lam = lam
        self.kappa = kappa
        self.scale_c = scale_c
        self.tau = tau

    def _solve(self, data, config):
        res = soft_threshold_estimate(robust_direction(data, config), self.lam)
        res.tau_used = config.tau(data.q.shape[0])
        return res


class TruncatedL1Ball(_TruncatedBase):
    """Constrained truncated estimator over the l1 ball of the given radius."""

    def __init__(self, radius=1.0, kappa=1.0, scale_c=1.0, tau=None):
        self.radius = radius
        self.kappa = kappa
        self.scale_c = scale_c
        self.tau = tau

    def _solve(self, data, config):
        return constrained_estimate(data, config, self.radius)


class TruncatedNuclearNorm(_TruncatedBase):
    """Low-rank truncated estimator; rows of ``X`` are flattened ``shape`` matrices."""

    def __init__(self, shape=None, lam=0.1, kappa=1.0, scale_c=1.0, tau=None):
        self.shape = shape
        self.lam = lam
        self.kappa = kappa
        self.scale_c = scale_c
        self.tau = tau

    def _solve(self, data, config):
        d1, d2 = self.shape
        if d1 * d2 != data.u_tilde.shape[1]:
            raise ValueError(f"shape {self.shape} does not match {data.u_tilde.shape[1]} features")
        B = robust_direction(data, config).reshape(d1, d2)
        res = nuclear_soft_threshold(B, self.lam)
        res.tau_used = config.tau(data.q.shape[0])
        return res

    @property
    def coef_matrix_(self):
        check_is_fitted(self, "coef_")
        return self.coef_.reshape(self.shape)


class TruncatedNonIsotropic(_TruncatedBase):
    """Penalised truncated estimator for a known design shape ``Sigma^{1/2}``."""

    def __init__(self, sigma_half=None, lam=0.1, penalty="sigma", kappa=1.0, scale_c=1.0,
                 tau=None, tol=1e-8, max_iter=10_000):
        self.sigma_half = sigma_half
        self.lam = lam
        self.penalty = penalty
        self.kappa = kappa
        self.scale_c = scale_c
        self.tau = tau
        self.tol = tol
        self.max_iter = max_iter

    def _solve(self, data, config):
        return nonisotropic_estimate(data, config, self.sigma_half, self.lam,
                                     tol=self.tol, max_iter=self.max_iter, penalty=self.penalty)
