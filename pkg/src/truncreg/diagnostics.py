"""Monte-Carlo probes of the population quantities behind the truncated estimator."""

from __future__ import annotations

import math

import numpy as np

from .distributions import Dataset, EllipticalDesign, sample_design, sample_uniform_sphere
from .estimators import TruncationConfig, transform, truncate


def sign_link_moment(design: EllipticalDesign, theta_star, n: int, rng):
    """Sample mean and per-coordinate standard error of ``y x`` for ``y = sign(<x, theta*>)``."""
    theta_star = np.asarray(theta_star, dtype=float)
    X = sample_design(design, n, rng)
    yx = np.sign(X @ theta_star)[:, None] * X
    return yx.mean(axis=0), yx.std(axis=0, ddof=1) / math.sqrt(n)


def sphere_tail_frequency(d: int, delta: float, n: int, rng, v=None):
    """Empirical ``P(<U, v> >= delta)`` for ``U`` uniform on the unit sphere."""
    if v is None:
        v = np.zeros(d)
        v[0] = 1.0
    U = sample_uniform_sphere(d, rng, size=n)
    hits = (U @ v) >= delta
    p = float(hits.mean())
    return p, math.sqrt(max(p * (1 - p), 1.0 / n) / n)


def truncation_bias_proxy(
    design: EllipticalDesign,
    theta_star,
    ms,
    rng,
    kappa: float = 1.0,
    n_mc: int = 200_000,
    n_directions: int = 50,
):
    """Estimate ``max_v |E <y x - q_trunc U_tilde, v>|`` at the truncation level of each ``m``.

    One sample of ``n_mc`` noiseless sign-link measurements and one set of
    random unit directions are shared across all ``ms`` (common random
    numbers), so only the truncation level changes between entries.
    """
    theta_star = np.asarray(theta_star, dtype=float)
    X = sample_design(design, n_mc, rng)
    y = np.sign(X @ theta_star)
    data = transform(Dataset(X, y))
    V = sample_uniform_sphere(design.dim, rng, size=n_directions)
    proj = data.u_tilde @ V.T
    config = TruncationConfig(kappa=kappa)
    out = []
    for m in ms:
        excess = data.q - truncate(data.q, config.tau(m))
        out.append(float(np.max(np.abs(excess @ proj / n_mc))))
    return np.array(out)
