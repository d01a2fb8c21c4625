"""Samplers for elliptically symmetric designs, sparse signals and 1-bit data.

Every sampler takes an explicit ``numpy.random.Generator``; nothing here
touches global random state, so identical seeds give bit-identical draws.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np


@dataclass(frozen=True)
class GaussianRadius:
    """Standard Gaussian design; rows are drawn coordinate-wise N(0, 1)."""


@dataclass(frozen=True)
class ParetoDifference:
    """Radial law ``(xi_1 - xi_2) / sqrt(2 c(q))`` with ``xi_j`` i.i.d. Pareto(q)."""

    q: float = 2.1

    def __post_init__(self):
        if not self.q > 2:
            raise ValueError(f"ParetoDifference requires q > 2, got {self.q}")


@dataclass(frozen=True)
class UnitConstant:
    """Radius identically 1: rows are uniform on the sphere of radius sqrt(d)."""


RadialLaw = Union[GaussianRadius, ParetoDifference, UnitConstant]


@dataclass(frozen=True)
class EllipticalDesign:
    dim: int
    radial: RadialLaw = field(default_factory=GaussianRadius)
    shape: Optional[np.ndarray] = None  # Sigma^{1/2}; None means isotropic

    def __post_init__(self):
        if int(self.dim) < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not isinstance(self.radial, (GaussianRadius, ParetoDifference, UnitConstant)):
            raise ValueError(f"unknown radial law {self.radial!r}")
        if self.shape is not None:
            check_spd(self.shape, self.dim, name="shape")


@dataclass
class SparseSignal:
    dim: int
    support: np.ndarray
    values: np.ndarray

    def to_dense(self) -> np.ndarray:
        theta = np.zeros(self.dim)
        theta[self.support] = self.values
        return theta


@dataclass
class Dataset:
    """``m`` measurement vectors (rows of ``X``) and their responses ``y``."""

    X: np.ndarray
    y: np.ndarray
    theta_star: Optional[np.ndarray] = None

    def __post_init__(self):
        self.X = np.asarray(self.X, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        if self.X.ndim != 2 or self.y.ndim != 1 or self.X.shape[0] != self.y.shape[0]:
            raise ValueError(
                f"inconsistent dataset shapes X{self.X.shape}, y{self.y.shape}"
            )

    @property
    def m(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    def subset(self, idx) -> "Dataset":
        return Dataset(self.X[idx], self.y[idx], self.theta_star)


def check_spd(matrix, dim: int, name: str = "matrix") -> np.ndarray:
    """Raise ``ValueError`` unless ``matrix`` is a symmetric positive-definite dim x dim array."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.shape != (dim, dim):
        raise ValueError(f"{name} must have shape ({dim}, {dim}), got {matrix.shape}")
    if not np.allclose(matrix, matrix.T, rtol=1e-10, atol=1e-12):
        raise ValueError(f"{name} must be symmetric")
    if np.linalg.eigvalsh(matrix).min() <= 0:
        raise ValueError(f"{name} must be positive definite")
    return matrix


def sqrtm_psd(sigma) -> np.ndarray:
    """Symmetric square root of a covariance matrix via eigendecomposition."""
    sigma = np.asarray(sigma, dtype=float)
    check_spd(sigma, sigma.shape[0], name="sigma")
    w, v = np.linalg.eigh(sigma)
    return (v * np.sqrt(w)) @ v.T


def pareto_variance(q: float) -> float:
    """Variance ``q / ((q-1)^2 (q-2))`` of the Pareto law with density q/(1+t)^(1+q)."""
    if not q > 2:
        raise ValueError(f"Pareto variance is finite only for q > 2, got {q}")
    return q / ((q - 1.0) ** 2 * (q - 2.0))


def pareto_quantile(q: float, u):
    """Inverse CDF ``(1-u)^(-1/q) - 1`` of the density ``q / (1+t)^(1+q)`` on t > 0."""
    if not q > 1:
        raise ValueError(f"q must be > 1, got {q}")
    u = np.asarray(u, dtype=float)
    if np.any(u < 0) or np.any(u >= 1) or np.any(np.isnan(u)):
        raise ValueError("u must lie in [0, 1)")
    t = (1.0 - u) ** (-1.0 / q) - 1.0
    return float(t) if t.ndim == 0 else t


def sample_pareto(q: float, size, rng: np.random.Generator):
    return pareto_quantile(q, rng.random(size))


def sample_uniform_sphere(d: int, rng: np.random.Generator, size: Optional[int] = None):
    """Uniform draw(s) from the unit sphere in R^d (normalized Gaussians).

    With ``size=None`` a single vector of shape (d,) is returned, otherwise an
    array of shape (size, d).
    """
    if int(d) < 1:
        raise ValueError(f"d must be >= 1, got {d}")
    n = 1 if size is None else int(size)
    g = rng.standard_normal((n, d))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    # a zero Gaussian vector has probability zero; redraw rather than divide by 0
    while np.any(norms == 0):
        bad = norms[:, 0] == 0
        g[bad] = rng.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1, keepdims=True)
    u = g / norms
    return u[0] if size is None else u


def sample_radial(law: RadialLaw, rng: np.random.Generator, size: Optional[int] = None):
    """Draw unit-variance radial scalars for ``law``.

    ``GaussianRadius`` has no standalone radial draw here: Gaussian rows are
    sampled coordinate-wise by :func:`sample_design`.
    """
    n = 1 if size is None else int(size)
    if isinstance(law, ParetoDifference):
        xi = sample_pareto(law.q, (2, n), rng)
        out = (xi[0] - xi[1]) / math.sqrt(2.0 * pareto_variance(law.q))
    elif isinstance(law, UnitConstant):
        out = np.ones(n)
    elif isinstance(law, GaussianRadius):
        raise ValueError("GaussianRadius is sampled coordinate-wise via sample_design")
    else:
        raise ValueError(f"unknown radial law {law!r}")
    return float(out[0]) if size is None else out


def sample_design(design: EllipticalDesign, m: int, rng: np.random.Generator) -> np.ndarray:
    """Draw an ``m x d`` matrix whose rows are i.i.d. copies of the design vector."""
    if int(m) < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    d = design.dim
    if isinstance(design.radial, GaussianRadius):
        X = rng.standard_normal((m, d))
    else:
        U = sample_uniform_sphere(d, rng, size=m)
        mu = sample_radial(design.radial, rng, size=m)
        X = (mu * math.sqrt(d))[:, None] * U
    if design.shape is not None:
        X = X @ design.shape
    return X


def sample_sparse_signal(d: int, s: int, rng: np.random.Generator) -> SparseSignal:
    """Support uniform without replacement, magnitudes i.i.d. Uniform[0, 1]."""
    if not 1 <= s <= d:
        raise ValueError(f"need 1 <= s <= d, got s={s}, d={d}")
    support = np.sort(rng.choice(d, size=s, replace=False))
    values = rng.uniform(0.0, 1.0, size=s)
    return SparseSignal(dim=d, support=support, values=values)


def snr_noise_std(snr_db: float) -> float:
    # signal variance is 1 for sign(<x, theta>)
    return math.sqrt(10.0 ** (-snr_db / 10.0))


def one_bit_generate(
    signal,
    design: EllipticalDesign,
    snr_db: Optional[float],
    m: int,
    rng: np.random.Generator,
    noise_q: float = 2.1,
) -> Dataset:
    """Simulate ``y = sign(<x, theta*>) + delta`` with heavy-tailed additive noise.

    ``delta`` is a unit-variance Pareto-difference draw scaled to the requested
    SNR (in dB, signal variance 1); ``snr_db=None`` gives noiseless signs.
    """
    theta = signal.to_dense() if isinstance(signal, SparseSignal) else np.asarray(signal, float)
    if theta.shape != (design.dim,):
        raise ValueError(f"signal has shape {theta.shape}, design dim is {design.dim}")
    X = sample_design(design, m, rng)
    y = np.sign(X @ theta)
    if snr_db is not None:
        h = sample_radial(ParetoDifference(noise_q), rng, size=m)
        y = y + snr_noise_std(snr_db) * h
    return Dataset(X, y, theta_star=theta)
