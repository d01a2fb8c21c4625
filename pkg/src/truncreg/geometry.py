"""Gaussian mean widths, descent-cone and compatibility bounds, error-rate scalings."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Union

import numpy as np

from .distributions import EllipticalDesign, SparseSignal, sample_design


# -- sets ---------------------------------------------------------------------

@dataclass(frozen=True)
class L1Ball:
    dim: int
    radius: float = 1.0


@dataclass(frozen=True)
class L2Ball:
    dim: int
    radius: float = 1.0


@dataclass(frozen=True)
class NuclearBall:
    d1: int
    d2: int
    radius: float = 1.0


@dataclass(frozen=True)
class Singleton:
    dim: int = 1


SetDescriptor = Union[L1Ball, L2Ball, NuclearBall, Singleton]


def _support_function(T: SetDescriptor, n: int, rng) -> np.ndarray:
    if isinstance(T, Singleton):
        return np.zeros(n)
    if getattr(T, "radius", 1.0) <= 0:
        raise ValueError(f"radius must be positive, got {T.radius}")
    if isinstance(T, L1Ball):
        g = rng.standard_normal((n, T.dim))
        return T.radius * np.abs(g).max(axis=1)
    if isinstance(T, L2Ball):
        g = rng.standard_normal((n, T.dim))
        return T.radius * np.linalg.norm(g, axis=1)
    if isinstance(T, NuclearBall):
        g = rng.standard_normal((n, T.d1, T.d2))
        return T.radius * np.linalg.norm(g, ord=2, axis=(1, 2))
    raise ValueError(f"unknown set descriptor {T!r}")


def mean_width_mc(T: SetDescriptor, n_samples: int, rng, return_se: bool = False):
    """Monte-Carlo estimate of ``E sup_{t in T} <g, t>``.

    The supremum is evaluated in closed form: ``R max|g_k|`` for the l1 ball,
    ``R |g|_2`` for the l2 ball and ``R sigma_max(g)`` for the nuclear ball.
    With ``return_se`` a ``(mean, standard_error)`` pair is returned.
    """
    if int(n_samples) < 1:
        raise ValueError(f"n_samples must be >= 1, got {n_samples}")
    vals = _support_function(T, int(n_samples), rng)
    est = float(vals.mean())
    if not return_se:
        return est
    se = float(vals.std(ddof=1) / math.sqrt(vals.size)) if vals.size > 1 else float("nan")
    return est, se


# -- cone bounds ----------------------------------------------------------------

@dataclass(frozen=True)
class SparseDescent:
    s: int
    d: int

    def __post_init__(self):
        if not 1 <= self.s <= self.d:
            raise ValueError(f"need 1 <= s <= d, got s={self.s}, d={self.d}")


@dataclass(frozen=True)
class LowRankDescent:
    r: int
    d1: int
    d2: int

    def __post_init__(self):
        if not 1 <= self.r <= min(self.d1, self.d2):
            raise ValueError(f"need 1 <= r <= min(d1, d2), got r={self.r}")


ConeKind = Union[SparseDescent, LowRankDescent]


@dataclass(frozen=True)
class ConeBound:
    kind: ConeKind
    width_sq_bound: float
    compat_bound: float
    c0: float


def sparse_cone_width_bound(s: int, d) -> float:
    """``sqrt(2 s log(d/s) + 1.25 s)``; ``d`` may be non-integer."""
    if not 1 <= s <= d:
        raise ValueError(f"need 1 <= s <= d, got s={s}, d={d}")
    return math.sqrt(2.0 * s * math.log(d / s) + 1.25 * s)


def lowrank_cone_width_bound(r: int, d1: int, d2: int) -> float:
    if not 1 <= r <= min(d1, d2):
        raise ValueError(f"need 1 <= r <= min(d1, d2), got r={r}, d1={d1}, d2={d2}")
    return math.sqrt(3.0 * r * (d1 + d2 - r))


def restricted_compat_bound(kind: ConeKind, c0: float) -> float:
    if not c0 > 1:
        raise ValueError(f"c0 must exceed 1, got {c0}")
    factor = 2.0 * c0 / (c0 - 1.0)
    if isinstance(kind, SparseDescent):
        return factor * math.sqrt(kind.s)
    if isinstance(kind, LowRankDescent):
        return factor * math.sqrt(2.0 * kind.r)
    raise ValueError(f"unknown cone kind {kind!r}")


def cone_bound(kind: ConeKind, c0: float = 2.0) -> ConeBound:
    if isinstance(kind, SparseDescent):
        w = sparse_cone_width_bound(kind.s, kind.d)
    else:
        w = lowrank_cone_width_bound(kind.r, kind.d1, kind.d2)
    return ConeBound(kind, w * w, restricted_compat_bound(kind, c0), float(c0))


def theoretical_error_rate(kind: ConeKind, m: int) -> float:
    """Error scaling without constants: ``sqrt(s log(d/s) / m)`` or ``sqrt(r (d1+d2) / m)``."""
    if int(m) < 1:
        raise ValueError(f"m must be >= 1, got {m}")
    if isinstance(kind, SparseDescent):
        return math.sqrt(kind.s * math.log(kind.d / kind.s) / m)
    if isinstance(kind, LowRankDescent):
        return math.sqrt(kind.r * (kind.d1 + kind.d2) / m)
    raise ValueError(f"unknown cone kind {kind!r}")


# -- index constant -----------------------------------------------------------

LINKS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sign": np.sign,
    "identity": lambda z: z,
    "zero": np.zeros_like,
}


def eta_oracle(link, design: EllipticalDesign, signal, n_mc: int, rng, return_se: bool = False):
    """Monte-Carlo estimate of ``eta = E <y x, theta*>`` for ``y = link(<x, theta*>)``.

    ``link`` is a name from ``LINKS`` or a vectorised callable.
    """
    if int(n_mc) < 1:
        raise ValueError(f"n_mc must be >= 1, got {n_mc}")
    f = LINKS[link] if isinstance(link, str) else link
    theta = signal.to_dense() if isinstance(signal, SparseSignal) else np.asarray(signal, float)
    X = sample_design(design, int(n_mc), rng)
    z = X @ theta
    vals = f(z) * z
    est = float(vals.mean())
    if not return_se:
        return est
    se = float(vals.std(ddof=1) / math.sqrt(n_mc)) if n_mc > 1 else float("nan")
    return est, se
