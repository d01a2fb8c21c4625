"""Monte-Carlo harness for the 1-bit compressed-sensing comparison.

Each trial draws a sparse signal and a heavy-tailed design, generates 1-bit
responses, tunes both the truncated soft-threshold estimator and the Lasso
by K-fold cross-validation, and records the scale-free relative error.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from .baseline import LassoConfig, lasso_fit
from .distributions import (
    Dataset,
    EllipticalDesign,
    GaussianRadius,
    ParetoDifference,
    one_bit_generate,
    sample_sparse_signal,
)
from .estimators import (
    TruncationConfig,
    robust_direction,
    soft_threshold_estimate,
    transform,
    truncated_loss,
)

logger = logging.getLogger(__name__)

METHODS = ("robust", "lasso")
HIST_BINS = 30
HIST_RANGE = (0.0, 2.0)


def _default_grid_c():
    # heavy-tailed radii make |q| small for most rows, so useful truncation
    # levels sit well below 1
    return [3e-4, 1e-3, 3e-3, 0.01, 0.03, 0.1, 0.3, 1.0]


def _default_grid_lambda():
    return [float(v) for v in np.logspace(-5, 0, 41)]


def _default_grid_lambda_lasso():
    return [float(v) for v in np.logspace(-3, 0, 25)]


@dataclass
class ExperimentSpec:
    d: int = 512
    m: int = 128
    s: int = 5
    q_pareto: float = 2.1
    snr_db: Optional[float] = None
    n_trials: int = 200
    seed: int = 0
    kappa: float = 1.0
    cv_folds: int = 2
    grid_c: list = field(default_factory=_default_grid_c)
    grid_lambda: list = field(default_factory=_default_grid_lambda)
    grid_lambda_lasso: list = field(default_factory=_default_grid_lambda_lasso)
    design_kind: str = "pareto-sphere"
    cv_criterion: str = "oracle-relative-error"
    lasso_tol: float = 1e-8

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError("n_trials must be >= 1")
        if self.cv_folds < 2:
            raise ValueError("cv_folds must be >= 2")
        if not 1 <= self.s <= self.d:
            raise ValueError(f"need 1 <= s <= d, got s={self.s}, d={self.d}")
        for name in ("grid_c", "grid_lambda", "grid_lambda_lasso"):
            grid = getattr(self, name)
            if len(grid) == 0:
                raise ValueError(f"{name} must be nonempty")
            if any(not v > 0 for v in grid):
                raise ValueError(f"{name} must contain positive values")
            setattr(self, name, [float(v) for v in grid])
        if self.design_kind not in ("pareto-sphere", "gaussian"):
            raise ValueError(f"unknown design kind {self.design_kind!r}")
        if self.cv_criterion not in ("oracle-relative-error", "validation-loss"):
            raise ValueError(f"unknown cv criterion {self.cv_criterion!r}")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")

    def design(self) -> EllipticalDesign:
        if self.design_kind == "gaussian":
            return EllipticalDesign(self.d, GaussianRadius())
        return EllipticalDesign(self.d, ParetoDifference(self.q_pareto))


@dataclass
class TrialResult:
    trial: int
    rel_error: dict
    c: Optional[float]
    lam: dict


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    trials: list
    wall_time: float = 0.0

    def errors(self, method: str) -> np.ndarray:
        return np.array([t.rel_error[method] for t in self.trials])

    def summary(self) -> dict:
        out = {}
        for method in METHODS:
            e = self.errors(method)
            q25, q50, q75 = np.percentile(e, [25, 50, 75])
            out[method] = {
                "median": float(q50),
                "mean": float(e.mean()),
                "iqr": float(q75 - q25),
                "q25": float(q25),
                "q75": float(q75),
            }
        return out

    def histogram(self):
        edges = np.linspace(*HIST_RANGE, HIST_BINS + 1)
        counts = {m: np.histogram(self.errors(m), bins=edges)[0] for m in METHODS}
        return edges, counts

    def to_dict(self, include_timing: bool = False) -> dict:
        edges, counts = self.histogram()
        out = {
            "spec": asdict(self.spec),
            "summary": self.summary(),
            "trials": [
                {
                    "trial": t.trial,
                    "rel_error": t.rel_error,
                    "c": t.c,
                    "lambda": t.lam,
                }
                for t in self.trials
            ],
            "histogram": {
                "edges": [float(v) for v in edges],
                "counts": {m: [int(v) for v in c] for m, c in counts.items()},
            },
        }
        if include_timing:
            out["wall_time"] = self.wall_time
        return out


def relative_error(theta_hat, theta_star) -> float:
    """``| theta_hat/|theta_hat| - theta*/|theta*| |_2``, with 0/|0| read as 0."""
    theta_hat = np.ravel(np.asarray(theta_hat, dtype=float))
    theta_star = np.ravel(np.asarray(theta_star, dtype=float))
    ns = np.linalg.norm(theta_star)
    if ns == 0:
        raise ValueError("theta_star must be nonzero")
    nh = np.linalg.norm(theta_hat)
    u_hat = theta_hat / nh if nh > 0 else np.zeros_like(theta_hat)
    return float(np.linalg.norm(u_hat - theta_star / ns))


# -- fitting helpers ------------------------------------------------------------

def fit_robust(dataset: Dataset, c: float, lam: float, kappa: float):
    config = TruncationConfig(kappa=kappa, scale_c=c)
    b = robust_direction(transform(dataset), config)
    return soft_threshold_estimate(b, lam).theta_hat


def fit_lasso(dataset: Dataset, lam: float, tol: float = 1e-8, theta0=None):
    root_m = math.sqrt(dataset.m)
    cfg = LassoConfig(lam=lam, tol=tol)
    return lasso_fit(dataset.X / root_m, dataset.y / root_m, cfg, theta0=theta0).theta_hat


def cross_validate(dataset: Dataset, spec: ExperimentSpec, method: str, rng) -> dict:
    """Pick tuning parameters by ``spec.cv_folds``-fold cross-validation.

    Returns ``{"c", "lambda", "score"}`` (``c`` is None for the Lasso).  Scores
    are fold means; ties go to the smaller lambda, then the smaller c.
    """
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}")
    lam_grid = sorted(spec.grid_lambda if method == "robust" else spec.grid_lambda_lasso)
    c_grid = sorted(spec.grid_c) if method == "robust" else [None]
    if not lam_grid or not c_grid:
        raise ValueError("empty tuning grid")
    if len(lam_grid) == 1 and len(c_grid) == 1:
        return {"c": c_grid[0], "lambda": lam_grid[0], "score": float("nan")}
    if dataset.m < 2 * spec.cv_folds:
        raise ValueError(f"need at least {2 * spec.cv_folds} samples for cross-validation")
    if spec.cv_criterion == "oracle-relative-error" and dataset.theta_star is None:
        raise ValueError("oracle-relative-error criterion needs theta_star")

    perm = rng.permutation(dataset.m)
    folds = np.array_split(perm, spec.cv_folds)
    scores = np.zeros((len(lam_grid), len(c_grid)))
    for k, test_idx in enumerate(folds):
        train_idx = np.concatenate([f for j, f in enumerate(folds) if j != k])
        train, test = dataset.subset(train_idx), dataset.subset(test_idx)
        test_data = transform(test) if spec.cv_criterion == "validation-loss" else None
        score_cfg = TruncationConfig(kappa=spec.kappa)

        def score(theta):
            if test_data is None:
                return relative_error(theta, dataset.theta_star)
            return truncated_loss(theta, test_data, score_cfg)

        if method == "robust":
            train_data = transform(train)
            for j, c in enumerate(c_grid):
                b = robust_direction(train_data, TruncationConfig(kappa=spec.kappa, scale_c=c))
                for i, lam in enumerate(lam_grid):
                    scores[i, j] += score(soft_threshold_estimate(b, lam).theta_hat)
        else:
            # warm start down the lambda path
            theta = None
            for i in reversed(range(len(lam_grid))):
                theta = fit_lasso(train, lam_grid[i], spec.lasso_tol, theta0=theta)
                scores[i, 0] += score(theta)
    scores /= len(folds)
    # argmin scans lambda-major, so the first minimum has the smallest lambda then c
    i, j = np.unravel_index(np.argmin(scores), scores.shape)
    return {"c": c_grid[j], "lambda": lam_grid[i], "score": float(scores[i, j])}


def run_trial(spec: ExperimentSpec, trial: int) -> TrialResult:
    rng = np.random.default_rng([spec.seed, trial])
    signal = sample_sparse_signal(spec.d, spec.s, rng)
    data = one_bit_generate(signal, spec.design(), spec.snr_db, spec.m, rng, noise_q=spec.q_pareto)
    theta_star = data.theta_star

    robust_cv = cross_validate(data, spec, "robust", rng)
    theta_robust = fit_robust(data, robust_cv["c"], robust_cv["lambda"], spec.kappa)
    lasso_cv = cross_validate(data, spec, "lasso", rng)
    theta_lasso = fit_lasso(data, lasso_cv["lambda"], spec.lasso_tol)

    return TrialResult(
        trial=trial,
        rel_error={
            "robust": relative_error(theta_robust, theta_star),
            "lasso": relative_error(theta_lasso, theta_star),
        },
        c=robust_cv["c"],
        lam={"robust": robust_cv["lambda"], "lasso": lasso_cv["lambda"]},
    )


def _run_trial_checked(spec, trial):
    try:
        return run_trial(spec, trial)
    except Exception as exc:
        raise RuntimeError(f"trial {trial} failed: {exc}") from exc


def run_experiment(spec: ExperimentSpec, n_jobs: int = 1) -> ExperimentReport:
    """Run all trials; trial ``i`` draws from the stream seeded by ``(seed, i)``.

    Any failing trial aborts the run with its index.
    """
    start = time.perf_counter()
    indices = range(spec.n_trials)
    if n_jobs == 1:
        trials = []
        for i in indices:
            trials.append(_run_trial_checked(spec, i))
            logger.debug("trial %d: %s", i, trials[-1].rel_error)
    else:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            trials = list(pool.map(_run_trial_checked, [spec] * spec.n_trials, indices))
    trials.sort(key=lambda t: t.trial)
    return ExperimentReport(spec=spec, trials=trials, wall_time=time.perf_counter() - start)


# -- import / export --------------------------------------------------------------

class DatasetParseError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


def export_report(report: ExperimentReport, fmt: str = "json", include_timing: bool = False):
    """Serialise a report.

    ``fmt="json"`` returns the JSON text.  ``fmt="csv"`` returns a pair
    ``(trials_csv, histogram_csv)``.
    """
    if fmt == "json":
        return json.dumps(report.to_dict(include_timing), indent=2, sort_keys=True) + "\n"
    if fmt != "csv":
        raise ValueError(f"unknown format {fmt!r}")
    rows = io.StringIO()
    w = csv.writer(rows, lineterminator="\n")
    w.writerow(["trial", "method", "rel_error", "c", "lambda"])
    for t in report.trials:
        for method in METHODS:
            c = "" if method == "lasso" else repr(t.c)
            w.writerow([t.trial, method, repr(t.rel_error[method]), c, repr(t.lam[method])])
    return rows.getvalue(), histogram_csv(report)


def histogram_csv(report: ExperimentReport) -> str:
    edges, counts = report.histogram()
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["bin_lo", "bin_hi", "count_robust", "count_lasso"])
    for k in range(len(edges) - 1):
        w.writerow([repr(float(edges[k])), repr(float(edges[k + 1])),
                    int(counts["robust"][k]), int(counts["lasso"][k])])
    return out.getvalue()


def export_dataset(dataset: Dataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["y"] + [f"x{k + 1}" for k in range(dataset.d)])
        for yi, xi in zip(dataset.y, dataset.X):
            w.writerow([repr(float(yi))] + [repr(float(v)) for v in xi])


def _parse_float(text: str, line: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DatasetParseError(line, f"not a number: {text!r}") from None
    if not math.isfinite(v):
        raise DatasetParseError(line, f"non-finite value {text!r}")
    return v


def parse_dataset(lines: Sequence[str]) -> Dataset:
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise DatasetParseError(1, "empty file, expected header 'y,x1,...,xd'") from None
    header = [h.strip() for h in header]
    d = len(header) - 1
    if d < 1 or header != ["y"] + [f"x{k + 1}" for k in range(d)]:
        raise DatasetParseError(1, "header must be 'y,x1,...,xd'")
    ys, xs = [], []
    for row in reader:
        line = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != d + 1:
            raise DatasetParseError(line, f"expected {d + 1} fields, got {len(row)}")
        vals = [_parse_float(c.strip(), line) for c in row]
        ys.append(vals[0])
        xs.append(vals[1:])
    if not ys:
        raise DatasetParseError(reader.line_num + 1, "no samples")
    return Dataset(np.array(xs, dtype=float), np.array(ys, dtype=float))


def import_dataset(path) -> Dataset:
    with open(path, encoding="utf-8", newline="") as fh:
        return parse_dataset(fh.read().splitlines())
