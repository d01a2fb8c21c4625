import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError
from sklearn.model_selection import GridSearchCV, KFold

from truncreg.baseline import LassoCD
from truncreg.distributions import EllipticalDesign, GaussianRadius, one_bit_generate, sample_sparse_signal
from truncreg.estimators import (
    TruncatedL1Ball,
    TruncatedNonIsotropic,
    TruncatedNuclearNorm,
    TruncatedSoftThreshold,
    TruncationConfig,
    robust_direction,
    transform,
)
from truncreg.distributions import Dataset


@pytest.fixture(scope="module")
def data():
    rng = np.random.default_rng(0)
    sig = sample_sparse_signal(20, 3, rng)
    ds = one_bit_generate(sig, EllipticalDesign(20, GaussianRadius()), None, 200, rng)
    return ds.X, ds.y, ds.theta_star


ESTIMATORS = [
    TruncatedSoftThreshold(lam=0.05),
    TruncatedL1Ball(radius=1.5),
    TruncatedNonIsotropic(sigma_half=np.eye(20), lam=0.05),
    TruncatedNonIsotropic(sigma_half=np.eye(20), lam=0.05, penalty="l1"),
    LassoCD(lam=0.05),
]


@pytest.mark.parametrize("est", ESTIMATORS, ids=lambda e: type(e).__name__)
class TestContract:
    def test_clone_round_trip(self, est):
        twin = clone(est)
        assert type(twin) is type(est)
        for k, v in est.get_params().items():
            assert np.array_equal(twin.get_params()[k], v)

    def test_fit_returns_self(self, est, data):
        X, y, _ = data
        est = clone(est)
        assert est.fit(X, y) is est
        assert est.coef_.shape == (20,)
        assert est.predict(X).shape == (200,)
        assert np.isfinite(est.score(X, y))

    def test_not_fitted(self, est, data):
        with pytest.raises(NotFittedError):
            clone(est).predict(data[0])

    def test_rejects_nan(self, est, data):
        X, y, _ = data
        X = X.copy()
        X[3, 2] = np.nan
        with pytest.raises(ValueError):
            clone(est).fit(X, y)

    def test_recovers_direction(self, est, data):
        X, y, theta = data
        coef = clone(est).fit(X, y).coef_
        cos = coef @ theta / (np.linalg.norm(coef) * np.linalg.norm(theta))
        assert cos > 0.8


def test_soft_threshold_matches_closed_form(data):
    X, y, _ = data
    est = TruncatedSoftThreshold(lam=0.1, scale_c=0.7).fit(X, y)
    b = robust_direction(transform(Dataset(X, y)), TruncationConfig(scale_c=0.7))
    np.testing.assert_array_equal(est.direction_, b)
    np.testing.assert_allclose(est.coef_, np.sign(b) * np.maximum(np.abs(b) - 0.05, 0))
    assert est.tau_ == pytest.approx(0.7 * 200 ** 0.25)


def test_tau_override(data):
    X, y, _ = data
    assert TruncatedSoftThreshold(tau=0.3, scale_c=9.0).fit(X, y).tau_ == 0.3


def test_grid_search(data):
    X, y, _ = data
    gs = GridSearchCV(TruncatedSoftThreshold(), {"lam": [0.01, 0.1, 10.0], "scale_c": [0.5, 1.0]},
                      cv=KFold(2))
    gs.fit(X, y)
    assert gs.best_params_["lam"] in (0.01, 0.1)
    assert gs.best_estimator_.coef_.shape == (20,)


def test_nuclear_wrapper():
    rng = np.random.default_rng(1)
    d1, d2 = 4, 5
    theta = np.outer(rng.standard_normal(d1), rng.standard_normal(d2))
    X = rng.standard_normal((400, d1 * d2))
    y = np.sign(X @ theta.ravel())
    est = TruncatedNuclearNorm(shape=(d1, d2), lam=0.2).fit(X, y)
    assert est.coef_matrix_.shape == (d1, d2)
    assert est.result_.rank >= 1
    cos = np.sum(est.coef_matrix_ * theta) / (np.linalg.norm(est.coef_matrix_) * np.linalg.norm(theta))
    assert cos > 0.8
    with pytest.raises(ValueError):
        TruncatedNuclearNorm(shape=(3, 3)).fit(X, y)


def test_nonisotropic_set_params():
    est = TruncatedNonIsotropic(sigma_half=np.eye(3))
    est.set_params(penalty="l1", lam=0.2)
    assert est.get_params()["penalty"] == "l1" and est.lam == 0.2
