import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from sklearn.base import clone

from skewscore import DataError, NumericError, ParameterError
from skewscore.datagen import Dag, bivariate_scm, sample_hsnm, synthesize
from skewscore.mechanisms import Constant, NoiseSpec, Polynomial, SigmoidScale
from skewscore.score import (AnalyticScore, BivariateModelSpec, SlicedScoreMatching,
                             SteinScoreEstimator, TrainingError, analytic_score_bivariate,
                             estimate_score_ssm, estimate_score_stein, hsnm_score,
                             median_heuristic_bandwidth)
from skewscore.score.analytic import (conditional_score_y, hsnm_log_density,
                                      log_density_bivariate, triangular_gaussian_spec)
from skewscore.score.ssm import sliced_score_loss


def _spec(noise="gaussian"):
    ns = NoiseSpec(noise, df=4.0) if noise == "student_t" else NoiseSpec(noise)
    return BivariateModelSpec(NoiseSpec("gaussian", 1.2), ns, Polynomial([0.1, 0.8, -0.4]),
                              SigmoidScale(np.array([1.1]), 0.3))


# -- analytic -----------------------------------------------------------------

@pytest.mark.parametrize("noise", ["gaussian", "student_t", "laplace"])
def test_analytic_score_matches_log_density_gradient(noise, rng):
    spec = _spec(noise)
    P = spec.sample(rng, 200)
    S = analytic_score_bivariate(spec, P)
    h = 1e-6
    for k in range(2):
        E = np.zeros(2)
        E[k] = h
        fd = (log_density_bivariate(spec, P + E) - log_density_bivariate(spec, P - E)) / (2 * h)
        np.testing.assert_allclose(S[:, k], fd, rtol=1e-5, atol=1e-5)


def test_effect_score_equals_conditional_score(rng):
    # the effect coordinate of the joint score needs only p(y | x)
    spec = _spec("student_t")
    P = spec.sample(rng, 500)
    np.testing.assert_allclose(analytic_score_bivariate(spec, P)[:, 1],
                               conditional_score_y(spec, P), rtol=0, atol=1e-10)


@pytest.mark.parametrize("noise", ["gaussian", "laplace", "student_t"])
def test_score_has_zero_mean(noise, rng):
    spec = _spec(noise)
    S = analytic_score_bivariate(spec, spec.sample(rng, 200_000))
    se = S.std(axis=0) / np.sqrt(len(S))
    assert np.all(np.abs(S.mean(axis=0)) < 3 * se)


def test_underflow_is_reported():
    spec = _spec()
    with pytest.raises(NumericError, match="point 1"):
        analytic_score_bivariate(spec, np.array([[0.0, 0.0], [60.0, 0.0]]))


def test_hsnm_score_agrees_with_bivariate_form(rng):
    scm = bivariate_scm("gp_sig", NoiseSpec("laplace"), rng)
    X = synthesize(scm, 300, rng)
    np.testing.assert_allclose(hsnm_score(scm, X),
                               analytic_score_bivariate(BivariateModelSpec.from_scm(scm), X),
                               atol=1e-10)


def test_hsnm_score_matches_density_gradient(rng):
    dag = Dag(np.array([[0, 1, 1, 0], [0, 0, 1, 1], [0, 0, 0, 1], [0, 0, 0, 0]]))
    scm = sample_hsnm(dag, rng, "student_t")
    X = synthesize(scm, 100, rng)
    S = hsnm_score(scm, X)
    h = 1e-6
    for k in range(4):
        E = np.zeros(4)
        E[k] = h
        fd = (hsnm_log_density(scm, X + E) - hsnm_log_density(scm, X - E)) / (2 * h)
        np.testing.assert_allclose(S[:, k], fd, rtol=1e-5, atol=1e-5)


def test_hsnm_score_requires_ancestral_nodes(rng):
    scm = sample_hsnm(Dag.chain(3), rng)
    X = synthesize(scm, 10, rng)
    assert hsnm_score(scm, X, [0, 1]).shape == (10, 2)
    with pytest.raises(ParameterError):
        hsnm_score(scm, X, [1, 2])


def test_triangular_spec_matches_marginalized_density():
    # numerically integrate Z out and compare the x-score
    f, sig = Polynomial([0.0, 0.3, 0.5]), SigmoidScale(np.array([0.8]), -0.2)
    spec = triangular_gaussian_spec(1.5, f, sig, phi=(0.7, 1.2), s0=0.9, s1=1.1)
    z, wz = np.polynomial.hermite_e.hermegauss(80)
    wz = wz / np.sqrt(2 * np.pi)

    def logp(x, y):
        from scipy.stats import norm
        mu = 1.5 * f(np.array([[x]]))[0] + 1.2 * z
        s = 1.1 * sig(np.array([[x]]))[0]
        dens = norm.pdf(x - 0.7 * z, scale=0.9) * norm.pdf(y - mu, scale=s)
        return np.log(np.sum(wz * dens))

    h = 1e-5
    for x, y in [(0.3, 1.0), (-1.0, 0.2), (1.4, 2.5)]:
        fd = [(logp(x + h, y) - logp(x - h, y)) / (2 * h), (logp(x, y + h) - logp(x, y - h)) / (2 * h)]
        np.testing.assert_allclose(analytic_score_bivariate(spec, np.array([[x, y]]))[0], fd, rtol=1e-5)


def test_analytic_estimator_contract(rng):
    scm = sample_hsnm(Dag.chain(3), rng)
    X = synthesize(scm, 50, rng)
    est = AnalyticScore(scm, nodes=[0, 1])
    assert clone(est).get_params()["nodes"] == [0, 1]
    np.testing.assert_allclose(est.fit_transform(X[:, :2]), hsnm_score(scm, X, [0, 1]))
    with pytest.raises(ParameterError):
        AnalyticScore(scm, nodes=[0]).fit(X[:, :2])


# -- Stein --------------------------------------------------------------------

def test_stein_recovers_gaussian_score(rng):
    x = rng.normal(size=(1000, 1))
    G = estimate_score_stein(x)
    assert np.mean((G[:, 0] + x[:, 0]) ** 2) < 0.1


def test_stein_two_dimensional(rng):
    C = np.array([[1.0, 0.5], [0.5, 1.0]])
    X = rng.multivariate_normal([0, 0], C, size=1000)
    G = estimate_score_stein(X)
    true = -X @ np.linalg.inv(C)
    inner = np.all(np.abs(X) < 2, axis=1)
    assert np.mean((G[inner] - true[inner]) ** 2) < 0.1


def test_stein_error_shrinks_with_n():
    def mse(n):
        x = np.random.default_rng(n).normal(size=(n, 1))
        return np.mean((estimate_score_stein(x)[:, 0] + x[:, 0]) ** 2)

    assert mse(2000) < mse(200)


def test_stein_is_deterministic(rng):
    X = rng.normal(size=(200, 3))
    assert np.array_equal(estimate_score_stein(X), estimate_score_stein(X))


def test_stein_parameter_checks(rng):
    X = rng.normal(size=(20, 2))
    with pytest.raises(ParameterError):
        estimate_score_stein(X, ridge=0.0)
    with pytest.raises(ParameterError):
        estimate_score_stein(X, bandwidth=-1.0)
    with pytest.raises(DataError):
        estimate_score_stein(np.array([[np.nan, 1.0], [0.0, 1.0]]))
    assert estimate_score_stein(X, ridge="auto").shape == (20, 2)


def test_median_heuristic(rng):
    assert median_heuristic_bandwidth(np.zeros((5, 2))) == 1.0
    X = rng.normal(size=(3000, 2))
    assert median_heuristic_bandwidth(X) == median_heuristic_bandwidth(X)
    with pytest.raises(ParameterError):
        median_heuristic_bandwidth(np.zeros((1, 2)))


def test_stein_estimator_in_sample_only(rng):
    X = rng.normal(size=(50, 2))
    est = SteinScoreEstimator().fit(X)
    np.testing.assert_array_equal(est.transform(X), est.scores_)
    with pytest.raises(ParameterError):
        est.transform(X + 1)


@given(st.floats(0.2, 5.0))
def test_stein_scales_inversely_with_data(c):
    # scores of c X are scores of X divided by c
    X = np.random.default_rng(0).normal(size=(150, 2))
    np.testing.assert_allclose(estimate_score_stein(c * X, ridge=0.05),
                               estimate_score_stein(X, ridge=0.05) / c, rtol=1e-6, atol=1e-9)


# -- sliced score matching -----------------------------------------------------

def test_ssm_fits_gaussian(rng):
    x = rng.normal(size=(2000, 1))
    est = SlicedScoreMatching(hidden_sizes=(32, 32), epochs=30, random_state=0).fit(x)
    assert np.mean((est.transform(x)[:, 0] + x[:, 0]) ** 2) < 0.1
    assert len(est.loss_history_) == 30
    assert est.loss_history_[-1] < est.loss_history_[0]


def test_ssm_reproducible(rng):
    X = rng.normal(size=(256, 2))
    a = estimate_score_ssm(X, 3, hidden_sizes=(16,), epochs=2)
    b = estimate_score_ssm(X, 3, hidden_sizes=(16,), epochs=2)
    np.testing.assert_array_equal(a, b)


def test_ssm_finite_difference_objective_matches_autograd():
    import torch

    torch.manual_seed(0)
    from skewscore.score.ssm import _build_mlp

    model = _build_mlp(3, (16,), "tanh").double()
    x = torch.randn(64, 3, dtype=torch.float64)
    v = torch.randint(0, 2, (2, 64, 3)).double() * 2 - 1
    a = sliced_score_loss(model, x, v, "autograd")
    b = sliced_score_loss(model, x, v, "finite_difference", 1e-5)
    assert abs(float(a.detach()) - float(b.detach())) < 1e-6


def test_ssm_reports_divergence(rng):
    X = rng.normal(size=(256, 2))
    with pytest.raises(TrainingError) as info:
        SlicedScoreMatching(hidden_sizes=(16,), epochs=5, learning_rate=1e12,
                            activation="softplus", random_state=0).fit(X * 1e3)
    assert info.value.last_good_epoch >= 0


def test_ssm_parameter_checks(rng):
    X = rng.normal(size=(64, 2))
    with pytest.raises(ParameterError):
        SlicedScoreMatching(batch_size=128).fit(X)
    with pytest.raises(ParameterError):
        SlicedScoreMatching(activation="relu", batch_size=8).fit(X)
    with pytest.raises(ParameterError):
        SlicedScoreMatching(jvp="exact", batch_size=8).fit(X)
