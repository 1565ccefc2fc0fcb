"""Acceptance suite: one test per criterion, each printing a pass/fail line.

Run alone with ``pytest tests/test_acceptance.py -s``; the lines are also
collected into the "acceptance criteria" section of the terminal summary.
"""

import itertools
import time

import numpy as np
import pytest

from skewscore import kci_test, prune
from skewscore.bench import run_benchmark
from skewscore.config import RunConfig
from skewscore.datagen import Dag, bivariate_scm, sample_er_dag, sample_hsnm, synthesize
from skewscore.mechanisms import (ClippedAbs, Constant, NoiseSpec, Polynomial,
                                  sample_invertible_sigmoid)
from skewscore.metrics import order_divergence, shd
from skewscore.oracles import (assumption1_lhs, confounded_anm_skew_x, mc_skew_pair,
                               mc_skewscore_gamma, mc_skewscore_gumbel,
                               quadratic_confounded_spec, skewscore_gamma, skewscore_gumbel)
from skewscore.ordering import OddTestFunction
from skewscore.score import BivariateModelSpec, analytic_score_bivariate, hsnm_score
from skewscore.score.analytic import (conditional_score_y, log_density_bivariate,
                                      triangular_gaussian_spec)

pytestmark = pytest.mark.slow


def report(log, number, passed, detail, seconds):
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {number:>2}: {detail} ({seconds:.1f} s)"
    print(line)
    log.append(line)
    return passed


# 1 ---------------------------------------------------------------------------

def test_criterion_01_oracle_exactness(acceptance_log):
    t0 = time.perf_counter()
    exact = (skewscore_gumbel(1.0) == 2.0 and skewscore_gumbel(2.0) == 0.25
             and skewscore_gamma(5.0, 1.0) == 2.0 / 3.0)
    mc = {
        "gumbel(1)": (mc_skewscore_gumbel(1.0, 10**6, 0, n_boot=10)[0], 2.0),
        "gumbel(2)": (mc_skewscore_gumbel(2.0, 10**6, 0, n_boot=10)[0], 0.25),
        "gamma(5,1)": (mc_skewscore_gamma(5.0, 1.0, 10**6, 0, n_boot=10)[0], 2.0 / 3.0),
        "gamma(6,1)": (mc_skewscore_gamma(6.0, 1.0, 10**6, 0, n_boot=10)[0], 1.0 / 3.0),
    }
    rel = {k: abs(v - e) / e for k, (v, e) in mc.items()}
    dt = time.perf_counter() - t0
    ok = exact and max(rel.values()) <= 0.05 and dt < 10
    detail = "closed forms exact=%s; MC rel. errors %s" % (
        exact, ", ".join(f"{k} {v:.3f}" for k, v in rel.items()))
    assert report(acceptance_log, 1, ok, detail, dt)


# 2 ---------------------------------------------------------------------------

def test_criterion_02_symmetry_null(acceptance_log):
    t0 = time.perf_counter()
    noises = {"gaussian": NoiseSpec("gaussian"), "laplace": NoiseSpec("laplace"),
              "t5": NoiseSpec("student_t", df=5.0)}
    results = []
    for (nname, noise), form in itertools.product(noises.items(), ("gp_sig", "sig_abs")):
        spec = BivariateModelSpec.from_scm(bivariate_scm(form, noise, 2024))
        pair = mc_skew_pair(spec, 10**6, 1, n_boot=100)
        results.append((f"{nname}/{form}", pair.skew_y / pair.se_y))
    dt = time.perf_counter() - t0
    ok = all(z < 3 for _, z in results) and dt < 120
    detail = "Skew_y / SE: " + ", ".join(f"{k} {z:.2f}" for k, z in results)
    assert report(acceptance_log, 2, ok, detail, dt)


# 3 ---------------------------------------------------------------------------

def test_criterion_03_cause_side_skew(acceptance_log):
    t0 = time.perf_counter()
    quad8 = confounded_anm_skew_x(Polynomial([0, 0, 1.0]).derivative)[0]
    pair = mc_skew_pair(quadratic_confounded_spec(), 10**6, 0, n_boot=100)
    half = confounded_anm_skew_x(Polynomial([0.0, 0.5, 1.0]).derivative)[0]
    parts = {
        "quadrature == 8 +/- 1e-6": abs(quad8 - 8.0) <= 1e-6,
        "MC within 5% of 8": abs(pair.skew_x - 8.0) <= 0.4,
        "b=1/2 -> 0 within 1e-6": abs(half) <= 1e-6,
    }
    dt = time.perf_counter() - t0
    detail = (f"quadrature {quad8:.9f}, MC {pair.skew_x:.3f} +/- {pair.se_x:.3f}, b=1/2 gives {half:.6f}; "
              + "; ".join(f"{k}: {'ok' if v else 'no'}" for k, v in parts.items()))
    assert report(acceptance_log, 3, all(parts.values()), detail, dt)


# 4 ---------------------------------------------------------------------------

def test_criterion_04_assumption1_discriminator(acceptance_log):
    t0 = time.perf_counter()
    gl = BivariateModelSpec(NoiseSpec(), NoiseSpec(), Polynomial([0.4, 1.5]), Constant(1.0))
    null = assumption1_lhs(gl)
    square = assumption1_lhs(quadratic_confounded_spec())
    dt = time.perf_counter() - t0
    ok = abs(null) < 1e-4 and abs(square) > 1e-3
    detail = f"Gaussian linear |LHS| = {abs(null):.2e}; x^2 confounded family |LHS| = {abs(square):.6f}"
    assert report(acceptance_log, 4, ok, detail, dt)


# 5 ---------------------------------------------------------------------------

def test_criterion_05_bivariate_accuracy(acceptance_log):
    t0 = time.perf_counter()
    cfg = RunConfig(setting="bivariate", formulation="gp_sig", noise="gaussian", n=2000,
                    estimator="stein", prune=False, seeds=list(range(20)))
    summary = run_benchmark(cfg).summary
    dt = time.perf_counter() - t0
    ok = summary["failed"] == 0 and summary["accuracy"] >= 0.85 and dt < 900
    detail = f"GP-sig Gaussian n=2000, 20 seeds: accuracy {summary['accuracy']:.2f} (need >= 0.85)"
    assert report(acceptance_log, 5, ok, detail, dt)


# 6 ---------------------------------------------------------------------------

def test_criterion_06_latent_triangular(acceptance_log):
    t0 = time.perf_counter()
    cfg = RunConfig(setting="latent-triangular", formulation="sig_abs", noise="gaussian", lam=1.0,
                    n=2000, estimator="stein", prune=False, seeds=list(range(20)))
    summary = run_benchmark(cfg).summary
    lams = (1.0, 2.0, 4.0, 8.0)
    margins = []
    for seed in range(5):
        f = sample_invertible_sigmoid(np.random.default_rng(seed))
        margins.append([mc_skew_pair(triangular_gaussian_spec(lam, f, ClippedAbs(0.1)),
                                     200_000, 100 + seed, n_boot=20).margin for lam in lams])
    med = np.median(margins, axis=0)
    monotone = bool(np.all(np.diff(med) >= 0))
    dt = time.perf_counter() - t0
    ok = summary["failed"] == 0 and summary["accuracy"] >= 0.85 and monotone
    detail = (f"Sig-abs lam=1 n=2000, 20 seeds: accuracy {summary['accuracy']:.2f} (need >= 0.85); "
              f"median margins {', '.join(f'{m:.3g}' for m in med)} monotone={monotone}")
    assert report(acceptance_log, 6, ok, detail, dt)


# 7 ---------------------------------------------------------------------------

def test_criterion_07_multivariate_ordering(acceptance_log):
    t0 = time.perf_counter()
    cfg = RunConfig(setting="multivariate", d=10, edges=1.0, n=1000, estimator="stein",
                    prune=False, seeds=list(range(5)))
    report_ = run_benchmark(cfg)
    summary = report_.summary
    dt = time.perf_counter() - t0
    ok = summary["failed"] == 0 and summary["d_top_mean"] <= 3 and dt < 1800
    per_seed = [r["d_top"] for r in report_.rows]
    detail = f"d=10 ER1 n=1000, 5 seeds: D_top {per_seed}, mean {summary['d_top_mean']:.2f} (need <= 3)"
    assert report(acceptance_log, 7, ok, detail, dt)


# 8 ---------------------------------------------------------------------------

def test_criterion_08_pruning_envelope(acceptance_log):
    t0 = time.perf_counter()
    shds = []
    for seed in range(10):
        rng = np.random.default_rng(seed)
        scm = sample_hsnm(Dag.chain(5), rng)
        X = synthesize(scm, 2000, rng)
        shds.append(shd(prune(X, list(range(5)), rng=seed).dag, scm.graph))
    frac = np.mean(np.array(shds) <= 2)
    rejections = 0
    for rep in range(200):
        x, y = np.random.default_rng(10_000 + rep).normal(size=(2, 200))
        rejections += kci_test(x, y).p_value < 0.05
    rate = rejections / 200
    dt = time.perf_counter() - t0
    ok = frac >= 0.8 and 0.01 <= rate <= 0.12
    detail = f"chain SHD {shds} (share <= 2: {frac:.2f}); KCI null rejection rate {rate:.3f}"
    assert report(acceptance_log, 8, ok, detail, dt)


# 9 ---------------------------------------------------------------------------

def _conditional_score_identity(rng):
    spec = BivariateModelSpec(NoiseSpec("gaussian", 1.3), NoiseSpec("student_t", df=4.0),
                              Polynomial([0, 0.7, -0.3]), Constant(0.8))
    P = spec.sample(rng, 1000)
    return np.max(np.abs(analytic_score_bivariate(spec, P)[:, 1] - conditional_score_y(spec, P))) < 1e-10


def _score_mean_zero(rng):
    scm = bivariate_scm("gp_sig", NoiseSpec("laplace"), rng)
    S = hsnm_score(scm, synthesize(scm, 200_000, rng))
    return bool(np.all(np.abs(S.mean(axis=0)) < 3 * S.std(axis=0) / np.sqrt(len(S))))


def _gradient(rng):
    scm = bivariate_scm("gp_sig", NoiseSpec("student_t", df=3.0), rng)
    spec = BivariateModelSpec.from_scm(scm)
    P = spec.sample(rng, 100)
    S = analytic_score_bivariate(spec, P)
    h = 1e-5
    worst = 0.0
    for k in range(2):
        E = np.zeros(2)
        E[k] = h
        fd = (log_density_bivariate(spec, P + E) - log_density_bivariate(spec, P - E)) / (2 * h)
        worst = max(worst, np.max(np.abs(S[:, k] - fd) / np.maximum(np.abs(fd), 1.0)))
    return worst < 1e-5


def _d_top(rng):
    for d in range(1, 6):
        for seed in range(20):
            g = sample_er_dag(d, min(d, d * (d - 1) / 2), int(rng.integers(2**31)))
            for order in itertools.permutations(range(d)):
                pos = {v: k for k, v in enumerate(order)}
                brute = sum(1 for i, j in zip(*np.nonzero(g.adj)) if pos[i] > pos[j])
                if brute != order_divergence(order, g):
                    return False
    return True


def _psi_odd(rng):
    x = rng.normal(scale=10, size=10_000)
    return all(np.array_equal(OddTestFunction(k)(-x), -OddTestFunction(k)(x))
               for k in ("cube", "signed_square", "tanh"))


def test_criterion_09_invariant_suites(acceptance_log):
    t0 = time.perf_counter()
    rng = np.random.default_rng(9)
    suites = [("conditional_score", _conditional_score_identity),
              ("score_mean_zero", _score_mean_zero), ("gradient", _gradient),
              ("d_top", _d_top), ("psi_odd", _psi_odd)]
    checks = {name: fn(rng) for name, fn in suites}
    dt = time.perf_counter() - t0
    ok = all(checks.values()) and dt < 300
    detail = ", ".join(f"{k} {'ok' if v else 'FAILED'}" for k, v in checks.items())
    assert report(acceptance_log, 9, ok, detail, dt)


# 10 --------------------------------------------------------------------------

def test_criterion_10_determinism(acceptance_log, tmp_path):
    t0 = time.perf_counter()
    cfg = RunConfig(setting="multivariate", d=4, n=400, seeds=[3, 4, 5], output_dir=str(tmp_path))
    blobs = []
    for _ in range(2):
        paths = run_benchmark(cfg).write(tmp_path)
        blobs.append({p.name: p.read_bytes() for p in paths if p.name != "timings.csv"})
    dt = time.perf_counter() - t0
    ok = blobs[0] == blobs[1]
    detail = f"{len(blobs[0])} report files byte-identical across two executions: {ok}"
    assert report(acceptance_log, 10, ok, detail, dt)


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v", "-s"]))
