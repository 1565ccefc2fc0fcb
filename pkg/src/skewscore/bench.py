"""Seeded simulation, discovery and reporting for benchmark sweeps."""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .config import RunConfig
from .datagen import (Dag, bivariate_scm, confounded_scm, noise_for_node, sample_er_dag,
                      sample_hsnm, synthesize, triangular_scm)
from .estimator import SkewScore
from .metrics import order_divergence, shd
from .score.ssm import SlicedScoreMatching
from .score.stein import SteinScoreEstimator


@dataclass
class Simulation:
    X: np.ndarray
    dag: Dag
    confounded_pairs: list = field(default_factory=list)


def _swap(X, dag, pairs, rng):
    # random column order so the cause is not always the first column
    if rng.random() < 0.5:
        return X, dag, pairs
    return X[:, ::-1].copy(), Dag(dag.adj[::-1, ::-1]), [(1 - b, 1 - a) for a, b in pairs]


def simulate(config: RunConfig, seed: int) -> Simulation:
    """Draw one dataset of ``config.setting`` from ``seed``."""
    rng = np.random.default_rng(seed)
    c = config
    if c.setting == "bivariate":
        scm = bivariate_scm(c.formulation, noise_for_node(c.noise, rng, gumbel_centered=c.gumbel_centered), rng)
        X = synthesize(scm, c.n, rng)
        return Simulation(*_swap(X, scm.graph, [], rng))
    if c.setting == "latent-triangular":
        q0 = noise_for_node(c.noise, rng, gumbel_centered=c.gumbel_centered)
        q1 = noise_for_node(c.noise, rng, gumbel_centered=c.gumbel_centered)
        scm = triangular_scm(c.lam, c.formulation, q0, q1, rng)
        X = synthesize(scm, c.n, rng)
        return Simulation(*_swap(X, scm.graph, scm.latent.confounded_pairs(), rng))
    avg = min(c.edges * c.d, c.d * (c.d - 1) / 2)
    if c.setting == "multivariate":
        dag = sample_er_dag(c.d, avg, rng)
        scm = sample_hsnm(dag, rng, c.noise, gumbel_centered=c.gumbel_centered)
        return Simulation(synthesize(scm, c.n, rng), dag)
    scm = confounded_scm(c.d, avg, c.rho, rng, c.noise)
    pairs = scm.latent.confounded_pairs() if scm.latent else []
    return Simulation(synthesize(scm, c.n, rng), scm.graph, pairs)


def score_estimator_for(config: RunConfig, seed: int):
    if config.estimator == "ssm":
        return SlicedScoreMatching(epochs=config.ssm_epochs, random_state=seed)
    return SteinScoreEstimator(bandwidth_factor=config.stein_bandwidth_factor, ridge=config.stein_ridge)


def discoverer_for(config: RunConfig, seed: int) -> SkewScore:
    return SkewScore(score_estimator_for(config, seed), psi=config.psi, alpha=config.alpha,
                     prune=config.prune, subsample_cap=config.subsample_cap,
                     n_boot=config.n_boot, random_state=seed)


RUN_FIELDS = ("seed", "setting", "formulation", "noise", "estimator", "n", "d", "status",
              "error", "d_top", "shd", "correct_direction", "symmetry_violation",
              "true_edges", "predicted_edges", "order")


def run_one(config: RunConfig, seed: int) -> tuple[dict, float]:
    """Simulate and discover for one seed; returns ``(row, wall_seconds)``.

    Failures are caught and reported in the row rather than raised.
    """
    t0 = time.perf_counter()
    row = {k: None for k in RUN_FIELDS}
    row.update(seed=seed, setting=config.setting, formulation=config.formulation,
               noise=config.noise, estimator=config.estimator, n=config.n, d=config.d)
    try:
        sim = simulate(config, seed)
        model = discoverer_for(config, seed).fit(sim.X)
        row.update(
            status="ok",
            d_top=order_divergence(model.order_, sim.dag),
            shd=shd(model.adjacency_, sim.dag) if config.prune else None,
            symmetry_violation=int(model.diagnostics_.violation),
            true_edges=int(sim.dag.n_edges),
            predicted_edges=int(np.sum(model.adjacency_)),
            order=" ".join(map(str, model.order_)),
        )
        if config.d == 2:
            row["correct_direction"] = int(row["d_top"] == 0)
    except Exception as exc:  # recorded per run, aggregation continues
        row.update(status="failed", error=f"{type(exc).__name__}: {exc}")
    return row, time.perf_counter() - t0


def _mean_std(values):
    v = np.asarray([x for x in values if x is not None], dtype=float)
    if v.size == 0:
        return None, None
    return float(v.mean()), float(v.std(ddof=1)) if v.size > 1 else 0.0


def aggregate(rows) -> dict:
    ok = [r for r in rows if r["status"] == "ok"]
    out = {"runs": len(rows), "succeeded": len(ok), "failed": len(rows) - len(ok)}
    for key in ("d_top", "shd", "correct_direction", "symmetry_violation"):
        m, s = _mean_std(r[key] for r in ok)
        out[f"{key}_mean"] = m
        out[f"{key}_std"] = s
    if ok and ok[0]["correct_direction"] is not None:
        out["accuracy"] = out["correct_direction_mean"]
    return out


@dataclass
class BenchReport:
    config: RunConfig
    rows: list
    seconds: list

    @property
    def summary(self) -> dict:
        return aggregate(self.rows)

    def runs_csv(self) -> str:
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=RUN_FIELDS, lineterminator="\n")
        w.writeheader()
        for r in self.rows:
            w.writerow({k: "" if r[k] is None else r[k] for k in RUN_FIELDS})
        return buf.getvalue()

    def aggregate_csv(self) -> str:
        s = self.summary
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["setting", "estimator", "n", "d", *s])
        w.writerow([self.config.setting, self.config.estimator, self.config.n, self.config.d,
                    *("" if v is None else v for v in s.values())])
        return buf.getvalue()

    def write(self, directory) -> list[Path]:
        """Write the report files; wall times go to a separate file."""
        d = Path(directory)
        d.mkdir(parents=True, exist_ok=True)
        files = {
            "config.json": self.config.to_json(),
            "runs.csv": self.runs_csv(),
            "runs.json": json.dumps(self.rows, indent=2, sort_keys=True) + "\n",
            "aggregate.csv": self.aggregate_csv(),
            "aggregate.json": json.dumps(self.summary, indent=2, sort_keys=True) + "\n",
            "timings.csv": "seed,wall_seconds\n" + "".join(
                f"{r['seed']},{t:.3f}\n" for r, t in zip(self.rows, self.seconds)),
        }
        paths = []
        for name, text in files.items():
            (d / name).write_text(text)
            paths.append(d / name)
        return paths


def run_benchmark(config: RunConfig) -> BenchReport:
    """Run every seed of ``config`` (in parallel when ``n_jobs > 1``)."""
    if config.n_jobs > 1:
        from joblib import Parallel, delayed

        results = Parallel(n_jobs=config.n_jobs)(delayed(run_one)(config, s) for s in config.seeds)
    else:
        results = [run_one(config, s) for s in config.seeds]
    rows = [r for r, _ in results]
    return BenchReport(config, rows, [t for _, t in results])
