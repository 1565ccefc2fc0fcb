"""Random DAGs, heteroscedastic symmetric-noise SCMs and dataset synthesis.

Every generator takes an explicit ``numpy.random.Generator`` and draws from it
in a fixed order, so a seed fully determines the output.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ._validation import ParameterError, check_rng
from .mechanisms import (
    ClippedAbs,
    Constant,
    NoiseSpec,
    Polynomial,
    Scaled,
    Zero,
    sample_gp_function,
    sample_invertible_sigmoid,
    sample_sigmoid_scale,
)

FORMULATIONS = ("gp_sig", "sig_abs")


@dataclass(frozen=True)
class Dag:
    """Directed acyclic graph; ``adj[i, j] == 1`` encodes the edge i -> j."""

    adj: np.ndarray

    def __post_init__(self):
        adj = np.asarray(self.adj, dtype=np.int64)
        if adj.ndim != 2 or adj.shape[0] != adj.shape[1]:
            raise ParameterError("adjacency must be a square matrix")
        if not np.isin(adj, (0, 1)).all():
            raise ParameterError("adjacency must be binary")
        if np.any(np.diag(adj)):
            raise ParameterError("adjacency has self loops")
        object.__setattr__(self, "adj", adj)
        if not is_acyclic(adj):
            raise ParameterError("adjacency contains a directed cycle")

    @property
    def d(self) -> int:
        return self.adj.shape[0]

    @property
    def n_edges(self) -> int:
        return int(self.adj.sum())

    def parents(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adj[:, i])

    def children(self, i: int) -> np.ndarray:
        return np.flatnonzero(self.adj[i])

    def topological_order(self) -> list[int]:
        return topological_sort(self.adj)

    @classmethod
    def empty(cls, d: int) -> "Dag":
        return cls(np.zeros((d, d), dtype=np.int64))

    @classmethod
    def chain(cls, d: int) -> "Dag":
        adj = np.zeros((d, d), dtype=np.int64)
        adj[np.arange(d - 1), np.arange(1, d)] = 1
        return cls(adj)


def topological_sort(adj) -> list[int]:
    """Kahn's algorithm, smallest available index first (deterministic)."""
    adj = np.asarray(adj)
    indeg = adj.sum(axis=0).astype(int)
    ready = sorted(np.flatnonzero(indeg == 0).tolist())
    order = []
    while ready:
        i = ready.pop(0)
        order.append(i)
        for j in np.flatnonzero(adj[i]):
            indeg[j] -= 1
            if indeg[j] == 0:
                ready.append(int(j))
                ready.sort()
    if len(order) != adj.shape[0]:
        raise ParameterError("adjacency contains a directed cycle")
    return order


def is_acyclic(adj) -> bool:
    try:
        topological_sort(adj)
    except ParameterError:
        return False
    return True


@dataclass
class Mechanism:
    """Structural equation ``x = f(pa) + sigma(pa) * N`` for one node."""

    parents: tuple
    f: Callable
    sigma: Callable
    noise: NoiseSpec


@dataclass
class LatentSpec:
    """Hidden standard-normal confounders entering observed nodes linearly.

    ``members[k]`` lists the observed nodes hit by confounder ``k`` and
    ``coefs[k]`` the matching linear coefficients of the phi maps.
    """

    members: list = field(default_factory=list)
    coefs: list = field(default_factory=list)

    @property
    def n_latent(self) -> int:
        return len(self.members)

    def confounded_pairs(self) -> list[tuple[int, int]]:
        return [tuple(int(v) for v in m) for m in self.members if len(m) == 2]


@dataclass
class Scm:
    graph: Dag
    mechanisms: list
    latent: LatentSpec | None = None

    def __post_init__(self):
        if len(self.mechanisms) != self.graph.d:
            raise ParameterError("need exactly one mechanism per node")
        for i, mech in enumerate(self.mechanisms):
            if tuple(mech.parents) != tuple(self.graph.parents(i).tolist()):
                raise ParameterError(f"mechanism {i} does not consume the parents of node {i}")

    @property
    def d(self) -> int:
        return self.graph.d


def root_mechanism(noise: NoiseSpec) -> Mechanism:
    return Mechanism((), Zero(), Constant(1.0), noise)


def sample_er_dag(d: int, avg_edges: float, rng=None) -> Dag:
    """Erdos-Renyi DAG with ``avg_edges`` expected edges.

    A uniform node permutation fixes the causal order and each forward pair is
    kept independently with probability ``avg_edges / (d (d - 1) / 2)``.
    """
    if d < 1:
        raise ParameterError(f"d must be >= 1, got {d}")
    max_edges = d * (d - 1) / 2
    if avg_edges < 0 or avg_edges > max_edges:
        raise ParameterError(f"avg_edges={avg_edges} outside [0, {max_edges:g}] for d={d}")
    rng = check_rng(rng)
    perm = rng.permutation(d)
    adj = np.zeros((d, d), dtype=np.int64)
    if max_edges == 0:
        return Dag(adj)
    p = avg_edges / max_edges
    iu, ju = np.triu_indices(d, k=1)
    keep = rng.random(len(iu)) < p
    adj[perm[iu[keep]], perm[ju[keep]]] = 1
    return Dag(adj)


def noise_for_node(kind: str, rng: np.random.Generator, *, gumbel_centered: bool = True) -> NoiseSpec:
    """Per-node noise following the experimental protocol.

    Student's t draws its degrees of freedom uniformly from {2, 3, 4, 5}.
    """
    if kind == "gaussian":
        return NoiseSpec("gaussian", 1.0)
    if kind == "student_t":
        return NoiseSpec("student_t", 1.0, df=float(rng.integers(2, 6)))
    if kind == "gumbel":
        return NoiseSpec("gumbel", 1.0, centered=gumbel_centered)
    if kind == "laplace":
        return NoiseSpec("laplace", 1.0)
    raise ParameterError(f"unknown noise kind {kind!r}")


def sample_hsnm(dag: Dag, rng=None, noise: str = "gaussian", *, n_features: int = 500,
                bandwidth: float = 1.0, gumbel_centered: bool = True) -> Scm:
    """GP-mean / sigmoid-scale HSNM over a given DAG (roots: f = 0, sigma = 1)."""
    rng = check_rng(rng)
    mechs = []
    for i in range(dag.d):
        pa = tuple(dag.parents(i).tolist())
        nspec = noise_for_node(noise, rng, gumbel_centered=gumbel_centered)
        if not pa:
            mechs.append(Mechanism((), Zero(), Constant(1.0), nspec))
            continue
        f = sample_gp_function(bandwidth, n_features, rng, dim=len(pa))
        sigma = sample_sigmoid_scale(len(pa), rng)
        mechs.append(Mechanism(pa, f, sigma, nspec))
    return Scm(dag, mechs)


def synthesize(scm: Scm, n: int, rng=None) -> np.ndarray:
    """Draw ``n`` samples; columns follow node indices.

    Latent confounders (if any) are drawn first, then nodes in topological
    order, each with a fresh noise vector.
    """
    if n < 1:
        raise ParameterError(f"n must be >= 1, got {n}")
    rng = check_rng(rng)
    X = np.empty((n, scm.d))
    offset = np.zeros((n, scm.d))
    if scm.latent is not None and scm.latent.n_latent:
        Z = rng.standard_normal((n, scm.latent.n_latent))
        for k, (members, coefs) in enumerate(zip(scm.latent.members, scm.latent.coefs)):
            for node, c in zip(members, coefs):
                offset[:, node] += c * Z[:, k]
    for i in scm.graph.topological_order():
        mech = scm.mechanisms[i]
        eps = mech.noise.sample(rng, n)
        if mech.parents:
            U = X[:, list(mech.parents)]
            X[:, i] = mech.f(U) + mech.sigma(U) * eps
        else:
            X[:, i] = eps
        X[:, i] += offset[:, i]
    return X


def _effect_functions(formulation: str, rng):
    if formulation == "gp_sig":
        return sample_gp_function(1.0, 500, rng), sample_sigmoid_scale(1, rng)
    if formulation == "sig_abs":
        return sample_invertible_sigmoid(rng), ClippedAbs(0.1)
    raise ParameterError(f"unknown formulation {formulation!r}; expected one of {FORMULATIONS}")


def bivariate_scm(formulation: str, noise: NoiseSpec, rng=None) -> Scm:
    """Two-node HSNM X -> Y; the cause X is standard normal."""
    rng = check_rng(rng)
    f, sigma = _effect_functions(formulation, rng)
    mechs = [root_mechanism(NoiseSpec("gaussian", 1.0)), Mechanism((0,), f, sigma, noise)]
    return Scm(Dag(np.array([[0, 1], [0, 0]])), mechs)


def synthesize_bivariate(formulation: str, noise: NoiseSpec, n: int, rng=None):
    """Returns ``(data, (0, 1))``: data columns are [X, Y] and X causes Y."""
    rng = check_rng(rng)
    scm = bivariate_scm(formulation, noise, rng)
    return synthesize(scm, n, rng), (0, 1)


def triangular_scm(lam: float, formulation: str = "sig_abs", q0: NoiseSpec | None = None,
                   q1: NoiseSpec | None = None, rng=None, *, f_tilde=None, sigma=None,
                   phi: tuple[float, float] = (1.0, 1.0)) -> Scm:
    """X = phi0 Z + N0, Y = lam f~(X) + phi1 Z + sigma(X) N1 with Z hidden.

    ``f_tilde`` and ``sigma`` override the formulation's random draws (they must
    offer ``__call__`` and ``grad``).
    """
    if lam < 0:
        raise ParameterError(f"lambda must be >= 0, got {lam}")
    rng = check_rng(rng)
    q0 = q0 or NoiseSpec()
    q1 = q1 or NoiseSpec()
    f_rand, s_rand = _effect_functions(formulation, rng)
    f = f_tilde if f_tilde is not None else f_rand
    s = sigma if sigma is not None else s_rand
    mechs = [root_mechanism(q0), Mechanism((0,), Scaled(f, lam), s, q1)]
    latent = LatentSpec(members=[(0, 1)], coefs=[phi])
    return Scm(Dag(np.array([[0, 1], [0, 0]])), mechs, latent)


def synthesize_latent_triangular(lam: float, formulation: str = "sig_abs",
                                 q0: NoiseSpec | None = None, q1: NoiseSpec | None = None,
                                 n: int = 5000, rng=None, **kwargs):
    """Observed [X, Y] of the latent-confounded triangle; Z is never emitted."""
    rng = check_rng(rng)
    scm = triangular_scm(lam, formulation, q0, q1, rng, **kwargs)
    return synthesize(scm, n, rng), (0, 1)


def example_quadratic_scm(coefs: Sequence[float] = (0.0, 0.0, 1.0), lam: float = 1.0) -> Scm:
    """Gaussian triangle X = Z + N0, Y = Z + lam f(X) + N1 with polynomial f."""
    return triangular_scm(lam, "sig_abs", rng=0, f_tilde=Polynomial(coefs), sigma=Constant(1.0))


def confounded_scm(d: int, avg_edges: float, rho: float, rng=None, noise: str = "gaussian") -> Scm:
    """HSNM on an ER graph plus pairwise hidden confounders.

    Each unordered pair is confounded with probability ``rho`` by its own
    standard-normal Z entering both nodes with unit linear coefficient. The
    confounder mask comes from a child stream, so ``rho = 0`` consumes the
    parent generator exactly like ``sample_er_dag`` + ``sample_hsnm``.
    """
    if not 0.0 <= rho <= 1.0:
        raise ParameterError(f"rho must lie in [0, 1], got {rho}")
    rng = check_rng(rng)
    conf_rng = rng.spawn(1)[0]
    dag = sample_er_dag(d, avg_edges, rng)
    scm = sample_hsnm(dag, rng, noise)
    iu, ju = np.triu_indices(d, k=1)
    hit = conf_rng.random(len(iu)) < rho
    members = [(int(i), int(j)) for i, j in zip(iu[hit], ju[hit])]
    if members:
        scm.latent = LatentSpec(members, [(1.0, 1.0)] * len(members))
    return scm


def synthesize_confounded_multivariate(d: int, avg_edges: float, rho: float, n: int,
                                       rng=None, noise: str = "gaussian"):
    """Returns ``(data, dag)``; the DAG carries observed-node edges only."""
    rng = check_rng(rng)
    scm = confounded_scm(d, avg_edges, rho, rng, noise)
    return synthesize(scm, n, rng), scm.graph


# -- file formats -----------------------------------------------------------

def write_dataset(path, X) -> None:
    """CSV with header ``x1,...,xd``, one row per sample, 17 significant digits."""
    X = np.asarray(X, dtype=float)
    header = ",".join(f"x{j + 1}" for j in range(X.shape[1]))
    np.savetxt(path, X, fmt="%.17g", delimiter=",", header=header, comments="")


def read_dataset(path) -> np.ndarray:
    X = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return X


def write_adjacency(path, adj) -> None:
    np.savetxt(path, np.asarray(adj, dtype=int), fmt="%d", delimiter=",")


def read_adjacency(path) -> np.ndarray:
    return np.loadtxt(path, delimiter=",", dtype=int, ndmin=2)


def write_ground_truth(directory, dag: Dag, *, seed, config: dict,
                       confounded_pairs=()) -> tuple[Path, Path]:
    directory = Path(directory)
    adj_path = directory / "truth_adjacency.csv"
    meta_path = directory / "truth.json"
    write_adjacency(adj_path, dag.adj)
    meta = {
        "order": [int(i) for i in dag.topological_order()],
        "confounded_pairs": [list(p) for p in confounded_pairs],
        "seed": seed,
        "config": config,
    }
    meta_path.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return adj_path, meta_path
