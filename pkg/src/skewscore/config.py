"""Flat JSON run configuration."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from ._validation import ParameterError
from .datagen import FORMULATIONS
from .mechanisms import NOISE_KINDS
from .ordering import PSI_KINDS

SETTINGS = ("bivariate", "latent-triangular", "multivariate", "multivariate-confounded")


@dataclass
class RunConfig:
    """Every knob of a generate / discover / benchmark run.

    ``edges`` is the expected number of edges per node of the ER graph, so
    ``edges=1`` is ER1. ``stein_bandwidth_factor`` multiplies the median
    heuristic; ``stein_ridge`` may be a number or "auto" (``0.01 n``).
    """

    setting: str = "bivariate"
    formulation: str = "gp_sig"
    noise: str = "gaussian"
    gumbel_centered: bool = True
    d: int = 2
    n: int = 2000
    edges: float = 1.0
    lam: float = 1.0
    rho: float = 0.2
    estimator: str = "stein"
    stein_bandwidth_factor: float = 0.5
    stein_ridge: float | str = 0.01
    ssm_epochs: int = 50
    psi: str = "cube"
    alpha: float = 0.05
    prune: bool = True
    subsample_cap: int = 1000
    n_boot: int = 200
    seeds: list = field(default_factory=lambda: [0])
    n_jobs: int = 1
    output_dir: str = "out"

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.setting not in SETTINGS:
            raise ParameterError(f"setting must be one of {SETTINGS}, got {self.setting!r}")
        if self.formulation not in FORMULATIONS:
            raise ParameterError(f"formulation must be one of {FORMULATIONS}")
        if self.noise not in NOISE_KINDS:
            raise ParameterError(f"noise must be one of {NOISE_KINDS}")
        if self.estimator not in ("stein", "ssm"):
            raise ParameterError("estimator must be 'stein' or 'ssm'")
        if self.psi not in PSI_KINDS:
            raise ParameterError(f"psi must be one of {PSI_KINDS}")
        if self.setting in ("bivariate", "latent-triangular") and self.d != 2:
            raise ParameterError(f"{self.setting} data has d=2, got d={self.d}")
        if self.d < 2:
            raise ParameterError("d must be >= 2")
        if self.n < 50:
            raise ParameterError("n must be >= 50")
        if self.edges < 0 or self.lam < 0:
            raise ParameterError("edges and lam must be >= 0")
        if not 0.0 <= self.rho <= 1.0:
            raise ParameterError("rho must lie in [0, 1]")
        if not 0.0 < self.alpha < 1.0:
            raise ParameterError("alpha must lie in (0, 1)")
        if not self.stein_bandwidth_factor > 0:
            raise ParameterError("stein_bandwidth_factor must be > 0")
        if self.stein_ridge != "auto" and not (isinstance(self.stein_ridge, (int, float))
                                               and self.stein_ridge > 0):
            raise ParameterError("stein_ridge must be a positive number or 'auto'")
        if self.ssm_epochs < 1 or self.subsample_cap < 2 or self.n_boot < 2 or self.n_jobs < 1:
            raise ParameterError("ssm_epochs, subsample_cap, n_boot and n_jobs must be positive")
        if not self.seeds or not all(isinstance(s, int) and not isinstance(s, bool) for s in self.seeds):
            raise ParameterError("seeds must be a nonempty list of integers")

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise ParameterError(f"unknown config keys: {sorted(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path) -> "RunConfig":
        try:
            data = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ParameterError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ParameterError("config must be a JSON object")
        return cls.from_dict(data)

    def replace(self, **changes) -> "RunConfig":
        return RunConfig.from_dict({**asdict(self), **changes})

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    def save(self, path) -> None:
        Path(path).write_text(self.to_json())
