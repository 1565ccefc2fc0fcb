import json

import pytest

from skewscore import ParameterError, RunConfig


def test_defaults_materialize_every_field():
    d = json.loads(RunConfig().to_json())
    assert d["estimator"] == "stein" and d["seeds"] == [0]
    assert set(d) == set(RunConfig.__dataclass_fields__)


def test_round_trip(tmp_path):
    cfg = RunConfig(setting="multivariate", d=5, n=300, seeds=[1, 2])
    cfg.save(tmp_path / "c.json")
    again = RunConfig.load(tmp_path / "c.json")
    assert again == cfg
    assert again.to_json() == cfg.to_json()


@pytest.mark.parametrize("changes", [
    {"setting": "trivariate"}, {"d": 3}, {"n": 10}, {"alpha": 1.0}, {"rho": 2.0},
    {"seeds": []}, {"seeds": [1.5]}, {"estimator": "kde"}, {"psi": "square"},
    {"stein_ridge": -1}, {"stein_ridge": "big"}, {"noise": "cauchy"}, {"lam": -1.0},
])
def test_invalid_values_rejected(changes):
    with pytest.raises(ParameterError):
        RunConfig(**changes)


def test_unknown_keys_rejected(tmp_path):
    (tmp_path / "c.json").write_text('{"sample_size": 3}')
    with pytest.raises(ParameterError, match="unknown"):
        RunConfig.load(tmp_path / "c.json")
    (tmp_path / "d.json").write_text("[1, 2]")
    with pytest.raises(ParameterError):
        RunConfig.load(tmp_path / "d.json")
    with pytest.raises(ParameterError):
        RunConfig.load(tmp_path / "missing.json")


def test_replace_validates():
    cfg = RunConfig()
    assert cfg.replace(alpha=0.01).alpha == 0.01
    with pytest.raises(ParameterError):
        cfg.replace(alpha=0.0)
