"""Sliced score matching with a small MLP (torch)."""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .._validation import ParameterError, check_data, check_rng

_ACTIVATIONS = ("tanh", "softplus", "elu", "silu")


class TrainingError(RuntimeError):
    """Raised when the sliced objective becomes non-finite."""

    def __init__(self, message, last_good_epoch, last_good_loss):
        super().__init__(message)
        self.last_good_epoch = last_good_epoch
        self.last_good_loss = last_good_loss


def _build_mlp(d, hidden, activation):
    import torch.nn as nn

    act = {"tanh": nn.Tanh, "softplus": nn.Softplus, "elu": nn.ELU, "silu": nn.SiLU}[activation]
    layers = []
    width = d
    for h in hidden:
        layers += [nn.Linear(width, h), act()]
        width = h
    layers.append(nn.Linear(width, d))
    return nn.Sequential(*layers)


def sliced_score_loss(model, x, v, jvp="autograd", fd_step=1e-4):
    """Sliced objective ``mean(v^T d(v^T s)/dx v + 0.5 (v^T s)^2)``.

    ``v`` has shape ``(n_projections, batch, d)``.
    """
    import torch

    if jvp == "autograd":
        x = x.detach().requires_grad_(True)
        s = model(x)
        total = 0.0
        for vp in v:
            sv = (s * vp).sum(dim=1)
            grad = torch.autograd.grad(sv.sum(), x, create_graph=True)[0]
            total = total + ((grad * vp).sum(dim=1) + 0.5 * sv**2).mean()
        return total / len(v)
    total = 0.0
    s = model(x)
    for vp in v:
        sv = (s * vp).sum(dim=1)
        plus = (model(x + fd_step * vp) * vp).sum(dim=1)
        minus = (model(x - fd_step * vp) * vp).sum(dim=1)
        total = total + ((plus - minus) / (2.0 * fd_step) + 0.5 * sv**2).mean()
    return total / len(v)


class SlicedScoreMatching(TransformerMixin, BaseEstimator):
    """MLP score model fitted by sliced score matching with Rademacher slices.

    Data are standardized internally and scores mapped back, so the network
    always sees unit-scale inputs.

    Parameters
    ----------
    hidden_sizes : tuple of int
    activation : {"tanh", "softplus", "elu", "silu"}
    epochs : int
    batch_size : int
    learning_rate : float
    n_projections : int
        Slices drawn per sample and step.
    jvp : {"autograd", "finite_difference"}
        How the directional derivative is obtained.
    fd_step : float
        Step (in standardized units) for ``jvp="finite_difference"``.
    random_state : int, Generator or None
    """

    def __init__(self, hidden_sizes=(128, 128, 128), activation="tanh", epochs=50,
                 batch_size=128, learning_rate=1e-3, n_projections=4, jvp="autograd",
                 fd_step=1e-4, random_state=None):
        self.hidden_sizes = hidden_sizes
        self.activation = activation
        self.epochs = epochs
        self.batch_size = batch_size
        self.learning_rate = learning_rate
        self.n_projections = n_projections
        self.jvp = jvp
        self.fd_step = fd_step
        self.random_state = random_state

    def _check_params(self, n):
        if self.epochs < 1:
            raise ParameterError("epochs must be >= 1")
        if self.activation not in _ACTIVATIONS:
            raise ParameterError(f"activation must be one of {_ACTIVATIONS}")
        if self.jvp not in ("autograd", "finite_difference"):
            raise ParameterError("jvp must be 'autograd' or 'finite_difference'")
        if self.jvp == "finite_difference" and not self.fd_step > 0:
            raise ParameterError("fd_step must be > 0")
        if n < self.batch_size:
            raise ParameterError(f"need at least batch_size={self.batch_size} samples, got {n}")

    def fit(self, X, y=None):
        import torch

        X = check_data(X)
        n, d = X.shape
        self._check_params(n)
        rng = check_rng(self.random_state)
        gen = torch.Generator().manual_seed(int(rng.integers(2**62)))
        torch.manual_seed(int(rng.integers(2**62)))

        self.mean_ = X.mean(axis=0)
        self.scale_ = X.std(axis=0)
        self.scale_[self.scale_ == 0] = 1.0
        Xs = torch.as_tensor((X - self.mean_) / self.scale_, dtype=torch.float32)

        model = _build_mlp(d, tuple(self.hidden_sizes), self.activation)
        opt = torch.optim.Adam(model.parameters(), lr=self.learning_rate)
        self.loss_history_ = []
        last_state = {k: v.clone() for k, v in model.state_dict().items()}
        for epoch in range(self.epochs):
            perm = torch.randperm(n, generator=gen)
            running, count = 0.0, 0
            for start in range(0, n - self.batch_size + 1, self.batch_size):
                xb = Xs[perm[start:start + self.batch_size]]
                v = torch.randint(0, 2, (self.n_projections, *xb.shape), generator=gen)
                v = v.to(torch.float32) * 2.0 - 1.0
                loss = sliced_score_loss(model, xb, v, self.jvp, self.fd_step)
                if not torch.isfinite(loss):
                    model.load_state_dict(last_state)
                    self.model_ = model
                    last = self.loss_history_[-1] if self.loss_history_ else float("nan")
                    raise TrainingError(
                        f"non-finite sliced loss at epoch {epoch + 1}; "
                        f"last good epoch {epoch} with loss {last:.4g}",
                        epoch, last)
                opt.zero_grad()
                loss.backward()
                opt.step()
                running += float(loss.detach()) * len(xb)
                count += len(xb)
            self.loss_history_.append(running / count)
            last_state = {k: v.clone() for k, v in model.state_dict().items()}
        self.model_ = model
        self.n_features_in_ = d
        return self

    def transform(self, X):
        import torch

        check_is_fitted(self, "model_")
        X = check_data(X)
        with torch.no_grad():
            xs = torch.as_tensor((X - self.mean_) / self.scale_, dtype=torch.float32)
            s = self.model_(xs).numpy().astype(np.float64)
        return s / self.scale_


def estimate_score_ssm(X, rng=None, **params) -> np.ndarray:
    """Fit :class:`SlicedScoreMatching` on ``X`` and return scores at ``X``."""
    return SlicedScoreMatching(random_state=rng, **params).fit(X).transform(X)
