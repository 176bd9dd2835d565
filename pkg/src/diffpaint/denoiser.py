"""Pluggable noise predictors for the reverse process.

A denoiser maps a noisy tensor and its timestep to an estimate of the
standard-normal noise that produced it. Two exactly-verifiable analytic
implementations live here (isotropic Gaussian mixture, full-covariance
Gaussian); the trainable convolutional one is in :mod:`diffpaint.toy`.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from typing import Literal, Protocol, runtime_checkable

import numpy as np
from scipy.special import logsumexp

from .schedule import Schedule

VarianceMode = Literal["fixed_beta", "fixed_beta_tilde"]

#: Default reverse-step variance: the posterior variance
#: (1 - alpha_bar_{t-1}) / (1 - alpha_bar_t) * beta_t.
DEFAULT_VARIANCE_MODE: VarianceMode = "fixed_beta_tilde"


@dataclass(frozen=True)
class EpsilonPrediction:
    """Predicted noise plus the reverse-variance mode to sample with."""

    epsilon_hat: np.ndarray
    variance_mode: VarianceMode = DEFAULT_VARIANCE_MODE


@runtime_checkable
class Denoiser(Protocol):
    """Pure function of (x_t, t); output shape equals input shape."""

    event_shape: tuple[int, ...]

    def predict(self, x_t: np.ndarray, t: int) -> EpsilonPrediction: ...

    def digest(self) -> str: ...


@dataclass(frozen=True)
class GmmModel:
    """Isotropic Gaussian mixture over the data space, used as an exactly
    solvable stand-in prior for oracle tests.

    ``means`` has shape (K, *event_shape); ``sigma`` is the per-component
    isotropic standard deviation.
    """

    weights: np.ndarray
    means: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=np.float64)
        m = np.asarray(self.means, dtype=np.float64)
        s = np.asarray(self.sigma, dtype=np.float64)
        if w.ndim != 1 or m.ndim < 2 or m.shape[0] != len(w):
            raise ValueError("weights must be (K,), means (K, *event_shape)")
        if s.shape != (len(w),):
            raise ValueError("sigma must be one std per component")
        if abs(w.sum() - 1.0) > 1e-12:
            raise ValueError("weights must sum to 1 within 1e-12")
        if np.any(s <= 0.0):
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "means", m)
        object.__setattr__(self, "sigma", s)

    @property
    def event_shape(self) -> tuple[int, ...]:
        return self.means.shape[1:]

    def to_dict(self) -> dict:
        return {
            "weights": self.weights.tolist(),
            "means": self.means.tolist(),
            "sigma": self.sigma.tolist(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GmmModel":
        return cls(
            weights=np.asarray(data["weights"], dtype=np.float64),
            means=np.asarray(data["means"], dtype=np.float64),
            sigma=np.asarray(data["sigma"], dtype=np.float64),
        )


def _flatten_event(x: np.ndarray, event_shape: tuple[int, ...]) -> tuple[np.ndarray, tuple]:
    """Split ``x`` of shape (*batch, *event_shape) into (B, d) plus the batch shape."""
    ev = len(event_shape)
    if ev and x.shape[-ev:] != event_shape:
        raise ValueError(f"input trailing shape {x.shape} does not match event {event_shape}")
    batch = x.shape[: x.ndim - ev]
    d = int(np.prod(event_shape)) if ev else 1
    return x.reshape(-1, d), batch


def gmm_posterior_mean(
    model: GmmModel, x_t: np.ndarray, t: int, schedule: Schedule
) -> np.ndarray:
    """Exact conditional mean of the clean point given its noised version.

    Component k's marginal at level t is Gaussian with mean
    sqrt(alpha_bar_t) * mu_k and variance alpha_bar_t * sigma_k^2 +
    (1 - alpha_bar_t); responsibilities are computed in the log domain so the
    result is finite for any finite input.

    Leading axes of ``x_t`` beyond the event shape are treated as a batch of
    independent points.
    """
    if not 1 <= t <= schedule.T:
        raise ValueError(f"timestep {t} outside [1, {schedule.T}]")
    x_t = np.asarray(x_t, dtype=np.float64)
    X, batch = _flatten_event(x_t, model.event_shape)
    M = model.means.reshape(len(model.weights), -1)  # (K, d)
    d = M.shape[1]

    ab = schedule.alpha_bar[t]
    root_ab = np.sqrt(ab)
    marg_var = ab * model.sigma**2 + (1.0 - ab)  # (K,)

    diff = X[:, None, :] - root_ab * M[None, :, :]  # (B, K, d)
    sq = np.sum(diff * diff, axis=-1)  # (B, K)
    log_resp = (
        np.log(model.weights)[None, :]
        - 0.5 * d * np.log(2.0 * np.pi * marg_var)[None, :]
        - 0.5 * sq / marg_var[None, :]
    )
    log_resp -= logsumexp(log_resp, axis=1, keepdims=True)
    resp = np.exp(log_resp)  # (B, K)

    # Per-component conditional mean: mu_k + gain_k * (x_t - sqrt(ab) mu_k).
    gain = model.sigma**2 * root_ab / marg_var  # (K,)
    cond = M[None, :, :] + gain[None, :, None] * diff  # (B, K, d)
    out = np.sum(resp[:, :, None] * cond, axis=1)  # (B, d)
    return out.reshape(*batch, *model.event_shape)


def analytic_gmm_epsilon(
    model: GmmModel, x_t: np.ndarray, t: int, schedule: Schedule
) -> np.ndarray:
    """Noise implied by the posterior mean:
    (x_t - sqrt(alpha_bar_t) * E[x0 | x_t]) / sqrt(1 - alpha_bar_t).
    """
    if t == 0:
        raise ValueError("t=0 carries no noise to predict")
    post = gmm_posterior_mean(model, x_t, t, schedule)
    ab = schedule.alpha_bar[t]
    return (np.asarray(x_t, dtype=np.float64) - np.sqrt(ab) * post) / np.sqrt(1.0 - ab)


class GmmDenoiser:
    """Bayes-optimal noise predictor for data drawn from an isotropic GMM."""

    def __init__(
        self,
        model: GmmModel,
        schedule: Schedule,
        variance_mode: VarianceMode = DEFAULT_VARIANCE_MODE,
    ):
        self.model = model
        self.schedule = schedule
        self.variance_mode = variance_mode
        self.event_shape = model.event_shape

    def predict(self, x_t: np.ndarray, t: int) -> EpsilonPrediction:
        eps = analytic_gmm_epsilon(self.model, x_t, t, self.schedule)
        return EpsilonPrediction(eps, self.variance_mode)

    def digest(self) -> str:
        doc = json.dumps({"kind": "gmm", **self.model.to_dict()}, sort_keys=True)
        return hashlib.sha256(doc.encode()).hexdigest()


class GaussianDenoiser:
    """Bayes-optimal noise predictor for a single full-covariance Gaussian
    over d-vectors; covers correlated data the isotropic mixture cannot.
    """

    def __init__(
        self,
        mean: np.ndarray,
        cov: np.ndarray,
        schedule: Schedule,
        variance_mode: VarianceMode = DEFAULT_VARIANCE_MODE,
    ):
        self.mean = np.asarray(mean, dtype=np.float64)
        self.cov = np.asarray(cov, dtype=np.float64)
        if self.mean.ndim != 1 or self.cov.shape != (len(self.mean),) * 2:
            raise ValueError("mean must be (d,), cov (d, d)")
        self.schedule = schedule
        self.variance_mode = variance_mode
        self.event_shape = self.mean.shape

    def posterior_mean(self, x_t: np.ndarray, t: int) -> np.ndarray:
        ab = self.schedule.alpha_bar[t]
        d = len(self.mean)
        gain = np.sqrt(ab) * self.cov @ np.linalg.inv(ab * self.cov + (1.0 - ab) * np.eye(d))
        diff = np.asarray(x_t, dtype=np.float64) - np.sqrt(ab) * self.mean
        return self.mean + diff @ gain.T

    def predict(self, x_t: np.ndarray, t: int) -> EpsilonPrediction:
        if not 1 <= t <= self.schedule.T:
            raise ValueError(f"timestep {t} outside [1, {self.schedule.T}]")
        ab = self.schedule.alpha_bar[t]
        post = self.posterior_mean(x_t, t)
        eps = (np.asarray(x_t, dtype=np.float64) - np.sqrt(ab) * post) / np.sqrt(1.0 - ab)
        return EpsilonPrediction(eps, self.variance_mode)

    def digest(self) -> str:
        doc = json.dumps(
            {"kind": "gaussian", "mean": self.mean.tolist(), "cov": self.cov.tolist()},
            sort_keys=True,
        )
        return hashlib.sha256(doc.encode()).hexdigest()
