"""Forward-process noise schedule: per-step variances and their closed-form
accumulated coefficients, plus seeded Gaussian noise streams.

Timesteps are 1-based: t = 0 is the clean image, t = T is (near-)pure noise.
All coefficient arrays have length T + 1 with index 0 holding the clean-image
convention (beta[0] = 0, alpha[0] = alpha_bar[0] = 1), so ``beta[t]`` is the
noise variance applied by step t.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

BETA_START = 1e-4
BETA_END = 0.02


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class Schedule:
    """Immutable noise schedule; safe to share across concurrent samplers.

    ``alpha_bar[t]`` is the cumulative product of ``alpha[s]`` for s <= t,
    i.e. the squared signal-retention coefficient after t forward steps.
    """

    beta: np.ndarray = field(repr=False)
    alpha: np.ndarray = field(repr=False)
    alpha_bar: np.ndarray = field(repr=False)

    @property
    def T(self) -> int:
        return len(self.beta) - 1

    @classmethod
    def from_betas(cls, betas: np.ndarray) -> "Schedule":
        """Build from a 1-based vector of per-step variances (length T)."""
        betas = np.asarray(betas, dtype=np.float64)
        if betas.ndim != 1 or len(betas) < 1:
            raise ValueError("betas must be a non-empty 1-D vector")
        if np.any(betas <= 0.0) or np.any(betas >= 1.0):
            raise ValueError("every beta[t] must lie in (0, 1)")
        T = len(betas)
        beta = np.zeros(T + 1)
        beta[1:] = betas
        alpha = 1.0 - beta
        alpha_bar = np.cumprod(alpha)
        return cls(_readonly(beta), _readonly(alpha), _readonly(alpha_bar))

    def to_json(self) -> str:
        """Reproducibility manifest form: ``{"T": ..., "beta": [...]}``."""
        return json.dumps({"T": self.T, "beta": self.beta[1:].tolist()})

    @classmethod
    def from_json(cls, doc: str) -> "Schedule":
        data = json.loads(doc)
        sched = cls.from_betas(np.asarray(data["beta"], dtype=np.float64))
        if sched.T != data["T"]:
            raise ValueError("T does not match the length of beta")
        return sched

    def digest(self) -> str:
        return hashlib.sha256(self.to_json().encode()).hexdigest()


def linear_beta_schedule(T: int) -> Schedule:
    """Linear per-step variance ramp from 1e-4 to 0.02 over T steps.

    The endpoints are fixed regardless of T; the schedule is defined directly
    at the inference length rather than respaced from a longer one.
    """
    if not isinstance(T, (int, np.integer)) or T < 2:
        raise ValueError(f"T must be an integer >= 2, got {T!r}")
    return Schedule.from_betas(np.linspace(BETA_START, BETA_END, int(T)))


class GaussianNoiseSource:
    """Seeded stream of i.i.d. standard-normal variates.

    Uses numpy's PCG64 generator (ziggurat normal sampling) seeded through a
    SeedSequence spawn key, so identical (seed, stream) pairs reproduce the
    same variate sequence across processes, and distinct streams under one
    seed are statistically independent.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._rng = np.random.Generator(
            np.random.PCG64(np.random.SeedSequence(entropy=self.seed, spawn_key=(self.stream,)))
        )

    def normal(self, shape: tuple[int, ...] = ()) -> np.ndarray:
        return self._rng.standard_normal(shape, dtype=np.float64)


def _check_t(schedule: Schedule, t: int, lo: int = 1) -> None:
    if not lo <= t <= schedule.T:
        raise ValueError(f"timestep {t} outside [{lo}, {schedule.T}]")


def _check_shapes(x: np.ndarray, noise: np.ndarray) -> None:
    if np.shape(x) != np.shape(noise):
        raise ValueError(f"shape mismatch: {np.shape(x)} vs {np.shape(noise)}")


def forward_step(schedule: Schedule, x: np.ndarray, t: int, noise: np.ndarray) -> np.ndarray:
    """One forward step: sqrt(1 - beta_t) * x + sqrt(beta_t) * noise."""
    _check_t(schedule, t)
    x = np.asarray(x, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    _check_shapes(x, noise)
    b = schedule.beta[t]
    return np.sqrt(1.0 - b) * x + np.sqrt(b) * noise


def forward_jump(schedule: Schedule, x0: np.ndarray, t: int, noise: np.ndarray) -> np.ndarray:
    """Jump from the clean image straight to level t in one draw:
    sqrt(alpha_bar_t) * x0 + sqrt(1 - alpha_bar_t) * noise.

    t = 0 is the clean-image convention and returns x0 exactly.
    """
    _check_t(schedule, t, lo=0)
    x0 = np.asarray(x0, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    _check_shapes(x0, noise)
    ab = schedule.alpha_bar[t]
    return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * noise


def forward_rejump(
    schedule: Schedule, x_s: np.ndarray, s: int, t: int, noise: np.ndarray
) -> np.ndarray:
    """Accumulated forward jump from level s up to level t (s < t) in one op:
    sqrt(alpha_bar_t / alpha_bar_s) * x_s + sqrt(1 - alpha_bar_t / alpha_bar_s) * noise.

    With s = 0 this is exactly ``forward_jump``; with t = s + 1 it reduces to
    ``forward_step`` at t. This is the single-op jump used by resampling.
    """
    if not 0 <= s < t:
        raise ValueError(f"need 0 <= s < t, got s={s}, t={t}")
    _check_t(schedule, t)
    x_s = np.asarray(x_s, dtype=np.float64)
    noise = np.asarray(noise, dtype=np.float64)
    _check_shapes(x_s, noise)
    ratio = schedule.alpha_bar[t] / schedule.alpha_bar[s]
    return np.sqrt(ratio) * x_s + np.sqrt(1.0 - ratio) * noise
