"""Reverse diffusion with masked known/unknown composition, driven by a
windowed resampling plan, with an exact operation-cost model.

A paint run walks the reverse chain from pure noise to a clean canvas. At
every step the user-given landmark region is re-encoded to the step's noise
level and merged over the generated content through the binary keep-mask. At
each jump point of the plan the partially denoised state is re-noised by one
accumulated forward jump and denoised back down, repeatedly, to harmonize
generated content with the landmarks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Literal

import numpy as np

from .denoiser import Denoiser
from .schedule import GaussianNoiseSource, Schedule, forward_jump, forward_rejump

KnownNoiseIndex = Literal["t-1", "t"]


class SamplingFailure(RuntimeError):
    """Raised when the denoiser returns non-finite values at some timestep."""

    def __init__(self, t: int, message: str = "non-finite denoiser output"):
        super().__init__(f"{message} at timestep {t}")
        self.t = t


class PaintCancelled(Exception):
    """Cooperative cancellation; carries whatever was produced so far."""

    def __init__(self, ops_done: int, snapshots: list["Snapshot"]):
        super().__init__(f"paint cancelled after {ops_done} ops")
        self.ops_done = ops_done
        self.snapshots = snapshots


@dataclass(frozen=True)
class ResampleConfig:
    """Resampling strategy: jump length, repetitions, and the active window.

    ``strategy`` is one of ``none``, ``all``, ``start:<t>`` (resample only at
    jump points p <= t) or ``stop:<t>`` (resample only at jump points p > t).
    An explicit ``window`` (lo, hi), meaning lo < p <= hi, overrides the
    strategy preset.
    """

    lam: int = 10
    repeats: int = 10
    strategy: str = "all"
    window: tuple[int, int] | None = None

    def __post_init__(self):
        if self.lam < 1:
            raise ValueError("jump length must be positive")
        if self.repeats < 1:
            raise ValueError("repeats must be positive")
        parse_strategy(self.strategy)  # validate early

    def resolve_window(self, T: int) -> tuple[int, int]:
        if self.window is not None:
            return self.window
        kind, s = parse_strategy(self.strategy)
        top = T - self.lam
        if kind == "none":
            return (0, 0)
        if kind == "all":
            return (0, top)
        if kind == "start":
            return (0, s)
        return (s, top)  # stop


def parse_strategy(strategy: str) -> tuple[str, int | None]:
    """Parse ``none``/``all``/``start:<t>``/``stop:<t>`` into (kind, param)."""
    if strategy in ("none", "all"):
        return strategy, None
    for kind in ("start", "stop"):
        if strategy.startswith(kind + ":"):
            try:
                return kind, int(strategy.split(":", 1)[1])
            except ValueError:
                break
    raise ValueError(f"unknown strategy {strategy!r}")


@dataclass(frozen=True)
class ResamplePlan:
    """Deterministic expansion of a config at a given T: which timesteps jump
    and how many extra forward/denoise cycles run at each."""

    T: int
    lam: int
    jump_points: tuple[int, ...]  # descending
    cycles_per_point: int


@dataclass(frozen=True)
class OpCountReport:
    n_dn: int
    n_fwd: int
    n_total: int

    def to_dict(self) -> dict:
        return {"n_dn": self.n_dn, "n_fwd": self.n_fwd, "n_total": self.n_total}


@dataclass
class CompositionInput:
    """Landmark canvas plus the binary keep-mask (1 = keep, 0 = generate)."""

    known: np.ndarray
    mask: np.ndarray
    warnings: list[str] = field(default_factory=list)

    def __post_init__(self):
        self.known = np.asarray(self.known, dtype=np.float64)
        self.mask = np.asarray(self.mask, dtype=np.float64)
        if self.known.shape != self.mask.shape:
            raise ValueError(
                f"mask shape {self.mask.shape} must equal known shape {self.known.shape}"
            )
        _check_binary(self.mask)


@dataclass(frozen=True)
class Snapshot:
    op_index: int
    t: int
    image: np.ndarray


@dataclass
class PaintResult:
    image: np.ndarray
    ops: OpCountReport
    snapshots: list[Snapshot]


def build_resample_plan(config: ResampleConfig, T: int) -> ResamplePlan:
    """Jump grid is every multiple of the jump length up to T - lam; the plan
    keeps grid points p with lo < p <= hi for the config's window."""
    if config.lam >= T:
        raise ValueError(f"jump length {config.lam} must be < T={T}")
    lo, hi = config.resolve_window(T)
    points = [p for p in range(config.lam, T, config.lam) if lo < p <= min(hi, T - config.lam)]
    points.sort(reverse=True)
    return ResamplePlan(
        T=T, lam=config.lam, jump_points=tuple(points), cycles_per_point=config.repeats - 1
    )


def count_ops(plan: ResamplePlan) -> OpCountReport:
    """Closed-form cost of executing a plan. Each accumulated jump counts as
    one forward op; per-step known-region encodings are not counted."""
    n_points = len(plan.jump_points)
    n_dn = plan.T + n_points * plan.cycles_per_point * plan.lam
    n_fwd = n_points * plan.cycles_per_point
    return OpCountReport(n_dn=n_dn, n_fwd=n_fwd, n_total=n_dn + n_fwd)


def _check_binary(mask: np.ndarray) -> None:
    if not np.all((mask == 0.0) | (mask == 1.0)):
        raise ValueError("mask must be exactly binary (0/1 values)")


def merge(known_t: np.ndarray, unknown_t: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Elementwise select: mask * known + (1 - mask) * unknown."""
    known_t = np.asarray(known_t, dtype=np.float64)
    unknown_t = np.asarray(unknown_t, dtype=np.float64)
    mask = np.asarray(mask, dtype=np.float64)
    if not known_t.shape == unknown_t.shape == mask.shape:
        raise ValueError("merge requires equal shapes")
    _check_binary(mask)
    return mask * known_t + (1.0 - mask) * unknown_t


def encode_known(
    known: np.ndarray, t: int, schedule: Schedule, rng: GaussianNoiseSource
) -> np.ndarray:
    """Noise the landmark region to level t with a fresh draw; t = 0 returns
    the landmarks untouched (and consumes no randomness)."""
    known = np.asarray(known, dtype=np.float64)
    if t == 0:
        return known
    return forward_jump(schedule, known, t, rng.normal(known.shape))


def reverse_variance(schedule: Schedule, t: int, mode: str) -> float:
    if mode == "fixed_beta":
        return float(schedule.beta[t])
    if mode == "fixed_beta_tilde":
        return float(
            (1.0 - schedule.alpha_bar[t - 1]) / (1.0 - schedule.alpha_bar[t]) * schedule.beta[t]
        )
    raise ValueError(f"unknown variance mode {mode!r}")


def reverse_step(
    x_t: np.ndarray,
    t: int,
    denoiser: Denoiser,
    schedule: Schedule,
    rng: GaussianNoiseSource,
    *,
    clamp_x0: bool = True,
) -> np.ndarray:
    """One learned reverse step from level t to t - 1.

    The predicted noise implies a clean-image estimate, which is clamped to
    [-1, 1] for image data (disable for unbounded test data) before the
    posterior mean is formed. No noise is injected at the terminal step so
    outputs are not dithered.
    """
    if not 1 <= t <= schedule.T:
        raise ValueError(f"timestep {t} outside [1, {schedule.T}]")
    x_t = np.asarray(x_t, dtype=np.float64)
    pred = denoiser.predict(x_t, t)
    eps = np.asarray(pred.epsilon_hat, dtype=np.float64)
    if eps.shape != x_t.shape:
        raise SamplingFailure(t, f"denoiser output shape {eps.shape} != input {x_t.shape}")
    if not np.all(np.isfinite(eps)):
        raise SamplingFailure(t)

    ab_t = schedule.alpha_bar[t]
    ab_prev = schedule.alpha_bar[t - 1]
    beta_t = schedule.beta[t]

    x0 = (x_t - np.sqrt(1.0 - ab_t) * eps) / np.sqrt(ab_t)
    if clamp_x0:
        x0 = np.clip(x0, -1.0, 1.0)
    mean = (np.sqrt(ab_prev) * beta_t / (1.0 - ab_t)) * x0 + (
        np.sqrt(schedule.alpha[t]) * (1.0 - ab_prev) / (1.0 - ab_t)
    ) * x_t

    if t == 1:
        return mean
    sigma2 = reverse_variance(schedule, t, pred.variance_mode)
    return mean + np.sqrt(sigma2) * rng.normal(x_t.shape)


def paint(
    inp: CompositionInput,
    denoiser: Denoiser,
    schedule: Schedule,
    plan: ResamplePlan,
    rng: GaussianNoiseSource,
    *,
    clamp_x0: bool = True,
    known_noise_index: KnownNoiseIndex = "t-1",
    snapshot_every: int = 0,
    on_snapshot: Callable[[Snapshot], None] | None = None,
    progress: Callable[[int, int], None] | None = None,
    should_cancel: Callable[[], bool] | None = None,
) -> PaintResult:
    """Fill the unmasked region of the landmark canvas by reverse sampling.

    Starts from pure noise; every reverse step merges a freshly encoded
    landmark tensor over the generated one through the keep-mask, and each
    jump point of the plan runs its extra re-noise/denoise cycles. With the
    default ``known_noise_index`` of ``t-1`` the landmarks are encoded at the
    noise level of the tensor they are merged into, so the final output keeps
    the landmark pixels exactly; ``t`` encodes one level higher instead.

    Returns the final canvas, the op counts actually incurred, and any
    snapshots taken every ``snapshot_every`` denoise ops (0 disables).
    """
    if plan.T != schedule.T:
        raise ValueError(f"plan built for T={plan.T}, schedule has T={schedule.T}")
    known, mask = inp.known, inp.mask
    expected = count_ops(plan)
    jump_set = frozenset(plan.jump_points)

    x = rng.normal(known.shape)
    n_dn = 0
    n_fwd = 0
    snapshots: list[Snapshot] = []

    def tick(t_now: int) -> None:
        done = n_dn + n_fwd
        if snapshot_every > 0 and n_dn % snapshot_every == 0:
            snap = Snapshot(op_index=done, t=t_now, image=x.copy())
            snapshots.append(snap)
            if on_snapshot is not None:
                on_snapshot(snap)
        if progress is not None:
            progress(done, expected.n_total)
        if should_cancel is not None and should_cancel():
            raise PaintCancelled(done, snapshots)

    def denoise_merge(x: np.ndarray, t: int) -> np.ndarray:
        nonlocal n_dn
        x_unknown = reverse_step(x, t, denoiser, schedule, rng, clamp_x0=clamp_x0)
        n_dn += 1
        level = t - 1 if known_noise_index == "t-1" else t
        x_known = encode_known(known, level, schedule, rng)
        return merge(x_known, x_unknown, mask)

    for t in range(schedule.T, 0, -1):
        x = denoise_merge(x, t)
        tick(t - 1)
        p = t - 1
        if p in jump_set:
            for _ in range(plan.cycles_per_point):
                x = forward_rejump(schedule, x, p, p + plan.lam, rng.normal(x.shape))
                n_fwd += 1
                for u in range(p + plan.lam, p, -1):
                    x = denoise_merge(x, u)
                    tick(u - 1)

    assert (n_dn, n_fwd) == (expected.n_dn, expected.n_fwd)
    return PaintResult(
        image=x,
        ops=OpCountReport(n_dn=n_dn, n_fwd=n_fwd, n_total=n_dn + n_fwd),
        snapshots=snapshots,
    )


def unconditional_sample(
    denoiser: Denoiser,
    schedule: Schedule,
    rng: GaussianNoiseSource,
    n: int,
    shape: tuple[int, ...] | None = None,
    *,
    clamp_x0: bool = True,
) -> list[np.ndarray]:
    """Ancestral samples: paint with an all-zero mask and no resampling.

    Each sample runs on its own noise stream (rng.seed, stream index) so the
    draws are independent and individually reproducible.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    shape = tuple(shape) if shape is not None else denoiser.event_shape
    plan = build_resample_plan(ResampleConfig(strategy="none"), schedule.T)
    zero_mask = CompositionInput(known=np.zeros(shape), mask=np.zeros(shape))
    out = []
    for i in range(n):
        stream = GaussianNoiseSource(rng.seed, rng.stream + i)
        out.append(paint(zero_mask, denoiser, schedule, plan, stream, clamp_x0=clamp_x0).image)
    return out
