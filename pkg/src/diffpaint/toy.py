"""Small trainable noise predictor: a few-layer convolutional net with a
sinusoidal timestep embedding, trained to regress the injected noise from
randomly re-noised dataset images. Desk-scale stand-in for a big U-Net.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
from dataclasses import dataclass

import numpy as np
import torch
import torch.nn as nn

from .denoiser import DEFAULT_VARIANCE_MODE, EpsilonPrediction, VarianceMode
from .schedule import GaussianNoiseSource, Schedule, forward_jump

WEIGHTS_MAGIC = b"DPTOYDN1"
WEIGHTS_VERSION = 1


class TrainingFailure(RuntimeError):
    """Raised when the loss goes non-finite; carries where it happened."""

    def __init__(self, epoch: int, step: int, loss: float):
        super().__init__(f"non-finite training loss {loss} at epoch {epoch}, step {step}")
        self.epoch = epoch
        self.step = step
        self.loss = loss


@dataclass
class ToyTrainConfig:
    epochs: int = 30
    batch_size: int = 64
    lr: float = 2e-3
    seed: int = 0
    hidden: int = 48
    embed_dim: int = 64
    holdout_fraction: float = 0.1


def _sinusoidal_embedding(t: torch.Tensor, dim: int) -> torch.Tensor:
    """Standard sin/cos position code over log-spaced frequencies."""
    half = dim // 2
    freqs = torch.exp(-np.log(10000.0) * torch.arange(half, dtype=torch.float32) / half)
    args = t.float()[:, None] * freqs[None, :]
    return torch.cat([torch.sin(args), torch.cos(args)], dim=1)


class SmallEpsNet(nn.Module):
    """Conv stack conditioned on t through a learned projection of the
    sinusoidal embedding added to the first feature map."""

    def __init__(self, channels: int = 1, hidden: int = 48, embed_dim: int = 64):
        super().__init__()
        self.channels = channels
        self.hidden = hidden
        self.embed_dim = embed_dim
        self.time_proj = nn.Sequential(
            nn.Linear(embed_dim, hidden), nn.SiLU(), nn.Linear(hidden, hidden)
        )
        self.inp = nn.Conv2d(channels, hidden, 3, padding=1)
        self.mid = nn.Sequential(
            nn.SiLU(),
            nn.Conv2d(hidden, hidden, 3, padding=1),
            nn.SiLU(),
            nn.Conv2d(hidden, hidden, 3, padding=1),
            nn.SiLU(),
        )
        self.out = nn.Conv2d(hidden, channels, 3, padding=1)

    def forward(self, x: torch.Tensor, t: torch.Tensor) -> torch.Tensor:
        emb = self.time_proj(_sinusoidal_embedding(t, self.embed_dim))
        h = self.inp(x) + emb[:, :, None, None]
        return self.out(self.mid(h))


class ToyDenoiser:
    """Trained network wrapped behind the pure predict(x_t, t) contract.

    Inputs/outputs are (H, W, C) float64 arrays; the net runs in float32
    under no_grad, so repeated calls with equal inputs return equal outputs.
    """

    def __init__(
        self,
        net: SmallEpsNet,
        T: int,
        event_shape: tuple[int, ...],
        seed: int,
        variance_mode: VarianceMode = DEFAULT_VARIANCE_MODE,
    ):
        net.eval()
        self.net = net
        self.T = T
        self.event_shape = tuple(event_shape)
        self.seed = seed
        self.variance_mode = variance_mode
        self.loss_history: list[float] = []

    def predict(self, x_t: np.ndarray, t: int) -> EpsilonPrediction:
        x = np.asarray(x_t, dtype=np.float64)
        if x.ndim == 2:
            x = x[:, :, None]
        xt = torch.from_numpy(np.ascontiguousarray(x.transpose(2, 0, 1))[None]).float()
        with torch.no_grad():
            eps = self.net(xt, torch.tensor([t]))[0].numpy()
        eps64 = eps.astype(np.float64).transpose(1, 2, 0)
        return EpsilonPrediction(eps64.reshape(np.shape(x_t)), self.variance_mode)

    def header(self) -> dict:
        return {
            "architecture": {
                "kind": "small_eps_net",
                "channels": self.net.channels,
                "hidden": self.net.hidden,
                "embed_dim": self.net.embed_dim,
            },
            "T": self.T,
            "image_shape": list(self.event_shape),
            "seed": self.seed,
            "variance_mode": self.variance_mode,
        }

    def save(self, path) -> None:
        """Versioned binary: magic, version, JSON header, npz weight blob."""
        header = json.dumps(self.header()).encode()
        blob = io.BytesIO()
        np.savez(blob, **{k: v.numpy() for k, v in self.net.state_dict().items()})
        with open(path, "wb") as fh:
            fh.write(WEIGHTS_MAGIC)
            fh.write(struct.pack("<II", WEIGHTS_VERSION, len(header)))
            fh.write(header)
            fh.write(blob.getvalue())

    @classmethod
    def load(cls, path) -> "ToyDenoiser":
        with open(path, "rb") as fh:
            magic = fh.read(len(WEIGHTS_MAGIC))
            if magic != WEIGHTS_MAGIC:
                raise OSError(f"{path}: not a toy-denoiser weights file")
            version, hlen = struct.unpack("<II", fh.read(8))
            if version != WEIGHTS_VERSION:
                raise OSError(f"{path}: unsupported weights version {version}")
            header = json.loads(fh.read(hlen).decode())
            arrays = np.load(io.BytesIO(fh.read()))
        arch = header["architecture"]
        net = SmallEpsNet(arch["channels"], arch["hidden"], arch["embed_dim"])
        net.load_state_dict({k: torch.from_numpy(arrays[k]) for k in arrays.files})
        return cls(
            net,
            T=header["T"],
            event_shape=tuple(header["image_shape"]),
            seed=header["seed"],
            variance_mode=header.get("variance_mode", DEFAULT_VARIANCE_MODE),
        )

    def digest(self) -> str:
        blob = io.BytesIO()
        np.savez(blob, **{k: v.numpy() for k, v in self.net.state_dict().items()})
        h = hashlib.sha256(json.dumps(self.header(), sort_keys=True).encode())
        h.update(blob.getvalue())
        return h.hexdigest()


def _as_batch(dataset: np.ndarray) -> np.ndarray:
    data = np.asarray(dataset, dtype=np.float64)
    if data.ndim == 3:
        data = data[:, :, :, None]
    if data.ndim != 4:
        raise ValueError(f"dataset must be (N, H, W[, C]), got {data.shape}")
    if len(data) == 0:
        raise ValueError("dataset is empty")
    if np.max(np.abs(data)) > 1.0 + 1e-9:
        raise ValueError("dataset values must lie in [-1, 1]")
    return data


def train_toy_denoiser(
    dataset: np.ndarray, schedule: Schedule, config: ToyTrainConfig | None = None
) -> ToyDenoiser:
    """Minimize the squared error between injected and predicted noise over
    random (image, timestep, noise) draws. Single-threaded and seeded, so a
    fixed config reproduces the same weights.

    The returned denoiser records the per-step loss curve in
    ``loss_history``.
    """
    config = config or ToyTrainConfig()
    data = _as_batch(dataset)
    n, h, w, c = data.shape

    torch.manual_seed(config.seed)
    net = SmallEpsNet(channels=c, hidden=config.hidden, embed_dim=config.embed_dim)
    opt = torch.optim.Adam(net.parameters(), lr=config.lr)
    rng = np.random.default_rng(config.seed)

    x0_all = torch.from_numpy(np.ascontiguousarray(data.transpose(0, 3, 1, 2))).float()
    ab = torch.from_numpy(schedule.alpha_bar[1:].copy()).float()  # index t-1

    history: list[float] = []
    steps_per_epoch = max(1, n // config.batch_size)
    net.train()
    for epoch in range(config.epochs):
        for step in range(steps_per_epoch):
            idx = rng.integers(0, n, size=config.batch_size)
            t = torch.from_numpy(rng.integers(1, schedule.T + 1, size=config.batch_size))
            x0 = x0_all[idx]
            eps = torch.from_numpy(
                rng.standard_normal((config.batch_size, c, h, w))
            ).float()
            a = ab[t - 1][:, None, None, None]
            x_t = torch.sqrt(a) * x0 + torch.sqrt(1.0 - a) * eps

            loss = ((net(x_t, t) - eps) ** 2).mean()
            if not torch.isfinite(loss):
                raise TrainingFailure(epoch, step, float(loss.detach()))
            opt.zero_grad()
            loss.backward()
            opt.step()
            history.append(float(loss.detach()))
    net.eval()

    den = ToyDenoiser(net, T=schedule.T, event_shape=(h, w, c), seed=config.seed)
    den.loss_history = history
    return den


def heldout_epsilon_mse(
    denoiser: ToyDenoiser, dataset: np.ndarray, schedule: Schedule, draws: int, seed: int = 1234
) -> float:
    """Mean squared error between true and predicted noise on fresh draws;
    compare against 1.0 (the variance of the noise itself)."""
    data = _as_batch(dataset)
    rng = GaussianNoiseSource(seed)
    pick = np.random.default_rng(seed)
    total = 0.0
    for _ in range(draws):
        x0 = data[pick.integers(0, len(data))]
        t = int(pick.integers(1, schedule.T + 1))
        eps = rng.normal(x0.shape)
        x_t = forward_jump(schedule, x0, t, eps)
        eps_hat = denoiser.predict(x_t, t).epsilon_hat
        total += float(np.mean((eps_hat - eps) ** 2))
    return total / draws


def make_two_shape_dataset(
    n: int, size: int = 32, channels: int = 1, seed: int = 0
) -> np.ndarray:
    """Synthetic training images: one filled rectangle and one filled disk at
    random positions and shades on a dark background. Values in [-1, 1]."""
    rng = np.random.default_rng(seed)
    images = np.full((n, size, size, channels), -0.8)
    yy, xx = np.mgrid[0:size, 0:size]
    for i in range(n):
        rw, rh = rng.integers(size // 4, size // 2, size=2)
        rx, ry = rng.integers(0, size - rw), rng.integers(0, size - rh)
        shade = rng.uniform(-0.2, 1.0, size=channels)
        images[i, ry : ry + rh, rx : rx + rw] = shade

        r = int(rng.integers(size // 8, size // 4))
        cx, cy = rng.integers(r, size - r, size=2)
        disk = (yy - cy) ** 2 + (xx - cx) ** 2 <= r * r
        images[i][disk] = rng.uniform(-0.2, 1.0, size=channels)
    return images
