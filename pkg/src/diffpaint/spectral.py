"""Fourier analysis of the forward process: per-band signal-to-noise along
the schedule, locating the timestep at which each spatial-frequency band of
an image is drowned by the accumulated noise.

Conventions: power at a frequency bin is |F|^2 / N^2 for an N-pixel image,
so total power equals the pixel mean square and the DC term equals the
squared pixel mean. Radial bands are linear in |f| (cycles/image) from 0 to
the Nyquist ring; corner frequencies beyond the ring fold into the top band
so the band decomposition is exhaustive.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np

from .schedule import GaussianNoiseSource, Schedule


@dataclass(frozen=True)
class RadialSpectrum:
    """Mean power per annular frequency band; band k covers
    (band_edges[k], band_edges[k+1]]. ``counts`` holds annulus sizes in bins
    so the total non-DC power can be reassembled exactly."""

    band_edges: np.ndarray
    power: np.ndarray
    counts: np.ndarray

    @property
    def n_bands(self) -> int:
        return len(self.power)

    def total_power(self) -> float:
        """Sum over bands weighted by annulus size = total power minus DC."""
        return float(np.sum(self.power * self.counts))


@dataclass(frozen=True)
class CorruptionProfile:
    """snr[band, t-1] = alpha_bar_t * P_signal(band) over
    (1 - alpha_bar_t) * P_noise(band); crossover is the smallest t with
    snr <= 1, or T + 1 if the band never crosses."""

    band_edges: np.ndarray
    snr: np.ndarray  # (n_bands, T)
    crossover: np.ndarray  # (n_bands,)
    T: int


def _radial_grid(height: int, width: int) -> tuple[np.ndarray, float]:
    fy = np.fft.fftfreq(height) * height  # integer cycles/image
    fx = np.fft.fftfreq(width) * width
    radius = np.sqrt(fy[:, None] ** 2 + fx[None, :] ** 2)
    nyquist = min(height, width) / 2.0
    return radius, nyquist


def _power2d(image: np.ndarray) -> np.ndarray:
    image = np.asarray(image, dtype=np.float64)
    if image.ndim == 3:
        image = image.mean(axis=-1)
    if image.ndim != 2:
        raise ValueError(f"expected a 2-D image, got shape {image.shape}")
    if image.shape[0] < 8 or image.shape[1] < 8:
        raise ValueError(f"image dimensions {image.shape} below the 8x8 minimum")
    n = image.size
    F = np.fft.fft2(image)
    return np.abs(F) ** 2 / float(n) ** 2


def radial_power_spectrum(image: np.ndarray, n_bands: int = 16) -> RadialSpectrum:
    """2-D DFT power averaged over annuli of radius |f|."""
    if n_bands < 4:
        raise ValueError("need at least 4 bands")
    power2d = _power2d(image)
    radius, nyquist = _radial_grid(*power2d.shape)

    edges = np.linspace(0.0, nyquist, n_bands + 1)
    idx = np.searchsorted(edges, radius, side="left") - 1
    idx = np.clip(idx, 0, n_bands - 1)  # corners fold into the top band
    idx[radius == 0.0] = -1  # DC excluded

    power = np.zeros(n_bands)
    counts = np.zeros(n_bands)
    for k in range(n_bands):
        sel = idx == k
        counts[k] = int(np.count_nonzero(sel))
        power[k] = power2d[sel].mean() if counts[k] else 0.0
    return RadialSpectrum(band_edges=edges, power=power, counts=counts)


def expected_noise_spectrum(
    height: int, width: int, n_bands: int = 16, sigma: float = 1.0
) -> RadialSpectrum:
    """Analytic expectation for i.i.d. N(0, sigma^2) pixels: flat power of
    sigma^2 / (H * W) in every bin."""
    radius, nyquist = _radial_grid(height, width)
    edges = np.linspace(0.0, nyquist, n_bands + 1)
    idx = np.searchsorted(edges, radius, side="left") - 1
    idx = np.clip(idx, 0, n_bands - 1)
    idx[radius == 0.0] = -1
    counts = np.array([np.count_nonzero(idx == k) for k in range(n_bands)], dtype=float)
    level = sigma**2 / float(height * width)
    return RadialSpectrum(band_edges=edges, power=np.full(n_bands, level), counts=counts)


def sampled_noise_spectrum(
    height: int,
    width: int,
    n_bands: int = 16,
    sigma: float = 1.0,
    rng: GaussianNoiseSource | None = None,
    draws: int = 16,
) -> RadialSpectrum:
    """Monte-Carlo validation mode for :func:`expected_noise_spectrum`."""
    rng = rng or GaussianNoiseSource(0)
    acc = None
    for _ in range(draws):
        spec = radial_power_spectrum(sigma * rng.normal((height, width)), n_bands)
        acc = spec.power if acc is None else acc + spec.power
    return RadialSpectrum(band_edges=spec.band_edges, power=acc / draws, counts=spec.counts)


def corruption_profile(
    spectrum: RadialSpectrum, schedule: Schedule, noise_spectrum: RadialSpectrum
) -> CorruptionProfile:
    """Per-band SNR along the schedule and the crossover timestep per band."""
    if len(spectrum.band_edges) != len(noise_spectrum.band_edges) or not np.allclose(
        spectrum.band_edges, noise_spectrum.band_edges
    ):
        raise ValueError("signal and noise spectra must share the band grid")
    if np.any(noise_spectrum.power <= 0.0):
        raise ValueError("noise power must be positive in every band")

    T = schedule.T
    ab = schedule.alpha_bar[1:]  # (T,)
    ratio = spectrum.power / noise_spectrum.power  # (n_bands,)
    snr = ratio[:, None] * (ab / (1.0 - ab))[None, :]

    crossover = np.full(spectrum.n_bands, T + 1, dtype=int)
    for k in range(spectrum.n_bands):
        hits = np.nonzero(snr[k] <= 1.0)[0]
        if len(hits):
            crossover[k] = int(hits[0]) + 1  # timesteps are 1-based
    return CorruptionProfile(
        band_edges=spectrum.band_edges, snr=snr, crossover=crossover, T=T
    )


def highband_energy(image: np.ndarray, cutoff_fraction: float) -> float:
    """Fraction of non-DC spectral power above cutoff_fraction * Nyquist.
    A scalar sharpness proxy: blurring strictly lowers it."""
    if not 0.0 < cutoff_fraction < 1.0:
        raise ValueError("cutoff_fraction must lie in (0, 1)")
    power2d = _power2d(image)
    radius, nyquist = _radial_grid(*power2d.shape)
    non_dc = radius > 0.0
    total = power2d[non_dc].sum()
    if total == 0.0:
        return 0.0
    return float(power2d[radius > cutoff_fraction * nyquist].sum() / total)


def profile_to_csv(profile: CorruptionProfile) -> str:
    """Rows of (band, t, snr) for every band and timestep."""
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(["band", "t", "snr"])
    for k in range(len(profile.crossover)):
        for t in range(1, profile.T + 1):
            writer.writerow([k, t, f"{profile.snr[k, t - 1]:.8g}"])
    return buf.getvalue()


def profile_summary(profile: CorruptionProfile) -> dict:
    """JSON summary: crossover timestep per band (T + 1 means never)."""
    return {
        "T": profile.T,
        "band_edges": profile.band_edges.tolist(),
        "crossover": {str(k): int(c) for k, c in enumerate(profile.crossover)},
    }


def render_heat_table(profile: CorruptionProfile, columns: int = 60) -> str:
    """ASCII heat table: bands as rows (low frequency first), time running
    left to right, one glyph per cell by log10 SNR."""
    glyphs = " .:-=+*#%@"
    n_bands, T = profile.snr.shape
    columns = min(columns, T)
    t_cols = np.linspace(1, T, columns).astype(int)
    lines = [f"snr heat table (rows: frequency bands, cols: t=1..{T})"]
    for k in range(n_bands):
        row = []
        for t in t_cols:
            s = profile.snr[k, t - 1]
            level = int(np.clip((np.log10(max(s, 1e-30)) + 2.0) / 4.0 * (len(glyphs) - 1), 0, len(glyphs) - 1))
            row.append(glyphs[level])
        cross = profile.crossover[k]
        label = f"t={cross}" if cross <= T else "never"
        lines.append(f"band {k:2d} |{''.join(row)}| crossover {label}")
    return "\n".join(lines) + "\n"


def profile_summary_json(profile: CorruptionProfile) -> str:
    return json.dumps(profile_summary(profile), indent=2)
