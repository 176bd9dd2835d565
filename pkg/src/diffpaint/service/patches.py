"""Bundled sample landmark patches for the composer UI, generated
procedurally so the package ships no binary assets. Each patch is RGBA with
transparent surroundings so only the drawn shape enters the keep-mask."""

from __future__ import annotations

import numpy as np


def _blank(size: int) -> np.ndarray:
    patch = np.zeros((size, size, 4))
    patch[:, :, 3] = 0.0  # fully transparent
    return patch


def _paint(patch: np.ndarray, where: np.ndarray, rgb: tuple[float, float, float]) -> None:
    patch[where, 0] = rgb[0]
    patch[where, 1] = rgb[1]
    patch[where, 2] = rgb[2]
    patch[where, 3] = 1.0


def house(size: int = 20) -> np.ndarray:
    patch = _blank(size)
    yy, xx = np.mgrid[0:size, 0:size]
    body = (yy >= size // 2) & (xx >= size // 6) & (xx < size - size // 6)
    _paint(patch, body, (0.55, 0.1, -0.3))
    roof = (yy < size // 2) & (np.abs(xx - size / 2 + 0.5) <= yy * 1.1)
    _paint(patch, roof, (0.2, -0.45, -0.65))
    door = (yy >= size - size // 3) & (np.abs(xx - size / 2 + 0.5) <= size // 10)
    _paint(patch, door, (-0.45, -0.7, -0.8))
    return patch


def tree(size: int = 20) -> np.ndarray:
    patch = _blank(size)
    yy, xx = np.mgrid[0:size, 0:size]
    trunk = (yy >= size * 2 // 3) & (np.abs(xx - size / 2 + 0.5) <= size // 12)
    _paint(patch, trunk, (-0.1, -0.5, -0.75))
    r = size * 0.32
    crown = (yy - size * 0.38) ** 2 + (xx - size / 2 + 0.5) ** 2 <= r * r
    _paint(patch, crown, (-0.55, 0.35, -0.5))
    return patch


def sun(size: int = 14) -> np.ndarray:
    patch = _blank(size)
    yy, xx = np.mgrid[0:size, 0:size]
    r = size * 0.36
    disk = (yy - size / 2 + 0.5) ** 2 + (xx - size / 2 + 0.5) ** 2 <= r * r
    _paint(patch, disk, (1.0, 0.8, -0.2))
    return patch


def pond(size: int = 18) -> np.ndarray:
    patch = _blank(size)
    yy, xx = np.mgrid[0:size, 0:size]
    oval = ((yy - size / 2 + 0.5) / (size * 0.28)) ** 2 + (
        (xx - size / 2 + 0.5) / (size * 0.45)
    ) ** 2 <= 1.0
    _paint(patch, oval, (-0.5, 0.05, 0.75))
    return patch


def sample_patches() -> dict[str, np.ndarray]:
    return {"house": house(), "tree": tree(), "sun": sun(), "pond": pond()}
