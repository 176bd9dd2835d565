"""Build a sampler composition from user intent: landmark patches placed at
canvas coordinates, with the keep-mask derived from their footprints.

Pixel values map linearly between [0, 255] bytes and [-1, 1] reals; masks
are strictly binary. Image arrays are (H, W, C) float64 with C of 1 or 3;
patches may carry an alpha channel (C of 2 or 4) controlling mask membership.
"""

from __future__ import annotations

import base64
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image

from .sampler import CompositionInput

ALPHA_THRESHOLD = 0.5


@dataclass
class Placement:
    """One landmark patch at integer top-left canvas coordinates."""

    patch: np.ndarray
    x: int
    y: int
    z_order: int = 0

    def __post_init__(self):
        self.patch = np.asarray(self.patch, dtype=np.float64)
        if self.patch.ndim == 2:
            self.patch = self.patch[:, :, None]
        if self.patch.ndim != 3 or self.patch.shape[2] not in (1, 2, 3, 4):
            raise ValueError(f"patch must be (H, W[, C<=4]), got {self.patch.shape}")
        if self.patch.shape[0] == 0 or self.patch.shape[1] == 0:
            raise ValueError("zero-size patch")

    def color_and_alpha(self) -> tuple[np.ndarray, np.ndarray]:
        """Split into color planes in [-1, 1] and alpha in [0, 1] (opaque
        when the patch has no alpha channel)."""
        c = self.patch.shape[2]
        if c in (2, 4):
            return self.patch[:, :, : c - 1], self.patch[:, :, c - 1]
        return self.patch, np.ones(self.patch.shape[:2])


@dataclass
class CompositionSpec:
    """Canvas dimensions plus an ordered list of placements. ``channels``
    pins the canvas depth; left unset it follows the patches (3 if any is
    color, else 1)."""

    canvas_width: int
    canvas_height: int
    placements: list[Placement] = field(default_factory=list)
    background: float = 0.0
    channels: int | None = None

    def __post_init__(self):
        if self.canvas_width < 1 or self.canvas_height < 1:
            raise ValueError("canvas dimensions must be positive")
        if self.channels not in (None, 1, 3):
            raise ValueError("channels must be 1 or 3")


def rasterize(spec: CompositionSpec) -> CompositionInput:
    """Paint placements onto a background-filled canvas in z-order, clipped
    to the bounds; the mask is 1 exactly where an opaque patch pixel landed.

    Placements entirely outside the canvas produce a warning in the result
    metadata instead of failing, matching how a canvas UI behaves.
    """
    h, w = spec.canvas_height, spec.canvas_width
    channels = spec.channels
    if channels is None:
        channels = 3 if any(p.patch.shape[2] in (3, 4) for p in spec.placements) else 1

    canvas = np.full((h, w, channels), float(spec.background))
    mask2d = np.zeros((h, w))
    warnings: list[str] = []

    order = sorted(range(len(spec.placements)), key=lambda i: spec.placements[i].z_order)
    for i in order:
        pl = spec.placements[i]
        color, alpha = pl.color_and_alpha()
        ph, pw = color.shape[:2]
        x0, y0 = max(pl.x, 0), max(pl.y, 0)
        x1, y1 = min(pl.x + pw, w), min(pl.y + ph, h)
        if x0 >= x1 or y0 >= y1:
            warnings.append(f"placement {i} at ({pl.x}, {pl.y}) lies entirely outside the canvas")
            continue
        sub_c = color[y0 - pl.y : y1 - pl.y, x0 - pl.x : x1 - pl.x]
        sub_a = alpha[y0 - pl.y : y1 - pl.y, x0 - pl.x : x1 - pl.x]
        if sub_c.shape[2] == 1 and channels == 3:
            sub_c = np.repeat(sub_c, 3, axis=2)
        elif sub_c.shape[2] == 3 and channels == 1:
            sub_c = sub_c.mean(axis=2, keepdims=True)
        opaque = sub_a >= ALPHA_THRESHOLD
        region_canvas = canvas[y0:y1, x0:x1]
        region_canvas[opaque] = sub_c[opaque]
        mask2d[y0:y1, x0:x1][opaque] = 1.0

    mask = np.repeat(mask2d[:, :, None], channels, axis=2)
    return CompositionInput(known=canvas, mask=mask, warnings=warnings)


def _to_unit_range(arr8: np.ndarray) -> np.ndarray:
    return 2.0 * arr8.astype(np.float64) / 255.0 - 1.0


def _quantize(img: np.ndarray) -> np.ndarray:
    """Invert the [-1, 1] mapping with round-half-up clamping to [0, 255]."""
    v = (np.asarray(img, dtype=np.float64) + 1.0) * 255.0 / 2.0
    return np.clip(np.floor(v + 0.5), 0.0, 255.0).astype(np.uint8)


def load_image(source: str | Path | io.IOBase, keep_alpha: bool = False) -> np.ndarray:
    """Read an 8-bit PNG into (H, W, C) float64 in [-1, 1].

    C is 1 (grayscale) or 3 (RGB); with ``keep_alpha`` the alpha channel is
    appended scaled to [0, 1] (C of 2 or 4).
    """
    try:
        with Image.open(source) as pil:
            pil.load()
            mode = pil.mode
            if mode in ("L", "RGB", "LA", "RGBA"):
                img = pil
            elif mode in ("P", "PA", "1", "I;16", "I", "F"):
                img = pil.convert("RGBA" if "A" in mode or "transparency" in pil.info else "RGB")
            else:
                img = pil.convert("RGB")
            arr = np.asarray(img, dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise OSError(f"cannot read image {source!r}: {exc}") from exc

    if arr.ndim == 2:
        arr = arr[:, :, None]
    c = arr.shape[2]
    if c in (2, 4):
        color = _to_unit_range(arr[:, :, : c - 1])
        if keep_alpha:
            return np.concatenate([color, arr[:, :, c - 1 :] / 255.0], axis=2)
        return color
    return _to_unit_range(arr)


def save_image(img: np.ndarray, path: str | Path) -> None:
    """Write (H, W), (H, W, 1) or (H, W, 3) values in [-1, 1] as 8-bit PNG."""
    img = np.asarray(img, dtype=np.float64)
    if img.ndim == 2:
        img = img[:, :, None]
    if img.ndim != 3 or img.shape[2] not in (1, 3):
        raise ValueError(f"cannot save image of shape {img.shape}")
    arr8 = _quantize(img)
    mode = "L" if arr8.shape[2] == 1 else "RGB"
    Image.fromarray(arr8.squeeze(axis=2) if mode == "L" else arr8, mode=mode).save(path, "PNG")


def encode_png(img: np.ndarray) -> bytes:
    buf = io.BytesIO()
    save_image(img, buf)
    return buf.getvalue()


def image_to_data_url(img: np.ndarray) -> str:
    return "data:image/png;base64," + base64.b64encode(encode_png(img)).decode()


def load_mask(source: str | Path | io.IOBase, expected_shape: tuple[int, int] | None = None) -> np.ndarray:
    """Read a grayscale PNG as a binary (H, W) mask: byte >= 128 keeps."""
    try:
        with Image.open(source) as pil:
            arr = np.asarray(pil.convert("L"), dtype=np.float64)
    except (OSError, ValueError) as exc:
        raise OSError(f"cannot read mask {source!r}: {exc}") from exc
    if expected_shape is not None and arr.shape != tuple(expected_shape):
        raise ValueError(f"mask shape {arr.shape} does not match image {tuple(expected_shape)}")
    return (arr >= 128.0).astype(np.float64)


def _load_placement_image(ref: str, base_dir: Path | None) -> np.ndarray:
    if ref.startswith("data:"):
        payload = ref.split(",", 1)[1]
        return load_image(io.BytesIO(base64.b64decode(payload)), keep_alpha=True)
    path = Path(ref)
    if base_dir is not None and not path.is_absolute():
        path = base_dir / path
    return load_image(path, keep_alpha=True)


def spec_to_json(spec: CompositionSpec) -> str:
    """Serialize with patches inlined as PNG data URLs; this document is the
    contract shared by the CLI, service, and UI."""
    placements = []
    for pl in spec.placements:
        c = pl.patch.shape[2]
        if c in (2, 4):
            color, alpha = pl.color_and_alpha()
            rgba = np.concatenate(
                [np.repeat(color, 3, axis=2) if color.shape[2] == 1 else color, alpha[:, :, None] * 2.0 - 1.0],
                axis=2,
            )
            arr8 = _quantize(rgba)
            png = io.BytesIO()
            Image.fromarray(arr8, mode="RGBA").save(png, "PNG")
            url = "data:image/png;base64," + base64.b64encode(png.getvalue()).decode()
        else:
            url = image_to_data_url(pl.patch)
        placements.append({"image": url, "x": pl.x, "y": pl.y, "z": pl.z_order})
    doc = {
        "canvas": {"w": spec.canvas_width, "h": spec.canvas_height},
        "placements": placements,
        "background": spec.background,
    }
    if spec.channels is not None:
        doc["channels"] = spec.channels
    return json.dumps(doc)


def spec_from_json(doc: str | dict, base_dir: str | Path | None = None) -> CompositionSpec:
    """Parse the composition document; placement images may be file paths
    (resolved against ``base_dir``) or inline PNG data URLs."""
    data = json.loads(doc) if isinstance(doc, str) else doc
    base = Path(base_dir) if base_dir is not None else None
    try:
        canvas = data["canvas"]
        placements = [
            Placement(
                patch=_load_placement_image(p["image"], base),
                x=int(p["x"]),
                y=int(p["y"]),
                z_order=int(p.get("z", 0)),
            )
            for p in data.get("placements", [])
        ]
        return CompositionSpec(
            canvas_width=int(canvas["w"]),
            canvas_height=int(canvas["h"]),
            placements=placements,
            background=float(data.get("background", 0.0)),
            channels=data.get("channels"),
        )
    except (KeyError, TypeError) as exc:
        raise ValueError(f"malformed composition document: {exc}") from exc
