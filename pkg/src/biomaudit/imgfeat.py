"""Image-based quality features: resolution, luminosity and blurriness."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import TooSmall
from .ingest import PixelBuffer

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

KERNELS = {
    "4n": np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]], dtype=float),
    "8n": np.array([[1, 1, 1], [1, -8, 1], [1, 1, 1]], dtype=float),
}


@dataclass(frozen=True)
class ImageFeatures:
    resolution: int
    luminosity: float
    blurriness: float


def _rgb(img) -> np.ndarray:
    px = img.pixels if isinstance(img, PixelBuffer) else np.asarray(img)
    return px.astype(float)


def resolution(img) -> int:
    px = img.pixels if isinstance(img, PixelBuffer) else np.asarray(img)
    return int(px.shape[0]) * int(px.shape[1])


def luminosity(img, weights=LUMA_WEIGHTS) -> float:
    """Mean perceived brightness ``sqrt(wR R^2 + wG G^2 + wB B^2)`` over pixels."""
    rgb = _rgb(img)
    w = np.asarray(weights, dtype=float)
    return float(np.mean(np.sqrt((rgb**2) @ w)))


def grayscale(img, weights=LUMA_WEIGHTS) -> np.ndarray:
    """Real-valued luma, unquantized. 2-D input is returned as float unchanged."""
    arr = _rgb(img)
    if arr.ndim == 2:
        return arr
    return arr @ np.asarray(weights, dtype=float)


def laplacian(gray: np.ndarray, kernel: str = "4n") -> np.ndarray:
    """Valid-region 3x3 Laplacian response, shape ``(H-2, W-2)``."""
    k = KERNELS[kernel]
    h, w = gray.shape
    out = np.zeros((h - 2, w - 2))
    # kernel is symmetric, so correlation == convolution
    for dy in range(3):
        for dx in range(3):
            if k[dy, dx]:
                out += k[dy, dx] * gray[dy : dy + h - 2, dx : dx + w - 2]
    return out


def blurriness(img, kernel: str = "4n", weights=LUMA_WEIGHTS) -> float:
    """Population variance of the Laplacian of the grayscale image.

    Accepts a PixelBuffer, an ``(H, W, 3)`` array, or an already-gray
    ``(H, W)`` array of reals.
    """
    gray = grayscale(img, weights)
    if gray.shape[0] < 3 or gray.shape[1] < 3:
        raise TooSmall(f"blurriness needs at least 3x3 pixels, got {gray.shape[1]}x{gray.shape[0]}")
    return float(np.var(laplacian(gray, kernel)))


def image_features(img: PixelBuffer, weights=LUMA_WEIGHTS, kernel: str = "4n") -> ImageFeatures:
    return ImageFeatures(resolution(img), luminosity(img, weights), blurriness(img, kernel, weights))
