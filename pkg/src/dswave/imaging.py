"""Sample -> filter -> resample image pipeline plus PGM output.

Images are square, pixel centers at ((i + 0.5)/W, (j + 0.5)/W) on the unit
torus; i indexes rows (the first point coordinate), j columns.  Pixel values
stay unclamped floats through the pipeline; clamping and quantization happen
only when writing PGM bytes.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import erf

from .points import PointSet
from .targets import TargetFunction

__all__ = [
    "ImageGrid",
    "RenderConfig",
    "render",
    "reference_image",
    "band_energy",
    "write_image",
    "read_image",
    "write_pixels_csv",
]

# Gaussian splat support: per-axis offset between sample and pixel center,
# in pixels.  A 3-pixel box centered on the sample.
_SUPPORT_PX = 1.5


@dataclass(frozen=True)
class ImageGrid:
    """Square pixel grid; centers at ((i + 0.5)/W, (j + 0.5)/W)."""

    width: int

    def __post_init__(self) -> None:
        if self.width < 8:
            raise ValueError("width must be >= 8 pixels")

    def pixel_centers(self) -> np.ndarray:
        """(W, W, 2) array of pixel-center coordinates."""
        c = (np.arange(self.width) + 0.5) / self.width
        out = np.empty((self.width, self.width, 2))
        out[..., 0] = c[:, np.newaxis]
        out[..., 1] = c[np.newaxis, :]
        return out


@dataclass
class RenderConfig:
    """One reconstruction: which target, how many samples, which filter."""

    target: TargetFunction
    width: int
    spp: int = 1
    filter_sigma_px: float = 0.5
    normalization: str = "weightsum"  # or "unbiased"

    def __post_init__(self) -> None:
        if self.width < 8:
            raise ValueError("width must be >= 8 pixels")
        if self.spp < 1:
            raise ValueError("spp must be >= 1")
        if self.filter_sigma_px <= 0.0:
            raise ValueError("filter_sigma_px must be positive")
        if self.normalization not in ("weightsum", "unbiased"):
            raise ValueError(f"unknown normalization {self.normalization!r}")

    @property
    def n_points(self) -> int:
        return self.spp * self.width**2


def _truncated_kernel_mass(sigma_px: float) -> float:
    """Integral of the 2D Gaussian over its truncation box, in pixel units."""
    half = erf(_SUPPORT_PX / (sigma_px * math.sqrt(2.0)))
    return float(half) ** 2


def render(config: RenderConfig, points: PointSet) -> np.ndarray:
    """Reconstruct the target from point samples.

    value(c) = sum_j k(c - x_j) t(x_j) / Z with a Gaussian k of
    ``filter_sigma_px`` pixels, truncated to a 3x3-pixel box around each
    sample, distances wrapped on the torus.  Z is lambda * integral(k) for
    "unbiased" (constant, so the estimate is an unbiased density estimate)
    or the local weight sum for "weightsum" (exact for constant targets).
    Pixels a weightsum render leaves uncovered come out 0.
    """
    w = config.width
    n = config.n_points
    if points.n != n:
        raise ValueError(
            f"point count {points.n} does not match spp*width^2 = {n}"
        )
    sigma = config.filter_sigma_px
    t_vals = config.target.values(points.points, float(n))

    # Pixel-index space: sample at p has nearby pixel centers at integers.
    pos = points.points * w - 0.5
    base = np.floor(pos - _SUPPORT_PX).astype(np.intp)
    num = np.zeros(w * w)
    den = np.zeros(w * w)
    # Up to 4 candidate centers per axis cover every offset <= 1.5 px.
    for di in range(4):
        ii = base[:, 0] + di
        dx = ii - pos[:, 0]
        kx = np.where(
            np.abs(dx) <= _SUPPORT_PX, np.exp(-0.5 * (dx / sigma) ** 2), 0.0
        )
        for dj in range(4):
            jj = base[:, 1] + dj
            dy = jj - pos[:, 1]
            ky = np.where(
                np.abs(dy) <= _SUPPORT_PX, np.exp(-0.5 * (dy / sigma) ** 2), 0.0
            )
            kk = kx * ky
            flat = (ii % w) * w + (jj % w)
            np.add.at(num, flat, kk * t_vals)
            np.add.at(den, flat, kk)

    if config.normalization == "unbiased":
        # k above is unit-peak; the unit-mass kernel divides by 2 pi sigma^2
        # (pixel units).  Z = lambda * integral(k_trunc) in unit coordinates:
        # lambda/W^2 is the mean sample count per pixel cell.
        z = (n / w**2) * _truncated_kernel_mass(sigma) * 2.0 * math.pi * sigma**2
        pixels = num / z
    else:
        pixels = np.divide(num, den, out=np.zeros_like(num), where=den > 0.0)
    return pixels.reshape(w, w)


def reference_image(
    target: TargetFunction, width: int, n_points: float
) -> np.ndarray:
    """Target evaluated exactly at the pixel centers."""
    centers = ImageGrid(width).pixel_centers().reshape(-1, 2)
    return target.values(centers, float(n_points)).reshape(width, width)


def band_energy(
    image: np.ndarray,
    reference: np.ndarray,
    band: tuple[float, float],
) -> float:
    """Mean-square content of (image - reference) in a frequency annulus.

    Frequencies are in cycles per pixel (axis Nyquist 0.5, corner ~0.707);
    the annulus is nu_lo <= |k|/W <= nu_hi.  Normalization makes the
    full-spectrum value equal mean((image - reference)^2), so bands
    partition the total squared error.
    """
    image = np.asarray(image, dtype=float)
    reference = np.asarray(reference, dtype=float)
    if image.shape != reference.shape or image.ndim != 2:
        raise ValueError("image and reference must be 2D arrays of equal shape")
    lo, hi = band
    if not (0.0 <= lo < hi):
        raise ValueError("band must satisfy 0 <= lo < hi")
    if hi > math.sqrt(0.5) + 1e-12:
        raise ValueError("band upper edge exceeds the corner Nyquist sqrt(1/2)")
    w = image.shape[0]
    diff = image - reference
    spectrum = np.abs(np.fft.fft2(diff)) ** 2
    freq = np.fft.fftfreq(w)  # cycles per pixel
    radius = np.hypot(freq[:, np.newaxis], freq[np.newaxis, :])
    mask = (radius >= lo) & (radius <= hi)
    return float(spectrum[mask].sum() / w**4)


def write_image(path, pixels: np.ndarray) -> None:
    """Write binary PGM (P5, maxval 255): round-half-up of 255*clamp(v,0,1)."""
    pixels = np.asarray(pixels, dtype=float)
    if pixels.ndim != 2:
        raise ValueError("pixels must be a 2D array")
    h, w = pixels.shape
    quantized = np.floor(255.0 * np.clip(pixels, 0.0, 1.0) + 0.5).astype(np.uint8)
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(quantized.tobytes())
    except OSError as exc:
        raise OSError(f"cannot write image {path}: {exc}") from exc


def read_image(path) -> np.ndarray:
    """Read a binary PGM written by write_image; returns uint8 (H, W)."""
    try:
        with open(path, "rb") as fh:
            data = fh.read()
    except OSError as exc:
        raise OSError(f"cannot read image {path}: {exc}") from exc
    # Header: magic, width, height, maxval, single whitespace, then payload.
    fields: list[bytes] = []
    i = 0
    while len(fields) < 4:
        while i < len(data) and data[i : i + 1].isspace():
            i += 1
        j = i
        while j < len(data) and not data[j : j + 1].isspace():
            j += 1
        if i == j:
            raise ValueError(f"truncated PGM header in {path}")
        fields.append(data[i:j])
        i = j
    i += 1  # exactly one whitespace byte before the payload
    if fields[0] != b"P5":
        raise ValueError(f"{path} is not binary PGM (magic {fields[0]!r})")
    w, h, maxval = int(fields[1]), int(fields[2]), int(fields[3])
    if maxval != 255:
        raise ValueError(f"unsupported maxval {maxval} in {path}")
    payload = data[i : i + w * h]
    if len(payload) != w * h:
        raise ValueError(f"truncated PGM payload in {path}")
    return np.frombuffer(payload, dtype=np.uint8).reshape(h, w)


def write_pixels_csv(path, pixels: np.ndarray) -> None:
    """Dump raw (unclamped) pixel values, one CSV row per image row."""
    pixels = np.asarray(pixels, dtype=float)
    with open(path, "w", encoding="ascii") as fh:
        for row in pixels:
            fh.write(",".join(f"{v:.9g}" for v in row) + "\n")
