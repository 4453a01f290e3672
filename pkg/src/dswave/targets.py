"""Test-function targets on the unit torus and their Fourier representations.

Each target provides exact spatial evaluation plus its Fourier coefficients
T(k) at integer frequencies (the torus makes these the exact transform).
Cosine and GaussianBlob have closed forms; ZonePlate and Stripes use a
one-time 512x512 DFT of the analytic function, treated as exact (both are
effectively band-limited far inside the 512-sample Nyquist).
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np

__all__ = [
    "TargetFunction",
    "cosine",
    "gaussian_blob",
    "zone_plate",
    "zone_plate_for_width",
    "stripes",
]

_DENSE_N = 512


@dataclass(frozen=True)
class TargetFunction:
    """kind: 'cosine' | 'gaussian_blob' | 'zone_plate' | 'stripes'.

    param means: cosine/stripes -> normalized frequency nu_c (absolute
    frequency is nu_c * sqrt(lambda)); gaussian_blob -> spatial sigma;
    zone_plate -> chirp rate alpha in t = (1 + cos(alpha * |x|^2)) / 2.
    """

    kind: str
    param: float

    def values(self, points: np.ndarray, lam: float) -> np.ndarray:
        """Exact t(x) at an (N, 2) array of torus points."""
        points = np.asarray(points, dtype=float)
        x, y = points[..., 0], points[..., 1]
        if self.kind == "cosine":
            a = self.param * np.sqrt(lam)
            return np.cos(2.0 * np.pi * a * y)
        if self.kind == "stripes":
            a = self.param * np.sqrt(lam)
            return (np.cos(2.0 * np.pi * a * y) >= 0.0).astype(float)
        if self.kind == "zone_plate":
            r2 = x * x + y * y
            return 0.5 * (1.0 + np.cos(self.param * r2))
        if self.kind == "gaussian_blob":
            sigma = self.param
            total = np.zeros_like(x)
            for mx in (-1.0, 0.0, 1.0):
                for my in (-1.0, 0.0, 1.0):
                    dx = x - 0.5 + mx
                    dy = y - 0.5 + my
                    total += np.exp(-(dx * dx + dy * dy) / (2.0 * sigma * sigma))
            return total
        raise ValueError(f"unknown target kind {self.kind!r}")

    # ---- Fourier representations ------------------------------------

    def fourier_grid(self, m: int, lam: float) -> np.ndarray:
        """T(k) for k1, k2 in [-m, m], index [k1 + m, k2 + m]."""
        size = 2 * m + 1
        ks = np.arange(-m, m + 1)
        if self.kind == "cosine":
            t = np.zeros((size, size), dtype=complex)
            t[m, :] = _cosine_line(ks, self.param * np.sqrt(lam))
            return t
        if self.kind == "gaussian_blob":
            sigma = self.param
            k1 = ks[:, None]
            k2 = ks[None, :]
            mag = 2.0 * np.pi * sigma * sigma * np.exp(
                -2.0 * np.pi**2 * sigma**2 * (k1 * k1 + k2 * k2))
            phase = np.exp(-2.0j * np.pi * 0.5 * (k1 + k2))
            return mag * phase
        if self.kind in ("zone_plate", "stripes"):
            if m > _DENSE_N // 2 - 1:
                raise ValueError(f"frequency window {m} exceeds the dense "
                                 f"representation ({_DENSE_N // 2 - 1})")
            dense = _dense_fourier(self.kind, self.param, lam)
            c = _DENSE_N // 2
            return dense[c - m:c + m + 1, c - m:c + m + 1]
        raise ValueError(f"unknown target kind {self.kind!r}")

    def power_grid(self, m: int, lam: float) -> np.ndarray:
        """P_t(k) = |T(k)|^2 on the same window as fourier_grid."""
        t = self.fourier_grid(m, lam)
        return (t * np.conj(t)).real

    def power_reach(self, lam: float, tail: float = 1e-12) -> int:
        """Window half-width that captures P_t up to a relative tail."""
        if self.kind == "cosine":
            a = self.param * np.sqrt(lam)
            # the wrap-discontinuity sidelobes decay like 1/(q -+ a)^2
            return int(np.ceil(a)) + 64
        if self.kind == "gaussian_blob":
            sigma = self.param
            return int(np.ceil(np.sqrt(-np.log(tail) / (4.0 * np.pi**2 * sigma**2)))) + 1
        dense = _dense_fourier(self.kind, self.param, lam)
        power = (dense * np.conj(dense)).real
        c = _DENSE_N // 2
        ks = np.arange(-c, _DENSE_N - c)
        radius = np.maximum(np.abs(ks)[:, None], np.abs(ks)[None, :])
        total = power.sum()
        for reach in range(1, c):
            if power[radius > reach].sum() <= tail * total:
                return reach
        return c - 1


def cosine(nu_c: float) -> TargetFunction:
    return TargetFunction(kind="cosine", param=float(nu_c))


def gaussian_blob(sigma: float) -> TargetFunction:
    if sigma <= 0:
        raise ValueError("sigma must be positive")
    return TargetFunction(kind="gaussian_blob", param=float(sigma))


def zone_plate(alpha: float) -> TargetFunction:
    return TargetFunction(kind="zone_plate", param=float(alpha))


def zone_plate_for_width(width: int) -> TargetFunction:
    """Chirp rate set so the far-corner instantaneous frequency is 1.5x the
    pixel Nyquist of a width-pixel image."""
    return zone_plate(1.5 * np.pi * width / (2.0 * np.sqrt(2.0)))


def stripes(nu_c: float) -> TargetFunction:
    return TargetFunction(kind="stripes", param=float(nu_c))


def _cosine_line(qs: np.ndarray, a: float) -> np.ndarray:
    """Exact torus Fourier coefficients of cos(2 pi a y) along k1 = 0.

    c(q) = 0.5 * (D(q - a) + D(q + a)) with D(b) = exp(-i pi b) sinc(b);
    for integer a this collapses to the two pure lines at q = +-a.
    """
    def d(b):
        return np.exp(-1.0j * np.pi * b) * np.sinc(b)

    return 0.5 * (d(qs - a) + d(qs + a))


@functools.lru_cache(maxsize=8)
def _dense_fourier(kind: str, param: float, lam: float) -> np.ndarray:
    """512x512 Fourier coefficients via a midpoint-sampled DFT,
    centered so index [256 + k1, 256 + k2] holds T(k1, k2)."""
    n = _DENSE_N
    centers = (np.arange(n) + 0.5) / n
    xx, yy = np.meshgrid(centers, centers, indexing="ij")
    pts = np.column_stack([xx.ravel(), yy.ravel()])
    t = TargetFunction(kind=kind, param=param).values(pts, lam).reshape(n, n)
    coeff = np.fft.fft2(t) / (n * n)
    k = np.fft.fftfreq(n, d=1.0 / n)  # 0, 1, ..., -1 ordering
    phase = np.exp(-1.0j * np.pi * k / n)  # half-pixel center offset
    coeff = coeff * phase[:, None] * phase[None, :]
    return np.fft.fftshift(coeff)
