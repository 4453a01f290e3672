"""Spectral measurement and reconstruction-error prediction for point sets.

Everything here works on the unit torus.  Frequencies are integer lattice
vectors k (cycles per unit square); normalized radial frequencies are
nu = |k| / sqrt(n_points), which puts the Poisson level at P = 1 and makes
results comparable across point counts.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve
from scipy.spatial import cKDTree

from .points import MAX_TOROIDAL_DISTANCE, PointSet
from .radial import PairCorrelation, RadialGrid, RadialSpectrum
from .targets import TargetFunction

__all__ = [
    "Spectrum2D",
    "ErrorSpectrum2D",
    "RadialProfile",
    "empirical_pcf",
    "empirical_power_spectrum",
    "radial_average",
    "predict_error_spectrum",
    "monte_carlo_error_spectrum",
    "filtered_error",
    "integration_variance",
    "cosine_error_ratio",
    "write_spectrum_csv",
    "write_profile_csv",
]


@dataclass
class Spectrum2D:
    """Power spectrum on the centered integer window |k1|, |k2| <= m.

    ``values[i1, i2]`` is the power at k = (i1 - m, i2 - m).  The DC cell is
    stored separately in ``dc`` (for a fixed-count set it is exactly N and
    would otherwise dwarf everything else); ``values[m, m]`` is zero.
    """

    m: int
    values: np.ndarray
    dc: float
    n_points: float
    n_sets: int = 1

    def __post_init__(self) -> None:
        side = 2 * self.m + 1
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (side, side):
            raise ValueError(
                f"values must have shape {(side, side)}, got {self.values.shape}"
            )

    def wave_numbers(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1)


@dataclass
class ErrorSpectrum2D:
    """Expected squared reconstruction error per frequency cell.

    values[i1, i2] = E(k) at k = (i1 - m, i2 - m); the DC cell is included
    (it is the variance of the integral estimate).  ``kind`` records whether
    the data came from the closed-form prediction or Monte Carlo.
    """

    m: int
    values: np.ndarray
    kind: str
    n_points: float
    realizations: int | None = None

    def __post_init__(self) -> None:
        side = 2 * self.m + 1
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (side, side):
            raise ValueError(
                f"values must have shape {(side, side)}, got {self.values.shape}"
            )
        if self.kind not in ("predicted", "monte_carlo"):
            raise ValueError(f"unknown error-spectrum kind {self.kind!r}")

    @property
    def dc(self) -> float:
        return float(self.values[self.m, self.m])

    def wave_numbers(self) -> np.ndarray:
        return np.arange(-self.m, self.m + 1)


@dataclass
class RadialProfile:
    """Radially binned view of a 2D spectrum.

    Bins that received no cells are dropped, so ``nu`` is not necessarily
    uniformly spaced.  ``stderr`` is the within-bin standard error (zero for
    single-cell bins); ``count`` is the number of cells per bin.
    """

    nu: np.ndarray
    value: np.ndarray
    stderr: np.ndarray
    count: np.ndarray = field(repr=False)


def _phase_matrix(wave_numbers: np.ndarray, coords: np.ndarray) -> np.ndarray:
    return np.exp(-2j * np.pi * np.outer(wave_numbers, coords))


def _weighted_dft(points: PointSet, weights: np.ndarray | None, m: int) -> np.ndarray:
    """sum_j w_j exp(-2 pi i k.x_j) on the centered window, via two gemms.

    The separable factorization exp(-2 pi i k.x) = exp(-2 pi i k1 x) *
    exp(-2 pi i k2 y) turns the quadratic-looking sum into
    (E1 * w) @ E2^T, which is what makes windows of a few hundred wave
    numbers practical.
    """
    ks = np.arange(-m, m + 1)
    e1 = _phase_matrix(ks, points.points[:, 0])
    e2 = _phase_matrix(ks, points.points[:, 1])
    if weights is not None:
        e1 = e1 * np.asarray(weights, dtype=float)[np.newaxis, :]
    return e1 @ e2.T


def _symmetrize(values: np.ndarray) -> np.ndarray:
    # Real inputs make the underlying transforms conjugate-symmetric; the
    # squared magnitudes must then match at k and -k.  Averaging with the
    # point reflection enforces that exactly instead of to rounding error.
    return 0.5 * (values + values[::-1, ::-1])


def empirical_power_spectrum(
    point_sets: PointSet | list[PointSet] | tuple[PointSet, ...],
    m: int,
) -> Spectrum2D:
    """Measure P(k) = |sum_j exp(-2 pi i k.x_j)|^2 / N on |k1|,|k2| <= m.

    With several point sets the per-set spectra are averaged.  The DC cell
    (exactly N per set) goes into ``Spectrum2D.dc``.
    """
    if isinstance(point_sets, PointSet):
        point_sets = [point_sets]
    if m < 1:
        raise ValueError("window half-width m must be >= 1")
    if not point_sets:
        raise ValueError("need at least one point set")

    side = 2 * m + 1
    total = np.zeros((side, side))
    dc = 0.0
    counts = 0.0
    for pts in point_sets:
        s = _weighted_dft(pts, None, m)
        p = (s.real**2 + s.imag**2) / pts.n
        dc += p[m, m]
        counts += pts.n
        p[m, m] = 0.0
        total += p
    n_sets = len(point_sets)
    values = _symmetrize(total / n_sets)
    values[values < 0.0] = 0.0
    return Spectrum2D(
        m=m,
        values=values,
        dc=dc / n_sets,
        n_points=counts / n_sets,
        n_sets=n_sets,
    )


def empirical_pcf(
    points: PointSet,
    r_grid: RadialGrid | None = None,
    smoothing_sigma: float = 0.1,
) -> PairCorrelation:
    """Estimate the pair correlation g(r) in normalized distance r = sqrt(N) d.

    ghat(r) = (1 / (2 pi r N)) * sum over ordered pairs of
    k_sigma(r - sqrt(N) d_jk), with k_sigma a Gaussian kernel.  Pair
    separations use the toroidal metric.  The estimate at r = 0 copies the
    nearest positive node (the raw formula is 0/0 there).
    """
    if r_grid is None:
        r_grid = RadialGrid.from_spacing(0.02, 4.0)
    if smoothing_sigma <= 0.0:
        raise ValueError("smoothing_sigma must be positive")
    n = points.n
    if n < 2:
        raise ValueError("need at least two points to estimate a pair correlation")

    scale = np.sqrt(n)
    reach = r_grid.max_coord + 6.0 * smoothing_sigma
    cut = min(reach / scale, MAX_TOROIDAL_DISTANCE)
    tree = cKDTree(points.points, boxsize=1.0)
    pairs = tree.query_pairs(cut, output_type="ndarray")

    # Histogram pair separations on a grid much finer than the kernel, then
    # smooth by discrete convolution; each pair is displaced by at most half
    # a histogram bin, far below the kernel width.
    bin_w = smoothing_sigma / 8.0
    n_bins = int(np.ceil(reach / bin_w)) + 1
    if pairs.shape[0]:
        delta = points.points[pairs[:, 0]] - points.points[pairs[:, 1]]
        delta -= np.round(delta)
        sep = scale * np.hypot(delta[:, 0], delta[:, 1])
        idx = np.minimum((sep / bin_w).astype(np.intp), n_bins - 1)
        counts = np.bincount(idx, minlength=n_bins).astype(float)
    else:
        counts = np.zeros(n_bins)

    half = int(np.ceil(6.0 * smoothing_sigma / bin_w))
    offsets = np.arange(-half, half + 1) * bin_w
    kernel = np.exp(-0.5 * (offsets / smoothing_sigma) ** 2)
    kernel /= smoothing_sigma * np.sqrt(2.0 * np.pi)
    density = np.convolve(counts, kernel, mode="same")

    centers = (np.arange(n_bins) + 0.5) * bin_w
    r = r_grid.coords
    g = np.interp(r, centers, density)
    positive = r > 0.0
    g[positive] = 2.0 * g[positive] / (2.0 * np.pi * r[positive] * n)
    if not positive.all():
        first = int(np.argmax(positive))
        g[~positive] = g[first]
    return PairCorrelation(grid=r_grid, g_values=g)


def radial_average(
    spectrum: Spectrum2D | ErrorSpectrum2D,
    n_points_for_norm: float | None = None,
    bin_width: float = 0.02,
    include_dc: bool = False,
) -> RadialProfile:
    """Average a 2D spectrum over annuli of normalized frequency.

    Cells are binned by nu = |k| / sqrt(n_points_for_norm) into bins of the
    given width; each bin reports the cell mean, the within-bin standard
    error, and the cell count.  The DC cell is excluded unless asked for.
    """
    lam = float(n_points_for_norm) if n_points_for_norm is not None else float(
        spectrum.n_points
    )
    if lam <= 0.0:
        raise ValueError("normalization point count must be positive")
    if bin_width <= 0.0:
        raise ValueError("bin_width must be positive")

    m = spectrum.m
    ks = np.arange(-m, m + 1)
    nu = np.hypot(ks[:, np.newaxis], ks[np.newaxis, :]) / np.sqrt(lam)
    vals = spectrum.values
    keep = np.ones_like(nu, dtype=bool)
    if not include_dc:
        keep[m, m] = False

    nu = nu[keep]
    vals = vals[keep]
    idx = (nu / bin_width).astype(np.intp)
    n_bins = int(idx.max()) + 1
    count = np.bincount(idx, minlength=n_bins)
    total = np.bincount(idx, weights=vals, minlength=n_bins)
    total_sq = np.bincount(idx, weights=vals**2, minlength=n_bins)

    occupied = count > 0
    count = count[occupied]
    mean = total[occupied] / count
    var = np.maximum(total_sq[occupied] / count - mean**2, 0.0)
    stderr = np.sqrt(var / count)
    centers = (np.flatnonzero(occupied) + 0.5) * bin_width
    return RadialProfile(nu=centers, value=mean, stderr=stderr, count=count)


def _window_plus_one(
    spectrum: RadialSpectrum, half_width: int, lam: float, dc_term: str
) -> np.ndarray:
    """Tabulate U(k) + 1 on the centered window, with the chosen DC value."""
    ks = np.arange(-half_width, half_width + 1)
    nu = np.hypot(ks[:, np.newaxis], ks[np.newaxis, :]) / np.sqrt(lam)
    needed = nu.max()
    if needed > spectrum.grid.max_coord + 1e-9:
        raise ValueError(
            "spectrum grid reaches nu = "
            f"{spectrum.grid.max_coord:g} but the requested window needs "
            f"nu = {needed:g}; use a finer target reach or a longer spectrum"
        )
    u1 = 1.0 + np.interp(nu, spectrum.grid.coords, spectrum.f_values)
    if dc_term == "fixed-count":
        u1[half_width, half_width] = 0.0
    elif dc_term == "poisson":
        u1[half_width, half_width] = 1.0
    else:
        raise ValueError(f"unknown dc_term {dc_term!r}")
    return u1


def predict_error_spectrum(
    spectrum: RadialSpectrum,
    target: TargetFunction,
    n_points: float,
    m: int,
    dc_term: str = "fixed-count",
) -> ErrorSpectrum2D:
    """Predict E(k) = (1/N) sum_mu |T(mu)|^2 (U(k - mu) + 1) for |k| <= m.

    ``dc_term`` chooses the value of U + 1 at zero frequency: "fixed-count"
    (0; every generator here produces exactly N points, so the DC mode of the
    point process carries no fluctuation) or "poisson" (1; points arrive with
    Poisson-distributed count).
    """
    lam = float(n_points)
    if lam <= 0.0:
        raise ValueError("n_points must be positive")
    if m < 0:
        raise ValueError("window half-width m must be >= 0")
    reach = target.power_reach(lam)
    power = target.power_grid(reach, lam)
    u1 = _window_plus_one(spectrum, m + reach, lam, dc_term)
    values = fftconvolve(power, u1, mode="valid") / lam
    values = np.maximum(_symmetrize(values), 0.0)
    return ErrorSpectrum2D(m=m, values=values, kind="predicted", n_points=lam)


def monte_carlo_error_spectrum(
    points_source,
    target: TargetFunction,
    m: int,
    realizations: int | None = None,
    seed: int = 0,
    n_points: float | None = None,
    return_realizations: bool = False,
):
    """Measure E(k) = mean |what(k) - T(k)|^2 over realizations.

    ``points_source`` is either a sequence of point sets or a callable
    mapping an integer seed to one (``realizations`` then says how many to
    draw; seeds derive deterministically from ``seed``).  what(k) is the
    points' weighted transform sum_j t(x_j) exp(-2 pi i k.x_j) / N.

    With ``return_realizations`` the per-realization error grids come back
    too, for uncertainty estimates across the ensemble.
    """
    if callable(points_source):
        if realizations is None or realizations < 1:
            raise ValueError("realizations must be >= 1 for a callable source")
        seeds = np.random.SeedSequence(seed).generate_state(realizations)
        sets = [points_source(int(s)) for s in seeds]
    else:
        sets = list(points_source)
        if not sets:
            raise ValueError("need at least one point set")

    lam = float(n_points) if n_points is not None else float(
        np.mean([p.n for p in sets])
    )
    t_grid = target.fourier_grid(m, lam)
    side = 2 * m + 1
    total = np.zeros((side, side))
    per_real = np.empty((len(sets), side, side)) if return_realizations else None
    for i, pts in enumerate(sets):
        weights = target.values(pts.points, lam)
        w_hat = _weighted_dft(pts, weights, m) / lam
        err = np.abs(w_hat - t_grid) ** 2
        total += err
        if per_real is not None:
            per_real[i] = err

    values = np.maximum(_symmetrize(total / len(sets)), 0.0)
    result = ErrorSpectrum2D(
        m=m,
        values=values,
        kind="monte_carlo",
        n_points=lam,
        realizations=len(sets),
    )
    if return_realizations:
        return result, per_real
    return result


def filtered_error(
    error: ErrorSpectrum2D, filter_sigma_px: float, width_px: int
) -> ErrorSpectrum2D:
    """Weight an error spectrum by a Gaussian reconstruction filter.

    The filter is a Gaussian of ``filter_sigma_px`` pixels on a
    ``width_px``-pixel image, i.e. standard deviation sigma_px / W in unit
    coordinates; each cell is scaled by |K(k)|^2 with
    K(k) = exp(-2 pi^2 (sigma_px |k| / W)^2).  sigma -> 0 leaves the
    spectrum unchanged.
    """
    if filter_sigma_px < 0.0:
        raise ValueError("filter_sigma_px must be >= 0")
    if width_px <= 0:
        raise ValueError("width_px must be positive")
    ks = error.wave_numbers()
    k_sq = ks[:, np.newaxis] ** 2 + ks[np.newaxis, :] ** 2
    gain = np.exp(-4.0 * np.pi**2 * (filter_sigma_px / width_px) ** 2 * k_sq)
    return ErrorSpectrum2D(
        m=error.m,
        values=error.values * gain,
        kind=error.kind,
        n_points=error.n_points,
        realizations=error.realizations,
    )


def integration_variance(
    spectrum: RadialSpectrum,
    target: TargetFunction,
    n_points: float,
    dc_term: str = "fixed-count",
) -> float:
    """Predicted variance of the equal-weight integral estimate (the DC cell
    of the error spectrum)."""
    err = predict_error_spectrum(spectrum, target, n_points, m=0, dc_term=dc_term)
    return err.dc


def cosine_error_ratio(
    spectrum: RadialSpectrum,
    nu1: np.ndarray | float,
    nu_c: float,
    n_points: float,
) -> np.ndarray:
    """Closed-form relative error spectrum for a pure cosine target.

    A cosine of normalized frequency nu_c concentrates its power in two
    lines, so the predicted error at radial frequency nu1 divided by the
    target power is (P(|nu1 - nu_c|) + P(nu1 + nu_c)) / (2 N), where P is
    the point spectrum.  Useful for reading error levels straight off a
    radial spectrum without any 2D work.
    """
    lam = float(n_points)
    nu1 = np.asarray(nu1, dtype=float)
    coords = spectrum.grid.coords
    p_vals = spectrum.p_values
    down = np.interp(np.abs(nu1 - nu_c), coords, p_vals)
    up = np.interp(nu1 + nu_c, coords, p_vals)
    return (down + up) / (2.0 * lam)


def write_spectrum_csv(path, spectrum: Spectrum2D | ErrorSpectrum2D) -> None:
    """Dump a 2D spectrum as ``k1,k2,value`` rows (row-major over the window).

    For a measured point spectrum the DC cell is written with its true
    (separately stored) value.
    """
    m = spectrum.m
    ks = np.arange(-m, m + 1)
    values = spectrum.values.copy()
    if isinstance(spectrum, Spectrum2D):
        values[m, m] = spectrum.dc
    with open(path, "w", encoding="ascii") as fh:
        fh.write("k1,k2,value\n")
        for i1, k1 in enumerate(ks):
            for i2, k2 in enumerate(ks):
                fh.write(f"{k1},{k2},{values[i1, i2]:.12g}\n")


def write_profile_csv(path, profile: RadialProfile) -> None:
    """Dump a radial profile as ``nu,value,stderr`` rows."""
    with open(path, "w", encoding="ascii") as fh:
        fh.write("nu,value,stderr\n")
        for nu, val, err in zip(profile.nu, profile.value, profile.stderr):
            fh.write(f"{nu:.12g},{val:.12g},{err:.12g}\n")
