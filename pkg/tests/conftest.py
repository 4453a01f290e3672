"""Shared fixtures.

The heavy artifacts (solved spectra, synthesized ensembles) are
session-scoped and built lazily, so module tests stay fast and the
acceptance tests share one copy of each expensive object.
"""

import numpy as np
import pytest

from dswave import optimize as dop
from dswave import points as dpt
from dswave import radial as drad
from dswave import synthesis as dsyn

# Desk-scale grids: nu spacing 0.02 up to 10, r spacing 0.02 up to 16.
DESK_NU = drad.RadialGrid.from_spacing(0.02, 10.0)
DESK_R = drad.RadialGrid.from_spacing(0.02, 16.0)

# One r grid for all synthesis targets (matches the CLI synthesize default).
SYNTH_R = drad.RadialGrid.from_spacing(0.02, 6.0)

N_POINTS = 1024
ENSEMBLE_SIZE = 100

# One "ACCEPTANCE n: PASS/FAIL" line per acceptance check, filled in by
# tests/test_acceptance.py and echoed after the run by the summary hook
# below, so the gate's verdicts are visible even under captured output.
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance summary")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def error_profile_peak_floor(image, reference, bin_width=0.025,
                             peak_band=(0.25, 0.72), floor_band=(0.0, 0.2)):
    """Radially binned error spectrum: (peak in peak_band, mean in floor_band).

    Frequencies in cycles per pixel.  Structured aliasing concentrates on
    rings in the fold band, so its peak towers over the low-frequency floor;
    white reconstruction noise keeps the two comparable.
    """
    w = image.shape[0]
    spectrum = np.abs(np.fft.fft2(image - reference)) ** 2 / w**4
    freq = np.fft.fftfreq(w)
    radius = np.hypot(freq[:, np.newaxis], freq[np.newaxis, :])
    idx = (radius / bin_width).astype(int)
    sums = np.bincount(idx.ravel(), weights=spectrum.ravel())
    counts = np.bincount(idx.ravel())
    valid = counts > 0
    profile = sums[valid] / counts[valid]
    centers = ((np.arange(sums.size) + 0.5) * bin_width)[valid]
    peak = profile[(centers >= peak_band[0]) & (centers <= peak_band[1])].max()
    floor = profile[(centers > floor_band[0]) & (centers <= floor_band[1])].mean()
    return float(peak), float(floor)


@pytest.fixture(scope="session")
def desk_solve():
    """Memoized desk-scale solver: desk_solve(nu0, e0=0, m0=inf, energy=tv)."""
    cache = {}

    def run(nu0, e0=0.0, m0=np.inf, energy=dop.EnergyKind.TOTAL_VARIATION):
        key = (nu0, e0, m0, energy)
        if key not in cache:
            problem = dop.SpectrumProblem(
                nu0=nu0, e0=e0, m0=m0, energy=energy,
                nu_grid=DESK_NU, r_grid=DESK_R,
            )
            cache[key] = dop.solve(problem)
        return cache[key]

    run.cache = cache
    return run


def _synthesize_sets(target_pcf, seeds):
    sets = []
    for seed in seeds:
        config = dsyn.SynthesisConfig(
            n_points=N_POINTS, target=target_pcf, seed=int(seed)
        )
        sets.append(dsyn.synthesize(config).points)
    return sets


@pytest.fixture(scope="session")
def step05_sets():
    """100 x 1024-point sets synthesized toward the nu0=0.5 step spectrum."""
    target = drad.closed_form_step_pcf(0.5, SYNTH_R)
    return _synthesize_sets(target, range(1000, 1000 + ENSEMBLE_SIZE))


@pytest.fixture(scope="session")
def ds07_report(desk_solve):
    report = desk_solve(0.7)
    assert report.optimal
    return report


@pytest.fixture(scope="session")
def ds07_sets(ds07_report):
    """100 x 1024-point sets synthesized toward the solved nu0=0.7 spectrum."""
    target = drad.spectrum_to_pcf(ds07_report.spectrum, SYNTH_R)
    return _synthesize_sets(target, range(2000, 2000 + ENSEMBLE_SIZE))


@pytest.fixture(scope="session")
def random_sets():
    """100 x 1024-point uniform random sets (fixed seeds)."""
    return [
        dpt.generate_random(N_POINTS, seed=s)
        for s in range(3000, 3000 + ENSEMBLE_SIZE)
    ]


@pytest.fixture(scope="session")
def ds08_points_4096(desk_solve):
    """One full-scale 4096-point set synthesized toward the nu0=0.8 spectrum."""
    report = desk_solve(0.8)
    assert report.optimal
    target = drad.spectrum_to_pcf(report.spectrum, SYNTH_R)
    config = dsyn.SynthesisConfig(n_points=4096, target=target, seed=11)
    return dsyn.synthesize(config).points
