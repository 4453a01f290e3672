"""Test-function targets: spatial evaluation and Fourier representations."""

import numpy as np
import pytest

from dswave import targets as dtg


class TestCosine:
    def test_values(self):
        t = dtg.cosine(0.35)
        lam = 1024.0
        pts = np.array([[0.2, 0.0], [0.7, 0.25]])
        a = 0.35 * 32.0
        assert t.values(pts, lam) == pytest.approx(
            [1.0, np.cos(2 * np.pi * a * 0.25)])

    def test_fourier_line_structure(self):
        t = dtg.cosine(0.5)
        grid = t.fourier_grid(8, 1024.0)
        m = 8
        off_line = np.delete(grid, m, axis=0)
        assert np.max(np.abs(off_line)) == 0.0  # all power on the k1 = 0 line

    def test_integer_frequency_is_two_lines(self):
        # nu_c * sqrt(lam) integer: exactly two coefficients of 1/2
        lam = 1024.0
        t = dtg.cosine(8.0 / 32.0)
        grid = t.fourier_grid(10, lam)
        m = 10
        line = grid[m, :]
        assert abs(line[m + 8]) == pytest.approx(0.5, abs=1e-12)
        assert abs(line[m - 8]) == pytest.approx(0.5, abs=1e-12)
        others = np.delete(line, [m - 8, m + 8])
        assert np.max(np.abs(others)) <= 1e-12

    def test_parseval_with_wrap_leakage(self):
        # non-integer absolute frequency a: the wrap discontinuity spreads
        # power into sidelobes; total power has the closed form
        # 1/2 + sin(4 pi a)/(8 pi a)
        lam = 1024.0
        nu_c = 0.35
        a = nu_c * 32.0
        t = dtg.cosine(nu_c)
        reach = t.power_reach(lam)
        total = t.power_grid(reach, lam).sum()
        expected = 0.5 + np.sin(4 * np.pi * a) / (8 * np.pi * a)
        assert total == pytest.approx(expected, rel=5e-3)

    def test_parseval_against_direct_sampling(self):
        lam = 1024.0
        t = dtg.cosine(0.85)
        ys = (np.arange(4096) + 0.5) / 4096
        pts = np.column_stack([np.zeros_like(ys), ys])
        direct = np.mean(t.values(pts, lam) ** 2)
        reach = t.power_reach(lam)
        total = t.power_grid(reach, lam).sum()
        assert total == pytest.approx(direct, rel=5e-3)


class TestGaussianBlob:
    def test_fourier_closed_form(self):
        sigma = 0.1
        t = dtg.gaussian_blob(sigma)
        grid = t.fourier_grid(5, 1024.0)
        # magnitude at k = (1, 2)
        got = abs(grid[5 + 1, 5 + 2])
        expected = 2 * np.pi * sigma**2 * np.exp(-2 * np.pi**2 * sigma**2 * 5)
        assert got == pytest.approx(expected, rel=1e-12)

    def test_parseval(self):
        t = dtg.gaussian_blob(0.1)
        lam = 1024.0
        reach = t.power_reach(lam)
        total = t.power_grid(reach, lam).sum()
        xs = (np.arange(512) + 0.5) / 512
        xx, yy = np.meshgrid(xs, xs, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        direct = np.mean(t.values(pts, lam) ** 2)
        assert total == pytest.approx(direct, rel=1e-6)

    def test_validation(self):
        with pytest.raises(ValueError):
            dtg.gaussian_blob(0.0)


class TestZonePlate:
    def test_corner_value(self):
        t = dtg.zone_plate_for_width(64)
        assert t.values(np.array([[0.0, 0.0]]), 4096.0)[0] == pytest.approx(1.0)

    def test_alpha_formula(self):
        t = dtg.zone_plate_for_width(64)
        assert t.param == pytest.approx(1.5 * np.pi * 64 / (2 * np.sqrt(2)))

    def test_parseval(self):
        t = dtg.zone_plate_for_width(64)
        lam = 4096.0
        reach = t.power_reach(lam)
        total = t.power_grid(reach, lam).sum()
        xs = (np.arange(512) + 0.5) / 512
        xx, yy = np.meshgrid(xs, xs, indexing="ij")
        pts = np.column_stack([xx.ravel(), yy.ravel()])
        direct = np.mean(t.values(pts, lam) ** 2)
        assert total == pytest.approx(direct, rel=1e-3)

    def test_reach_exceeding_dense_window(self):
        t = dtg.zone_plate_for_width(64)
        with pytest.raises(ValueError):
            t.fourier_grid(300, 4096.0)


class TestStripes:
    def test_binary_values(self):
        t = dtg.stripes(0.9)
        pts = np.random.default_rng(0).random((100, 2))
        vals = t.values(pts, 1024.0)
        assert set(np.unique(vals)) <= {0.0, 1.0}

    def test_period_in_pixels(self):
        # nu_c = 0.5 at lam = 128^2: absolute frequency 64, period 2 pixels.
        # Sampled at pixel corners j/128 (half-period sampling at the pixel
        # centers lands exactly on the cosine zeros -- the thresholded value
        # there is a knife edge, not a pattern)
        lam = 128.0**2
        t = dtg.stripes(0.5)
        ys = np.arange(128) / 128
        pts = np.column_stack([np.zeros_like(ys), ys])
        vals = t.values(pts, lam)
        assert np.array_equal(vals[:-2], vals[2:])  # 2-pixel periodicity
        assert not np.array_equal(vals[:-1], vals[1:])  # not constant

    def test_dc_coefficient_is_half(self):
        t = dtg.stripes(0.9)
        grid = t.fourier_grid(4, 1024.0)
        assert abs(grid[4, 4]) == pytest.approx(0.5, abs=5e-3)
