"""Spectrum optimization: problem assembly, solving, audits, and the
feasible-region utilities."""

import math

import numpy as np
import pytest

from dswave import optimize as dop
from dswave import radial as drad

from conftest import DESK_NU, DESK_R


class TestProblemValidation:
    def test_nu0_range(self):
        with pytest.raises(ValueError):
            dop.SpectrumProblem(nu0=0.0)
        with pytest.raises(ValueError):
            dop.SpectrumProblem(nu0=1.5)

    def test_negative_e0(self):
        with pytest.raises(ValueError):
            dop.SpectrumProblem(nu0=0.5, e0=-0.1)

    def test_m0_at_least_one(self):
        with pytest.raises(ValueError):
            dop.SpectrumProblem(nu0=0.5, m0=0.5)

    def test_e0_versus_m0(self):
        with pytest.raises(ValueError):
            dop.SpectrumProblem(nu0=0.5, e0=3.0, m0=2.0)

    def test_nu0_inside_grid(self):
        tiny = drad.RadialGrid.from_spacing(0.1, 0.4)
        with pytest.raises(ValueError):
            dop.SpectrumProblem(nu0=0.5, nu_grid=tiny)


class TestAssembly:
    def test_production_scale_counts(self):
        # nu0 = 0.5 on the 0.01 grids: 1001 spectrum values + 951 slope
        # auxiliaries (950 pair edges + the closing edge to F = 0); 50
        # strict low-frequency rows
        problem = dop.SpectrumProblem(nu0=0.5)
        asm = dop.assemble(problem)
        assert asm.kind == "lp"
        assert asm.n_spectrum == 1001
        assert asm.n_variables == 1952
        assert int(asm.low_mask.sum()) == 50
        # 1001 lower bounds + 2001 realizability rows + 50 low-frequency
        # rows + 2*951 slope-linearization rows
        assert asm.n_constraint_rows == 4954

    def test_quadratic_energies_are_qp(self):
        for energy in (dop.EnergyKind.OSCILLATION, dop.EnergyKind.DIRICHLET,
                       dop.EnergyKind.LAPLACIAN):
            asm = dop.assemble(dop.SpectrumProblem(
                nu0=0.5, energy=energy, nu_grid=DESK_NU, r_grid=DESK_R))
            assert asm.kind == "qp"
            assert asm.q_matrix is not None

    def test_m0_adds_box_rows(self):
        base = dop.assemble(dop.SpectrumProblem(
            nu0=0.5, nu_grid=DESK_NU, r_grid=DESK_R))
        boxed = dop.assemble(dop.SpectrumProblem(
            nu0=0.5, m0=2.0, nu_grid=DESK_NU, r_grid=DESK_R))
        high_nodes = int(boxed.hi_mask.sum())
        assert boxed.n_constraint_rows == base.n_constraint_rows + 2 * high_nodes


class TestSolve:
    def test_perfect_step_below_limit(self, desk_solve):
        # below sqrt(1/pi) the optimum is the pure step: F ~ 0 above nu0
        report = desk_solve(0.55)
        assert report.optimal
        above = DESK_NU.coords > 0.55
        assert np.max(np.abs(report.spectrum.f_values[above])) <= 0.05
        assert report.peak_m <= 1.01

    def test_deep_low_band(self, desk_solve):
        report = desk_solve(0.55)
        low = DESK_NU.coords < 0.55
        assert np.max(report.spectrum.p_values[low]) <= 1e-6

    def test_ds_wave_anchors(self, desk_solve):
        # frozen desk-scale optima (regression anchors)
        report = desk_solve(0.7)
        assert report.optimal
        assert report.objective == pytest.approx(0.1841, abs=2e-3)
        assert report.peak_m == pytest.approx(1.1639, abs=2e-3)

    def test_e0_ceiling_respected(self, desk_solve):
        report = desk_solve(0.7, 0.1)
        assert report.optimal
        low = DESK_NU.coords < 0.7
        assert np.max(report.spectrum.p_values[low]) <= 0.1 + 1e-6

    def test_m0_box_respected(self, desk_solve):
        report = desk_solve(0.85, 0.0, 2.0)
        assert report.optimal
        assert report.peak_m <= 2.0 + 1e-6

    def test_m0_below_minimum_is_infeasible(self, desk_solve):
        report = desk_solve(0.85, 0.0, 1.5)
        assert report.status == "infeasible"
        assert report.spectrum is None

    def test_infeasible_qp_is_classified(self):
        report = dop.solve(dop.SpectrumProblem(
            nu0=0.85, m0=1.5, energy=dop.EnergyKind.OSCILLATION,
            nu_grid=DESK_NU, r_grid=DESK_R))
        assert report.status == "infeasible"

    def test_audit_field(self, desk_solve):
        report = desk_solve(0.7)
        assert report.audit_min_g >= -1e-2

    def test_energy_peak_ordering(self, desk_solve):
        # smoothness energies buy their smoothness with higher peaks
        tv = desk_solve(0.85)
        osc = desk_solve(0.85, energy=dop.EnergyKind.OSCILLATION)
        dirich = desk_solve(0.85, energy=dop.EnergyKind.DIRICHLET)
        lap = desk_solve(0.85, energy=dop.EnergyKind.LAPLACIAN)
        assert all(r.optimal for r in (tv, osc, dirich, lap))
        assert tv.peak_m <= osc.peak_m
        assert dirich.peak_m >= tv.peak_m
        assert lap.peak_m >= tv.peak_m

    def test_integral_mode_allows_low_spike(self):
        # constraining only the low-band mean lets P spike inside the
        # "quiet" region -- the failure mode the mode exists to exhibit
        pointwise = dop.solve(dop.SpectrumProblem(
            nu0=0.85, e0=0.1, nu_grid=DESK_NU, r_grid=DESK_R))
        integral = dop.solve(dop.SpectrumProblem(
            nu0=0.85, e0=0.1, low_freq_mode=dop.LowFreqMode.INTEGRAL,
            nu_grid=DESK_NU, r_grid=DESK_R))
        assert pointwise.optimal and integral.optimal
        low = DESK_NU.coords < 0.85
        assert np.max(pointwise.spectrum.p_values[low]) <= 0.1 + 1e-6
        assert np.max(integral.spectrum.p_values[low]) > 0.1


class TestVerifyRealizability:
    def test_flat_spectrum(self):
        spectrum = drad.RadialSpectrum(grid=DESK_NU,
                                       f_values=np.zeros(DESK_NU.count))
        assert dop.verify_realizability(spectrum, DESK_R) == pytest.approx(1.0)

    def test_unrealizable_spectrum_flagged(self):
        # a deep wide notch with a hard edge drives g below zero
        f = np.where(DESK_NU.coords < 0.9, -1.0, 0.0)
        spectrum = drad.RadialSpectrum(grid=DESK_NU, f_values=f)
        assert dop.verify_realizability(spectrum, DESK_R) < -1e-2


class TestMinM0:
    def test_step_region(self):
        # below the step limit the plain step is feasible: min m0 = 1
        value = dop.min_m0(0.5, 0.0, nu_grid=DESK_NU, r_grid=DESK_R)
        assert value == pytest.approx(1.0, abs=0.02)

    def test_frozen_anchor(self):
        value = dop.min_m0(0.85, 0.0, nu_grid=DESK_NU, r_grid=DESK_R)
        assert value == pytest.approx(1.8071, abs=0.03)

    def test_e0_relief(self):
        tight = dop.min_m0(0.85, 0.0, nu_grid=DESK_NU, r_grid=DESK_R)
        relaxed = dop.min_m0(0.85, 0.1, nu_grid=DESK_NU, r_grid=DESK_R)
        assert relaxed < tight - 0.01

    def test_feasible_region_sweep(self):
        pairs = dop.feasible_region(0.0, [0.3, 0.6, 0.8],
                                    nu_grid=DESK_NU, r_grid=DESK_R)
        nu0s = [p[0] for p in pairs]
        values = [p[1] for p in pairs]
        assert nu0s == [0.3, 0.6, 0.8]
        assert all(np.isfinite(values))
        assert values == sorted(values)  # non-decreasing in nu0
