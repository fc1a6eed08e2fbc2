"""Tests for the Huber kernel family and the scale consistency factor."""

import math

import numpy as np
import pytest

import oracles
from huberfit import THRESHOLD_85, THRESHOLD_95, HuberKernel, chi2_cdf, consistency_factor

K95 = HuberKernel(THRESHOLD_95)

# smooth grid spanning both branches; KINKS adds the exact threshold points
SMOOTH_GRID = np.linspace(-6, 6, 241)
GRID = np.concatenate([SMOOTH_GRID, [-K95.c, K95.c, -K95.c + 1e-9, K95.c - 1e-9]])


class TestRho:
    def test_zero(self):
        assert K95.rho(0.0) == 0.0

    def test_interior(self):
        assert K95.rho(1.0) == 0.5

    def test_exterior(self):
        # 0.5 * (2 * 1.345 * 3 - 1.345^2)
        assert K95.rho(3.0) == pytest.approx(3.1304875, abs=1e-12)

    def test_even_and_continuous_at_kink(self):
        assert np.allclose(K95.rho(GRID), K95.rho(-GRID))
        c = K95.c
        assert K95.rho(c - 1e-10) == pytest.approx(K95.rho(c + 1e-10), abs=1e-9)

    def test_convex_on_grid(self):
        grid = np.sort(GRID)
        vals = K95.rho(grid)
        x, y, z = grid[:-2], grid[1:-1], grid[2:]
        interp = vals[:-2] + (vals[2:] - vals[:-2]) * (y - x) / (z - x)
        assert np.all(vals[1:-1] <= interp + 1e-12)

    def test_derivative_matches_psi(self):
        h = 1e-5
        num = (K95.rho(SMOOTH_GRID + h) - K95.rho(SMOOTH_GRID - h)) / (2 * h)
        assert np.max(np.abs(K95.psi(SMOOTH_GRID) - num)) <= 1e-6


class TestPsi:
    def test_interior(self):
        assert K95.psi(0.5) == 0.5

    def test_clipping(self):
        assert K95.psi(5.0) == 1.345
        assert K95.psi(-5.0) == -1.345

    def test_odd_bounded_nondecreasing(self):
        vals = K95.psi(GRID)
        assert np.allclose(vals, -K95.psi(-GRID))
        assert np.max(np.abs(vals)) <= K95.c
        s = np.sort(GRID)
        assert np.all(np.diff(K95.psi(s)) >= 0)

    def test_slope_between_zero_and_one(self):
        h = 1e-6
        slope = (K95.psi(GRID + h) - K95.psi(GRID)) / h
        assert np.all(slope >= -1e-9)
        assert np.all(slope <= 1 + 1e-9)


class TestChi:
    def test_values(self):
        assert K95.chi(0.0) == 0.0
        assert K95.chi(1.0) == 0.5
        assert K95.chi(10.0) == pytest.approx(0.9045125, abs=1e-12)

    def test_both_forms_agree(self):
        # psi^2/2 vs psi*x - rho, on a grid including the kinks
        lhs = K95.chi(GRID)
        rhs = K95.psi(GRID) * GRID - K95.rho(GRID)
        assert np.max(np.abs(lhs - rhs)) <= 1e-12


class TestWeight:
    def test_limit_at_zero(self):
        assert K95.weight(0.0) == 1.0

    def test_interior(self):
        assert K95.weight(1.0) == 1.0

    def test_exterior(self):
        assert K95.weight(2.69) == pytest.approx(0.5, abs=1e-12)

    def test_matches_psi_over_x(self):
        x = GRID[GRID != 0]
        assert np.allclose(K95.weight(x), K95.psi(x) / x, atol=1e-12)


class TestChi2Cdf:
    def test_at_zero(self):
        assert chi2_cdf(0.0, 1) == 0.0
        assert chi2_cdf(0.0, 3) == 0.0

    def test_frozen_reference_point(self):
        # oracle: scipy.stats.chi2.cdf(1.809025, 1), cross-checked with mpmath
        assert chi2_cdf(1.809025, 1) == pytest.approx(0.8213747654313258, abs=1.5e-7)
        assert chi2_cdf(1.809025, 3) == pytest.approx(0.3870270333034527, abs=1.5e-7)

    def test_limit(self):
        assert chi2_cdf(1e12, 3) == pytest.approx(1.0, abs=1e-9)
        assert chi2_cdf(1e12, 1) == pytest.approx(1.0, abs=1e-9)

    def test_against_reference_grid(self):
        for x in [0.01, 0.3, 1.0, 1.809025, 4.0, 9.0, 25.0]:
            for dof in (1, 3):
                assert chi2_cdf(x, dof) == pytest.approx(
                    oracles.chi2_cdf_reference(x, dof), abs=1.5e-7
                )

    def test_errors(self):
        with pytest.raises(ValueError):
            chi2_cdf(-1.0, 1)
        with pytest.raises(ValueError):
            chi2_cdf(1.0, 2)
        with pytest.raises(ValueError):
            chi2_cdf(math.inf, 1)


class TestConsistencyFactor:
    def test_ls_limit(self):
        assert consistency_factor(1e6) == pytest.approx(0.5, abs=1e-9)

    def test_frozen_quadrature_values(self):
        # frozen from the quadrature oracle (mpmath agreement to 16 digits)
        assert consistency_factor(THRESHOLD_95) == pytest.approx(
            0.35508227413452426, abs=1e-9
        )
        assert consistency_factor(THRESHOLD_85) == pytest.approx(
            0.16877768925618990, abs=1e-9
        )

    def test_matches_quadrature_oracle(self):
        for c in (0.3, 0.7317, 1.0, 1.345, 2.5):
            assert consistency_factor(c) == pytest.approx(
                oracles.alpha_by_quadrature(c), abs=1e-12
            )

    def test_strictly_increasing(self):
        cs = [0.1, 0.5, 1.0, 1.345, 2.0, 5.0]
        vals = [consistency_factor(c) for c in cs]
        assert all(a < b for a, b in zip(vals, vals[1:]))

    def test_limits(self):
        assert consistency_factor(1e-6) < 1e-9
        assert 0.5 - consistency_factor(50.0) < 1e-12

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(314159)
        draws = rng.standard_normal(1_000_000)
        for c in (THRESHOLD_95, THRESHOLD_85):
            k = HuberKernel(c)
            samples = k.chi(draws)
            se = samples.std(ddof=1) / math.sqrt(samples.size)
            assert abs(samples.mean() - k.alpha) <= 3 * se

    def test_errors(self):
        for bad in (0.0, -1.0, math.inf, math.nan):
            with pytest.raises(ValueError):
                consistency_factor(bad)


class TestHuberKernel:
    def test_alpha_cached_and_consistent(self):
        k = HuberKernel(2.0)
        assert abs(k.alpha - consistency_factor(2.0)) <= 1e-12
        assert 0.0 < k.alpha < 0.5

    def test_invalid_threshold(self):
        for bad in (0.0, -2.0, math.inf, math.nan):
            with pytest.raises(ValueError):
                HuberKernel(bad)

    def test_vectorized_matches_scalar(self):
        xs = np.array([-3.0, -0.2, 0.0, 0.7, 4.2])
        for fn in ("rho", "psi", "chi", "weight"):
            vec = getattr(K95, fn)(xs)
            scal = [getattr(K95, fn)(float(v)) for v in xs]
            assert np.allclose(vec, scal, atol=0)
