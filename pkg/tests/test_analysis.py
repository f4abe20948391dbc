import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiralchain.analysis import (
    DEFAULT_EPS_SLOPE,
    HorizonTooShort,
    detect_plateaus,
    ensemble_stats,
    fit_decay,
)


class TestFitDecay:
    @settings(max_examples=40, deadline=None)
    @given(gamma=st.floats(0.01, 5.0), p0=st.floats(0.1, 1.0))
    def test_pure_exponential(self, gamma, p0):
        t_end = 1.2 * np.log(1e3) / gamma
        t = np.linspace(0, t_end, 2001)
        fit = fit_decay(t, p0 * np.exp(-gamma * t))
        assert fit.gamma_f == pytest.approx(gamma, rel=1e-10)
        assert fit.ci95_half_width < 1e-8 * gamma
        assert fit.fit_window_end == pytest.approx(np.log(1e3) / gamma, abs=t[1] - t[0])

    def test_free_intercept_recovers_offset(self):
        t = np.linspace(0, 40, 4001)
        p = 0.5 * np.exp(-0.3 * (t - 2.0))
        fit = fit_decay(t, p, free_intercept=True)
        assert fit.gamma_f == pytest.approx(0.3, rel=1e-12)
        assert fit.intercept == pytest.approx(np.log(0.5) + 0.6, abs=1e-12)

    def test_window_stops_at_threshold(self):
        t = np.linspace(0, 100, 10001)
        # fast drop then a slow tail that must not enter the fit
        p = np.where(t < 10, np.exp(-t), np.exp(-10) * np.exp(-0.01 * (t - 10)))
        fit = fit_decay(t, p)
        assert fit.fit_window_end == pytest.approx(np.log(1e3), abs=0.01)
        assert fit.gamma_f == pytest.approx(1.0, rel=1e-8)

    def test_confidence_interval_matches_noise(self):
        rng = np.random.default_rng(0)
        t = np.linspace(0, 7, 701)
        hits = 0
        for _ in range(200):
            p = np.exp(-t + 0.05 * rng.standard_normal(t.size))
            p[0] = 1.0
            fit = fit_decay(t, p)
            hits += abs(fit.gamma_f - 1.0) <= fit.ci95_half_width
        assert 0.9 <= hits / 200 <= 0.99

    def test_horizon_too_short(self):
        t = np.linspace(0, 10, 101)
        with pytest.raises(HorizonTooShort) as info:
            fit_decay(t, np.exp(-0.1 * t))
        err = info.value
        assert err.reached == pytest.approx(np.exp(-1.0))
        assert err.suggested_t_end == pytest.approx(10 * np.log(1e3), rel=1e-9)
        assert "extend t_end" in str(err)

    def test_needs_three_points(self):
        with pytest.raises(ValueError, match="samples"):
            fit_decay([0.0, 1.0, 2.0], [1.0, 1e-4, 1e-5])

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            fit_decay([0.0, 1.0], [1.0])


class TestPlateaus:
    def test_flat_segment_detected(self):
        t = np.arange(0, 100, 0.01)
        logp = np.where(t < 20, -0.1 * t, np.where(t < 40, -2.0, -2.0 - 0.1 * (t - 40)))
        ps = detect_plateaus(t, np.exp(logp))
        assert len(ps) == 1
        pl = ps.plateaus[0]
        assert pl.t_start == pytest.approx(20, abs=0.02)
        assert pl.t_end == pytest.approx(40, abs=0.02)
        assert pl.level == pytest.approx(np.exp(-2.0))
        assert ps.any_within(30, 35) and not ps.any_within(50, 60)

    def test_short_segment_ignored(self):
        t = np.arange(0, 50, 0.01)
        logp = np.where(t < 20, -0.1 * t, np.where(t < 23, -2.0, -2.0 - 0.1 * (t - 23)))
        assert len(detect_plateaus(t, np.exp(logp), min_width=4.0)) == 0
        assert len(detect_plateaus(t, np.exp(logp), min_width=2.0)) == 1

    def test_threshold(self):
        t = np.arange(0, 50, 0.01)
        p = np.exp(-0.5 * DEFAULT_EPS_SLOPE * t)
        assert len(detect_plateaus(t, p)) == 1
        assert len(detect_plateaus(t, p, eps_slope=0.4 * DEFAULT_EPS_SLOPE)) == 0

    def test_underflow_is_never_flat(self):
        t = np.arange(0, 50, 0.01)
        assert len(detect_plateaus(t, np.full(t.size, 1e-15))) == 0

    def test_non_uniform_grid(self):
        with pytest.raises(ValueError, match="uniform"):
            detect_plateaus([0.0, 1.0, 3.0], [1.0, 1.0, 1.0])


def test_ensemble_stats():
    rows = [np.array([1.0, 0.5]), np.array([1.0, 0.7]), np.array([1.0, 0.9])]
    mean, std = ensemble_stats(rows)
    np.testing.assert_allclose(mean, [1.0, 0.7])
    np.testing.assert_allclose(std, [0.0, 0.2])
    with pytest.raises(ValueError):
        ensemble_stats(rows[:1])
    with pytest.raises(ValueError):
        ensemble_stats([np.ones(2), np.ones(3)])
