import math

import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy import stats

from collective_qubit import geometry as g
from collective_qubit import readout as r
from collective_qubit.errors import UnattainableError


def brute_threshold_error(s, b):
    ks = np.arange(1, int(s + b + 20 * math.sqrt(s + b + 1) + 50))
    err = 0.5 * (stats.poisson.cdf(ks - 1, s + b) + stats.poisson.sf(ks - 1, b))
    return err.min()


class TestCounts:
    def test_signal_at_100us(self, detection, frozen):
        c = r.q1_counts(detection, 100e-6)
        assert c.mean_signal == pytest.approx(frozen["readout"]["signal_100us"], rel=1e-12)
        assert c.mean_signal == pytest.approx(46.7, rel=1e-3)
        assert c.mean_background == pytest.approx(1.0)

    def test_zero_time_and_linearity(self, detection):
        assert r.q1_counts(detection, 0.0).mean_signal == 0.0
        a = r.q1_counts(detection, 3e-6).mean_signal
        assert r.q1_counts(detection, 6e-6).mean_signal == 2 * a

    def test_collective_limits(self, detection):
        assert r.qN_counts(detection, 0.0, 1e-6).mean_signal == 0.0
        lim = detection.eta / (2 * detection.tau + detection.t1)
        assert r.collective_rate(detection, math.inf) == pytest.approx(lim)
        assert r.collective_rate(detection, 1e12) == pytest.approx(lim, rel=1e-11)

    def test_rate_ratio_identity(self, detection, fig3_trap):
        geo = g.derive_geometry(fig3_trap.with_convention("figure"))
        ratio = r.collective_rate(detection, geo.C) / r.single_atom_rate(detection)
        expected = geo.P_c / detection.omega_d_frac * 2 * detection.tau / (2 * detection.tau + detection.t1)
        assert ratio == pytest.approx(expected, rel=1e-14)

    def test_fig3_rate_ratio(self, detection, fig3_trap, frozen):
        geo = g.derive_geometry(fig3_trap.with_convention("figure"))
        assert geo.C == pytest.approx(5.0, rel=0.01)
        ratio = r.collective_rate(detection, geo.C) / r.single_atom_rate(detection)
        assert ratio == pytest.approx(frozen["readout"]["rate_ratio_figure"], rel=1e-10)
        assert ratio == pytest.approx(12, rel=0.15)

    @pytest.mark.parametrize("field,value", [("eta", 0.0), ("eta", 1.5), ("omega_d_frac", 2.0),
                                             ("tau", -1.0), ("background_rate", 0.0)])
    def test_invalid_detection(self, field, value):
        with pytest.raises(ValueError):
            r.DetectionConfig(**{field: value})


class TestThreshold:
    def test_anchor_point(self, frozen):
        res = r.threshold_error(46.7, 1.0)
        assert res.error < 1e-4
        exact = r.threshold_error(frozen["readout"]["signal_100us"], 1.0)
        assert exact.error == pytest.approx(frozen["readout"]["error_100us"], rel=1e-9)
        assert exact.best_threshold == frozen["readout"]["threshold_100us"]

    def test_frozen_cases(self, frozen):
        for s, b, err, k in frozen["readout"]["threshold_cases"]:
            res = r.threshold_error(s, b)
            assert res.error == pytest.approx(err, rel=1e-9)
            assert res.best_threshold == k

    def test_zero_background(self):
        for m in (0.5, 3.0, 20.0):
            res = r.threshold_error(m, 0.0)
            assert res.best_threshold == 1
            assert res.error == pytest.approx(math.exp(-m) / 2, rel=1e-12)

    def test_rejects_no_contrast(self):
        with pytest.raises(ValueError):
            r.threshold_error(1.0, 1.0)
        with pytest.raises(ValueError):
            r.threshold_error(0.5, 1.0)

    def test_prior_exchange_symmetry(self):
        a = r.threshold_error(10.0, 2.0, prior_bright=0.5)
        assert a.error == pytest.approx(r.threshold_error(10.0, 2.0, prior_bright=1 - 0.5).error)

    def test_non_increasing_in_signal(self):
        errs = [r.threshold_error(s, 2.0).error for s in np.linspace(2.5, 60, 80)]
        assert all(b <= a * (1 + 1e-12) for a, b in zip(errs, errs[1:]))

    @settings(max_examples=60, deadline=None)
    @given(s=st.floats(0.2, 150), b=st.floats(0.0, 20))
    def test_matches_scipy_brute_force(self, s, b):
        assume(s > b)
        res = r.threshold_error(s, b)
        assert res.error == pytest.approx(brute_threshold_error(s, b), rel=1e-8, abs=1e-300)


class TestMeasurementTime:
    def test_single_atom_time(self, detection, frozen):
        t = r.measurement_time_for_error(detection, 1e-4)
        assert 20e-6 <= t <= 150e-6
        assert t == pytest.approx(frozen["readout"]["t_single_1e-4"], rel=0.02)

    def test_collective_time(self, detection, fig3_trap, frozen):
        geo = g.derive_geometry(fig3_trap.with_convention("figure"))
        t = r.measurement_time_for_error(detection, 1e-4, C=geo.C)
        assert t == pytest.approx(frozen["readout"]["t_collective_1e-4"], rel=0.02)
        t1 = r.measurement_time_for_error(detection, 1e-4)
        assert t1 / t > 10

    @pytest.mark.xfail(strict=True, reason=(
        "solved-time ratio is 15.8 while the rate ratio is 12.3; the background term and "
        "integer thresholds make times scale faster than 1/rate, so the 25% band is missed by ~3%"))
    def test_time_ratio_tracks_rate_ratio_within_25_percent(self, detection, fig3_trap):
        geo = g.derive_geometry(fig3_trap.with_convention("figure"))
        t1 = r.measurement_time_for_error(detection, 1e-4)
        tN = r.measurement_time_for_error(detection, 1e-4, C=geo.C)
        rate_ratio = r.collective_rate(detection, geo.C) / r.single_atom_rate(detection)
        assert t1 / tN == pytest.approx(rate_ratio, rel=0.25)

    def test_looser_target_is_faster(self, detection):
        assert r.measurement_time_for_error(detection, 0.49) < r.measurement_time_for_error(detection, 1e-4)
        assert r.measurement_time_for_error(detection, 0.1) < r.measurement_time_for_error(detection, 1e-4)

    def test_non_increasing_in_cooperativity(self, detection):
        ts = [r.measurement_time_for_error(detection, 1e-4, C=c) for c in (0.5, 1, 2, 5, 20, 100)]
        assert all(b <= a for a, b in zip(ts, ts[1:]))

    def test_unattainable(self):
        det = r.DetectionConfig(background_rate=1e9)
        with pytest.raises(UnattainableError):
            r.measurement_time_for_error(det, 1e-4)
        with pytest.raises(UnattainableError):
            r.measurement_time_for_error(r.DetectionConfig(), 1e-12, t_max=1e-6)

    def test_bad_target(self, detection):
        with pytest.raises(ValueError):
            r.measurement_time_for_error(detection, 0.6)


class TestFig3Sweep:
    def test_sweep(self, detection, fig3_trap):
        dens = r.density_grid(1e13, 2e14, 20)
        rows = r.fig3_sweep(fig3_trap.with_convention("figure"), detection, dens)
        assert len({row.q1_rate_hz for row in rows}) == 1
        assert all(b.qN_rate_hz > a.qN_rate_hz for a, b in zip(rows, rows[1:]))
        last = rows[-1]
        assert last.N == pytest.approx(5000, rel=0.1)
        assert last.qN_rate_hz / last.q1_rate_hz == pytest.approx(12, rel=0.15)

    def test_rejects_bad_range(self, detection, fig3_trap):
        with pytest.raises(ValueError):
            r.fig3_sweep(fig3_trap, detection, [2e14, 1e14])
        with pytest.raises(ValueError):
            r.density_grid(0, 1e14, 5)
