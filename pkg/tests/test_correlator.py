"""Detection projections, correlation tables across engines, visibility
extraction and the probability ledger."""

import numpy as np
import pytest

import qbeats as qb
from qbeats.model import Basis, Channel

from conftest import GAMMA_L, GAMMA_N, T_MAX

RNG = np.random.default_rng(20240903)


class TestProjection:
    def test_local_detection_from_double_excitation(self):
        out = qb.project_after_detection(qb.SystemState.from_label("ee"), Channel.L2)
        assert np.allclose(out.amplitudes, [0, 1, 0, 0], atol=1e-15)  # |eg>
        out1 = qb.project_after_detection(qb.SystemState.from_label("ee"), Channel.L1)
        assert np.allclose(out1.amplitudes, [0, 0, 1, 0], atol=1e-15)  # |ge>

    def test_far_field_detection_leaves_symmetric_state(self):
        out = qb.project_after_detection(qb.SystemState.from_label("ee"), Channel.N)
        eig = qb.to_eigen_basis(out)
        assert np.allclose(eig.amplitudes, [0, 1, 0, 0], atol=1e-15)  # |1+>

    def test_last_excitation_leaves_ground(self):
        out = qb.project_after_detection(qb.SystemState.from_label("eg"), Channel.L1)
        assert np.allclose(out.amplitudes, [0, 0, 0, 1], atol=1e-14)

    def test_zero_amplitude_detection_rejected(self):
        # emitter 2 holds no excitation in |eg>, so L2 cannot fire
        with pytest.raises(ValueError, match="zero amplitude"):
            qb.project_after_detection(qb.SystemState.from_label("eg"), Channel.L2)

    def test_preserves_the_callers_basis(self):
        eig = qb.SystemState.from_label("2+")
        out = qb.project_after_detection(eig, Channel.N)
        assert out.basis is Basis.EIGEN
        assert out.norm() == pytest.approx(1.0, abs=1e-12)


class TestAnalyticTable:
    @pytest.fixture(scope="class")
    def table(self, beat_params, t_grid):
        return qb.build_table(beat_params, t_grid, engine="analytic")

    def test_delegates_to_closed_forms(self, table, beat_params, t_grid):
        assert np.array_equal(
            table[(Channel.L2, Channel.L1)].values, qb.p_l2_l1(beat_params, t_grid)
        )
        assert np.array_equal(
            table[(Channel.L2, Channel.N)].values, qb.p_l2_n(beat_params, t_grid)
        )

    def test_far_field_row(self, table, beat_params, t_grid):
        expected = (
            beat_params.gamma_n / beat_params.c * np.exp(-beat_params.gamma_plus * t_grid)
        )
        assert np.allclose(table[(Channel.N, Channel.N)].values, expected, rtol=1e-14)
        assert np.allclose(
            table[(Channel.N, Channel.L1)].values,
            expected * beat_params.gamma_l / (2 * beat_params.gamma_n),
            rtol=1e-12,
        )

    def test_exchange_symmetry(self, table):
        assert np.max(np.abs(
            table[(Channel.L1, Channel.L2)].values - table[(Channel.L2, Channel.L1)].values
        )) <= 1e-12
        assert np.max(np.abs(
            table[(Channel.L1, Channel.L1)].values - table[(Channel.L2, Channel.L2)].values
        )) <= 1e-12
        assert np.max(np.abs(
            table[(Channel.L1, Channel.N)].values - table[(Channel.L2, Channel.N)].values
        )) <= 1e-12

    def test_relabeling_symmetry(self, table):
        # swapping the emitter labels permutes the table entries accordingly
        swap = {Channel.L1: Channel.L2, Channel.L2: Channel.L1, Channel.N: Channel.N}
        for first in Channel:
            for second in Channel:
                mapped = (swap[first], swap[second])
                assert np.array_equal(
                    table[(first, second)].values, table[mapped].values
                )

    def test_antibunching_entries(self, table):
        assert table[(Channel.L2, Channel.L2)].values[0] == 0.0
        assert table[(Channel.L1, Channel.L1)].values[0] == 0.0

    def test_all_entries_nonnegative(self, table):
        for pair, series in table.series.items():
            assert np.all(series.values >= 0)

    def test_beat_terms_cancel_in_local_sum(self, t_grid):
        # the summed local series has no beat-frequency dependence at all
        strong = qb.ModelParams.from_beat_frequency(8.0, GAMMA_L, GAMMA_N)
        weak = qb.ModelParams.from_beat_frequency(1.0, GAMMA_L, GAMMA_N)
        t_sum = lambda p: qb.p_l2_l1(p, t_grid) + qb.p_l2_l2(p, t_grid)
        assert np.max(np.abs(t_sum(strong) - t_sum(weak))) <= 1e-15


class TestOdeTable:
    def test_matches_analytic_everywhere(self, ode_table, beat_params, t_grid):
        analytic_table = qb.build_table(beat_params, t_grid, engine="analytic")
        worst = 0.0
        for pair in analytic_table.series:
            dev = np.max(np.abs(ode_table[pair].values - analytic_table[pair].values))
            worst = max(worst, dev)
        assert worst <= 1e-3

    def test_engine_tag(self, ode_table):
        assert ode_table.engine == "ode"
        assert all(s.engine == "ode" for s in ode_table.series.values())

    def test_antibunching_at_origin(self, ode_table):
        assert ode_table[(Channel.L2, Channel.L2)].values[0] <= 1e-3
        assert ode_table[(Channel.L1, Channel.L1)].values[0] <= 1e-3


class TestMcTable:
    def test_requires_budget(self, beat_params, t_grid):
        with pytest.raises(ValueError, match="budget"):
            qb.build_table(beat_params, t_grid, engine="mc")

    def test_smoke_and_tag(self, beat_params):
        grid = np.linspace(0.05, 5.95, 60)
        table = qb.build_table(
            beat_params, grid, engine="mc", mc_options={"n_traj": 3000, "seed": 11}
        )
        assert table.engine == "mc"
        vals = table[(Channel.L2, Channel.N)].values
        assert np.all(vals[np.isfinite(vals)] >= 0)

    def test_unknown_engine_rejected(self, beat_params, t_grid):
        with pytest.raises(ValueError, match="unknown engine"):
            qb.build_table(beat_params, t_grid, engine="exact")


class TestVisibilitySeries:
    def test_analytic_is_the_law(self, beat_params, t_grid):
        table = qb.build_table(beat_params, t_grid, engine="analytic")
        times, values = qb.visibility_series(table)
        assert np.array_equal(times, t_grid)
        assert np.max(np.abs(values - 1 / np.cosh(beat_params.gamma_n * t_grid / 2))) < 1e-14

    def test_initial_contrast_is_unity(self, beat_params, t_grid):
        table = qb.build_table(beat_params, t_grid, engine="analytic")
        _, values = qb.visibility_series(table)
        assert values[0] == 1.0

    def test_ode_extraction_close_to_law(self, ode_table, beat_params):
        times, values = qb.visibility_series(ode_table, (Channel.L2, Channel.L1))
        law = 1 / np.cosh(beat_params.gamma_n * times / 2)
        assert len(times) >= 10
        assert np.max(np.abs(values - law)) <= 0.02

    def test_same_site_pair_also_works(self, ode_table, beat_params):
        times, values = qb.visibility_series(ode_table, (Channel.L2, Channel.L2))
        law = 1 / np.cosh(beat_params.gamma_n * times / 2)
        assert np.max(np.abs(values - law)) <= 0.02

    def test_far_field_pair_rejected(self, beat_params, t_grid):
        table = qb.build_table(beat_params, t_grid, engine="analytic")
        with pytest.raises(ValueError, match="local-local"):
            qb.visibility_series(table, (Channel.L2, Channel.N))

    def test_too_few_beats_give_advice(self, beat_params):
        # slow beats inside a short window: nothing to extract
        p = qb.ModelParams.from_beat_frequency(0.3, GAMMA_L, GAMMA_N)
        grid = np.linspace(0, 2.0, 101)
        table = qb.build_table(p, grid, engine="ode", ode_options={
            "ladders": qb.default_ladders(p, window_factor=30.0, n_modes=512)})
        with pytest.raises(ValueError, match="delta_omega"):
            qb.visibility_series(table)


class TestNormalizationLedger:
    def test_initially_everything_in_the_system(self, beat_params):
        led = qb.normalization_ledger(beat_params, 0.0)
        assert led["system"] == 1.0
        assert all(v == 0.0 for v in led["radiated"].values())
        assert led["total"] == 1.0

    def test_late_times_fully_radiated(self, beat_params):
        led = qb.normalization_ledger(beat_params, 1e4)
        assert led["system"] <= 1e-12
        assert led["total"] == pytest.approx(1.0, abs=1e-12)

    def test_total_is_one_for_random_parameters(self):
        for _ in range(200):
            p = qb.ModelParams.from_beat_frequency(
                RNG.uniform(-100, 100), RNG.uniform(0, 10), RNG.uniform(0, 10)
            )
            scale = max(p.gamma_l, p.gamma_n, 1e-6)
            t = RNG.uniform(0, 10 / scale)
            led = qb.normalization_ledger(p, t)
            assert abs(led["total"] - 1.0) <= 1e-10

    def test_radiated_entries_match_density_quadrature(self, beat_params):
        # independent check: each radiated entry is the time integral of the
        # corresponding conditional density (the excitation starts on emitter
        # 1, so L1 leads L2 until the beats wash out)
        p = beat_params
        t_end = 2.3
        tau = np.linspace(0.0, t_end, 400_001)
        led = qb.normalization_ledger(p, t_end)
        for ch, density in [
            ("L1", qb.p_l2_l1),
            ("L2", qb.p_l2_l2),
            ("N", qb.p_l2_n),
        ]:
            integral = np.trapezoid(density(p, tau) * p.c, tau)
            assert led["radiated"][ch] == pytest.approx(integral, abs=1e-9)
        # all beats done: the emitter that held the excitation radiated more
        late = qb.normalization_ledger(p, 100.0)
        assert late["radiated"]["L1"] > late["radiated"]["L2"]

    def test_ode_ledger_matches_closed_form(self):
        # the worked regime: every rate of order one, fast beats
        p = qb.ModelParams.from_beat_frequency(8.0, 1.0, 1.0)
        res = qb.integrate_ww(
            p,
            qb.SystemState.from_label("eg"),
            ladders=qb.default_ladders(p, window_factor=50.0, n_modes=2048),
            t_final=1.0,
            n_snapshots=3,
        )
        led_ode = qb.normalization_ledger(p, 1.0, engine="ode", ww_result=res)
        led_ana = qb.normalization_ledger(p, 1.0)
        assert led_ode["system"] == pytest.approx(led_ana["system"], abs=1e-3)
        for ch in ("L1", "L2", "N"):
            assert led_ode["radiated"][ch] == pytest.approx(led_ana["radiated"][ch], abs=1e-3)
        assert led_ode["total"] == pytest.approx(1.0, abs=1e-6)

    def test_budget_flows_at_the_source_rate(self, beat_params):
        # d(system)/dt = -c * (sum of channel densities at the source),
        # checked by central finite differences on the closed forms
        p = beat_params
        for t in (0.1, 0.8, 2.5):
            h = 1e-5
            dsys = (
                qb.normalization_ledger(p, t + h)["system"]
                - qb.normalization_ledger(p, t - h)["system"]
            ) / (2 * h)
            flux = p.c * float(qb.p_l2_l1(p, t) + qb.p_l2_l2(p, t) + qb.p_l2_n(p, t))
            assert dsys == pytest.approx(-flux, rel=1e-4)

    def test_negative_time_rejected(self, beat_params):
        with pytest.raises(ValueError):
            qb.normalization_ledger(beat_params, -0.5)

    def test_ode_engine_needs_result(self, beat_params):
        with pytest.raises(ValueError, match="ww_result"):
            qb.normalization_ledger(beat_params, 1.0, engine="ode")
