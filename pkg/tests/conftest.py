"""Shared fixtures.  The heavy engines (mode-ladder integration, 1e5 Monte
Carlo trajectories) run once per session and are reused across modules."""

import numpy as np
import pytest

import qbeats as qb

#: the localized-beat regime used throughout: weak local pickup, unit
#: far-field rate, beat frequency eight times the far-field rate
GAMMA_L = 0.05
GAMMA_N = 1.0
DELTA_OMEGA = 8.0
T_MAX = 6.0


@pytest.fixture(scope="session")
def beat_params() -> qb.ModelParams:
    return qb.ModelParams.from_beat_frequency(DELTA_OMEGA, GAMMA_L, GAMMA_N)


@pytest.fixture(scope="session")
def t_grid() -> np.ndarray:
    return np.linspace(0.0, T_MAX, 601)


@pytest.fixture(scope="session")
def single_ww_default():
    """Default-ladder single-emitter run (the 1e-3 closed-form check target)."""
    p = qb.SingleEmitterParams(omega0=0.0, gamma=1.0)
    return p, qb.integrate_single_emitter(p, t_final=5.0)


@pytest.fixture(scope="session")
def ode_table(beat_params, t_grid) -> qb.CorrelationTable:
    """Full nine-pair mode-ladder correlation table at default ladders."""
    return qb.build_table(beat_params, t_grid, engine="ode")


@pytest.fixture(scope="session")
def ww_eg_small(beat_params):
    """Cheap |eg> integration for structural checks (norm drift, ledger)."""
    ladders = qb.default_ladders(beat_params, window_factor=50.0, n_modes=2048)
    initial = qb.SystemState.from_label("eg")
    return qb.integrate_ww(beat_params, initial, ladders=ladders, t_final=T_MAX)


@pytest.fixture(scope="session")
def cascade_100k(beat_params) -> qb.CascadeHistogram:
    """1e5 double-excitation cascades, 30 delay bins over the beat window."""
    edges = np.linspace(0.0, T_MAX, 31)
    return qb.cascade_histogram(beat_params, n_traj=100_000, seed=20240917, bins=edges)
