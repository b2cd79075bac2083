"""Measurement bookkeeping: detection projections, conditional correlation
tables across all channel pairs, beat-visibility extraction and the
probability ledger tying the surviving system to the radiated field.

Correlations are tabulated against the delay of the second detection with
both detectors at the same radius, so only retarded times enter and the
tables are functions of the delay alone.  Values are densities per unit
length; multiply by c for rates per unit delay.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import analytic
from .model import Basis, Channel, ModelParams, SystemState, to_eigen_basis, to_product_basis
from .montecarlo import CascadeHistogram, cascade_histogram, _lower
from .oracle import WWResult, default_ladders, integrate_ww

_PAIRS = [(f, s) for f in Channel for s in Channel]


@dataclass(frozen=True, eq=False)
class CorrelationSeries:
    """Nonnegative conditional detection density sampled on an ascending grid."""

    t_grid: np.ndarray
    values: np.ndarray
    engine: str
    params: ModelParams

    def __post_init__(self) -> None:
        t = np.asarray(self.t_grid, dtype=float)
        v = np.asarray(self.values, dtype=float)
        if t.ndim != 1 or v.shape != t.shape:
            raise ValueError("grid and values must be matching 1-D arrays")
        if np.any(np.diff(t) <= 0):
            raise ValueError("time grid must be strictly increasing")
        if np.any(v[np.isfinite(v)] < 0):
            raise ValueError("densities must be nonnegative")
        object.__setattr__(self, "t_grid", t)
        object.__setattr__(self, "values", v)


@dataclass(frozen=True, eq=False)
class CorrelationTable:
    """All nine (first, second) channel pairings on a common grid."""

    params: ModelParams
    t_grid: np.ndarray
    engine: str
    series: dict[tuple[Channel, Channel], CorrelationSeries]

    def __getitem__(self, pair: tuple[Channel, Channel]) -> CorrelationSeries:
        return self.series[pair]


def project_after_detection(state: SystemState, channel: Channel) -> SystemState:
    """Renormalized system state conditioned on a detection in ``channel``.

    Detecting L2 while ``|ee>`` radiates leaves ``|eg>`` exactly; detecting N
    leaves the symmetric single-excitation state.  A detection with zero
    amplitude (a probability-zero event) is rejected.
    """
    eig = state if state.basis is Basis.EIGEN else to_eigen_basis(state)
    lowered = _lower(channel, eig.amplitudes)
    norm = np.linalg.norm(lowered)
    if norm < 1e-12:
        raise ValueError(
            f"detection in {channel.value} has zero amplitude from this state"
        )
    projected = SystemState(lowered / norm, Basis.EIGEN)
    return projected if state.basis is Basis.EIGEN else to_product_basis(projected)


def _analytic_pair_function(pair: tuple[Channel, Channel]):
    first, second = pair
    if first is Channel.N:
        return analytic.p_n_n if second is Channel.N else analytic.p_n_local
    if second is Channel.N:
        return analytic.p_l2_n
    # relabeling 1 <-> 2 maps the revisit/return pairs onto each other
    revisit = (first is Channel.L2 and second is Channel.L1) or (
        first is Channel.L1 and second is Channel.L2
    )
    return analytic.p_l2_l1 if revisit else analytic.p_l2_l2


def _ode_densities(
    params: ModelParams,
    first: Channel,
    t_grid: np.ndarray,
    ladders,
    dt,
) -> dict[Channel, np.ndarray]:
    initial = project_after_detection(SystemState.from_label("ee"), first)
    n_save = max(801, 4 * len(t_grid))
    result = integrate_ww(
        params, initial, ladders=ladders, t_final=float(t_grid[-1]), dt=dt, n_save=n_save
    )
    out = {}
    for second in Channel:
        dense = result.channel_density(second)
        out[second] = np.interp(t_grid, result.times, dense)
    return out


def build_table(
    params: ModelParams,
    t_grid,
    engine: str = "analytic",
    ode_options: dict | None = None,
    mc_options: dict | None = None,
) -> CorrelationTable:
    """Conditional correlation table for every (first, second) channel pair.

    ``engine='analytic'`` fills the closed forms (with the emitter-relabeling
    symmetry), ``'ode'`` integrates the mode ladders from each projected
    state, ``'mc'`` histograms cascade trajectories.  The Monte Carlo engine
    requires ``mc_options={'n_traj': ..., 'seed': ...}``; the grid is then
    interpreted as bin centers of a uniform binning.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or len(t_grid) < 2:
        raise ValueError("need a 1-D time grid with at least two points")

    series: dict[tuple[Channel, Channel], CorrelationSeries] = {}
    if engine == "analytic":
        for pair in _PAIRS:
            values = np.asarray(_analytic_pair_function(pair)(params, t_grid), dtype=float)
            series[pair] = CorrelationSeries(t_grid, values, "analytic", params)
    elif engine == "ode":
        opts = dict(ode_options or {})
        ladders = opts.pop("ladders", None)
        dt = opts.pop("dt", None)
        if opts:
            raise ValueError(f"unknown ode options: {sorted(opts)}")
        if ladders is None:
            ladders = default_ladders(params)
        for first in Channel:
            densities = _ode_densities(params, first, t_grid, ladders, dt)
            for second in Channel:
                series[(first, second)] = CorrelationSeries(
                    t_grid, densities[second], "ode", params
                )
    elif engine == "mc":
        opts = dict(mc_options or {})
        if "n_traj" not in opts:
            raise ValueError("mc engine needs a trajectory budget: mc_options['n_traj']")
        n_traj = int(opts.pop("n_traj"))
        seed = int(opts.pop("seed", 0))
        if opts:
            raise ValueError(f"unknown mc options: {sorted(opts)}")
        steps = np.diff(t_grid)
        if not np.allclose(steps, steps[0], rtol=1e-9):
            raise ValueError("mc engine needs a uniform grid (bin centers)")
        h = float(steps[0])
        edges = np.concatenate([[t_grid[0] - h / 2.0], t_grid + h / 2.0])
        edges[0] = max(edges[0], 0.0)
        hist = cascade_histogram(params, n_traj, seed, edges)
        for pair in _PAIRS:
            dens = hist.conditional_density(*pair)
            series[pair] = CorrelationSeries(t_grid, dens, "mc", params)
    else:
        raise ValueError(f"unknown engine {engine!r}; use analytic, ode or mc")
    return CorrelationTable(params=params, t_grid=t_grid, engine=engine, series=series)


def _refine_extremum(t: np.ndarray, y: np.ndarray, i: int):
    """Quadratic fit through an extremum triple; robust to grid/beat misalignment."""
    t0, t1, t2 = t[i - 1], t[i], t[i + 1]
    y0, y1, y2 = y[i - 1], y[i], y[i + 1]
    denom = (y0 - 2.0 * y1 + y2)
    if denom == 0.0:
        return t1, y1
    offset = 0.5 * (y0 - y2) / denom
    h = 0.5 * (t2 - t0)
    t_star = t1 + offset * h
    y_star = y1 - 0.125 * (y0 - y2) * offset
    return t_star, y_star


def visibility_series(table: CorrelationTable, pair: tuple[Channel, Channel] = (Channel.L2, Channel.L1)):
    """Beat contrast A/M of an oscillatory local-local pair, as (times, values).

    For the analytic engine this is the exact law ``1/cosh(gamma_n t/2)`` on
    the table grid.  For ode/mc engines the series is detrended by the decay
    envelope ``(gamma_l/4c) exp(-gamma_l t)``; the detrended bracket equals
    ``(1 + E)^2`` at beat maxima and ``(1 - E)^2`` at minima with E the beat
    envelope, so E is read off each refined extremum, consecutive extrema are
    combined by the geometric mean (exact for an exponential envelope) and
    the contrast ``A/M = 2E/(1 + E^2)`` is reported at the pair midpoint.
    """
    if Channel.N in pair:
        raise ValueError("visibility is defined for the oscillatory local-local pairs")
    params = table.params
    s = table[pair]
    if table.engine == "analytic":
        return s.t_grid, np.asarray(analytic.visibility(params, s.t_grid), dtype=float)

    if params.gamma_l == 0:
        raise ValueError("local rate is zero: no local correlations to detrend")
    envelope = params.gamma_l / (4.0 * params.c) * np.exp(-params.gamma_l * s.t_grid)
    bracket = s.values / envelope

    finite = np.isfinite(bracket)
    t = s.t_grid[finite]
    y = bracket[finite]
    extrema = []  # (time, envelope estimate E)
    for i in range(1, len(y) - 1):
        rising = y[i] - y[i - 1]
        falling = y[i + 1] - y[i]
        if rising * falling < 0.0:
            t_star, y_star = _refine_extremum(t, y, i)
            root = math.sqrt(max(y_star, 0.0))
            e_star = root - 1.0 if rising > 0 else 1.0 - root  # max vs min
            extrema.append((t_star, max(e_star, 0.0)))
    if len(extrema) < 2:
        raise ValueError(
            "fewer than two extrema in the window; increase delta_omega * t_max"
        )
    times, values = [], []
    for (ta, ea), (tb, eb) in zip(extrema[:-1], extrema[1:]):
        e_mid = math.sqrt(ea * eb)
        times.append(0.5 * (ta + tb))
        values.append(2.0 * e_mid / (1.0 + e_mid**2))
    return np.array(times), np.array(values)


def _decay_integral(a: complex, t: float) -> complex:
    """``integral_0^t exp(-a tau) dtau`` with the a -> 0 limit handled."""
    if abs(a) * t < 1e-8:
        return t * (1.0 - a * t / 2.0)
    return (1.0 - np.exp(-a * t)) / a


def normalization_ledger(
    params: ModelParams,
    t: float,
    engine: str = "analytic",
    ww_result: WWResult | None = None,
) -> dict:
    """Probability budget at time t for the pair started in ``|eg>``.

    Returns ``{"system": ..., "radiated": {"L1": ..., "L2": ..., "N": ...},
    "total": ...}``; the total must be one.  The local entries are not equal:
    the excitation starts on emitter 1, so L1 collects the interference term
    with the plus sign and L2 with the minus sign.  The analytic entries are
    closed forms; with ``engine='ode'`` pass the corresponding
    :class:`WWResult` and the budget is read from the integrated amplitudes
    at the nearest snapshot.
    """
    if t < 0:
        raise ValueError("time must be >= 0")
    if engine == "analytic":
        gl, gn, gp = params.gamma_l, params.gamma_n, params.gamma_plus
        dw = params.delta_omega
        system = 0.5 * math.exp(-gp * t) + 0.5 * math.exp(-gl * t)
        # time integrals of the three terms of the local beat densities
        i_slow = _decay_integral(gl, t).real
        i_beat = _decay_integral(gl + gn / 2.0 - 1j * dw, t).real
        i_fast = _decay_integral(gp, t).real
        rad_l1 = gl / 4.0 * (i_slow + 2.0 * i_beat + i_fast)
        rad_l2 = gl / 4.0 * (i_slow - 2.0 * i_beat + i_fast)
        rad_n = gn / 2.0 * i_fast
        radiated = {"L1": rad_l1, "L2": rad_l2, "N": rad_n}
    elif engine == "ode":
        if ww_result is None:
            raise ValueError("engine='ode' needs the ww_result to read the budget from")
        i = ww_result.snapshot_index(t)
        system = float(np.sum(np.abs(ww_result.mode_system[i]) ** 2))
        radiated = {ch.value: ww_result.radiated(ch, i) for ch in Channel}
    else:
        raise ValueError(f"unknown engine {engine!r}")
    total = system + sum(radiated.values())
    return {"system": system, "radiated": radiated, "total": total}
