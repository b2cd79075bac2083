"""Closed-form emission amplitudes and conditional pair correlations.

Single emitter
--------------
An excited two-level emitter coupled to a one-dimensional continuum decays
exponentially while building up an outgoing single-photon wave.  The surviving
excited amplitude, the spectral (k-space) photon amplitude and the real-space
photon amplitude are all available in closed form and are cross-checked
against the brute-force mode-ladder integrator in :mod:`qbeats.oracle`.

Coupled pair after a local detection
------------------------------------
Detecting the first photon of the doubly excited pair in channel L2 projects
the system onto ``|eg>``.  The subsequent evolution splits over the symmetric
and antisymmetric single-excitation states which decay at different rates
(the antisymmetric one is dark to the far field) and accumulate phase at
``omega_plus`` and ``omega_minus``.  Interference of the two paths at the
local detectors produces quantum beats at ``delta_omega = omega_plus -
omega_minus`` whose contrast decays through far-field emission alone.

Sign conventions: the outgoing-wave amplitudes carry a ``-i`` prefactor for
every channel, fixed so that the reconstructed local-channel densities give
full beat contrast at t = 0 in the revisited channel pairing and exact
antibunching (zero density) for an immediate same-site double detection.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .model import ModelParams, desymmetrize_channel_amplitudes

_SQRT2 = math.sqrt(2.0)

# |z| below which 1 - exp(z) switches to its series to avoid cancellation
_SERIES_CUTOFF = 1e-3


@dataclass(frozen=True)
class SingleEmitterParams:
    """Transition frequency, total decay rate and field speed of one emitter."""

    omega0: float
    gamma: float
    c: float = 1.0

    def __post_init__(self) -> None:
        if self.gamma < 0:
            raise ValueError(f"gamma must be >= 0, got {self.gamma}")
        if self.c <= 0:
            raise ValueError(f"c must be > 0, got {self.c}")


def _one_minus_exp(z: np.ndarray) -> np.ndarray:
    """Accurate ``1 - exp(z)`` for complex z, series-guarded near z = 0."""
    z = np.asarray(z, dtype=complex)
    small = np.abs(z) < _SERIES_CUTOFF
    zs = np.where(small, z, 0.0)
    series = -zs * (1.0 + zs / 2.0 + zs**2 / 6.0 + zs**3 / 24.0 + zs**4 / 120.0)
    direct = 1.0 - np.exp(np.where(small, 0.0, z))
    return np.where(small, series, direct)


def _require_nonnegative_time(t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0):
        raise ValueError("time must be >= 0")
    return t


def single_excited_amplitude(p: SingleEmitterParams, t):
    """Surviving excited-state amplitude ``exp(-i omega0 t - gamma t / 2)``."""
    t = _require_nonnegative_time(t)
    return np.exp(-1j * p.omega0 * t - p.gamma * t / 2.0)


def single_k_amplitude(p: SingleEmitterParams, k, t):
    """Photon amplitude at wavenumber k (dispersion ``omega = k c``) at time t.

    The Lorentzian denominator ``k c - omega0 + i gamma / 2`` never vanishes
    for ``gamma > 0``; the on-resonance point is regular and the numerator is
    evaluated by series when the exponent is small, so no catastrophic
    cancellation occurs anywhere.
    """
    t = _require_nonnegative_time(t)
    k = np.asarray(k, dtype=float)
    if p.gamma == 0.0:
        # zero coupling, no photon is ever emitted
        return np.zeros(np.broadcast(k, t).shape, dtype=complex)
    detuning = k * p.c - p.omega0
    z = (-p.gamma / 2.0 + 1j * detuning) * t
    prefactor = math.sqrt(p.c * p.gamma / (2.0 * math.pi))
    return (
        prefactor
        * np.exp(-1j * k * p.c * t)
        * _one_minus_exp(z)
        / (detuning + 0.5j * p.gamma)
    )


def single_realspace_amplitude(p: SingleEmitterParams, r, t):
    """Outgoing photon amplitude at radius r and time t.

    ``-i sqrt(gamma/c) exp((gamma/2 + i omega0)(r/c - t))`` inside the light
    cone ``0 < r <= c t`` and zero outside; the wavefront cell carries the
    inside limit.  The squared magnitude integrates over r to
    ``1 - exp(-gamma t)``, the probability already radiated.
    """
    t = _require_nonnegative_time(t)
    r = np.asarray(r, dtype=float)
    if np.any(r < 0):
        raise ValueError("radius must be >= 0")
    inside = (r > 0) & (r <= p.c * t)
    tau = r / p.c - t  # retarded emission time offset, <= 0 inside the cone
    amp = -1j * math.sqrt(p.gamma / p.c) * np.exp((p.gamma / 2.0 + 1j * p.omega0) * tau)
    return np.where(inside, amp, 0.0)


@dataclass(frozen=True, eq=False)
class ConditionalAmplitudes:
    """State of system plus field at time t after a local detection at t = 0.

    ``a_1plus``/``a_1minus`` are the surviving symmetric/antisymmetric system
    amplitudes.  The field amplitudes are sampled on ``tau_grid`` where
    ``tau = r/c - t`` is the retarded-time coordinate: they vanish for
    ``tau > 0`` (nothing propagates ahead of the light cone) and for
    ``tau <= -t`` (nothing was emitted before the detection).
    """

    params: ModelParams
    t: float
    tau_grid: np.ndarray
    a_1plus: complex
    a_1minus: complex
    a_n: np.ndarray
    a_lplus: np.ndarray
    a_lminus: np.ndarray

    def a_local(self):
        """Physical local-channel amplitudes ``(a_L1, a_L2)`` on the tau grid."""
        return desymmetrize_channel_amplitudes(self.a_lplus, self.a_lminus)

    def system_probability(self) -> float:
        return abs(self.a_1plus) ** 2 + abs(self.a_1minus) ** 2


def conditional_amplitudes(params: ModelParams, t: float, tau_grid) -> ConditionalAmplitudes:
    """Joint amplitudes at time t for the pair prepared in ``|eg>`` at t = 0.

    This is the post-measurement state after the first photon of the doubly
    excited pair was caught in L2.  The far-field amplitude rides on the
    symmetric path only; the antisymmetric path radiates exclusively into the
    local channels.
    """
    if t < 0:
        raise ValueError("time must be >= 0")
    tau = np.asarray(tau_grid, dtype=float)
    gl, gn, c = params.gamma_l, params.gamma_n, params.c
    gp = params.gamma_plus
    wp, wm = params.omega_plus, params.omega_minus

    a_1plus = (1.0 / _SQRT2) * np.exp(-(gp / 2.0) * t - 1j * wp * t)
    a_1minus = (1.0 / _SQRT2) * np.exp(-(gl / 2.0) * t - 1j * wm * t)

    inside = (tau <= 0.0) & (tau > -t)
    plus_wave = np.exp((gp / 2.0 + 1j * wp) * tau)
    minus_wave = np.exp((gl / 2.0 + 1j * wm) * tau)
    a_n = np.where(inside, -1j * math.sqrt(gn / (2.0 * c)) * plus_wave, 0.0)
    a_lplus = np.where(inside, -1j * math.sqrt(gl / (2.0 * c)) * plus_wave, 0.0)
    a_lminus = np.where(inside, -1j * math.sqrt(gl / (2.0 * c)) * minus_wave, 0.0)

    return ConditionalAmplitudes(
        params=params,
        t=float(t),
        tau_grid=tau,
        a_1plus=complex(a_1plus),
        a_1minus=complex(a_1minus),
        a_n=a_n,
        a_lplus=a_lplus,
        a_lminus=a_lminus,
    )


def _beat_bracket(params: ModelParams, t, sign: float):
    gn = params.gamma_n
    dw = params.delta_omega
    return 1.0 + sign * 2.0 * np.exp(-gn * t / 2.0) * np.cos(dw * t) + np.exp(-gn * t)


def p_l2_l1(params: ModelParams, t):
    """Density (per unit length) for an L1 photon a delay t after an L2 photon.

    ``(gamma_l / 4c) exp(-gamma_l t) [1 + 2 exp(-gamma_n t/2) cos(delta_omega t)
    + exp(-gamma_n t)]``: maximal at t = 0 because the surviving excitation sits
    on emitter 1, then beating at ``delta_omega`` with far-field-damped contrast.
    """
    t = _require_nonnegative_time(t)
    gl, c = params.gamma_l, params.c
    return gl / (4.0 * c) * np.exp(-gl * t) * _beat_bracket(params, t, +1.0)


def p_l2_l2(params: ModelParams, t):
    """Density for a second L2 photon a delay t after an L2 photon.

    Same envelope as :func:`p_l2_l1` with the opposite interference sign;
    exactly zero at t = 0 (antibunching: emitter 2 has just emitted).
    """
    t = _require_nonnegative_time(t)
    gl, c = params.gamma_l, params.c
    return gl / (4.0 * c) * np.exp(-gl * t) * _beat_bracket(params, t, -1.0)


def p_l2_n(params: ModelParams, t):
    """Density for a far-field photon a delay t after an L2 photon:
    ``(gamma_n / 2c) exp(-(gamma_l + gamma_n) t)``."""
    t = _require_nonnegative_time(t)
    gn, c = params.gamma_n, params.c
    return gn / (2.0 * c) * np.exp(-params.gamma_plus * t)


def p_n_local(params: ModelParams, t):
    """Density for a photon in one given local channel after a far-field photon.

    After an N detection the pair is in the symmetric state, which feeds both
    local channels equally: ``(gamma_l / 2c) exp(-(gamma_l + gamma_n) t)``.
    """
    t = _require_nonnegative_time(t)
    gl, c = params.gamma_l, params.c
    return gl / (2.0 * c) * np.exp(-params.gamma_plus * t)


def p_n_n(params: ModelParams, t):
    """Density for a second far-field photon after a far-field photon:
    ``(gamma_n / c) exp(-(gamma_l + gamma_n) t)``."""
    t = _require_nonnegative_time(t)
    gn, c = params.gamma_n, params.c
    return gn / c * np.exp(-params.gamma_plus * t)


def visibility(params: ModelParams, t):
    """Beat contrast (amplitude over mean) of the local pair correlations.

    Equals ``1 / cosh(gamma_n t / 2)``, identically
    ``2 exp(gamma_n t / 2) / (1 + exp(gamma_n t))``: unity at t = 0, with a
    flat (non-exponential) onset and asymptotic slope ``-gamma_n / 2`` in the
    log.  Only far-field emission degrades the contrast.
    """
    t = _require_nonnegative_time(t)
    return 1.0 / np.cosh(params.gamma_n * t / 2.0)
