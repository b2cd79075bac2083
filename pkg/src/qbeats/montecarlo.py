"""Quantum-jump Monte Carlo: stochastic photon detection records for the pair.

Between detections the pair evolves under the effective non-Hermitian
Hamiltonian whose decay rates are exactly the ones visible in the conditional
amplitudes: ``2 gamma_l + gamma_n`` for ``|ee>``, ``gamma_l + gamma_n`` for
the symmetric and ``gamma_l`` for the antisymmetric single-excitation state.
In the eigenbasis this evolution is diagonal, so the squared norm (the
waiting-time survival function) is known in closed form and jump times are
drawn by inverting it with plain bisection; no time stepping means no
short-delay bias, which matters exactly where antibunching is tested.

Each jump applies the channel's lowering operator, renormalizes and appends a
:class:`DetectionEvent`.  Everything is deterministic given the seed.

Reproducibility protocol: the master seed feeds ``numpy.random.SeedSequence``;
per-trajectory generators are ``PCG64`` streams built from
``SeedSequence(master).spawn(n)``, so histograms merge independent of
ordering and identical seeds give bit-identical event lists.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .model import Basis, Channel, ModelParams, SystemState, to_eigen_basis, to_product_basis

GENERATOR_NAME = "numpy.random.PCG64 via SeedSequence.spawn"

#: absolute bisection tolerance on jump times, in units of 1/(fastest rate)
_TIME_TOLERANCE = 1e-10

_EIGEN_LABELS = ("2+", "1+", "1-", "0+")


@dataclass(frozen=True)
class DetectionEvent:
    """One photon detection: which channel fired and when."""

    channel: Channel
    time: float


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One stochastic unraveling: seed, ordered detections, surviving state."""

    seed: int
    events: tuple[DetectionEvent, ...]
    final_state: SystemState
    t_final: float

    @property
    def n_detections(self) -> int:
        return len(self.events)


def _eigen_rates(params: ModelParams) -> np.ndarray:
    gl, gn = params.gamma_l, params.gamma_n
    return np.array([2.0 * gl + gn, gl + gn, gl, 0.0])


def _eigen_frequencies(params: ModelParams) -> np.ndarray:
    return np.array([2.0 * params.e0, params.omega_plus, params.omega_minus, 0.0])


def _lower(channel: Channel, a: np.ndarray) -> np.ndarray:
    """Apply the channel's lowering operator to eigenbasis amplitudes."""
    a2, ap, am, ag = a
    s = 1.0 / math.sqrt(2.0)
    if channel is Channel.L1:
        return np.array([0.0, s * a2, -s * a2, s * (ap + am)])
    if channel is Channel.L2:
        return np.array([0.0, s * a2, s * a2, s * (ap - am)])
    return np.array([0.0, a2, 0.0, ap])


def _jump_weights(params: ModelParams, a: np.ndarray) -> np.ndarray:
    rates = (params.gamma_l, params.gamma_l, params.gamma_n)
    return np.array(
        [r * float(np.sum(np.abs(_lower(ch, a)) ** 2)) for ch, r in zip(_CHANNELS, rates)]
    )


_CHANNELS = (Channel.L1, Channel.L2, Channel.N)


def _survival(a_sq: np.ndarray, rates: np.ndarray, t: float) -> float:
    """Squared norm of the unnormalized state a time t after the last jump."""
    return float(np.sum(a_sq * np.exp(-rates * t)))


def _draw_jump_time(a_sq: np.ndarray, rates: np.ndarray, u: float, tol: float) -> float:
    """Invert survival(t) = u by bracketing and bisection."""
    active = rates > 0
    hi = 1.0 / float(np.min(rates[active]))
    while _survival(a_sq, rates, hi) > u:
        hi *= 2.0
    lo = 0.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _survival(a_sq, rates, mid) > u:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def quantum_jump_trajectory(
    params: ModelParams,
    initial: SystemState,
    seed,
    t_max: float = math.inf,
) -> Trajectory:
    """Simulate one detection record starting from a normalized state.

    Jump times come from inverse-transform sampling of the closed-form norm
    decay; jump channels from the relative instantaneous emission rates.  A
    trajectory may end with excitation left (dark antisymmetric component or
    finite ``t_max``): the residual shows up as a surviving ``final_state``
    with fewer events than excitations.
    """
    if abs(initial.norm() - 1.0) > 1e-9:
        raise ValueError("initial state must be normalized")
    rng = np.random.default_rng(seed)
    seed_int = seed if isinstance(seed, (int, np.integer)) else -1

    rates = _eigen_rates(params)
    freqs = _eigen_frequencies(params)
    tol = _TIME_TOLERANCE / max(params.gamma_n, params.gamma_l, 1e-300)

    eig = initial if initial.basis is Basis.EIGEN else to_eigen_basis(initial)
    a = eig.amplitudes.copy()
    t_now = 0.0
    events: list[DetectionEvent] = []

    while True:
        a_sq = np.abs(a) ** 2
        # components with zero decay rate never jump; their weight is the
        # probability that no further photon is ever detected
        frozen = float(np.sum(a_sq[rates == 0.0]))
        if frozen > 1.0 - 1e-15 or not np.any(a_sq[rates > 0.0] > 0.0):
            break
        u = rng.random()
        if u <= frozen:
            break
        t_jump = _draw_jump_time(a_sq, rates, u, tol)
        if t_now + t_jump >= t_max:
            break
        t_now += t_jump
        # state just before the jump, including phases
        a = a * np.exp((-1j * freqs - rates / 2.0) * t_jump)
        weights = _jump_weights(params, a)
        total = float(weights.sum())
        pick = rng.random() * total
        idx = 0
        acc = weights[0]
        while pick > acc and idx < 2:
            idx += 1
            acc += weights[idx]
        channel = _CHANNELS[idx]
        events.append(DetectionEvent(channel, t_now))
        a = _lower(channel, a)
        a = a / np.linalg.norm(a)

    t_end = min(t_max, t_now) if math.isfinite(t_max) else t_now
    if math.isfinite(t_max) and t_max > t_now:
        a = a * np.exp((-1j * freqs - rates / 2.0) * (t_max - t_now))
        t_end = t_max
    norm = np.linalg.norm(a)
    final = SystemState(a / norm if norm > 0 else a, Basis.EIGEN)
    return Trajectory(
        seed=seed_int,
        events=tuple(events),
        final_state=to_product_basis(final),
        t_final=t_end,
    )


def trajectory_seeds(master_seed: int, n: int) -> list[np.random.SeedSequence]:
    """Documented seed-splitting rule: SeedSequence(master).spawn(n)."""
    return np.random.SeedSequence(master_seed).spawn(n)


@dataclass(frozen=True)
class CascadeRecord:
    """Flat per-trajectory detection summary for event files."""

    trajectory_id: int
    first: Channel | None
    first_time: float | None
    second: Channel | None
    second_time: float | None


@dataclass(frozen=True, eq=False)
class CascadeHistogram:
    """Two-time detection statistics of the double-excitation cascade.

    ``counts[(first, second)]`` histograms the delay between the two photons
    over ``bin_edges``; ``first_counts`` holds the first-photon marginal.
    """

    params: ModelParams
    bin_edges: np.ndarray
    counts: dict[tuple[Channel, Channel], np.ndarray]
    first_counts: dict[Channel, int]
    n_traj: int
    master_seed: int
    generator: str = GENERATOR_NAME
    records: tuple[CascadeRecord, ...] = field(default_factory=tuple)

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])

    def conditional_density(
        self, first: Channel, second: Channel, per_length: bool = True
    ) -> np.ndarray:
        """Estimated conditional detection density given the first channel.

        Per unit delay by default divided by c, i.e. per unit length, the same
        units as the closed-form pair densities.
        """
        n_first = self.first_counts[first]
        if n_first == 0:
            return np.full(len(self.bin_edges) - 1, np.nan)
        widths = np.diff(self.bin_edges)
        dens = self.counts[(first, second)] / (n_first * widths)
        return dens / self.params.c if per_length else dens


def single_decay_histogram(
    params: ModelParams,
    initial: SystemState,
    n_traj: int,
    seed: int,
    bin_edges: np.ndarray,
) -> dict[Channel, np.ndarray]:
    """Per-channel first-detection counts for trajectories from one state.

    Complements :func:`cascade_histogram` for scenarios that start in a
    single-excitation state (e.g. ``|eg>``): every trajectory contributes at
    most one event, binned over ``bin_edges`` by channel.
    """
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    edges = np.asarray(bin_edges, dtype=float)
    counts = {ch: np.zeros(len(edges) - 1, dtype=np.int64) for ch in _CHANNELS}
    for sub_seed in trajectory_seeds(seed, n_traj):
        traj = quantum_jump_trajectory(params, initial, sub_seed)
        if not traj.events:
            continue
        ev = traj.events[0]
        j = np.searchsorted(edges, ev.time, side="right") - 1
        if 0 <= j < len(edges) - 1:
            counts[ev.channel][j] += 1
    return counts


def cascade_histogram(
    params: ModelParams,
    n_traj: int,
    seed: int,
    bins,
    t_max: float | None = None,
) -> CascadeHistogram:
    """Run the full two-photon cascade from ``|ee>`` and histogram the delays.

    ``bins`` is either an array of delay-bin edges or a bin count combined
    with ``t_max`` (default ``6 / gamma_n``).  Use at least ~1e3 trajectories
    for meaningful statistics.
    """
    if n_traj < 1:
        raise ValueError("need at least one trajectory")
    if np.isscalar(bins):
        if t_max is None:
            if params.gamma_n > 0:
                t_max = 6.0 / params.gamma_n
            elif params.gamma_l > 0:
                t_max = 6.0 / params.gamma_l
            else:
                raise ValueError("cannot choose a delay span with all rates zero")
        edges = np.linspace(0.0, t_max, int(bins) + 1)
    else:
        edges = np.asarray(bins, dtype=float)
        if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0):
            raise ValueError("bin edges must be a 1-D ascending array")

    initial = SystemState.from_label("ee")
    seeds = trajectory_seeds(seed, n_traj)
    pairs = [(f, s) for f in _CHANNELS for s in _CHANNELS]
    counts = {pair: np.zeros(len(edges) - 1, dtype=np.int64) for pair in pairs}
    first_counts = {ch: 0 for ch in _CHANNELS}
    records = []
    for i, sub_seed in enumerate(seeds):
        traj = quantum_jump_trajectory(params, initial, sub_seed)
        ev = traj.events
        first = ev[0] if len(ev) >= 1 else None
        second = ev[1] if len(ev) >= 2 else None
        if first is not None:
            first_counts[first.channel] += 1
        if first is not None and second is not None:
            delay = second.time - first.time
            j = np.searchsorted(edges, delay, side="right") - 1
            if 0 <= j < len(edges) - 1:
                counts[(first.channel, second.channel)][j] += 1
        records.append(
            CascadeRecord(
                trajectory_id=i,
                first=first.channel if first else None,
                first_time=first.time if first else None,
                second=second.channel if second else None,
                second_time=second.time if second else None,
            )
        )
    return CascadeHistogram(
        params=params,
        bin_edges=edges,
        counts=counts,
        first_counts=first_counts,
        n_traj=n_traj,
        master_seed=seed,
        records=tuple(records),
    )
