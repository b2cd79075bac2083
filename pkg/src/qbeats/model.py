"""Two-emitter Hilbert space, excitation-exchange Hamiltonian and channel algebra.

Conventions used throughout the package:

* hbar = 1, so every energy is an angular frequency and every coupling is a
  rate.  Field propagation speed ``c`` defaults to 1 so that positions and
  times share units.
* Product basis ordering is ``(ee, eg, ge, gg)`` where the first letter is
  emitter 1 and the second is emitter 2.  ``|eg>`` therefore means "emitter 1
  excited, emitter 2 in the ground state".
* Eigenbasis ordering is ``(2+, 1+, 1-, 0+)`` with the single-excitation
  states ``|1(+/-)> = (|eg> +/- |ge>)/sqrt(2)``.
* Local detection channel L1 couples only to transitions of emitter 1
  (``ee -> ge`` and ``eg -> gg``); L2 does the same for emitter 2.  The far
  field channel N couples symmetrically to both emitters, so it addresses
  only the ``(+)`` states.

The exchange coupling ``w`` may be negative; the pair correlations are even
in it, only internal phases flip sign.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

_SQRT2 = math.sqrt(2.0)

#: Unitary mapping product-basis amplitudes onto eigenbasis amplitudes.
#: Row order (2+, 1+, 1-, 0+), column order (ee, eg, ge, gg).
_PRODUCT_TO_EIGEN = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 1.0 / _SQRT2, 1.0 / _SQRT2, 0.0],
        [0.0, 1.0 / _SQRT2, -1.0 / _SQRT2, 0.0],
        [0.0, 0.0, 0.0, 1.0],
    ],
    dtype=complex,
)

_NORM_SLACK = 1e-9


class Basis(enum.Enum):
    """Basis tag for four-dimensional emitter states."""

    PRODUCT = "product"
    EIGEN = "eigen"


class Channel(enum.Enum):
    """Physical detection channels: two near-field pickups and the far field."""

    L1 = "L1"
    L2 = "L2"
    N = "N"


class SymmetrizedChannel(enum.Enum):
    """Parity eigenchannels of the local fields plus the (already even) far field."""

    LPLUS = "L+"
    LMINUS = "L-"
    NPLUS = "N+"


@dataclass(frozen=True)
class ModelParams:
    """Physical constants of the coupled pair.

    Parameters
    ----------
    e0:
        Transition energy of a single excitation (angular frequency units).
    w:
        Excitation-exchange coupling between the emitters.  May be negative.
    gamma_l:
        Emission rate into each local channel; identical for L1 and L2 by
        symmetry of the setup.
    gamma_n:
        Emission rate of the symmetric single-excitation state into the far
        field channel N.  The antisymmetric state is dark with respect to N.
    c:
        Field propagation speed, default 1.
    """

    e0: float
    w: float
    gamma_l: float
    gamma_n: float
    c: float = 1.0

    def __post_init__(self) -> None:
        if self.gamma_l < 0:
            raise ValueError(f"gamma_l must be >= 0, got {self.gamma_l}")
        if self.gamma_n < 0:
            raise ValueError(f"gamma_n must be >= 0, got {self.gamma_n}")
        if self.c <= 0:
            raise ValueError(f"c must be > 0, got {self.c}")

    @property
    def omega_plus(self) -> float:
        """Frequency of the symmetric single-excitation state, e0 + w."""
        return self.e0 + self.w

    @property
    def omega_minus(self) -> float:
        """Frequency of the antisymmetric single-excitation state, e0 - w."""
        return self.e0 - self.w

    @property
    def delta_omega(self) -> float:
        """Beat angular frequency of the conditional pair correlations.

        This is the splitting ``omega_plus - omega_minus = 2 w`` between the
        symmetric and antisymmetric single-excitation states, i.e. the
        frequency at which an excitation detected on one site revisits it.
        """
        return 2.0 * self.w

    @property
    def gamma_plus(self) -> float:
        """Total decay rate gamma_l + gamma_n of the symmetric state."""
        return self.gamma_l + self.gamma_n

    @classmethod
    def from_beat_frequency(
        cls,
        delta_omega: float,
        gamma_l: float,
        gamma_n: float,
        e0: float = 0.0,
        c: float = 1.0,
    ) -> "ModelParams":
        """Build parameters from the observable beat frequency (w = delta_omega/2)."""
        return cls(e0=e0, w=delta_omega / 2.0, gamma_l=gamma_l, gamma_n=gamma_n, c=c)


@dataclass(frozen=True, eq=False)
class SystemState:
    """Four complex amplitudes over the pair Hilbert space plus a basis tag.

    The norm may be below one: amplitude radiated into the field is tracked
    by the field engines, not here.  Norms above ``1 + 1e-9`` are rejected.
    """

    amplitudes: np.ndarray
    basis: Basis = Basis.PRODUCT

    def __post_init__(self) -> None:
        amps = np.asarray(self.amplitudes, dtype=complex)
        if amps.shape != (4,):
            raise ValueError(f"state needs exactly 4 amplitudes, got shape {amps.shape}")
        amps = amps.copy()
        amps.setflags(write=False)
        object.__setattr__(self, "amplitudes", amps)
        if self.norm() > 1.0 + _NORM_SLACK:
            raise ValueError(f"state norm {self.norm()} exceeds 1")

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "SystemState":
        n = self.norm()
        if n == 0.0:
            raise ValueError("cannot normalize a zero state")
        return SystemState(self.amplitudes / n, self.basis)

    @classmethod
    def from_label(cls, label: str) -> "SystemState":
        """Basis state by name: 'ee', 'eg', 'ge', 'gg' (product) or '2+', '1+', '1-', '0+'."""
        product = {"ee": 0, "eg": 1, "ge": 2, "gg": 3}
        eigen = {"2+": 0, "1+": 1, "1-": 2, "0+": 3}
        amps = np.zeros(4, dtype=complex)
        if label in product:
            amps[product[label]] = 1.0
            return cls(amps, Basis.PRODUCT)
        if label in eigen:
            amps[eigen[label]] = 1.0
            return cls(amps, Basis.EIGEN)
        raise ValueError(f"unknown state label {label!r}")


def build_hamiltonian(params: ModelParams, basis: Basis) -> np.ndarray:
    """4x4 Hermitian Hamiltonian of the coupled pair in the requested basis.

    In the product basis the diagonal is ``(2 e0, e0, e0, 0)`` and the
    exchange coupling ``w`` connects ``|eg>`` and ``|ge>``.  In the eigenbasis
    the matrix is ``diag(2 e0, e0 + w, e0 - w, 0)``.
    """
    h = np.zeros((4, 4), dtype=complex)
    if basis is Basis.PRODUCT:
        h[0, 0] = 2.0 * params.e0
        h[1, 1] = params.e0
        h[2, 2] = params.e0
        h[1, 2] = params.w
        h[2, 1] = params.w
    elif basis is Basis.EIGEN:
        h[0, 0] = 2.0 * params.e0
        h[1, 1] = params.omega_plus
        h[2, 2] = params.omega_minus
    else:  # pragma: no cover - enum is exhaustive
        raise ValueError(f"unknown basis {basis}")
    return h


def to_eigen_basis(state: SystemState) -> SystemState:
    """Rotate a product-basis state into the symmetric/antisymmetric eigenbasis."""
    if state.basis is not Basis.PRODUCT:
        raise ValueError("to_eigen_basis expects a product-basis state")
    return SystemState(_PRODUCT_TO_EIGEN @ state.amplitudes, Basis.EIGEN)


def to_product_basis(state: SystemState) -> SystemState:
    """Inverse of :func:`to_eigen_basis`; exact round trips up to 1e-12."""
    if state.basis is not Basis.EIGEN:
        raise ValueError("to_product_basis expects an eigenbasis state")
    # the map is real-orthogonal, so the inverse is the transpose
    return SystemState(_PRODUCT_TO_EIGEN.T @ state.amplitudes, Basis.PRODUCT)


def symmetrize_channel_amplitudes(a_l1, a_l2):
    """Local-channel amplitudes -> parity eigenchannel amplitudes.

    ``a_L(+/-) = (a_L1 +/- a_L2)/sqrt(2)``.  Accepts scalars or arrays; the
    map is its own inverse and preserves ``|a_L1|^2 + |a_L2|^2`` exactly.
    """
    a_l1 = np.asarray(a_l1, dtype=complex)
    a_l2 = np.asarray(a_l2, dtype=complex)
    return (a_l1 + a_l2) / _SQRT2, (a_l1 - a_l2) / _SQRT2


def desymmetrize_channel_amplitudes(a_lplus, a_lminus):
    """Parity eigenchannel amplitudes -> local-channel amplitudes (inverse map)."""
    return symmetrize_channel_amplitudes(a_lplus, a_lminus)
