"""Domain types, field waveform, Hamiltonian and the Bloch-sphere maps.

Units: hbar = 1. Frequencies, the dipole matrix element and the field
amplitude are dimensionless simulation parameters.

Bloch-vector convention: rho = (I + u sx + v sy + w sz) / 2, i.e.
rho01 = <0|rho|1> = (u - i v) / 2 and w = rho00 - rho11.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

HBAR = 1.0

#: Absolute tolerance used when validating state invariants.
STATE_TOL = 1e-9


class InvalidStateError(ValueError):
    """A state violates trace, positivity, or normalization beyond tolerance."""


class NumericalError(ArithmeticError):
    """An integrator produced a non-finite value."""


@dataclass(frozen=True)
class SystemParams:
    """Transition frequency ``omega0`` and dipole matrix element ``dipole``."""

    omega0: float
    dipole: float

    def __post_init__(self):
        if not (math.isfinite(self.omega0) and math.isfinite(self.dipole)):
            raise ValueError("omega0 and dipole must be finite")
        if self.omega0 <= 0:
            raise ValueError(f"omega0 must be > 0, got {self.omega0}")
        if self.dipole == 0:
            raise ValueError("dipole must be nonzero")


@dataclass(frozen=True)
class Constant:
    """Field always on."""

    def __call__(self, t: float) -> float:
        return 1.0


@dataclass(frozen=True)
class Rectangular:
    """Field on for ``t_on <= t < t_off``, exactly zero elsewhere."""

    t_on: float
    t_off: float

    def __post_init__(self):
        if not self.t_on < self.t_off:
            raise ValueError(f"rectangular envelope needs t_on < t_off, got {self.t_on}, {self.t_off}")

    def __call__(self, t: float) -> float:
        return 1.0 if self.t_on <= t < self.t_off else 0.0


Envelope = Union[Constant, Rectangular]


@dataclass(frozen=True)
class FieldDrive:
    """Drive E(t) = envelope(t) * e0 * cos(omega t + phase)."""

    e0: float
    omega: float
    envelope: Envelope = field(default_factory=Constant)
    phase: float = 0.0

    def __post_init__(self):
        for name in ("e0", "omega", "phase"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")
        if self.e0 < 0:
            raise ValueError(f"e0 must be >= 0, got {self.e0}")
        if self.omega < 0:
            raise ValueError(f"omega must be >= 0, got {self.omega}")

    def sampler(self):
        """Return a fast scalar function ``t -> E(t)`` for integrator loops."""
        e0, omega, phase, cos = self.e0, self.omega, self.phase, math.cos
        env = self.envelope
        if e0 == 0.0:
            return lambda t: 0.0
        if isinstance(env, Rectangular):
            t_on, t_off = env.t_on, env.t_off
            return lambda t: e0 * cos(omega * t + phase) if t_on <= t < t_off else 0.0
        return lambda t: e0 * cos(omega * t + phase)


def field_value(drive: FieldDrive, t: float) -> float:
    """Electric field at time ``t``."""
    return drive.envelope(t) * drive.e0 * math.cos(drive.omega * t + drive.phase)


@dataclass(frozen=True)
class DensityMatrix2:
    """Two-level density matrix; ``rho10`` is the conjugate of ``rho01``."""

    rho00: float
    rho11: float
    rho01: complex

    @property
    def rho10(self) -> complex:
        return complex(self.rho01).conjugate()

    @property
    def trace(self) -> float:
        return self.rho00 + self.rho11

    def matrix(self) -> np.ndarray:
        return np.array([[self.rho00, self.rho01], [self.rho10, self.rho11]], dtype=complex)

    @classmethod
    def from_matrix(cls, m) -> "DensityMatrix2":
        """Build from a 2x2 array, Hermitizing it (average with its adjoint)."""
        m = np.asarray(m, dtype=complex)
        if m.shape != (2, 2):
            raise InvalidStateError(f"expected a 2x2 matrix, got shape {m.shape}")
        h = 0.5 * (m + m.conj().T)
        return cls(float(h[0, 0].real), float(h[1, 1].real), complex(h[0, 1]))

    def validate(self, tol: float = STATE_TOL) -> "DensityMatrix2":
        vals = (self.rho00, self.rho11, self.rho01.real, self.rho01.imag)
        if not all(math.isfinite(x) for x in vals):
            raise InvalidStateError("density matrix has non-finite entries")
        if abs(self.trace - 1.0) > tol:
            raise InvalidStateError(f"trace {self.trace!r} deviates from 1")
        if not (-tol <= self.rho00 <= 1 + tol and -tol <= self.rho11 <= 1 + tol):
            raise InvalidStateError(f"populations out of [0, 1]: {self.rho00}, {self.rho11}")
        if abs(self.rho01) ** 2 > self.rho00 * self.rho11 + tol:
            raise InvalidStateError("coherence violates positivity |rho01|^2 <= rho00 rho11")
        return self


@dataclass(frozen=True)
class StateVector2:
    """Pure state alpha|0> + beta|1>."""

    alpha: complex
    beta: complex

    @property
    def norm(self) -> float:
        return math.sqrt(abs(self.alpha) ** 2 + abs(self.beta) ** 2)

    def validate(self, tol: float = STATE_TOL) -> "StateVector2":
        if not (cmath.isfinite(self.alpha) and cmath.isfinite(self.beta)):
            raise InvalidStateError("state vector has non-finite amplitudes")
        if abs(self.norm - 1.0) > tol:
            raise InvalidStateError(f"state norm {self.norm!r} deviates from 1")
        return self


@dataclass(frozen=True)
class BlochVector:
    u: float
    v: float
    w: float

    @property
    def norm(self) -> float:
        return math.sqrt(self.u * self.u + self.v * self.v + self.w * self.w)

    def as_array(self) -> np.ndarray:
        return np.array([self.u, self.v, self.w])

    def validate(self, tol: float = STATE_TOL) -> "BlochVector":
        if not all(math.isfinite(x) for x in (self.u, self.v, self.w)):
            raise InvalidStateError("Bloch vector has non-finite components")
        if self.norm > 1.0 + tol:
            raise InvalidStateError(f"|b| = {self.norm!r} exceeds 1")
        return self


@dataclass(frozen=True)
class PJUState:
    """Polarization ``p``, current density ``j`` and internal energy ``u_energy``."""

    p: float
    j: float
    u_energy: float


GROUND = BlochVector(0.0, 0.0, 1.0)
EXCITED = BlochVector(0.0, 0.0, -1.0)


def coupling(sys: SystemParams, e_field: float) -> float:
    """Off-diagonal Hamiltonian element for a field value ``e_field``.

    The Bloch and oscillator equations of motion used throughout the package
    (dw/dt = +2 D E v / hbar, dU/dt = -J E) require +D E here under the
    rho = (I + b.sigma)/2 convention.
    """
    return sys.dipole * e_field


def hamiltonian(sys: SystemParams, e_field: float) -> np.ndarray:
    """Two-level Hamiltonian in the {|0>, |1>} basis.

    Returns ``[[0, D E], [D E, hbar omega0]]``; the matrix is real symmetric,
    hence exactly Hermitian.
    """
    h = coupling(sys, e_field)
    return np.array([[0.0, h], [h, HBAR * sys.omega0]], dtype=complex)


def bloch_from_density(rho: DensityMatrix2, tol: float = STATE_TOL) -> BlochVector:
    """Bloch coordinates of a density matrix.

    u = rho01 + rho10, v = i (rho01 - rho10), w = rho00 - rho11.
    """
    rho.validate(tol)
    c = complex(rho.rho01)
    return BlochVector(2.0 * c.real, -2.0 * c.imag, rho.rho00 - rho.rho11)


def density_from_bloch(b: BlochVector, tol: float = STATE_TOL) -> DensityMatrix2:
    """Inverse of :func:`bloch_from_density`: rho = (I + b.sigma) / 2."""
    b.validate(tol)
    return DensityMatrix2(0.5 * (1.0 + b.w), 0.5 * (1.0 - b.w), complex(0.5 * b.u, -0.5 * b.v))


def density_from_state(psi: StateVector2, tol: float = STATE_TOL) -> DensityMatrix2:
    """Pure-state projector |psi><psi|."""
    psi.validate(tol)
    a, b = complex(psi.alpha), complex(psi.beta)
    return DensityMatrix2(abs(a) ** 2, abs(b) ** 2, a * b.conjugate())


def state_from_bloch(b: BlochVector, tol: float = STATE_TOL) -> StateVector2:
    """A state vector (real non-negative alpha) whose Bloch vector is ``b``.

    Only pure states (|b| = 1 within ``tol``) have one.
    """
    b.validate(tol)
    if abs(b.norm - 1.0) > tol:
        raise InvalidStateError(f"mixed Bloch vector (|b| = {b.norm!r}) has no state vector")
    n = b.norm
    u, v, w = b.u / n, b.v / n, b.w / n
    alpha = math.sqrt(max(0.0, 0.5 * (1.0 + w)))
    if alpha < 1e-300:
        return StateVector2(0j, 1 + 0j)
    # rho01 = alpha * conj(beta) = (u - i v) / 2
    beta = complex(0.5 * u, 0.5 * v) / alpha
    return StateVector2(complex(alpha), beta)
