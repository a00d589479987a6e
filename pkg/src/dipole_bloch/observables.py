"""Polarization, current density and internal energy of the dipole ensemble.

All quantities are per two-level system in a unit volume.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import (
    HBAR,
    STATE_TOL,
    BlochVector,
    DensityMatrix2,
    InvalidStateError,
    NumericalError,
    PJUState,
    SystemParams,
)


@dataclass(frozen=True)
class ObservableOperators:
    p_op: np.ndarray
    j_op: np.ndarray
    u_op: np.ndarray


def observables_from_bloch(b: BlochVector, sys: SystemParams) -> PJUState:
    """P = D u, J = omega0 D v, U = hbar omega0 (1 - w) / 2."""
    d, w0 = sys.dipole, sys.omega0
    return PJUState(d * b.u, w0 * d * b.v, HBAR * w0 * (1.0 - b.w) / 2.0)


def bloch_from_observables(s: PJUState, sys: SystemParams, tol: float = STATE_TOL) -> BlochVector:
    d, w0 = sys.dipole, sys.omega0
    b = BlochVector(s.p / d, s.j / (w0 * d), 1.0 - 2.0 * s.u_energy / (HBAR * w0))
    if b.norm > 1.0 + tol:
        raise InvalidStateError(f"PJU state maps outside the Bloch ball (|b| = {b.norm!r})")
    return b


def pju_arrays(bloch: np.ndarray, sys: SystemParams) -> np.ndarray:
    """Vectorized :func:`observables_from_bloch` over an (N, 3) array."""
    d, w0 = sys.dipole, sys.omega0
    out = np.empty_like(bloch, dtype=float)
    out[:, 0] = d * bloch[:, 0]
    out[:, 1] = w0 * d * bloch[:, 1]
    out[:, 2] = HBAR * w0 * (1.0 - bloch[:, 2]) / 2.0
    return out


def bloch_arrays(pju: np.ndarray, sys: SystemParams) -> np.ndarray:
    """Vectorized :func:`bloch_from_observables` (no ball check)."""
    d, w0 = sys.dipole, sys.omega0
    out = np.empty_like(pju, dtype=float)
    out[:, 0] = pju[:, 0] / d
    out[:, 1] = pju[:, 1] / (w0 * d)
    out[:, 2] = 1.0 - 2.0 * pju[:, 2] / (HBAR * w0)
    return out


def operator_matrices(sys: SystemParams) -> ObservableOperators:
    """Operators whose expectation values are P, J and U.

    P_op = D (|0><1| + |1><0|), J_op = -i omega0 D (|0><1| - |1><0|),
    U_op = (hbar omega0 / 2) [I - (|0><0| - |1><1|)].
    """
    d, w0 = sys.dipole, sys.omega0
    ket0bra1 = np.array([[0, 1], [0, 0]], dtype=complex)
    ket1bra0 = ket0bra1.T.copy()
    sz = np.diag([1.0, -1.0]).astype(complex)
    return ObservableOperators(
        p_op=d * (ket0bra1 + ket1bra0),
        j_op=-1j * w0 * d * (ket0bra1 - ket1bra0),
        u_op=(HBAR * w0 / 2.0) * (np.eye(2, dtype=complex) - sz),
    )


def expectation(rho: DensityMatrix2, op: np.ndarray) -> float:
    """Tr(rho op) for a Hermitian ``op``.

    Raises NumericalError if the imaginary part exceeds 1e-12 * ||op||.
    """
    op = np.asarray(op, dtype=complex)
    val = complex(np.trace(rho.matrix() @ op))
    scale = max(float(np.linalg.norm(op, 2)), 1.0)
    if abs(val.imag) > 1e-12 * scale:
        raise NumericalError(f"expectation has imaginary part {val.imag!r}; operator not Hermitian?")
    return val.real


def coupling_strength(u_energy: float, sys: SystemParams, tol: float = STATE_TOL) -> float:
    """Energy-dependent drive coupling K(U) = -(2 D^2 omega0 / hbar) (1 - 2U / (hbar omega0)).

    Negative below half excitation, zero at U = hbar omega0 / 2, positive above.
    """
    e_max = HBAR * sys.omega0
    if not (-tol * e_max <= u_energy <= e_max * (1 + tol)) or math.isnan(u_energy):
        raise ValueError(f"internal energy {u_energy!r} outside [0, hbar omega0]")
    return _k(u_energy, sys.omega0, sys.dipole)


def _k(u_energy, omega0, dipole):
    return -(2.0 * dipole * dipole * omega0 / HBAR) * (1.0 - 2.0 * u_energy / (HBAR * omega0))
