"""Time integration of the four equivalent formulations of the driven dipole.

* ``liouville``   -- density matrix, i hbar drho/dt = [H, rho]
* ``schrodinger`` -- state vector, i hbar dpsi/dt = H psi
* ``bloch``       -- Bloch vector (u, v, w)
* ``pju``         -- polarization / current density / internal energy oscillator

The fixed-step integrator is classical RK4 with the field evaluated at the
stage times t, t + dt/2, t + dt. Density matrix and state vector are
renormalized after every step; Bloch and PJU states are left raw so that
their drift stays observable.

The steppers work on plain tuples of Python scalars: for a two-level system
this is several times faster than 2x2 numpy arithmetic.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from .core import (
    HBAR,
    BlochVector,
    DensityMatrix2,
    FieldDrive,
    NumericalError,
    PJUState,
    StateVector2,
    SystemParams,
    bloch_from_density,
    coupling,
    density_from_bloch,
    density_from_state,
    field_value,
    state_from_bloch,
)
from .observables import bloch_arrays, bloch_from_observables, observables_from_bloch, pju_arrays

FORMULATIONS = ("liouville", "schrodinger", "bloch", "pju")
METHODS = ("rk4", "rk45")


class SimulationError(RuntimeError):
    """A step failed during :func:`simulate`; ``time`` is where it happened."""

    def __init__(self, message: str, time: float):
        super().__init__(f"{message} (at t = {time!r})")
        self.time = time


def default_dt(sys: SystemParams) -> float:
    """A thousandth of the natural period."""
    return 1e-3 * 2.0 * math.pi / sys.omega0


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    method: str = "rk4"
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be finite and > 0, got {self.dt!r}")
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be > 0")


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Sampled output of :func:`simulate`.

    ``bloch`` and ``pju`` are (N, 3) arrays of (u, v, w) and (P, J, U);
    ``field`` holds E(t) at each sample time. ``trace`` is Tr(rho) for
    liouville runs and <psi|psi> for schrodinger runs, None otherwise.
    """

    times: np.ndarray
    field: np.ndarray
    bloch: np.ndarray
    pju: np.ndarray
    sys: SystemParams
    drive: FieldDrive
    formulation: str
    trace: Optional[np.ndarray] = None

    def __len__(self):
        return len(self.times)

    u = property(lambda self: self.bloch[:, 0])
    v = property(lambda self: self.bloch[:, 1])
    w = property(lambda self: self.bloch[:, 2])
    P = property(lambda self: self.pju[:, 0])
    J = property(lambda self: self.pju[:, 1])
    U = property(lambda self: self.pju[:, 2])

    @property
    def purity(self) -> np.ndarray:
        """Tr(rho^2) = (1 + |b|^2) / 2 at each sample."""
        return 0.5 * (1.0 + np.einsum("ij,ij->i", self.bloch, self.bloch))

    def sample(self, i: int):
        """(BlochVector, PJUState, E) at sample ``i``."""
        return (BlochVector(*map(float, self.bloch[i])), PJUState(*map(float, self.pju[i])), float(self.field[i]))


# -- right-hand sides -------------------------------------------------------
#
# With H = [[0, h], [h, hbar w0]], h = D E:
#   drho00/dt = -2 h Im(rho01) / hbar,  drho11/dt = -drho00/dt
#   drho01/dt = (i / hbar) (hbar w0 rho01 - h (rho11 - rho00))


def _liouville_stepper(sys: SystemParams, drive: FieldDrive):
    w0, efield = sys.omega0, drive.sampler()

    def f(a, b, c, h):
        g = -2.0 * h * c.imag / HBAR
        return g, -g, 1j * (HBAR * w0 * c - h * (b - a)) / HBAR

    def step(state, t, dt):
        a, b, c = state
        half = 0.5 * dt
        h1 = coupling(sys, efield(t))
        h2 = coupling(sys, efield(t + half))
        h3 = coupling(sys, efield(t + dt))
        ka1, kb1, kc1 = f(a, b, c, h1)
        ka2, kb2, kc2 = f(a + half * ka1, b + half * kb1, c + half * kc1, h2)
        ka3, kb3, kc3 = f(a + half * ka2, b + half * kb2, c + half * kc2, h2)
        ka4, kb4, kc4 = f(a + dt * ka3, b + dt * kb3, c + dt * kc3, h3)
        s = dt / 6.0
        a = a + s * (ka1 + 2.0 * ka2 + 2.0 * ka3 + ka4)
        b = b + s * (kb1 + 2.0 * kb2 + 2.0 * kb3 + kb4)
        c = c + s * (kc1 + 2.0 * kc2 + 2.0 * kc3 + kc4)
        if not (math.isfinite(a) and math.isfinite(b) and cmath.isfinite(c)):
            raise NumericalError("non-finite density matrix entry")
        # rho10 is stored implicitly as conj(rho01), so Hermiticity is structural;
        # normalize the trace and pin rho11 so that rho00 + rho11 == 1.
        tr = a + b
        a = a / tr
        return a, 1.0 - a, c / tr

    return step


def _schrodinger_stepper(sys: SystemParams, drive: FieldDrive):
    w0, efield = sys.omega0, drive.sampler()
    sqrt = math.sqrt

    def f(x, y, h):
        return -1j * h * y / HBAR, -1j * (h * x + HBAR * w0 * y) / HBAR

    def step(state, t, dt):
        x, y = state
        half = 0.5 * dt
        h1 = coupling(sys, efield(t))
        h2 = coupling(sys, efield(t + half))
        h3 = coupling(sys, efield(t + dt))
        kx1, ky1 = f(x, y, h1)
        kx2, ky2 = f(x + half * kx1, y + half * ky1, h2)
        kx3, ky3 = f(x + half * kx2, y + half * ky2, h2)
        kx4, ky4 = f(x + dt * kx3, y + dt * ky3, h3)
        s = dt / 6.0
        x = x + s * (kx1 + 2.0 * kx2 + 2.0 * kx3 + kx4)
        y = y + s * (ky1 + 2.0 * ky2 + 2.0 * ky3 + ky4)
        if not (cmath.isfinite(x) and cmath.isfinite(y)):
            raise NumericalError("non-finite state amplitude")
        n = sqrt(x.real * x.real + x.imag * x.imag + y.real * y.real + y.imag * y.imag)
        return x / n, y / n

    return step


def _bloch_stepper(sys: SystemParams, drive: FieldDrive):
    # du/dt = w0 v ; dv/dt = -w0 u - 2 Om w ; dw/dt = 2 Om v, with hbar Om = D E
    w0, d, efield = sys.omega0, sys.dipole, drive.sampler()

    def step(state, t, dt):
        u, v, w = state
        half = 0.5 * dt
        o1 = 2.0 * d * efield(t) / HBAR
        o2 = 2.0 * d * efield(t + half) / HBAR
        o3 = 2.0 * d * efield(t + dt) / HBAR
        ku1, kv1, kw1 = w0 * v, -w0 * u - o1 * w, o1 * v
        u2, v2, w2 = u + half * ku1, v + half * kv1, w + half * kw1
        ku2, kv2, kw2 = w0 * v2, -w0 * u2 - o2 * w2, o2 * v2
        u3, v3, w3 = u + half * ku2, v + half * kv2, w + half * kw2
        ku3, kv3, kw3 = w0 * v3, -w0 * u3 - o2 * w3, o2 * v3
        u4, v4, w4 = u + dt * ku3, v + dt * kv3, w + dt * kw3
        ku4, kv4, kw4 = w0 * v4, -w0 * u4 - o3 * w4, o3 * v4
        s = dt / 6.0
        u = u + s * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4)
        v = v + s * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4)
        w = w + s * (kw1 + 2.0 * kw2 + 2.0 * kw3 + kw4)
        if not (math.isfinite(u) and math.isfinite(v) and math.isfinite(w)):
            raise NumericalError("non-finite Bloch component")
        return u, v, w

    return step


def _pju_stepper(sys: SystemParams, drive: FieldDrive):
    # dP/dt = J ; dJ/dt = -w0^2 P + K(U) E ; dU/dt = -J E
    # K(U) = -(2 D^2 w0 / hbar) (1 - 2 U / (hbar w0)) = k0 + k1 U
    w0, efield = sys.omega0, drive.sampler()
    w0sq = w0 * w0
    k0 = -2.0 * sys.dipole**2 * w0 / HBAR
    k1 = 4.0 * sys.dipole**2 / HBAR**2

    def step(state, t, dt):
        p, j, en = state
        half = 0.5 * dt
        e1, e2, e3 = efield(t), efield(t + half), efield(t + dt)
        kp1, kj1, ku1 = j, -w0sq * p + (k0 + k1 * en) * e1, -j * e1
        p2, j2, u2 = p + half * kp1, j + half * kj1, en + half * ku1
        kp2, kj2, ku2 = j2, -w0sq * p2 + (k0 + k1 * u2) * e2, -j2 * e2
        p3, j3, u3 = p + half * kp2, j + half * kj2, en + half * ku2
        kp3, kj3, ku3 = j3, -w0sq * p3 + (k0 + k1 * u3) * e2, -j3 * e2
        p4, j4, u4 = p + dt * kp3, j + dt * kj3, en + dt * ku3
        kp4, kj4, ku4 = j4, -w0sq * p4 + (k0 + k1 * u4) * e3, -j4 * e3
        s = dt / 6.0
        p = p + s * (kp1 + 2.0 * kp2 + 2.0 * kp3 + kp4)
        j = j + s * (kj1 + 2.0 * kj2 + 2.0 * kj3 + kj4)
        en = en + s * (ku1 + 2.0 * ku2 + 2.0 * ku3 + ku4)
        if not (math.isfinite(p) and math.isfinite(j) and math.isfinite(en)):
            raise NumericalError("non-finite PJU component")
        return p, j, en

    return step


_STEPPERS = {
    "liouville": _liouville_stepper,
    "schrodinger": _schrodinger_stepper,
    "bloch": _bloch_stepper,
    "pju": _pju_stepper,
}


def _check_dt(dt):
    if not (math.isfinite(dt) and dt > 0):
        raise ValueError(f"dt must be finite and > 0, got {dt!r}")


def step_liouville(rho: DensityMatrix2, sys: SystemParams, drive: FieldDrive, t: float, dt: float) -> DensityMatrix2:
    _check_dt(dt)
    rho.validate()
    a, b, c = _liouville_stepper(sys, drive)((rho.rho00, rho.rho11, complex(rho.rho01)), t, dt)
    return DensityMatrix2(a, b, c)


def step_schrodinger(psi: StateVector2, sys: SystemParams, drive: FieldDrive, t: float, dt: float) -> StateVector2:
    _check_dt(dt)
    psi.validate()
    x, y = _schrodinger_stepper(sys, drive)((complex(psi.alpha), complex(psi.beta)), t, dt)
    return StateVector2(x, y)


def step_bloch(b: BlochVector, sys: SystemParams, drive: FieldDrive, t: float, dt: float) -> BlochVector:
    _check_dt(dt)
    b.validate()
    return BlochVector(*_bloch_stepper(sys, drive)((b.u, b.v, b.w), t, dt))


def step_pju(s: PJUState, sys: SystemParams, drive: FieldDrive, t: float, dt: float) -> PJUState:
    _check_dt(dt)
    bloch_from_observables(s, sys)  # ball check
    return PJUState(*_pju_stepper(sys, drive)((s.p, s.j, s.u_energy), t, dt))


StateLike = Union[DensityMatrix2, StateVector2, BlochVector, PJUState]


def _native_init(formulation: str, init: StateLike, sys: SystemParams) -> tuple:
    """Convert ``init`` to the formulation's internal tuple.

    A BlochVector is accepted for every formulation.
    """
    if formulation == "liouville":
        if isinstance(init, StateVector2):
            init = density_from_state(init)
        elif isinstance(init, BlochVector):
            init = density_from_bloch(init)
        if not isinstance(init, DensityMatrix2):
            raise TypeError(f"cannot start a liouville run from {type(init).__name__}")
        init.validate()
        return init.rho00, init.rho11, complex(init.rho01)
    if formulation == "schrodinger":
        if isinstance(init, BlochVector):
            init = state_from_bloch(init)
        if not isinstance(init, StateVector2):
            raise TypeError(f"cannot start a schrodinger run from {type(init).__name__}")
        init.validate()
        return complex(init.alpha), complex(init.beta)
    if formulation == "bloch":
        if isinstance(init, DensityMatrix2):
            init = bloch_from_density(init)
        if not isinstance(init, BlochVector):
            raise TypeError(f"cannot start a bloch run from {type(init).__name__}")
        init.validate()
        return init.u, init.v, init.w
    if formulation == "pju":
        if isinstance(init, BlochVector):
            init = observables_from_bloch(init.validate(), sys)
        if not isinstance(init, PJUState):
            raise TypeError(f"cannot start a pju run from {type(init).__name__}")
        bloch_from_observables(init, sys)
        return init.p, init.j, init.u_energy
    raise ValueError(f"unknown formulation {formulation!r}; expected one of {FORMULATIONS}")


def _rhs(formulation: str, sys: SystemParams, drive: FieldDrive):
    """Real-vector right-hand side for general-purpose ODE solvers."""
    w0, d = sys.omega0, sys.dipole
    efield = drive.sampler()
    if formulation == "liouville":  # y = (rho00, rho11, Re rho01, Im rho01)
        def rhs(t, y):
            h = d * efield(t)
            c = complex(y[2], y[3])
            g = -2.0 * h * y[3] / HBAR
            dc = 1j * (HBAR * w0 * c - h * (y[1] - y[0])) / HBAR
            return [g, -g, dc.real, dc.imag]
    elif formulation == "schrodinger":  # y = (Re a, Im a, Re b, Im b)
        def rhs(t, y):
            h = d * efield(t)
            x, z = complex(y[0], y[1]), complex(y[2], y[3])
            dx, dz = -1j * h * z / HBAR, -1j * (h * x + HBAR * w0 * z) / HBAR
            return [dx.real, dx.imag, dz.real, dz.imag]
    elif formulation == "bloch":
        def rhs(t, y):
            o = 2.0 * d * efield(t) / HBAR
            return [w0 * y[1], -w0 * y[0] - o * y[2], o * y[1]]
    else:
        k0, k1 = -2.0 * d * d * w0 / HBAR, 4.0 * d * d / HBAR**2

        def rhs(t, y):
            e = efield(t)
            return [y[1], -w0 * w0 * y[0] + (k0 + k1 * y[2]) * e, -y[1] * e]
    return rhs


def _to_real(formulation, state):
    if formulation == "liouville":
        return [state[0], state[1], state[2].real, state[2].imag]
    if formulation == "schrodinger":
        return [state[0].real, state[0].imag, state[1].real, state[1].imag]
    return list(state)


def _from_real(formulation, y):
    if formulation == "liouville":
        tr = y[0] + y[1]
        a = y[0] / tr
        return a, 1.0 - a, complex(y[2], y[3]) / tr
    if formulation == "schrodinger":
        x, z = complex(y[0], y[1]), complex(y[2], y[3])
        n = math.sqrt(abs(x) ** 2 + abs(z) ** 2)
        return x / n, z / n
    return tuple(float(v) for v in y)


def _sample_grid(t_end: float, dt: float, sample_every: int):
    """Step count and the step indices that are recorded.

    The last step is shortened so the run ends exactly at ``t_end``.
    """
    n = max(1, int(math.ceil(t_end / dt - 1e-9)))
    idx = list(range(0, n, sample_every))
    if idx[-1] != n:
        idx.append(n)
    return n, idx


def simulate(
    formulation: str,
    init: StateLike,
    sys: SystemParams,
    drive: FieldDrive,
    t_end: float,
    cfg: IntegratorConfig,
    sample_every: int = 1,
) -> Trajectory:
    """Integrate one formulation from t = 0 to ``t_end``.

    Samples the initial state, every ``sample_every``-th step and the final
    state. Each sample carries the Bloch vector, the (P, J, U) observables
    and the field value.
    """
    if formulation not in FORMULATIONS:
        raise ValueError(f"unknown formulation {formulation!r}; expected one of {FORMULATIONS}")
    if not (math.isfinite(t_end) and t_end > 0):
        raise ValueError(f"t_end must be finite and > 0, got {t_end!r}")
    if int(sample_every) != sample_every or sample_every < 1:
        raise ValueError(f"sample_every must be an integer >= 1, got {sample_every!r}")
    sample_every = int(sample_every)

    state = _native_init(formulation, init, sys)
    n, idx = _sample_grid(t_end, cfg.dt, sample_every)
    dt = cfg.dt
    times = np.array([k * dt for k in idx[:-1]] + [t_end])

    if cfg.method == "rk4":
        states = _run_rk4(formulation, state, sys, drive, n, dt, t_end, sample_every)
    else:
        states = _run_rk45(formulation, state, sys, drive, times, cfg)

    trace = None
    if formulation == "pju":
        pju = np.array(states, dtype=float)
        bloch = bloch_arrays(pju, sys)
    else:
        if formulation == "bloch":
            bloch = np.array(states, dtype=float)
        else:
            bloch, trace = _bloch_samples(formulation, states)
        pju = pju_arrays(bloch, sys)
    field = np.array([field_value(drive, float(t)) for t in times])
    return Trajectory(times, field, bloch, pju, sys, drive, formulation, trace)


def _run_rk4(formulation, state, sys, drive, n, dt, t_end, sample_every):
    step = _STEPPERS[formulation](sys, drive)
    out = [state]
    k = 0
    try:
        for k in range(n - 1):
            state = step(state, k * dt, dt)
            if (k + 1) % sample_every == 0:
                out.append(state)
        # final (possibly shortened) step lands exactly on t_end
        k = n - 1
        state = step(state, k * dt, t_end - k * dt)
    except (NumericalError, ZeroDivisionError) as exc:
        raise SimulationError(f"{formulation} step failed: {exc}", k * dt) from exc
    out.append(state)
    return out


def _run_rk45(formulation, state, sys, drive, times, cfg):
    from scipy.integrate import solve_ivp

    sol = solve_ivp(
        _rhs(formulation, sys, drive),
        (0.0, float(times[-1])),
        _to_real(formulation, state),
        method="RK45",
        t_eval=times,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.dt * 100,
    )
    if not sol.success or not np.all(np.isfinite(sol.y)):
        raise SimulationError(f"{formulation} rk45 integration failed: {sol.message}", float(sol.t[-1]) if sol.t.size else 0.0)
    return [_from_real(formulation, sol.y[:, i]) for i in range(sol.y.shape[1])]


def _bloch_samples(formulation, states):
    if formulation == "liouville":
        a = np.array([s[0] for s in states])
        b = np.array([s[1] for s in states])
        c = np.array([s[2] for s in states], dtype=complex)
        return np.column_stack([2.0 * c.real, -2.0 * c.imag, a - b]), a + b
    if formulation == "schrodinger":
        x = np.array([s[0] for s in states], dtype=complex)
        y = np.array([s[1] for s in states], dtype=complex)
        r01 = x * y.conj()
        px, py = np.abs(x) ** 2, np.abs(y) ** 2
        return np.column_stack([2.0 * r01.real, -2.0 * r01.imag, px - py]), px + py
    raise ValueError(formulation)
