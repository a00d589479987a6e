"""Checks and physics analyses over simulated trajectories."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
from scipy.ndimage import maximum_filter1d, minimum_filter1d

from .core import GROUND, HBAR, DensityMatrix2, FieldDrive, SystemParams
from .observables import coupling_strength
from .propagators import IntegratorConfig, Trajectory, simulate


class GridMismatchError(ValueError):
    """Trajectories do not share sample times or physical parameters."""


class PiPulseNotFoundError(RuntimeError):
    pass


class AmbiguousPhaseError(RuntimeError):
    """A segment's J.E correlation is too weak to call its phase."""


@dataclass(frozen=True)
class EquivalenceReport:
    max_abs_error: float
    worst_time: float
    tolerance: float
    passed: bool


@dataclass(frozen=True)
class PhaseSegment:
    t_start: float
    t_end: float
    kind: str  # "absorption" | "emission"
    phase_class: str  # "out_of_phase" | "in_phase"
    mean_correlation: float


@dataclass(frozen=True)
class PiPulse:
    time: float
    energy: float
    averaged_energy: float


def check_equivalence(traj_a: Trajectory, traj_b: Trajectory, tol: float) -> EquivalenceReport:
    """Pointwise comparison of the Bloch coordinates of two trajectories."""
    if traj_a.sys != traj_b.sys or traj_a.drive != traj_b.drive:
        raise GridMismatchError("trajectories were run with different system or drive parameters")
    if traj_a.times.shape != traj_b.times.shape or not np.array_equal(traj_a.times, traj_b.times):
        raise GridMismatchError("trajectories have different sample times")
    diff = np.abs(traj_a.bloch - traj_b.bloch)
    per_time = diff.max(axis=1)
    i = int(np.argmax(per_time))
    err = float(per_time[i])
    return EquivalenceReport(err, float(traj_a.times[i]), tol, err <= tol)


def cumulative_work(traj: Trajectory) -> np.ndarray:
    """Trapezoidal running integral of J E over the sample grid."""
    f = traj.J * traj.field
    out = np.zeros_like(f)
    out[1:] = np.cumsum(0.5 * (f[1:] + f[:-1]) * np.diff(traj.times))
    return out


def energy_audit(traj: Trajectory) -> float:
    """Max residual of the energy-work identity U(t) - U(0) + int_0^t J E dt'."""
    if len(traj) < 2:
        raise ValueError("energy audit needs at least two samples")
    return float(np.max(np.abs(traj.U - traj.U[0] + cumulative_work(traj))))


def purity(rho: DensityMatrix2) -> float:
    """Tr(rho^2)."""
    c = complex(rho.rho01)
    return rho.rho00**2 + rho.rho11**2 + 2.0 * (c.real**2 + c.imag**2)


def rwa_pi_time(sys: SystemParams, drive: FieldDrive) -> float:
    """Rotating-wave estimate pi hbar / (|D| E0) of the resonant pi-pulse time.

    Only meaningful for D E0 / (hbar omega0) <~ 0.01.
    """
    if drive.e0 <= 0:
        raise ValueError("pi-pulse time needs e0 > 0")
    return math.pi * HBAR / (abs(sys.dipole) * drive.e0)


def _period_samples(traj: Trajectory) -> int:
    if traj.drive.omega <= 0:
        raise ValueError("cycle averaging needs a drive frequency omega > 0")
    h = float(np.median(np.diff(traj.times)))
    return max(1, int(round(2.0 * math.pi / traj.drive.omega / h)))


def cycle_average(x: np.ndarray, window: int):
    """Centered moving average over ``window`` samples.

    Returns ``(avg, offset)``, where ``avg[k]`` is centred on sample ``k + offset``.
    """
    c = np.concatenate([[0.0], np.cumsum(x)])
    avg = (c[window:] - c[:-window]) / window
    return avg, window // 2


def _extrema(y: np.ndarray, reach: int) -> List[int]:
    """Indices that are the max or min of ``y`` within +-reach, alternating type."""
    n = len(y)
    if n <= 2 * reach:
        return []
    size = 2 * reach + 1
    hi = maximum_filter1d(y, size, mode="nearest")
    lo = minimum_filter1d(y, size, mode="nearest")
    idx = np.arange(reach, n - reach)
    back = y[idx - reach]
    is_max = (y[idx] >= hi[idx]) & (y[idx] > back)
    is_min = (y[idx] <= lo[idx]) & (y[idx] < back)
    found = []
    last = -(10**18)
    for i in idx[is_max | is_min]:
        kind = "max" if is_max[i - reach] else "min"
        if i - last <= reach or (found and found[-1][1] == kind):
            continue
        found.append((int(i), kind))
        last = i
    return [i for i, _ in found]


def locate_pi_pulse(sys: SystemParams, drive: FieldDrive, cfg: IntegratorConfig, horizon: Optional[float] = None) -> PiPulse:
    """Integrate from the ground state to the first maximum of the cycle-averaged U."""
    t_rwa = rwa_pi_time(sys, drive)
    if drive.omega <= 0:
        raise ValueError("pi-pulse search needs a drive frequency omega > 0")
    period = 2.0 * math.pi / drive.omega
    if horizon is None:
        horizon = 2.0 * t_rwa + 2.0 * period
    traj = simulate("bloch", GROUND, sys, drive, horizon, cfg)
    win = _period_samples(traj)
    avg, off = cycle_average(traj.U, win)
    for i in _extrema(avg, win):
        if avg[i] > avg[0]:
            k = i + off
            return PiPulse(float(traj.times[k]), float(traj.U[k]), float(avg[i]))
    raise PiPulseNotFoundError(f"U has no maximum before t = {horizon!r}")


def find_pi_pulse_time(sys: SystemParams, drive: FieldDrive, cfg: IntegratorConfig, horizon: Optional[float] = None) -> float:
    return locate_pi_pulse(sys, drive, cfg, horizon).time


def classify_phase(traj: Trajectory, significance: float = 1e-3) -> List[PhaseSegment]:
    """Split a Rabi trajectory into absorption and emission segments.

    Boundaries sit at extrema of the one-period moving average of U. Each
    segment's phase is the sign of its mean J.E: negative means J runs
    against the field (dU/dt = -J E > 0, absorption). Partial segments
    shorter than one drive period at either end are discarded.

    Raises AmbiguousPhaseError if |mean J.E| in a segment falls below
    ``significance * max|J| * e0``, or if the kinds fail to alternate.
    """
    je = traj.J * traj.field
    if traj.drive.e0 == 0 or not np.any(je):
        return []
    win = _period_samples(traj)
    if len(traj) <= 3 * win:
        raise ValueError("trajectory spans too few drive periods to classify")
    avg, off = cycle_average(traj.U, win)
    bounds = [0] + _extrema(avg, win) + [len(avg) - 1]
    period = 2.0 * math.pi / traj.drive.omega
    floor = significance * float(np.max(np.abs(traj.J))) * traj.drive.e0

    segments = []
    for a, b in zip(bounds[:-1], bounds[1:]):
        ia, ib = a + off, b + off
        t0, t1 = float(traj.times[ia]), float(traj.times[ib])
        if t1 - t0 < period:
            continue
        mean_corr = float(np.mean(je[ia : ib + 1]))
        if abs(mean_corr) < floor:
            raise AmbiguousPhaseError(f"segment [{t0}, {t1}] has |<J E>| = {abs(mean_corr):.3g} below floor {floor:.3g}")
        kind = "absorption" if avg[b] > avg[a] else "emission"
        phase_class = "out_of_phase" if mean_corr < 0 else "in_phase"
        segments.append(PhaseSegment(t0, t1, kind, phase_class, mean_corr))

    for s1, s2 in zip(segments, segments[1:]):
        if s1.kind == s2.kind:
            raise AmbiguousPhaseError(f"segments at t = {s1.t_start} and {s2.t_start} are both {s1.kind}")
    return segments


def coupling_sign_change(traj: Trajectory):
    """Times of the |J|-envelope maximum and of the U = hbar omega0 / 2 crossing,
    both within the first absorption half-cycle.

    The envelope is the one-period RMS of J scaled by sqrt(2); U is
    cycle-averaged before locating the crossing. Where the two coincide the
    coupling K(U) changes sign at the point of largest current.
    """
    win = _period_samples(traj)
    avg, off = cycle_average(traj.U, win)
    ext = _extrema(avg, win)
    stop = ext[0] if ext else len(avg) - 1

    ms, _ = cycle_average(traj.J**2, win)
    env = np.sqrt(2.0 * ms[: stop + 1])
    t_env = float(traj.times[int(np.argmax(env)) + off])

    half = HBAR * traj.sys.omega0 / 2.0
    above = np.nonzero(avg[: stop + 1] >= half)[0]
    if above.size == 0 or above[0] == 0:
        raise ValueError("cycle-averaged U never crosses hbar omega0 / 2 from below")
    k = int(above[0])
    ta, tb = traj.times[k - 1 + off], traj.times[k + off]
    frac = (half - avg[k - 1]) / (avg[k] - avg[k - 1])
    return t_env, float(ta + frac * (tb - ta))


def sign_identity_violations(traj: Trajectory, floor: float) -> int:
    """Count samples where finite-difference dU/dt and -J E disagree in sign.

    Only samples with |J E| > ``floor`` are considered; central differences
    on interior samples.
    """
    t, U = traj.times, traj.U
    dudt = (U[2:] - U[:-2]) / (t[2:] - t[:-2])
    je = (traj.J * traj.field)[1:-1]
    mask = np.abs(je) > floor
    return int(np.count_nonzero(np.sign(dudt[mask]) != -np.sign(je[mask])))


def drive_response_amplitude(traj: Trajectory, quantity: str = "P") -> float:
    """Amplitude of the Fourier component of P (or J, U) at the drive frequency.

    Uses the largest whole number of drive periods in the trajectory, which
    suppresses the undamped free oscillation at omega0 when the two
    frequencies are commensurate over that window.
    """
    omega = traj.drive.omega
    if omega <= 0:
        raise ValueError("drive response needs omega > 0")
    period = 2.0 * math.pi / omega
    t = traj.times
    n_per = int((t[-1] - t[0]) / period)
    if n_per < 1:
        raise ValueError("trajectory shorter than one drive period")
    t_stop = t[0] + n_per * period
    stop = int(np.searchsorted(t, t_stop, side="left"))
    x = getattr(traj, quantity)
    # close the window exactly at a whole number of periods
    ts = np.append(t[:stop], t_stop)
    xs = np.append(x[:stop], np.interp(t_stop, t, x))
    f = xs * np.exp(-1j * (omega * ts + traj.drive.phase))
    integral = np.sum(0.5 * (f[1:] + f[:-1]) * np.diff(ts))
    return float(2.0 * abs(integral) / (ts[-1] - ts[0]))


def classical_response_amplitude(sys: SystemParams, drive: FieldDrive) -> float:
    """Driven amplitude |K(0)| E0 / |omega0^2 - omega^2| of a linear Lorentz oscillator
    with the ground-state coupling."""
    if drive.omega == sys.omega0:
        raise ValueError("classical response diverges on resonance")
    return abs(coupling_strength(0.0, sys)) * drive.e0 / abs(sys.omega0**2 - drive.omega**2)
