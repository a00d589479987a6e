"""Acceptance criteria 1-7. Each test records a PASS/FAIL line before asserting.

Run with ``python3 -m pytest tests/test_acceptance.py -s`` to see the lines
as they are produced; they are also repeated in the terminal summary.
"""

import math
import time
from itertools import combinations

import numpy as np
import pytest

from dipole_bloch import analysis
from dipole_bloch.core import GROUND, HBAR, FieldDrive, SystemParams
from dipole_bloch.observables import coupling_strength
from dipole_bloch.propagators import FORMULATIONS, IntegratorConfig, simulate

SYS = SystemParams(omega0=1.0, dipole=1.0)
DRIVE = FieldDrive(e0=0.02, omega=1.0)
T_PI = math.pi * HBAR / (SYS.dipole * DRIVE.e0)
T_END = 2.0 * T_PI
DT = 1e-3


def _run_all(dt):
    start = time.perf_counter()
    trajs = {f: simulate(f, GROUND, SYS, DRIVE, T_END, IntegratorConfig(dt)) for f in FORMULATIONS}
    return trajs, time.perf_counter() - start


def _discrepancy(trajs):
    return max(analysis.check_equivalence(trajs[a], trajs[b], 0.0).max_abs_error for a, b in combinations(FORMULATIONS, 2))


@pytest.fixture(scope="module")
def base():
    return _run_all(DT)


@pytest.fixture(scope="module")
def half():
    return _run_all(DT / 2)


def test_c1_cross_formulation_equivalence(base, record):
    trajs, elapsed = base
    err = _discrepancy(trajs)
    ok = err <= 1e-8 and elapsed <= 10.0
    record("C1 equivalence", ok, f"max discrepancy {err:.3g} <= 1e-8, runtime {elapsed:.2f} s <= 10 s")
    assert err <= 1e-8
    assert elapsed <= 10.0


def test_c2_conservation(base, record):
    trajs, _ = base
    trace_dev = float(np.max(np.abs(trajs["liouville"].trace - 1.0)))
    purity_drift = max(float(np.max(np.abs(t.purity - t.purity[0]))) for t in trajs.values())
    norms = {f: np.linalg.norm(t.bloch, axis=1) for f, t in trajs.items()}
    norm_drift = max(float(np.max(np.abs(n - n[0]))) for n in norms.values())
    ok = trace_dev == 0.0 and purity_drift <= 1e-9 and norm_drift <= 1e-9
    record("C2 conservation", ok, f"trace dev {trace_dev:.3g} == 0, purity drift {purity_drift:.3g}, |b| drift {norm_drift:.3g} <= 1e-9")
    assert trace_dev == 0.0
    assert purity_drift <= 1e-9
    assert norm_drift <= 1e-9


def test_c3_energy_work(base, record):
    trajs, _ = base
    tol = 1e-6 * HBAR * SYS.omega0
    res = max(analysis.energy_audit(t) for t in trajs.values())
    free = FieldDrive(e0=0.0, omega=1.0)
    res_free = max(
        analysis.energy_audit(simulate(f, GROUND, SYS, free, 50.0, IntegratorConfig(DT))) for f in FORMULATIONS
    )
    ok = res <= tol and res_free <= 1e-12
    record("C3 energy-work", ok, f"residual {res:.3g} <= {tol:.3g}; E0=0 residual {res_free:.3g} <= 1e-12")
    assert res <= tol
    assert res_free <= 1e-12


def test_c4_pi_pulse(record):
    sys = SYS
    drive = FieldDrive(e0=0.01, omega=1.0)
    pulse = analysis.locate_pi_pulse(sys, drive, IntegratorConfig(DT))
    expected = 100.0 * math.pi
    rel = abs(pulse.time / expected - 1.0)
    ok = rel <= 0.01 and pulse.energy >= 0.999 * HBAR * sys.omega0
    record("C4 pi-pulse", ok, f"t_pi {pulse.time:.6g} vs {expected:.6g} (rel {rel:.3g} <= 0.01), U(t_pi) {pulse.energy:.6g} >= 0.999")
    assert rel <= 0.01
    assert pulse.energy >= 0.999 * HBAR * sys.omega0


def test_c5_phase_structure(base, record):
    traj = base[0]["bloch"]
    segs = analysis.classify_phase(traj)
    expected = [("absorption", "out_of_phase"), ("emission", "in_phase")]
    labels = [(s.kind, s.phase_class) for s in segs]
    pattern_ok = len(segs) >= 2 and all(lab == expected[i % 2] for i, lab in enumerate(labels))
    t_env, t_half = analysis.coupling_sign_change(traj)
    period = 2.0 * math.pi / DRIVE.omega
    gap = abs(t_env - t_half) / period
    ok = pattern_ok and gap <= 1.0
    record("C5 phase structure", ok, f"segments {labels}, envelope peak vs half crossing {gap:.3g} periods <= 1")
    assert pattern_ok
    assert gap <= 1.0


def test_c6_classical_weak_drive(record):
    drive = FieldDrive(e0=0.001, omega=2.0 * SYS.omega0)
    traj = simulate("bloch", GROUND, SYS, drive, 200.0 * math.pi, IntegratorConfig(DT))
    amp = analysis.drive_response_amplitude(traj, "P")
    k0 = coupling_strength(0.0, SYS)
    assert k0 == pytest.approx(-2.0 * SYS.dipole**2 * SYS.omega0 / HBAR)
    oracle = abs(k0) * drive.e0 / abs(SYS.omega0**2 - drive.omega**2)
    rel = abs(amp / oracle - 1.0)
    u_max = float(np.max(traj.U))
    ok = rel <= 0.05 and u_max <= 0.01 * HBAR * SYS.omega0
    record("C6 weak drive", ok, f"P amplitude {amp:.6g} vs {oracle:.6g} (rel {rel:.3g} <= 0.05), max U {u_max:.3g} <= 0.01")
    assert rel <= 0.05
    assert u_max <= 0.01 * HBAR * SYS.omega0


def test_c7a_equivalence_convergence(base, half, record):
    e1, e2 = _discrepancy(base[0]), _discrepancy(half[0])
    ratio = e1 / e2 if e2 > 0 else math.inf
    ok = 12.0 <= ratio <= 20.0
    record("C7a discrepancy order", ok, f"{e1:.3g} -> {e2:.3g}, ratio {ratio:.3g} in [12, 20]")
    assert 12.0 <= ratio <= 20.0


def test_c7b_energy_convergence(base, half, record):
    r1 = analysis.energy_audit(base[0]["bloch"])
    r2 = analysis.energy_audit(half[0]["bloch"])
    ratio = r1 / r2
    ok = 3.5 <= ratio <= 4.5
    record("C7b energy residual order", ok, f"{r1:.3g} -> {r2:.3g}, ratio {ratio:.3g} in [3.5, 4.5]")
    assert 3.5 <= ratio <= 4.5
