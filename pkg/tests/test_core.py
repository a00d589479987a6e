import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import random_bloch
from dipole_bloch.core import (
    HBAR,
    BlochVector,
    DensityMatrix2,
    FieldDrive,
    InvalidStateError,
    Rectangular,
    StateVector2,
    SystemParams,
    bloch_from_density,
    density_from_bloch,
    density_from_state,
    field_value,
    hamiltonian,
    state_from_bloch,
)

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.diag([1.0, -1.0]).astype(complex)


def test_field_value_examples():
    d = FieldDrive(1.0, 2.0)
    assert field_value(d, 0.0) == 1.0
    assert field_value(d, math.pi / 4) == pytest.approx(0.0, abs=1e-15)
    assert field_value(FieldDrive(0.5, 2.0, Rectangular(1.0, 2.0)), 0.5) == 0.0


def test_rectangular_envelope_edges():
    d = FieldDrive(0.5, 0.0, Rectangular(1.0, 2.0))
    assert field_value(d, 1.0) == 0.5
    assert field_value(d, 1.999) == 0.5
    assert field_value(d, 2.0) == 0.0
    assert d.sampler()(1.5) == field_value(d, 1.5)


@given(st.floats(-1e3, 1e3), st.floats(0, 10), st.floats(0, 5))
def test_field_even_in_time(t, omega, e0):
    d = FieldDrive(e0, omega)
    assert field_value(d, t) == field_value(d, -t)


def test_sampler_matches_field_value():
    d = FieldDrive(0.3, 1.7, phase=0.4)
    f = d.sampler()
    for t in np.linspace(-5, 5, 23):
        assert f(t) == field_value(d, t)


@pytest.mark.parametrize(
    "kwargs",
    [dict(e0=-1, omega=1), dict(e0=1, omega=-1), dict(e0=math.inf, omega=1), dict(e0=1, omega=1, phase=math.nan)],
)
def test_field_drive_rejects_bad_values(kwargs):
    with pytest.raises(ValueError):
        FieldDrive(**kwargs)


def test_rectangular_needs_ordered_window():
    with pytest.raises(ValueError):
        Rectangular(2.0, 1.0)


@pytest.mark.parametrize("omega0,dipole", [(0, 1), (-1, 1), (1, 0), (math.inf, 1), (1, math.nan)])
def test_system_params_invariants(omega0, dipole):
    with pytest.raises(ValueError):
        SystemParams(omega0, dipole)


def test_hamiltonian_free():
    h = hamiltonian(SystemParams(1.0, 1.0), 0.0)
    np.testing.assert_array_equal(h, [[0, 0], [0, HBAR]])


def test_hamiltonian_coupling_sign():
    # off-diagonal coupling is +D E (see the Bloch-equation consistency test below)
    h = hamiltonian(SystemParams(1.0, 1.0), 0.3)
    assert h[0, 1] == h[1, 0] == 0.3
    h = hamiltonian(SystemParams(2.0, -1.0), 0.5)
    assert h[0, 1] == h[1, 0] == -0.5
    assert h[1, 1] == 2.0 * HBAR


@given(st.floats(0.01, 10), st.floats(-5, 5).filter(lambda d: d != 0), st.floats(-10, 10))
def test_hamiltonian_hermitian(omega0, dipole, e):
    h = hamiltonian(SystemParams(omega0, dipole), e)
    np.testing.assert_array_equal(h, h.conj().T)


def test_liouville_generator_reproduces_bloch_equations(rng):
    """-i[H, rho] mapped to Bloch coordinates equals the (u, v, w) equations of motion."""
    sys = SystemParams(1.3, 0.7)
    for b in random_bloch(rng, 50):
        e = rng.normal()
        rho = density_from_bloch(BlochVector(*b)).matrix()
        h = hamiltonian(sys, e)
        drho = -1j * (h @ rho - rho @ h) / HBAR
        db = [np.trace(drho @ s).real for s in (SX, SY, SZ)]
        om = sys.dipole * e / HBAR
        expected = [sys.omega0 * b[1], -sys.omega0 * b[0] - 2 * om * b[2], 2 * om * b[1]]
        np.testing.assert_allclose(db, expected, atol=1e-13)


def test_bloch_from_density_examples():
    assert bloch_from_density(DensityMatrix2(1.0, 0.0, 0j)) == BlochVector(0.0, 0.0, 1.0)
    assert bloch_from_density(DensityMatrix2(0.5, 0.5, 0j)) == BlochVector(0.0, 0.0, 0.0)
    assert bloch_from_density(DensityMatrix2(0.5, 0.5, 0.5 + 0j)) == BlochVector(1.0, 0.0, 0.0)


def test_density_from_bloch_examples():
    assert density_from_bloch(BlochVector(0, 0, 1)) == DensityMatrix2(1.0, 0.0, 0j)
    assert density_from_bloch(BlochVector(0, 0, 0)) == DensityMatrix2(0.5, 0.5, 0j)
    np.testing.assert_array_equal(density_from_bloch(BlochVector(1, 0, 0)).matrix(), np.full((2, 2), 0.5))


def test_density_from_bloch_is_pauli_expansion(rng):
    for b in random_bloch(rng, 100):
        rho = density_from_bloch(BlochVector(*b)).matrix()
        np.testing.assert_allclose(rho, (np.eye(2) + b[0] * SX + b[1] * SY + b[2] * SZ) / 2, atol=1e-15)


def test_round_trip(rng):
    for b in random_bloch(rng, 1000):
        bv = BlochVector(*b)
        back = bloch_from_density(density_from_bloch(bv))
        assert np.max(np.abs(back.as_array() - b)) <= 1e-14
        rho = density_from_bloch(bv)
        again = density_from_bloch(bloch_from_density(rho))
        assert abs(again.rho01 - rho.rho01) <= 1e-14 and abs(again.rho00 - rho.rho00) <= 1e-14


def test_bloch_norms(rng):
    for b in random_bloch(rng, 500):
        assert bloch_from_density(density_from_bloch(BlochVector(*b))).norm <= 1 + 1e-12
    for b in random_bloch(rng, 500, pure=True):
        assert abs(bloch_from_density(density_from_bloch(BlochVector(*b))).norm - 1) <= 1e-12


@pytest.mark.parametrize(
    "rho",
    [
        DensityMatrix2(0.7, 0.7, 0j),  # trace
        DensityMatrix2(1.2, -0.2, 0j),  # populations
        DensityMatrix2(0.5, 0.5, 0.6 + 0j),  # positivity
        DensityMatrix2(math.nan, 0.5, 0j),
    ],
)
def test_bloch_from_density_rejects_invalid(rho):
    with pytest.raises(InvalidStateError):
        bloch_from_density(rho)


def test_density_from_bloch_rejects_outside_ball():
    with pytest.raises(InvalidStateError):
        density_from_bloch(BlochVector(1.0, 0.1, 0.0))


def test_density_from_state_examples():
    assert density_from_state(StateVector2(1, 0)) == DensityMatrix2(1.0, 0.0, 0j)
    r = 1 / math.sqrt(2)
    np.testing.assert_allclose(density_from_state(StateVector2(r, r)).matrix(), np.full((2, 2), 0.5), atol=1e-15)
    rho = density_from_state(StateVector2(r, 1j * r))
    # rho01 = alpha conj(beta) = -i/2; with rho = (I + b.sigma)/2 that is v = <sigma_y> = +1
    assert rho.rho01 == pytest.approx(-0.5j)
    b = bloch_from_density(rho)
    assert (b.u, b.v, b.w) == pytest.approx((0.0, 1.0, 0.0), abs=1e-15)
    assert np.trace(rho.matrix() @ SY).real == pytest.approx(b.v)


def test_density_from_state_is_pure(rng):
    for _ in range(100):
        z = rng.normal(size=4)
        z /= np.linalg.norm(z)
        rho = density_from_state(StateVector2(complex(z[0], z[1]), complex(z[2], z[3]))).matrix()
        assert np.trace(rho @ rho).real == pytest.approx(1.0, abs=1e-14)


def test_density_from_state_rejects_unnormalized():
    with pytest.raises(InvalidStateError):
        density_from_state(StateVector2(1, 1))


def test_state_from_bloch_round_trip(rng):
    for b in random_bloch(rng, 200, pure=True):
        psi = state_from_bloch(BlochVector(*b))
        back = bloch_from_density(density_from_state(psi))
        np.testing.assert_allclose(back.as_array(), b, atol=1e-14)
    assert state_from_bloch(BlochVector(0, 0, -1)) == StateVector2(0j, 1 + 0j)
    with pytest.raises(InvalidStateError):
        state_from_bloch(BlochVector(0, 0, 0.5))


def test_from_matrix_hermitizes():
    m = np.array([[0.6, 0.1 + 0.2j], [0.1 - 0.1j, 0.4]])
    rho = DensityMatrix2.from_matrix(m)
    assert rho.rho01 == pytest.approx(0.1 + 0.15j)
    with pytest.raises(InvalidStateError):
        DensityMatrix2.from_matrix(np.eye(3))
