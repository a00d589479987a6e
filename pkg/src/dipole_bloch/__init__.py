"""Driven two-level dipole: density matrix, Bloch vector and P/J/U oscillator dynamics."""

from .core import (
    EXCITED,
    GROUND,
    HBAR,
    BlochVector,
    Constant,
    DensityMatrix2,
    FieldDrive,
    InvalidStateError,
    NumericalError,
    PJUState,
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
from .observables import (
    ObservableOperators,
    bloch_from_observables,
    coupling_strength,
    expectation,
    observables_from_bloch,
    operator_matrices,
)
from .propagators import (
    FORMULATIONS,
    IntegratorConfig,
    SimulationError,
    Trajectory,
    default_dt,
    simulate,
    step_bloch,
    step_liouville,
    step_pju,
    step_schrodinger,
)

__version__ = "0.1.0"
