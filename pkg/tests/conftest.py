import numpy as np
import pytest

from sfa_orbits import units
from sfa_orbits.action import AtomParams
from sfa_orbits.waveform import linear_monochromatic, bicircular

# Default parameters used across the suite: neon at 800 nm, 2e14 W/cm^2.
DEFAULT_IP = 0.79248
DEFAULT_OMEGA = units.omega_from_wavelength(800.0)
DEFAULT_F0 = units.field_from_intensity(2e14)


@pytest.fixture(scope="session")
def default_field():
    return linear_monochromatic(DEFAULT_F0, DEFAULT_OMEGA)


@pytest.fixture(scope="session")
def default_atom():
    return AtomParams(DEFAULT_IP)


@pytest.fixture(scope="session")
def bicircular_field():
    # total intensity 2e14 W/cm^2 split with mixing angle 45 degrees
    return bicircular(DEFAULT_F0, np.deg2rad(45.0), DEFAULT_OMEGA)


@pytest.fixture(scope="session")
def default_grid():
    return np.arange(13.0, 61.0 + 1e-9, 0.25) * DEFAULT_OMEGA


@pytest.fixture(scope="session")
def default_orbits(default_field, default_atom, default_grid):
    from sfa_orbits.orbits import quantum_orbits
    return quantum_orbits(default_field, default_atom, default_grid)
