"""Unit conversions between laboratory and atomic units.

All internal computation is in Hartree atomic units (m_e = hbar = e = 1).
Laboratory units enter only through the converters below.
"""

import numpy as np

# speed of light in atomic units
C_AU = 137.035999

# atomic unit of intensity, W/cm^2
INTENSITY_AU = 3.50945e16

# omega[a.u.] = OMEGA_NM / wavelength[nm]  (= 2*pi*c*a0 in nm*a.u.)
OMEGA_NM = 45.5633525

# Hartree in electronvolt
HARTREE_EV = 27.211386245988


def omega_from_wavelength(wavelength_nm):
    """Angular frequency in a.u. for a vacuum wavelength in nm."""
    if wavelength_nm <= 0:
        raise ValueError("wavelength must be positive")
    return OMEGA_NM / wavelength_nm


def field_from_intensity(intensity_W_cm2):
    """Peak field strength F0 in a.u. for an intensity in W/cm^2."""
    if intensity_W_cm2 <= 0:
        raise ValueError("intensity must be positive")
    return np.sqrt(intensity_W_cm2 / INTENSITY_AU)


def from_experiment(wavelength_nm, intensity_W_cm2):
    """(F0, omega) in atomic units from lab-frame laser parameters."""
    return (field_from_intensity(intensity_W_cm2),
            omega_from_wavelength(wavelength_nm))


def ip_from_ev(ip_eV):
    """Ionization potential in a.u. from a value in eV."""
    return ip_eV / HARTREE_EV
