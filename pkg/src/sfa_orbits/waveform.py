"""Driving laser fields as finite trigonometric polynomials.

A field is stored through its vector potential

    A(t) = sum_n [ a_n e^{-i n w t} + conj(a_n) e^{+i n w t} ],

a finite sum of circular harmonics with complex 2-vector amplitudes a_n.
This form is entire in complex time, real on the real axis, zero-mean
over a cycle, and all the integrals needed by the Volkov action
(antiderivatives of A and of A.A) are closed-form trig polynomials.

The electric field follows the convention F(t) = -dA/dt.
"""

import numpy as np

from . import units


class FourierField:
    """Vector potential A(t) = sum_n a_n e^{-i n w t} + c.c. in complex time.

    Parameters
    ----------
    omega : float
        Fundamental angular frequency, a.u.
    components : sequence of (n, a_n)
        Positive integer harmonic index n and complex 2-vector amplitude.
    """

    def __init__(self, omega, components):
        if omega <= 0:
            raise ValueError("omega must be positive")
        self.omega = float(omega)
        comp = {}
        for n, a in components:
            n = int(n)
            if n <= 0:
                raise ValueError("harmonic indices must be positive integers")
            a = np.asarray(a, dtype=complex)
            if a.shape != (2,):
                raise ValueError("amplitudes must be complex 2-vectors")
            comp[n] = comp.get(n, 0) + a
        # drop identically-zero harmonics
        self._ns = np.array(sorted(n for n in comp if np.any(comp[n] != 0)),
                            dtype=int)
        self._amps = np.array([comp[n] for n in self._ns], dtype=complex)
        if self._amps.size == 0:
            self._amps = self._amps.reshape(0, 2)
        self._square_coeffs = self._build_square_coeffs()

    @property
    def period(self):
        return 2 * np.pi / self.omega

    @property
    def components(self):
        return [(int(n), a.copy()) for n, a in zip(self._ns, self._amps)]

    def _signed_terms(self):
        """All exponents k and coefficients c_k with A = sum_k c_k e^{-i k w t}."""
        ks = np.concatenate([self._ns, -self._ns])
        cs = np.concatenate([self._amps, np.conj(self._amps)])
        return ks, cs.reshape(-1, 2)

    def _build_square_coeffs(self):
        """Coefficients d_m of A(t).A(t) = sum_m d_m e^{-i m w t}."""
        ks, cs = self._signed_terms()
        d = {}
        for i in range(len(ks)):
            for j in range(len(ks)):
                m = ks[i] + ks[j]
                d[m] = d.get(m, 0) + cs[i] @ cs[j]
        return d

    def vector_potential(self, t):
        """A(t), complex 2-vector; entire in t, real for real t."""
        ks, cs = self._signed_terms()
        if len(ks) == 0:
            return np.zeros(2, dtype=complex)
        phases = np.exp(-1j * ks * self.omega * t)
        return phases @ cs

    def electric_field(self, t):
        """F(t) = -dA/dt, complex 2-vector."""
        ks, cs = self._signed_terms()
        if len(ks) == 0:
            return np.zeros(2, dtype=complex)
        phases = (1j * ks * self.omega) * np.exp(-1j * ks * self.omega * t)
        return phases @ cs

    def dA_dt(self, t):
        """First derivative of the vector potential."""
        return -self.electric_field(t)

    def d2A_dt2(self, t):
        """Second derivative of the vector potential."""
        ks, cs = self._signed_terms()
        if len(ks) == 0:
            return np.zeros(2, dtype=complex)
        phases = (-1j * ks * self.omega) ** 2 * np.exp(-1j * ks * self.omega * t)
        return phases @ cs

    def antider_A(self, t):
        """Closed-form antiderivative of A (zero integration constant).

        The field has no secular (m=0) term by construction, so this is
        again a trig polynomial.
        """
        ks, cs = self._signed_terms()
        if len(ks) == 0:
            return np.zeros(2, dtype=complex)
        phases = np.exp(-1j * ks * self.omega * t) / (-1j * ks * self.omega)
        return phases @ cs

    def antider_A2(self, t):
        """Closed-form antiderivative of A(t).A(t).

        The constant Fourier coefficient of A.A integrates to an exact
        linear (secular) term; the oscillatory terms keep their
        trigonometric primitives.
        """
        total = 0j
        for m, d in self._square_coeffs.items():
            if m == 0:
                total = total + d * t
            else:
                total = total + d * np.exp(-1j * m * self.omega * t) / (-1j * m * self.omega)
        return total

    def ponderomotive(self):
        """U_p = cycle average of A^2/2, from the m=0 coefficient of A.A."""
        d0 = self._square_coeffs.get(0, 0.0)
        return float(np.real(d0)) / 2.0


def linear_monochromatic(F0, omega, ellipticity=0.0):
    """Monochromatic field F0 cos(wt) on the z axis, optional ellipticity.

    The polarization plane is spanned by (x, z); the major axis is z
    (component index 1).  For ellipticity eps the field is
    F0/sqrt(1+eps^2) * (cos(wt) z + eps sin(wt) x).
    """
    eps = float(ellipticity)
    scale = F0 / (omega * np.sqrt(1 + eps ** 2))
    # A = -int F dt, zero mean:  A_z = -scale*w... see module docstring.
    a1 = np.array([eps * scale / 2.0, -1j * scale / 2.0])
    return FourierField(omega, [(1, a1)])


def bicircular(F, theta, omega):
    """Counter-rotating circular w + 2w combination (mixing angle theta).

    F(t) = F1 (cos wt, sin wt) + F2 (cos 2wt, -sin 2wt) with
    F1 = F cos(theta), F2 = F sin(theta); theta in radians.
    """
    F1 = F * np.cos(theta)
    F2 = F * np.sin(theta)
    a1 = (F1 / (2 * omega)) * np.array([-1j, 1.0])
    a2 = (F2 / (4 * omega)) * np.array([-1j, -1.0])
    return FourierField(omega, [(1, a1), (2, a2)])


def field_from_config(spec):
    """Build a FourierField from a config dictionary.

    Accepted keys: type ("linear" | "bicircular" | "fourier"), and per
    type either lab units (wavelength_nm, intensity_W_cm2) or atomic
    units (omega_au, F0_au), plus ellipticity, theta_deg, components.
    """
    if not isinstance(spec, dict):
        raise ValueError("field spec must be a mapping")
    known = {"type", "wavelength_nm", "omega_au", "intensity_W_cm2",
             "F0_au", "ellipticity", "theta_deg", "components"}
    unknown = set(spec) - known
    if unknown:
        raise ValueError(f"unknown field keys: {sorted(unknown)}")
    ftype = spec.get("type")
    if ftype not in ("linear", "bicircular", "fourier"):
        raise ValueError("field type must be linear, bicircular or fourier")

    if "omega_au" in spec and "wavelength_nm" in spec:
        raise ValueError("give either omega_au or wavelength_nm, not both")
    if "omega_au" in spec:
        omega = float(spec["omega_au"])
        if omega <= 0:
            raise ValueError("omega_au must be positive")
    elif "wavelength_nm" in spec:
        omega = units.omega_from_wavelength(float(spec["wavelength_nm"]))
    else:
        raise ValueError("field needs omega_au or wavelength_nm")

    if ftype == "fourier":
        comps = spec.get("components")
        if not comps:
            raise ValueError("fourier field needs a components list")
        pairs = []
        for c in comps:
            bad = set(c) - {"n", "re_x", "im_x", "re_y", "im_y"}
            if bad:
                raise ValueError(f"unknown component keys: {sorted(bad)}")
            a = np.array([c.get("re_x", 0.0) + 1j * c.get("im_x", 0.0),
                          c.get("re_y", 0.0) + 1j * c.get("im_y", 0.0)])
            pairs.append((int(c["n"]), a))
        return FourierField(omega, pairs)

    if "F0_au" in spec and "intensity_W_cm2" in spec:
        raise ValueError("give either F0_au or intensity_W_cm2, not both")
    if "F0_au" in spec:
        F0 = float(spec["F0_au"])
        if F0 <= 0:
            raise ValueError("F0_au must be positive")
    elif "intensity_W_cm2" in spec:
        F0 = units.field_from_intensity(float(spec["intensity_W_cm2"]))
    else:
        raise ValueError("field needs F0_au or intensity_W_cm2")

    if ftype == "linear":
        return linear_monochromatic(F0, omega, float(spec.get("ellipticity", 0.0)))
    theta = np.deg2rad(float(spec.get("theta_deg", 45.0)))
    return bicircular(F0, theta, omega)
