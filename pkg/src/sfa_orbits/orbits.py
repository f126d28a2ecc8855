"""Assembly of labeled quantum orbits from saddle solutions.

A quantum orbit is an Omega-ordered chain of saddle solutions traced by
continuation, carrying a single (strip, side) label.  Orbits are born at
the threshold energy Ip, where each pair coalesces at a threshold-type
harmonic-cutoff time, so by default chains cover the requested grid
restricted to Omega > Ip.  Sub-threshold continuation is available via a
complex-Omega detour around the branch point at Omega = Ip, which keeps
coalescing pairs on distinct sheets of t_s(Omega).

Labels are assigned by the separatrix criterion at a single mid-plateau
anchor energy, where the strip/side regions are unambiguous, and are
carried along the whole chain: far from its cutoff (in particular below
threshold) a chain may wander across neighbouring strips, so per-saddle
re-labeling is not constant along a chain.
"""

import numpy as np

from .action import VolkovAction
from .classify import audit_orbits, classify
from .saddles import (continue_orbit, find_all_cutoffs,
                      find_saddles)

FIRST_RETURN_EXCURSION = (0.05, 1.05)


class OrbitAssemblyError(RuntimeError):
    """The orbit set could not be assembled (anchors or labels failed)."""


class QuantumOrbit:
    """A labeled, Omega-ordered chain of saddle solutions."""

    __slots__ = ("label", "solutions", "anchor_omega")

    def __init__(self, label, solutions, anchor_omega):
        self.label = label
        self.solutions = sorted(solutions, key=lambda s: np.real(s.omega))
        self.anchor_omega = anchor_omega

    @property
    def omegas(self):
        return np.array([s.omega for s in self.solutions])

    @property
    def times(self):
        return np.array([s.t for s in self.solutions])

    def max_jump(self):
        """Largest |dt| between adjacent grid points of the chain."""
        ts = self.times
        return float(np.max(np.abs(np.diff(ts)))) if len(ts) > 1 else 0.0

    def __repr__(self):
        return (f"QuantumOrbit(label={self.label!r}, "
                f"n={len(self.solutions)})")


def branch_detour_grid(omega_from, omega_to, branch_point, points=7):
    """Complex arc from omega_from to omega_to around a real branch point.

    The arc stays in the lower half of the Omega plane at a radius that
    interpolates between the distances of the endpoints to the branch
    point, so the continuation never approaches the square-root
    singularity of t_s(Omega).
    """
    ra = abs(omega_from - branch_point)
    rb = abs(omega_to - branch_point)
    sgn = 1.0 if omega_from > branch_point else -1.0
    phases = np.linspace(0.0, -np.pi, points + 2)[1:-1] * sgn
    radii = ra + (rb - ra) * np.arange(1, points + 1) / (points + 1.0)
    start = np.pi if sgn < 0 else 0.0
    return branch_point + radii * np.exp(1j * (start + phases))


def _descend_grid(omegas, anchor, threshold, subthreshold):
    """Omega values below the anchor, high to low, with optional detour."""
    lower = omegas[omegas < anchor - 1e-12][::-1]
    grid = []
    prev = anchor
    for om in lower:
        if om <= threshold:
            if subthreshold == "omit":
                break
            if prev > threshold:
                grid.extend(branch_detour_grid(prev, om, threshold))
        grid.append(om)
        prev = om
    return np.array(grid, dtype=complex)


def default_anchor(field, atom, omegas, cutoffs):
    """Grid point nearest the middle of the plateau.

    The plateau is taken from the threshold Ip to the lowest energy-type
    cutoff; with no energy cutoff available, the median grid point above
    threshold is used.
    """
    omegas = np.asarray(omegas, dtype=float)
    above = omegas[omegas > atom.Ip]
    if len(above) == 0:
        raise OrbitAssemblyError("no grid point above the threshold Ip")
    up = field.ponderomotive()
    energy = [c.omega_hc.real for c in cutoffs
              if not c.is_threshold(atom, up)]
    if energy:
        target = atom.Ip + 0.5 * (min(energy) - atom.Ip)
    else:
        target = np.median(above)
    return float(above[np.argmin(np.abs(above - target))])


def quantum_orbits(field, atom, omegas, anchor_omega=None, time_window=None,
                   excursion_window=FIRST_RETURN_EXCURSION,
                   subthreshold="omit", tol=1e-10, model=None,
                   cutoffs=None, branch_flips=None):
    """Assemble the labeled quantum orbits of a field over an Omega grid.

    Returns (orbits, cutoffs).  Saddles are found at the anchor energy,
    filtered to the physical ionization branch (Im t' > 0), first-return
    excursions, and the time window (one field period by default), then
    tracked across the grid by continuation.  subthreshold is "omit"
    (chains start above Ip) or "detour" (complex-Omega continuation
    below threshold).
    """
    if subthreshold not in ("omit", "detour"):
        raise ValueError(f"unknown subthreshold mode: {subthreshold!r}")
    omegas = np.asarray(omegas, dtype=float)
    if omegas.size == 0:
        raise OrbitAssemblyError("empty omega grid")
    omegas = np.sort(omegas)
    model = model or VolkovAction(field, atom)
    T = field.period
    if time_window is None:
        time_window = (0.0, T)
    if cutoffs is None:
        cutoffs = find_all_cutoffs(field, atom, time_window, model=model)
        cutoffs = [c for c in cutoffs
                   if excursion_window[0]
                   <= (c.t_hc - c.tp_hc).real / T
                   <= excursion_window[1]]
    if not cutoffs:
        raise OrbitAssemblyError("no harmonic cutoffs in the time window")
    if anchor_omega is None:
        anchor_omega = default_anchor(field, atom, omegas, cutoffs)

    anchors = find_saddles(field, atom, anchor_omega, tol=tol,
                           excursion_window=excursion_window,
                           t_window=time_window, model=model)
    anchors = [a for a in anchors if a.tp.imag > 0.0]
    if not anchors:
        raise OrbitAssemblyError(
            f"no physical saddles at anchor omega {anchor_omega:g}")

    labels = classify(anchors, cutoffs, branch_flips=branch_flips)
    if len(set(lab.key() for lab in labels)) != len(labels):
        raise OrbitAssemblyError(
            "anchor saddles do not carry distinct labels; "
            "choose a different anchor_omega")

    up_grid = omegas[omegas >= anchor_omega - 1e-12]
    down_grid = _descend_grid(omegas, anchor_omega, atom.Ip, subthreshold)

    orbits = []
    for anchor, label in zip(anchors, labels):
        chain = list(continue_orbit(field, atom, up_grid, anchor,
                                    tol=tol, model=model))
        if len(down_grid):
            down = continue_orbit(field, atom, down_grid, anchor,
                                  tol=tol, model=model)
            chain.extend(s for s in down if np.imag(s.omega) == 0.0)
        orbits.append(QuantumOrbit(label, chain, anchor_omega))
    orbits.sort(key=lambda o: o.label.key())
    return orbits, cutoffs


def audit_orbit_set(orbits):
    """Uniqueness/continuity/crossing audit over a set of quantum orbits."""
    saddles, labels = [], []
    for orbit in orbits:
        for s in orbit.solutions:
            saddles.append(s)
            labels.append(orbit.label)
    return audit_orbits(saddles, labels)
