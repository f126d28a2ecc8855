"""Classification of saddle solutions via separatrices.

The harmonic-cutoff times partition the complex recollision-time plane:
vertical strips are drawn at the mid-points between the real parts of
successive cutoffs, and each strip is divided in two by the separatrix
through its cutoff,

    delta_t_sep = sqrt(-i eta / A_hc),     eta = Im(Omega_hc),

with the side of a saddle decided by the sign of
Re[(t_s - t_hc)^* delta_t_sep].  Each (strip, side) region holds at most
one saddle per harmonic energy, which labels the quantum orbits.
"""

from bisect import bisect_left

import numpy as np

DEFAULT_ETA_FLOOR = 1e-9


class VanishingCubicCoefficientError(ArithmeticError):
    """A_hc = 0; the separatrix direction is undefined."""


class Separatrix:
    """Separatrix direction through one harmonic-cutoff time."""

    __slots__ = ("t_hc", "delta_t_sep", "degenerate", "eta")

    def __init__(self, t_hc, delta_t_sep, degenerate, eta):
        self.t_hc = t_hc
        self.delta_t_sep = delta_t_sep
        self.degenerate = degenerate
        self.eta = eta


class OrbitLabel:
    """Label of one saddle: strip index plus separatrix side."""

    __slots__ = ("strip_index", "side", "warning")

    def __init__(self, strip_index, side, warning=False):
        self.strip_index = strip_index
        self.side = side
        self.warning = warning

    def key(self):
        return (self.strip_index, self.side)

    def __eq__(self, other):
        return isinstance(other, OrbitLabel) and self.key() == other.key()

    def __hash__(self):
        return hash(self.key())

    def __repr__(self):
        return f"OrbitLabel(strip={self.strip_index}, side={self.side:+d})"


def separatrix(cutoff, eta_floor=DEFAULT_ETA_FLOOR, flip_branch=False):
    """Separatrix through a cutoff; principal branch by default.

    If |eta| is below the floor the saddle pair coalesces exactly and
    either orientation is valid: the degenerate flag is set and eta=+1
    is substituted so that label assignment stays deterministic.
    """
    if abs(cutoff.A_hc) == 0.0:
        raise VanishingCubicCoefficientError("A_hc vanishes")
    eta = cutoff.omega_hc.imag
    degenerate = abs(eta) < eta_floor
    eta_eff = 1.0 if degenerate else eta
    delta = np.sqrt(-1j * eta_eff / cutoff.A_hc)
    if flip_branch:
        delta = -delta
    return Separatrix(cutoff.t_hc, delta, degenerate, eta)


def strip_boundaries(cutoffs):
    """Mid-points between the real parts of successive cutoff times."""
    res = [c.t_hc.real for c in cutoffs]
    if res != sorted(res):
        raise ValueError("cutoffs must be sorted by Re(t_hc)")
    return [0.5 * (a + b) for a, b in zip(res, res[1:])]


def side_of(t, sep):
    """Sign of the separatrix criterion; boundary ties go to +1."""
    value = np.real(np.conj(t - sep.t_hc) * sep.delta_t_sep)
    return 1 if value >= 0 else -1


def classify(saddles, cutoffs, eta_floor=DEFAULT_ETA_FLOOR,
             branch_flips=None):
    """Assign an OrbitLabel to every saddle.

    cutoffs must be sorted by Re(t_hc).  branch_flips optionally flips
    the separatrix square-root branch per cutoff index.
    """
    if not cutoffs:
        raise ValueError("at least one cutoff is needed to classify")
    seps = [separatrix(c, eta_floor,
                       flip_branch=bool(branch_flips and i in branch_flips))
            for i, c in enumerate(cutoffs)]
    bounds = strip_boundaries(cutoffs)
    res = [c.t_hc.real for c in cutoffs]
    # extent of the outermost strips if mirrored about their cutoffs;
    # beyond that a saddle is "outside all strips" and only assigned to
    # the nearest one, which the warning flag records
    if bounds:
        lo_edge = 2 * res[0] - bounds[0]
        hi_edge = 2 * res[-1] - bounds[-1]
    else:
        lo_edge, hi_edge = -np.inf, np.inf
    labels = []
    for s in saddles:
        idx = bisect_left(bounds, s.t.real)
        warning = not (lo_edge <= s.t.real <= hi_edge)
        labels.append(OrbitLabel(idx, side_of(s.t, seps[idx]), warning))
    return labels


class OrbitAudit:
    """Summary of a labeled saddle set."""

    def __init__(self, families, max_jump, unique, duplicates, crossings):
        self.families = families      # label key -> list of saddles
        self.max_jump = max_jump      # label key -> max |dt| between
                                      # adjacent grid points
        self.unique = unique          # True if one saddle per (Omega, label)
        self.duplicates = duplicates  # list of (omega, label) violations
        self.crossings = crossings    # family pair -> dict with stokes /
                                      # anti_stokes omegas

    @property
    def ok(self):
        return self.unique


def _interp_zero(om0, om1, f0, f1):
    if f1 == f0:
        return om0
    return om0 - f0 * (om1 - om0) / (f1 - f0)


def audit_orbits(saddles, labels, jump_threshold=None):
    """Continuity, uniqueness, and Stokes/anti-Stokes crossing report.

    Saddles and labels are parallel lists over a (possibly repeated)
    omega grid.  Crossings are located per family pair by sign changes
    of the Re/Im parts of the action difference S = S_V - Omega t.
    """
    families = {}
    by_key = {}
    duplicates = []
    for s, lab in zip(saddles, labels):
        families.setdefault(lab.key(), []).append(s)
        key = (round(np.real(s.omega), 12), lab.key())
        if key in by_key:
            duplicates.append(key)
        by_key[key] = s

    max_jump = {}
    for fam, sols in families.items():
        sols.sort(key=lambda s: np.real(s.omega))
        jumps = [abs(b.t - a.t) for a, b in zip(sols, sols[1:])]
        max_jump[fam] = max(jumps) if jumps else 0.0

    crossings = {}
    fams = sorted(families)
    for i, fa in enumerate(fams):
        for fb in fams[i + 1:]:
            _pair_crossings(families[fa], families[fb], (fa, fb), crossings)

    return OrbitAudit(families, max_jump, not duplicates, duplicates,
                      crossings)


def _pair_crossings(sols_a, sols_b, pair_key, crossings):
    """Record Re/Im action-difference zero crossings for one label pair."""
    a_by_om = {round(np.real(s.omega), 12): s for s in sols_a}
    b_by_om = {round(np.real(s.omega), 12): s for s in sols_b}
    shared = sorted(set(a_by_om) & set(b_by_om))
    if len(shared) < 2:
        return
    stokes, anti = [], []
    for om0, om1 in zip(shared, shared[1:]):
        d0 = a_by_om[om0].action - b_by_om[om0].action
        d1 = a_by_om[om1].action - b_by_om[om1].action
        if d0.real == 0 or d0.real * d1.real < 0:
            stokes.append(_interp_zero(om0, om1, d0.real, d1.real))
        if d0.imag == 0 or d0.imag * d1.imag < 0:
            anti.append(_interp_zero(om0, om1, d0.imag, d1.imag))
    crossings[pair_key] = {"stokes": stokes, "anti_stokes": anti}
