"""Harmonic emission amplitudes per orbit and per method.

Three evaluation methods share the solved quantum orbits:

* SPA: Gaussian (saddle-point) amplitude per orbit, with square-root
  branches tracked continuously along each chain, combined coherently
  with the exponentially-growing member of each pair dropped past the
  pair's Stokes transition;
* UA: the standard two-saddle Airy uniform asymptotics, continuous
  across the cutoff;
* HCA: the closed-form Airy spectrum built solely from quantities at
  the harmonic-cutoff times, including the quantum-path-interference
  control variants (eta scaling and full-contrast substitution).
"""

import numpy as np

from .action import VolkovAction
from .classify import audit_orbits
from .specfun import airy_ai, cubic_rotation

PREFACTOR_MODELS = ("unity", "tau_dispersion_only", "short_range_s_state")


class BranchTrackingError(RuntimeError):
    """A square-root branch could not be continued unambiguously."""


class PairMismatchError(ValueError):
    """The two orbits do not form a coalescing pair for this cutoff."""


class MissingPairError(ValueError):
    """A cutoff has no two orbits available to pair."""


class Prefactor:
    """Slowly-varying prefactor f(t, t') of the harmonic dipole.

    models:
      unity                 f = 1 (pure action studies)
      tau_dispersion_only   f = (2 pi / (i (t - t')))^(3/2)
      short_range_s_state   the tau factor times d*(p+A(t)) Y(p+A(t'))
                            for an s state of a short-range potential:
                            d(k) = i N k/(k^2+2Ip)^3 with
                            N = 2^(7/2) (2Ip)^(5/4) / pi, and
                            Y(k) = (Ip + k^2/2) <k|g> with
                            <k|g> = N / (2^(5/2) (k^2+2Ip)^2).

    The normalization constants are a convention of this package; all
    tests on spectra use amplitude ratios or the unity/tau models.
    """

    def __init__(self, model="unity", field=None, atom=None):
        if model not in PREFACTOR_MODELS:
            raise ValueError(f"unknown prefactor model {model!r}")
        if model == "short_range_s_state" and (field is None or atom is None):
            raise ValueError("s-state prefactor needs field and atom")
        self.model = model
        self.field = field
        self.atom = atom

    @property
    def _kappa2(self):
        return 2.0 * self.atom.Ip

    def dipole(self, k):
        """Transition dipole d(k) = <k|r|g>, vector-valued."""
        norm = 2 ** 3.5 * self._kappa2 ** 1.25 / np.pi
        return 1j * norm * k / ((k @ k) + self._kappa2) ** 3

    def dipole_conj(self, k):
        """Analytic continuation of d*(k) off the real axis."""
        return np.conj(1j) * (2 ** 3.5 * self._kappa2 ** 1.25 / np.pi) \
            * k / ((k @ k) + self._kappa2) ** 3

    def upsilon(self, k):
        """Y(k) = (Ip + k^2/2) <k|g>, scalar."""
        norm = 2 ** 3.5 * self._kappa2 ** 1.25 / np.pi / 2 ** 2.5
        return (self.atom.Ip + 0.5 * (k @ k)) * norm \
            / ((k @ k) + self._kappa2) ** 2

    def vector(self, t, tp, p_s, log_tau=None):
        """Prefactor as a 2-vector; x-polarized convention for scalars.

        log_tau optionally supplies a continuously-tracked logarithm of
        t - t' for the 3/2 power; the principal value is used otherwise.
        """
        if self.model == "unity":
            return np.array([1.0 + 0j, 0.0 + 0j])
        if log_tau is None:
            log_tau = np.log(t - tp)
        tau_fac = np.exp(1.5 * (np.log(2 * np.pi) - 1j * np.pi / 2 - log_tau))
        if self.model == "tau_dispersion_only":
            return np.array([tau_fac, 0.0 + 0j])
        k_rec = p_s + self.field.vector_potential(t)
        k_ion = p_s + self.field.vector_potential(tp)
        return tau_fac * self.upsilon(k_ion) * self.dipole_conj(k_rec)


def _tracked_log(values, name, max_jump=np.pi / 2):
    """Continuous logarithm along a track; errors on ambiguous jumps."""
    logs = np.empty(len(values), dtype=complex)
    logs[0] = np.log(values[0])
    for i in range(1, len(values)):
        step = np.log(values[i])
        # shift by multiples of 2 pi i onto the sheet of the previous point
        k = np.round((logs[i - 1].imag - step.imag) / (2 * np.pi))
        step += 2j * np.pi * k
        if abs(step.imag - logs[i - 1].imag) > max_jump:
            raise BranchTrackingError(
                f"{name} phase jump {abs(step.imag - logs[i-1].imag):.3f} rad "
                f"> {max_jump:.3f} between adjacent grid points")
        logs[i] = step
    return logs


def spa_amplitude(solution, prefactor=None):
    """SPA harmonic dipole of one isolated saddle (principal branches).

    D = 2 pi / sqrt(-det S'') * f(t, t') * exp(-i S_V + i Omega t).
    """
    prefactor = prefactor or Prefactor()
    b = solution.bundle
    det = b.d2S_dt2 * b.d2S_dtp2 - b.d2S_dtdtp ** 2
    core = 2 * np.pi / np.sqrt(-det) * np.exp(-1j * solution.action)
    return core * prefactor.vector(solution.t, solution.tp, solution.p_s)


def spa_track(orbit, prefactor=None):
    """SPA amplitudes along one orbit with continuous branches.

    Returns an (n, 2) array aligned with orbit.solutions.  The Hessian
    square root and the tau^(3/2) power are continued by phase tracking
    from the first point (principal branches there); a phase jump above
    pi/2 between adjacent points raises BranchTrackingError.
    """
    prefactor = prefactor or Prefactor()
    sols = orbit.solutions
    dets = np.array([-(s.bundle.d2S_dt2 * s.bundle.d2S_dtp2
                       - s.bundle.d2S_dtdtp ** 2) for s in sols])
    log_det = _tracked_log(dets, "Hessian")
    log_tau = _tracked_log(np.array([s.t - s.tp for s in sols]), "tau")
    out = np.empty((len(sols), 2), dtype=complex)
    for i, s in enumerate(sols):
        core = 2 * np.pi * np.exp(-0.5 * log_det[i] - 1j * s.action)
        out[i] = core * prefactor.vector(s.t, s.tp, s.p_s, log_tau[i])
    return out


# -- pairing and the Stokes drop ------------------------------------------

def pair_orbits(orbits, cutoffs, atom, up):
    """Match each energy-type cutoff with its coalescing orbit pair.

    The two orbits whose recollision times at the grid energy nearest
    Re(Omega_hc) lie closest to t_hc form the pair.  Raises
    MissingPairError if fewer than two orbits reach that energy.
    """
    pairs = []
    for cut in cutoffs:
        if cut.is_threshold(atom, up):
            continue
        candidates = []
        for orb in orbits:
            omegas = np.real(orb.omegas)
            i = int(np.argmin(np.abs(omegas - cut.omega_c)))
            if abs(omegas[i] - cut.omega_c) > 0.1 * cut.omega_c:
                continue
            candidates.append((abs(orb.solutions[i].t - cut.t_hc), orb))
        if len(candidates) < 2:
            raise MissingPairError(
                f"cutoff at Re(t_hc) = {cut.t_hc.real:.3f} has "
                f"{len(candidates)} orbit(s); need a pair")
        candidates.sort(key=lambda c: c[0])
        pairs.append((cut, candidates[0][1], candidates[1][1]))
    return pairs


def _pair_crossing(orbit_a, orbit_b, kind):
    """Omegas where Re (stokes) or Im (anti_stokes) of dS vanish."""
    sols = orbit_a.solutions + orbit_b.solutions
    labels = [orbit_a.label] * len(orbit_a.solutions) \
        + [orbit_b.label] * len(orbit_b.solutions)
    audit = audit_orbits(sols, labels)
    key = tuple(sorted([orbit_a.label.key(), orbit_b.label.key()]))
    return audit.crossings.get(key, {}).get(kind, [])


def _grown_member(orb_a, orb_b, omega_star):
    """The pair member whose Im S is larger past omega_star (grows)."""
    oms_a = np.real(orb_a.omegas)
    oms_b = np.real(orb_b.omegas)
    past_a = oms_a[oms_a > omega_star]
    past_b = oms_b[oms_b > omega_star]
    if len(past_a) == 0 or len(past_b) == 0:
        return None
    om_probe = min(past_a.max(), past_b.max())
    ims = []
    for orb in (orb_a, orb_b):
        omegas = np.real(orb.omegas)
        i = int(np.argmin(np.abs(omegas - om_probe)))
        ims.append(orb.solutions[i].action.imag)
    return (orb_a, orb_b)[int(np.argmax(ims))]


def _threshold_members(orbits, cut, period):
    """Orbits coalescing at a threshold cutoff.

    A member must sit close to (t_hc, excursion_hc) at the grid energy
    nearest the cutoff energy; bystander orbits from other ionization
    events fail the time gate.  Pairs whose partner was never tracked
    leave a single member.
    """
    e_hc = (cut.t_hc - cut.tp_hc).real
    candidates = []
    for orb in orbits:
        omegas = np.real(orb.omegas)
        i = int(np.argmin(np.abs(omegas - cut.omega_c)))
        s = orb.solutions[i]
        if abs(s.t - cut.t_hc) > 0.15 * period:
            continue
        if abs((s.t - s.tp).real - e_hc) > 0.15 * period:
            continue
        candidates.append(orb)
    return candidates


def stokes_drops(orbits, cutoffs, atom, up, omega=None):
    """Per-pair Stokes transition and the orbit to drop past it.

    Returns {label_key: omega_stokes} for the exponentially-growing
    member of each energy-cutoff pair (the one whose Im S is larger past
    the Re S crossing, so |e^{-iS}| grows).

    With the field frequency omega given, threshold cutoffs are also
    processed: the pair coalescing at Omega = Ip undergoes its Stokes
    transition there, and the subthreshold member growing above it is
    dropped from Ip on.
    """
    drops = {}
    for cut, orb_a, orb_b in pair_orbits(orbits, cutoffs, atom, up):
        crossings = _pair_crossing(orb_a, orb_b, "stokes")
        if not crossings:
            continue
        omega_star = min(crossings, key=lambda om: abs(om - cut.omega_c))
        grown = _grown_member(orb_a, orb_b, omega_star)
        if grown is not None:
            drops[grown.label.key()] = omega_star
    if omega is None:
        return drops
    period = 2 * np.pi / omega
    for cut in cutoffs:
        if not cut.is_threshold(atom, up):
            continue
        members = _threshold_members(orbits, cut, period)
        if len(members) == 2:
            crossings = _pair_crossing(members[0], members[1], "stokes")
            near = [om for om in crossings
                    if abs(om - cut.omega_c) < 2 * omega]
            omega_star = (min(near, key=lambda om: abs(om - cut.omega_c))
                          if near else cut.omega_c)
            grown = _grown_member(members[0], members[1], omega_star)
        elif len(members) == 1:
            # the partner was never tracked (it lies outside the labeled
            # window); the lone member is dropped if it is the growing
            # one, i.e. its Im S rises from the threshold to the top of
            # its grid
            orb = members[0]
            omegas = np.real(orb.omegas)
            i = int(np.argmin(np.abs(omegas - cut.omega_c)))
            omega_star = cut.omega_c
            rising = orb.solutions[-1].action.imag \
                > orb.solutions[i].action.imag + 1.0
            grown = orb if rising else None
        else:
            continue
        if grown is not None:
            drops.setdefault(grown.label.key(), omega_star)
    return drops


class SpectrumLine:
    """All amplitudes evaluated at one harmonic energy."""

    __slots__ = ("omega", "per_orbit", "spa", "ua", "hca", "included")

    def __init__(self, omega, per_orbit, spa, included, ua=None, hca=None):
        self.omega = omega
        self.per_orbit = per_orbit    # label key -> (2,) amplitude
        self.spa = spa                # coherent sum of included orbits
        self.included = included      # label key -> bool
        self.ua = ua
        self.hca = hca


def spa_spectrum(orbits, prefactor=None, drops=None):
    """Combined SPA amplitude over the union grid of the orbits.

    drops maps a label key to the Omega beyond which that orbit is
    excluded (its pair's Stokes transition); the combined amplitude is
    discontinuous there by construction.
    """
    prefactor = prefactor or Prefactor()
    drops = drops or {}
    tracks = {o.label.key(): (np.real(o.omegas), spa_track(o, prefactor))
              for o in orbits}
    grid = sorted({om for oms, _ in tracks.values() for om in oms})
    lines = []
    for om in grid:
        per_orbit = {}
        included = {}
        total = np.zeros(2, dtype=complex)
        for key, (oms, amps) in tracks.items():
            i = np.searchsorted(oms, om)
            if i >= len(oms) or abs(oms[i] - om) > 1e-9:
                continue
            per_orbit[key] = amps[i]
            keep = not (key in drops and om > drops[key] + 1e-12)
            included[key] = keep
            if keep:
                total = total + amps[i]
        lines.append(SpectrumLine(om, per_orbit, total, included))
    return lines


# -- uniform approximation -------------------------------------------------

def _shared_window(orbit_a, orbit_b, omega_window):
    oms_a = np.real(orbit_a.omegas)
    oms_b = np.real(orbit_b.omegas)
    shared = np.array(sorted(set(np.round(oms_a, 12))
                             & set(np.round(oms_b, 12))))
    if omega_window is not None:
        lo, hi = omega_window
        shared = shared[(shared >= lo) & (shared <= hi)]
    if len(shared) < 4:
        raise PairMismatchError("orbits share too few grid energies")
    idx_a = {round(om, 12): i for i, om in enumerate(oms_a)}
    idx_b = {round(om, 12): i for i, om in enumerate(oms_b)}
    ia = [idx_a[round(om, 12)] for om in shared]
    ib = [idx_b[round(om, 12)] for om in shared]
    return shared, ia, ib


def _continued_root(values, power, start_branch, branches):
    """values**power continued from a chosen branch of the first point.

    Branches are selected against a linear extrapolation of the two
    previous points, which stays reliable when the track passes close to
    the branch point at the origin (near the saddle coalescence).
    """
    out = np.empty(len(values), dtype=complex)
    out[0] = start_branch
    for i in range(1, len(values)):
        root = values[i] ** power
        cands = [root * np.exp(2j * np.pi * power * m)
                 for m in range(branches)]
        pred = 2 * out[i - 1] - out[i - 2] if i >= 2 else out[i - 1]
        out[i] = min(cands, key=lambda c: abs(c - pred))
    return out


def uniform_approx(orbit_a, orbit_b, prefactor=None, omega_window=None):
    """Two-saddle Airy uniform approximation across the pair's cutoff.

    Returns (omegas, (n, 2) amplitudes).  Branches of the mapping
    z = ((3/2) dS)^(2/3) and of the amplitude weights are calibrated
    against the SPA sum at the plateau end of the window and continued
    along the grid, which keeps the result continuous across the cutoff
    and asymptotically matching the SPA on both sides.
    """
    prefactor = prefactor or Prefactor()
    shared, ia, ib = _shared_window(orbit_a, orbit_b, omega_window)
    amp_a = spa_track(orbit_a, prefactor)[ia]
    amp_b = spa_track(orbit_b, prefactor)[ib]
    s_a = np.array([orbit_a.solutions[i].action for i in ia])
    s_b = np.array([orbit_b.solutions[i].action for i in ib])
    s_bar = 0.5 * (s_a + s_b)
    d_s = 0.5 * (s_a - s_b)
    w = 1.5 * d_s

    # calibrate the discrete branch choices -- the cube root sqz with
    # sqz^3 = -(3/2) dS (which fixes z = sqz^2 consistently with the
    # normal form) and the two amplitude-weight square roots -- against
    # the SPA sum at the plateau end of the window, then continue them
    # along the grid
    best = None
    for m in range(3):
        sqz0 = (-w[0]) ** (1.0 / 3.0) * np.exp(2j * np.pi * m / 3.0)
        for sp in (1.0, -1.0):
            for sm in (1.0, -1.0):
                start = (sqz0, sp * np.sqrt(1j * sqz0),
                         sm * np.sqrt(-1j * sqz0))
                ua = _ua_eval(w[:3], start, s_bar, amp_a, amp_b, s_a, s_b)
                ref = amp_a[:3] + amp_b[:3]
                err = np.linalg.norm(ua - ref) / np.linalg.norm(ref)
                if best is None or err < best[0]:
                    best = (err, start)
    _, start = best
    return shared, _ua_eval(w, start, s_bar, amp_a, amp_b, s_a, s_b)


def _ua_eval(w, start, s_bar, amp_a, amp_b, s_a, s_b):
    """Evaluate the UA over the first len(w) points of the tracks."""
    n = len(w)
    sqz0, gp0, gm0 = start
    sqz = _continued_root(-w, 1.0 / 3.0, sqz0, 3)
    z = sqz ** 2
    root_p = _continued_root(1j * sqz, 0.5, gp0, 2)
    root_m = _continued_root(-1j * sqz, 0.5, gm0, 2)
    out = np.empty((n, 2), dtype=complex)
    rpi = 1.0 / np.sqrt(np.pi)
    for i in range(n):
        g_a = amp_a[i] * np.exp(1j * s_a[i]) * root_p[i] * rpi
        g_b = amp_b[i] * np.exp(1j * s_b[i]) * root_m[i] * rpi
        ai = airy_ai(-z[i])
        out[i] = 2 * np.pi * np.exp(-1j * s_bar[i]) * (
            0.5 * (g_a + g_b) * ai.ai
            + 1j * (g_a - g_b) / (2.0 * sqz[i]) * ai.ai_prime)
    return out


# -- harmonic-cutoff approximation -----------------------------------------

def hca_core(A_hc, omega_hc, omega, r=1.0, full_contrast=False):
    """Airy kernel of the HCA for one cutoff, without slow prefactors.

    (2 pi / B) Ai((Omega_c + i r eta - Omega) / B_arg) with
    B = e^{2 pi i k/3} A_hc^{1/3} chosen by the decay rule, and
    B_arg = -|A_hc|^{1/3} under full_contrast, else B.
    """
    k, B = cubic_rotation(A_hc)
    B_arg = -abs(A_hc) ** (1.0 / 3.0) if full_contrast else B
    omega_eff = complex(omega_hc).real + 1j * r * complex(omega_hc).imag
    return 2 * np.pi / B * airy_ai((omega_eff - omega) / B_arg).ai


def hca_amplitude(field, atom, cutoff, omegas, prefactor=None, r=1.0,
                  full_contrast=False, model=None):
    """HCA amplitude track of one cutoff over a real Omega grid.

    D(Omega) = sqrt(2 pi/(i S_t't')) (2 pi/B) f(t_hc, t'_hc)
               e^{-i S_V + i Omega t_hc} Ai((Omega_hc - Omega)/B),
    evaluated with the full complex t_hc in the e^{i Omega t_hc} factor.
    """
    prefactor = prefactor or Prefactor()
    model = model or VolkovAction(field, atom)
    t, tp = cutoff.t_hc, cutoff.tp_hc
    _, _, spp = model.second_partials(t, tp)
    s_v = model.volkov_action(t, tp)
    p_s = model.stationary_momentum(t, tp)
    fvec = prefactor.vector(t, tp, p_s)
    pre = np.sqrt(2 * np.pi / (1j * spp)) * fvec * np.exp(-1j * s_v)
    omegas = np.asarray(omegas, dtype=float)
    out = np.empty((len(omegas), 2), dtype=complex)
    for i, om in enumerate(omegas):
        out[i] = pre * np.exp(1j * om * t) \
            * hca_core(cutoff.A_hc, cutoff.omega_hc, om, r, full_contrast)
    return out


def hca_spectrum(field, atom, cutoffs, omegas, prefactor=None, model=None):
    """Coherent sum of hca_amplitude over the given cutoffs."""
    model = model or VolkovAction(field, atom)
    total = np.zeros((len(omegas), 2), dtype=complex)
    for cut in cutoffs:
        total += hca_amplitude(field, atom, cut, omegas,
                               prefactor=prefactor, model=model)
    return total


def find_fringes(intensity):
    """Interior local minima and maxima indices of a 1-D signal."""
    y = np.asarray(intensity, dtype=float)
    mins = [i for i in range(1, len(y) - 1) if y[i] < y[i-1] and y[i] <= y[i+1]]
    maxs = [i for i in range(1, len(y) - 1) if y[i] > y[i-1] and y[i] >= y[i+1]]
    return mins, maxs


def fringe_contrast(intensity, extrema=None):
    """Mean fringe contrast (Imax - Imin)/(Imax + Imin) of a 1-D signal.

    Fringes are taken between each interior local minimum and the mean
    of its two neighbouring local maxima.  extrema optionally supplies
    fixed (mins, maxs) index lists (e.g. from a reference signal), so
    that signals with washed-out oscillations can be compared at the
    same fringe positions.
    """
    y = np.asarray(intensity, dtype=float)
    mins, maxs = find_fringes(y) if extrema is None else extrema
    contrasts = []
    for i in mins:
        left = [j for j in maxs if j < i]
        right = [j for j in maxs if j > i]
        if not left or not right:
            continue
        peak = 0.5 * (y[left[-1]] + y[right[0]])
        contrasts.append((peak - y[i]) / (peak + y[i]))
    if not contrasts:
        raise ValueError("no complete fringes in the signal")
    return float(np.mean(contrasts))
