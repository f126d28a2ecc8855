"""Parameter studies over the cutoff machinery.

* the classical-cutoff constant c_cl (maximal classical return energy in
  ponderomotive units), used to extract the threshold correction
  F(gamma) = (Omega_hc - c_cl * Up) / Ip from solved cutoffs;
* the cutoff-law scan over the Keldysh parameter with parity-constrained
  least-squares fits of Re F (even powers) and Im F (odd powers);
* the bicircular mixing-angle scan tracking eta(theta) per cutoff and
  bisecting its sign changes (topological transitions of the orbit
  classification);
* the Riemann-surface mesh: Omega = dS/dt over a complex recollision-time
  grid with the ionization time tracked by Newton continuation, exported
  as a text polygon mesh with per-vertex orbit-label colors.
"""

import numpy as np

from .action import (AtomParams, CoincidentTimesError,
                     DegenerateDenominatorError, VolkovAction)
from .saddles import (SolverError, continue_orbit, find_all_cutoffs,
                      solve_cutoff, solve_saddle)

_SOLVE_ERRORS = (SolverError, CoincidentTimesError,
                 DegenerateDenominatorError)

# (w t_hc, w t'_hc) of the first energy-type cutoff at gamma ~ 0.95, the
# continuation seed for the cutoff-law scan (gamma-independent in these
# scaled coordinates up to the continuation steps)
_SEED_GAMMA = 0.95
_SEED_WT = (np.deg2rad(70.0) - 2.0j * np.pi / 180.0,
            np.deg2rad(-163.0) + 49.0j * np.pi / 180.0)


class CutoffLostError(RuntimeError):
    """A cutoff track could not be continued across the scan grid."""


# -- classical cutoff constant ----------------------------------------------


def classical_kinetic_energy(phi_ion, phi_ret):
    """Return kinetic energy, in units of Up, for F = F0 cos(wt).

    The electron is born at rest at phase phi_ion and its velocity at
    phase phi is A(phi) - A(phi_ion); a zero-duration excursion returns
    zero energy.
    """
    return 2.0 * (np.sin(phi_ret) - np.sin(phi_ion)) ** 2


def _return_phase(phi_ion):
    """First return phase of the classical excursion, or None."""
    from scipy.optimize import brentq

    def x(phi):  # position, in units of F0/w^2
        return (np.cos(phi) - np.cos(phi_ion)
                + np.sin(phi_ion) * (phi - phi_ion))

    probes = phi_ion + np.linspace(1e-6, 2.0 * np.pi, 400)
    vals = x(probes)
    sign = np.sign(vals)
    flips = np.nonzero(sign[:-1] * sign[1:] < 0)[0]
    if len(flips) == 0:
        return None
    i = flips[0]
    return brentq(x, probes[i], probes[i + 1], xtol=1e-14)


def classical_return_energy(phi_ion):
    """Kinetic energy at first classical return, in Up units (0 if none)."""
    phi_ret = _return_phase(phi_ion)
    if phi_ret is None:
        return 0.0
    return classical_kinetic_energy(phi_ion, phi_ret)


_CCL_CACHE = None


def classical_cutoff_constant(f0=1.0, omega=1.0, n_phases=600):
    """Maximal classical return energy over ionization phase, in Up units.

    f0 and omega only set the units of the intermediate trajectory; the
    result is their scale-invariant ratio (the classical cutoff law
    constant, c_cl ~ 3.17).
    """
    global _CCL_CACHE
    if (f0, omega, n_phases) == (1.0, 1.0, 600) and _CCL_CACHE is not None:
        return _CCL_CACHE
    from scipy.optimize import minimize_scalar

    # the trajectory scales out f0/omega: phases are dimensionless and
    # energies are already in Up units, so the arguments cancel exactly
    del f0, omega
    phases = np.linspace(1e-3, 0.5 * np.pi - 1e-3, n_phases)
    energies = [classical_return_energy(p) for p in phases]
    i = int(np.argmax(energies))
    lo, hi = phases[max(0, i - 1)], phases[min(len(phases) - 1, i + 1)]
    res = minimize_scalar(lambda p: -classical_return_energy(p),
                          bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    out = float(-res.fun)
    if (1.0, 1.0, 600) == (1.0, 1.0, n_phases):
        _CCL_CACHE = out
    return out


# -- cutoff law F(gamma) -----------------------------------------------------


class CutoffLawSample:
    """One solved energy cutoff of the cutoff-law scan."""

    __slots__ = ("Ip", "Up", "gamma", "omega_hc", "F_value")

    def __init__(self, Ip, Up, omega_hc, c_cl):
        self.Ip = float(Ip)
        self.Up = float(Up)
        self.gamma = float(np.sqrt(Ip / (2.0 * Up)))
        self.omega_hc = complex(omega_hc)
        self.F_value = (self.omega_hc - c_cl * self.Up) / self.Ip

    def __repr__(self):
        return (f"CutoffLawSample(gamma={self.gamma:.4f}, "
                f"F={self.F_value:.6g})")


class CutoffLawFit:
    """Parity-constrained least-squares fit of F(gamma).

    Re F = constant + quadratic * gamma^2;
    Im F = linear * gamma + cubic * gamma^3.
    """

    __slots__ = ("constant", "quadratic", "linear", "cubic",
                 "re_residual", "im_residual")

    def __init__(self, constant, quadratic, linear, cubic,
                 re_residual, im_residual):
        self.constant = constant
        self.quadratic = quadratic
        self.linear = linear
        self.cubic = cubic
        self.re_residual = re_residual
        self.im_residual = im_residual

    def __call__(self, gamma):
        g = np.asarray(gamma, dtype=float)
        return (self.constant + self.quadratic * g ** 2
                + 1j * (self.linear * g + self.cubic * g ** 3))


def fit_cutoff_law(samples):
    """Fit Re F on {1, gamma^2} and Im F on {gamma, gamma^3}."""
    g = np.array([s.gamma for s in samples])
    F = np.array([s.F_value for s in samples])
    even = np.column_stack([np.ones_like(g), g ** 2])
    odd = np.column_stack([g, g ** 3])
    re_c, re_res, _, _ = np.linalg.lstsq(even, F.real, rcond=None)
    im_c, im_res, _, _ = np.linalg.lstsq(odd, F.imag, rcond=None)
    re_rms = float(np.sqrt(re_res[0] / len(g))) if len(re_res) else 0.0
    im_rms = float(np.sqrt(im_res[0] / len(g))) if len(im_res) else 0.0
    return CutoffLawFit(float(re_c[0]), float(re_c[1]),
                        float(im_c[0]), float(im_c[1]), re_rms, im_rms)


def _cutoff_at_gamma(gamma, omega, wt_guess, Ip=None, Up=None):
    """Solve the first energy cutoff at one Keldysh parameter.

    In the scaled coordinates (w t, w t') the cutoff position depends on
    gamma alone, so any (Ip, Up) with the right ratio may be used for
    continuation bridging; the physical pair fixes the energy scale.
    """
    from .waveform import linear_monochromatic

    if Up is None:
        Up = 1.0
        Ip = 2.0 * gamma ** 2 * Up
    F0 = 2.0 * omega * np.sqrt(Up)
    field = linear_monochromatic(F0, omega)
    atom = AtomParams(Ip)
    guess = (wt_guess[0] / omega, wt_guess[1] / omega)
    cut = solve_cutoff(field, atom, guess)
    return cut, (cut.t_hc * omega, cut.tp_hc * omega)


def solve_energy_cutoff(Ip, Up, omega=0.057):
    """First energy-type cutoff of F0 cos(wt) with the given Ip and Up.

    Reached by continuation in the Keldysh parameter from an internal
    seed, so no search over the time window is needed.
    """
    gamma = float(np.sqrt(Ip / (2.0 * Up)))
    wt = _SEED_WT
    g_now = _SEED_GAMMA
    while abs(gamma - g_now) > 0.1:
        g_now += 0.1 * np.sign(gamma - g_now)
        _, wt = _cutoff_at_gamma(g_now, omega, wt)
    cut, _ = _cutoff_at_gamma(gamma, omega, wt, Ip=Ip, Up=Up)
    return cut


class CutoffLawScan:
    """Samples, per-sample failures, and the parity fit of one scan."""

    __slots__ = ("samples", "failures", "fit")

    def __init__(self, samples, failures):
        self.samples = samples
        self.failures = failures    # list of (Ip, Up, message)
        self.fit = fit_cutoff_law(samples) if len(samples) >= 4 else None


def cutoff_law_scan(Ip_list, Up_list, omega=0.057, gamma_max=1.2):
    """Solve the first energy cutoff for each (Ip, Up) pair and fit F.

    Samples are solved in descending-gamma order by continuation from an
    internal seed near gamma = 0.95; results are returned in input
    order.  Pairs with gamma above gamma_max are rejected up front.
    """
    pairs = list(zip(Ip_list, Up_list))
    gammas = [np.sqrt(ip / (2.0 * up)) for ip, up in pairs]
    if any(g > gamma_max for g in gammas):
        raise ValueError(f"gamma above the configured maximum {gamma_max}")
    c_cl = classical_cutoff_constant()
    order = sorted(range(len(pairs)), key=lambda i: -gammas[i])
    results = [None] * len(pairs)
    failures = []
    wt = _SEED_WT
    g_now = _SEED_GAMMA
    for i in order:
        ip, up = pairs[i]
        # bridge in gamma, then solve the physical pair
        try:
            while abs(gammas[i] - g_now) > 0.1:
                g_now += 0.1 * np.sign(gammas[i] - g_now)
                _, wt = _cutoff_at_gamma(g_now, omega, wt)
            cut, wt = _cutoff_at_gamma(gammas[i], omega, wt, Ip=ip, Up=up)
            g_now = gammas[i]
            results[i] = CutoffLawSample(ip, up, cut.omega_hc, c_cl)
        except _SOLVE_ERRORS as exc:
            failures.append((ip, up, str(exc)))
    return CutoffLawScan([s for s in results if s is not None], failures)


# -- bicircular mixing-angle scan --------------------------------------------


class TransitionEvent:
    """One eta sign change of a tracked cutoff, bisected in theta."""

    __slots__ = ("theta", "cutoff_id", "eta_before", "eta_after",
                 "cutoff", "pair_gap")

    def __init__(self, theta, cutoff_id, eta_before, eta_after, cutoff,
                 pair_gap):
        self.theta = theta
        self.cutoff_id = cutoff_id
        self.eta_before = eta_before
        self.eta_after = eta_after
        self.cutoff = cutoff        # solved at the bisected theta
        self.pair_gap = pair_gap    # |t_a - t_b| of the pair at Omega_c

    def __repr__(self):
        return (f"TransitionEvent(theta={np.rad2deg(self.theta):.4f} deg, "
                f"cutoff_id={self.cutoff_id}, "
                f"eta={self.eta_before:.2e} -> {self.eta_after:.2e})")


def pair_separation(field, atom, cutoff, model=None):
    """|t_a - t_b| of the coalescing pair at Omega = Re(Omega_hc).

    The two saddles are seeded from the local cubic normal form,
    t ~ t_hc +- sqrt(2 (Omega - Omega_hc) / A_hc).
    """
    model = model or VolkovAction(field, atom)
    dt = np.sqrt(-2j * cutoff.eta / cutoff.A_hc)
    roots = []
    for sgn in (1.0, -1.0):
        sol = solve_saddle(field, atom, cutoff.omega_c,
                           (cutoff.t_hc + sgn * dt, cutoff.tp_hc),
                           model=model)
        roots.append(sol.t)
    return abs(roots[0] - roots[1])


class MixingScan:
    """eta(theta) tracks per cutoff and the bisected transition events."""

    __slots__ = ("thetas", "cutoff_tracks", "events")

    def __init__(self, thetas, cutoff_tracks, events):
        self.thetas = thetas
        self.cutoff_tracks = cutoff_tracks  # cutoff_id -> list of cutoffs
        self.events = events

    def eta(self, cutoff_id):
        return np.array([c.eta for c in self.cutoff_tracks[cutoff_id]])


def _continue_cutoff(field_factory, atom, theta_from, theta_to, cutoff,
                     jump_threshold, max_halvings=8):
    """Advance a tracked cutoff from theta_from to theta_to."""
    stack = [theta_to]
    theta = theta_from
    halvings = 0
    while stack:
        goal = stack[-1]
        try:
            nxt = solve_cutoff(field_factory(goal), atom,
                               (cutoff.t_hc, cutoff.tp_hc))
            jumped = abs(nxt.t_hc - cutoff.t_hc) > jump_threshold
        except _SOLVE_ERRORS:
            jumped = True
            nxt = None
        if not jumped:
            cutoff, theta = nxt, goal
            stack.pop()
            continue
        halvings += 1
        if halvings > max_halvings:
            raise CutoffLostError(
                f"cutoff lost between theta = {np.rad2deg(theta):.3f} and "
                f"{np.rad2deg(goal):.3f} degrees")
        stack.append(0.5 * (theta + goal))
    return cutoff


def mixing_scan(theta_grid, field_factory, atom, theta_tol=None,
                excursion_window=(0.05, 1.05)):
    """Track each energy cutoff's eta over theta and bisect its zeros.

    field_factory(theta) builds the field at one mixing angle (radians,
    inside (0, pi/2)).  Sign changes of eta are refined by bisection to
    theta_tol (default 0.01 degrees); each event records the cutoff
    solved at the transition and the coalescence gap of its saddle pair
    at Omega = Re(Omega_hc).
    """
    thetas = np.asarray(theta_grid, dtype=float)
    if np.any(thetas <= 0.0) or np.any(thetas >= 0.5 * np.pi):
        raise ValueError("theta grid must lie inside (0, pi/2)")
    if theta_tol is None:
        theta_tol = np.deg2rad(0.01)
    field0 = field_factory(thetas[0])
    T = field0.period
    up0 = field0.ponderomotive()
    jump_threshold = 0.2 / field0.omega
    cuts0 = [c for c in find_all_cutoffs(field0, atom, (0.0, T))
             if excursion_window[0] <= (c.t_hc - c.tp_hc).real / T
             <= excursion_window[1]
             and not c.is_threshold(atom, up0)]
    if not cuts0:
        raise CutoffLostError("no energy-type cutoff at the first theta")

    tracks = {}
    events = []
    for cid, c0 in enumerate(cuts0):
        track = [c0]
        for th_prev, th in zip(thetas, thetas[1:]):
            track.append(_continue_cutoff(field_factory, atom, th_prev, th,
                                          track[-1], jump_threshold))
        tracks[cid] = track
        for i in range(len(thetas) - 1):
            ea, eb = track[i].eta, track[i + 1].eta
            if ea * eb >= 0.0:
                continue
            lo, hi = thetas[i], thetas[i + 1]
            c_lo, e_lo = track[i], ea
            while hi - lo > theta_tol:
                mid = 0.5 * (lo + hi)
                c_mid = _continue_cutoff(field_factory, atom, lo, mid,
                                         c_lo, jump_threshold)
                if e_lo * c_mid.eta >= 0.0:
                    lo, c_lo, e_lo = mid, c_mid, c_mid.eta
                else:
                    hi = mid
            # secant polish on eta(theta): the bisected bracket bounds the
            # zero to theta_tol, the polish drives eta itself to ~0 so
            # the saddle pair truly coalesces at the reported angle
            theta_star = 0.5 * (lo + hi)
            c_star = _continue_cutoff(field_factory, atom, lo, theta_star,
                                      c_lo, jump_threshold)
            th_a, e_a = lo, e_lo
            th_b, e_b = theta_star, c_star.eta
            for _ in range(30):
                if abs(e_b) < 1e-10 or e_b == e_a:
                    break
                th_next = th_b - e_b * (th_b - th_a) / (e_b - e_a)
                c_next = _continue_cutoff(field_factory, atom, th_b,
                                          th_next, c_star, jump_threshold)
                th_a, e_a = th_b, e_b
                th_b, e_b, c_star = th_next, c_next.eta, c_next
            theta_star = th_b
            gap = pair_separation(field_factory(theta_star), atom, c_star)
            events.append(TransitionEvent(theta_star, cid, ea, eb, c_star,
                                          gap))
    events.sort(key=lambda e: (e.theta, e.cutoff_id))
    return MixingScan(thetas, tracks, events)


# -- Riemann-surface mesh -----------------------------------------------------


class RiemannMesh:
    """Triangulated graph of Omega(t) over a recollision-time rectangle.

    vertices: (n, 4) array of (re_omega, im_omega, re_wt, im_wt);
    colors: per-vertex index into labels; labels: list of label keys;
    triangles: (m, 3) vertex indices; holes: count of failed grid nodes.
    """

    __slots__ = ("vertices", "colors", "labels", "triangles", "holes",
                 "omega_rect", "interior")

    def __init__(self, vertices, colors, labels, triangles, holes,
                 omega_rect, interior=None):
        self.vertices = vertices
        self.colors = colors
        self.labels = labels
        self.triangles = triangles
        self.holes = holes
        self.omega_rect = omega_rect
        # label keys whose branch regions are fully sampled by the grid
        # and therefore subject to the cover audit
        self.interior = list(labels) if interior is None else interior


def _solve_tp(model, t, guess, tol=1e-11, max_iter=40):
    """Newton on the ionization equation in t' alone, at fixed t."""
    tp = guess
    r = model.dS_dtp(t, tp)
    for _ in range(max_iter):
        if abs(r) < tol:
            return tp
        _, _, spp = model.second_partials(t, tp)
        if abs(spp) < 1e-14:
            raise SolverError("vanishing d2S/dtp2 in t' tracking")
        step = r / spp
        for _ in range(6):
            tp_try = tp - step
            try:
                r_try = model.dS_dtp(t, tp_try)
            except (CoincidentTimesError, DegenerateDenominatorError):
                step *= 0.5
                continue
            if abs(r_try) < abs(r):
                tp, r = tp_try, r_try
                break
            step *= 0.5
        else:
            raise SolverError("t' Newton stalled")
    raise SolverError("t' Newton did not converge")


def _sheet_tables(field, atom, orbits, res, ims, model):
    """t_s(Omega) of each labeled orbit over the rectangle grid.

    Each sheet is continued from the orbit's mid-chain saddle down to
    the bottom edge of the rectangle, along it, and then up every grid
    column; lost columns stay NaN (holes).
    """
    n_im, n_re = len(ims), len(res)
    tables = {}
    for orb in orbits:
        anchor = orb.solutions[len(orb.solutions) // 2]
        tg = np.full((n_im, n_re), np.nan + 0j)
        pg = np.full((n_im, n_re), np.nan + 0j)
        tables[orb.label.key()] = (tg, pg)
        try:
            path = anchor.omega + 1j * np.linspace(0.0, ims[0], 5)[1:]
            corner = continue_orbit(field, atom, path, anchor,
                                    model=model)[-1]
            ja = int(np.argmin(np.abs(res - anchor.omega.real)))
            left = continue_orbit(field, atom, res[ja::-1] + 1j * ims[0],
                                  corner, model=model)
            right = continue_orbit(field, atom, res[ja:] + 1j * ims[0],
                                   corner, model=model)
        except _SOLVE_ERRORS:
            continue
        bottom = {ja - n: s for n, s in enumerate(left)}
        bottom.update({ja + n: s for n, s in enumerate(right)})
        for j in range(n_re):
            try:
                col = continue_orbit(field, atom, res[j] + 1j * ims,
                                     bottom[j], model=model)
            except _SOLVE_ERRORS:
                continue
            for i, s in enumerate(col):
                tg[i, j] = s.t
                pg[i, j] = s.tp
    return tables


def _match_sheet(t, tp, om, res, ims, tables, tol):
    """Orbit key of the sheet passing nearest to (t, t', Omega), or None.

    The ionization time takes part in the match because distinct t'
    branches (layers of the mesh) share recollision times.
    """
    j = int(np.argmin(np.abs(res - om.real)))
    i = int(np.argmin(np.abs(ims - om.imag)))
    best = second = np.inf
    best_key = None
    for key, (tg, pg) in tables.items():
        ref_t, ref_tp = tg[i, j], pg[i, j]
        if np.isnan(ref_t.real):
            continue
        d = abs(t - ref_t) + abs(tp - ref_tp)
        if d < best:
            best, second, best_key = d, best, key
        elif d < second:
            second = d
    if best_key is None or best > tol or best > 0.6 * second:
        return None
    return best_key


def riemann_mesh(field, atom, omega_rect, resolution=(96, 64),
                 im_wt_window=(-2.4, 2.4), time_window=None, model=None):
    """Mesh of the surface Omega = dS/dt(t, t'_s(t)) over a t rectangle.

    Vertices come from a complex recollision-time grid with the
    ionization time t'_s tracked by Newton flood fill; nodes where the
    tracking fails become holes (their grid cells are not triangulated).
    omega_rect = (re_min, re_max, im_min, im_max) is the Omega window of
    the per-region cover audit.

    Per-vertex branch colors are the orbit labels: every vertex whose
    Omega lies inside the rectangle is matched against reference sheets
    t_s(Omega) (each labeled orbit continued over the rectangle), so a
    color marks the branch region of that quantum orbit.  Vertices that
    project outside the rectangle, or that belong to orbits of
    neighbouring periods, carry color -1 and are excluded from audits.
    """
    from .classify import strip_boundaries
    from .orbits import quantum_orbits

    model = model or VolkovAction(field, atom)
    w = field.omega
    T = field.period
    n_re, n_im = resolution
    re0, re1, im0, im1 = omega_rect
    if time_window is None:
        time_window = (-0.5 * T, 1.5 * T)

    cutoffs = [c for c in find_all_cutoffs(field, atom, time_window,
                                           model=model)
               if 0.05 <= (c.t_hc - c.tp_hc).real / T <= 1.05]
    if len(cutoffs) < 2:
        raise SolverError("not enough cutoffs to define branch regions")
    bounds = strip_boundaries(cutoffs)
    re_wt = np.linspace(w * bounds[0], w * bounds[-1], n_re)
    im_wt = np.linspace(im_wt_window[0], im_wt_window[1], n_im)

    # reference sheets of the central-period orbits over the rectangle
    grid = np.arange(atom.Ip + 0.2 * w, re1 + 0.5 * w, 0.5 * w)
    orbits, _ = quantum_orbits(field, atom, grid, model=model)
    res = np.linspace(re0, re1, n_re)
    ims = np.linspace(im0, im1, n_im)
    tables = _sheet_tables(field, atom, orbits, res, ims, model)
    # matching scale: half the closest approach of distinct sheets,
    # bounded by a fraction of the period
    tol = 0.5 / w

    # one flood-fill layer per distinct t' branch: distinct orbits can
    # share a recollision time with different ionization events, so the
    # surface over the t rectangle is a multi-layer covering
    from collections import deque

    def fill_layer(seed):
        tp_grid = np.full((n_im, n_re), np.nan + 0j)
        om_grid = np.full((n_im, n_re), np.nan + 0j)
        queue = deque()

        def try_node(i, j, guess):
            t = (re_wt[j] + 1j * im_wt[i]) / w
            try:
                tp = _solve_tp(model, t, guess)
            except _SOLVE_ERRORS:
                return False
            tp_grid[i, j] = tp
            om_grid[i, j] = model.dS_dt(t, tp)
            queue.append((i, j))
            return True

        i0 = int(np.argmin(np.abs(im_wt - w * seed.t.imag)))
        j0 = int(np.argmin(np.abs(re_wt - w * seed.t.real)))
        if not try_node(i0, j0, seed.tp):
            raise SolverError("t' tracking failed at the seed node")
        while queue:
            i, j = queue.popleft()
            for di, dj in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                ii, jj = i + di, j + dj
                if 0 <= ii < n_im and 0 <= jj < n_re \
                        and np.isnan(tp_grid[ii, jj].real):
                    try_node(ii, jj, tp_grid[i, j])
        return tp_grid, om_grid

    layers = []
    for orb in sorted(orbits, key=lambda o: o.label.key()):
        anchor = orb.solutions[len(orb.solutions) // 2]
        i0 = int(np.argmin(np.abs(im_wt - w * anchor.t.imag)))
        j0 = int(np.argmin(np.abs(re_wt - w * anchor.t.real)))
        if any(abs(tp_grid[i0, j0] - anchor.tp) < 0.3 / w
               for tp_grid, _ in layers
               if not np.isnan(tp_grid[i0, j0].real)):
            continue
        layers.append(fill_layer(anchor))

    keys = sorted(tables)
    key_index = {k: n for n, k in enumerate(keys)}
    verts, cols, triangles = [], [], []
    holes = 0
    for tp_grid, om_grid in layers:
        valid = ~np.isnan(tp_grid.real)
        holes += int(np.size(valid) - np.count_nonzero(valid))
        index = -np.ones((n_im, n_re), dtype=int)
        for i in range(n_im):
            for j in range(n_re):
                if not valid[i, j]:
                    continue
                t = (re_wt[j] + 1j * im_wt[i]) / w
                om = om_grid[i, j]
                index[i, j] = len(verts)
                verts.append((om.real, om.imag, re_wt[j], im_wt[i]))
                if re0 <= om.real <= re1 and im0 <= om.imag <= im1:
                    key = _match_sheet(t, tp_grid[i, j], om, res, ims,
                                       tables, tol)
                    cols.append(key_index[key] if key is not None else -1)
                else:
                    cols.append(-1)
        for i in range(n_im - 1):
            for j in range(n_re - 1):
                a, b = index[i, j], index[i, j + 1]
                c, d = index[i + 1, j], index[i + 1, j + 1]
                if min(a, b, c) >= 0:
                    triangles.append((a, b, c))
                if min(b, d, c) >= 0:
                    triangles.append((b, d, c))
    return RiemannMesh(np.array(verts), np.array(cols, dtype=int), keys,
                       np.array(triangles, dtype=int), holes,
                       tuple(omega_rect), list(keys))


def write_mesh(mesh, path):
    """Text polygon export: '#' metadata, vertex and triangle records."""
    with open(path, "w") as fh:
        fh.write("# riemann-surface mesh\n")
        fh.write("# omega_rect {:.9g} {:.9g} {:.9g} {:.9g}\n"
                 .format(*mesh.omega_rect))
        fh.write(f"# holes {mesh.holes}\n")
        for n, key in enumerate(mesh.labels):
            fh.write(f"# color {n} strip {key[0]} side {key[1]:+d}\n")
        fh.write("# v re_omega im_omega re_wt im_wt color\n")
        for (ro, io, rt, it), c in zip(mesh.vertices, mesh.colors):
            fh.write(f"v {ro:.12g} {io:.12g} {rt:.12g} {it:.12g} {c}\n")
        for a, b, c in mesh.triangles:
            fh.write(f"t {a} {b} {c}\n")


def read_mesh(path):
    """Read a mesh written by write_mesh."""
    verts, cols, tris, labels = [], [], [], []
    holes = 0
    rect = (0.0, 0.0, 0.0, 0.0)
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if line.startswith("# omega_rect"):
                rect = tuple(float(x) for x in line.split()[2:6])
            elif line.startswith("# holes"):
                holes = int(line.split()[2])
            elif line.startswith("# color"):
                parts = line.split()
                labels.append((int(parts[4]), int(parts[6])))
            elif line.startswith("v "):
                parts = line.split()
                verts.append(tuple(float(x) for x in parts[1:5]))
                cols.append(int(parts[5]))
            elif line.startswith("t "):
                tris.append(tuple(int(x) for x in line.split()[1:4]))
    return RiemannMesh(np.array(verts), np.array(cols, dtype=int), labels,
                       np.array(tris, dtype=int), holes, rect)


def cover_audit(mesh, keys=None, probes_per_axis=24, margin=0.02):
    """Cover count of each colored region over the Omega rectangle.

    Projects each region's triangles to the (Re Omega, Im Omega) plane
    and counts, for a probe grid strictly inside the rectangle, how many
    contain each probe.  A triangle belongs to a region when its labeled
    vertices all carry that color; unlabeled (-1) vertices on the border
    toward neighbouring-period copies do not disqualify it.  Defaults to
    the fully-sampled interior regions.  Returns {label_key:
    (mean_cover, fraction_multiply_covered, fraction_uncovered)}.
    """
    if keys is None:
        keys = mesh.interior
    re0, re1, im0, im1 = mesh.omega_rect
    dre, dim = re1 - re0, im1 - im0
    px = np.linspace(re0 + margin * dre, re1 - margin * dre, probes_per_axis)
    py = np.linspace(im0 + margin * dim, im1 - margin * dim, probes_per_axis)
    probes = np.array([(x, y) for x in px for y in py])
    report = {}
    omega_xy = mesh.vertices[:, :2]
    tri_cols = mesh.colors[mesh.triangles]
    for key in keys:
        n = mesh.labels.index(key)
        has = np.any(tri_cols == n, axis=1)
        clean = np.all((tri_cols == n) | (tri_cols == -1), axis=1)
        mine = mesh.triangles[has & clean]
        counts = np.zeros(len(probes), dtype=int)
        for tri in mine:
            a, b, c = omega_xy[tri]
            counts += _inside_triangle(probes, a, b, c)
        report[key] = (float(np.mean(counts)),
                       float(np.mean(counts > 1)),
                       float(np.mean(counts == 0)))
    return report


def _inside_triangle(points, a, b, c):
    """Vectorized barycentric inclusion test (boundary counts as inside)."""
    v0, v1 = b - a, c - a
    v2 = points - a
    den = v0[0] * v1[1] - v1[0] * v0[1]
    if abs(den) < 1e-300:
        return np.zeros(len(points), dtype=bool)
    u = (v2[:, 0] * v1[1] - v1[0] * v2[:, 1]) / den
    v = (v0[0] * v2[:, 1] - v2[:, 0] * v0[1]) / den
    return (u >= 0.0) & (v >= 0.0) & (u + v <= 1.0)
