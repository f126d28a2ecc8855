"""Saddle-point and harmonic-cutoff solvers.

Newton's method in two complex variables with analytic Jacobians solves

  recollision:  dS/dt (t, t')  = Omega
  ionization:   1/2 (p_s + A(t'))^2 + Ip = 0

for saddle points at fixed harmonic energy Omega, and

  degeneracy:   S_tt S_t't' - S_tt'^2 = 0   (numerator form)
  ionization:   as above

for the harmonic-cutoff times t_hc where two saddles coalesce.  The
numerator form avoids the spurious poles of the constrained second
derivative where S_t't' vanishes.
"""

import numpy as np

from .action import (CoincidentTimesError, DegenerateDenominatorError,
                     VolkovAction)

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 60
DEDUP_DISTANCE = 1e-6


class SolverError(RuntimeError):
    pass


class NonConvergenceError(SolverError):
    pass


class SingularJacobianError(SolverError):
    pass


class OrbitLostError(SolverError):
    """Continuation step-halving exhausted without reacquiring the orbit."""


class SaddleSolution:
    """One saddle point (t, t') of the action at harmonic energy omega."""

    __slots__ = ("omega", "t", "tp", "p_s", "bundle", "residual")

    def __init__(self, omega, t, tp, p_s, bundle, residual):
        self.omega = omega
        self.t = t
        self.tp = tp
        self.p_s = p_s
        self.bundle = bundle
        self.residual = residual

    @property
    def excursion(self):
        return self.t - self.tp

    @property
    def action(self):
        """Phase S = S_V - Omega*t entering the amplitude e^{-iS}."""
        return self.bundle.S_V - self.omega * self.t

    def __repr__(self):
        return (f"SaddleSolution(omega={self.omega:.6g}, t={self.t:.6g}, "
                f"tp={self.tp:.6g}, residual={self.residual:.2e})")


class HarmonicCutoff:
    """A harmonic-cutoff time: coalescence point of a saddle pair."""

    __slots__ = ("t_hc", "tp_hc", "omega_hc", "A_hc", "residual")

    def __init__(self, t_hc, tp_hc, omega_hc, A_hc, residual):
        self.t_hc = t_hc
        self.tp_hc = tp_hc
        self.omega_hc = omega_hc
        self.A_hc = A_hc
        self.residual = residual

    @property
    def omega_c(self):
        return self.omega_hc.real

    @property
    def eta(self):
        return self.omega_hc.imag

    def is_threshold(self, atom, up):
        """Threshold-type (near Ip) vs energy-type (high-frequency) cutoff."""
        return self.omega_hc.real < atom.Ip + 0.5 * up

    def __repr__(self):
        return (f"HarmonicCutoff(t_hc={self.t_hc:.6g}, "
                f"omega_hc={self.omega_hc:.6g}, A_hc={self.A_hc:.6g})")


def newton2(residual, guess, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER):
    """Damped Newton iteration for a C^2 -> C^2 map with analytic Jacobian.

    residual(z) must return (r, J) with r a length-2 complex array and J
    the 2x2 complex Jacobian.  Full steps with backtracking: the step is
    halved up to 5 times while the residual norm increases.

    Returns (root, iterations).
    """
    z = np.asarray(guess, dtype=complex)
    # overflow in trial steps far up the complex plane is expected and
    # handled by backtracking; don't let numpy warn about it
    with np.errstate(over="ignore", invalid="ignore"):
        return _newton2_core(residual, z, tol, max_iter)


def _newton2_core(residual, z, tol, max_iter):
    r, J = residual(z)
    rnorm = np.max(np.abs(r))
    if rnorm < tol:
        return z, 0
    for it in range(1, max_iter + 1):
        det = J[0, 0] * J[1, 1] - J[0, 1] * J[1, 0]
        if abs(det) < 1e-300 or not np.isfinite(det):
            raise SingularJacobianError(f"singular Jacobian at iteration {it}")
        step = np.array([(J[1, 1] * r[0] - J[0, 1] * r[1]) / det,
                         (J[0, 0] * r[1] - J[1, 0] * r[0]) / det])
        scale = 1.0
        best = None
        for _ in range(6):
            z_try = z - scale * step
            try:
                r_try, J_try = residual(z_try)
            except (CoincidentTimesError, DegenerateDenominatorError):
                scale /= 2
                continue
            n_try = np.max(np.abs(r_try))
            if best is None or n_try < best[0]:
                best = (n_try, z_try, r_try, J_try)
            if n_try < rnorm:
                break
            scale /= 2
        if best is None:
            raise NonConvergenceError("step landed outside the domain")
        rnorm, z, r, J = best
        if not np.isfinite(rnorm):
            raise NonConvergenceError("residual became non-finite")
        if rnorm < tol:
            return z, it
    raise NonConvergenceError(
        f"no convergence after {max_iter} iterations (residual {rnorm:.2e})")


def _saddle_residual(model, omega):
    def residual(z):
        t, tp = z
        r = np.array([model.dS_dt(t, tp) - omega, model.dS_dtp(t, tp)])
        stt, stp, spp = model.second_partials(t, tp)
        J = np.array([[stt, stp], [stp, spp]])
        return r, J
    return residual


def solve_saddle(field, atom, omega, guess, tol=DEFAULT_TOL,
                 max_iter=DEFAULT_MAX_ITER, model=None):
    """Solve the saddle equations at harmonic energy omega from a guess."""
    model = model or VolkovAction(field, atom)
    z, _ = newton2(_saddle_residual(model, omega), guess, tol, max_iter)
    t, tp = z
    bundle = model.bundle(t, tp)
    residual = max(abs(bundle.dS_dt - omega), abs(bundle.dS_dtp))
    return SaddleSolution(omega, t, tp, model.stationary_momentum(t, tp),
                          bundle, residual)


def seed_guesses(field, atom, omega0=None, re_step_deg=10.0,
                 im_wt=(0.1, 0.4), excursions=(0.3, 0.6, 0.9),
                 im_wtp=0.25, window_deg=(0.0, 720.0)):
    """Deterministic (t, t') seed grid for the saddle equations.

    Re(wt) sweeps the window in steps of re_step_deg, Im(wt) takes the
    given values, and t' sits an excursion-guess before t with a small
    positive Im(wt').
    """
    w = field.omega
    T = 2 * np.pi / w
    guesses = []
    for deg in np.arange(window_deg[0], window_deg[1], re_step_deg):
        for im in im_wt:
            t = (np.deg2rad(deg) + 1j * im) / w
            for x in excursions:
                tp = t.real - x * T + 1j * im_wtp / w
                guesses.append((t, tp))
    return guesses


def find_saddles(field, atom, omega, guesses=None, tol=DEFAULT_TOL,
                 excursion_window=(0.05, 1.05), t_window=None, model=None):
    """Solve from every seed, deduplicate, and filter to the windows.

    excursion_window is in periods of the field on Re(t - t'); t_window,
    if given, bounds Re(t) in absolute time.
    """
    model = model or VolkovAction(field, atom)
    if guesses is None:
        guesses = seed_guesses(field, atom, omega)
    T = field.period
    found = []
    for guess in guesses:
        try:
            sol = solve_saddle(field, atom, omega, guess, tol, model=model)
        except (SolverError, CoincidentTimesError, DegenerateDenominatorError):
            continue
        exc = sol.excursion.real / T
        if not (excursion_window[0] <= exc <= excursion_window[1]):
            continue
        if t_window is not None and not (t_window[0] <= sol.t.real <= t_window[1]):
            continue
        if abs(sol.t.imag) > 3.0 / field.omega:
            continue
        if any(abs(sol.t - o.t) < DEDUP_DISTANCE and abs(sol.tp - o.tp) < DEDUP_DISTANCE
               for o in found):
            continue
        found.append(sol)
    found.sort(key=lambda s: (s.t.real, s.t.imag))
    return found


def continue_orbit(field, atom, omega_grid, seed_solution, tol=DEFAULT_TOL,
                   jump_threshold=None, max_halvings=8, model=None):
    """Track one saddle along a monotone omega grid by continuation.

    Each grid point is solved with the previous root as the guess; on
    non-convergence, or if the root moves more than the jump threshold
    (default 0.15/omega), the omega step is halved up to max_halvings
    times.  Returns SaddleSolutions at the grid points only.

    Grid points may be complex: an excursion of the grid into the
    complex Omega plane steers the continuation around branch points
    of t_s(Omega), keeping coalescing saddle pairs on distinct sheets.
    """
    model = model or VolkovAction(field, atom)
    omega_grid = np.asarray(omega_grid)
    if np.iscomplexobj(omega_grid) and np.all(omega_grid.imag == 0.0):
        omega_grid = omega_grid.real
    if jump_threshold is None:
        jump_threshold = 0.15 / field.omega

    current = seed_solution
    if abs(current.omega - omega_grid[0]) > 0:
        current = _step_to(field, atom, model, current, omega_grid[0], tol,
                           jump_threshold, max_halvings)
    out = [current]
    for target in omega_grid[1:]:
        current = _step_to(field, atom, model, current, target, tol,
                           jump_threshold, max_halvings)
        out.append(current)
    return out


def _step_to(field, atom, model, current, target, tol, jump_threshold,
             max_halvings):
    """Advance a tracked saddle from current.omega to target."""
    stack = [target]
    halvings = 0
    while stack:
        goal = stack[-1]
        try:
            nxt = solve_saddle(field, atom, goal, (current.t, current.tp),
                               tol, model=model)
            jumped = abs(nxt.t - current.t) > jump_threshold
        except (SolverError, CoincidentTimesError, DegenerateDenominatorError):
            jumped = True
            nxt = None
        if not jumped:
            current = nxt
            stack.pop()
            continue
        halvings += 1
        if halvings > max_halvings:
            raise OrbitLostError(
                f"orbit lost between omega={current.omega:.6g} and {goal:.6g}")
        stack.append(0.5 * (current.omega + goal))
    return current


def _cutoff_residual(model):
    def residual(z):
        t, tp = z
        stt, stp, spp = model.second_partials(t, tp)
        sttt, sttp, stpp, sppp = model.third_partials(t, tp)
        r = np.array([stt * spp - stp ** 2, model.dS_dtp(t, tp)])
        J = np.array([
            [sttt * spp + stt * stpp - 2 * stp * sttp,
             sttp * spp + stt * sppp - 2 * stp * stpp],
            [stp, spp],
        ])
        return r, J
    return residual


def solve_cutoff(field, atom, guess, tol=DEFAULT_TOL, max_iter=DEFAULT_MAX_ITER,
                 model=None):
    """Solve the cutoff equations from a (t, t') guess.

    The degeneracy condition is solved in numerator form together with
    the ionization equation; Omega_hc and A_hc are evaluated at the root.
    """
    model = model or VolkovAction(field, atom)
    z, _ = newton2(_cutoff_residual(model), guess, tol, max_iter)
    t, tp = z
    stt, stp, spp = model.second_partials(t, tp)
    residual = max(abs(stt * spp - stp ** 2), abs(model.dS_dtp(t, tp)))
    omega_hc = model.dS_dt(t, tp)
    a_hc = 0.5 * model.constrained_d3S(t, tp)
    return HarmonicCutoff(t, tp, omega_hc, a_hc, residual)


def find_all_cutoffs(field, atom, time_window, tol=DEFAULT_TOL,
                     excursions=(0.25, 0.45, 0.65, 0.85, 1.05),
                     re_step_deg=15.0, im_wt=(0.05, 0.3),
                     im_wtp=(0.2, 0.6), ionization_branch=True, model=None):
    """Locate every harmonic-cutoff time with Re(t_hc) in time_window.

    A deterministic seed grid is swept with the cutoff Newton solver;
    converged roots are deduplicated by |dt_hc| < 1e-6 and returned
    sorted by Re(t_hc).  Cutoff roots come in complex-conjugate pairs
    for real fields; with ionization_branch=True only the physical
    branch with Im(t'_hc) > 0 (tunnelling ionization) is kept.
    """
    model = model or VolkovAction(field, atom)
    w = field.omega
    T = field.period
    t0, t1 = time_window
    cutoffs = []
    pad = 0.02 * T
    for deg in np.arange(w * t0 * 180 / np.pi, w * t1 * 180 / np.pi, re_step_deg):
        for im in im_wt:
            t = (np.deg2rad(deg) + 1j * im) / w
            for x in excursions:
                for imp in im_wtp:
                    guess = (t, t.real - x * T + 1j * imp / w)
                    try:
                        c = solve_cutoff(field, atom, guess, tol, model=model)
                    except (SolverError, CoincidentTimesError,
                            DegenerateDenominatorError):
                        continue
                    if not (t0 - pad <= c.t_hc.real < t1 - pad):
                        continue
                    exc = (c.t_hc - c.tp_hc).real / T
                    if not (0.05 <= exc <= max(excursions) + 0.3):
                        continue
                    if abs(c.t_hc.imag) > 2.5 / w or abs(c.tp_hc.imag) > 2.5 / w:
                        continue
                    if ionization_branch and c.tp_hc.imag <= 0:
                        continue
                    # reject spurious numerator roots at S_t't' ~ 0
                    _, _, spp = model.second_partials(c.t_hc, c.tp_hc)
                    if abs(spp) < 1e-6:
                        continue
                    if any(abs(c.t_hc - o.t_hc) < DEDUP_DISTANCE for o in cutoffs):
                        continue
                    cutoffs.append(c)
    cutoffs.sort(key=lambda c: c.t_hc.real)
    return cutoffs
