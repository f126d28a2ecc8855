"""Saddle and cutoff solvers: residual bounds, frozen roots, continuation."""

import numpy as np
import pytest

from sfa_orbits.action import AtomParams, VolkovAction
from sfa_orbits.saddles import (NonConvergenceError, OrbitLostError,
                                SingularJacobianError, continue_orbit,
                                find_all_cutoffs, find_saddles, newton2,
                                solve_cutoff, solve_saddle)
from sfa_orbits.waveform import FourierField, linear_monochromatic

from conftest import DEFAULT_F0, DEFAULT_IP, DEFAULT_OMEGA

W = DEFAULT_OMEGA


def deg(x):
    """Complex time in units of the default field's phase, from degrees."""
    return (np.deg2rad(np.real(x)) + 1j * np.imag(x) * np.pi / 180.0) / W


# -- Newton kernel -----------------------------------------------------------

def quadratic_residual(z):
    x, y = z
    r = np.array([x ** 2 - 1.0, y - x])
    J = np.array([[2 * x, 0.0], [-1.0, 1.0]])
    return r, J


def test_newton2_solves_quadratic():
    root, its = newton2(quadratic_residual, (2.0 + 0.1j, 0.0))
    assert abs(root[0] - 1.0) < 1e-12 and abs(root[1] - 1.0) < 1e-12
    assert its > 0


def test_newton2_converged_guess_takes_zero_iterations():
    root, its = newton2(quadratic_residual, (1.0, 1.0))
    assert its == 0


def test_newton2_nonconvergence():
    def stubborn(z):
        # residual bounded away from zero with a well-conditioned Jacobian
        x, y = z
        return np.array([1.0 + 0j, y]), np.eye(2, dtype=complex)
    with pytest.raises(NonConvergenceError):
        newton2(stubborn, (0.0, 0.0), max_iter=10)


def test_newton2_singular_jacobian():
    def flat(z):
        return np.array([1.0, 1.0]), np.zeros((2, 2))
    with pytest.raises(SingularJacobianError):
        newton2(flat, (0.0, 0.0))


# -- saddle solutions --------------------------------------------------------

def default_model():
    field = linear_monochromatic(DEFAULT_F0, DEFAULT_OMEGA)
    return field, AtomParams(DEFAULT_IP)


def test_solve_saddle_residual_independent():
    field, atom = default_model()
    omega = 30.0 * W
    sol = solve_saddle(field, atom, omega, (deg(14 - 6j), deg(-150 + 59j)))
    model = VolkovAction(field, atom)
    # re-evaluate the saddle equations independently of the solver
    assert abs(model.dS_dt(sol.t, sol.tp) - omega) < 1e-9
    assert abs(model.dS_dtp(sol.t, sol.tp)) < 1e-9
    assert sol.residual < 1e-10


def test_solve_saddle_frozen_short_orbit():
    # short orbit of the default field at 30 omega
    field, atom = default_model()
    sol = solve_saddle(field, atom, 30.0 * W, (deg(14 - 6j), deg(-150 + 59j)))
    assert abs(np.rad2deg(W * sol.t.real) - 14.319) < 0.01
    assert abs(W * sol.t.imag - (-0.110)) < 0.001
    assert sol.tp.imag > 0  # physical ionization branch


def test_find_saddles_count_above_threshold():
    # at least 6 distinct saddles in a two-cycle window just above Ip
    field, atom = default_model()
    T = field.period
    sols = find_saddles(field, atom, 14.5 * W, t_window=(0.0, 2 * T))
    assert len(sols) >= 6
    for a, b in zip(sols, sols[1:]):
        assert abs(a.t - b.t) > 1e-6 or abs(a.tp - b.tp) > 1e-6


def test_find_saddles_zero_field_empty():
    field = FourierField(1.0, [])
    assert find_saddles(field, AtomParams(0.5), 1.5) == []


def test_saddle_translation_symmetry():
    # saddles come in T/2 translated copies for a linear field
    field, atom = default_model()
    T = field.period
    a = solve_saddle(field, atom, 30.0 * W, (deg(14 - 6j), deg(-150 + 59j)))
    b = solve_saddle(field, atom, 30.0 * W,
                     (a.t + T / 2, a.tp + T / 2))
    assert abs((b.t - a.t) - T / 2) < 1e-8
    assert abs(b.action - (a.action - 30.0 * W * T / 2)) < 1e-8


# -- continuation ------------------------------------------------------------

def test_continuation_path_independent():
    field, atom = default_model()
    seed = solve_saddle(field, atom, 20.0 * W, (deg(-20 - 20j), deg(-155 + 62j)))
    coarse = continue_orbit(field, atom, np.arange(20.0, 45.1, 1.0) * W, seed)
    fine = continue_orbit(field, atom, np.arange(20.0, 45.01, 0.125) * W, seed)
    assert abs(coarse[-1].t - fine[-1].t) < 1e-8
    assert abs(coarse[-1].tp - fine[-1].tp) < 1e-8


def test_continuation_jump_guard():
    field, atom = default_model()
    seed = solve_saddle(field, atom, 20.0 * W, (deg(-20 - 20j), deg(-155 + 62j)))
    with pytest.raises(OrbitLostError):
        continue_orbit(field, atom, np.array([20.0, 45.0]) * W, seed,
                       jump_threshold=1e-12, max_halvings=3)


def test_complex_grid_keeps_branches_separate():
    # crossing the threshold branch point on the real axis can collapse a
    # coalescing pair; a lower-half-plane detour keeps the sheets apart
    field, atom = default_model()
    Ip, T = atom.Ip, field.period
    spur = solve_saddle(field, atom, 30.0 * W, (deg(94.7 - 82j), deg(41 + 68j)))
    short = solve_saddle(field, atom, 30.0 * W, (deg(194.3 - 6j), deg(30 + 59j)))
    arc = [Ip + 0.1 * W * np.exp(1j * ph)
           for ph in np.linspace(0, -np.pi, 9)]
    grid = np.concatenate([np.arange(30.0, 14.0, -0.5) * W, arc, [13.0 * W]])
    ends = [continue_orbit(field, atom, grid, s)[-1] for s in (spur, short)]
    assert all(np.imag(e.omega) == 0 for e in ends)
    sep = abs(ends[0].t - ends[1].t)
    assert sep > 1.0  # distinct below-threshold branch members
    assert abs(np.rad2deg(W * ends[0].t.real) - 104.23) < 0.1
    assert abs(np.rad2deg(W * ends[1].t.real) - 129.36) < 0.1


# -- harmonic cutoffs --------------------------------------------------------

@pytest.fixture(scope="module")
def default_cutoffs():
    field, atom = default_model()
    return find_all_cutoffs(field, atom, (0.0, field.period))


def test_cutoff_count_and_kinds(default_cutoffs):
    field, atom = default_model()
    up = field.ponderomotive()
    first_return = [c for c in default_cutoffs
                    if (c.t_hc - c.tp_hc).real / field.period <= 1.05]
    assert len(first_return) == 6
    kinds = [c.is_threshold(atom, up) for c in first_return]
    assert kinds.count(True) == 4 and kinds.count(False) == 2


def test_cutoff_alternation_with_pair_series():
    # the cutoff series of the short/long pairs alternates threshold and
    # energy types: over 1.5 periods, 3 of each
    field, atom = default_model()
    T, up = field.period, field.ponderomotive()
    cuts = find_all_cutoffs(field, atom, (0.0, 1.5 * T))
    series = [c for c in cuts
              if 0.4 <= (c.t_hc - c.tp_hc).real / T <= 1.1]
    kinds = [c.is_threshold(atom, up) for c in series]
    assert len(series) == 6
    assert kinds == [True, False, True, False, True, False]


def test_threshold_cutoffs_at_ip_exactly(default_cutoffs):
    field, atom = default_model()
    up = field.ponderomotive()
    thresholds = [c for c in default_cutoffs if c.is_threshold(atom, up)]
    assert thresholds
    for c in thresholds:
        assert abs(c.omega_hc - atom.Ip) < 1e-8
        assert abs(c.eta) < 1e-8


def test_energy_cutoff_frozen(default_cutoffs):
    field, atom = default_model()
    up = field.ponderomotive()
    energy = [c for c in default_cutoffs
              if not c.is_threshold(atom, up)
              and (c.t_hc - c.tp_hc).real / field.period <= 1.05]
    assert len(energy) == 2
    for c in energy:
        assert abs(c.omega_hc.real / W - 42.1863) < 1e-3
        assert abs(c.omega_hc.imag / W - 0.7618) < 1e-3
        assert c.eta > 0


def test_monkey_saddle_orientations(default_cutoffs):
    # one cutoff per excursion class; arg(A_hc) frozen per class
    field, atom = default_model()
    T = field.period
    expected = {0.234: -87.97, 0.647: 178.19, 1.003: -0.011, 1.213: 179.73}
    seen = {}
    for c in default_cutoffs:
        exc = round((c.t_hc - c.tp_hc).real / T, 3)
        seen.setdefault(exc, []).append(np.rad2deg(np.angle(c.A_hc)))
    for exc, ref in expected.items():
        assert exc in seen
        for val in seen[exc]:
            assert abs(val - ref) < 0.5


def test_cutoff_residual_independent(default_cutoffs):
    field, atom = default_model()
    model = VolkovAction(field, atom)
    for c in default_cutoffs:
        stt, stp, spp = model.second_partials(c.t_hc, c.tp_hc)
        assert abs(stt * spp - stp ** 2) < 1e-10
        assert abs(model.dS_dtp(c.t_hc, c.tp_hc)) < 1e-10


def test_cutoffs_translated_copies(default_cutoffs):
    field, _ = default_model()
    T = field.period
    res = sorted(c.t_hc.real for c in default_cutoffs
                 if (c.t_hc - c.tp_hc).real / field.period <= 1.05)
    # the six first-return cutoffs split into two T/2-translated triples
    assert len(res) == 6
    for a, b in zip(res[:3], res[3:]):
        assert abs((b - a) - T / 2) < 1e-6


def test_find_all_cutoffs_zero_field_empty():
    field = FourierField(1.0, [])
    assert find_all_cutoffs(field, AtomParams(0.5), (0.0, 6.0)) == []


def test_solve_cutoff_physical_branch():
    field, atom = default_model()
    cut = solve_cutoff(field, atom, (deg(70 - 2j), deg(-163 + 49j)))
    assert cut.tp_hc.imag > 0
    assert abs(np.rad2deg(W * cut.t_hc.real) - 69.94) < 0.05
