"""Parameter scans: classical constant, cutoff law, mixing, mesh."""

import numpy as np
import pytest

from sfa_orbits import (CutoffLostError, bicircular,
                        classical_cutoff_constant, classical_return_energy,
                        cover_audit, cutoff_law_scan, mixing_scan, read_mesh,
                        riemann_mesh, solve_energy_cutoff, write_mesh)
from sfa_orbits.scans import _continue_cutoff, classical_kinetic_energy

from conftest import DEFAULT_F0, DEFAULT_OMEGA


# -- classical cutoff constant ----------------------------------------------

def _ode_return_energy(phi_ion):
    """ODE oracle: integrate x'' = -cos(t) from rest until x returns to 0.

    With F0 = omega = 1 the ponderomotive energy is 1/4, so the kinetic
    energy in Up units is 2 v^2.
    """
    from scipy.integrate import solve_ivp

    def rhs(t, y):
        return [y[1], -np.cos(t)]

    # the electron first moves to x < 0, so an upward zero crossing is
    # the return and the release point itself does not fire the event
    def hit(t, y):
        return y[0]
    hit.terminal = True
    hit.direction = 1

    sol = solve_ivp(rhs, (phi_ion, phi_ion + 2.0 * np.pi), [0.0, 0.0],
                    events=hit, rtol=1e-12, atol=1e-14, max_step=0.05)
    if not len(sol.t_events[0]):
        return 0.0
    return 2.0 * sol.y_events[0][0][1] ** 2


def test_zero_duration_returns_zero_energy():
    assert classical_kinetic_energy(0.3, 0.3) == 0.0


def test_return_energy_matches_ode_oracle():
    for phi in (0.1, 0.3, 0.6, 1.2):
        assert classical_return_energy(phi) == pytest.approx(
            _ode_return_energy(phi), abs=1e-8)


def test_cutoff_constant_frozen():
    assert classical_cutoff_constant() == pytest.approx(3.1731366, abs=1e-5)


def test_cutoff_constant_scale_invariant():
    base = classical_cutoff_constant()
    assert classical_cutoff_constant(2.0, 0.31) == pytest.approx(
        base, abs=1e-12)


# -- cutoff law F(gamma) -----------------------------------------------------

@pytest.fixture(scope="module")
def law_scan():
    gammas = np.linspace(0.05, 0.3, 20)
    Ip = 0.5
    Up = Ip / (2.0 * gammas ** 2)
    return cutoff_law_scan([Ip] * len(gammas), Up)


def test_scan_complete_and_gammas_consistent(law_scan):
    assert len(law_scan.samples) == 20
    assert not law_scan.failures
    for s in law_scan.samples:
        assert s.gamma == pytest.approx(np.sqrt(s.Ip / (2 * s.Up)), abs=1e-14)


def test_scan_preserves_input_order(law_scan):
    gammas = [s.gamma for s in law_scan.samples]
    assert gammas == sorted(gammas)


def test_low_gamma_point(law_scan):
    cut = solve_energy_cutoff(0.5, 25.0)  # gamma = 0.1
    F = (cut.omega_hc - classical_cutoff_constant() * 25.0) / 0.5
    assert F.real == pytest.approx(1.323, abs=0.005)
    assert F.imag == pytest.approx(0.00734, rel=0.1)
    # the independent solve agrees with the fitted law
    assert abs(F - law_scan.fit(0.1)) < 1e-3


def test_parity_fit(law_scan):
    fit = law_scan.fit
    assert fit.constant == pytest.approx(1.3240, abs=2e-3)
    assert fit.linear == pytest.approx(0.0736, rel=0.1)
    # the parity model reproduces the samples to well below the spread
    g = np.array([s.gamma for s in law_scan.samples])
    F = np.array([s.F_value for s in law_scan.samples])
    assert np.max(np.abs(fit(g) - F)) < 2e-4


def test_im_part_scaling(law_scan):
    # Im Omega_hc = Ip * Im F(gamma) ~ Ip * linear * gamma, so the
    # combination Im(Omega_hc) sqrt(Up) / Ip^(3/2) is constant at small
    # gamma; compare Up and 2 Up at the same gamma
    c1 = solve_energy_cutoff(0.5, 12.5)
    c2 = solve_energy_cutoff(0.5, 25.0)
    r1 = c1.omega_hc.imag * np.sqrt(12.5) / 0.5 ** 1.5
    r2 = c2.omega_hc.imag * np.sqrt(25.0) / 0.5 ** 1.5
    assert r1 == pytest.approx(r2, rel=0.1)


def test_universality_across_up(law_scan):
    Fs = []
    gamma = 0.4
    for Up in (0.3, 0.6, 1.2):
        Ip = 2.0 * gamma ** 2 * Up
        cut = solve_energy_cutoff(Ip, Up)
        Fs.append((cut.omega_hc - classical_cutoff_constant() * Up) / Ip)
    assert max(abs(f - Fs[0]) for f in Fs) < 1e-3


def test_gamma_max_rejected():
    with pytest.raises(ValueError):
        cutoff_law_scan([2.0], [0.5])  # gamma ~ 1.41


# -- bicircular mixing-angle scan --------------------------------------------

def _factory(theta):
    return bicircular(DEFAULT_F0, theta, DEFAULT_OMEGA)


@pytest.fixture(scope="module")
def mix(default_atom):
    grid = np.deg2rad(np.arange(20.0, 70.0 + 0.5, 1.0))
    return mixing_scan(grid, _factory, default_atom)


def test_mixing_has_transition_events(mix):
    assert len(mix.events) >= 1
    for e in mix.events:
        assert mix.thetas[0] <= e.theta <= mix.thetas[-1]
        assert e.eta_before * e.eta_after < 0.0


def test_mixing_event_angles_frozen(mix):
    # events come in triples (one per 2pi/3 time translation of the
    # three-fold-symmetric field), at five distinct angles
    distinct = sorted({round(np.rad2deg(e.theta), 1) for e in mix.events})
    assert distinct == pytest.approx([46.4, 52.7, 59.4, 63.5, 63.7],
                                     abs=0.11)


def test_mixing_pair_coalesces_at_events(mix):
    for e in mix.events:
        assert abs(e.cutoff.eta) < 1e-8
        assert e.pair_gap < 1e-3 / DEFAULT_OMEGA


def test_mixing_eta_tracks_match_events(mix):
    # each tracked eta(theta) changes sign exactly as often as it has
    # recorded events
    for cid, track in mix.cutoff_tracks.items():
        eta = mix.eta(cid)
        assert len(eta) == len(mix.thetas)
        flips = int(np.sum(eta[:-1] * eta[1:] < 0.0))
        assert flips == sum(e.cutoff_id == cid for e in mix.events)


def test_mixing_stable_under_grid_refinement(default_atom, mix):
    coarse = mixing_scan(np.deg2rad(np.arange(20.0, 70.0 + 1.0, 2.0)),
                         _factory, default_atom)
    assert len(coarse.events) == len(mix.events)
    fine = sorted(e.theta for e in mix.events)
    for e in coarse.events:
        assert min(abs(e.theta - t) for t in fine) < np.deg2rad(0.01)


def test_mixing_rejects_bad_grid(default_atom):
    with pytest.raises(ValueError):
        mixing_scan([0.0, 0.1], _factory, default_atom)


def test_cutoff_track_lost_is_signalled(mix, default_atom):
    c0 = mix.cutoff_tracks[0][0]
    with pytest.raises(CutoffLostError):
        _continue_cutoff(_factory, default_atom, mix.thetas[0],
                         mix.thetas[-1], c0, jump_threshold=0.0)


# -- Riemann-surface mesh ----------------------------------------------------

RECT = (0.5, 3.5, -0.4, 0.4)


@pytest.fixture(scope="module")
def mesh(default_field, default_atom):
    return riemann_mesh(default_field, default_atom, RECT)


def test_mesh_structure(mesh):
    assert mesh.holes == 0
    assert mesh.vertices.shape[1] == 4
    assert len(mesh.colors) == len(mesh.vertices)
    assert mesh.triangles.min() >= 0
    assert mesh.triangles.max() < len(mesh.vertices)
    assert mesh.labels == [(0, 1), (2, -1), (2, 1), (3, 1), (5, -1), (5, 1)]


def test_mesh_colors_confined_to_rectangle(mesh):
    re0, re1, im0, im1 = RECT
    labeled = mesh.colors >= 0
    assert 0 < np.count_nonzero(labeled) < len(mesh.colors)
    om = mesh.vertices[labeled, :2]
    assert np.all((om[:, 0] >= re0) & (om[:, 0] <= re1))
    assert np.all((om[:, 1] >= im0) & (om[:, 1] <= im1))


def test_mesh_cover_single_sheet(mesh):
    report = cover_audit(mesh)
    assert set(report) == set(mesh.labels)
    for key, (mean, over, uncovered) in report.items():
        assert mean == pytest.approx(1.0, abs=0.05), key
        assert over <= 0.05, key
        assert uncovered <= 0.05, key


def test_mesh_branch_points_at_cutoff_times(mesh, default_orbits):
    # the boundary between two colored regions is the harmonic-cutoff
    # time: near w*t_hc the mesh carries (at least) two distinct colors
    _, cutoffs = default_orbits
    wt = mesh.vertices[:, 2] + 1j * mesh.vertices[:, 3]
    spacing = np.max(np.abs(np.diff(np.unique(mesh.vertices[:, 2]))))
    interior_pairs = 0
    for cut in cutoffs:
        if not (RECT[0] <= cut.omega_c.real <= RECT[1]):
            continue
        here = np.abs(wt - DEFAULT_OMEGA * cut.t_hc) < 3 * spacing
        nearby = set(mesh.colors[here]) - {-1}
        # every cutoff abuts at least one labeled region; cutoffs whose
        # neighbours are both central-period orbits (not copies from the
        # adjacent period) abut two
        assert nearby, cut
        if len(nearby) >= 2:
            interior_pairs += 1
    assert interior_pairs >= 4


def test_mesh_real_slice_matches_orbits(mesh, default_orbits):
    # on the real-Omega slice the colored vertices trace the classified
    # orbit curves t_s(Omega)
    orbits, _ = default_orbits
    wt = mesh.vertices[:, 2] + 1j * mesh.vertices[:, 3]
    spacing = np.max(np.abs(np.diff(np.unique(mesh.vertices[:, 2]))))
    for orb in orbits:
        n = mesh.labels.index(orb.label.key())
        mine = wt[mesh.colors == n]
        checked = 0
        for sol in orb.solutions[::8]:
            if not (RECT[0] + 0.2 <= sol.omega.real <= RECT[1] - 0.2):
                continue
            assert np.min(np.abs(mine - DEFAULT_OMEGA * sol.t)) \
                < 3 * spacing, orb.label.key()
            checked += 1
        assert checked >= 1, orb.label.key()


def test_mesh_round_trip(mesh, tmp_path):
    path = tmp_path / "mesh.txt"
    write_mesh(mesh, path)
    back = read_mesh(path)
    assert np.allclose(back.vertices, mesh.vertices)
    assert np.array_equal(back.colors, mesh.colors)
    assert np.array_equal(back.triangles, mesh.triangles)
    assert back.holes == mesh.holes
    assert [tuple(k) for k in back.labels] == list(mesh.labels)
    assert back.omega_rect == pytest.approx(mesh.omega_rect)
