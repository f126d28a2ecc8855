"""Acceptance suite: one test per top-level deliverable criterion.

Each test prints exactly one pass/fail line under pytest -v and checks
both the numerical criterion and its runtime budget.
"""

import time

import mpmath
import numpy as np
import pytest

from sfa_orbits import (airy_ai, airy_contour_check, bicircular,
                        classical_cutoff_constant, cover_audit,
                        cutoff_law_scan, find_all_cutoffs, hca_amplitude,
                        hca_core, mixing_scan, quantum_orbits, riemann_mesh,
                        solve_energy_cutoff, audit_orbit_set,
                        uniform_approx)
from sfa_orbits.spectra import find_fringes, fringe_contrast, spa_track

from conftest import DEFAULT_F0, DEFAULT_OMEGA

W = DEFAULT_OMEGA
mpmath.mp.dps = 40


class budget:
    """Assert on exit that the block ran within its runtime budget."""

    def __init__(self, seconds):
        self.seconds = seconds

    def __enter__(self):
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_type, *_):
        if exc_type is None:
            elapsed = time.perf_counter() - self.start
            assert elapsed < self.seconds, \
                f"runtime {elapsed:.1f} s exceeds budget {self.seconds} s"


def test_cutoff_law_real_part():
    classical_cutoff_constant()  # warm the cached constant
    with budget(1.0):
        cut = solve_energy_cutoff(0.5, 25.0)  # gamma = 0.1
        re_f = (cut.omega_hc.real - 3.1731 * 25.0) / 0.5
    assert re_f == pytest.approx(1.323, abs=0.005)


def test_cutoff_law_imaginary_part():
    with budget(30.0):
        gammas = np.linspace(0.05, 0.3, 20)
        scan = cutoff_law_scan([0.5] * 20, 0.5 / (2 * gammas ** 2))
    assert len(scan.samples) == 20 and not scan.failures
    assert scan.fit.linear == pytest.approx(0.0736, rel=0.10)


def test_universality():
    with budget(10.0):
        gamma = 0.4
        values = []
        for up in (0.3, 0.6, 1.2):
            ip = 2.0 * gamma ** 2 * up
            cut = solve_energy_cutoff(ip, up)
            values.append((cut.omega_hc - classical_cutoff_constant() * up)
                          / ip)
    assert max(abs(v - values[0]) for v in values) < 1e-3


def test_threshold_coalescence(default_field, default_atom):
    with budget(5.0):
        T = default_field.period
        up = default_field.ponderomotive()
        cutoffs = find_all_cutoffs(default_field, default_atom, (0.0, T))
        thresholds = [c for c in cutoffs
                      if c.is_threshold(default_atom, up)]
        assert thresholds
        for c in thresholds:
            assert abs(c.omega_hc - default_atom.Ip) < 1e-8
            assert abs(c.eta) < 1e-8


def test_monkey_saddle_orientation(default_field, default_atom):
    with budget(5.0):
        T = default_field.period
        cutoffs = find_all_cutoffs(default_field, default_atom, (0.0, T),
                                   excursions=(0.25, 1.0, 1.45))
        expected = {0.234: -87.97, 1.003: -0.011, 1.428: -0.155}
        found = {}
        for c in cutoffs:
            exc = (c.t_hc - c.tp_hc).real / T
            for ref_exc, ref_arg in expected.items():
                if abs(exc - ref_exc) < 0.05:
                    found[ref_exc] = np.degrees(np.angle(c.A_hc))
        assert sorted(found) == sorted(expected)
        for exc, arg in found.items():
            assert arg == pytest.approx(expected[exc], abs=0.5), exc


def test_classification_audit(default_field, default_atom):
    with budget(60.0):
        grid = np.arange(13.0, 61.0, 0.25) * W
        orbits, _ = quantum_orbits(default_field, default_atom, grid)
        audit = audit_orbit_set(orbits)
    assert len(audit.families) == 6
    assert audit.unique
    for fam, jump in audit.max_jump.items():
        assert jump < 0.15 / W, fam


def test_hca_exact_on_cubic_model():
    with budget(10.0):
        A = np.exp(1j * np.deg2rad(10.0))
        omega_hc = -1j  # eta = -1
        for om in np.linspace(-15.0, 8.0, 30):
            closed = hca_core(A, omega_hc, om)
            quad = airy_contour_check(A, omega_hc, om)
            assert abs(closed - quad) < 1e-6 * abs(quad), om


def test_cross_method_consistency(default_orbits, default_field,
                                  default_atom):
    with budget(60.0):
        orbits, cutoffs = default_orbits
        by_key = {o.label.key(): o for o in orbits}
        pair = by_key[(0, 1)], by_key[(2, 1)]
        up = default_field.ponderomotive()
        cut = min((c for c in cutoffs
                   if not c.is_threshold(default_atom, up)),
                  key=lambda c: c.t_hc.real)
        omega_c = cut.omega_hc.real

        oms, ua = uniform_approx(*pair, omega_window=(20 * W, 61 * W))
        mags = np.linalg.norm(ua, axis=1)
        j = int(np.argmin(np.abs(oms - omega_c)))

        # UA continuity across the cutoff
        kink = abs(mags[j + 1] - 2 * mags[j] + mags[j - 1]) / mags[j]
        assert kink < 0.01

        # UA vs SPA sum in the deep plateau
        sel = np.isin(np.round(np.real(pair[0].omegas), 12),
                      np.round(oms, 12))
        spasum = spa_track(pair[0])[sel] + spa_track(pair[1])[sel]
        i = int(np.argmin(np.abs(oms - (omega_c - 10 * W))))
        a, b = np.linalg.norm(ua[i]), np.linalg.norm(spasum[i])
        assert abs(a - b) < 0.02 * b

        # HCA vs UA at the cutoff
        hca = hca_amplitude(default_field, default_atom, cut,
                            np.array([omega_c]))
        a, b = np.linalg.norm(hca[0]), mags[j]
        assert abs(a - b) < 0.25 * b


def test_qpi_control(default_orbits, default_field, default_atom):
    with budget(10.0):
        _, cutoffs = default_orbits
        up = default_field.ponderomotive()
        cut = min((c for c in cutoffs
                   if not c.is_threshold(default_atom, up)),
                  key=lambda c: c.t_hc.real)
        grid = np.arange(16.0, 40.0, 0.1) * W
        ref = np.linalg.norm(hca_amplitude(default_field, default_atom,
                                           cut, grid, r=1.0), axis=1) ** 2
        extrema = find_fringes(ref)
        contrasts = []
        for r in (0.0, 0.5, 1.0, 2.0, 4.0):
            y = np.linalg.norm(hca_amplitude(default_field, default_atom,
                                             cut, grid, r=r), axis=1) ** 2
            contrasts.append(fringe_contrast(y, extrema=extrema))
        assert all(a > b for a, b in zip(contrasts, contrasts[1:]))

        fine = np.arange(16.0, 40.0, 0.02) * W
        y = np.linalg.norm(
            hca_amplitude(default_field, default_atom, cut, fine,
                          r=0.0, full_contrast=True), axis=1) ** 2
        mins, maxs = find_fringes(y)
        assert len(mins) >= 4
        for i in mins:
            near_max = max(y[j] for j in maxs if abs(j - i) < 200)
            assert y[i] < 1e-3 * near_max


def test_bicircular_transitions(default_atom):
    with budget(300.0):
        def factory(theta):
            return bicircular(DEFAULT_F0, theta, DEFAULT_OMEGA)

        thetas = np.deg2rad(np.arange(20.0, 70.0 + 0.5, 1.0))
        scan = mixing_scan(thetas, factory, default_atom)
        assert len(scan.events) >= 1
        event = min(scan.events, key=lambda e: e.theta)

        # coalescence audit at the transition
        assert abs(event.cutoff.eta) < 1e-8
        assert event.pair_gap < 1e-3 / DEFAULT_OMEGA

        # classification of the transitioning pair remains valid
        # (uniqueness audit) on both sides of the event and, at the
        # degenerate point itself, with either artificial orientation of
        # the separatrix
        from sfa_orbits import classify, solve_saddle
        from sfa_orbits.classify import audit_orbits

        step = np.deg2rad(0.3)
        for theta, flips_list in (
                (event.theta - step, [None]),
                (event.theta + step, [None]),
                (event.theta, [None, "flip"])):
            field = factory(theta)
            T = field.period
            cutoffs = [c for c in find_all_cutoffs(field, default_atom,
                                                   (0.0, T))
                       if 0.05 <= (c.t_hc - c.tp_hc).real / T <= 1.05]
            idx = min(range(len(cutoffs)),
                      key=lambda i: abs(cutoffs[i].t_hc
                                        - event.cutoff.t_hc))
            cut = cutoffs[idx]
            saddles = []
            for om in cut.omega_hc.real - np.arange(1.0, 6.0) \
                    * DEFAULT_OMEGA:
                dt = np.sqrt(2 * (om - cut.omega_hc) / cut.A_hc)
                for sgn in (1.0, -1.0):
                    saddles.append(solve_saddle(
                        field, default_atom, om,
                        (cut.t_hc + sgn * dt, cut.tp_hc)))
            for flips in flips_list:
                branch_flips = {idx} if flips else None
                labels = classify(saddles, cutoffs,
                                  branch_flips=branch_flips)
                audit = audit_orbits(saddles, labels)
                assert audit.unique, (np.degrees(theta), flips)


def test_airy_accuracy():
    with budget(5.0):
        rng = np.random.default_rng(20200613)
        for _ in range(200):
            z = rng.uniform(0, 30) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            res = airy_ai(z)
            ref = complex(mpmath.airyai(mpmath.mpc(z.real, z.imag)))
            assert abs(res.ai - ref) < 1e-10 * abs(ref), z
        h = 1e-5
        for _ in range(60):
            z = rng.uniform(0, 20) * np.exp(1j * rng.uniform(-np.pi, np.pi))
            aipp = (airy_ai(z + h).ai_prime
                    - airy_ai(z - h).ai_prime) / (2 * h)
            res = airy_ai(z)
            scale = max(abs(z * res.ai), 1.0)
            assert abs(aipp - z * res.ai) < 1e-8 * scale, z


def test_riemann_mesh_cover(default_field, default_atom):
    with budget(120.0):
        mesh = riemann_mesh(default_field, default_atom,
                            (0.5, 3.5, -0.4, 0.4))
        report = cover_audit(mesh)
        assert len(report) == 6
        for key, (mean, overlap, uncovered) in report.items():
            assert mean == pytest.approx(1.0, abs=0.05), key
            assert overlap <= 0.05, key
            assert uncovered <= 0.05, key
