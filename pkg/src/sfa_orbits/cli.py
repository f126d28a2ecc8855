"""Command-line entry point: orbits, spectrum, and scan workflows.

Declarative JSON configs drive the library and produce CSV/mesh
artifacts plus a run manifest.  All numeric outputs are deterministic
for a given config; wall-clock information is segregated into a
separate timing file so reruns are byte-identical.

Exit codes: 0 success, 2 config error, 3 solver failure, 4 partial scan
failure.
"""

import argparse
import hashlib
import json
import os
import sys
import time

import numpy as np

from . import __version__, units
from .action import AtomParams
from .orbits import quantum_orbits, audit_orbit_set
from .saddles import find_all_cutoffs
from .scans import (classical_cutoff_constant, cutoff_law_scan, cover_audit,
                    mixing_scan, riemann_mesh, write_mesh)
from .spectra import (Prefactor, PREFACTOR_MODELS, hca_amplitude,
                      pair_orbits, spa_spectrum, stokes_drops,
                      uniform_approx)
from .waveform import field_from_config


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration."""


_ENERGY_UNITS = ("a.u.", "au", "eV", "ev", "harmonic", "order")


def parse_energy(value, omega=None):
    """Energy in a.u. from a '<number> <unit>' string.

    Units: 'a.u.'/'au', 'eV'/'ev', or 'harmonic'/'order' (multiples of
    the field frequency, which must then be known).
    """
    if not isinstance(value, str):
        raise ConfigError(
            f"energies need an explicit unit suffix, got {value!r}")
    parts = value.split()
    if len(parts) != 2 or parts[1] not in _ENERGY_UNITS:
        raise ConfigError(
            f"cannot parse energy {value!r}; expected '<number> <unit>' "
            f"with unit one of {_ENERGY_UNITS}")
    try:
        x = float(parts[0])
    except ValueError:
        raise ConfigError(f"bad number in energy {value!r}") from None
    unit = parts[1].lower()
    if unit in ("a.u.", "au"):
        return x
    if unit == "ev":
        return x / units.HARTREE_EV
    if omega is None:
        raise ConfigError(
            f"harmonic-order energy {value!r} needs a field frequency")
    return x * omega


def _check_keys(section, spec, known):
    unknown = set(spec) - set(known)
    if unknown:
        raise ConfigError(f"unknown {section} keys: {sorted(unknown)}")


class RunConfig:
    """Validated run configuration shared by all commands."""

    KNOWN = ("field", "atom", "omega_grid", "methods", "prefactor", "qpi",
             "tolerances", "scan")

    def __init__(self, raw):
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        _check_keys("config", raw, self.KNOWN)
        self.raw = raw
        if "field" not in raw:
            raise ConfigError("config needs a field section")
        try:
            self.field = field_from_config(raw["field"])
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

        atom = raw.get("atom")
        if not isinstance(atom, dict):
            raise ConfigError("config needs an atom section")
        _check_keys("atom", atom, ("Ip",))
        ip = parse_energy(atom.get("Ip"), self.field.omega)
        if ip <= 0:
            raise ConfigError("Ip must be positive")
        self.atom = AtomParams(ip)

        grid = raw.get("omega_grid")
        self.omegas = None
        if grid is not None:
            _check_keys("omega_grid", grid, ("start", "stop", "step"))
            w = self.field.omega
            start = parse_energy(grid.get("start"), w)
            stop = parse_energy(grid.get("stop"), w)
            step = parse_energy(grid.get("step"), w)
            if step <= 0 or stop <= start:
                raise ConfigError("omega grid needs stop > start, step > 0")
            self.omegas = np.arange(start, stop + 0.5 * step, step)
            if self.omegas.size == 0:
                raise ConfigError("empty omega grid")

        methods = raw.get("methods", ["spa"])
        if not isinstance(methods, list) or not methods \
                or any(m not in ("spa", "ua", "hca") for m in methods):
            raise ConfigError("methods must be a non-empty list drawn "
                              "from ['spa', 'ua', 'hca']")
        self.methods = methods

        model = raw.get("prefactor", "unity")
        if model not in PREFACTOR_MODELS:
            raise ConfigError(f"unknown prefactor model {model!r}")
        self.prefactor = Prefactor(model, field=self.field, atom=self.atom)

        qpi = raw.get("qpi", {})
        _check_keys("qpi", qpi, ("r", "full_contrast"))
        self.qpi_r = float(qpi.get("r", 1.0))
        self.qpi_full_contrast = bool(qpi.get("full_contrast", False))

        tols = raw.get("tolerances", {})
        _check_keys("tolerances", tols, ("saddle",))
        self.saddle_tol = float(tols.get("saddle", 1e-10))

        self.scan = raw.get("scan")

    def scan_spec(self):
        scan = self.scan
        if not isinstance(scan, dict) or "kind" not in scan:
            raise ConfigError("scan config needs a scan section with kind")
        if scan["kind"] not in ("cutoff-law", "mixing", "mesh"):
            raise ConfigError(f"unknown scan kind {scan['kind']!r}")
        return scan


# -- deterministic artifact writers ------------------------------------------

def _fmt(x):
    return f"{x:.12g}"


def _write_csv(path, metadata, header, rows):
    with open(path, "w") as fh:
        for line in metadata:
            fh.write(f"# {line}\n")
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(x) if isinstance(x, float) else str(x)
                             for x in row) + "\n")


def _config_hash(raw):
    blob = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _write_run_files(out, raw, outputs, failures=()):
    with open(os.path.join(out, "config.json"), "w") as fh:
        json.dump(raw, fh, indent=2, sort_keys=True)
        fh.write("\n")
    manifest = {"version": f"v{__version__}",
                "config_sha256": _config_hash(raw),
                "outputs": sorted(outputs)}
    if failures:
        manifest["failures"] = list(failures)
    with open(os.path.join(out, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_timing(out, seconds, threads):
    with open(os.path.join(out, "timing.json"), "w") as fh:
        json.dump({"wall_time_s": seconds, "threads": threads}, fh, indent=2)
        fh.write("\n")


# -- commands ----------------------------------------------------------------

def cmd_orbits(config, out):
    """Labeled-saddle CSV, cutoff CSV, and audit report."""
    if config.omegas is None:
        raise ConfigError("orbits command needs an omega_grid section")
    w = config.field.omega
    orbits, cutoffs = quantum_orbits(config.field, config.atom,
                                     config.omegas, tol=config.saddle_tol)
    meta = [f"config sha256 {_config_hash(config.raw)}"]

    rows = []
    for orb in orbits:
        strip, side = orb.label.key()
        for s in orb.solutions:
            om = float(np.real(s.omega))
            rows.append((om, om / w, strip, side,
                         s.t.real, s.t.imag, s.tp.real, s.tp.imag,
                         s.action.real, s.action.imag, s.residual))
    rows.sort(key=lambda r: (r[0], r[2], r[3]))
    _write_csv(os.path.join(out, "saddles.csv"), meta,
               ("omega_au", "harmonic_order", "label_strip", "label_side",
                "re_t", "im_t", "re_tp", "im_tp", "re_S", "im_S",
                "residual"), rows)

    up = config.field.ponderomotive()
    crows = []
    for c in sorted(cutoffs, key=lambda c: c.t_hc.real):
        kind = "threshold" if c.is_threshold(config.atom, up) else "energy"
        crows.append((c.t_hc.real, c.t_hc.imag, c.tp_hc.real, c.tp_hc.imag,
                      c.omega_hc.real, c.omega_hc.imag,
                      c.A_hc.real, c.A_hc.imag,
                      float(np.degrees(np.angle(c.A_hc))), kind))
    _write_csv(os.path.join(out, "cutoffs.csv"), meta,
               ("re_t_hc", "im_t_hc", "re_tp_hc", "im_tp_hc",
                "re_omega_hc", "im_omega_hc", "re_A_hc", "im_A_hc",
                "arg_A_hc_deg", "kind"), crows)

    audit = audit_orbit_set(orbits)
    jump_limit = 0.15 / w
    report = {
        "families": [list(k) for k in sorted(audit.families)],
        "unique": audit.unique,
        "max_jump": {str(list(k)): audit.max_jump[k]
                     for k in sorted(audit.max_jump)},
        "jump_limit": jump_limit,
        "continuous": all(j < jump_limit for j in audit.max_jump.values()),
        "crossings": {str(list(k) if isinstance(k, tuple) else k): {
            kind: list(map(float, vals))
            for kind, vals in audit.crossings[k].items()}
            for k in sorted(audit.crossings)},
    }
    report["passed"] = report["unique"] and report["continuous"]
    with open(os.path.join(out, "audit.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    outputs = ["saddles.csv", "cutoffs.csv", "audit.json"]
    if not report["passed"]:
        raise RuntimeError("orbit audit failed; see audit.json")
    return outputs, []


def _spectrum_rows(config):
    w = config.field.omega
    omegas = config.omegas
    rows = []

    def snap(om):
        # solver-returned energies match the config grid to rounding;
        # snapping keeps the CSV columns of all methods exactly aligned
        i = int(np.argmin(np.abs(omegas - float(np.real(om)))))
        return float(omegas[i])

    need_orbits = "spa" in config.methods or "ua" in config.methods
    if need_orbits:
        orbits, cutoffs = quantum_orbits(config.field, config.atom, omegas,
                                         tol=config.saddle_tol)
        up = config.field.ponderomotive()
        drops = stokes_drops(orbits, cutoffs, config.atom, up, omega=w)
        pairs = pair_orbits(orbits, cutoffs, config.atom, up)
    else:
        # cutoffs only: the HCA needs no per-Omega saddle solves
        T = config.field.period
        cutoffs = [c for c in find_all_cutoffs(config.field, config.atom,
                                               (0.0, T))
                   if 0.05 <= (c.t_hc - c.tp_hc).real / T <= 1.05]

    if "spa" in config.methods:
        for line in spa_spectrum(orbits, config.prefactor, drops):
            inc = sorted(k for k, keep in line.included.items() if keep)
            om = snap(line.omega)
            rows.append((om, om / w, "spa",
                         line.spa[0].real, line.spa[0].imag,
                         line.spa[1].real, line.spa[1].imag,
                         float(np.sum(np.abs(line.spa) ** 2)),
                         ";".join(f"{a}{b:+d}" for a, b in inc)))

    if "ua" in config.methods:
        total = {}
        for _, pa, pb in pairs:
            oms, amps = uniform_approx(pa, pb, config.prefactor)
            for om, amp in zip(oms, amps):
                total[snap(om)] = total.get(snap(om), 0.0) + amp
        for om in sorted(total):
            amp = total[om]
            rows.append((om, om / w, "ua", amp[0].real, amp[0].imag,
                         amp[1].real, amp[1].imag,
                         float(np.sum(np.abs(amp) ** 2)), ""))

    if "hca" in config.methods:
        up = config.field.ponderomotive()
        energy = [c for c in cutoffs
                  if not c.is_threshold(config.atom, up)]
        total = np.zeros((len(omegas), 2), dtype=complex)
        for cut in energy:
            total += hca_amplitude(config.field, config.atom, cut, omegas,
                                   prefactor=config.prefactor, r=config.qpi_r,
                                   full_contrast=config.qpi_full_contrast)
        for om, amp in zip(omegas, total):
            rows.append((float(om), float(om) / w, "hca",
                         amp[0].real, amp[0].imag, amp[1].real, amp[1].imag,
                         float(np.sum(np.abs(amp) ** 2)), ""))
    return rows


def cmd_spectrum(config, out):
    """Spectrum CSV with one row per (Omega, method)."""
    if config.omegas is None:
        raise ConfigError("spectrum command needs an omega_grid section")
    rows = _spectrum_rows(config)
    meta = [f"config sha256 {_config_hash(config.raw)}",
            f"methods {' '.join(config.methods)}"]
    _write_csv(os.path.join(out, "spectrum.csv"), meta,
               ("omega_au", "harmonic_order", "method", "re_Dx", "im_Dx",
                "re_Dy", "im_Dy", "yield", "included_orbits"), rows)
    return ["spectrum.csv"], []


def cmd_scan(config, out):
    """Cutoff-law, mixing, or mesh scan artifacts plus fit/audit files."""
    scan = config.scan_spec()
    meta = [f"config sha256 {_config_hash(config.raw)}"]
    kind = scan["kind"]
    outputs, failures = [], []

    if kind == "cutoff-law":
        _check_keys("scan", scan, ("kind", "Ip_au", "Up_au"))
        ips = scan.get("Ip_au")
        ups = scan.get("Up_au")
        if not ips or not ups or len(ips) != len(ups):
            raise ConfigError("cutoff-law scan needs equal-length "
                              "Ip_au and Up_au lists")
        result = cutoff_law_scan(ips, ups, omega=config.field.omega)
        rows = [(s.Ip, s.Up, s.gamma, s.omega_hc.real, s.omega_hc.imag,
                 s.F_value.real, s.F_value.imag) for s in result.samples]
        _write_csv(os.path.join(out, "scan.csv"),
                   meta + [f"c_cl {_fmt(classical_cutoff_constant())}"],
                   ("Ip", "Up", "gamma", "re_omega_hc", "im_omega_hc",
                    "re_F", "im_F"), rows)
        outputs.append("scan.csv")
        if result.fit is not None:
            fit = {"constant": result.fit.constant,
                   "quadratic": result.fit.quadratic,
                   "linear": result.fit.linear,
                   "cubic": result.fit.cubic,
                   "re_residual": result.fit.re_residual,
                   "im_residual": result.fit.im_residual}
            with open(os.path.join(out, "fit.json"), "w") as fh:
                json.dump(fit, fh, indent=2, sort_keys=True)
                fh.write("\n")
            outputs.append("fit.json")
        failures = [f"Ip={ip:g} Up={up:g}: {msg}"
                    for ip, up, msg in result.failures]

    elif kind == "mixing":
        _check_keys("scan", scan, ("kind", "theta_start_deg",
                                   "theta_stop_deg", "theta_step_deg"))
        try:
            lo = float(scan["theta_start_deg"])
            hi = float(scan["theta_stop_deg"])
            step = float(scan["theta_step_deg"])
        except (KeyError, TypeError, ValueError):
            raise ConfigError("mixing scan needs theta_start_deg, "
                              "theta_stop_deg, theta_step_deg") from None
        if step <= 0 or hi <= lo:
            raise ConfigError("mixing scan needs stop > start, step > 0")
        thetas = np.deg2rad(np.arange(lo, hi + 0.5 * step, step))
        # rebuild the configured field at each mixing angle
        f_spec = dict(config.raw["field"])

        def factory(theta):
            spec = dict(f_spec)
            spec["theta_deg"] = float(np.degrees(theta))
            return field_from_config(spec)

        if f_spec.get("type") != "bicircular":
            raise ConfigError("mixing scan needs a bicircular field")
        result = mixing_scan(thetas, factory, config.atom)
        rows = []
        for cid in sorted(result.cutoff_tracks):
            for th, cut in zip(result.thetas, result.cutoff_tracks[cid]):
                rows.append((float(np.degrees(th)), cid, cut.eta))
        rows.sort(key=lambda r: (r[0], r[1]))
        _write_csv(os.path.join(out, "transitions.csv"), meta,
                   ("theta_deg", "cutoff_id", "eta"), rows)
        erows = [(float(np.degrees(e.theta)), e.cutoff_id, e.eta_before,
                  e.eta_after, e.pair_gap) for e in result.events]
        _write_csv(os.path.join(out, "events.csv"), meta,
                   ("theta_deg", "cutoff_id", "eta_before", "eta_after",
                    "pair_gap"), erows)
        outputs += ["transitions.csv", "events.csv"]

    else:  # mesh
        _check_keys("scan", scan, ("kind", "omega_rect", "resolution"))
        rect_spec = scan.get("omega_rect")
        if not isinstance(rect_spec, list) or len(rect_spec) != 4:
            raise ConfigError("mesh scan needs omega_rect of four energies")
        rect = tuple(parse_energy(v, config.field.omega) for v in rect_spec)
        res = scan.get("resolution", [96, 64])
        if (not isinstance(res, list) or len(res) != 2
                or any(int(n) < 8 for n in res)):
            raise ConfigError("mesh resolution must be two integers >= 8")
        mesh = riemann_mesh(config.field, config.atom, rect,
                            resolution=(int(res[0]), int(res[1])))
        write_mesh(mesh, os.path.join(out, "mesh.txt"))
        audit = cover_audit(mesh)
        with open(os.path.join(out, "mesh_audit.json"), "w") as fh:
            json.dump({str(list(k)): {"mean_cover": v[0],
                                      "overlap_fraction": v[1],
                                      "uncovered_fraction": v[2]}
                       for k, v in audit.items()}, fh, indent=2,
                      sort_keys=True)
            fh.write("\n")
        outputs += ["mesh.txt", "mesh_audit.json"]

    return outputs, failures


COMMANDS = {"orbits": cmd_orbits, "spectrum": cmd_spectrum,
            "scan": cmd_scan}


def _error(out, code, kind, message):
    payload = {"error": kind, "message": message, "exit_code": code}
    print(json.dumps(payload), file=sys.stderr)
    if out and os.path.isdir(out):
        with open(os.path.join(out, "error.json"), "w") as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    return code


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="sfa-orbits",
        description="Quantum-orbit workflows for high-harmonic generation.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", required=True)
    parser.add_argument("--out", required=True)
    parser.add_argument("--threads", type=int,
                        default=int(os.environ.get("SFA_ORBITS_THREADS", 1)))
    parser.add_argument("--tol", type=float, default=None,
                        help="override the saddle solver tolerance")
    args = parser.parse_args(argv)

    try:
        with open(args.config) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        return _error(args.out, 2, "config", f"cannot read config: {exc}")

    try:
        config = RunConfig(raw)
        if args.tol is not None:
            config.saddle_tol = args.tol
    except ConfigError as exc:
        return _error(args.out, 2, "config", str(exc))

    os.makedirs(args.out, exist_ok=True)
    start = time.perf_counter()
    try:
        outputs, failures = COMMANDS[args.command](config, args.out)
    except ConfigError as exc:
        return _error(args.out, 2, "config", str(exc))
    except Exception as exc:
        return _error(args.out, 3, "solver", str(exc))
    _write_run_files(args.out, raw, outputs, failures)
    _write_timing(args.out, time.perf_counter() - start, args.threads)
    if failures:
        return _error(args.out, 4, "partial",
                      f"{len(failures)} scan samples failed; see manifest")
    return 0


if __name__ == "__main__":
    sys.exit(main())
