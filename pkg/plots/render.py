#!/usr/bin/env python3
"""Render publication-style figures from the CLI's CSV/mesh artifacts.

Usage::

    python3 plots/render.py --recipe <recipe.json> --out <image>

The recipe is a JSON object::

    {"type": "orbit-map" | "spectrum" | "scaling" | "mixing" | "mesh",
     "inputs": {<input name>: <file path>, ...},
     "style": {...}}          # optional

Each panel type documents its required inputs and CSV columns in
``SCHEMAS`` below; inputs are validated before anything is drawn and a
schema mismatch is reported with the full column diff.  The renderer
performs no numerical work beyond axis unit conversion: plotted values
are the file values.
"""

import argparse
import json
import os
import sys

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


class RecipeError(ValueError):
    """Invalid recipe or input file."""


# -- input readers -------------------------------------------------------

def read_table(path):
    """CSV with '#'-prefixed metadata and a single header line.

    Returns (columns, rows) where columns is the header tuple and rows
    is a list of per-line value tuples (strings).
    """
    header = None
    rows = []
    try:
        fh = open(path)
    except OSError as exc:
        raise RecipeError(f"cannot read {path}: {exc}") from None
    with fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = tuple(line.split(","))
            if header is None:
                header = parts
            else:
                rows.append(parts)
    if header is None:
        raise RecipeError(f"{path} is empty: no header line found")
    return header, rows


class Table:
    """Column-addressable CSV contents with float conversion."""

    def __init__(self, name, path):
        self.name = name
        self.path = path
        self.header, self.rows = read_table(path)
        self._index = {c: i for i, c in enumerate(self.header)}

    def column(self, name):
        i = self._index[name]
        return np.array([float(r[i]) for r in self.rows])

    def strings(self, name):
        i = self._index[name]
        return [r[i] for r in self.rows]


class MeshData:
    """Triangle mesh in the documented text format."""

    def __init__(self, name, path):
        self.name = name
        self.path = path
        vertices, colors, triangles, labels = [], [], [], {}
        first = None
        try:
            fh = open(path)
        except OSError as exc:
            raise RecipeError(f"cannot read {path}: {exc}") from None
        with fh:
            for line in fh:
                parts = line.split()
                if not parts:
                    continue
                if first is None:
                    first = line.strip()
                    if first != "# riemann-surface mesh":
                        raise RecipeError(
                            f"{path} is not a mesh file: first line is "
                            f"{first!r}, expected '# riemann-surface mesh'")
                    continue
                if parts[0] == "#":
                    if len(parts) >= 7 and parts[1] == "color":
                        labels[int(parts[2])] = (int(parts[4]),
                                                 int(parts[6]))
                    continue
                if parts[0] == "v":
                    vertices.append([float(x) for x in parts[1:5]])
                    colors.append(int(parts[5]))
                elif parts[0] == "t":
                    triangles.append([int(x) for x in parts[1:4]])
        if first is None:
            raise RecipeError(f"{path} is empty: no mesh header found")
        if not vertices or not triangles:
            raise RecipeError(
                f"input '{name}' ({path}) contains no mesh data")
        self.vertices = np.array(vertices)
        self.colors = np.array(colors)
        self.triangles = np.array(triangles)
        self.labels = labels


# -- recipe schemas ------------------------------------------------------

SADDLE_COLUMNS = ("omega_au", "harmonic_order", "label_strip", "label_side",
                  "re_t", "im_t", "re_tp", "im_tp", "re_S", "im_S",
                  "residual")
CUTOFF_COLUMNS = ("re_t_hc", "im_t_hc", "re_tp_hc", "im_tp_hc",
                  "re_omega_hc", "im_omega_hc", "re_A_hc", "im_A_hc",
                  "arg_A_hc_deg", "kind")
SPECTRUM_COLUMNS = ("omega_au", "harmonic_order", "method", "re_Dx",
                    "im_Dx", "re_Dy", "im_Dy", "yield", "included_orbits")
SCAN_COLUMNS = ("Ip", "Up", "gamma", "re_omega_hc", "im_omega_hc",
                "re_F", "im_F")
TRANSITION_COLUMNS = ("theta_deg", "cutoff_id", "eta")
EVENT_COLUMNS = ("theta_deg", "cutoff_id", "eta_before", "eta_after",
                 "pair_gap")

# per panel type: {input name: (columns or "mesh", required?)}
SCHEMAS = {
    "orbit-map": {"saddles": (SADDLE_COLUMNS, True),
                  "cutoffs": (CUTOFF_COLUMNS, False)},
    "spectrum": {"spectrum": (SPECTRUM_COLUMNS, True),
                 "cutoffs": (CUTOFF_COLUMNS, False)},
    "scaling": {"scan": (SCAN_COLUMNS, True)},
    "mixing": {"transitions": (TRANSITION_COLUMNS, True),
               "events": (EVENT_COLUMNS, False)},
    "mesh": {"mesh": ("mesh", True)},
}


def load_inputs(kind, paths):
    """Validate and load the recipe inputs for one panel type."""
    schema = SCHEMAS[kind]
    unknown = set(paths) - set(schema)
    if unknown:
        raise RecipeError(
            f"unknown inputs for {kind!r}: {sorted(unknown)}; "
            f"allowed: {sorted(schema)}")
    loaded = {}
    for name, (columns, required) in schema.items():
        if name not in paths:
            if required:
                raise RecipeError(f"{kind!r} recipe needs input {name!r}")
            continue
        if columns == "mesh":
            loaded[name] = MeshData(name, paths[name])
            continue
        table = Table(name, paths[name])
        if tuple(table.header) != tuple(columns):
            missing = [c for c in columns if c not in table.header]
            extra = [c for c in table.header if c not in columns]
            raise RecipeError(
                f"input '{name}' ({paths[name]}) does not match the "
                f"documented schema: missing columns {missing}, "
                f"unexpected columns {extra}")
        if not table.rows:
            raise RecipeError(
                f"input '{name}' ({paths[name]}) contains no data rows")
        loaded[name] = table
    return loaded


# -- panel renderers -----------------------------------------------------

_CYCLE = plt.rcParams["axes.prop_cycle"].by_key()["color"]


def _photon_energy(table, energy_col, order_col):
    """Field photon energy in a.u. from any row (unit conversion only)."""
    return table.column(energy_col)[0] / table.column(order_col)[0]


def render_orbit_map(inputs, style):
    """Recollision time vs harmonic order, one color per orbit label."""
    saddles = inputs["saddles"]
    w = _photon_energy(saddles, "omega_au", "harmonic_order")
    cycle = 2.0 * np.pi / w
    order = saddles.column("harmonic_order")
    re_t = saddles.column("re_t") / cycle
    strips = saddles.column("label_strip").astype(int)
    sides = saddles.column("label_side").astype(int)

    fig, ax = plt.subplots(figsize=style.get("figsize", (7.0, 4.5)))
    labels = sorted(set(zip(strips.tolist(), sides.tolist())))
    for i, (strip, side) in enumerate(labels):
        sel = (strips == strip) & (sides == side)
        ax.plot(re_t[sel], order[sel], ".", ms=3,
                color=_CYCLE[i % len(_CYCLE)],
                label=f"({strip}, {side:+d})")
    if "cutoffs" in inputs:
        cut = inputs["cutoffs"]
        for t_hc, kind in zip(cut.column("re_t_hc") / cycle,
                              cut.strings("kind")):
            ax.axvline(t_hc, color="k", ls="--" if kind == "energy"
                       else ":", lw=0.8)
    ax.set_xlabel("Re $t$ (optical cycles)")
    ax.set_ylabel("harmonic order")
    ax.set_title(style.get("title", "Quantum-orbit map"))
    ax.legend(fontsize=8, ncol=2)
    return fig


def render_spectrum(inputs, style):
    """Log harmonic yield vs order for every method in the file."""
    spec = inputs["spectrum"]
    order = spec.column("harmonic_order")
    y = spec.column("yield")
    methods = spec.strings("method")

    fig, ax = plt.subplots(figsize=style.get("figsize", (7.0, 4.5)))
    for i, m in enumerate(sorted(set(methods))):
        sel = np.array([mm == m for mm in methods])
        ax.semilogy(order[sel], y[sel], color=_CYCLE[i % len(_CYCLE)],
                    lw=1.2, label=m.upper())
    if "cutoffs" in inputs:
        cut = inputs["cutoffs"]
        w = _photon_energy(spec, "omega_au", "harmonic_order")
        for om, kind in zip(cut.column("re_omega_hc") / w,
                            cut.strings("kind")):
            if kind == "energy" and order.min() <= om <= order.max():
                ax.axvline(om, color="k", ls="--", lw=0.8)
    ax.set_xlabel("harmonic order")
    ax.set_ylabel("harmonic yield (arb. u.)")
    ax.set_title(style.get("title", "Harmonic spectrum"))
    ax.legend(fontsize=9)
    return fig


def render_scaling(inputs, style):
    """Cutoff-law coefficient F(gamma), real and imaginary parts."""
    scan = inputs["scan"]
    gamma = scan.column("gamma")
    idx = np.argsort(gamma)

    fig, (ax_re, ax_im) = plt.subplots(
        2, 1, sharex=True, figsize=style.get("figsize", (6.0, 5.5)))
    ax_re.plot(gamma[idx], scan.column("re_F")[idx], "o-",
               color=_CYCLE[0], ms=4)
    ax_re.set_ylabel(r"Re $F(\gamma)$")
    ax_im.plot(gamma[idx], scan.column("im_F")[idx], "o-",
               color=_CYCLE[1], ms=4)
    ax_im.set_ylabel(r"Im $F(\gamma)$")
    ax_im.set_xlabel(r"Keldysh parameter $\gamma$")
    ax_re.set_title(style.get("title", "Harmonic-cutoff law"))
    return fig


def render_mixing(inputs, style):
    """Separatrix parameter eta vs mixing angle with transition events."""
    tr = inputs["transitions"]
    theta = tr.column("theta_deg")
    eta = tr.column("eta")
    cids = tr.column("cutoff_id").astype(int)

    fig, ax = plt.subplots(figsize=style.get("figsize", (7.0, 4.5)))
    tracked = sorted(set(cids.tolist()))
    for i, cid in enumerate(tracked):
        sel = cids == cid
        ax.plot(theta[sel], eta[sel], "-", lw=1.0,
                color=_CYCLE[i % len(_CYCLE)])
    ax.axhline(0.0, color="k", lw=0.8)
    if "events" in inputs:
        ev = inputs["events"]
        ax.plot(ev.column("theta_deg"), np.zeros(len(ev.rows)), "r*",
                ms=12, label="transition")
        ax.legend(fontsize=9)
    ylim = style.get("ylim")
    if ylim:
        ax.set_ylim(*ylim)
    ax.set_xlabel(r"mixing angle $\theta$ (degrees)")
    ax.set_ylabel(r"separatrix parameter $\eta$")
    ax.set_title(style.get("title", "Bicircular mixing scan"))
    return fig


def render_mesh(inputs, style):
    """3D view of the quantum-orbit Riemann surface."""
    mesh = inputs["mesh"]
    v = mesh.vertices
    fig = plt.figure(figsize=style.get("figsize", (7.0, 5.5)))
    ax = fig.add_subplot(projection="3d")
    for i, n in enumerate(sorted(mesh.labels)):
        tri_cols = mesh.colors[mesh.triangles]
        mine = mesh.triangles[np.all(tri_cols == n, axis=1)]
        if not len(mine):
            continue
        strip, side = mesh.labels[n]
        ax.plot_trisurf(v[:, 0], v[:, 1], v[:, 2], triangles=mine,
                        color=_CYCLE[i % len(_CYCLE)], alpha=0.8,
                        linewidth=0.0, label=f"({strip}, {side:+d})")
    # unlabeled flood-fill vertices reach far outside the audited
    # rectangle; frame the view on the labeled regions
    labeled = v[mesh.colors >= 0]
    if len(labeled):
        for setter, column in ((ax.set_xlim, 0), (ax.set_ylim, 1),
                               (ax.set_zlim, 2)):
            lo, hi = labeled[:, column].min(), labeled[:, column].max()
            pad = 0.05 * (hi - lo) or 0.1
            setter(lo - pad, hi + pad)
    ax.set_xlabel(r"Re $\Omega$ (a.u.)")
    ax.set_ylabel(r"Im $\Omega$ (a.u.)")
    ax.set_zlabel(r"Re $\omega t$")
    ax.set_title(style.get("title", "Quantum-orbit Riemann surface"))
    ax.view_init(elev=style.get("elev", 25), azim=style.get("azim", -60))
    return fig


RENDERERS = {
    "orbit-map": render_orbit_map,
    "spectrum": render_spectrum,
    "scaling": render_scaling,
    "mixing": render_mixing,
    "mesh": render_mesh,
}


# -- driver --------------------------------------------------------------

def load_recipe(path):
    try:
        with open(path) as fh:
            recipe = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise RecipeError(f"cannot read recipe {path}: {exc}") from None
    if not isinstance(recipe, dict):
        raise RecipeError("recipe must be a JSON object")
    unknown = set(recipe) - {"type", "inputs", "style"}
    if unknown:
        raise RecipeError(f"unknown recipe keys: {sorted(unknown)}")
    kind = recipe.get("type")
    if kind not in RENDERERS:
        raise RecipeError(
            f"unknown panel type {kind!r}; expected one of "
            f"{sorted(RENDERERS)}")
    paths = recipe.get("inputs")
    if not isinstance(paths, dict) or not paths:
        raise RecipeError("recipe needs an inputs object of file paths")
    style = recipe.get("style", {})
    if not isinstance(style, dict):
        raise RecipeError("recipe style must be an object")
    return kind, paths, style


def render(recipe_path, out_path):
    """Render the recipe to an image file; raises RecipeError on bad input."""
    kind, paths, style = load_recipe(recipe_path)
    # relative input paths resolve against the recipe's own directory
    base = os.path.dirname(os.path.abspath(recipe_path))
    paths = {name: p if os.path.isabs(p) else os.path.join(base, p)
             for name, p in paths.items()}
    inputs = load_inputs(kind, paths)
    fig = RENDERERS[kind](inputs, style)
    fig.savefig(out_path, dpi=style.get("dpi", 110),
                bbox_inches="tight")
    plt.close(fig)


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Render figures from sfa-orbits CSV/mesh artifacts.")
    parser.add_argument("--recipe", required=True)
    parser.add_argument("--out", required=True)
    args = parser.parse_args(argv)
    try:
        render(args.recipe, args.out)
    except RecipeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
