"""Figure rendering: recipe validation and perceptual-hash regression."""

import json
import subprocess
import sys
from pathlib import Path

import pytest

PLOTS = Path(__file__).resolve().parent.parent
if str(PLOTS) not in sys.path:
    sys.path.insert(0, str(PLOTS))

import render  # noqa: E402
from phash import hamming, perceptual_hash  # noqa: E402
from render import RecipeError  # noqa: E402

RECIPES = PLOTS / "recipes"
REFERENCES = json.loads(
    (Path(__file__).parent / "reference_hashes.json").read_text())

# recipe file stem per panel type
PANELS = {"orbit-map": "orbit_map", "spectrum": "spectrum",
          "scaling": "scaling", "mixing": "mixing", "mesh": "mesh"}

# loose: catches missing curves / wrong layout, tolerates font stacks
HASH_TOLERANCE = 48


# -- rendering and visual regression ------------------------------------

@pytest.mark.parametrize("stem", sorted(PANELS.values()))
def test_render_matches_reference(stem, tmp_path):
    out = tmp_path / f"{stem}.png"
    render.render(RECIPES / f"{stem}.json", out)
    assert out.exists() and out.stat().st_size > 0
    distance = hamming(perceptual_hash(out), REFERENCES[stem])
    assert distance <= HASH_TOLERANCE, \
        f"{stem}: hash distance {distance} > {HASH_TOLERANCE}"


def test_cli_renders_and_exits_zero(tmp_path):
    out = tmp_path / "fig.png"
    proc = subprocess.run(
        [sys.executable, str(PLOTS / "render.py"),
         "--recipe", str(RECIPES / "scaling.json"), "--out", str(out)],
        capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert out.exists() and out.stat().st_size > 0


# -- input validation ----------------------------------------------------

def _recipe(tmp_path, body):
    path = tmp_path / "recipe.json"
    path.write_text(json.dumps(body))
    return path


def test_empty_csv_is_an_explicit_error(tmp_path):
    csv = tmp_path / "scan.csv"
    csv.write_text("# metadata\n"
                   "Ip,Up,gamma,re_omega_hc,im_omega_hc,re_F,im_F\n")
    recipe = _recipe(tmp_path, {"type": "scaling",
                                "inputs": {"scan": str(csv)}})
    with pytest.raises(RecipeError, match="no data rows"):
        render.render(recipe, tmp_path / "fig.png")
    assert not (tmp_path / "fig.png").exists()


def test_headerless_csv_is_an_explicit_error(tmp_path):
    csv = tmp_path / "scan.csv"
    csv.write_text("")
    recipe = _recipe(tmp_path, {"type": "scaling",
                                "inputs": {"scan": str(csv)}})
    with pytest.raises(RecipeError, match="empty"):
        render.render(recipe, tmp_path / "fig.png")


def test_schema_mismatch_reports_column_diff(tmp_path):
    csv = tmp_path / "scan.csv"
    csv.write_text("Ip,Up,gamma,re_F,bogus\n0.5,25,0.1,1.3,0\n")
    recipe = _recipe(tmp_path, {"type": "scaling",
                                "inputs": {"scan": str(csv)}})
    with pytest.raises(RecipeError) as err:
        render.render(recipe, tmp_path / "fig.png")
    message = str(err.value)
    assert "re_omega_hc" in message and "im_F" in message  # missing
    assert "bogus" in message                              # unexpected


def test_unknown_panel_type(tmp_path):
    recipe = _recipe(tmp_path, {"type": "pie-chart", "inputs": {"x": "y"}})
    with pytest.raises(RecipeError, match="unknown panel type"):
        render.render(recipe, tmp_path / "fig.png")


def test_unknown_input_name(tmp_path):
    recipe = _recipe(tmp_path, {"type": "scaling",
                                "inputs": {"scan": "a.csv", "extra": "b"}})
    with pytest.raises(RecipeError, match="unknown inputs"):
        render.render(recipe, tmp_path / "fig.png")


def test_missing_required_input(tmp_path):
    recipe = _recipe(tmp_path, {"type": "spectrum",
                                "inputs": {"cutoffs": "c.csv"}})
    with pytest.raises(RecipeError, match="needs input 'spectrum'"):
        render.render(recipe, tmp_path / "fig.png")


def test_bad_recipe_json(tmp_path):
    path = tmp_path / "recipe.json"
    path.write_text("{not json")
    with pytest.raises(RecipeError, match="cannot read recipe"):
        render.render(path, tmp_path / "fig.png")


def test_non_mesh_file_rejected(tmp_path):
    bogus = tmp_path / "mesh.txt"
    bogus.write_text("v 1 2 3 4 0\n")
    recipe = _recipe(tmp_path, {"type": "mesh",
                                "inputs": {"mesh": str(bogus)}})
    with pytest.raises(RecipeError, match="not a mesh file"):
        render.render(recipe, tmp_path / "fig.png")


def test_cli_error_exit_code(tmp_path):
    recipe = _recipe(tmp_path, {"type": "scaling", "inputs": {}})
    proc = subprocess.run(
        [sys.executable, str(PLOTS / "render.py"),
         "--recipe", str(recipe), "--out", str(tmp_path / "fig.png")],
        capture_output=True, text=True)
    assert proc.returncode == 2
    assert "error:" in proc.stderr
