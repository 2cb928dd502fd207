import json
import math
import pathlib

import pytest

import wgeom

ROOT = pathlib.Path(__file__).resolve().parents[2]


def test_sphere_chart():
    s = wgeom.build("sphere_polar(2)")
    assert s.dim == 2
    assert s.coords == ["r", "theta"]
    g = s.metric([1.0, 0.3])
    assert g[0][0] == pytest.approx(1.0)
    assert g[1][1] == pytest.approx(math.sin(1.0) ** 2)


def test_ric_f_on_the_expansion_example():
    c = wgeom.build("expansion_example(2,3)")
    assert wgeom.ric_f(c, [0.3, 0.2], [1.0, 0.0], [1.0, 0.0]) == pytest.approx(8.0, abs=1e-6)


def test_rectangle_algebra_element():
    s = wgeom.build("sphere_polar(2)").with_potential("cos(r)")
    b = wgeom.algebra_element(s, "sphere_rectangle", 0.0)
    root5 = math.sqrt(5.0)
    assert b[0][1] == pytest.approx((1 - root5) / 2 * math.exp((root5 - 1) / 2), abs=1e-6)
    assert b[0][0] + b[1][1] == pytest.approx(0.0, abs=1e-6)


@pytest.mark.parametrize("K", [-1, 0, 1])
def test_one_dim_closed_forms(K):
    assert wgeom.one_dim_error(K, 1.0, 1.0, 0.0, 1.0) < 1e-8


def test_run_a_bundle_spec():
    entry = next(e for e in wgeom.bundle() if e["name"] == "expansion_ricci")
    r = wgeom.run(entry["spec"])
    assert r["exit_code"] == 0
    assert r["status"] == entry["expected"]
    assert r["csv"]


def test_bundle_specs_validate_against_the_schema():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads((ROOT / "schemas" / "experiment.schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema)
    specs = [json.loads(e["spec"]) for e in wgeom.bundle()]
    specs += [json.loads(p.read_text()) for p in sorted((ROOT / "data" / "specs").glob("*.json"))]
    assert len(specs) >= 12
    for spec in specs:
        errors = list(validator.iter_errors(spec))
        assert not errors, (spec.get("name"), [e.message for e in errors])


def test_schema_rejects_unknown_keys():
    jsonschema = pytest.importorskip("jsonschema")
    schema = json.loads((ROOT / "schemas" / "experiment.schema.json").read_text())
    bad = {"manifold": "euclidean(2)", "task": {"op": "geodesic", "args": {"speed": 2}}}
    assert list(jsonschema.Draft202012Validator(schema).iter_errors(bad))


def test_errors():
    with pytest.raises(wgeom.SchemaError):
        wgeom.run({"manifold": "euclidean(2)", "task": {"op": "teleport"}})
    with pytest.raises(wgeom.Error):
        wgeom.build("klein_bottle(2)")
    assert issubclass(wgeom.SchemaError, wgeom.Error)


def test_manifest_matches_the_shipped_copy():
    shipped = json.loads((ROOT / "data" / "catalog_manifest.json").read_text())
    assert json.loads(wgeom.catalog_manifest()) == shipped
