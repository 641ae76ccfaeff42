import io
import json
from pathlib import Path

import jsonschema
import pytest

from qoa.cli import main

SCHEMAS = Path(__file__).resolve().parent.parent / "schemas"


def run(*argv, cache=None):
    out = io.StringIO()
    args = list(argv)
    if cache is not None:
        args += ["--cache-dir", str(cache)]
    code = main(args, out=out)
    return code, out.getvalue()


def schema(name):
    return json.loads((SCHEMAS / name).read_text())


def run_json(*argv, cache=None, schema_name="table.schema.json"):
    code, text = run(*argv, "--format", "json", cache=cache)
    doc = json.loads(text)
    jsonschema.validate(doc, schema(schema_name))
    return code, doc


def test_ope_bc():
    code, doc = run_json("ope", "--left", "b", "--right", "c")
    assert code == 0
    poles = {r["n"]: r["value"] for r in doc["rows"]}
    assert poles[0] == "1"


def test_ope_virasoro_central_term():
    code, doc = run_json("ope", "--algebra", "vir:26", "--left", "L", "--right", "L")
    poles = {r["n"]: r["value"] for r in doc["rows"] if r["n"] != "wick"}
    assert poles[3] == "13"
    assert set(poles) == {0, 1, 3}


def test_ope_parse_error_exit_code():
    code, _ = run("ope", "--left", ":b", "--right", "c")
    assert code == 4


def test_usage_error_exit_code():
    assert run("cohomology", "--fermion", "x:y")[0] == 2


def test_cohomology_norm_one(tmp_path):
    code, doc = run_json("cohomology", "--norm", "1", cache=tmp_path)
    assert code == 0 and doc["checks_passed"]
    dims = {r["p"]: r["dimH"] for r in doc["rows"]}
    assert dims[1] == dims[2] == 1
    assert sum(dims.values()) == 2


def test_relative_surrogate(tmp_path):
    code, doc = run_json("cohomology", "--matter", "vir:24*heis:1,1", "--relative", cache=tmp_path)
    assert code == 0
    dims = {r["p"]: r["dimH"] for r in doc["rows"] if r["dimH"]}
    assert dims == {0: 1, 1: 2, 2: 1}


def test_anomalous_matter_exit_code(tmp_path):
    assert run("cohomology", "--matter", "vir:24", cache=tmp_path)[0] == 3
    assert run("bv-audit", "--matter", "vir:24", "--samples", "1")[0] == 3


def test_monster_table():
    code, doc = run_json("monster-dims", "--m=-1:2", "--n=-1:2")
    assert code == 0 and doc["routes_agree"]
    mult = {(r["m"], r["n"]): r["multiplicity"] for r in doc["rows"]}
    assert mult[(1, 1)] == 196884
    assert mult[(2, 1)] == mult[(1, 2)] == 21493760
    assert mult[(1, -1)] == 1
    assert all(mult[(m, 0)] == 0 for m in range(-1, 3) if m)


def test_monster_rejects_odd_lattice():
    assert run("monster-dims", "--gram", "1,0;0,-1")[0] == 2


def test_bv_audit_report():
    code, doc = run_json("bv-audit", "--samples", "3", schema_name="bv_report.schema.json")
    assert code == 0 and doc["passed"]


def test_output_deterministic_and_cache_transparent(tmp_path):
    argv = ("cohomology", "--norm", "2", "--weight=-1:1", "--format", "tsv")
    cold = run(*argv, cache=tmp_path)
    warm = run(*argv, cache=tmp_path)
    nocache = run(*argv, cache=tmp_path / "other")
    assert cold == warm == nocache
    assert cold[0] == 0
    for f in tmp_path.glob("*.json"):
        jsonschema.validate(json.loads(f.read_text()), schema("cache.schema.json"))


def test_parallel_matches_serial(tmp_path):
    argv = ("cohomology", "--norm", "2", "--weight=-1:1", "--format", "json")
    assert run(*argv, "--jobs", "2", cache=tmp_path / "a") == run(*argv, cache=tmp_path / "b")
