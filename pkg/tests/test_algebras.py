import json
import random

import pytest

from qoa.algebras import (UnsupportedFamily, basis_enumerate, builtin_algebra, load_algebra,
                          make_bc_system, make_current_algebra, make_heisenberg, make_virasoro,
                          tensor, verify_conformal_structure)
from qoa.core import Poly, partition_count
from qoa.qseries import ghost_character, virasoro_vacuum_character
from qoa.wick import OperatorExpr


@pytest.mark.parametrize("alg,kappa", [
    (make_bc_system(2), -26),
    (make_bc_system(1), -2),
    (make_virasoro(26), 26),
    (make_heisenberg((25, 1)), 26),
    (tensor(make_bc_system(2), make_virasoro(Poly.gen("k"))), Poly.gen("k") - 26),
])
def test_conformal_structure(alg, kappa):
    rep = verify_conformal_structure(alg)
    assert rep["passed"], rep
    assert rep["measured_kappa"] == kappa


def test_current_algebra_has_no_basis():
    su2 = make_current_algebra(
        ["e", "f", "h"],
        {("e", "f"): {"h": 1}, ("f", "e"): {"h": -1}, ("h", "e"): {"e": 2},
         ("e", "h"): {"e": -2}, ("h", "f"): {"f": -2}, ("f", "h"): {"f": 2}},
        {("e", "f"): 1, ("f", "e"): 1, ("h", "h"): 2})
    e, f = su2.gen("e"), su2.gen("f")
    assert e.ope(f)[0] == su2.gen("h")
    assert e.ope(f)[1] == su2.one()
    with pytest.raises(UnsupportedFamily):
        basis_enumerate(su2, 1, 0)


def test_bc_basis_matches_generating_function(bc):
    order = 13
    series = ghost_character(order)
    for p in range(-4, 8):
        for w in range(-1, order):
            want = series[p][w] if p in series else 0
            assert len(basis_enumerate(bc, w, p)) == want, (p, w)


def test_virasoro_basis_matches_generating_function(vir26):
    series = virasoro_vacuum_character(13)
    for w in range(13):
        n = len(basis_enumerate(vir26, w, 0))
        assert n == series[w] == partition_count(w, 2)


def test_basis_is_canonical_and_sorted(bc):
    basis = basis_enumerate(bc, 2, 0)
    assert all(bc.is_canonical(m) for m in basis)
    assert basis == sorted(basis, key=bc.sort_key)


@pytest.mark.parametrize("alg", [make_bc_system(2), make_virasoro(26),
                                 tensor(make_bc_system(2), make_virasoro(26))])
def test_circle_products_close_on_basis(alg):
    rng = random.Random(0)
    pool = [m for w in range(-1, 4) for p in range(-1, 3) for m in basis_enumerate(alg, w, p)]
    for _ in range(40):
        u = OperatorExpr(alg, {rng.choice(pool): 1})
        v = OperatorExpr(alg, {rng.choice(pool): 1})
        for n in range(-3, 4):
            x = u.circle(v, n)
            if not x:
                continue
            target = set(basis_enumerate(alg, x.weight, x.fermion))
            assert set(x.terms) <= target


def test_tensor_renames_clashes():
    a = tensor(make_heisenberg((1, 0)), make_heisenberg((1, 0)))
    names = [g.name for g in a.generators]
    assert len(set(names)) == 2
    assert a.kappa == 2
    assert verify_conformal_structure(a)["passed"]
    assert {"T", "T1", "T2"} <= set(a.named)


def test_builtin_specs():
    assert builtin_algebra("vir:26").kappa == 26
    assert builtin_algebra("bc:1").kappa == -2
    assert builtin_algebra("heis:25,1*bc").kappa == 0
    with pytest.raises(KeyError):
        builtin_algebra("nope")


BC_DOC = {
    "name": "bc-file",
    "family": "bc",
    "params": {"lambda": 2},
    "kappa": "-26",
    "generators": [{"name": "b", "fermion": -1, "weight": 2},
                   {"name": "c", "fermion": 1, "weight": -1}],
    "ope": [{"left": "b", "right": "c", "poles": {"0": "1"}},
            {"left": "c", "right": "b", "poles": {"0": "1"}}],
    "virasoro": "-2*:b dc: - :db c:",
}


def test_load_algebra_json_and_toml(tmp_path):
    p = tmp_path / "bc.json"
    p.write_text(json.dumps(BC_DOC))
    a = load_algebra(p)
    assert a.gen("b").ope(a.gen("c")) == {0: a.one()}
    assert verify_conformal_structure(a)["passed"]
    toml = """
name = "bc-toml"
family = "bc"
kappa = "-26"
virasoro = "-2*:b dc: - :db c:"
[params]
lambda = 2
[[generators]]
name = "b"
fermion = -1
weight = 2
[[generators]]
name = "c"
fermion = 1
weight = -1
[[ope]]
left = "b"
right = "c"
poles = {"0" = "1"}
[[ope]]
left = "c"
right = "b"
poles = {"0" = "1"}
"""
    q = tmp_path / "bc.toml"
    q.write_text(toml)
    b = load_algebra(q)
    assert [len(basis_enumerate(b, w, 0)) for w in range(5)] == \
        [len(basis_enumerate(a, w, 0)) for w in range(5)]


def test_load_algebra_validates_against_schema():
    jsonschema = pytest.importorskip("jsonschema")
    from pathlib import Path
    schema = json.loads((Path(__file__).parents[1] / "schemas" / "algebra.schema.json").read_text())
    jsonschema.validate(BC_DOC, schema)
