import random

import pytest

from qoa.algebras import basis_enumerate, make_heisenberg, make_virasoro
from qoa.brst import AnomalyError
from qoa.bv import (BVError, CohomologyClass, OperatorComplex, bracket_h1, bv_bracket,
                    bv_delta, dot, report_json, verify_bv_axioms)
from qoa.wick import OperatorExpr


@pytest.fixture(scope="module")
def vir_cx():
    return OperatorComplex(make_virasoro(26))


@pytest.fixture(scope="module")
def heis_cx():
    return OperatorComplex(make_heisenberg((25, 1)))


def test_derivation_differential_matches_wick(vir_cx):
    alg = vir_cx.algebra
    J = alg.named["J"]
    rng = random.Random(3)
    for p, w in [(0, 0), (1, 0), (2, 1), (1, 2), (0, 3)]:
        mons = basis_enumerate(alg, w, p)
        for m in rng.sample(mons, min(5, len(mons))):
            x = OperatorExpr(alg, {m: 1})
            assert vir_cx.d(x) == J.circle(x, 0)


def test_operator_cohomology_dims(vir_cx, heis_cx):
    assert vir_cx.dims(range(-1, 5)) == {-1: 0, 0: 1, 1: 0, 2: 0, 3: 1, 4: 0}
    assert heis_cx.dims(range(0, 4)) == {0: 1, 1: 26, 2: 26, 3: 1}
    assert [heis_cx.slice_count(p, 0) for p in range(-2, 6)] == [0, 0, 1, 27, 27, 1, 0, 0]


def test_anomalous_matter_rejected():
    with pytest.raises(AnomalyError):
        OperatorComplex(make_virasoro(24))


def test_classes_ignore_boundaries(heis_cx):
    u = heis_cx.cohomology_basis(1)[3]
    lower = heis_cx.basis(0)
    shifted = u + heis_cx.d(OperatorExpr(heis_cx.algebra, {lower[0]: 5}))
    a, b = heis_cx.cls(u), heis_cx.cls(shifted)
    assert a.equals(b)
    assert a.coordinates() == b.coordinates()
    assert not a.is_zero()


def test_non_closed_rejected(heis_cx):
    b = heis_cx.algebra.gen("b")
    with pytest.raises(BVError):
        heis_cx.cls(b)


def test_mixed_complexes_rejected(vir_cx, heis_cx):
    one_v = vir_cx.cls(vir_cx.algebra.one())
    one_h = heis_cx.cls(heis_cx.algebra.one())
    with pytest.raises(BVError):
        dot(one_v, one_h)


def test_bracket_routes_and_h1_abelian(heis_cx):
    h1 = [heis_cx.cls(x) for x in heis_cx.cohomology_basis(1)]
    for u in h1[:6]:
        for v in h1[:6]:
            br = bv_bracket(u, v)
            assert br.equals(bracket_h1(u, v))
            # Heisenberg currents have no simple pole, so H^1 is abelian
            assert br.is_zero()


def test_delta_on_top_class(vir_cx):
    top = vir_cx.cls(vir_cx.cohomology_basis(3)[0])
    assert bv_delta(top).fermion == 2
    assert bv_delta(top).is_zero()


def test_bv_suite_small_samples():
    rep = verify_bv_axioms(make_virasoro(26), samples=8, seed=1)
    assert rep["passed"], rep
    assert rep["cohomology_dims"] == {"0": 1, "3": 1}
    assert "jacobi" in rep["axioms"]


def test_negative_control_fails():
    rep = verify_bv_axioms(make_heisenberg((25, 1)), samples=5, seed=0, product=0)
    assert not rep["passed"]
    assert rep["axioms"]["unit"]["passed"] < rep["axioms"]["unit"]["checked"]


def test_report_is_deterministic():
    a = report_json(verify_bv_axioms(make_virasoro(26), samples=4, seed=7))
    b = report_json(verify_bv_axioms(make_virasoro(26), samples=4, seed=7))
    assert a == b
