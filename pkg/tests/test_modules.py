import random
from fractions import Fraction

import pytest

from qoa.algebras import make_bc_system, make_heisenberg, make_virasoro, tensor
from qoa.core import colored_partition_count, partition_count
from qoa.linalg import SparseMatrix, exact_rank
from qoa.modules import (SliceKey, brute_circle_matrix, check_commutative, gram_matrix,
                         make_fock, make_ghost_fock, make_virasoro_vacuum, mode_matrix, pairing)
from qoa.qseries import ghost_character


def test_ghost_slices_match_character():
    g = make_ghost_fock()
    series = ghost_character(9)
    for p in range(-3, 5):
        for w in range(-1, 9):
            want = series[p][w] if p in series else 0
            assert len(g.slice_basis(p, w)) == want


def test_boson_and_virasoro_slices():
    f = make_fock(25, 1, [0] * 26)
    assert [len(f.slice_basis(0, w)) for w in range(4)] == [colored_partition_count(w, 26)
                                                           for w in range(4)]
    f = make_fock(1, 1, [1, 0])
    assert len(f.slice_basis(0, Fraction(1, 2))) == 1
    assert len(f.slice_basis(0, Fraction(3, 2))) == 2
    m = make_virasoro_vacuum(Fraction(1, 2))
    assert [len(m.slice_basis(0, w)) for w in range(10)] == [partition_count(w, 2) for w in range(10)]


def test_bc_acts_commutatively():
    bc = make_bc_system(2)
    g = make_ghost_fock()
    for u in ("b", "c"):
        for v in ("b", "c"):
            rep = check_commutative(bc.gen(u), bc.gen(v), g, depth=4)
            assert rep.passed, rep.first_failure


def test_virasoro_vacuum_commutator():
    vir = make_virasoro(Fraction(7, 3))
    m = make_virasoro_vacuum(Fraction(7, 3))
    L = vir.gen("L")
    assert check_commutative(L, L, m, depth=5).passed
    # a composite field also satisfies the commutator formula with L
    LL = vir.wick(L, L)
    assert check_commutative(L, LL, m, depth=3).passed


def test_heisenberg_fock_commutator():
    h = make_heisenberg((1, 1))
    f = make_fock(1, 1, [Fraction(1, 2), 1])
    j1, j2 = h.gen("j1"), h.gen("j2")
    T = h.virasoro
    for u, v in [(j1, j1), (j2, j2), (j1, j2), (T, j1), (T, T)]:
        assert check_commutative(u, v, f, depth=3).passed


def test_zero_modes_give_momentum_and_weight():
    h = make_heisenberg((1, 1))
    f = make_fock(1, 1, [3, 1])
    vac = f.slice_basis(0, f.min_weight(0))[0]
    key = SliceKey(0, f.min_weight(0), f.momentum)
    assert mode_matrix(h.gen("j1"), 0, f, key) == SparseMatrix.from_dense([[3]])
    assert mode_matrix(h.virasoro, 1, f, key) == SparseMatrix.from_dense([[4]])  # (9 - 1)/2
    assert vac is not None


@pytest.mark.parametrize("n", [-2, -1, 0, 1, 2])
def test_symbolic_circle_product_equals_mode_oracle(n):
    a = tensor(make_bc_system(2), make_virasoro(26))
    mod = make_ghost_fock() * make_virasoro_vacuum(26)
    b, c, L = a.gen("b"), a.gen("c"), a.gen("L")
    pairs = [(b, c), (c, L), (L, L), (a.wick(b, c), c.derivative())]
    for u, v in pairs:
        x = u.circle(v, n)
        for p in (0, 1):
            for w in range(0, 3):
                for m in range(-1, 3):
                    key = SliceKey(p, w)
                    brute = brute_circle_matrix(u, v, n, m, mod, key)
                    if not x:
                        assert brute.is_zero()
                        continue
                    assert brute == mode_matrix(x, m, mod, key)


def test_boson_form_is_contravariant():
    # <j(n) s, t> = <s, j(-n) t> on weight-homogeneous states
    f = make_fock(2, 1, [1, 0, 1])
    h = make_heisenberg((2, 1))
    rng = random.Random(0)
    top = f.slice_basis(0, 3)
    for _ in range(30):
        u = h.gen(rng.choice(["j1", "j2", "j3"]))
        n = rng.choice([1, 2, 3])
        s = rng.choice(top)
        low = f.slice_basis(0, 3 - n)
        t = rng.choice(low)
        lhs = sum(c * pairing(f, x, t) for x, c in f.apply(u, n, {s: 1}).items())
        rhs = sum(c * pairing(f, s, x) for x, c in f.apply(u, -n, {t: 1}).items())
        assert lhs == rhs


def test_virasoro_form_is_contravariant_and_symmetric():
    kappa = Fraction(26)
    m = make_virasoro_vacuum(kappa)
    vir = make_virasoro(kappa)
    L = vir.gen("L")
    for w in range(2, 7):
        g = gram_matrix(m, m.slice_basis(0, w))
        assert g.is_symmetric()
    for s in m.slice_basis(0, 4):
        for t in m.slice_basis(0, 2):
            # L_2 = L(3): <L_2 s, t> = <s, L_{-2} t>
            lhs = sum(c * pairing(m, x, t) for x, c in m.apply(L, 3, {s: 1}).items())
            rhs = sum(c * pairing(m, s, x) for x, c in m.apply(L, -1, {t: 1}).items())
            assert lhs == rhs


def test_ghost_form_conventions():
    g = make_ghost_fock()
    vac = g.slice_basis(0, 0)[0]
    c31 = [s for s in g.slice_basis(2, 0)
           if s[0][1] == (-3, -1) or (s[0][1] == (-1, -3))]
    assert c31 and pairing(g, vac, c31[0]) in (1, -1)
    assert pairing(g, vac, c31[0]) == 1
    with pytest.raises(ValueError):
        pairing(g, [s for s in g.slice_basis(1, 0) if -2 in s[0][1]][0], vac)


def test_vacuum_module_24_has_nondegenerate_form():
    # the surrogate matter module is irreducible at every weight used here
    m = make_virasoro_vacuum(24)
    for w in range(2, 9):
        basis = m.slice_basis(0, w)
        assert exact_rank(gram_matrix(m, basis)) == len(basis)
