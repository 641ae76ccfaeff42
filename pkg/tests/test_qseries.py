from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from qoa.core import colored_partition_count, partition_count
from qoa.modules import make_fock, make_ghost_fock, make_virasoro_vacuum
from qoa.qseries import (II11, LatticeSpec, QSeries, TruncationError, boson_character,
                         boson_signature, e4_series, euler_poincare_dim, euler_poincare_signature,
                         ghost_character, ghost_relative_block, ghost_signature_block,
                         j_series, j_series_convolution, lambda_series, module_character,
                         monster_root_multiplicity, monster_table, phi_series,
                         predicted_slice_dim)

coeffs = st.lists(st.integers(-5, 5), min_size=1, max_size=8)


@settings(max_examples=60, deadline=None)
@given(coeffs, coeffs)
def test_series_ring_laws(a, b):
    x, y = QSeries(a, 0, 8), QSeries(b, 0, 8)
    assert x * y == y * x
    assert (x + y) - y == x
    if a[0]:
        inv = x.inverse()
        assert (x * inv) == QSeries.one(8)


def test_truncation_is_enforced():
    s = phi_series(5)
    assert s[4] == 0
    with pytest.raises(TruncationError):
        s[5]
    assert s.shift(-1).prec == 4


def test_euler_pentagonal():
    phi = phi_series(30)
    nonzero = {e: c for e, c in phi.items()}
    pent = {}
    for k in range(-5, 6):
        e = k * (3 * k - 1) // 2
        if e < 30:
            pent[e] = (-1) ** (k % 2)
    assert nonzero == pent


def test_phi_inverse_counts_partitions():
    inv = phi_series(20).inverse()
    assert [inv[n] for n in range(20)] == [partition_count(n) for n in range(20)]
    inv24 = phi_series(12) ** -24
    assert [inv24[n] for n in range(12)] == [colored_partition_count(n, 24) for n in range(12)]


def test_lambda_is_phi_of_q_squared():
    lam, phi = lambda_series(30), phi_series(30)
    for n in range(30):
        assert lam[n] == (phi[n // 2] if n % 2 == 0 else 0)


def test_j_routes_agree_to_order_64():
    j1, j2 = j_series(64), j_series_convolution(64)
    assert j1 == j2
    assert j1[-1] == 1 and j1[0] == 0
    assert [j1[n] for n in (1, 2, 3)] == [196884, 21493760, 864299970]
    assert e4_series(3)[1] == 240


def test_ghost_blocks():
    # alternating sum over degrees of the b(1)-kernel character
    rel = ghost_character(10, relative=True)
    alt = sum((rel[p] * (-1) ** (p % 2) for p in rel), QSeries([], 0, 10))
    block = ghost_relative_block(10)
    for w in range(-1, 8):
        assert alt[w] == block[w]
    assert ghost_signature_block(6)[-1] == 1


@pytest.mark.parametrize("norm,expected", [(1, 1), (0, 24), (-1, 324), (-2, 3200)])
def test_euler_poincare_constant_terms(norm, expected):
    assert euler_poincare_dim([ghost_relative_block(8), boson_character(25, 1, norm, 8)]) == -expected
    assert euler_poincare_signature(
        [ghost_signature_block(8), boson_signature(25, 1, norm, 8)]) == expected


def test_module_character_and_slice_prediction():
    f = make_fock(25, 1, [1, 1] + [0] * 24)
    ch = module_character(f, 4)
    assert [ch[1 + n] for n in range(4)] == [colored_partition_count(n, 26) for n in range(4)]
    m = make_ghost_fock() * make_virasoro_vacuum(26)
    for p in range(-1, 4):
        for w in range(-1, 5):
            assert predicted_slice_dim(m, p, w) == len(m.slice_basis(p, w))
    gm = module_character(m, 6, fermion=1)
    assert gm[1] == len(m.slice_basis(1, 1))


def test_lattice_validation():
    with pytest.raises(ValueError):
        LatticeSpec(((1, 0), (0, -1)))  # odd
    with pytest.raises(ValueError):
        LatticeSpec(((2, 0), (0, 2)))  # definite
    with pytest.raises(ValueError):
        LatticeSpec(((0, 1), (2, 0)))  # not symmetric
    assert II11.norm2_half((2, 3)) == -6


def test_monster_multiplicities():
    assert monster_root_multiplicity(II11, (1, 1)) == 196884
    assert monster_root_multiplicity(II11, (1, -1)) == 1
    assert monster_root_multiplicity(II11, (3, 0)) == 0
    assert monster_root_multiplicity(II11, (2, -1)) == 0
    rows = monster_table(II11, range(1, 5), range(1, 5), order=20)
    by_mn = {}
    for m, n, half, mult in rows:
        by_mn.setdefault(m * n, set()).add(mult)
        assert half == -m * n
    assert all(len(v) == 1 for v in by_mn.values())
    with pytest.raises(ValueError):
        monster_root_multiplicity(II11, (0, 0))
