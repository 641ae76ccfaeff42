"""Fock-type modules: the ghost Fock space, bosonic Fock spaces F_{k,l}(alpha),
the Virasoro vacuum module M(kappa), and tensor products of these.

A state of a factor is a hashable canonical descriptor:

* ghost: ``(bs, cs)`` with the creation modes of b and c, each ascending
  (most negative first), standing for b(n1)..b(nr) c(m1)..c(ms) 1;
* boson: sorted tuple of ``(n, a)`` for the creation modes j^a(n), n <= -1;
* Virasoro vacuum: tuple ``k1 >= k2 >= ... >= 2`` for L_{-k1}..L_{-kr} v0.

A tensor state is the tuple of its factor states.  Modes follow the
convention u(z) = sum u(n) z^{-n-1}, so ||u(n)|| = ||u|| - n - 1; in
particular L(n) = L_{n-1}.
"""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .core import binom, enumerate_partitions, falling, format_rational, to_rational
from .linalg import SparseMatrix
from .wick import Algebra, OperatorExpr, _addto

__all__ = [
    "SliceKey",
    "GhostFock",
    "BosonFock",
    "VirasoroVacuum",
    "TensorModule",
    "make_ghost_fock",
    "make_fock",
    "make_virasoro_vacuum",
    "mode_matrix",
    "brute_circle_matrix",
    "check_commutative",
    "gram_matrix",
    "apply_mode",
]


@dataclass(frozen=True)
class SliceKey:
    fermion: int
    weight: Fraction
    momentum: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "weight", Fraction(self.weight))
        object.__setattr__(self, "momentum", tuple(Fraction(x) for x in self.momentum))

    def to_json(self):
        return {"fermion": self.fermion, "weight": format_rational(self.weight),
                "momentum": [format_rational(x) for x in self.momentum]}


# --------------------------------------------------------------------------
# factor modules
# --------------------------------------------------------------------------


class GhostFock:
    """Irreducible module of the b, c Clifford algebra with lambda = 2:
    b(m)1 = c(m)1 = 0 for m >= 0 and {b(n), c(m)} = delta_{n,-m-1}."""

    family = "ghost"
    lam = 2

    def __init__(self, names=("b", "c")):
        self.names = tuple(names)
        self.vacuum = ((), ())

    def descriptor(self):
        return {"family": self.family, "names": list(self.names)}

    @staticmethod
    def fermion(state):
        return len(state[1]) - len(state[0])

    @staticmethod
    def weight(state):
        return sum(1 - n for n in state[0]) + sum(-2 - n for n in state[1])

    @staticmethod
    def min_weight(p):
        if p >= 0:
            return Fraction(p * (p - 3), 2)
        q = -p
        return Fraction(q * (q + 3), 2)

    def slice_basis(self, p, w):
        w = Fraction(w)
        if w.denominator != 1:
            return []
        w = int(w)
        out = []
        nb = max(0, -p)
        while True:
            nc = nb + p
            # least weight for nb b's (parts >= 2 distinct) and nc c's
            lo = nb * (nb + 3) // 2 + nc * (nc - 3) // 2
            if lo > w:
                break
            for wb in range(nb * (nb + 3) // 2, w - nc * (nc - 3) // 2 + 1):
                bparts = [pt for pt in enumerate_partitions(wb, 2, True) if len(pt) == nb]
                if not bparts:
                    continue
                # c(m) has weight -2-m; s = -m >= 1, sum s = weight + 2 nc
                cparts = [pt for pt in enumerate_partitions(w - wb + 2 * nc, 1, True)
                          if len(pt) == nc]
                for bp in bparts:
                    bs = tuple(sorted(1 - x for x in bp))
                    for cp in cparts:
                        cs = tuple(sorted(-s for s in cp))
                        out.append((bs, cs))
            nb += 1
        return sorted(out)

    def act(self, name, n, state):
        """Generator mode acting on a basis state; returns [(coeff, state)]."""
        bs, cs = state
        if name == self.names[0]:
            if n <= -1:
                if n in bs:
                    return []
                pos = sum(1 for x in bs if x < n)
                return [((-1) ** pos, (tuple(sorted(bs + (n,))), cs))]
            m = -n - 1
            if m not in cs:
                return []
            i = cs.index(m)
            return [((-1) ** (len(bs) + i), (bs, cs[:i] + cs[i + 1:]))]
        if name == self.names[1]:
            if n <= -1:
                if n in cs:
                    return []
                pos = len(bs) + sum(1 for x in cs if x < n)
                return [((-1) ** pos, (bs, tuple(sorted(cs + (n,)))))]
            m = -n - 1
            if m not in bs:
                return []
            i = bs.index(m)
            return [((-1) ** i, (bs[:i] + bs[i + 1:], cs))]
        raise KeyError(name)

    def gen_fermion(self, name):
        return -1 if name == self.names[0] else 1

    def creation_ops(self, state):
        bs, cs = state
        return [(self.names[0], n) for n in bs] + [(self.names[1], n) for n in cs]

    def adjoint(self, name, n):
        if name == self.names[0]:
            return name, 2 - n
        return name, -n - 4

    def form_vacuum(self):
        return ((), (-3, -1))

    def form_defined(self, state):
        """The form lives on states without c(-2), i.e. on ker b(1)."""
        return -2 not in state[1]


class BosonFock:
    """F_{k,l}(alpha): [j^a(n), j^b(m)] = n delta_{n+m,0} eta^{ab},
    j^a(0) = alpha^a."""

    family = "boson"

    def __init__(self, k, l, alpha, names=None):
        self.k, self.l = int(k), int(l)
        n = self.k + self.l
        alpha = tuple(to_rational(x) for x in alpha)
        if len(alpha) != n:
            raise ValueError(f"momentum has length {len(alpha)}, expected {n}")
        self.alpha = alpha
        self.eta = (1,) * self.k + (-1,) * self.l
        self.names = tuple(names) if names else tuple(f"j{a + 1}" for a in range(n))
        self.index = {nm: a for a, nm in enumerate(self.names)}
        self.vacuum = ()
        self.norm2 = sum(e * x * x for e, x in zip(self.eta, alpha)) / 2

    def descriptor(self):
        return {"family": self.family, "k": self.k, "l": self.l,
                "alpha": [format_rational(x) for x in self.alpha], "names": list(self.names)}

    @staticmethod
    def fermion(state):
        return 0

    def weight(self, state):
        return self.norm2 + sum(-n for n, _ in state)

    def min_weight(self, p):
        return self.norm2 if p == 0 else None

    def slice_basis(self, p, w):
        if p != 0:
            return []
        level = Fraction(w) - self.norm2
        if level < 0 or level.denominator != 1:
            return []
        colors = len(self.names)
        out = []

        def rec(left, max_key, acc):
            if left == 0:
                out.append(tuple(sorted(acc)))
                return
            for s in range(min(left, max_key[0]), 0, -1):
                top = max_key[1] if s == max_key[0] else colors - 1
                for a in range(top, -1, -1):
                    acc.append((-s, a))
                    rec(left - s, (s, a), acc)
                    acc.pop()

        rec(int(level), (int(level), colors - 1), [])
        return sorted(out)

    def act(self, name, n, state):
        a = self.index[name]
        if n == 0:
            x = self.alpha[a]
            return [(x, state)] if x else []
        if n < 0:
            return [(1, tuple(sorted(state + ((n, a),))))]
        mult = state.count((-n, a))
        if not mult:
            return []
        i = state.index((-n, a))
        return [(mult * n * self.eta[a], state[:i] + state[i + 1:])]

    def gen_fermion(self, name):
        return 0

    def creation_ops(self, state):
        return [(self.names[a], n) for n, a in state]

    def adjoint(self, name, n):
        return name, -n

    def form_vacuum(self):
        return ()

    def form_defined(self, state):
        return True


class VirasoroVacuum:
    """M(kappa): the Verma module of central charge kappa and lowest weight 0
    divided by the submodule generated by L_{-1} v0.  PBW basis
    L_{-k1}..L_{-kr} v0 with k1 >= .. >= kr >= 2."""

    family = "virasoro"

    def __init__(self, kappa, name="L"):
        self.kappa = to_rational(kappa)
        self.names = (name,)
        self.vacuum = ()
        self._cache = {}

    def descriptor(self):
        return {"family": self.family, "kappa": format_rational(self.kappa),
                "names": list(self.names)}

    @staticmethod
    def fermion(state):
        return 0

    @staticmethod
    def weight(state):
        return Fraction(sum(state))

    @staticmethod
    def min_weight(p):
        return Fraction(0) if p == 0 else None

    def slice_basis(self, p, w):
        w = Fraction(w)
        if p != 0 or w < 0 or w.denominator != 1:
            return []
        return sorted(enumerate_partitions(int(w), 2))

    def _apply(self, m, state):
        """L_m on a PBW monomial, as a dict."""
        key = (m, state)
        if key in self._cache:
            return self._cache[key]
        if not state:
            out = {(-m,): Fraction(1)} if m <= -2 else {}
        elif m <= -2 and -m >= state[0]:
            out = {(-m,) + state: Fraction(1)}
        else:
            k1, rest = state[0], state[1:]
            out = {}
            # L_m L_{-k1} R = L_{-k1} L_m R + (m + k1) L_{m-k1} R + central
            for s, c in self._apply(m, rest).items():
                _addto(out, self._apply(-k1, s), c)
            if m + k1:
                _addto(out, self._apply(m - k1, rest), m + k1)
            if m == k1:
                _addto(out, {rest: 1}, self.kappa * (m ** 3 - m) / 12)
        self._cache[key] = out
        return out

    def act(self, name, n, state):
        return list((c, s) for s, c in self._apply(n - 1, state).items())

    def gen_fermion(self, name):
        return 0

    def creation_ops(self, state):
        return [(self.names[0], 1 - k) for k in state]

    def adjoint(self, name, n):
        return name, 2 - n

    def form_vacuum(self):
        return ()

    def form_defined(self, state):
        return True


def make_ghost_fock(names=("b", "c")) -> "TensorModule":
    return TensorModule([GhostFock(names)])


def make_fock(k, l, alpha, names=None) -> "TensorModule":
    return TensorModule([BosonFock(k, l, alpha, names)])


def make_virasoro_vacuum(kappa, name="L") -> "TensorModule":
    return TensorModule([VirasoroVacuum(kappa, name)])


# --------------------------------------------------------------------------
# tensor products and mode actions
# --------------------------------------------------------------------------


class TensorModule:
    """Tensor product of factor modules.  A generator name is routed to the
    factor that declares it; odd generators pick up the Koszul sign of the
    factors to their left."""

    def __init__(self, factors):
        self.factors = tuple(factors)
        self.route = {}
        for i, f in enumerate(self.factors):
            for nm in f.names:
                if nm in self.route:
                    raise ValueError(f"generator {nm!r} acts on two factors")
                self.route[nm] = i
        self._slices = {}
        self._mono_cache = {}
        self._local_cache = {}
        self._block_cache = {}

    def __mul__(self, other):
        return TensorModule(self.factors + other.factors)

    @property
    def momentum(self):
        out = ()
        for f in self.factors:
            if f.family == "boson":
                out += f.alpha
        return out

    def descriptor(self):
        return {"factors": [f.descriptor() for f in self.factors]}

    def content_hash(self):
        blob = json.dumps(self.descriptor(), sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    @property
    def vacuum(self):
        return tuple(f.vacuum for f in self.factors)

    def fermion(self, state):
        return sum(f.fermion(s) for f, s in zip(self.factors, state))

    def weight(self, state):
        return sum((Fraction(f.weight(s)) for f, s in zip(self.factors, state)), Fraction(0))

    @lru_cache(maxsize=None)
    def min_weight(self, p):
        """Least weight in fermion sector p (None if the sector is empty)."""
        options = {0: Fraction(0)}
        for f in self.factors:
            new = {}
            ps = range(-40, 41) if f.family == "ghost" else (0,)
            for q0, w0 in options.items():
                for q in ps:
                    m = f.min_weight(q)
                    if m is None:
                        continue
                    key = q0 + q
                    if key not in new or w0 + m < new[key]:
                        new[key] = w0 + m
            options = new
        return options.get(p)

    def _factor_min(self, i):
        f = self.factors[i]
        if f.family == "ghost":
            return f.min_weight
        return f.min_weight

    def slice_basis(self, p, w):
        """Canonical basis of the (p, w) slice: tuples of factor states, in
        lexicographic order of factor states."""
        w = Fraction(w)
        key = (p, w)
        if key in self._slices:
            return self._slices[key]
        out = []

        def rec(i, p_left, w_left, acc):
            if i == len(self.factors):
                if p_left == 0 and w_left == 0:
                    out.append(tuple(acc))
                return
            f = self.factors[i]
            rest_lo = self._rest_min(i + 1)
            ps = [p_left] if i == len(self.factors) - 1 else (
                range(-12, 13) if f.family == "ghost" else [0])
            for q in ps:
                lo_f = f.min_weight(q)
                if lo_f is None:
                    continue
                r = rest_lo.get(p_left - q)
                if r is None:
                    continue
                wf = lo_f
                while wf + r <= w_left:
                    for s in f.slice_basis(q, wf):
                        acc.append(s)
                        rec(i + 1, p_left - q, w_left - wf, acc)
                        acc.pop()
                    wf += 1

        rec(0, p, w, [])
        out.sort()
        self._slices[key] = out
        return out

    def _rest_min(self, start):
        options = {0: Fraction(0)}
        for f in self.factors[start:]:
            new = {}
            ps = range(-40, 41) if f.family == "ghost" else (0,)
            for q0, w0 in options.items():
                for q in ps:
                    m = f.min_weight(q)
                    if m is None:
                        continue
                    if q0 + q not in new or w0 + m < new[q0 + q]:
                        new[q0 + q] = w0 + m
            options = new
        return options

    def slice_dim(self, p, w):
        return len(self.slice_basis(p, w))

    def _vanishes(self, weight, fermion):
        lo = self.min_weight(fermion)
        return lo is None or weight < lo

    # ----- generator modes ----------------------------------------------------

    def act_gen(self, name, n, state):
        i = self.route[name]
        f = self.factors[i]
        sign = 1
        if f.gen_fermion(name) % 2:
            before = sum(self.factors[j].fermion(state[j]) for j in range(i))
            sign = -1 if before % 2 else 1
        out = {}
        for c, s in f.act(name, n, state[i]):
            new = state[:i] + (s,) + state[i + 1:]
            out[new] = out.get(new, 0) + sign * c
        return {s: c for s, c in out.items() if c}

    # ----- monomial modes -------------------------------------------------------

    def act_mono(self, alg: Algebra, m, n, state) -> dict:
        """The mode m(n) of a canonical monomial of ``alg`` on a basis state.

        The monomial is split into blocks living on single tensor factors.
        Blocks on different factors supercommute, so the mode of a product
        is the plain convolution sum_k A(k) B(n-k-1); inside one factor the
        normal-ordered mode formula is used (see :meth:`_local_mono`).
        """
        key = (id(alg), m, n, state)
        cache = self._mono_cache
        if key in cache:
            return cache[key]
        blocks = self._blocks(alg, m)
        if len(blocks) <= 1:
            if not m:
                out = {state: Fraction(1)} if n == -1 else {}
            else:
                out = self._block_mode(alg, blocks[0], n, state)
        else:
            first = blocks[0]
            rest = tuple(f for blk in blocks[1:] for f in blk[1])
            i = first[0]
            fi = self.factors[i]
            pa, wa = alg.mono_fermion(first[1]), alg.mono_weight(first[1])
            local = state[i]
            lo_a = fi.min_weight(fi.fermion(local) + pa)
            out = {}
            if lo_a is not None:
                # B(n-k-1) first, then A(k); A(k) lives on factor i only
                k_max = fi.weight(local) + wa - 1 - lo_a
                k = int(k_max // 1)
                while not self._below(alg, rest, n - k - 1, state, i):
                    inner = self.act_mono(alg, rest, n - k - 1, state)
                    for s, c in inner.items():
                        _addto(out, self._block_mode(alg, first, k, s), c)
                    k -= 1
        cache[key] = out
        return out

    def _below(self, alg, rest, n, state, skip):
        """True when rest(n') vanishes on ``state`` for every n' >= n by
        weight, judged on the factors other than ``skip``."""
        w = Fraction(0)
        p = 0
        for j, f in enumerate(self.factors):
            if j == skip:
                continue
            w += Fraction(f.weight(state[j]))
            p += f.fermion(state[j])
        p_after = p + alg.mono_fermion(rest)
        lo = self._rest_min_excluding(skip).get(p_after)
        if lo is None:
            return True
        return w + alg.mono_weight(rest) - n - 1 < lo

    @lru_cache(maxsize=None)
    def _rest_min_excluding(self, skip):
        options = {0: Fraction(0)}
        for j, f in enumerate(self.factors):
            if j == skip:
                continue
            new = {}
            ps = range(-40, 41) if f.family == "ghost" else (0,)
            for q0, w0 in options.items():
                for q in ps:
                    mw = f.min_weight(q)
                    if mw is None:
                        continue
                    if q0 + q not in new or w0 + mw < new[q0 + q]:
                        new[q0 + q] = w0 + mw
            options = new
        return options

    def _blocks(self, alg, m):
        key = (id(alg), m)
        hit = self._block_cache.get(key)
        if hit is not None:
            return hit
        blocks = []
        for f in m:
            i = self.route[alg.generators[f[0]].name]
            if blocks and blocks[-1][0] == i:
                blocks[-1][1].append(f)
            else:
                blocks.append((i, [f]))
        out = [(i, tuple(fs)) for i, fs in blocks]
        self._block_cache[key] = out
        return out

    def _block_mode(self, alg, block, n, state):
        """Mode of a single-factor monomial on a tensor state."""
        i, m = block
        sign = 1
        if alg.mono_fermion(m) % 2:
            before = sum(self.factors[j].fermion(state[j]) for j in range(i))
            sign = -1 if before % 2 else 1
        out = {}
        for s, c in self._local_mono(alg, i, m, n, state[i]).items():
            out[state[:i] + (s,) + state[i + 1:]] = sign * c
        return out

    def _local_mono(self, alg, i, m, n, local):
        """Normal-ordered mode formula on one factor:
        (:f R:)(n) = sum_{k<0} f(k) R(n-k-1) + (-1)^{|f||R|} sum_{k>=0} R(n-k-1) f(k),
        with (d^a g)(k) = (-1)^a k(k-1)..(k-a+1) g(k-a)."""
        key = (id(alg), i, m, n, local)
        cache = self._local_cache
        if key in cache:
            return cache[key]
        fac = self.factors[i]
        if not m:
            out = {local: Fraction(1)} if n == -1 else {}
        elif len(m) == 1:
            (g, a), = m
            fa = falling(n, a)
            out = {}
            if fa:
                name = alg.generators[g].name
                for c, s in fac.act(name, n - a, local):
                    out[s] = out.get(s, 0) + c * (-1) ** a * fa
                out = {s: c for s, c in out.items() if c}
        else:
            pv, wv = fac.fermion(local), Fraction(fac.weight(local))
            pm, wm = alg.mono_fermion(m), alg.mono_weight(m)
            out = {}

            def vanishes(w, p):
                lo = fac.min_weight(p)
                return lo is None or w < lo

            if not vanishes(wv + wm - n - 1, pv + pm):
                f, rest = m[:1], m[1:]
                pf, wf = alg.mono_fermion(f), alg.mono_weight(f)
                pr, wr = alg.mono_fermion(rest), alg.mono_weight(rest)
                sign = -1 if (pf % 2 and pr % 2) else 1
                k = -1
                while not vanishes(wv + wr - n + k, pv + pr):
                    for s, c in self._local_mono(alg, i, rest, n - k - 1, local).items():
                        _addto(out, self._local_mono(alg, i, f, k, s), c)
                    k -= 1
                k = 0
                while not vanishes(wv + wf - k - 1, pv + pf):
                    for s, c in self._local_mono(alg, i, f, k, local).items():
                        _addto(out, self._local_mono(alg, i, rest, n - k - 1, s), sign * c)
                    k += 1
        cache[key] = out
        return out

    def clear_cache(self):
        self._mono_cache.clear()
        self._local_cache.clear()
        for f in self.factors:
            if hasattr(f, "_cache"):
                f._cache.clear()

    def apply(self, u: OperatorExpr, n: int, vec: dict) -> dict:
        out = {}
        for m, c in u.terms.items():
            for s, d in vec.items():
                _addto(out, self.act_mono(u.algebra, m, n, s), c * d)
        return out


def apply_mode(module: TensorModule, u: OperatorExpr, n: int, vec: dict) -> dict:
    return module.apply(u, n, vec)


def _target_key(u: OperatorExpr, n: int, src: SliceKey) -> SliceKey:
    deg = u.bidegree
    return SliceKey(src.fermion + deg.fermion, src.weight + deg.weight - n - 1, src.momentum)


def mode_matrix(u: OperatorExpr, n: int, module: TensorModule, key) -> SparseMatrix:
    """Matrix of u(n) from the slice ``key`` to the shifted slice; columns are
    source basis states, rows target basis states."""
    if not isinstance(key, SliceKey):
        key = SliceKey(*key)
    if not u.terms:
        src = module.slice_basis(key.fermion, key.weight)
        return SparseMatrix(0, len(src), {})
    tgt_key = _target_key(u, n, key)
    src = module.slice_basis(key.fermion, key.weight)
    tgt = module.slice_basis(tgt_key.fermion, tgt_key.weight)
    index = {s: i for i, s in enumerate(tgt)}
    entries = {}
    for j, s in enumerate(src):
        for t, c in module.apply(u, n, {s: Fraction(1)}).items():
            entries[(index[t], j)] = c
    return SparseMatrix(len(tgt), len(src), entries)


def brute_circle_matrix(u: OperatorExpr, v: OperatorExpr, n: int, m: int,
                        module: TensorModule, key) -> SparseMatrix:
    """(u o_n v)(m) on a slice from raw mode compositions:

        sum_{i>=0} (-1)^i C(n,i) [u(n-i) v(m+i) - (-1)^{|u||v|} (-1)^n v(n+m-i) u(i)]

    each sum cut off once the inner mode annihilates the whole slice by
    weight."""
    if not isinstance(key, SliceKey):
        key = SliceKey(*key)
    pu, wu = u.fermion, u.weight
    pv, wv = v.fermion, v.weight
    sign = -1 if (pu % 2 and pv % 2) else 1
    src = module.slice_basis(key.fermion, key.weight)
    tgt_p = key.fermion + pu + pv
    tgt_w = key.weight + wu + wv - n - 1 - m - 1
    tgt = module.slice_basis(tgt_p, tgt_w)
    index = {s: i for i, s in enumerate(tgt)}
    entries = {}
    for j, s in enumerate(src):
        acc = {}
        i = 0
        while not module._vanishes(key.weight + wv - (m + i) - 1, key.fermion + pv):
            coef = (-1) ** i * binom(n, i)
            if coef:
                inner = module.apply(v, m + i, {s: Fraction(1)})
                _addto(acc, module.apply(u, n - i, inner), coef)
            i += 1
        i = 0
        while not module._vanishes(key.weight + wu - i - 1, key.fermion + pu):
            coef = (-1) ** i * binom(n, i)
            if coef:
                inner = module.apply(u, i, {s: Fraction(1)})
                _addto(acc, module.apply(v, n + m - i, inner), -sign * (-1) ** (n % 2) * coef)
            i += 1
        for t, c in acc.items():
            entries[(index[t], j)] = c
    return SparseMatrix(len(tgt), len(src), entries)


@dataclass
class CommutativityReport:
    passed: bool
    checked: int
    first_failure: dict | None = None
    details: list = field(default_factory=list)

    def to_json(self):
        return {"passed": self.passed, "checked": self.checked, "first_failure": self.first_failure}


def check_commutative(u: OperatorExpr, v: OperatorExpr, module: TensorModule, depth: int,
                      fermions=None) -> CommutativityReport:
    """Compare [u(m), v(k)] on module slices with sum_j C(m,j) (u o_j v)(m+k-j),
    the right side built from the polar part of the symbolic OPE.  Slices
    run over weights from the sector minimum up to ``depth`` above it; mode
    pairs range over all (m, k) with |shift| small enough to stay within the
    depth window."""
    if depth <= 0:
        raise ValueError("depth must be positive")
    ope = u.ope(v)
    pu, pv = u.fermion, v.fermion
    sign = -1 if (pu % 2 and pv % 2) else 1
    wu, wv = u.weight, v.weight
    if fermions is None:
        fermions = [0] if all(f.family != "ghost" for f in module.factors) else [-1, 0, 1, 2]
    checked = 0
    for p in fermions:
        lo = module.min_weight(p)
        if lo is None:
            continue
        for dw in range(depth + 1):
            w = lo + dw
            basis = module.slice_basis(p, w)
            if not basis:
                continue
            for m in range(-2, 3 + int(wu)):
                for k in range(-2, 3 + int(wv)):
                    for j, s in enumerate(basis):
                        vec = {s: Fraction(1)}
                        lhs = module.apply(u, m, module.apply(v, k, vec))
                        _addto(lhs, module.apply(v, k, module.apply(u, m, vec)), -sign)
                        rhs = {}
                        for jj, e in ope.items():
                            cf = binom(m, jj)
                            if cf:
                                _addto(rhs, module.apply(e, m + k - jj, vec), cf)
                        checked += 1
                        if lhs != rhs:
                            return CommutativityReport(False, checked, {
                                "fermion": p, "weight": str(w), "m": m, "k": k,
                                "state": repr(s)})
    return CommutativityReport(True, checked)


# --------------------------------------------------------------------------
# hermitean forms
# --------------------------------------------------------------------------


def _factor_pairing(f, s, t):
    """<s, t> on one factor: apply the adjoint of the creation word of s to t
    and read off the coefficient of the form vacuum."""
    vec = {t: Fraction(1)}
    for name, n in f.creation_ops(s):
        # (o1 .. or)^dagger = or^dagger .. o1^dagger, so o1^dagger acts first
        aname, an = f.adjoint(name, n)
        new = {}
        for st, c in vec.items():
            for d, st2 in f.act(aname, an, st):
                new[st2] = new.get(st2, 0) + c * d
        vec = {k: v for k, v in new.items() if v}
        if not vec:
            return Fraction(0)
    return Fraction(vec.get(f.form_vacuum(), 0))


def pairing(module: TensorModule, s, t) -> Fraction:
    out = Fraction(1)
    for f, a, b in zip(module.factors, s, t):
        if not (f.form_defined(a) and f.form_defined(b)):
            raise ValueError("hermitean form is only defined on states annihilated by b(1)")
        out *= _factor_pairing(f, a, b)
        if not out:
            return out
    return out


def gram_matrix(module: TensorModule, left_basis, right_basis=None) -> SparseMatrix:
    """Gram matrix <s_i, t_j> of the standard contravariant forms (ghost
    factor: b(n)^+ = b(2-n), c(n)^+ = c(-n-4), <1, c(-3)c(-1)1> = 1; boson:
    j(n)^+ = j(-n), <alpha|alpha> = 1; Virasoro: L_m^+ = L_{-m})."""
    if right_basis is None:
        right_basis = left_basis
    entries = {}
    for i, s in enumerate(left_basis):
        for j, t in enumerate(right_basis):
            v = pairing(module, s, t)
            if v:
                entries[(i, j)] = v
    return SparseMatrix(len(left_basis), len(right_basis), entries)
