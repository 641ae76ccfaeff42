"""Symbolic operators in a commutative quantum operator algebra.

An element is a finite sum of normal-ordered monomials

    :d^{n1} g_{i1} ( :d^{n2} g_{i2} ( ... ) : ) :

nested to the right, with coefficients in Q (or in Q[kappa]).  A monomial is
canonical when its factors are sorted by generator index and, within one
generator, by decreasing derivative order; an odd generator may not repeat
with the same derivative order.

All circle products are computed from the generator OPE table by structural
recursion on the monomials:

* ``f_(n) X`` for a single factor ``f`` and ``n >= 0`` moves ``f`` through
  the factors of ``X`` with the commutator formula;
* ``(f R)_(n) X`` for a composite left argument uses the Wick recursion for a
  normal-ordered product on the left;
* reordering ``:f :h R::`` with ``f`` after ``h`` uses the same commutator
  formula at ``n = -1`` so the correction terms are exact.

Recursions are truncated with a weight bound: a product whose weight lies
below the lowest weight present in its fermion sector vanishes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce

from .core import BiDegree, Poly, binom, falling, factorial, format_rational, to_rational

__all__ = ["Generator", "Algebra", "OperatorExpr", "OPEError", "HomogeneityError"]


class OPEError(KeyError):
    """Raised when an OPE table entry needed by a computation is missing."""


class HomogeneityError(ValueError):
    pass


@dataclass(frozen=True)
class Generator:
    name: str
    fermion: int
    weight: Fraction

    def __post_init__(self):
        object.__setattr__(self, "weight", Fraction(self.weight))

    @property
    def odd(self) -> bool:
        return self.fermion % 2 != 0

    @property
    def bidegree(self) -> BiDegree:
        return BiDegree(self.fermion, self.weight)


def _addto(acc: dict, terms: dict, scale=1):
    if not scale:
        return acc
    for m, c in terms.items():
        nc = acc.get(m, 0) + scale * c
        if nc:
            acc[m] = nc
        else:
            acc.pop(m, None)
    return acc


class Algebra:
    """Generators, OPE table and (optionally) a Virasoro element.

    ``ope`` maps an ordered pair of generator names to ``{n: terms}`` for the
    nonzero polar coefficients ``g_(n) h``, ``n >= 0``; terms are dicts from
    monomials to coefficients (or :class:`OperatorExpr`).  Pairs absent from
    the table are an error unless ``complete`` declares all other entries
    zero.
    """

    def __init__(self, generators, ope, *, name="algebra", virasoro=None, kappa=None,
                 families=(), named=None, complete=True):
        self.name = name
        self.generators = tuple(generators)
        self.index = {g.name: i for i, g in enumerate(self.generators)}
        self._gw = tuple(int(g.weight) if Fraction(g.weight).denominator == 1 else g.weight
                         for g in self.generators)
        if len(self.index) != len(self.generators):
            raise ValueError("generator names must be unique")
        for g in self.generators:
            if not g.odd and (g.fermion != 0 or g.weight <= 0):
                raise ValueError(f"even generator {g.name} must have fermion 0 and positive weight")
        self.complete = complete
        self._ope: dict = {}
        for (a, b), poles in ope.items():
            ia, ib = self.index[a], self.index[b]
            table = {}
            for n, val in poles.items():
                terms = val.terms if isinstance(val, OperatorExpr) else self._coerce_terms(val)
                if terms:
                    table[int(n)] = terms
            self._ope[(ia, ib)] = table
        self.kappa = kappa
        self.families = tuple(families)
        self.named: dict = {}
        self._caches: dict = {k: {} for k in ("left", "gen", "mono", "deriv", "fope", "deg")}
        self._minw: dict | None = None
        self.virasoro = None
        if virasoro is not None:
            self.virasoro = virasoro if isinstance(virasoro, OperatorExpr) else self.expr(virasoro)
            self.named.setdefault("T", self.virasoro)
        for k, v in (named or {}).items():
            self.named[k] = v if isinstance(v, OperatorExpr) else self.expr(v)

    # ----- construction helpers -------------------------------------------------

    def _coerce_terms(self, val) -> dict:
        if isinstance(val, dict):
            return {tuple(tuple(f) for f in m): c for m, c in val.items() if c}
        raise TypeError(f"cannot read OPE entry {val!r}")

    def gen(self, name: str, deriv: int = 0) -> "OperatorExpr":
        if name not in self.index:
            raise KeyError(f"unknown generator {name!r}")
        return OperatorExpr(self, {((self.index[name], deriv),): Fraction(1)})

    def one(self) -> "OperatorExpr":
        return OperatorExpr(self, {(): Fraction(1)})

    def zero(self) -> "OperatorExpr":
        return OperatorExpr(self, {})

    def scalar(self, c) -> "OperatorExpr":
        return OperatorExpr(self, {(): c} if c else {})

    def expr(self, terms) -> "OperatorExpr":
        if isinstance(terms, OperatorExpr):
            return terms
        if isinstance(terms, str):
            from .grammar import parse_expr
            return parse_expr(self, terms)
        return OperatorExpr(self, self._coerce_terms(terms))

    def wick(self, *factors) -> "OperatorExpr":
        """Right-nested normal-ordered product of the given expressions."""
        exprs = [self.expr(f) for f in factors]
        if not exprs:
            return self.one()
        return reduce(lambda acc, f: f.circle(acc, -1), reversed(exprs[:-1]), exprs[-1])

    def normal_order(self, factors) -> "OperatorExpr":
        """Canonical form of a raw product ``:f1 f2 ... fk:`` of derivative
        generators, given as (name, derivative-order) pairs."""
        terms = {(): Fraction(1)}
        for name, d in reversed(list(factors)):
            if name not in self.index:
                raise KeyError(f"unknown generator {name!r}")
            terms = self._left_terms((self.index[name], int(d)), terms)
        return OperatorExpr(self, terms)

    # ----- gradings -------------------------------------------------------------

    def factor_key(self, f):
        return (f[0], -f[1])

    def _degrees(self, m):
        cache = self._caches["deg"]
        hit = cache.get(m)
        if hit is None:
            w = sum((self.generators[g].weight + d for g, d in m), Fraction(0))
            # plain ints keep the hot comparisons cheap
            w = int(w) if w.denominator == 1 else w
            hit = cache[m] = (w, sum(self.generators[g].fermion for g, _ in m))
        return hit

    def mono_weight(self, m) -> Fraction:
        return self._degrees(m)[0]

    def mono_fermion(self, m) -> int:
        return self._degrees(m)[1]

    def mono_bidegree(self, m) -> BiDegree:
        return BiDegree(self.mono_fermion(m), self.mono_weight(m))

    def is_canonical(self, m) -> bool:
        for a, b in zip(m, m[1:]):
            ka, kb = self.factor_key(a), self.factor_key(b)
            if ka > kb or (ka == kb and self.generators[a[0]].odd):
                return False
        return True

    def min_weight(self, fermion: int):
        """Lowest weight of any monomial with the given fermion degree
        (``None`` when the sector is empty)."""
        if self._minw is None:
            best = {0: Fraction(0)}
            for g in self.generators:
                if not g.odd:
                    continue
                new = dict(best)
                for k in range(1, 41):
                    cost = k * g.weight + Fraction(k * (k - 1), 2)
                    for p, w in best.items():
                        q = p + k * g.fermion
                        if abs(q) > 80:
                            continue
                        if q not in new or w + cost < new[q]:
                            new[q] = w + cost
                best = new
            self._minw = {p: int(w) if w.denominator == 1 else w for p, w in best.items()}
        return self._minw.get(fermion)

    def _vanishes(self, weight, fermion) -> bool:
        lo = self.min_weight(fermion)
        return lo is None or weight < lo

    # ----- OPE of two derivative factors ------------------------------------------

    def _gen_ope(self, i: int, j: int) -> dict:
        key = (i, j)
        if key in self._ope:
            return self._ope[key]
        if self.complete:
            return {}
        raise OPEError(f"missing OPE entry for ({self.generators[i].name}, {self.generators[j].name})")

    def factor_ope(self, f, h) -> dict:
        """{j: terms} for (d^a g)_(j) (d^b g'), j >= 0."""
        key = (f, h)
        cache = self._caches["fope"]
        if key in cache:
            return cache[key]
        (gi, a), (gj, b) = f, h
        base = self._gen_ope(gi, gj)
        out: dict = {}
        if base:
            top = max(base) + a + b
            for j in range(top + 1):
                # (d^a g)_(j) = (-1)^a j(j-1)...(j-a+1) g_(j-a)
                fa = falling(j, a)
                if not fa:
                    continue
                m = j - a
                acc: dict = {}
                # g_(m) d^b g' = sum_t C(b,t) m^(t) d^{b-t} (g_(m-t) g')
                for t in range(b + 1):
                    ft = falling(m, t)
                    if not ft or (m - t) not in base:
                        continue
                    _addto(acc, self._deriv_terms(base[m - t], b - t), binom(b, t) * ft)
                if acc:
                    out[j] = {k: v * ((-1) ** a * fa) for k, v in acc.items()}
        cache[key] = out
        return out

    # ----- derivative -----------------------------------------------------------

    def _deriv_mono(self, m) -> dict:
        cache = self._caches["deriv"]
        if m in cache:
            return cache[m]
        if not m:
            out = {}
        else:
            f, rest = m[0], m[1:]
            out = self._left_terms((f[0], f[1] + 1), {rest: Fraction(1)})
            if rest:
                out = _addto(dict(out), self._left_terms(f, self._deriv_mono(rest)))
        cache[m] = out
        return out

    def _deriv_terms(self, terms: dict, k: int = 1) -> dict:
        for _ in range(k):
            acc: dict = {}
            for m, c in terms.items():
                _addto(acc, self._deriv_mono(m), c)
            terms = acc
        return terms

    # ----- left multiplication by a single factor (creation) -----------------------

    def _left_terms(self, f, terms: dict) -> dict:
        acc: dict = {}
        for m, c in terms.items():
            _addto(acc, self._left(f, m), c)
        return acc

    def _left(self, f, x) -> dict:
        """Canonical form of :f x: for a derivative factor f and canonical x."""
        key = (f, x)
        cache = self._caches["left"]
        if key in cache:
            return cache[key]
        if not x:
            out = {(f,): Fraction(1)}
        else:
            h, rest = x[0], x[1:]
            kf, kh = self.factor_key(f), self.factor_key(h)
            godd = self.generators[f[0]].odd
            if kf < kh or (kf == kh and not godd):
                out = {(f,) + x: Fraction(1)}
            elif kf == kh:
                # f odd: :f f R: = 1/2 sum_j (-1)^j (f_(j) f)_(-2-j) R
                out = {}
                for j, y in self.factor_ope(f, f).items():
                    _addto(out, self._terms_prod(y, -2 - j, {rest: 1}), Fraction((-1) ** j, 2))
            else:
                sign = -1 if (godd and self.generators[h[0]].odd) else 1
                out = {}
                _addto(out, self._left_terms(h, self._left(f, rest)), sign)
                for j, y in self.factor_ope(f, h).items():
                    _addto(out, self._terms_prod(y, -2 - j, {rest: 1}), (-1) ** j)
        cache[key] = out
        return out

    # ----- circle products ------------------------------------------------------

    def _gen_prod(self, f, n: int, x) -> dict:
        """f_(n) x for a derivative factor f and canonical monomial x."""
        key = (f, n, x)
        cache = self._caches["gen"]
        if key in cache:
            return cache[key]
        g, a = f
        gen = self.generators[g]
        if n < 0:
            k = -n - 1
            out = self._left((g, a + k), x)
            if k > 1:
                out = {m: c / factorial(k) for m, c in out.items()}
        elif self._vanishes(self._gw[g] + a + self.mono_weight(x) - n - 1,
                            gen.fermion + self.mono_fermion(x)):
            out = {}
        elif a > 0:
            fa = falling(n, a)
            out = {}
            if fa:
                out = {m: c * ((-1) ** a * fa) for m, c in self._gen_prod((g, 0), n - a, x).items()}
        elif not x:
            out = {}
        else:
            h, rest = x[0], x[1:]
            sign = -1 if (gen.odd and self.generators[h[0]].odd) else 1
            out = {}
            _addto(out, self._left_terms(h, self._gen_prod(f, n, rest)), sign)
            for j, y in self.factor_ope(f, h).items():
                if j > n:
                    continue
                _addto(out, self._terms_prod(y, n - 1 - j, {rest: 1}), binom(n, j))
        cache[key] = out
        return out

    def _mono_prod(self, m, n: int, x) -> dict:
        """m_(n) x for canonical monomials m and x."""
        if not m:
            return {x: Fraction(1)} if n == -1 else {}
        if len(m) == 1:
            return self._gen_prod(m[0], n, x)
        key = (m, n, x)
        cache = self._caches["mono"]
        if key in cache:
            return cache[key]
        wx, px = self.mono_weight(x), self.mono_fermion(x)
        if self._vanishes(self.mono_weight(m) + wx - n - 1, self.mono_fermion(m) + px):
            cache[key] = {}
            return {}
        f, rest = m[0], m[1:]
        gf = self.generators[f[0]]
        wr, pr = self.mono_weight(rest), self.mono_fermion(rest)
        sign = -1 if (gf.odd and pr % 2) else 1
        out: dict = {}
        # sum_j f_(-1-j) (rest_(n+j) x)
        j = 0
        while True:
            if n + j >= 0 and self._vanishes(wr + wx - n - j - 1, pr + px):
                break
            inner = self._mono_prod(rest, n + j, x)
            for y, c in inner.items():
                _addto(out, self._gen_prod(f, -1 - j, y), c)
            j += 1
        # sign * sum_j rest_(n-1-j) (f_(j) x)
        j = 0
        wf = self._gw[f[0]] + f[1]
        while not self._vanishes(wf + wx - j - 1, gf.fermion + px):
            inner = self._gen_prod(f, j, x)
            for y, c in inner.items():
                _addto(out, self._mono_prod(rest, n - 1 - j, y), sign * c)
            j += 1
        cache[key] = out
        return out

    def _terms_prod(self, a: dict, n: int, b: dict) -> dict:
        out: dict = {}
        for m, c in a.items():
            for x, d in b.items():
                _addto(out, self._mono_prod(m, n, x), c * d)
        return out

    # ----- JSON -----------------------------------------------------------------

    def terms_to_json(self, terms: dict) -> list:
        out = []
        for m in sorted(terms, key=self.sort_key):
            c = terms[m]
            if isinstance(c, Poly):
                coeff = {str(d): format_rational(v) for d, v in sorted(c.coeffs.items())}
            else:
                coeff = format_rational(c)
            out.append({
                "coeff": coeff,
                "factors": [{"gen": self.generators[g].name, "derivs": d} for g, d in m],
            })
        return out

    def terms_from_json(self, data: list) -> dict:
        terms: dict = {}
        for item in data:
            c = item["coeff"]
            if isinstance(c, dict):
                c = Poly({int(d): Fraction(v) for d, v in c.items()})
                if c.is_constant():
                    c = c.constant()
            else:
                c = to_rational(c)
            raw = [(f["gen"], int(f["derivs"])) for f in item["factors"]]
            _addto(terms, self.normal_order(raw).terms, c)
        return terms

    def sort_key(self, m):
        return (len(m), tuple(self.factor_key(f) for f in m))

    def __repr__(self):
        names = ",".join(g.name for g in self.generators)
        return f"Algebra({self.name}; {names})"


class OperatorExpr:
    """Immutable canonical sum of normal-ordered monomials."""

    __slots__ = ("algebra", "terms", "_hash")

    def __init__(self, algebra: Algebra, terms: dict):
        self.algebra = algebra
        self.terms = {m: c for m, c in terms.items() if c}
        self._hash = None

    # arithmetic
    def _check(self, other):
        if not isinstance(other, OperatorExpr):
            raise TypeError("expected OperatorExpr")
        if other.algebra is not self.algebra:
            raise ValueError("operators belong to different algebras")

    def __add__(self, other):
        self._check(other)
        return OperatorExpr(self.algebra, _addto(dict(self.terms), other.terms))

    def __sub__(self, other):
        self._check(other)
        return OperatorExpr(self.algebra, _addto(dict(self.terms), other.terms, -1))

    def __neg__(self):
        return OperatorExpr(self.algebra, {m: -c for m, c in self.terms.items()})

    def __mul__(self, s):
        if isinstance(s, OperatorExpr):
            return NotImplemented
        return OperatorExpr(self.algebra, {m: c * s for m, c in self.terms.items()})

    __rmul__ = __mul__

    def __eq__(self, other):
        if isinstance(other, OperatorExpr):
            return self.algebra is other.algebra and self.terms == other.terms
        if other == 0:
            return not self.terms
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(frozenset(self.terms.items()))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    # structure
    def circle(self, other: "OperatorExpr", n: int) -> "OperatorExpr":
        """The n-th circle product self o_n other."""
        self._check(other)
        return OperatorExpr(self.algebra, self.algebra._terms_prod(self.terms, n, other.terms))

    def derivative(self, k: int = 1) -> "OperatorExpr":
        return OperatorExpr(self.algebra, self.algebra._deriv_terms(self.terms, k))

    def ope(self, other: "OperatorExpr") -> dict:
        """{n: self o_n other} for every nonzero polar coefficient n >= 0."""
        self._check(other)
        alg = self.algebra
        out = {}
        for m, c in self.terms.items():
            for x, d in other.terms.items():
                n = 0
                w = alg.mono_weight(m) + alg.mono_weight(x)
                p = alg.mono_fermion(m) + alg.mono_fermion(x)
                while not alg._vanishes(w - n - 1, p):
                    r = alg._mono_prod(m, n, x)
                    if r:
                        out.setdefault(n, {})
                        _addto(out[n], r, c * d)
                    n += 1
        return {n: OperatorExpr(alg, t) for n, t in sorted(out.items()) if t}

    def bidegrees(self) -> set:
        return {self.algebra.mono_bidegree(m) for m in self.terms}

    @property
    def bidegree(self) -> BiDegree:
        degs = self.bidegrees()
        if len(degs) != 1:
            raise HomogeneityError(f"expression is not homogeneous: {sorted(degs)}")
        return next(iter(degs))

    @property
    def fermion(self) -> int:
        return self.bidegree.fermion

    @property
    def weight(self) -> Fraction:
        return self.bidegree.weight

    def is_homogeneous(self) -> bool:
        return len(self.bidegrees()) <= 1

    def coefficient(self, m) -> object:
        return self.terms.get(m, 0)

    def substitute(self, value) -> "OperatorExpr":
        """Evaluate a symbolic central-charge parameter at ``value``."""
        return OperatorExpr(self.algebra, {
            m: (c.evaluate(value) if isinstance(c, Poly) else c) for m, c in self.terms.items()})

    # output
    def to_json(self) -> list:
        return self.algebra.terms_to_json(self.terms)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)

    @classmethod
    def from_json(cls, algebra: Algebra, data) -> "OperatorExpr":
        if isinstance(data, str):
            data = json.loads(data)
        return cls(algebra, algebra.terms_from_json(data))

    def __str__(self):
        from .grammar import format_expr
        return format_expr(self)

    def __repr__(self):
        return f"OperatorExpr({self})"
