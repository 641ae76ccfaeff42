"""Truncated q-series over the rationals, Euler products, j(q), characters
and signature series of the Fock-type modules, Euler-Poincare constant
terms, and root multiplicities for rank-2 Lorentzian lattices.

A :class:`QSeries` stores q^v (a_0 + a_1 q + ...) together with an absolute
precision: coefficients of q^e are exact for e < prec and unknown beyond.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .core import colored_partition_count, format_rational, to_rational
from .linalg import SparseMatrix, exact_signature

__all__ = [
    "QSeries",
    "TruncationError",
    "phi_series",
    "lambda_series",
    "e4_series",
    "j_series",
    "j_series_convolution",
    "boson_character",
    "boson_signature",
    "virasoro_vacuum_character",
    "ghost_character",
    "ghost_relative_block",
    "ghost_signature_block",
    "module_character",
    "module_signature_series",
    "euler_poincare_dim",
    "euler_poincare_signature",
    "LatticeSpec",
    "II11",
    "monster_root_multiplicity",
    "monster_table",
    "predicted_slice_dim",
]


class TruncationError(ValueError):
    """A coefficient beyond the known precision was requested."""


class QSeries:
    __slots__ = ("val", "coeffs", "prec")

    def __init__(self, coeffs, val=0, prec=None):
        self.val = Fraction(val)
        coeffs = [Fraction(c) for c in coeffs]
        if prec is None:
            prec = self.val + len(coeffs)
        self.prec = Fraction(prec)
        n = self.prec - self.val
        if n < 0:
            coeffs = []
        else:
            coeffs = coeffs[:int(n)]
        self.coeffs = coeffs
        self._normalize()

    def _normalize(self):
        i = 0
        while i < len(self.coeffs) and self.coeffs[i] == 0:
            i += 1
        if i:
            self.coeffs = self.coeffs[i:]
            self.val += i

    @classmethod
    def one(cls, prec):
        return cls([1], 0, prec)

    @classmethod
    def monomial(cls, e, prec, c=1):
        return cls([c], e, prec)

    def __getitem__(self, e):
        e = Fraction(e)
        if e >= self.prec:
            raise TruncationError(f"coefficient of q^{e} unknown (precision {self.prec})")
        k = e - self.val
        if k < 0 or k.denominator != 1 or k >= len(self.coeffs):
            return Fraction(0)
        return self.coeffs[int(k)]

    coefficient = __getitem__

    def _aligned(self, other):
        if (self.val - other.val).denominator != 1:
            raise ValueError("series exponents differ by a non-integer")

    def __add__(self, other):
        if not isinstance(other, QSeries):
            other = QSeries([to_rational(other)], 0, self.prec)
        if self.coeffs and other.coeffs:
            self._aligned(other)
        prec = min(self.prec, other.prec)
        v = min(self.val, other.val) if (self.coeffs and other.coeffs) else (
            self.val if self.coeffs else other.val)
        n = prec - v
        if n <= 0:
            return QSeries([], prec, prec)
        out = [self[v + i] + other[v + i] for i in range(int(n))]
        return QSeries(out, v, prec)

    __radd__ = __add__

    def __neg__(self):
        return QSeries([-c for c in self.coeffs], self.val, self.prec)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if not isinstance(other, QSeries):
            s = to_rational(other)
            return QSeries([c * s for c in self.coeffs], self.val, self.prec)
        if not self.coeffs or not other.coeffs:
            prec = min(self.prec + other.val, other.prec + self.val)
            return QSeries([], prec, prec)
        prec = min(self.prec + other.val, other.prec + self.val)
        v = self.val + other.val
        n = int(prec - v)
        out = [Fraction(0)] * max(n, 0)
        for i, a in enumerate(self.coeffs[:n]):
            if not a:
                continue
            for j, b in enumerate(other.coeffs[:n - i]):
                out[i + j] += a * b
        return QSeries(out, v, prec)

    __rmul__ = __mul__

    def inverse(self):
        if not self.coeffs:
            raise ZeroDivisionError("series is zero to its precision")
        n = len(self.coeffs) if self.prec - self.val == len(self.coeffs) else int(self.prec - self.val)
        a = self.coeffs + [Fraction(0)] * (n - len(self.coeffs))
        inv = [Fraction(0)] * n
        inv[0] = 1 / a[0]
        for k in range(1, n):
            s = sum(a[i] * inv[k - i] for i in range(1, k + 1))
            inv[k] = -s / a[0]
        return QSeries(inv, -self.val, -self.val + n)

    def __truediv__(self, other):
        if isinstance(other, QSeries):
            return self * other.inverse()
        return self * (1 / to_rational(other))

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = QSeries.one(self.prec - self.val) if k == 0 else None
        base = self
        result = None
        while k:
            if k & 1:
                result = base if result is None else result * base
            k >>= 1
            if k:
                base = base * base
        return result if result is not None else out

    def shift(self, e):
        """Multiply by q^e."""
        return QSeries(self.coeffs, self.val + e, self.prec + e)

    def truncate(self, prec):
        return QSeries(self.coeffs, self.val, min(self.prec, Fraction(prec)))

    def constant_term(self):
        return self[0]

    def items(self):
        for i, c in enumerate(self.coeffs):
            if c:
                yield self.val + i, c

    def __eq__(self, other):
        if not isinstance(other, QSeries):
            return NotImplemented
        prec = min(self.prec, other.prec)
        lo = min(self.val, other.val)
        return all(self[lo + i] == other[lo + i] for i in range(int(prec - lo)))

    def __repr__(self):
        terms = []
        for e, c in self.items():
            terms.append(f"{format_rational(c)}*q^{format_rational(e)}")
        return " + ".join(terms + [f"O(q^{format_rational(self.prec)})"])


# --------------------------------------------------------------------------
# Euler products and the j-function
# --------------------------------------------------------------------------


def _product(factors_exps, order):
    """prod over (k, sign, power) of (1 + sign q^k)^power, to precision order."""
    out = [Fraction(0)] * order
    out[0] = Fraction(1)
    for k, sign, power in factors_exps:
        if k >= order or k <= 0:
            raise ValueError("factor exponents must lie in 1..order-1")
        for _ in range(power):
            for i in range(order - 1, k - 1, -1):
                out[i] += sign * out[i - k]
    return QSeries(out, 0, order)


def phi_series(order: int) -> QSeries:
    """phi(q) = prod_{n>0} (1 - q^n)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return _product([(n, -1, 1) for n in range(1, order)], order)


def lambda_series(order: int) -> QSeries:
    """lambda(q) = prod_{n>0} (1 - q^n)(1 + q^n)."""
    if order < 1:
        raise ValueError("order must be >= 1")
    return _product([(n, -1, 1) for n in range(1, order)] + [(n, 1, 1) for n in range(1, order)],
                    order)


def _plus_product(order, power=1):
    """prod_{n>0} (1 + q^n)^power."""
    return _product([(n, 1, power) for n in range(1, order)], order)


def _sigma3(n):
    return sum(d ** 3 for d in range(1, n + 1) if n % d == 0)


def e4_series(order: int) -> QSeries:
    return QSeries([1] + [240 * _sigma3(n) for n in range(1, order)], 0, order)


def j_series(order: int = 64, minus_744: bool = True) -> QSeries:
    """j(q) = E4(q)^3 / Delta(q), Delta = q phi(q)^24, known for exponents
    below ``order``."""
    n = order + 1
    delta = (phi_series(n) ** 24).shift(1)
    j = (e4_series(n) ** 3) * delta.inverse()
    if minus_744:
        j = j - QSeries([744], 0, j.prec)
    return j.truncate(order)


def j_series_convolution(order: int = 64, minus_744: bool = True) -> QSeries:
    """Second route: E4^3 times 1/Delta = q^-1 sum p_24(n) q^n, with p_24 from
    the divisor-sum recurrence rather than series inversion."""
    n = order + 1
    inv_delta = QSeries([colored_partition_count(k, 24) for k in range(n + 1)], -1, n)
    j = (e4_series(n + 1) ** 3) * inv_delta
    if minus_744:
        j = j - QSeries([744], 0, j.prec)
    return j.truncate(order)


# --------------------------------------------------------------------------
# characters and signature series
# --------------------------------------------------------------------------


def boson_character(k, l, norm2, order) -> QSeries:
    """q^{alpha.alpha/2} phi^{-(k+l)}; ``order`` counts levels above the vacuum."""
    return (phi_series(order) ** -(k + l)).shift(norm2)


def boson_signature(k, l, norm2, order) -> QSeries:
    """q^{alpha.alpha/2} phi^{-k} prod (1 + q^n)^{-l}."""
    s = phi_series(order) ** -k * _plus_product(order, l).inverse() if k else \
        _plus_product(order, l).inverse()
    return s.shift(norm2)


def virasoro_vacuum_character(order) -> QSeries:
    """prod_{n>=2} (1 - q^n)^{-1}."""
    return _product([(n, -1, 1) for n in range(2, order)], order).inverse()


def ghost_character(order, relative=False) -> dict:
    """{p: QSeries} with the graded dimensions of the ghost Fock space in
    fermion degree p, read off prod_{k>=2} (1 + y^{-1} q^k) prod_{k>=-1}
    (1 + y q^k).  The c(-2) factor (q^0) is dropped when ``relative``.
    Coefficients are exact for weights below ``order``."""
    factors = [(-1, k) for k in range(2, order + 1)]
    factors += [(1, k) for k in range(-1, order + 1) if not (relative and k == 0)]
    # c(-1) is the only negative factor and is applied first, so partial
    # weights never exceed the final one
    factors.sort(key=lambda f: f[1])
    counts = {(0, 0): 1}
    for dy, dq in factors:
        out = dict(counts)
        for (p, w), c in counts.items():
            if w + dq < order:
                out[(p + dy, w + dq)] = out.get((p + dy, w + dq), 0) + c
        counts = out
    by_p = {}
    for (p, w), c in counts.items():
        by_p.setdefault(p, {})[w] = c
    result = {}
    for p, ws in by_p.items():
        lo = min(ws)
        result[p] = QSeries([ws.get(w, 0) for w in range(lo, order)], lo, order)
    return result


def ghost_relative_block(order) -> QSeries:
    """sum_p (-1)^p ch of the b(1)-kernel of the ghost space: -q^{-1} phi^2."""
    return -(phi_series(order) ** 2).shift(-1)


def ghost_signature_block(order) -> QSeries:
    """Signature series of the ghost form on the b(1)-kernel: q^{-1} lambda."""
    return lambda_series(order).shift(-1)


def module_character(module, order: int, fermion=None) -> QSeries:
    """Closed-form character of a tensor module (boson, Virasoro vacuum and
    optionally one ghost factor, then restricted to fermion degree
    ``fermion``).  Exponents below ``min weight + order`` are exact for
    matter-only modules."""
    series = QSeries.one(order)
    ghost = None
    for f in module.factors:
        if f.family == "boson":
            series = series * boson_character(f.k, f.l, f.norm2, order)
        elif f.family == "virasoro":
            series = series * virasoro_vacuum_character(order)
        elif f.family == "ghost":
            ghost = f
        else:
            raise ValueError(f"unsupported family {f.family!r}")
    if ghost is None:
        if fermion not in (None, 0):
            return QSeries([], 0, series.prec)
        return series
    blocks = ghost_character(order + 2)
    return series * blocks.get(fermion, QSeries([], 0, order))


def module_signature_series(module, order: int) -> QSeries:
    """Signature series of the standard form on a matter module (boson and
    ghost-relative factors only; the Virasoro vacuum form depends on kappa
    and is not given in closed form)."""
    series = QSeries.one(order)
    for f in module.factors:
        if f.family == "boson":
            series = series * boson_signature(f.k, f.l, f.norm2, order)
        elif f.family == "ghost":
            series = series * ghost_signature_block(order)
        else:
            raise ValueError(f"no closed-form signature for family {f.family!r}")
    return series


def _constant(blocks):
    if not blocks:
        return Fraction(1)
    prod = blocks[0]
    for b in blocks[1:]:
        prod = prod * b
    return prod[0]


def euler_poincare_dim(blocks) -> Fraction:
    """Constant term of the product of character blocks."""
    return _constant(list(blocks))


def euler_poincare_signature(blocks) -> Fraction:
    """Constant term of the product of signature blocks."""
    return _constant(list(blocks))


# --------------------------------------------------------------------------
# lattices and root multiplicities
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class LatticeSpec:
    gram: tuple

    def __post_init__(self):
        g = tuple(tuple(int(x) for x in row) for row in self.gram)
        object.__setattr__(self, "gram", g)
        r = len(g)
        if any(len(row) != r for row in g):
            raise ValueError("Gram matrix must be square")
        if any(g[i][j] != g[j][i] for i in range(r) for j in range(r)):
            raise ValueError("Gram matrix must be symmetric")
        if any(g[i][i] % 2 for i in range(r)):
            raise ValueError("lattice must be even (even diagonal)")
        pos, neg, null = exact_signature(SparseMatrix.from_dense(g))
        if (pos, neg, null) != (r - 1, 1, 0):
            raise ValueError(f"Gram matrix has signature {(pos, neg, null)}, expected ({r - 1}, 1, 0)")

    @property
    def rank(self):
        return len(self.gram)

    def norm2_half(self, v) -> Fraction:
        """alpha.alpha / 2."""
        g = self.gram
        s = sum(v[i] * g[i][j] * v[j] for i in range(self.rank) for j in range(self.rank))
        return Fraction(s, 2)


II11 = LatticeSpec(((0, -1), (-1, 0)))


def monster_root_multiplicity(lattice: LatticeSpec, alpha, j=None) -> int:
    """Res_q q^{alpha.alpha/2 - 1}(j(q) - 744), i.e. the coefficient of
    q^{-alpha.alpha/2} in j - 744."""
    alpha = tuple(int(x) for x in alpha)
    if len(alpha) != lattice.rank:
        raise ValueError("vector length does not match the lattice rank")
    if not any(alpha):
        raise ValueError("alpha must be nonzero")
    e = -lattice.norm2_half(alpha)
    if j is None:
        j = j_series(max(64, int(e) + 2))
    c = j[e]
    if c.denominator != 1:
        raise ArithmeticError("non-integral coefficient")
    return int(c)


def monster_table(lattice: LatticeSpec, ms, ns, order=64, check_routes=True):
    """Rows (m, n, alpha.alpha/2, multiplicity) for alpha = (m, n) != 0."""
    j = j_series(order)
    if check_routes:
        j2 = j_series_convolution(order)
        if j != j2:
            raise ArithmeticError("the two j-function routes disagree")
    rows = []
    for m in ms:
        for n in ns:
            if m == 0 and n == 0:
                continue
            half = lattice.norm2_half((m, n))
            mult = monster_root_multiplicity(lattice, (m, n), j)
            rows.append((m, n, half, mult))
    return rows


def predicted_slice_dim(module, p: int, w) -> int:
    """dim of the (p, w) slice of a tensor module read off the closed-form
    characters (ghost factor by fermion degree times matter characters)."""
    w = Fraction(w)
    ghost = any(f.family == "ghost" for f in module.factors)
    matter = [f for f in module.factors if f.family != "ghost"]
    m0 = sum((f.norm2 if f.family == "boson" else Fraction(0) for f in matter), Fraction(0))
    levels = w + (1 if ghost else 0) - m0
    if levels < 0 or (not ghost and p != 0):
        return 0
    n = int(levels) + 1
    series = QSeries([1], m0, m0 + n)
    for f in matter:
        if f.family == "boson":
            series = series * boson_character(f.k, f.l, 0, n)
        elif f.family == "virasoro":
            series = series * virasoro_vacuum_character(n)
        else:
            raise ValueError(f"unsupported family {f.family!r}")
    if not ghost:
        return int(series[w])
    block = ghost_character(int(w - m0) + 2).get(p)
    if block is None:
        return 0
    total = Fraction(0)
    for gw, c in block.items():
        e = w - gw
        if e >= m0:
            total += c * series[e]
    return int(total)
