"""Sparse matrices over the rationals with exact rank, kernels and inertia.

Vectors are plain dicts ``{index: coefficient}`` without stored zeros.
Rank computations on large matrices go through a fraction-free integer
elimination; kernels, coordinates and signatures use Fractions.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd, lcm

__all__ = [
    "SparseMatrix",
    "RowSpace",
    "exact_rank",
    "exact_signature",
    "kernel_basis",
    "vec_add",
    "vec_scale",
]


def vec_add(a: dict, b: dict, scale=1) -> dict:
    """a + scale*b as a new vector."""
    out = dict(a)
    for k, v in b.items():
        nv = out.get(k, 0) + scale * v
        if nv:
            out[k] = nv
        else:
            out.pop(k, None)
    return out


def vec_scale(a: dict, s) -> dict:
    if not s:
        return {}
    return {k: v * s for k, v in a.items()}


class SparseMatrix:
    """A rows x cols matrix stored as ``{(i, j): value}`` with no zeros."""

    __slots__ = ("nrows", "ncols", "entries")

    def __init__(self, nrows: int, ncols: int, entries=None):
        self.nrows = nrows
        self.ncols = ncols
        self.entries = {}
        for (i, j), v in (entries or {}).items():
            if not (0 <= i < nrows and 0 <= j < ncols):
                raise IndexError(f"entry {(i, j)} outside {nrows}x{ncols}")
            if v:
                self.entries[(i, j)] = v

    @classmethod
    def from_dense(cls, rows) -> "SparseMatrix":
        rows = [list(r) for r in rows]
        ncols = len(rows[0]) if rows else 0
        ent = {}
        for i, r in enumerate(rows):
            if len(r) != ncols:
                raise ValueError("ragged rows")
            for j, v in enumerate(r):
                if v:
                    ent[(i, j)] = Fraction(v)
        return cls(len(rows), ncols, ent)

    @classmethod
    def from_columns(cls, nrows: int, columns: list[dict]) -> "SparseMatrix":
        ent = {}
        for j, col in enumerate(columns):
            for i, v in col.items():
                ent[(i, j)] = v
        return cls(nrows, len(columns), ent)

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(n, n, {(i, i): Fraction(1) for i in range(n)})

    @classmethod
    def diagonal(cls, values) -> "SparseMatrix":
        values = list(values)
        return cls(len(values), len(values), {(i, i): Fraction(v) for i, v in enumerate(values)})

    @property
    def shape(self):
        return (self.nrows, self.ncols)

    def rows(self) -> list[dict]:
        out = [dict() for _ in range(self.nrows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def columns(self) -> list[dict]:
        out = [dict() for _ in range(self.ncols)]
        for (i, j), v in self.entries.items():
            out[j][i] = v
        return out

    def to_dense(self) -> list[list]:
        out = [[Fraction(0)] * self.ncols for _ in range(self.nrows)]
        for (i, j), v in self.entries.items():
            out[i][j] = v
        return out

    def transpose(self) -> "SparseMatrix":
        return SparseMatrix(self.ncols, self.nrows, {(j, i): v for (i, j), v in self.entries.items()})

    def __matmul__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.ncols != other.nrows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        ocols = other.rows()
        out: dict = {}
        for (i, k), v in self.entries.items():
            for j, w in ocols[k].items():
                out[(i, j)] = out.get((i, j), 0) + v * w
        return SparseMatrix(self.nrows, other.ncols, out)

    def apply(self, vec: dict) -> dict:
        """Matrix times column vector."""
        cols = self._colcache()
        out: dict = {}
        for j, x in vec.items():
            for i, v in cols.get(j, {}).items():
                out[i] = out.get(i, 0) + v * x
        return {i: v for i, v in out.items() if v}

    def _colcache(self):
        cols: dict = {}
        for (i, j), v in self.entries.items():
            cols.setdefault(j, {})[i] = v
        return cols

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) - v
        return SparseMatrix(self.nrows, self.ncols, out)

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        if self.shape != other.shape:
            raise ValueError("shape mismatch")
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0) + v
        return SparseMatrix(self.nrows, self.ncols, out)

    def scale(self, s) -> "SparseMatrix":
        return SparseMatrix(self.nrows, self.ncols, {k: v * s for k, v in self.entries.items()})

    def is_zero(self) -> bool:
        return not self.entries

    def is_symmetric(self) -> bool:
        if self.nrows != self.ncols:
            return False
        return all(self.entries.get((j, i), 0) == v for (i, j), v in self.entries.items())

    def __eq__(self, other):
        return isinstance(other, SparseMatrix) and self.shape == other.shape and self.entries == other.entries

    def __repr__(self):
        return f"SparseMatrix({self.nrows}x{self.ncols}, nnz={len(self.entries)})"

    def to_triplets(self) -> dict:
        """Sparse triplet serialisation with exact ``"p/q"`` strings."""
        from .core import format_rational
        return {
            "nrows": self.nrows,
            "ncols": self.ncols,
            "entries": [[i, j, format_rational(v)] for (i, j), v in sorted(self.entries.items())],
        }

    @classmethod
    def from_triplets(cls, data: dict) -> "SparseMatrix":
        return cls(data["nrows"], data["ncols"],
                   {(i, j): Fraction(v) for i, j, v in data["entries"]})


def _integer_row(row: dict) -> dict:
    den = 1
    for v in row.values():
        if isinstance(v, Fraction):
            den = lcm(den, v.denominator)
    out = {k: int(v * den) for k, v in row.items()}
    return _primitive(out)


def _primitive(row: dict) -> dict:
    g = 0
    for v in row.values():
        g = gcd(g, v)
        if g == 1:
            return row
    if g > 1:
        return {k: v // g for k, v in row.items()}
    return row


def _integer_rank(rows: list[dict]) -> int:
    """Rank of a list of sparse rows by fraction-free semi-echelon reduction.

    Each pivot row is kept primitive (content 1); a new row is reduced on its
    leading column until it either vanishes or introduces a new pivot.
    """
    pivots: dict[int, dict] = {}
    rows = sorted((r for r in rows if r), key=len)
    for row in rows:
        row = _integer_row(row)
        while row:
            c = min(row)
            piv = pivots.get(c)
            if piv is None:
                pivots[c] = row
                break
            a, b = piv[c], row[c]
            g = gcd(a, b)
            a //= g
            b //= g
            new = {k: v * a for k, v in row.items()}
            for k, v in piv.items():
                nv = new.get(k, 0) - b * v
                if nv:
                    new[k] = nv
                else:
                    new.pop(k, None)
            row = _primitive(new)
    return len(pivots)


def exact_rank(m: SparseMatrix) -> int:
    """Rank over Q.  Eliminates along the shorter dimension."""
    if not m.entries:
        return 0
    rows = m.rows() if m.nrows <= m.ncols else m.columns()
    return _integer_rank(rows)


def rank_of_vectors(vectors: list[dict]) -> int:
    return _integer_rank([v for v in vectors if v])


class RowSpace:
    """Incrementally built span of sparse vectors over Q.

    Keeps a semi-echelon basis (pivot entry 1, all other entries of a pivot
    row lie in later columns), optionally recording how each basis row is
    expressed through the vectors that were added.
    """

    def __init__(self, track: bool = False):
        self.pivots: dict = {}
        self.track = track
        self.combos: dict = {}
        self.count = 0

    def __len__(self):
        return len(self.pivots)

    def reduce(self, vec: dict, combo: dict | None = None):
        vec = {k: Fraction(v) for k, v in vec.items() if v}
        combo = dict(combo) if combo is not None else ({} if self.track else None)
        while vec:
            c = min(vec)
            piv = self.pivots.get(c)
            if piv is None:
                break
            s = vec[c]
            vec = vec_add(vec, piv, -s)
            if combo is not None:
                combo = vec_add(combo, self.combos[c], -s)
        return vec, combo

    def add(self, vec: dict) -> bool:
        """Add ``vec``; return True if it enlarged the span."""
        idx = self.count
        self.count += 1
        combo0 = {idx: Fraction(1)} if self.track else None
        rem, combo = self.reduce(vec, combo0)
        if not rem:
            return False
        c = min(rem)
        s = rem[c]
        self.pivots[c] = {k: v / s for k, v in rem.items()}
        if self.track:
            self.combos[c] = {k: v / s for k, v in combo.items()}
        return True

    def contains(self, vec: dict) -> bool:
        return not self.reduce(vec)[0]

    def express(self, vec: dict) -> dict | None:
        """Coefficients of ``vec`` in terms of the added vectors, or None."""
        if not self.track:
            raise ValueError("RowSpace built without tracking")
        rem, combo = self.reduce(vec, {})
        if rem:
            return None
        return {k: -v for k, v in combo.items() if v}


def _rref(rows: list[dict]):
    """Fully reduced row echelon form; returns (pivot_col -> row)."""
    space = RowSpace()
    for r in rows:
        space.add(r)
    piv = space.pivots
    for c in sorted(piv, reverse=True):
        row = piv[c]
        for c2 in list(row):
            if c2 != c and c2 in piv:
                row = vec_add(row, piv[c2], -row[c2])
        piv[c] = row
    return piv


def kernel_basis(m: SparseMatrix) -> list[dict]:
    """Basis of the right null space, one vector per free column."""
    piv = _rref(m.rows())
    free = [j for j in range(m.ncols) if j not in piv]
    by_free: dict = {j: {j: Fraction(1)} for j in free}
    for c, row in piv.items():
        for j, v in row.items():
            if j != c:
                by_free[j][c] = -v
    return [by_free[j] for j in free]


def exact_signature(g: SparseMatrix) -> tuple[int, int, int]:
    """Inertia (positive, negative, null) of a symmetric rational matrix by
    symmetric Gaussian elimination (congruence)."""
    if not g.is_symmetric():
        raise ValueError("signature requires a symmetric matrix")
    n = g.nrows
    a = [dict() for _ in range(n)]
    for (i, j), v in g.entries.items():
        a[i][j] = Fraction(v)
    alive = set(range(n))
    pos = neg = 0
    while alive:
        k = next((i for i in sorted(alive) if a[i].get(i)), None)
        if k is None:
            pair = None
            for i in sorted(alive):
                for j, v in a[i].items():
                    if j != i and j in alive and v:
                        pair = (i, j)
                        break
                if pair:
                    break
            if pair is None:
                break
            i, j = pair
            # congruence e_i -> e_i + e_j; the new (i,i) entry is 2*a_ij
            old_i, old_j = a[i], a[j]
            aii = old_i.get(i, 0) + 2 * old_i.get(j, 0) + old_j.get(j, 0)
            new_i = {}
            for t in set(old_i) | set(old_j):
                if t == i or t not in alive:
                    continue
                v = old_i.get(t, 0) + old_j.get(t, 0)
                if v:
                    new_i[t] = v
            for t in set(old_i) - {i}:
                if t in alive:
                    a[t].pop(i, None)
            for t, v in new_i.items():
                a[t][i] = v
            if aii:
                new_i[i] = aii
            a[i] = new_i
            if not aii:
                continue
            k = i
        d = a[k][k]
        if d > 0:
            pos += 1
        else:
            neg += 1
        rowk = {t: v for t, v in a[k].items() if t in alive and t != k}
        alive.discard(k)
        for t, vt in rowk.items():
            f = vt / d
            rt = a[t]
            for s, vs in rowk.items():
                nv = rt.get(s, 0) - f * vs
                if nv:
                    rt[s] = nv
                else:
                    rt.pop(s, None)
            rt.pop(k, None)
    return pos, neg, n - pos - neg
