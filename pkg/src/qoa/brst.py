"""BRST complex Lambda (x) M, its cohomology, the relative subcomplex, the
physical space of a matter module and the maps v -> c(-1)v, c(-2)c(-1)v.

The complex uses the ghost system with lambda = 2 tensored with a conformal
matter algebra.  The BRST current is J = :c L_m: + :b c dc: and the
differential is its residue Q = J(0).
"""
from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .algebras import make_bc_system, tensor
from .core import format_rational
from .linalg import RowSpace, SparseMatrix, exact_rank, exact_signature, kernel_basis
from .modules import GhostFock, SliceKey, TensorModule, gram_matrix, mode_matrix, pairing
from .wick import Algebra, OperatorExpr

__all__ = [
    "AnomalyError",
    "brst_algebra",
    "brst_current",
    "anomaly",
    "anomaly_formula",
    "solve_cartan",
    "BRSTComplex",
    "CohomologyResult",
    "PhysicalSpace",
    "physical_space",
    "nu_maps",
]

CACHE_VERSION = 1
CACHE_ENV = "QOA_CACHE_DIR"


class AnomalyError(ValueError):
    """The total central charge is not 26, so Q does not square to zero."""


def brst_algebra(matter: Algebra) -> Algebra:
    """bc(2) (x) matter with the matter Virasoro element named ``Lm`` and the
    BRST current named ``J``."""
    if matter.virasoro is None:
        raise ValueError("matter algebra needs a Virasoro element")
    a = tensor(make_bc_system(2), matter)
    a.named["Lm"] = a.named["T2"]
    a.named["J"] = brst_current(a)
    a.matter_kappa = matter.kappa
    return a


def _matter_virasoro(a: Algebra) -> OperatorExpr:
    if "Lm" in a.named:
        return a.named["Lm"]
    if "T2" in a.named:
        return a.named["T2"]
    raise ValueError("no matter Virasoro element in algebra")


def _check_ghosts(a: Algebra):
    fam = a.families[0] if a.families else None
    if not fam or fam[0] != "bc" or fam[1].get("lambda") != 2:
        raise ValueError("BRST construction needs the bc system with lambda = 2 as first factor")
    return fam[2]


def brst_current(a: Algebra) -> OperatorExpr:
    """J = :c L_m: + :b c dc: in an algebra of the form bc(2) (x) matter."""
    bname, cname = _check_ghosts(a)
    b, c = a.gen(bname), a.gen(cname)
    return a.wick(c, _matter_virasoro(a)) + a.wick(b, c, c.derivative())


def anomaly(a: Algebra) -> OperatorExpr:
    """J o_0 J computed by the Wick engine."""
    J = a.named.get("J") or brst_current(a)
    return J.circle(J, 0)


def anomaly_formula(a: Algebra) -> OperatorExpr:
    """3/2 d(:d2c c:) + (kappa - 26)/12 :d3c c:, kappa the matter charge."""
    _, cname = _check_ghosts(a)
    kappa = getattr(a, "matter_kappa", None)
    if kappa is None:
        kappa = a.kappa + 26
    c = a.gen(cname)
    d2c_c = a.wick(c.derivative(2), c)
    return d2c_c.derivative() * Fraction(3, 2) + a.wick(c.derivative(3), c) * ((kappa - 26) / 12)


def solve_cartan(a: Algebra, candidates) -> list:
    """Solve for combinations x of ``candidates`` with (x o_0 b) equal to the
    total Virasoro element and x o_n b = 0 for n >= 2.  Returns a list of
    solutions; the first is a particular solution, the rest span the
    homogeneous solution space."""
    from .linalg import _rref
    bname, _ = _check_ghosts(a)
    b = a.gen(bname)
    target = a.virasoro
    cols = [e.ope(b) for e in candidates]
    rows = {}
    keys = set()
    for j, o in enumerate(cols):
        for n, e in o.items():
            if n == 1:
                continue
            for m, c in e.terms.items():
                rows.setdefault((n, m), {})[j] = c
                keys.add((n, m))
    rhs = {(0, m): c for m, c in target.terms.items()}
    keys |= set(rhs)
    k = len(candidates)
    aug = []
    for key in sorted(keys, key=lambda t: (t[0], a.sort_key(t[1]))):
        row = dict(rows.get(key, {}))
        if key in rhs:
            row[k] = rhs[key]
        aug.append(row)
    piv = _rref(aug)
    if k in piv:
        return []
    part = {j: 0 for j in range(k)}
    for c, row in piv.items():
        part[c] = row.get(k, 0)
    sols = [part]
    free = [j for j in range(k) if j not in piv]
    for f in free:
        vec = {j: 0 for j in range(k)}
        vec[f] = 1
        for c, row in piv.items():
            vec[c] = -row.get(f, 0)
        sols.append(vec)
    return sols


@dataclass
class CohomologyResult:
    key: SliceKey
    dim_C: int
    dim_Z: int
    dim_B: int
    representatives: list = field(default_factory=list)

    @property
    def dim(self) -> int:
        return self.dim_Z - self.dim_B

    def row(self) -> dict:
        return {"p": self.key.fermion, "weight": format_rational(self.key.weight),
                "momentum": ",".join(format_rational(x) for x in self.key.momentum),
                "dimC": self.dim_C, "dimZ": self.dim_Z, "dimB": self.dim_B, "dimH": self.dim}


class BRSTComplex:
    """Lambda (x) M with differential Q = J(0).

    ``matter`` is a conformal algebra acting on ``matter_module`` (generator
    names must agree).  Unless ``allow_anomaly`` is set, cohomology requests
    are refused when the matter central charge differs from 26.
    """

    def __init__(self, matter: Algebra, matter_module: TensorModule, *,
                 allow_anomaly=False, cache_dir=None):
        self.matter = matter
        self.algebra = brst_algebra(matter)
        self.J = self.algebra.named["J"]
        bname, cname = self.algebra.families[0][2]
        self.bname, self.cname = bname, cname
        self.module = TensorModule([GhostFock((bname, cname))] + list(matter_module.factors))
        self.matter_module = matter_module
        for g in self.algebra.generators:
            if g.name not in self.module.route:
                raise ValueError(f"generator {g.name} does not act on the module")
        self.kappa = matter.kappa
        self.allow_anomaly = allow_anomaly
        self.momentum = self.module.momentum
        self._diff = {}
        if cache_dir is None:
            cache_dir = os.environ.get(CACHE_ENV)
        self.cache_dir = Path(cache_dir) if cache_dir else None

    # ----- basics ---------------------------------------------------------------

    @property
    def anomalous(self) -> bool:
        return self.kappa != 26

    def require_nilpotent(self):
        if self.anomalous and not self.allow_anomaly:
            raise AnomalyError(f"matter central charge is {self.kappa}, not 26: Q^2 != 0")

    def key(self, p, w=0) -> SliceKey:
        return SliceKey(p, w, self.momentum)

    def basis(self, p, w=0):
        return self.module.slice_basis(p, w)

    def _cache_path(self, p, w):
        if self.cache_dir is None:
            return None
        blob = json.dumps({"v": CACHE_VERSION, "module": self.module.descriptor(),
                           "J": self.J.to_json(), "p": p, "w": format_rational(w)},
                          sort_keys=True, default=str).encode()
        return self.cache_dir / f"Q-{hashlib.sha256(blob).hexdigest()[:24]}.json"

    def differential_matrix(self, p, w=0) -> SparseMatrix:
        """Matrix of Q from slice (p, w) to (p + 1, w)."""
        w = Fraction(w)
        k = (p, w)
        if k in self._diff:
            return self._diff[k]
        path = self._cache_path(p, w)
        if path is not None and path.exists():
            data = json.loads(path.read_text())
            if data.get("version") == CACHE_VERSION:
                m = SparseMatrix.from_triplets(data["matrix"])
                self._diff[k] = m
                return m
        m = mode_matrix(self.J, 0, self.module, SliceKey(p, w))
        if path is not None:
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".tmp")
            tmp.write_text(json.dumps({"version": CACHE_VERSION, "key": path.stem,
                                      "matrix": m.to_triplets()}))
            tmp.replace(path)
        self._diff[k] = m
        return m

    def q_squared(self, p, w=0) -> SparseMatrix:
        return self.differential_matrix(p + 1, w) @ self.differential_matrix(p, w)

    def nilpotency_failures(self, ps, weights) -> list:
        """Slices (p, w) on which Q o Q is a nonzero matrix."""
        bad = []
        for w in weights:
            for p in ps:
                if not self.basis(p, w) or not self.basis(p + 2, w):
                    continue
                if not self.q_squared(p, w).is_zero():
                    bad.append((p, w))
        return bad

    def mode(self, name, n, p, w=0) -> SparseMatrix:
        return mode_matrix(self.algebra.gen(name), n, self.module, SliceKey(p, w))

    def total_L0(self, p, w=0) -> SparseMatrix:
        return mode_matrix(self.algebra.virasoro, 1, self.module, SliceKey(p, w))

    def cartan_check(self, p, w=0) -> bool:
        """[Q, b(1)] = L_0 on the slice (p, w)."""
        b1 = self.mode(self.bname, 1, p, w)
        q = self.differential_matrix(p, w)
        b1_up = self.mode(self.bname, 1, p + 1, w)
        q_down = self.differential_matrix(p - 1, w)
        lhs = b1_up @ q + q_down @ b1
        return lhs == self.total_L0(p, w)

    # ----- cohomology -------------------------------------------------------------

    def rank(self, p, w=0) -> int:
        if not self.basis(p, w) or not self.basis(p + 1, w):
            return 0
        key = ("rank", p, Fraction(w))
        if key not in self._diff:
            self._diff[key] = exact_rank(self.differential_matrix(p, w))
        return self._diff[key]

    def cohomology(self, ps, weights=(0,), representatives=False) -> list:
        self.require_nilpotent()
        out = []
        for w in weights:
            for p in ps:
                dim_c = len(self.basis(p, w))
                r_out = self.rank(p, w)
                r_in = self.rank(p - 1, w)
                res = CohomologyResult(self.key(p, w), dim_c, dim_c - r_out, r_in)
                if representatives and res.dim:
                    res.representatives = self.representatives(p, w)
                out.append(res)
        return out

    def representatives(self, p, w=0, restrict=None):
        """Cycles independent modulo boundaries (pivots of an echelon form,
        boundaries first).  Vectors are dicts over slice-basis indices.
        ``restrict`` selects a subcomplex given by index lists per degree."""
        if restrict is None:
            q_out = self.differential_matrix(p, w)
            q_in = self.differential_matrix(p - 1, w) if self.basis(p - 1, w) else None
        else:
            q_out = restrict(p)
            q_in = restrict(p - 1)
        cycles = kernel_basis(q_out) if q_out.ncols else []
        space = RowSpace()
        if q_in is not None:
            for col in q_in.columns():
                space.add(col)
        reps = []
        for z in cycles:
            if space.add(z):
                reps.append(z)
        return reps

    # ----- relative subcomplex ----------------------------------------------------

    def relative_indices(self, p):
        """Weight-0 basis states annihilated by b(1), i.e. without c(-2)."""
        return [i for i, s in enumerate(self.basis(p, 0)) if -2 not in s[0][1]]

    def relative_matrix(self, p) -> SparseMatrix:
        src = self.relative_indices(p)
        tgt = self.relative_indices(p + 1)
        if not src:
            return SparseMatrix(len(tgt), 0, {})
        q = self.differential_matrix(p, 0)
        tpos = {t: i for i, t in enumerate(tgt)}
        spos = {s: j for j, s in enumerate(src)}
        ent = {}
        for (i, j), v in q.entries.items():
            if j in spos:
                if i not in tpos:
                    raise AssertionError("Q leaves the kernel of b(1)")
                ent[(tpos[i], spos[j])] = v
        return SparseMatrix(len(tgt), len(src), ent)

    def relative_cohomology(self, ps, representatives=False) -> list:
        self.require_nilpotent()
        out = []
        for p in ps:
            dim_c = len(self.relative_indices(p))
            r_out = exact_rank(self.relative_matrix(p)) if dim_c else 0
            r_in = exact_rank(self.relative_matrix(p - 1)) if self.relative_indices(p - 1) else 0
            res = CohomologyResult(self.key(p, 0), dim_c, dim_c - r_out, r_in)
            if representatives and res.dim:
                res.representatives = self.representatives(p, 0, restrict=self._rel_or_none)
            out.append(res)
        return out

    def _rel_or_none(self, p):
        if not self.relative_indices(p):
            return None
        return self.relative_matrix(p)

    def relative_gram(self, p=1, vectors=None) -> SparseMatrix:
        """Gram matrix of the hermitean form on relative degree-p vectors
        (dicts over relative indices; default: cohomology representatives)."""
        if vectors is None:
            res = self.relative_cohomology([p], representatives=True)[0]
            vectors = res.representatives
        idx = self.relative_indices(p)
        basis = self.basis(p, 0)
        full = [{idx[i]: c for i, c in v.items()} for v in vectors]
        cache = {}

        def pair(i, j):
            if (i, j) not in cache:
                cache[(i, j)] = pairing(self.module, basis[i], basis[j])
            return cache[(i, j)]

        n = len(full)
        entries = {}
        for a in range(n):
            for b in range(a, n):
                v = sum((c * d * pair(i, j) for i, c in full[a].items() for j, d in full[b].items()),
                        Fraction(0))
                if v:
                    entries[(a, b)] = entries[(b, a)] = v
        return SparseMatrix(n, n, entries)

    def relative_form_signature(self, p=1) -> tuple:
        """Inertia of the form on H_rel^p through its representatives."""
        return exact_signature(self.relative_gram(p))

    def relative_complex_signature(self, ps) -> tuple:
        """Inertia of the form on the whole weight-0 relative complex in
        degrees ``ps`` (the form pairs degree p with 2 - p)."""
        states = [(p, i) for p in ps for i in self.relative_indices(p)]
        basis = [self.basis(p, 0)[i] for p, i in states]
        return exact_signature(gram_matrix(self.module, basis))

    def b1_exactness(self, p, w=0) -> bool:
        """Ker b(1) = Im b(1) on slice (p, w), by rank."""
        b_here = self.mode(self.bname, 1, p, w)
        b_in = self.mode(self.bname, 1, p + 1, w)
        dim = len(self.basis(p, w))
        return dim - exact_rank(b_here) == exact_rank(b_in)

    def state_label(self, state) -> str:
        (bs, cs) = state[0]
        parts = [f"{self.bname}({n})" for n in bs] + [f"{self.cname}({n})" for n in cs]
        for f, s in zip(self.module.factors[1:], state[1:]):
            parts += [f"{nm}({n})" for nm, n in f.creation_ops(s)]
        return " ".join(parts + ["|0>"]) if parts else "|0>"


# --------------------------------------------------------------------------
# physical space and the nu maps
# --------------------------------------------------------------------------


@dataclass
class PhysicalSpace:
    dim_invariants: int
    dim_null: int
    invariants: list
    null: list
    basis_weight1: list

    @property
    def dim(self) -> int:
        return self.dim_invariants - self.dim_null


def _lplus(matter: Algebra, module: TensorModule):
    """Stacked matrix of L_1 = T(2) and L_2 = T(3) on the weight-1 slice."""
    T = matter.virasoro
    m1 = mode_matrix(T, 2, module, SliceKey(0, 1))
    m2 = mode_matrix(T, 3, module, SliceKey(0, 1))
    ent = dict(m1.entries)
    for (i, j), v in m2.entries.items():
        ent[(i + m1.nrows, j)] = v
    return SparseMatrix(m1.nrows + m2.nrows, m1.ncols, ent)


def _lminus(matter: Algebra, module: TensorModule):
    """Columns L_{-1} x (x in M[0]) and L_{-2} y (y in M[-1]) in M[1]."""
    T = matter.virasoro
    cols = []
    if module.slice_basis(0, 0):
        cols += mode_matrix(T, 0, module, SliceKey(0, 0)).columns()
    if module.slice_basis(0, -1):
        cols += mode_matrix(T, -1, module, SliceKey(0, -1)).columns()
    return SparseMatrix.from_columns(len(module.slice_basis(0, 1)), cols)


def physical_space(matter: Algebra, module: TensorModule, with_bases=True) -> PhysicalSpace:
    """M[1]^{Vir+} / N(M), with Vir+ generated by L_1, L_2 and N the
    intersection of the invariants with L_{-1} M[0] + L_{-2} M[-1]."""
    basis1 = module.slice_basis(0, 1)
    if not basis1:
        return PhysicalSpace(0, 0, [], [], [])
    lp = _lplus(matter, module)
    lm = _lminus(matter, module)
    inv = kernel_basis(lp) if with_bases else []
    dim_inv = len(basis1) - exact_rank(lp)
    # N = L-(ker(L+ L-)); ker L- contributes nothing
    null = []
    if lm.ncols:
        comp = lp @ lm
        xs = kernel_basis(comp)
        space = RowSpace()
        for x in xs:
            y = lm.apply(x)
            if y and space.add(y):
                null.append(y)
    return PhysicalSpace(dim_inv, len(null), inv, null, basis1)


def _embed(cx: BRSTComplex, ghost_state, p):
    """Index map M[1] -> C^p(weight 0) for v -> ghost_state (x) v."""
    pos = {s: i for i, s in enumerate(cx.basis(p, 0))}
    out = []
    for s in cx.matter_module.slice_basis(0, 1):
        out.append(pos[(ghost_state,) + s])
    return out


def _stack(*mats) -> SparseMatrix:
    ent = {}
    off = 0
    ncols = mats[0].ncols
    for m in mats:
        for (i, j), v in m.entries.items():
            ent[(i + off, j)] = v
        off += m.nrows
    return SparseMatrix(off, ncols, ent)


def _rows_subset(m: SparseMatrix, rows) -> SparseMatrix:
    pos = {r: i for i, r in enumerate(rows)}
    return SparseMatrix(len(rows), m.ncols,
                        {(pos[i], j): v for (i, j), v in m.entries.items() if i in pos})


def _cols_subset(m: SparseMatrix, cols) -> SparseMatrix:
    pos = {c: j for j, c in enumerate(cols)}
    return SparseMatrix(m.nrows, len(cols),
                        {(i, pos[j]): v for (i, j), v in m.entries.items() if j in pos})


def nu_maps(cx: BRSTComplex) -> dict:
    """Check that v -> c(-1)v and v -> c(-2)c(-1)v induce bijections from the
    physical space onto H^1 and H^2 of the weight-0 slice.

    With K = ker L+ (invariants), N the null vectors, W = nu(M[1]) and B the
    boundaries, everything reduces to ranks of stacked sparse matrices:

    * nu(K) consists of cycles iff the rows of Q nu lie in the row space of L+;
    * nu(N) consists of boundaries iff appending nu(N) to B keeps its rank;
    * dim(nu(K) cap B) = rank Q_in - rank [P_O Q_in ; L+ P_W Q_in], where P_W,
      P_O project onto W and its coordinate complement.

    The induced map P -> H is injective iff the last number equals dim N;
    bijective if moreover dim P = dim H.
    """
    cx.require_nilpotent()
    ps = physical_space(cx.matter, cx.matter_module, with_bases=False)
    report = {"dim_P": ps.dim, "dim_invariants": ps.dim_invariants, "dim_null": ps.dim_null}
    lp = _lplus(cx.matter, cx.matter_module) if ps.basis_weight1 else None
    rank_lp = exact_rank(lp) if lp is not None else 0
    for label, ghost, p in (("nu1", ((), (-1,)), 1), ("nu2", ((), (-2, -1)), 2)):
        h = cx.cohomology([p])[0]
        entry = {"dim_H": h.dim}
        if not ps.basis_weight1:
            entry.update(cycles=True, null_to_boundaries=True, preimage_of_boundaries=0,
                         injective=True, bijective=h.dim == 0)
            report[label] = entry
            continue
        idx = _embed(cx, ghost, p)
        q_out = _cols_subset(cx.differential_matrix(p, 0), idx)
        cycles_ok = exact_rank(_stack(lp, q_out)) == rank_lp if q_out.entries else True
        if cx.basis(p - 1, 0):
            q_in = cx.differential_matrix(p - 1, 0)
        else:
            q_in = SparseMatrix(len(cx.basis(p, 0)), 0, {})
        r_in = cx.rank(p - 1, 0)
        cols = q_in.columns() + [{idx[i]: c for i, c in v.items()} for v in ps.null]
        null_ok = exact_rank(SparseMatrix.from_columns(q_in.nrows, cols)) == r_in
        others = sorted(set(range(q_in.nrows)) - set(idx))
        p_o = _rows_subset(q_in, others)
        p_w = _rows_subset(q_in, idx)
        meet = r_in - exact_rank(_stack(p_o, lp @ p_w)) if q_in.ncols else 0
        injective = cycles_ok and null_ok and meet == ps.dim_null
        entry.update(cycles=cycles_ok, null_to_boundaries=null_ok, preimage_of_boundaries=meet,
                     injective=injective, bijective=injective and ps.dim == h.dim)
        report[label] = entry
    report["bijective"] = report["nu1"]["bijective"] and report["nu2"]["bijective"]
    return report
