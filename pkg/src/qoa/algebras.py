"""Concrete commutative QOAs: the bc ghost system, the Virasoro algebra
O_kappa(L), Heisenberg and current algebras, and their tensor products."""
from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .core import Poly, to_rational
from .wick import Algebra, Generator, OperatorExpr

__all__ = [
    "make_bc_system",
    "make_virasoro",
    "make_heisenberg",
    "make_current_algebra",
    "tensor",
    "verify_conformal_structure",
    "basis_enumerate",
    "load_algebra",
    "builtin_algebra",
    "bc_central_charge",
    "UnsupportedFamily",
]

FREE_FAMILIES = {"bc", "virasoro", "heisenberg"}


class UnsupportedFamily(ValueError):
    pass


def bc_central_charge(lam: int) -> int:
    return -12 * lam * lam + 12 * lam - 2


def make_bc_system(lam: int = 2) -> Algebra:
    """Ghost pair b (|b|=-1, ||b||=lam) and c (|c|=1, ||c||=1-lam) with
    b(z)c(w) ~ (z-w)^-1, and Virasoro element (1-lam):db c: - lam:b dc:."""
    lam = int(lam)
    gens = [Generator("b", -1, lam), Generator("c", 1, 1 - lam)]
    one = {(): Fraction(1)}
    ope = {("b", "c"): {0: one}, ("c", "b"): {0: one}}
    alg = Algebra(gens, ope, name=f"bc({lam})", kappa=Fraction(bc_central_charge(lam)),
                  families=[("bc", {"lambda": lam}, ("b", "c"))])
    b, c = 0, 1
    x = {((b, 1), (c, 0)): Fraction(1 - lam), ((b, 0), (c, 1)): Fraction(-lam)}
    alg.virasoro = OperatorExpr(alg, x)
    alg.named["T"] = alg.virasoro
    alg.named["X"] = alg.virasoro
    return alg


def make_virasoro(kappa) -> Algebra:
    """O_kappa(L); ``kappa`` may be a rational or a :class:`Poly`."""
    if not isinstance(kappa, Poly):
        kappa = to_rational(kappa)
    gens = [Generator("L", 0, 2)]
    L = ((0, 0),)
    dL = ((0, 1),)
    poles = {1: {L: Fraction(2)}, 0: {dL: Fraction(1)}}
    if kappa:
        poles[3] = {(): kappa / 2}
    alg = Algebra(gens, {("L", "L"): poles}, name=f"vir({kappa})", kappa=kappa,
                  families=[("virasoro", {"kappa": kappa}, ("L",))])
    alg.virasoro = alg.gen("L")
    alg.named["T"] = alg.virasoro
    return alg


def make_heisenberg(eta_signature, names=None) -> Algebra:
    """Currents j^1..j^{k+l} with j^a_(1) j^b = eta^{ab}, eta = diag(+1^k, -1^l),
    and Virasoro element 1/2 sum eta_{ab} :j^a j^b:."""
    k, l = (int(x) for x in eta_signature)
    if k < 0 or l < 0 or k + l == 0:
        raise ValueError("need k, l >= 0 and k + l >= 1")
    n = k + l
    names = list(names) if names else [f"j{a + 1}" for a in range(n)]
    eta = [1] * k + [-1] * l
    gens = [Generator(nm, 0, 1) for nm in names]
    ope = {(names[a], names[a]): {1: {(): Fraction(eta[a])}} for a in range(n)}
    alg = Algebra(gens, ope, name=f"heis({k},{l})", kappa=Fraction(n),
                  families=[("heisenberg", {"k": k, "l": l, "eta": tuple(eta)}, tuple(names))])
    vir = {}
    for a in range(n):
        vir[((a, 0), (a, 0))] = Fraction(eta[a], 2)
    alg.virasoro = OperatorExpr(alg, vir)
    alg.named["T"] = alg.virasoro
    return alg


def make_current_algebra(names, structure, form) -> Algebra:
    """Currents X_a(z) for a Lie algebra with bracket ``structure[(a, b)] =
    {c: f_ab^c}`` and invariant form ``form[(a, b)]``.  No Virasoro element is
    attached."""
    names = list(names)
    gens = [Generator(nm, 0, 1) for nm in names]
    idx = {nm: i for i, nm in enumerate(names)}
    ope = {}
    for a in names:
        for b in names:
            poles = {}
            bform = form.get((a, b), 0)
            if bform:
                poles[1] = {(): to_rational(bform)}
            br = structure.get((a, b), {})
            lin = {((idx[c], 0),): to_rational(v) for c, v in br.items() if v}
            if lin:
                poles[0] = lin
            if poles:
                ope[(a, b)] = poles
    return Algebra(gens, ope, name="current", families=[("current", {}, tuple(names))])


def _fresh(name, taken):
    new = name
    i = 2
    while new in taken:
        new = f"{name}_{i}"
        i += 1
    return new


def tensor(a: Algebra, b: Algebra) -> Algebra:
    """Tensor product; generators of ``b`` are renamed on clashes, cross OPEs
    vanish, Virasoro elements and central charges add."""
    taken = {g.name for g in a.generators}
    rename = {}
    gens = list(a.generators)
    for g in b.generators:
        nm = _fresh(g.name, taken)
        taken.add(nm)
        rename[g.name] = nm
        gens.append(Generator(nm, g.fermion, g.weight))
    off = len(a.generators)

    def shift(terms):
        return {tuple((i + off, d) for i, d in m): c for m, c in terms.items()}

    ope = {}
    for (i, j), poles in a._ope.items():
        ope[(a.generators[i].name, a.generators[j].name)] = dict(poles)
    for (i, j), poles in b._ope.items():
        ope[(rename[b.generators[i].name], rename[b.generators[j].name])] = {
            n: shift(t) for n, t in poles.items()}
    fams = list(a.families) + [
        (fam, params, tuple(rename[n] for n in names)) for fam, params, names in b.families]
    kappa = None
    if a.kappa is not None and b.kappa is not None:
        kappa = a.kappa + b.kappa
    out = Algebra(gens, ope, name=f"{a.name}*{b.name}", kappa=kappa, families=fams)
    if a.virasoro is not None or b.virasoro is not None:
        terms = dict(a.virasoro.terms) if a.virasoro is not None else {}
        if b.virasoro is not None:
            for m, c in shift(b.virasoro.terms).items():
                terms[m] = terms.get(m, 0) + c
        out.virasoro = OperatorExpr(out, terms)
        out.named["T"] = out.virasoro
    for src, mapper in ((a, lambda t: t), (b, shift)):
        if src.virasoro is not None:
            nm = _fresh("T" + str(1 if src is a else 2), set(out.named) | taken)
            out.named[nm] = OperatorExpr(out, mapper(src.virasoro.terms))
    return out


def verify_conformal_structure(a: Algebra) -> dict:
    """Check the Virasoro self-OPE and, for every generator u,
    T o_1 u = ||u|| u and T o_0 u = du."""
    if a.virasoro is None:
        raise ValueError(f"{a.name} has no Virasoro element")
    T = a.virasoro
    kappa = a.kappa
    ope = T.ope(T)
    expected = {0: T.derivative(), 1: T * 2}
    if kappa:
        expected[3] = a.scalar(kappa / 2)
    self_ok = set(ope) <= set(expected) | {2} and all(
        ope.get(n, a.zero()) == e for n, e in expected.items()) and not ope.get(2)
    top = ope.get(3)
    measured = None
    if top is not None and set(top.terms) == {()}:
        measured = top.terms[()] * 2
    elif top is None:
        measured = Fraction(0)
    gens = {}
    for g in a.generators:
        u = a.gen(g.name)
        w_ok = T.circle(u, 1) == u * g.weight
        d_ok = T.circle(u, 0) == u.derivative()
        gens[g.name] = {"weight": w_ok, "derivative": d_ok}
    passed = self_ok and all(v["weight"] and v["derivative"] for v in gens.values())
    return {
        "algebra": a.name,
        "kappa": kappa,
        "measured_kappa": measured,
        "self_ope": self_ok,
        "generators": gens,
        "passed": passed,
    }


def _suffix_minima(gens):
    """table[i][p] = least weight of a monomial in generators i.. with fermion p."""
    n = len(gens)
    table = [None] * (n + 1)
    table[n] = {0: Fraction(0)}
    for i in range(n - 1, -1, -1):
        g = gens[i]
        nxt = table[i + 1]
        cur = dict(nxt)
        if g.odd:
            for k in range(1, _MAX_ODD + 1):
                cost = k * g.weight + Fraction(k * (k - 1), 2)
                for p, w in nxt.items():
                    q = p + k * g.fermion
                    if q not in cur or w + cost < cur[q]:
                        cur[q] = w + cost
        table[i] = cur
    return table


_MAX_ODD = 40


def basis_enumerate(a: Algebra, weight, fermion: int) -> list[tuple]:
    """Canonical monomial basis of the (fermion, weight) slice.

    Odd generators appear with strictly decreasing derivative orders, even
    ones with weakly decreasing orders; generator blocks follow the declared
    (tensor) order.  The list is sorted by :meth:`Algebra.sort_key`.
    """
    for fam, _, _ in a.families:
        if fam not in FREE_FAMILIES:
            raise UnsupportedFamily(f"no monomial basis for family {fam!r}")
    if not a.families and a.generators:
        raise UnsupportedFamily("algebra has no declared family")
    weight = Fraction(weight)
    gens = a.generators
    n = len(gens)
    smin = _suffix_minima(gens)
    results = []

    def completion(i, p_after, odd_more):
        # least weight still needed once generator i has used fermion so far
        best = None
        for e in range(0, _MAX_ODD + 1 if odd_more else 1):
            g = gens[i]
            lo = smin[i + 1].get(p_after - e * g.fermion)
            if lo is None:
                continue
            tot = e * g.weight + Fraction(e * (e - 1), 2) + lo
            if best is None or tot < best:
                best = tot
        return best

    def rec(i, prefix, w_left, p_left):
        if i == n:
            if w_left == 0 and p_left == 0:
                results.append(prefix)
            return
        lo = smin[i].get(p_left)
        if lo is None or lo > w_left:
            return
        g = gens[i]

        def choose(seq, maxd, used):
            p_rest = p_left - len(seq) * g.fermion
            lo_rest = smin[i + 1].get(p_rest)
            if lo_rest is not None and used + lo_rest <= w_left:
                rec(i + 1, prefix + tuple((i, d) for d in seq), w_left - used, p_rest)
            if g.odd and len(seq) >= _MAX_ODD:
                return
            p_next = p_left - (len(seq) + 1) * g.fermion
            need = completion(i, p_next, g.odd)
            if need is None:
                return
            d = 0
            while maxd is None or d <= maxd:
                nw = used + g.weight + d
                if nw + need > w_left:
                    break
                choose(seq + (d,), d - 1 if g.odd else d, nw)
                d += 1

        choose((), None, Fraction(0))

    rec(0, (), weight, fermion)
    results.sort(key=a.sort_key)
    return results


def _pole_terms(pre: Algebra, val):
    if isinstance(val, (str, int)):
        return pre.expr(str(val)).terms
    if isinstance(val, list):
        return pre.terms_from_json(val)
    raise TypeError(f"bad pole entry {val!r}")


def _parse_doc(text: str, suffix: str) -> dict:
    if suffix == ".toml":
        try:
            import tomllib
        except ModuleNotFoundError:  # Python < 3.11
            import tomli as tomllib
        return tomllib.loads(text)
    return json.loads(text)


def load_algebra(source) -> Algebra:
    """Build an algebra from a JSON/TOML document (path, string or dict).

    Layout::

        {"name": "...",
         "generators": [{"name": "b", "fermion": -1, "weight": 2}, ...],
         "ope": [{"left": "b", "right": "c", "poles": {"0": "1"}}, ...],
         "virasoro": "expression", "kappa": "26",
         "family": "bc" | "virasoro" | "heisenberg" | "custom"}

    Pole values are expression strings in canonical order, or JSON term lists.
    """
    if isinstance(source, dict):
        doc = source
    else:
        text = str(source)
        p = Path(text)
        if len(text) < 4096 and p.exists():
            text = p.read_text(encoding="utf-8")
            suffix = p.suffix.lower()
        else:
            suffix = ".json" if text.lstrip().startswith("{") else ".toml"
        doc = _parse_doc(text, suffix)
    gens = [Generator(g["name"], int(g["fermion"]), to_rational(str(g["weight"])))
            for g in doc["generators"]]
    pre = Algebra(gens, {}, name="pre")
    ope = {}
    for entry in doc.get("ope", []):
        ope[(entry["left"], entry["right"])] = {
            int(n): _pole_terms(pre, v) for n, v in entry["poles"].items()}
    fam = doc.get("family", "custom")
    names = tuple(g.name for g in gens)
    kappa = to_rational(str(doc["kappa"])) if "kappa" in doc else None
    alg = Algebra(gens, ope, name=doc.get("name", "custom"), kappa=kappa,
                  families=[(fam, dict(doc.get("params", {})), names)])
    if "virasoro" in doc:
        alg.virasoro = alg.expr(doc["virasoro"])
        alg.named["T"] = alg.virasoro
    return alg


def builtin_algebra(spec: str) -> Algebra:
    """Resolve ``bc``, ``bc:<lambda>``, ``vir:<kappa>``, ``heis:<k>,<l>`` and
    ``a*b`` tensor products of these."""
    parts = [s.strip() for s in spec.split("*")]
    algs = []
    for part in parts:
        name, _, arg = part.partition(":")
        name = name.lower()
        if name == "bc":
            algs.append(make_bc_system(int(arg) if arg else 2))
        elif name in ("vir", "virasoro"):
            if not arg:
                raise ValueError("vir needs a central charge, e.g. vir:26")
            algs.append(make_virasoro(Poly.gen("k") if arg == "k" else to_rational(arg)))
        elif name in ("heis", "heisenberg"):
            k, _, l = arg.partition(",")
            algs.append(make_heisenberg((int(k), int(l or 0))))
        else:
            raise KeyError(f"unknown algebra {part!r}")
    out = algs[0]
    for a in algs[1:]:
        out = tensor(out, a)
    return out
