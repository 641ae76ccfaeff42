"""Command-line entry point: ``qoa ope|cohomology|monster-dims|bv-audit``.

Exit codes: 0 success, 1 an internal consistency check failed, 2 usage
error, 3 anomalous central charge refused, 4 expression parse error.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

from .algebras import builtin_algebra, load_algebra
from .brst import CACHE_ENV, AnomalyError, BRSTComplex, brst_algebra
from .bv import verify_bv_axioms
from .core import format_rational, to_rational
from .grammar import ParseError, format_expr, parse_expr
from .modules import TensorModule, make_fock, make_virasoro_vacuum
from .qseries import II11, LatticeSpec, j_series, j_series_convolution, monster_table, \
    predicted_slice_dim

EXIT_OK, EXIT_CHECK, EXIT_USAGE, EXIT_ANOMALY, EXIT_PARSE = 0, 1, 2, 3, 4


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    algebra: str = "bc"
    matter: str | None = None
    fermions: tuple | None = None
    weights: tuple = (0,)
    momentum: tuple = ()
    order: int = 64
    fmt: str = "text"
    cache_dir: str | None = None
    jobs: int = 1
    extra: dict = field(default_factory=dict)

    def validate(self):
        if self.fmt not in ("text", "json", "tsv"):
            raise UsageError(f"unknown format {self.fmt!r}")
        if self.jobs < 1:
            raise UsageError("--jobs must be positive")
        if self.order < 2:
            raise UsageError("--order must be at least 2")
        return self


# --------------------------------------------------------------------------
# helpers
# --------------------------------------------------------------------------


def parse_range(text: str) -> tuple:
    """``a:b`` (inclusive) or a comma list of integers."""
    text = text.strip()
    try:
        if ":" in text:
            lo, hi = text.split(":")
            lo, hi = int(lo), int(hi)
            if hi < lo:
                raise UsageError(f"empty range {text!r}")
            return tuple(range(lo, hi + 1))
        return tuple(int(x) for x in text.split(","))
    except ValueError:
        raise UsageError(f"bad range {text!r}")


def momentum_for_norm(n: int, k: int = 25, l: int = 1) -> tuple:
    """A small nonzero vector alpha in Z^{k,l} with alpha.alpha/2 = n:
    m leading ones and a timelike entry y, with m - y^2 = 2n."""
    if l < 1 and n < 0:
        raise UsageError("negative norm needs a timelike direction")
    y = 0 if n > 0 else 1
    while 2 * n + y * y < 0:
        y += 1
    m = 2 * n + y * y
    if m > k:
        raise UsageError(f"no small vector of norm {n} in this lattice")
    return tuple([1] * m + [0] * (k - m) + ([y] + [0] * (l - 1) if l else []))


def resolve_algebra(spec: str):
    if Path(spec).exists():
        return load_algebra(spec)
    try:
        return builtin_algebra(spec)
    except (KeyError, ValueError) as e:
        raise UsageError(str(e))


def matter_module(matter, momentum) -> TensorModule:
    """Module for a built-in matter algebra: vacuum module for Virasoro
    factors and Fock space F(alpha) for Heisenberg factors, alpha split
    across the Heisenberg factors in order (zero-padded)."""
    factors = []
    momentum = list(momentum)
    need = sum(len(names) for fam, _, names in matter.families if fam == "heisenberg")
    if len(momentum) > need:
        raise UsageError(f"momentum has {len(momentum)} entries, lattice rank is {need}")
    momentum += [0] * (need - len(momentum))
    for fam, params, names in matter.families:
        if fam == "virasoro":
            factors.append(make_virasoro_vacuum(params["kappa"], name=names[0]))
        elif fam == "heisenberg":
            r = len(names)
            alpha, momentum = momentum[:r], momentum[r:]
            factors.append(make_fock(params["k"], params["l"], alpha, names=list(names)))
        else:
            raise UsageError(f"no module for family {fam!r}")
    out = factors[0]
    for f in factors[1:]:
        out = out * f
    return out


def _emit(rows: list, columns: list, fmt: str, meta: dict, out):
    if fmt == "json":
        doc = dict(meta)
        doc["rows"] = rows
        out.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    elif fmt == "tsv":
        out.write("\t".join(columns) + "\n")
        for r in rows:
            out.write("\t".join(str(r[c]) for c in columns) + "\n")
    else:
        widths = [max(len(c), *(len(str(r[c])) for r in rows)) if rows else len(c) for c in columns]
        out.write("  ".join(c.rjust(w) for c, w in zip(columns, widths)) + "\n")
        for r in rows:
            out.write("  ".join(str(r[c]).rjust(w) for c, w in zip(columns, widths)) + "\n")
        for k, v in meta.items():
            if k != "command":
                out.write(f"# {k}: {json.dumps(v, sort_keys=True)}\n")


# --------------------------------------------------------------------------
# ope
# --------------------------------------------------------------------------


def cmd_ope(cfg: RunConfig, out=sys.stdout) -> int:
    alg = resolve_algebra(cfg.algebra)
    if cfg.matter:
        fam = alg.families[0] if alg.families else None
        if not fam or fam[0] != "bc" or fam[1].get("lambda") != 2 or len(alg.generators) != 2:
            raise UsageError("--matter requires --algebra bc (lambda = 2)")
        alg = brst_algebra(resolve_algebra(cfg.matter))
    left = parse_expr(alg, cfg.extra["left"])
    right = parse_expr(alg, cfg.extra["right"])
    poles = left.ope(right)
    rows = [{"n": n, "value": format_expr(poles[n])} for n in sorted(poles, reverse=True)]
    rows.append({"n": "wick", "value": format_expr(left.circle(right, -1))})
    meta = {"command": "ope", "algebra": alg.name, "left": format_expr(left),
            "right": format_expr(right)}
    _emit(rows, ["n", "value"], cfg.fmt, meta, out)
    return EXIT_OK


# --------------------------------------------------------------------------
# cohomology
# --------------------------------------------------------------------------


def _build_complex(cfg: RunConfig) -> BRSTComplex:
    matter = resolve_algebra(cfg.matter or "heis:25,1")
    module = matter_module(matter, cfg.momentum)
    return BRSTComplex(matter, module, allow_anomaly=cfg.extra.get("allow_anomaly", False),
                       cache_dir=cfg.cache_dir)


def _fermion_range(cx: BRSTComplex, w) -> tuple:
    """Every degree with a nonempty slice, padded to include -1..4."""
    ps = {p for p in range(-40, 41)
          if cx.module.min_weight(p) is not None and cx.module.min_weight(p) <= w}
    return tuple(sorted(ps | set(range(-1, 5))))


def _weight_rows(cfg: RunConfig, w) -> tuple:
    """Rows and failed checks for one weight (runs in a worker process)."""
    cx = _build_complex(cfg)
    cx.require_nilpotent()
    full = _fermion_range(cx, w)
    ps = cfg.fermions if cfg.fermions is not None else full
    failures = []
    rows = []
    for res in cx.cohomology(ps, (w,)):
        p = res.key.fermion
        predicted = predicted_slice_dim(cx.module, p, w)
        if predicted != res.dim_C:
            failures.append(f"character mismatch at p={p}, w={w}: {res.dim_C} != {predicted}")
        rows.append(res.row())
    bad = cx.nilpotency_failures(range(min(ps, default=0) - 2, max(ps, default=0) + 1), (w,))
    if bad:
        failures.append(f"Q^2 != 0 on slices {bad}")
    if set(full) <= set(ps):
        ec = sum((-1) ** r["p"] * r["dimC"] for r in rows)
        eh = sum((-1) ** r["p"] * r["dimH"] for r in rows)
        if ec != eh:
            failures.append(f"Euler-Poincare mismatch at w={w}: {ec} != {eh}")
    return rows, failures


def cmd_cohomology(cfg: RunConfig, out=sys.stdout) -> int:
    cx = _build_complex(cfg)
    cx.require_nilpotent()
    columns = ["p", "weight", "momentum", "dimC", "dimZ", "dimB", "dimH"]
    failures = []
    rows = []
    if cfg.extra.get("relative"):
        ps = cfg.fermions if cfg.fermions is not None else _fermion_range(cx, 0)
        for res in cx.relative_cohomology(ps):
            rows.append(res.row())
        ec = sum((-1) ** r["p"] * r["dimC"] for r in rows)
        eh = sum((-1) ** r["p"] * r["dimH"] for r in rows)
        if ec != eh:
            failures.append(f"Euler-Poincare mismatch: {ec} != {eh}")
    else:
        if cfg.jobs > 1 and len(cfg.weights) > 1:
            with ProcessPoolExecutor(cfg.jobs) as pool:
                results = list(pool.map(_weight_rows, [cfg] * len(cfg.weights), cfg.weights))
        else:
            results = [_weight_rows(cfg, w) for w in cfg.weights]
        for r, f in results:
            rows.extend(r)
            failures.extend(f)
    meta = {"command": "cohomology", "matter": cfg.matter or "heis:25,1",
            "relative": bool(cfg.extra.get("relative")),
            "kappa": format_rational(cx.kappa), "checks_passed": not failures,
            "failures": failures}
    _emit(rows, columns, cfg.fmt, meta, out)
    for f in failures:
        print(f"error: {f}", file=sys.stderr)
    return EXIT_CHECK if failures else EXIT_OK


# --------------------------------------------------------------------------
# monster-dims
# --------------------------------------------------------------------------


def parse_gram(text: str) -> LatticeSpec:
    try:
        rows = [[int(x) for x in r.split(",")] for r in text.split(";")]
    except ValueError:
        raise UsageError(f"bad Gram matrix {text!r}")
    if len(rows) != 2:
        raise UsageError("root multiplicities are tabulated for rank-2 lattices")
    try:
        return LatticeSpec(tuple(map(tuple, rows)))
    except ValueError as e:
        raise UsageError(str(e))


def cmd_monster_dims(cfg: RunConfig, out=sys.stdout) -> int:
    lattice = parse_gram(cfg.extra["gram"]) if cfg.extra.get("gram") else II11
    j1, j2 = j_series(cfg.order), j_series_convolution(cfg.order)
    agree = j1 == j2
    rows = []
    if agree:
        for m, n, half, mult in monster_table(lattice, cfg.extra["m"], cfg.extra["n"],
                                              cfg.order, check_routes=False):
            rows.append({"m": m, "n": n, "half_norm": format_rational(half),
                         "multiplicity": mult})
    meta = {"command": "monster-dims", "gram": [list(r) for r in lattice.gram],
            "order": cfg.order, "routes_agree": agree}
    _emit(rows, ["m", "n", "half_norm", "multiplicity"], cfg.fmt, meta, out)
    if not agree:
        print("error: the two j-function routes disagree", file=sys.stderr)
        return EXIT_CHECK
    return EXIT_OK


# --------------------------------------------------------------------------
# bv-audit
# --------------------------------------------------------------------------


def cmd_bv_audit(cfg: RunConfig, out=sys.stdout) -> int:
    matter = resolve_algebra(cfg.matter or "vir:26")
    report = verify_bv_axioms(matter, samples=cfg.extra.get("samples", 50),
                              seed=cfg.extra.get("seed", 0),
                              max_weight=cfg.extra.get("max_weight", 4))
    out.write(json.dumps(report, indent=2, sort_keys=True) + "\n")
    return EXIT_OK if report["passed"] else EXIT_CHECK


# --------------------------------------------------------------------------
# argument parsing
# --------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="qoa", description=__doc__.splitlines()[0])
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=["text", "json", "tsv"], default=None)
    common.add_argument("--cache-dir", default=None,
                        help=f"differential cache directory (default ${CACHE_ENV})")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ope", parents=[common], help="polar part and Wick product of two operators")
    p.add_argument("--algebra", default="bc", help="built-in name (bc, vir:26, heis:25,1, a*b) or file")
    p.add_argument("--matter", help="with --algebra bc: use bc (x) matter, where J and Lm are defined")
    p.add_argument("--left", required=True)
    p.add_argument("--right", required=True)

    p = sub.add_parser("cohomology", parents=[common], help="BRST cohomology table")
    p.add_argument("--matter", default="heis:25,1")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--momentum", help="comma list, zero-padded to the lattice rank")
    g.add_argument("--norm", type=int, help="pick a small alpha with alpha.alpha/2 = NORM")
    p.add_argument("--fermion", help="range a:b or list (default: every nonempty degree)")
    p.add_argument("--weight", default="0", help="range a:b or list of total weights")
    p.add_argument("--relative", action="store_true", help="relative complex (weight 0, ker b(1))")
    p.add_argument("--allow-anomaly", action="store_true")
    p.add_argument("--jobs", type=int, default=1, help="worker processes over weights")

    p = sub.add_parser("monster-dims", parents=[common], help="root multiplicities from j - 744")
    p.add_argument("--gram", help="rank-2 Gram matrix 'a,b;c,d' (default II_{1,1})")
    p.add_argument("--m", default="-3:3")
    p.add_argument("--n", default="-3:3")
    p.add_argument("--order", type=int, default=64)

    p = sub.add_parser("bv-audit", parents=[common], help="randomized BV axiom suite (JSON)")
    p.add_argument("--matter", default="vir:26")
    p.add_argument("--samples", type=int, default=50)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-weight", type=int, default=4)
    return ap


def config_from_args(ns) -> RunConfig:
    cmd = ns.command
    default_fmt = {"cohomology": "tsv", "monster-dims": "tsv"}.get(cmd, "text")
    cfg = RunConfig(command=cmd, fmt=ns.format or default_fmt,
                    cache_dir=ns.cache_dir or os.environ.get(CACHE_ENV))
    if cmd == "ope":
        cfg.algebra, cfg.matter = ns.algebra, ns.matter
        cfg.extra = {"left": ns.left, "right": ns.right}
    elif cmd == "cohomology":
        cfg.matter = ns.matter
        cfg.jobs = ns.jobs
        cfg.weights = parse_range(ns.weight)
        cfg.fermions = parse_range(ns.fermion) if ns.fermion else None
        if ns.norm is not None:
            alg = resolve_algebra(ns.matter)
            fam = [f for f in alg.families if f[0] == "heisenberg"]
            if len(fam) != 1:
                raise UsageError("--norm needs exactly one Heisenberg factor")
            cfg.momentum = momentum_for_norm(ns.norm, fam[0][1]["k"], fam[0][1]["l"])
        elif ns.momentum:
            try:
                cfg.momentum = tuple(to_rational(x) for x in ns.momentum.split(","))
            except (ValueError, ZeroDivisionError):
                raise UsageError(f"bad momentum {ns.momentum!r}")
        if ns.relative and cfg.weights != (0,):
            raise UsageError("--relative computes weight 0 only")
        cfg.extra = {"relative": ns.relative, "allow_anomaly": ns.allow_anomaly}
    elif cmd == "monster-dims":
        cfg.order = ns.order
        cfg.extra = {"gram": ns.gram, "m": parse_range(ns.m), "n": parse_range(ns.n)}
    elif cmd == "bv-audit":
        cfg.matter = ns.matter
        cfg.extra = {"samples": ns.samples, "seed": ns.seed, "max_weight": ns.max_weight}
    return cfg.validate()


COMMANDS = {"ope": cmd_ope, "cohomology": cmd_cohomology,
            "monster-dims": cmd_monster_dims, "bv-audit": cmd_bv_audit}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        ns = build_parser().parse_args(argv)
    except SystemExit as e:  # --help and argparse usage errors
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    try:
        cfg = config_from_args(ns)
        return COMMANDS[cfg.command](cfg, out)
    except AnomalyError as e:
        print(f"error: anomaly: {e}", file=sys.stderr)
        return EXIT_ANOMALY
    except ParseError as e:
        print(f"error: parse: {e}", file=sys.stderr)
        return EXIT_PARSE
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
