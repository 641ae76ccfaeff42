"""Exact computer algebra for quantum operator algebras: Wick calculus,
free-field modules, BRST and relative cohomology, BV structure and
q-series bookkeeping."""
from .algebras import (
    basis_enumerate,
    builtin_algebra,
    load_algebra,
    make_bc_system,
    make_current_algebra,
    make_heisenberg,
    make_virasoro,
    tensor,
    verify_conformal_structure,
)
from .brst import BRSTComplex, anomaly, anomaly_formula, brst_algebra, brst_current, nu_maps, physical_space
from .bv import OperatorComplex, verify_bv_axioms
from .core import BiDegree, Poly
from .grammar import ParseError, format_expr, parse_expr
from .linalg import SparseMatrix, exact_rank, exact_signature, kernel_basis
from .modules import TensorModule, make_fock, make_ghost_fock, make_virasoro_vacuum
from .qseries import QSeries, II11, LatticeSpec, j_series, monster_root_multiplicity
from .wick import Algebra, OperatorExpr

__version__ = "0.1.0"

__all__ = [
    "Algebra",
    "BiDegree",
    "BRSTComplex",
    "II11",
    "LatticeSpec",
    "OperatorComplex",
    "OperatorExpr",
    "ParseError",
    "Poly",
    "QSeries",
    "SparseMatrix",
    "TensorModule",
    "anomaly",
    "anomaly_formula",
    "basis_enumerate",
    "brst_algebra",
    "brst_current",
    "builtin_algebra",
    "exact_rank",
    "exact_signature",
    "format_expr",
    "j_series",
    "kernel_basis",
    "load_algebra",
    "make_bc_system",
    "make_current_algebra",
    "make_fock",
    "make_ghost_fock",
    "make_heisenberg",
    "make_virasoro",
    "make_virasoro_vacuum",
    "monster_root_multiplicity",
    "nu_maps",
    "parse_expr",
    "physical_space",
    "tensor",
    "verify_bv_axioms",
    "verify_conformal_structure",
]
