"""Exact LP audit of the feasible-iff-satisfiable reduction for 3-SAT."""

from .builder import LinearSystem, Mode, Row, Rule, Tag, build, build_full, build_reduced, build_universal, dump_lp, stats
from .cnf import CnfInstance, emit_dimacs, generate_random_3sat, parse_dimacs
from .exact import (
    FarkasCertificate,
    Feasible,
    Infeasible,
    Solver,
    enumerate_vertices,
    maximize,
    phase1_feasibility,
    rank,
    verify_farkas,
)
from .extraction import AssignmentCertificate, extract_deterministic, is_separable, marginal_expression
from .oracle import OracleResult, brute_force_sat

__version__ = "0.1.0"
