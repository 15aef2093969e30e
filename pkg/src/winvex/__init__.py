"""Numerical classification of generalized invexity.

The package checks user-supplied (h, eta, w) triples against the
w-invexity hierarchy by seeded sampling and counterexample search,
verifies the structural results (epigraph, level sets, closures,
argmin structure, pseudo-invexity) on concrete instances, and solves
the associated constrained program against a brute-force grid oracle.
"""

from .exprlang import FunctionDef, identity_map, parse, pretty_print
from .invexity import (ClassId, ClassReport, Counterexample, Verdict,
                       check_class, check_pre_pseudo, check_set_invex,
                       classify, required_b)
from .optimize import (OptProblem, SolveResult, SolverConfig, brute_force_min,
                       local_descent, multistart_solve,
                       verify_optimality_theorems)
from .sampling import CheckConfig, Domain, delta_grid, sample_pairs

__version__ = "0.1.0"

__all__ = [
    "CheckConfig", "ClassId", "ClassReport", "Counterexample", "Domain",
    "FunctionDef", "OptProblem", "SolveResult", "SolverConfig", "Verdict",
    "brute_force_min", "check_class", "check_pre_pseudo", "check_set_invex",
    "classify", "delta_grid", "identity_map", "local_descent",
    "multistart_solve", "parse", "pretty_print", "required_b",
    "sample_pairs", "verify_optimality_theorems",
]
