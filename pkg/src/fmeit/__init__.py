"""Exact Fourier-Motzkin elimination for information-theoretic rate
regions, with redundancy removal against Shannon-type inequalities."""

from .fme import InfeasibleSystem, WorkingSystem, eliminate_all, eliminate_one
from .lp import (Infeasible, LpProblem, Optimal, Unbounded, check_certificate,
                 solve_min)
from .model import (Constraint, EntropyBasis, LinExpr, MeasureTerm,
                    VarRegistry, canonicalize_measure)
from .parser import ParseError, Problem, parse_problem
from .reducer import ReductionReport, is_redundant, reduce
from .shannon import (Independence, Markov, ShannonContext,
                      elemental_inequalities)

__all__ = [
    "Constraint", "EntropyBasis", "Infeasible", "InfeasibleSystem",
    "Independence", "LinExpr", "LpProblem", "Markov", "MeasureTerm",
    "Optimal", "ParseError", "Problem", "ReductionReport", "ShannonContext",
    "Unbounded", "VarRegistry", "WorkingSystem", "canonicalize_measure",
    "check_certificate", "elemental_inequalities", "eliminate_all",
    "eliminate_one", "is_redundant", "parse_problem", "reduce", "solve_min",
]
