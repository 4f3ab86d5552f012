"""Exact Fourier-Motzkin elimination of rate variables.

Entropy coordinates take part in the rows like any other variable but are
never eliminated.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .model import (GE, RATE, Constraint, EntropyBasis, LinExpr,
                    linexpr_combine, normalize_constraint, normalize_expr)

log = logging.getLogger(__name__)


class InfeasibleSystem(ValueError):
    """The constraints contradict each other."""

    def __init__(self, message: str, row: Constraint | None = None):
        super().__init__(message)
        self.row = row


@dataclass(frozen=True)
class WorkingSystem:
    constraints: tuple[Constraint, ...]
    remaining_rates: frozenset[int]
    basis: EntropyBasis = EntropyBasis(0)

    def __post_init__(self):
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "remaining_rates",
                           frozenset(self.remaining_rates))

    @classmethod
    def of(cls, constraints: Iterable[Constraint],
           basis: EntropyBasis = EntropyBasis(0)) -> "WorkingSystem":
        constraints = tuple(constraints)
        rates = {key[1] for c in constraints for key in c.expr.coeffs
                 if key[0] == RATE}
        return cls(constraints, frozenset(rates), basis)

    def with_constraints(self, constraints: Iterable[Constraint]) -> "WorkingSystem":
        return replace(self, constraints=tuple(constraints))


def eliminate_one(sys: WorkingSystem, var: int) -> WorkingSystem:
    """Project out rate ``var``.

    An equality containing ``var`` is used as a substitution if one exists;
    otherwise GE rows with positive and negative coefficients are combined
    pairwise.
    """
    key = (RATE, var)
    rows = sys.constraints
    remaining = sys.remaining_rates - {var}

    pivot_at = next((i for i, c in enumerate(rows)
                     if c.is_eq and key in c.expr.coeffs), None)
    if pivot_at is not None:
        eq = rows[pivot_at].expr
        a = eq.coeff(key)
        out = []
        for i, c in enumerate(rows):
            if i == pivot_at:
                continue
            b = c.expr.coeff(key)
            if not b:
                out.append(c)
                continue
            # |a| * row - sign(a) * b * eq keeps the direction of GE rows
            expr = linexpr_combine(c.expr, abs(a), eq, -b if a > 0 else b)
            out.append(normalize_constraint(Constraint(expr, c.relation, "fme")))
        return replace(sys, constraints=tuple(out), remaining_rates=remaining)

    pos, neg, out = [], [], []
    for c in rows:
        coeff = c.expr.coeff(key)
        if not coeff:
            out.append(c)
        elif coeff > 0:
            pos.append(c)
        else:
            neg.append(c)
    for ci in pos:
        ai = ci.expr.coeff(key)
        for cj in neg:
            aj = cj.expr.coeff(key)
            expr = linexpr_combine(ci.expr, -aj, cj.expr, ai)
            out.append(normalize_constraint(Constraint(expr, GE, "fme")))
    log.debug("eliminate r%d: z=%d p=%d n=%d -> %d rows",
              var, len(rows) - len(pos) - len(neg), len(pos), len(neg),
              len(out))
    return replace(sys, constraints=tuple(out), remaining_rates=remaining)


def _direction(expr: LinExpr) -> tuple[LinExpr, Fraction]:
    """Primitive integer linear part and the constant on the same scale."""
    lin = normalize_expr(expr.linear_part())
    if not expr.coeffs:
        return lin, expr.constant
    key = next(iter(expr.coeffs))
    scale = lin.coeff(key) / expr.coeff(key)
    return lin, expr.constant * scale


def prune_syntactic(sys: WorkingSystem) -> WorkingSystem:
    """Drop duplicates, rows dominated by a parallel stronger row and
    trivially true rows; raise :class:`InfeasibleSystem` on ``0 >= k > 0``
    style contradictions."""
    best: dict = {}
    order: list = []
    for c in sys.constraints:
        c = normalize_constraint(c)
        expr = c.expr
        if expr.is_constant():
            if (c.is_eq and expr.constant) or expr.constant < 0:
                raise InfeasibleSystem(
                    f"contradictory row {expr.constant} {c.relation.value} 0",
                    c)
            continue
        if c.is_eq:
            slot = ("eq", expr)
            if slot not in best:
                best[slot] = c
                order.append(slot)
            continue
        lin, const = _direction(expr)
        slot = ("ge", lin)
        if slot not in best:
            best[slot] = (const, c)
            order.append(slot)
        elif const < best[slot][0]:
            best[slot] = (const, c)
    out = []
    for slot in order:
        entry = best[slot]
        out.append(entry if slot[0] == "eq" else entry[1])
    return sys.with_constraints(out)


def eliminate_all(sys: WorkingSystem, variables: Sequence[int],
                  lp_prune: Callable[[WorkingSystem], WorkingSystem] | None = None,
                  ) -> WorkingSystem:
    """Eliminate ``variables`` in the given order, pruning after each step.

    ``lp_prune``, when given, runs after the syntactic pruning of every
    step (e.g. a full LP redundancy sweep).
    """
    sys = prune_syntactic(sys)
    for var in variables:
        sys = prune_syntactic(eliminate_one(sys, var))
        if lp_prune is not None:
            sys = lp_prune(sys)
        log.info("eliminated r%d: %d rows", var, len(sys.constraints))
    return sys


def split_equalities(sys: WorkingSystem) -> WorkingSystem:
    """Replace every equality row by the two opposite inequalities."""
    out = []
    for c in sys.constraints:
        if c.is_eq:
            out.append(Constraint(c.expr, GE, c.origin))
            out.append(Constraint(-c.expr, GE, c.origin))
        else:
            out.append(c)
    return sys.with_constraints(out)
