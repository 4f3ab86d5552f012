"""Redundancy removal against the Shannon cone and dependency equalities,
plus re-synthesis of readable measures for display."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

from .fme import InfeasibleSystem, WorkingSystem
from .lp import Infeasible, LpOutcome, LpProblem, Optimal, solve_min
from .model import Constraint, EntropyBasis, LinExpr
from .shannon import ShannonContext

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class Removal:
    """A removed row with the LP that proved it redundant.

    ``ge_labels``/``eq_labels`` name the LP rows in order: ``#k`` is row
    ``k`` of the reduced system's input, ``G[k]`` an elemental inequality
    and ``Q[k]`` a dependency equality.
    """

    row: Constraint
    certificate: LpOutcome
    problem: LpProblem = field(repr=False, compare=False)
    ge_labels: tuple[str, ...] = field(default=(), repr=False)
    eq_labels: tuple[str, ...] = field(default=(), repr=False)

    def __iter__(self):
        return iter((self.row, self.certificate))


@dataclass(frozen=True)
class ReductionReport:
    kept: tuple[Constraint, ...]
    removed: tuple[Removal, ...] = ()
    infeasible: bool = False
    kept_ids: tuple[int, ...] = ()
    removed_ids: tuple[int, ...] = ()
    # Farkas certificate (over all rows plus context) when the region is empty
    infeasibility: Infeasible | None = field(default=None, compare=False)


def redundancy_lp(i: int, rows: Sequence[Constraint],
                  sti: ShannonContext) -> LpProblem:
    """LP minimising row ``i`` over the other rows and the context.

    The first GE row is the tested row loosened by one unit,
    ``a.x + k + 1 >= 0``.  It keeps the LP bounded without changing the
    verdict: a redundant row keeps its minimum, an irredundant one reaches
    the bound ``-1`` after the constant is added back.
    """
    target = rows[i].expr
    bound = target + LinExpr.const(1)
    ge = [c.expr for j, c in enumerate(rows) if j != i and not c.is_eq]
    eq = [c.expr for c in rows if c.is_eq]
    return LpProblem(target, [bound] + ge + list(sti.g_rows),
                     eq + list(sti.q_rows))


def verdict(row: Constraint, outcome: LpOutcome) -> bool:
    if isinstance(outcome, Optimal):
        # the LP ignores the row's constant; add it back
        return outcome.value + row.expr.constant >= 0
    return isinstance(outcome, Infeasible)


def is_redundant(i: int, rows: Sequence[Constraint],
                 sti: ShannonContext) -> tuple[bool, LpOutcome]:
    """Whether GE row ``i`` is implied by the remaining rows together with
    the elemental inequalities and dependency equalities of ``sti``."""
    if rows[i].is_eq:
        raise ValueError("only inequality rows are tested for redundancy")
    outcome = solve_min(redundancy_lp(i, rows, sti))
    return verdict(rows[i], outcome), outcome


def feasibility(rows: Sequence[Constraint], sti: ShannonContext) -> LpOutcome:
    ge = [c.expr for c in rows if not c.is_eq]
    eq = [c.expr for c in rows if c.is_eq]
    return solve_min(LpProblem(LinExpr(), ge + list(sti.g_rows),
                               eq + list(sti.q_rows)))


def reduce(sys: WorkingSystem, sti: ShannonContext) -> ReductionReport:
    """Remove redundant GE rows one at a time.

    Rows are scanned from last to first; a redundant row is dropped at
    once and the scan restarts.  Of two rows that imply each other the
    later one is therefore tested first and the earlier one is kept.
    Dropping rows only enlarges the region, so a row once found
    irredundant stays irredundant and is not re-tested after a restart.
    Equalities are kept untested.
    """
    rows = list(sys.constraints)
    ids = list(range(len(rows)))
    check = feasibility(rows, sti)
    if isinstance(check, Infeasible):
        log.info("system is infeasible")
        return ReductionReport(tuple(rows), (), True, tuple(ids), (), check)

    g_labels = [f"G[{k}]" for k in range(len(sti.g_rows))]
    q_labels = [f"Q[{k}]" for k in range(len(sti.q_rows))]
    removed = []
    removed_ids = []
    irredundant: set[int] = set()
    restart = True
    while restart:
        restart = False
        for pos in reversed(range(len(ids))):
            ident = ids[pos]
            if rows[pos].is_eq or ident in irredundant:
                continue
            problem = redundancy_lp(pos, rows, sti)
            outcome = solve_min(problem)
            if verdict(rows[pos], outcome):
                log.debug("removed #%d", ident)
                ge_labels = [f"#{ident}+1"] + [f"#{ids[j]}" for j, c in enumerate(rows)
                             if j != pos and not c.is_eq] + g_labels
                eq_labels = [f"#{ids[j]}" for j, c in enumerate(rows)
                             if c.is_eq] + q_labels
                removed.append(Removal(rows[pos], outcome, problem,
                                       tuple(ge_labels), tuple(eq_labels)))
                removed_ids.append(ident)
                del rows[pos]
                del ids[pos]
                restart = True
                break
            irredundant.add(ident)
    return ReductionReport(tuple(rows), tuple(removed), False, tuple(ids),
                           tuple(removed_ids))


def lp_pruner(sti: ShannonContext) -> Callable[[WorkingSystem], WorkingSystem]:
    """Per-step hook for :func:`~fmeit.fme.eliminate_all` that keeps only
    the rows surviving :func:`reduce`."""
    def prune(s: WorkingSystem) -> WorkingSystem:
        report = reduce(s, sti)
        if report.infeasible:
            raise InfeasibleSystem("region is empty")
        return s.with_constraints(report.kept)
    return prune


# -- display ------------------------------------------------------------------

def _match_mi(coeffs: dict[int, Fraction]):
    """First ``k * I(A;B|C)`` whose four coordinates all carry the right
    signs in ``coeffs``, scanning joint sets and pairs in mask order."""
    for top in sorted(coeffs):
        # k*I(A;B|C) puts sign(k) on H(AC), H(BC) and -sign(k) on H(ABC), H(C)
        s = 1 if coeffs[top] < 0 else -1
        subs = sorted(m for m, v in coeffs.items()
                      if m != top and m & ~top == 0 and (v > 0) == (s > 0))
        for x, ac in enumerate(subs):
            for bc in subs[x + 1:]:
                if ac | bc != top:
                    continue
                c = ac & bc
                if c == ac or c == bc:
                    continue
                if c and (c not in coeffs or (coeffs[c] > 0) == (s > 0)):
                    continue
                k = min(abs(coeffs[m]) for m in (top, ac, bc) + ((c,) if c else ()))
                return s * k, ac & ~c, bc & ~c, c
    return None


def _match_ce(coeffs: dict[int, Fraction]):
    for ab in sorted(coeffs):
        s = 1 if coeffs[ab] > 0 else -1
        for b in sorted(coeffs):
            if b != ab and b & ~ab == 0 and (coeffs[b] > 0) != (s > 0):
                k = min(abs(coeffs[ab]), abs(coeffs[b]))
                return s * k, ab & ~b, b
    return None


def decompose_measures(e: LinExpr) -> list[tuple[Fraction, str, tuple[int, ...]]]:
    """Greedy split of the entropy part of ``e`` into
    ``(coeff, kind, masks)`` terms with kind ``"I"``, ``"H|"`` or ``"H"``.
    The terms sum back to the entropy part exactly."""
    coeffs = dict(e.entropy_coeffs)
    terms = []

    def sub(mask, amount):
        v = coeffs.get(mask, 0) - amount
        if v:
            coeffs[mask] = v
        else:
            coeffs.pop(mask, None)

    while True:
        m = _match_mi(coeffs)
        if m is None:
            break
        k, a, b, c = m
        terms.append((k, "I", (a, b, c)))
        sub(a | c, k)
        sub(b | c, k)
        sub(a | b | c, -k)
        if c:
            sub(c, -k)
    while True:
        m = _match_ce(coeffs)
        if m is None:
            break
        k, a, b = m
        terms.append((k, "H|", (a, b)))
        sub(a | b, k)
        sub(b, -k)
    for mask in sorted(coeffs):
        terms.append((coeffs[mask], "H", (mask,)))
    return terms


def measure_text(kind: str, masks: tuple[int, ...], basis: EntropyBasis) -> str:
    if kind == "I":
        a, b, c = masks
        text = f"I({basis.label(a)};{basis.label(b)}"
        return text + (f"|{basis.label(c)})" if c else ")")
    if kind == "H|":
        a, b = masks
        return f"H({basis.label(a)}|{basis.label(b)})"
    return f"H({basis.label(masks[0])})"


def resynthesize_measures(e: LinExpr, basis: EntropyBasis) -> str:
    """Entropy part of ``e`` written with I(;|), H(|) and H() terms."""
    from .parser import format_terms
    return format_terms(
        [(k, measure_text(kind, masks, basis))
         for k, kind, masks in decompose_measures(e)])
