"""Command-line front end.

    fme-it [--format text|machine] [--prune-each-step] [--show-certificates]
           [--no-sti] <file|->

Exit status: 0 success, 1 parse or validation errors, 2 empty region,
3 I/O failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence, TextIO

from .fme import InfeasibleSystem, WorkingSystem, eliminate_all
from .lp import Infeasible, LpOutcome, Optimal, Unbounded
from .model import (ENTROPY, GE, RATE, Constraint, EntropyBasis, LinExpr,
                    VarRegistry)
from .parser import ParseError, Problem, format_terms, parse_problem, render_expr
from .reducer import ReductionReport, lp_pruner, reduce
from .shannon import ShannonContext

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INFEASIBLE = 2
EXIT_IO = 3


@dataclass(frozen=True)
class CliConfig:
    input_path: str = "-"
    output_format: str = "text"
    prune_each_step: bool = False
    show_certificates: bool = False
    no_sti: bool = False


@dataclass(frozen=True)
class Solution:
    problem: Problem
    context: ShannonContext
    eliminated: WorkingSystem
    report: ReductionReport


def assemble(problem: Problem) -> WorkingSystem:
    """Input rows plus ``R >= 0`` for every rate when ``nonneg: all``."""
    rows = list(problem.constraints)
    if problem.nonneg_all:
        for i in range(1, len(problem.registry.rate_vars) + 1):
            rows.append(Constraint(LinExpr.rate(i), GE, "nonneg"))
    return WorkingSystem(tuple(rows),
                         frozenset(range(1, len(problem.registry.rate_vars) + 1)),
                         problem.basis)


def solve(problem: Problem, *, no_sti: bool = False,
          prune_each_step: bool = False) -> Solution:
    """Assemble, eliminate and reduce.  Raises :class:`InfeasibleSystem`
    when elimination already exposes a contradiction."""
    basis = problem.basis
    if no_sti:
        context = ShannonContext.empty(basis)
    else:
        context = ShannonContext.build(basis, problem.dependencies)
    lp_prune = lp_pruner(context) if prune_each_step else None
    system = eliminate_all(assemble(problem), problem.eliminate, lp_prune)
    return Solution(problem, context, system, reduce(system, context))


# -- text rendering -------------------------------------------------------------

@dataclass(frozen=True)
class DisplayRow:
    text: str
    sort_key: tuple


def display_row(c: Constraint, registry: VarRegistry, basis: EntropyBasis,
                targets: Sequence[int]) -> DisplayRow:
    """Isolate the target rates (all rates if no targets are given) on the
    left-hand side with a positive leading coefficient."""
    expr = c.expr
    rates = expr.rate_coeffs
    iso = [t for t in (targets or sorted(rates)) if t in rates]
    lhs_terms = {(RATE, t): -rates[t] for t in iso}
    rhs = expr.substitute_zero(lhs_terms)
    flip = bool(iso) and rates[iso[0]] > 0
    op = "=" if c.is_eq else "<="
    if flip:
        lhs_terms = {k: -v for k, v in lhs_terms.items()}
        rhs = -rhs
        if not c.is_eq:
            op = ">="
    if not iso:
        text = f"{render_expr(expr, registry, basis)} {'=' if c.is_eq else '>='} 0"
        return DisplayRow(text, (2, (), text))
    lhs = format_terms((v, registry.rate_vars[k[1] - 1])
                       for k, v in sorted(lhs_terms.items()))
    text = f"{lhs} {op} {render_expr(rhs, registry, basis)}"
    order = targets or tuple(range(1, len(registry.rate_vars) + 1))
    if len(iso) == 1:
        return DisplayRow(text, (0, (order.index(iso[0]),), text))
    vector = tuple(lhs_terms.get((RATE, t), Fraction(0)) for t in order)
    return DisplayRow(text, (1, vector, text))


def render_rows(rows: Sequence[Constraint], problem: Problem) -> list[str]:
    basis = problem.basis
    shown = [display_row(c, problem.registry, basis, problem.targets)
             for c in rows]
    return [d.text for d in sorted(shown, key=lambda d: d.sort_key)]


def describe_certificate(outcome: LpOutcome, labels: tuple[Sequence[str], Sequence[str]] = ((), ()),
                         exact: bool = False) -> str:
    """One-line summary of an LP outcome; ``exact`` prints every rational
    as ``p/q``."""
    def q(v: Fraction) -> str:
        return f"{v.numerator}/{v.denominator}" if exact else str(v)

    def mults(ys, zs) -> str:
        ge_labels, eq_labels = labels
        parts = []
        for names, values in ((ge_labels, ys), (eq_labels, zs)):
            for k, v in enumerate(values):
                if v:
                    name = names[k] if k < len(names) else f"[{k}]"
                    parts.append(f"{name}:{q(v)}")
        return ",".join(parts)

    if isinstance(outcome, Optimal):
        return (f"optimal value={q(outcome.value)} "
                f"multipliers={mults(outcome.ge_multipliers, outcome.eq_multipliers)}")
    if isinstance(outcome, Infeasible):
        return ("infeasible multipliers="
                + mults(outcome.ge_multipliers, outcome.eq_multipliers))
    if isinstance(outcome, Unbounded):
        return "unbounded"
    return "unknown"


def emit_text(solution: Solution, show_certificates: bool = False) -> str:
    problem = solution.problem
    report = solution.report
    lines = render_rows(report.kept, problem)
    if show_certificates and report.removed:
        lines.append("")
        lines.append("# removed")
        for removal in report.removed:
            shown = display_row(removal.row, problem.registry, problem.basis,
                                problem.targets)
            lines.append(f"# {shown.text}")
            lines.append("#   " + describe_certificate(
                removal.certificate, (removal.ge_labels, removal.eq_labels)))
    return "\n".join(lines) + "\n"


# -- machine report -------------------------------------------------------------

def _term_name(key, registry: VarRegistry | None, basis: EntropyBasis | None) -> str:
    kind, idx = key
    if kind == RATE:
        if registry is not None and idx <= len(registry.rate_vars):
            return registry.rate_vars[idx - 1]
        return f"r{idx}"
    if basis is not None and basis.n:
        return f"H({basis.label(idx)})"
    return f"H[{idx}]"


def _pq(v: Fraction) -> str:
    return f"{v.numerator}/{v.denominator}"


def machine_row(c: Constraint, ident: int | None = None,
                registry: VarRegistry | None = None,
                basis: EntropyBasis | None = None) -> str:
    parts = ["eq" if c.is_eq else "ge"]
    if ident is not None:
        parts.append(f"id=#{ident}")
    for key, v in c.expr.items():
        parts.append(f"{_term_name(key, registry, basis)}={_pq(v)}")
    parts.append(f"const={_pq(c.expr.constant)}")
    parts.append(f"origin={c.origin or '-'}")
    return " ".join(parts)


def emit_machine_report(report: ReductionReport,
                        registry: VarRegistry | None = None,
                        basis: EntropyBasis | None = None) -> str:
    """Line-oriented ``key: value`` report.

    ::

        infeasible: false
        kept_count: <n>
        removed_count: <m>
        kept: ge id=#3 R1=-1/1 H(X1)=1/1 const=0/1 origin=line:7
        removed: ge id=#5 ...
        certificate: optimal value=0/1 multipliers=#3:1/1,G[12]:1/1

    One ``kept:`` line per kept row; each ``removed:`` line is followed by
    the ``certificate:`` of the LP that proved it redundant.
    """
    kept_ids = report.kept_ids or (None,) * len(report.kept)
    removed_ids = report.removed_ids or (None,) * len(report.removed)
    lines = [f"infeasible: {'true' if report.infeasible else 'false'}",
             f"kept_count: {len(report.kept)}",
             f"removed_count: {len(report.removed)}"]
    for c, ident in zip(report.kept, kept_ids):
        lines.append("kept: " + machine_row(c, ident, registry, basis))
    for removal, ident in zip(report.removed, removed_ids):
        lines.append("removed: " + machine_row(removal.row, ident, registry, basis))
        lines.append("certificate: " + describe_certificate(
            removal.certificate, (removal.ge_labels, removal.eq_labels),
            exact=True))
    if report.infeasibility is not None:
        lines.append("certificate: " + describe_certificate(
            report.infeasibility, exact=True))
    return "\n".join(lines) + "\n"


# -- entry point -----------------------------------------------------------------

def run(config: CliConfig, stdout: TextIO = sys.stdout,
        stderr: TextIO = sys.stderr) -> int:
    try:
        if config.input_path == "-":
            text = sys.stdin.read()
        else:
            with open(config.input_path, encoding="utf-8") as fh:
                text = fh.read()
    except (OSError, UnicodeDecodeError) as e:
        print(f"fme-it: cannot read {config.input_path}: {e}", file=stderr)
        return EXIT_IO

    try:
        problem = parse_problem(text)
    except ParseError as e:
        for d in e.diagnostics:
            print(f"{config.input_path}:{d.line}:{d.column}: {d.message}",
                  file=stderr)
        return EXIT_PARSE

    try:
        solution = solve(problem, no_sti=config.no_sti,
                         prune_each_step=config.prune_each_step)
    except InfeasibleSystem as e:
        if config.output_format == "machine":
            stdout.write("infeasible: true\nkept_count: 0\nremoved_count: 0\n")
        print(f"fme-it: the constraint system is infeasible ({e})", file=stderr)
        return EXIT_INFEASIBLE

    report = solution.report
    if config.output_format == "machine":
        stdout.write(emit_machine_report(report, problem.registry, problem.basis))
    elif not report.infeasible:
        stdout.write(emit_text(solution, config.show_certificates))
    if report.infeasible:
        print("fme-it: the constraint system is infeasible (empty region)",
              file=stderr)
        return EXIT_INFEASIBLE
    return EXIT_OK


def main(argv: Sequence[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="fme-it",
        description="Fourier-Motzkin elimination with Shannon-type "
                    "redundancy removal.")
    parser.add_argument("input", help="problem file, or - for standard input")
    parser.add_argument("--format", choices=("text", "machine"), default="text")
    parser.add_argument("--prune-each-step", action="store_true",
                        help="run the LP redundancy sweep after every elimination")
    parser.add_argument("--show-certificates", action="store_true",
                        help="list removed rows with their LP certificates")
    parser.add_argument("--no-sti", action="store_true",
                        help="plain polyhedral redundancy only (no Shannon "
                             "inequalities, no dependency equalities)")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=(logging.WARNING, logging.INFO, logging.DEBUG)[min(args.verbose, 2)],
        format="%(name)s: %(message)s")
    config = CliConfig(args.input, args.format, args.prune_each_step,
                       args.show_certificates, args.no_sti)
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
