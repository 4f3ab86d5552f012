"""Text front end: problem files in, rendered expressions out.

A problem file is line oriented.  ``#`` starts a comment.  Header lines
declare symbols and options; every line after ``subject to:`` is a
constraint::

    vars: Q, U1, U2, X1, X2, Y1, Y2
    rates: R1, R2, R10, R20, R11, R22
    eliminate: R11, R22, R10, R20
    targets: R1, R2
    nonneg: all
    markov: (X2,U2) - Q - (X1,U1)
    indep: X1; X2
    equal: H(Y1|X1) = 0
    subject to:
    R11 <= I(X1;Y1|U1,U2,Q)
    R11 = R1 - R10

See ``docs/grammar.md`` for the full grammar.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .model import (EQ, GE, RATE, Constraint, DeclarationError, EntropyBasis,
                    LinExpr, MeasureTerm, VarRegistry, canonicalize_measure,
                    normalize_constraint)
from .shannon import (DependencyStatement, EntropyEquality, Independence,
                      Markov)

KEYWORDS = ("vars", "rates", "eliminate", "targets", "nonneg", "markov",
            "indep", "equal", "subject to")
RESERVED = {"H", "I"}
_RESERVED_WORDS = {k for k in KEYWORDS if " " not in k} | {"subject"}


def is_reserved(name: str) -> bool:
    return name in RESERVED or name.lower() in _RESERVED_WORDS


_HEADER = re.compile(
    r"\s*(vars|rates|eliminate|targets|nonneg|markov|indep|equal"
    r"|subject\s+to)(?![A-Za-z0-9_])\s*:?", re.IGNORECASE)

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<num>(?:\d+\.\d*|\.\d+|\d+)(?:/\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op><=|>=|≤|≥|=|\+|-|\*|/|\(|\)|,|;|\|)
""", re.VERBOSE)

_RELATIONS = {"<=": "<=", "≤": "<=", ">=": ">=", "≥": ">=", "=": "="}


@dataclass(frozen=True)
class Diagnostic:
    line: int
    column: int
    message: str

    def __str__(self) -> str:
        return f"line {self.line}, column {self.column}: {self.message}"


class ParseError(ValueError):
    """Carries every diagnostic collected while reading a problem."""

    def __init__(self, diagnostics: Sequence[Diagnostic]):
        self.diagnostics = tuple(diagnostics)
        super().__init__("\n".join(str(d) for d in self.diagnostics))


class _LineError(Exception):
    def __init__(self, column: int, message: str):
        super().__init__(message)
        self.column = column
        self.message = message


@dataclass(frozen=True)
class Problem:
    registry: VarRegistry
    constraints: tuple[Constraint, ...] = ()
    dependencies: tuple[DependencyStatement, ...] = ()
    eliminate: tuple[int, ...] = ()
    targets: tuple[int, ...] = ()
    nonneg_all: bool = False

    @property
    def basis(self) -> EntropyBasis:
        return EntropyBasis.of(self.registry)


@dataclass
class _Tok:
    kind: str
    text: str
    col: int


def tokenize(text: str, col0: int = 1) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise _LineError(col0 + pos, f"unexpected character {text[pos]!r}")
        kind = m.lastgroup
        if kind != "ws":
            toks.append(_Tok(kind, m.group(), col0 + pos))
        pos = m.end()
    return toks


def parse_number(text: str) -> Fraction:
    """Exact value of a literal such as ``3``, ``0.25`` or ``3/4``."""
    if "/" in text:
        num, den = text.split("/")
        if int(den) == 0:
            raise ZeroDivisionError("zero denominator")
        return Fraction(num) / int(den)
    return Fraction(text)


class _ExprParser:
    """Recursive descent over one line's tokens."""

    def __init__(self, toks: list[_Tok], registry: VarRegistry,
                 basis: EntropyBasis, end_col: int):
        self.toks = toks
        self.i = 0
        self.registry = registry
        self.basis = basis
        self.end_col = end_col

    # token helpers
    def peek(self, offset: int = 0) -> _Tok | None:
        j = self.i + offset
        return self.toks[j] if j < len(self.toks) else None

    def at(self, *texts: str) -> bool:
        tok = self.peek()
        return tok is not None and tok.kind == "op" and tok.text in texts

    def take(self) -> _Tok:
        tok = self.peek()
        if tok is None:
            raise _LineError(self.end_col, "unexpected end of line")
        self.i += 1
        return tok

    def expect(self, text: str) -> _Tok:
        tok = self.peek()
        if tok is None or tok.text != text:
            found = "end of line" if tok is None else repr(tok.text)
            col = self.end_col if tok is None else tok.col
            raise _LineError(col, f"expected {text!r}, found {found}")
        return self.take()

    def done(self) -> bool:
        return self.i >= len(self.toks)

    # grammar
    def expr(self) -> LinExpr:
        if self.at("+", "-"):
            sign = self.take().text
            value = self.term()
            if sign == "-":
                value = -value
        else:
            value = self.term()
        while self.at("+", "-"):
            op = self.take().text
            rhs = self.term()
            value = value + rhs if op == "+" else value - rhs
        return value

    def term(self) -> LinExpr:
        start = self.peek()
        value = self.factor()
        literal = start is not None and start.kind == "num"
        while True:
            tok = self.peek()
            if tok is None:
                return value
            if tok.kind == "op" and tok.text in "*/":
                self.take()
                rhs_tok = self.peek()
                rhs = self.factor()
                if tok.text == "*":
                    value = self._product(value, rhs, tok.col)
                else:
                    if not rhs.is_constant():
                        raise _LineError(rhs_tok.col, "division by a non-constant")
                    if not rhs.constant:
                        raise _LineError(rhs_tok.col, "division by zero")
                    value = value * (1 / rhs.constant)
                literal = False
            elif literal and (tok.kind == "name" or tok.text == "("):
                # implicit product after a numeric literal: 2R1, 1/2I(X;Y)
                value = self._product(value, self.factor(), tok.col)
                literal = False
            else:
                return value

    def _product(self, a: LinExpr, b: LinExpr, col: int) -> LinExpr:
        if a.is_constant():
            return b * a.constant
        if b.is_constant():
            return a * b.constant
        raise _LineError(col, "non-linear term (product of two variables)")

    def factor(self) -> LinExpr:
        tok = self.take()
        if tok.kind == "num":
            try:
                return LinExpr.const(parse_number(tok.text))
            except (ValueError, ZeroDivisionError):
                raise _LineError(tok.col, f"bad number {tok.text!r}") from None
        if tok.kind == "op":
            if tok.text == "(":
                value = self.expr()
                self.expect(")")
                return value
            if tok.text in "+-":
                value = self.factor()
                return -value if tok.text == "-" else value
            raise _LineError(tok.col, f"unexpected {tok.text!r}")
        name = tok.text
        if name in ("H", "I") and self.at("("):
            return self.measure(name)
        if name in self.registry.rate_vars:
            return LinExpr.rate(self.registry.rate_index(name))
        if name in self.registry.random_vars:
            raise _LineError(
                tok.col, f"random variable {name!r} used outside H() or I()")
        raise _LineError(tok.col, f"undeclared symbol {name!r}")

    def varlist(self) -> int:
        mask = 0
        while True:
            tok = self.take()
            if tok.kind != "name":
                raise _LineError(tok.col, f"expected a random variable, found {tok.text!r}")
            if tok.text not in self.registry.random_vars:
                raise _LineError(tok.col, f"undeclared random variable {tok.text!r}")
            mask |= 1 << (self.registry.random_index(tok.text) - 1)
            if not self.at(","):
                return mask
            self.take()

    def measure(self, name: str) -> LinExpr:
        self.expect("(")
        a = self.varlist()
        b = c = 0
        if name == "I":
            self.expect(";")
            b = self.varlist()
            if self.at("|"):
                self.take()
                c = self.varlist()
            term = MeasureTerm.I(a, b, c)
        else:
            if self.at("|"):
                self.take()
                b = self.varlist()
            term = MeasureTerm.H(a, b)
        self.expect(")")
        return canonicalize_measure(term, self.basis)

    def relation_chain(self) -> list[tuple[LinExpr, str, LinExpr]]:
        sides = [self.expr()]
        ops = []
        while not self.done():
            tok = self.take()
            if tok.text not in _RELATIONS:
                raise _LineError(tok.col, f"unexpected {tok.text!r}")
            ops.append(_RELATIONS[tok.text])
            sides.append(self.expr())
        if not ops:
            raise _LineError(self.end_col, "expected a relation (<=, >=, =)")
        return [(sides[k], ops[k], sides[k + 1]) for k in range(len(ops))]

    def group(self) -> int:
        """``(A,B)`` or a bare variable list up to the next separator."""
        if self.at("("):
            self.take()
            mask = self.varlist()
            self.expect(")")
            return mask
        tok = self.peek()
        if tok is None or tok.kind != "name":
            col = self.end_col if tok is None else tok.col
            raise _LineError(col, "expected a group of random variables")
        return self.varlist()


def relation_to_constraints(lhs: LinExpr, op: str, rhs: LinExpr,
                            origin: str) -> Constraint:
    if op == "<=":
        return Constraint(rhs - lhs, GE, origin)
    if op == ">=":
        return Constraint(lhs - rhs, GE, origin)
    return Constraint(lhs - rhs, EQ, origin)


def _split_header(line: str):
    m = _HEADER.match(line)
    if m is None:
        return None
    keyword = " ".join(m.group(1).lower().split())
    return keyword, line[m.end():], m.end() + 1


def _names(text: str, col0: int) -> list[tuple[str, int]]:
    out = []
    toks = tokenize(text, col0)
    expect_name = True
    for tok in toks:
        if expect_name:
            if tok.kind != "name":
                raise _LineError(tok.col, f"expected a name, found {tok.text!r}")
            out.append((tok.text, tok.col))
        elif tok.text != ",":
            raise _LineError(tok.col, f"expected ',', found {tok.text!r}")
        expect_name = not expect_name
    if toks and expect_name:
        raise _LineError(toks[-1].col, "trailing ','")
    return out


def parse_problem(text: str) -> Problem:
    """Parse a problem file; raise :class:`ParseError` listing every
    problem found."""
    errors: list[Diagnostic] = []
    lines = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].rstrip()
        if line.strip():
            lines.append((lineno, line))

    # pass 1: declarations, so that order in the file does not matter
    declared: dict[str, list] = {"vars": [], "rates": []}
    seen: dict[str, int] = {}
    for lineno, line in lines:
        head = _split_header(line)
        if head is None or head[0] not in declared:
            continue
        keyword, rest, col0 = head
        try:
            for name, col in _names(rest, col0):
                if is_reserved(name):
                    errors.append(Diagnostic(lineno, col, f"{name!r} is reserved"))
                elif name in seen:
                    errors.append(Diagnostic(
                        lineno, col, f"duplicate declaration of {name!r} "
                        f"(first declared on line {seen[name]})"))
                else:
                    seen[name] = lineno
                    declared[keyword].append(name)
        except _LineError as e:
            errors.append(Diagnostic(lineno, e.column, e.message))
    registry = VarRegistry(declared["vars"], declared["rates"])
    basis = EntropyBasis.of(registry)

    constraints: list[Constraint] = []
    dependencies: list[DependencyStatement] = []
    eliminate: list[tuple[int, int, int]] = []
    targets: list[tuple[int, int, int]] = []
    nonneg = False
    in_body = False

    def rate_list(rest, col0, lineno, into):
        for name, col in _names(rest, col0):
            if name not in registry.rate_vars:
                errors.append(Diagnostic(lineno, col, f"{name!r} is not a declared rate"))
            else:
                into.append((registry.rate_index(name), lineno, col))

    for lineno, line in lines:
        head = _split_header(line)
        try:
            if head is None:
                if not in_body:
                    raise _LineError(1 + len(line) - len(line.lstrip()),
                                     "constraint outside 'subject to:' section")
                constraints.extend(_constraint_line(line, 1, registry, basis, lineno))
                continue
            keyword, rest, col0 = head
            if keyword in ("vars", "rates"):
                continue
            if keyword == "subject to":
                in_body = True
                if rest.strip():
                    constraints.extend(
                        _constraint_line(rest, col0, registry, basis, lineno))
            elif keyword == "eliminate":
                rate_list(rest, col0, lineno, eliminate)
            elif keyword == "targets":
                rate_list(rest, col0, lineno, targets)
            elif keyword == "nonneg":
                value = rest.strip().lower()
                if value not in ("all", "none"):
                    raise _LineError(col0, "nonneg must be 'all' or 'none'")
                nonneg = value == "all"
            elif keyword == "markov":
                dependencies.append(_markov(rest, col0, registry, basis))
            elif keyword == "indep":
                dependencies.append(_indep(rest, col0, registry, basis))
            elif keyword == "equal":
                dependencies.append(_equal(rest, col0, registry, basis))
        except _LineError as e:
            errors.append(Diagnostic(lineno, e.column, e.message))
        except DeclarationError as e:
            errors.append(Diagnostic(lineno, 1, str(e)))

    target_ids = {t for t, _, _ in targets}
    for var, lineno, col in eliminate:
        if var in target_ids:
            errors.append(Diagnostic(
                lineno, col, f"{registry.rate_vars[var - 1]!r} is both "
                "eliminated and a target"))
    if errors:
        errors.sort(key=lambda d: (d.line, d.column))
        raise ParseError(errors)
    return Problem(
        registry=registry,
        constraints=tuple(normalize_constraint(c) for c in constraints),
        dependencies=tuple(dependencies),
        eliminate=tuple(dict.fromkeys(v for v, _, _ in eliminate)),
        targets=tuple(dict.fromkeys(v for v, _, _ in targets)),
        nonneg_all=nonneg,
    )


def _constraint_line(text: str, col0: int, registry: VarRegistry,
                     basis: EntropyBasis, lineno: int) -> list[Constraint]:
    p = _ExprParser(tokenize(text, col0), registry, basis, col0 + len(text))
    return [relation_to_constraints(lhs, op, rhs, f"line:{lineno}")
            for lhs, op, rhs in p.relation_chain()]


def _disjoint(groups: Sequence[int], what: str, col: int) -> None:
    union = 0
    for g in groups:
        if union & g:
            raise _LineError(col, f"{what} overlap")
        union |= g


def _markov(text, col0, registry, basis) -> Markov:
    p = _ExprParser(tokenize(text, col0), registry, basis, col0 + len(text))
    cells = [p.group()]
    while p.at("-"):
        p.take()
        cells.append(p.group())
    if not p.done():
        tok = p.peek()
        raise _LineError(tok.col, f"unexpected {tok.text!r} in Markov chain")
    if len(cells) < 3:
        raise _LineError(col0, "a Markov chain needs at least three cells")
    _disjoint(cells, "Markov chain cells", col0)
    return Markov(tuple(cells))


def _indep(text, col0, registry, basis) -> Independence:
    p = _ExprParser(tokenize(text, col0), registry, basis, col0 + len(text))
    blocks = [p.group()]
    while p.at(";", ","):
        p.take()
        blocks.append(p.group())
    if not p.done():
        tok = p.peek()
        raise _LineError(tok.col, f"unexpected {tok.text!r} in independence")
    if len(blocks) < 2:
        raise _LineError(col0, "independence needs at least two blocks")
    _disjoint(blocks, "independent blocks", col0)
    return Independence(tuple(blocks))


def _equal(text, col0, registry, basis) -> EntropyEquality:
    p = _ExprParser(tokenize(text, col0), registry, basis, col0 + len(text))
    chain = p.relation_chain()
    if len(chain) != 1 or chain[0][1] != "=":
        raise _LineError(col0, "expected a single equality")
    lhs, _, rhs = chain[0]
    diff = lhs - rhs
    if diff.rate_coeffs:
        raise _LineError(col0, "dependency equalities may not contain rates")
    if diff.constant:
        raise _LineError(col0, "dependency equalities must be homogeneous")
    return EntropyEquality(lhs, rhs)


# -- rendering ----------------------------------------------------------------

def format_coeff(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def format_terms(terms: Iterable[tuple[Fraction, str]],
                 constant: Fraction = Fraction(0)) -> str:
    """Join ``coeff * text`` terms, e.g. ``R1 - 2R2 + 3/2``."""
    out = []
    for coeff, text in terms:
        if not coeff:
            continue
        sign = "-" if coeff < 0 else "+"
        mag = abs(coeff)
        body = text if mag == 1 else format_coeff(mag) + text
        out.append((sign, body))
    if constant:
        out.append(("-" if constant < 0 else "+", format_coeff(abs(constant))))
    if not out:
        return "0"
    first_sign, first = out[0]
    pieces = [("-" if first_sign == "-" else "") + first]
    for sign, body in out[1:]:
        pieces.append(f" {sign} {body}")
    return "".join(pieces)


def render_expr(e: LinExpr, registry: VarRegistry,
                basis: EntropyBasis | None = None,
                resynthesize: bool = True) -> str:
    """Rates in registry order, then entropy terms, then the constant."""
    from .reducer import decompose_measures, measure_text
    basis = basis or EntropyBasis.of(registry)
    terms = [(v, registry.rate_vars[i - 1])
             for i, v in sorted(e.rate_coeffs.items())]
    if resynthesize:
        terms += [(k, measure_text(kind, masks, basis))
                  for k, kind, masks in decompose_measures(e)]
    else:
        terms += [(v, f"H({basis.label(m)})")
                  for m, v in sorted(e.entropy_coeffs.items())]
    return format_terms(terms, e.constant)


def render_constraint(c: Constraint, registry: VarRegistry,
                      basis: EntropyBasis | None = None) -> str:
    return f"{render_expr(c.expr, registry, basis)} {c.relation.value} 0"
