"""Exact rational linear programming for redundancy certification.

Problems have the form::

    minimize   c . x
    subject to a_i . x + k_i >= 0      (ge rows)
               e_j . x + k_j  = 0      (eq rows)
               x free

The solver runs a two-phase revised simplex with Bland's rule on the dual
standard form ``M w = c, w >= 0`` (one row per primal variable, one column
per constraint), which keeps the basis small when there are many more
constraints than variables.  Every outcome carries a certificate
that :func:`check_certificate` verifies with plain arithmetic.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence, Union

import gmpy2

from .model import Key, LinExpr

_ZERO = gmpy2.mpq(0)
_ONE = gmpy2.mpq(1)


class PivotLimitExceeded(RuntimeError):
    """Bland's rule failed to terminate within the pivot budget."""


@dataclass(frozen=True)
class LpProblem:
    objective: LinExpr
    ge_rows: tuple[LinExpr, ...] = ()
    eq_rows: tuple[LinExpr, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "ge_rows", tuple(self.ge_rows))
        object.__setattr__(self, "eq_rows", tuple(self.eq_rows))

    @property
    def variables(self) -> list[Key]:
        keys = set(self.objective.coeffs)
        for row in self.ge_rows:
            keys.update(row.coeffs)
        for row in self.eq_rows:
            keys.update(row.coeffs)
        return sorted(keys)


@dataclass(frozen=True)
class Optimal:
    """Optimum ``value`` attained at ``witness``.

    The multipliers prove the lower bound:
    ``sum y_i a_i + sum z_j e_j = c`` with ``y >= 0`` and
    ``-(sum y_i k_i + sum z_j k_j) = value``.
    """

    value: Fraction
    witness: Mapping[Key, Fraction]
    ge_multipliers: tuple[Fraction, ...] = ()
    eq_multipliers: tuple[Fraction, ...] = ()

    kind = "optimal"


@dataclass(frozen=True)
class Unbounded:
    """``point`` is feasible and ``ray`` is a recession direction along
    which the objective strictly decreases."""

    point: Mapping[Key, Fraction]
    ray: Mapping[Key, Fraction]

    kind = "unbounded"


@dataclass(frozen=True)
class Infeasible:
    """Farkas multipliers: the combination ``sum y_i (ge row i) +
    sum z_j (eq row j)`` has zero linear part and a negative constant."""

    ge_multipliers: tuple[Fraction, ...]
    eq_multipliers: tuple[Fraction, ...] = ()

    kind = "infeasible"


LpOutcome = Union[Optimal, Unbounded, Infeasible]


# -- standard-form simplex ----------------------------------------------------

def _mq(x) -> "gmpy2.mpq":
    return gmpy2.mpq(x.numerator, x.denominator) if isinstance(x, Fraction) \
        else gmpy2.mpq(x)


def _fr(x) -> Fraction:
    return Fraction(int(x.numerator), int(x.denominator))


class _Simplex:
    """Revised simplex for ``min costs.w  s.t.  M w = rhs, w >= 0``.

    ``columns[j]`` maps row index to a nonzero coefficient of ``M``.  Rows
    are sign-flipped so that the right-hand side is nonnegative and an
    artificial identity basis starts phase 1.  The basis inverse is kept
    explicitly as sparse rows; all arithmetic is exact.  Pivoting follows
    Bland's rule: lowest-index improving column, ratio ties broken by the
    lowest basic column index.
    """

    def __init__(self, nrows: int, columns: Sequence[dict], rhs: Sequence):
        self.nrows = nrows
        self.art = len(columns)
        self.sign = [(-1 if rhs[k] < 0 else 1) for k in range(nrows)]
        self.cols = [{k: (v if self.sign[k] > 0 else -v)
                      for k, v in col.items()} for col in columns]
        self.x = [rhs[k] * self.sign[k] for k in range(nrows)]
        self.binv: list[dict] = [{k: _ONE} for k in range(nrows)]
        self.basis = [self.art + k for k in range(nrows)]
        self.pivots = 0
        self.limit = 10 * (nrows + 2 * self.art) ** 2 + 100

    def column(self, j: int) -> dict:
        return self.cols[j] if j < self.art else {j - self.art: _ONE}

    def ftran(self, col: dict) -> dict:
        d = {}
        for k, row in enumerate(self.binv):
            s = _ZERO
            for i, v in col.items():
                w = row.get(i)
                if w is not None:
                    s += w * v
            if s:
                d[k] = s
        return d

    def pivot(self, r: int, j: int, d: dict, pi: list, rcj) -> None:
        self.pivots += 1
        if self.pivots > self.limit:
            raise PivotLimitExceeded(f"more than {self.limit} pivots")
        x = self.x
        p = d[r]
        prow = self.binv[r]
        if p != 1:
            inv = 1 / p
            for i in prow:
                prow[i] *= inv
        theta = x[r] / p
        items = list(prow.items())
        for k, f in d.items():
            if k == r:
                continue
            row = self.binv[k]
            for i, v in items:
                nv = row.get(i, _ZERO) - f * v
                if nv:
                    row[i] = nv
                else:
                    del row[i]
            if theta:
                x[k] -= f * theta
        x[r] = theta
        if rcj:
            for i, v in items:
                pi[i] += rcj * v
        self.basis[r] = j

    def duals(self, cost) -> list:
        pi = [_ZERO] * self.nrows
        for k, b in enumerate(self.basis):
            c = cost(b)
            if c:
                for i, v in self.binv[k].items():
                    pi[i] += c * v
        return pi

    def run(self, cost, pi: list):
        """Iterate to optimality; return the entering column and its
        transformed column on unboundedness, else ``(None, None)``."""
        cols = self.cols
        while True:
            for j in range(self.art):
                rcj = cost(j)
                for i, v in cols[j].items():
                    rcj -= pi[i] * v
                if rcj < 0:
                    break
            else:
                return None, None
            d = self.ftran(cols[j])
            best = None
            for k, a in d.items():
                if a > 0:
                    ratio = self.x[k] / a
                    if (best is None or ratio < best[0]
                            or (ratio == best[0]
                                and self.basis[k] < best[1])):
                        best = (ratio, self.basis[k], k)
            if best is None:
                return j, d
            self.pivot(best[2], j, d, pi, rcj)

    def phase1(self) -> list | None:
        """Drive the artificials to zero.  Returns Farkas multipliers (in
        the caller's row signs) if that is impossible, else ``None``."""
        art = self.art

        def cost(j):
            return _ONE if j >= art else _ZERO

        # crash: zero-level artificials are replaced up front; these pivots
        # are degenerate and leave every level unchanged
        self.drive_out()
        pi = self.duals(cost)
        self.run(cost, pi)
        if any(self.x[k] for k, b in enumerate(self.basis) if b >= art):
            return [pi[k] * self.sign[k] for k in range(self.nrows)]
        self.drive_out()
        return None

    def drive_out(self) -> None:
        # zero-level artificials leave the basis wherever some structural
        # column has a nonzero entry in their row
        for r, b in enumerate(self.basis):
            if b < self.art or self.x[r]:
                continue
            row = self.binv[r]
            for j, col in enumerate(self.cols):
                s = _ZERO
                for i, v in col.items():
                    w = row.get(i)
                    if w is not None:
                        s += w * v
                if s:
                    self.pivot(r, j, self.ftran(col), [], _ZERO)
                    break

    def zero_rhs(self) -> None:
        """Replace the right-hand side by zero, keeping the basis (which
        stays feasible at level zero)."""
        self.x = [_ZERO] * self.nrows
        self.drive_out()

    def phase2(self, costs: Sequence) -> _Result:
        art = self.art

        def cost(j):
            return costs[j] if j < art else _ZERO

        pi = self.duals(cost)
        enter, d = self.run(cost, pi)
        values = {b: self.x[k] for k, b in enumerate(self.basis)
                  if b < art and self.x[k]}
        if enter is not None:
            direction = {enter: _ONE}
            for k, a in d.items():
                direction[self.basis[k]] = -a
            return _Result("unbounded", values=values, direction=direction)
        return _Result("optimal", values=values,
                       duals=[pi[k] * self.sign[k]
                              for k in range(self.nrows)])


@dataclass
class _Result:
    status: str
    values: dict = field(default_factory=dict)     # basic column -> level
    direction: dict = field(default_factory=dict)  # unbounded direction
    duals: list = field(default_factory=list)      # one per row


# -- primal interface ---------------------------------------------------------

def solve_min(p: LpProblem) -> LpOutcome:
    """Exact minimum of ``p.objective`` (its constant is ignored)."""
    keys = p.variables
    index = {key: i for i, key in enumerate(keys)}
    nrows = len(keys)
    n_ge = len(p.ge_rows)
    n_eq = len(p.eq_rows)

    columns: list[dict] = []
    costs: list = []
    for row in p.ge_rows:
        columns.append({index[k]: _mq(v) for k, v in row.coeffs.items()})
        costs.append(_mq(row.constant))
    for row in p.eq_rows:
        columns.append({index[k]: _mq(v) for k, v in row.coeffs.items()})
        costs.append(_mq(row.constant))
    for row in p.eq_rows:
        columns.append({index[k]: -_mq(v) for k, v in row.coeffs.items()})
        costs.append(-_mq(row.constant))
    target = [_ZERO] * nrows
    for k, v in p.objective.coeffs.items():
        target[index[k]] = _mq(v)

    def split(w: dict):
        ys = tuple(_fr(w.get(i, _ZERO)) for i in range(n_ge))
        zs = tuple(_fr(w.get(n_ge + j, _ZERO) - w.get(n_ge + n_eq + j, _ZERO))
                   for j in range(n_eq))
        return ys, zs

    def point(duals) -> dict:
        return {key: -_fr(duals[i]) for i, key in enumerate(keys)
                if duals[i]}

    sx = _Simplex(nrows, columns, target)
    farkas = sx.phase1()
    if farkas is None:
        res = sx.phase2(costs)
        if res.status == "optimal":
            x = point(res.duals)
            ys, zs = split(res.values)
            value = p.objective.linear_part().evaluate(x)
            return Optimal(value, x, ys, zs)
        ys, zs = split(res.direction)
        return Infeasible(ys, zs)

    # the dual constraints are inconsistent: the Farkas vector is a descent
    # ray of the primal.  Primal feasibility is decided by re-solving with a
    # zero objective from the current basis.
    ray = {key: -_fr(farkas[i]) for i, key in enumerate(keys) if farkas[i]}
    sx.zero_rhs()
    res = sx.phase2(costs)
    if res.status == "unbounded":
        ys, zs = split(res.direction)
        return Infeasible(ys, zs)
    return Unbounded(point(res.duals), ray)


def check_certificate(p: LpProblem, o: LpOutcome) -> bool:
    """Re-verify an outcome of :func:`solve_min` by exact arithmetic."""
    c = p.objective.linear_part()
    if isinstance(o, Optimal):
        if not all(row.evaluate(o.witness) >= 0 for row in p.ge_rows):
            return False
        if not all(row.evaluate(o.witness) == 0 for row in p.eq_rows):
            return False
        if c.evaluate(o.witness) != o.value:
            return False
        if (len(o.ge_multipliers) != len(p.ge_rows)
                or len(o.eq_multipliers) != len(p.eq_rows)):
            return False
        if any(y < 0 for y in o.ge_multipliers):
            return False
        combo = _combine(p, o.ge_multipliers, o.eq_multipliers)
        return combo.linear_part() == c and -combo.constant == o.value
    if isinstance(o, Unbounded):
        if not all(row.evaluate(o.point) >= 0 for row in p.ge_rows):
            return False
        if not all(row.evaluate(o.point) == 0 for row in p.eq_rows):
            return False
        if not all(row.linear_part().evaluate(o.ray) >= 0
                   for row in p.ge_rows):
            return False
        if not all(row.linear_part().evaluate(o.ray) == 0
                   for row in p.eq_rows):
            return False
        return c.evaluate(o.ray) < 0
    if isinstance(o, Infeasible):
        if (len(o.ge_multipliers) != len(p.ge_rows)
                or len(o.eq_multipliers) != len(p.eq_rows)):
            return False
        if any(y < 0 for y in o.ge_multipliers):
            return False
        combo = _combine(p, o.ge_multipliers, o.eq_multipliers)
        return combo.is_constant() and combo.constant < 0
    return False


def _combine(p: LpProblem, ys: Sequence[Fraction],
             zs: Sequence[Fraction]) -> LinExpr:
    out: dict = {}
    constant = Fraction(0)
    for rows, mults in ((p.ge_rows, ys), (p.eq_rows, zs)):
        for row, m in zip(rows, mults):
            if not m:
                continue
            constant += m * row.constant
            for k, v in row.coeffs.items():
                out[k] = out.get(k, 0) + m * v
    return LinExpr(out, constant)
