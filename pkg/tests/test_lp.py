import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from fmeit.lp import (Infeasible, LpProblem, Optimal, Unbounded,
                      check_certificate, solve_min)
from fmeit.model import EntropyBasis, LinExpr
from fmeit.shannon import elemental_inequalities

from oracles import lp_min

x, y = LinExpr.rate(1), LinExpr.rate(2)
c = LinExpr.const


def test_min_with_lower_bound():
    p = LpProblem(x, [x - c(2)])
    out = solve_min(p)
    assert isinstance(out, Optimal) and out.value == 2
    assert out.witness == {(0, 1): 2}
    assert check_certificate(p, out)


def test_unbounded_below():
    p = LpProblem(x, [c(2) - x])
    out = solve_min(p)
    assert isinstance(out, Unbounded)
    assert check_certificate(p, out)


def test_joint_entropy_over_shannon_cone():
    p = LpProblem(LinExpr.entropy(3), elemental_inequalities(EntropyBasis(2)))
    out = solve_min(p)
    assert isinstance(out, Optimal) and out.value == 0
    # H(X1,X2) = H(X1|X2) + H(X2|X1) + I(X1;X2)
    assert out.ge_multipliers == (1, 1, 1)
    assert check_certificate(p, out)


def test_infeasible_with_farkas():
    p = LpProblem(x, [x - c(1), -x])
    out = solve_min(p)
    assert isinstance(out, Infeasible)
    assert check_certificate(p, out)


def test_equality_rows():
    p = LpProblem(x + y, [x, y], [x - 2 * y - c(3)])
    out = solve_min(p)
    assert isinstance(out, Optimal) and out.value == 3
    assert check_certificate(p, out)


def test_empty_problem():
    out = solve_min(LpProblem(LinExpr()))
    assert isinstance(out, Optimal) and out.value == 0


def test_check_rejects_bad_certificates():
    p = LpProblem(x, [x - c(2)])
    assert check_certificate(p, Optimal(Fraction(2), {(0, 1): Fraction(2)}, (Fraction(1),), ()))
    assert not check_certificate(p, Optimal(Fraction(1), {(0, 1): Fraction(1)}, (Fraction(1),), ()))
    assert not check_certificate(p, Optimal(Fraction(3), {(0, 1): Fraction(3)}, (Fraction(1),), ()))
    assert not check_certificate(p, Infeasible((Fraction(1),), ()))
    assert not check_certificate(p, Unbounded({(0, 1): Fraction(2)}, {(0, 1): Fraction(1)}))


def random_lp(rng: random.Random, nvars: int, nge: int, neq: int, box: bool):
    def row():
        e = c(rng.randint(-6, 6))
        for v in range(1, nvars + 1):
            e = e + LinExpr.rate(v, rng.randint(-4, 4))
        return e

    ge = [row() for _ in range(nge)]
    if box:
        for v in range(1, nvars + 1):
            ge += [LinExpr.rate(v) + c(10), c(10) - LinExpr.rate(v)]
    eq = [row() for _ in range(neq)]
    obj = sum((LinExpr.rate(v, rng.randint(-5, 5)) for v in range(1, nvars + 1)),
              LinExpr())
    return LpProblem(obj, ge, eq)


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(1, 5), st.integers(0, 8),
       st.integers(0, 2), st.booleans())
def test_certificates_always_check(seed, nvars, nge, neq, box):
    p = random_lp(random.Random(seed), nvars, nge, neq, box)
    assert check_certificate(p, solve_min(p))


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 10 ** 9), st.integers(1, 5), st.integers(0, 8),
       st.integers(0, 2), st.booleans())
def test_agrees_with_float_solver(seed, nvars, nge, neq, box):
    p = random_lp(random.Random(seed), nvars, nge, neq, box)
    out = solve_min(p)
    status, value = lp_min(p.objective, p.ge_rows, p.eq_rows)
    if isinstance(out, Optimal):
        assert status == 0 and abs(float(out.value) - value) <= 1e-6
    elif isinstance(out, Unbounded):
        assert status == 3
    else:
        assert status == 2


def dual_value(p: LpProblem) -> Fraction | None:
    """Optimum of the explicit dual, max sum(-k_i y_i) over y >= 0 and
    free z with sum y_i a_i + sum z_j e_j = c, solved as its own LP."""
    keys = sorted({k for e in (p.objective, *p.ge_rows, *p.eq_rows) for k in e.coeffs})
    ys = [LinExpr.rate(100 + i) for i in range(len(p.ge_rows))]
    zs = [LinExpr.rate(200 + j) for j in range(len(p.eq_rows))]
    eqs = []
    for k in keys:
        e = c(-p.objective.coeff(k))
        for yi, row in zip(ys, p.ge_rows):
            e = e + row.coeff(k) * yi
        for zj, row in zip(zs, p.eq_rows):
            e = e + row.coeff(k) * zj
        eqs.append(e)
    obj = sum((row.constant * yi for yi, row in zip(ys, p.ge_rows)), LinExpr())
    obj = obj + sum((row.constant * zj for zj, row in zip(zs, p.eq_rows)), LinExpr())
    out = solve_min(LpProblem(obj, ys, eqs))
    return -out.value if isinstance(out, Optimal) else None


def test_duality_spot_check():
    rng = random.Random(17)
    checked = 0
    for _ in range(60):
        p = random_lp(rng, rng.randint(1, 4), rng.randint(1, 6), rng.randint(0, 1), True)
        out = solve_min(p)
        if isinstance(out, Optimal):
            assert dual_value(p) == out.value
            checked += 1
    assert checked > 30


def test_active_rows_are_exactly_tight():
    rng = random.Random(23)
    for _ in range(40):
        p = random_lp(rng, 3, 5, 0, True)
        out = solve_min(p)
        if not isinstance(out, Optimal):
            continue
        for row, mult in zip(p.ge_rows, out.ge_multipliers):
            if mult:
                assert row.evaluate(out.witness) == 0


def test_deterministic():
    rng = random.Random(31)
    p = random_lp(rng, 4, 8, 1, True)
    assert solve_min(p) == solve_min(p)
