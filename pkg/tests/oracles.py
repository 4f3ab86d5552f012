"""Independent test oracles: float entropy vectors from PMFs, scipy LP
feasibility, and exact vertex enumeration for small polytopes."""

from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from scipy.optimize import linprog

from fmeit.model import ENTROPY, RATE, LinExpr

TOL = 1e-9


# -- distributions -------------------------------------------------------------

def random_pmf(rng: np.random.Generator, shape) -> np.ndarray:
    p = rng.random(shape) ** 3          # skewed, so some entries are tiny
    return p / p.sum()


def random_kernel(rng: np.random.Generator, in_shape, out_shape) -> np.ndarray:
    """Conditional PMF with axes in_shape + out_shape, normalized over out."""
    k = rng.random(tuple(in_shape) + tuple(out_shape)) ** 3
    axes = tuple(range(len(in_shape), len(in_shape) + len(out_shape)))
    return k / k.sum(axis=axes, keepdims=True)


def entropy_vector(p: np.ndarray) -> dict[int, float]:
    """Joint entropy (bits) of every nonempty subset of the axes of p,
    keyed by bitmask (axis i <-> bit i)."""
    n = p.ndim
    h = {}
    for mask in range(1, 1 << n):
        drop = tuple(i for i in range(n) if not mask >> i & 1)
        m = p.sum(axis=drop) if drop else p
        m = m[m > 0]
        h[mask] = float(-(m * np.log2(m)).sum())
    return h


def h_point(h: dict[int, float]) -> dict:
    return {(ENTROPY, mask): v for mask, v in h.items()}


def fevaluate(e: LinExpr, point: dict) -> float:
    return float(e.constant) + sum(float(c) * point.get(k, 0.0)
                                   for k, c in e.items())


def markov_chain_pmf(rng: np.random.Generator, sizes) -> np.ndarray:
    """X1 - X2 - ... - Xk built from successive kernels."""
    p = random_pmf(rng, (sizes[0],))
    for i in range(1, len(sizes)):
        k = random_kernel(rng, (sizes[i - 1],), (sizes[i],))
        p = p[..., None] * k.reshape((1,) * (i - 1) + k.shape)
    return p


def hk_pmf(rng: np.random.Generator, q=2, u=2, x=2, y=2) -> np.ndarray:
    """p(q) p(u1,x1|q) p(u2,x2|q) p(y1,y2|x1,x2) with axes
    (Q, U1, U2, X1, X2, Y1, Y2)."""
    pq = random_pmf(rng, (q,))
    k1 = random_kernel(rng, (q,), (u, x))          # q,u1,x1
    k2 = random_kernel(rng, (q,), (u, x))          # q,u2,x2
    ch = random_kernel(rng, (x, x), (y, y))        # x1,x2,y1,y2
    p = np.einsum("q,qac,qbd,cdef->qabcdef", pq, k1, k2, ch)
    return p / p.sum()


# -- float LPs -----------------------------------------------------------------

def _matrices(ge, eq, keys):
    index = {k: i for i, k in enumerate(keys)}

    def mat(rows):
        a = np.zeros((len(rows), len(keys)))
        b = np.zeros(len(rows))
        for r, e in enumerate(rows):
            for k, c in e.items():
                a[r, index[k]] = float(c)
            b[r] = float(e.constant)
        return a, b

    return mat(ge), mat(eq)


def lp_feasible(ge: list[LinExpr], eq: list[LinExpr] = ()) -> bool:
    """Float feasibility of {ge >= 0, eq = 0} over free variables."""
    keys = sorted({k for e in list(ge) + list(eq) for k in e.coeffs})
    if not keys:
        return all(e.constant >= 0 for e in ge) and all(e.constant == 0 for e in eq)
    (a, b), (ae, be) = _matrices(list(ge), list(eq), keys)
    res = linprog(np.zeros(len(keys)),
                  A_ub=-a if len(ge) else None, b_ub=b if len(ge) else None,
                  A_eq=ae if len(eq) else None, b_eq=-be if len(eq) else None,
                  bounds=[(None, None)] * len(keys), method="highs")
    return res.status == 0


def lp_min(objective: LinExpr, ge: list[LinExpr], eq: list[LinExpr] = ()):
    """(status, value) of min objective over {ge >= 0, eq = 0}; status is
    scipy's (0 optimal, 2 infeasible, 3 unbounded)."""
    keys = sorted({k for e in list(ge) + list(eq) + [objective]
                   for k in e.coeffs})
    if not keys:
        return (0, 0.0) if lp_feasible(ge, eq) else (2, None)
    (a, b), (ae, be) = _matrices(list(ge), list(eq), keys)
    c = np.array([float(objective.coeff(k)) for k in keys])
    res = linprog(c, A_ub=-a if len(ge) else None, b_ub=b if len(ge) else None,
                  A_eq=ae if len(eq) else None, b_eq=-be if len(eq) else None,
                  bounds=[(None, None)] * len(keys), method="highs")
    return res.status, (res.fun if res.status == 0 else None)


def substitute(e: LinExpr, values: dict) -> LinExpr:
    """Fix some variables of e to exact values."""
    out = LinExpr.const(e.constant)
    for k, c in e.items():
        if k in values:
            out = out + LinExpr.const(c * values[k])
        elif k[0] == RATE:
            out = out + LinExpr.rate(k[1], c)
        else:
            out = out + LinExpr.entropy(k[1], c)
    return out


# -- exact vertex enumeration --------------------------------------------------

def _solve(a: list[list[Fraction]], b: list[Fraction]):
    """Exact Gauss-Jordan; None when singular."""
    d = len(a)
    m = [row[:] + [bi] for row, bi in zip(a, b)]
    for col in range(d):
        piv = next((r for r in range(col, d) if m[r][col] != 0), None)
        if piv is None:
            return None
        m[col], m[piv] = m[piv], m[col]
        for r in range(d):
            if r != col and m[r][col] != 0:
                f = m[r][col] / m[col][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[col])]
    return [m[i][d] / m[i][i] for i in range(d)]


def _rank(vectors: list[list[Fraction]]) -> int:
    m = [v[:] for v in vectors]
    rank = 0
    cols = len(m[0]) if m else 0
    for col in range(cols):
        piv = next((r for r in range(rank, len(m)) if m[r][col] != 0), None)
        if piv is None:
            continue
        m[rank], m[piv] = m[piv], m[rank]
        for r in range(len(m)):
            if r != rank and m[r][col] != 0:
                f = m[r][col] / m[rank][col]
                m[r] = [x - f * y for x, y in zip(m[r], m[rank])]
        rank += 1
    return rank


def vertices(rows: list[tuple[list[Fraction], Fraction]], d: int):
    """Vertices of {x : a.x + k >= 0} for a bounded polytope in R^d."""
    out = set()
    for combo in itertools.combinations(range(len(rows)), d):
        x = _solve([rows[i][0] for i in combo], [-rows[i][1] for i in combo])
        if x is None:
            continue
        if all(sum(ai * xi for ai, xi in zip(a, x)) + k >= 0 for a, k in rows):
            out.add(tuple(x))
    return sorted(out)


def facets(rows: list[tuple[list[Fraction], Fraction]], d: int):
    """Indices of rows that define facets of a full-dimensional bounded
    polytope: the vertices they hold span an affine space of dimension
    d - 1.  Parallel duplicates are reduced to the first occurrence."""
    verts = vertices(rows, d)
    keep = []
    seen = set()
    for i, (a, k) in enumerate(rows):
        tight = [v for v in verts
                 if sum(ai * vi for ai, vi in zip(a, v)) + k == 0]
        if len(tight) < d:
            continue
        base = tight[0]
        if _rank([[vi - bi for vi, bi in zip(v, base)] for v in tight[1:]]) != d - 1:
            continue
        key = primitive(a, k)
        if key not in seen:
            seen.add(key)
            keep.append(i)
    return keep


def primitive(a: list[Fraction], k: Fraction) -> tuple:
    """Row scaled so that its largest absolute entry is 1 (positive scaling
    only)."""
    s = max(abs(x) for x in list(a) + [k])
    return tuple(x / s for x in list(a) + [k])
