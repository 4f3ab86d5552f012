"""Elemental Shannon inequalities and dependency equalities."""

from __future__ import annotations

from dataclasses import dataclass
from math import comb
from typing import Iterable, Sequence, Union

from .model import (EQ, EntropyBasis, LinExpr, MeasureTerm,
                    canonicalize_measure, entropy_combination, iter_subsets,
                    normalize_expr)


@dataclass(frozen=True)
class Markov:
    """``cells[0] - cells[1] - ... - cells[-1]`` (at least three cells)."""

    cells: tuple[int, ...]


@dataclass(frozen=True)
class Independence:
    blocks: tuple[int, ...]


@dataclass(frozen=True)
class EntropyEquality:
    """``lhs = rhs`` between pure-entropy expressions."""

    lhs: LinExpr
    rhs: LinExpr


DependencyStatement = Union[Markov, Independence, EntropyEquality]


@dataclass(frozen=True)
class ShannonContext:
    basis: EntropyBasis
    g_rows: tuple[LinExpr, ...] = ()
    q_rows: tuple[LinExpr, ...] = ()

    @classmethod
    def build(cls, basis: EntropyBasis,
              statements: Sequence[DependencyStatement] = ()) -> "ShannonContext":
        g = tuple(elemental_inequalities(basis)) if basis.n else ()
        return cls(basis, g, tuple(build_q(statements, basis)))

    @classmethod
    def empty(cls, basis: EntropyBasis | None = None) -> "ShannonContext":
        return cls(basis or EntropyBasis(0))


def num_elemental(n: int) -> int:
    if n == 1:
        return 1
    return n + comb(n, 2) * 2 ** (n - 2)


def elemental_inequalities(basis: EntropyBasis) -> list[LinExpr]:
    """Canonical rows of ``H(X_i | rest) >= 0`` for each ``i``, followed by
    ``I(X_i; X_j | X_K) >= 0`` for ``i < j`` and every ``K`` avoiding both.
    """
    n = basis.n
    if n < 1:
        raise ValueError("need at least one random variable")
    full = basis.full
    if n == 1:
        return [LinExpr.entropy(1)]
    rows = []
    for i in range(n):
        rows.append(entropy_combination([(full, 1), (full ^ (1 << i), -1)]))
    for i in range(n):
        for j in range(i + 1, n):
            a, b = 1 << i, 1 << j
            for k in iter_subsets(full ^ a ^ b):
                rows.append(entropy_combination(
                    [(a | k, 1), (b | k, 1), (a | b | k, -1), (k, -1)]))
    return rows


def markov_rows(cells: Sequence[int], basis: EntropyBasis) -> list[LinExpr]:
    """``I(past; future | present) = 0`` for every interior cell."""
    rows = []
    for t in range(1, len(cells) - 1):
        past = 0
        for c in cells[:t]:
            past |= c
        future = 0
        for c in cells[t + 1:]:
            future |= c
        rows.append(canonicalize_measure(
            MeasureTerm.I(past, future, cells[t]), basis))
    return rows


def independence_row(blocks: Iterable[int], basis: EntropyBasis) -> LinExpr:
    blocks = list(blocks)
    for block in blocks:
        basis.check(block)
    joint = 0
    for block in blocks:
        joint |= block
    return entropy_combination([(joint, 1)] + [(blk, -1) for blk in blocks])


def build_q(statements: Sequence[DependencyStatement],
            basis: EntropyBasis) -> list[LinExpr]:
    """Dependency equalities, each meaning ``row = 0``, deduplicated after
    normalization (order of first appearance is kept)."""
    rows: list[LinExpr] = []
    for st in statements:
        if isinstance(st, Markov):
            rows.extend(markov_rows(st.cells, basis))
        elif isinstance(st, Independence):
            rows.append(independence_row(st.blocks, basis))
        elif isinstance(st, EntropyEquality):
            rows.append(st.lhs - st.rhs)
        else:
            raise TypeError(f"unknown dependency statement {st!r}")
    out = []
    seen = set()
    for row in rows:
        if row.is_zero():
            continue
        key = normalize_expr(row, EQ)
        if key not in seen:
            seen.add(key)
            out.append(row)
    return out
