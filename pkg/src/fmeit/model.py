"""Domain types: variable registries, the entropy basis, exact linear
expressions and conversion of Shannon measures into joint entropies.

A set of random variables is an integer bitmask where variable ``i``
(1-based) occupies bit ``i - 1``.  The joint-entropy coordinate of a
nonempty set is identified with its mask, so the basis for ``n`` variables
is simply ``1 .. 2**n - 1`` in increasing order.

Variables of a :class:`LinExpr` are keys ``(RATE, index)`` or
``(ENTROPY, mask)``; sorting the keys puts all rates before all entropies.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from types import MappingProxyType
from typing import Iterable, Iterator, Mapping, Sequence, Union

RATE = 0
ENTROPY = 1

Key = tuple  # (RATE, index) | (ENTROPY, mask)
Number = Union[int, Fraction]


class DeclarationError(ValueError):
    """A symbol was used without being declared, or declared twice."""


# -- variable sets ----------------------------------------------------------

def varset(*indices: int) -> int:
    """Mask of the 1-based variable indices given."""
    mask = 0
    for i in indices:
        if i < 1:
            raise ValueError(f"variable indices are 1-based, got {i}")
        mask |= 1 << (i - 1)
    return mask


def members(mask: int) -> list[int]:
    """1-based indices in ``mask``, ascending."""
    out = []
    i = 1
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def popcount(mask: int) -> int:
    return bin(mask).count("1")


@dataclass(frozen=True)
class VarRegistry:
    random_vars: tuple[str, ...] = ()
    rate_vars: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "random_vars", tuple(self.random_vars))
        object.__setattr__(self, "rate_vars", tuple(self.rate_vars))
        for kind, names in (("random variable", self.random_vars),
                            ("rate", self.rate_vars)):
            seen = set()
            for name in names:
                if name in seen:
                    raise DeclarationError(f"duplicate {kind} {name!r}")
                seen.add(name)
        both = set(self.random_vars) & set(self.rate_vars)
        if both:
            raise DeclarationError(
                "declared both as random variable and rate: "
                + ", ".join(sorted(both)))

    @property
    def n(self) -> int:
        return len(self.random_vars)

    def random_index(self, name: str) -> int:
        try:
            return self.random_vars.index(name) + 1
        except ValueError:
            raise DeclarationError(
                f"undeclared random variable {name!r}") from None

    def rate_index(self, name: str) -> int:
        try:
            return self.rate_vars.index(name) + 1
        except ValueError:
            raise DeclarationError(f"undeclared rate {name!r}") from None

    def mask_of(self, names: Iterable[str]) -> int:
        return varset(*(self.random_index(name) for name in names))

    def set_names(self, mask: int) -> list[str]:
        return [self.random_vars[i - 1] for i in members(mask)]


@dataclass(frozen=True)
class EntropyBasis:
    """The ``2**n - 1`` joint-entropy coordinates in increasing mask order."""

    n: int
    names: tuple[str, ...] = ()

    def __post_init__(self):
        if self.n < 0:
            raise ValueError("n must be nonnegative")
        if not self.names:
            object.__setattr__(
                self, "names", tuple(f"X{i}" for i in range(1, self.n + 1)))
        if len(self.names) != self.n:
            raise ValueError("need exactly one name per random variable")

    @classmethod
    def of(cls, registry: VarRegistry) -> "EntropyBasis":
        return cls(registry.n, registry.random_vars)

    @property
    def full(self) -> int:
        return (1 << self.n) - 1

    @property
    def coords(self) -> range:
        return range(1, self.full + 1)

    def __len__(self) -> int:
        return self.full

    def index(self, mask: int) -> int:
        """1-based position of the coordinate ``H(mask)``."""
        self.check(mask)
        if mask == 0:
            raise ValueError("H(empty set) is not a coordinate")
        return mask

    def check(self, mask: int) -> None:
        extra = mask & ~self.full
        if extra:
            bad = members(extra)[0]
            raise DeclarationError(
                f"undeclared random variable #{bad} (only {self.n} declared)")

    def label(self, mask: int) -> str:
        return ",".join(self.names[i - 1] for i in members(mask))


# -- linear expressions -----------------------------------------------------

def _frac(x) -> Fraction:
    return x if type(x) is Fraction else Fraction(x)


class LinExpr:
    """Exact sparse linear form over rate and entropy variables plus a
    constant.  Instances are immutable; zero coefficients are never stored.
    """

    __slots__ = ("_coeffs", "_constant", "_hash")

    def __init__(self, coeffs: Mapping[Key, Number] | None = None,
                 constant: Number = 0):
        clean = {}
        if coeffs:
            for key, value in coeffs.items():
                value = _frac(value)
                if value:
                    clean[key] = value
        self._coeffs = clean
        self._constant = _frac(constant)
        self._hash = None

    @classmethod
    def _raw(cls, coeffs: dict, constant: Fraction) -> "LinExpr":
        # caller guarantees Fraction values with no zeros
        self = object.__new__(cls)
        self._coeffs = coeffs
        self._constant = constant
        self._hash = None
        return self

    @classmethod
    def rate(cls, index: int, coeff: Number = 1) -> "LinExpr":
        return cls({(RATE, index): coeff})

    @classmethod
    def entropy(cls, mask: int, coeff: Number = 1) -> "LinExpr":
        if mask == 0:
            return cls()
        return cls({(ENTROPY, mask): coeff})

    @classmethod
    def const(cls, value: Number) -> "LinExpr":
        return cls(None, value)

    @property
    def coeffs(self) -> Mapping[Key, Fraction]:
        return MappingProxyType(self._coeffs)

    @property
    def constant(self) -> Fraction:
        return self._constant

    @property
    def rate_coeffs(self) -> dict[int, Fraction]:
        return {k[1]: v for k, v in self._coeffs.items() if k[0] == RATE}

    @property
    def entropy_coeffs(self) -> dict[int, Fraction]:
        return {k[1]: v for k, v in self._coeffs.items() if k[0] == ENTROPY}

    def coeff(self, key: Key) -> Fraction:
        return self._coeffs.get(key, Fraction(0))

    def keys(self) -> list[Key]:
        return sorted(self._coeffs)

    def items(self) -> list[tuple[Key, Fraction]]:
        return sorted(self._coeffs.items())

    def is_constant(self) -> bool:
        return not self._coeffs

    def is_zero(self) -> bool:
        return not self._coeffs and not self._constant

    def linear_part(self) -> "LinExpr":
        return LinExpr._raw(dict(self._coeffs), Fraction(0))

    def evaluate(self, point: Mapping[Key, Number]) -> Fraction:
        """Exact value at ``point``; missing variables count as zero."""
        total = self._constant
        for key, value in self._coeffs.items():
            x = point.get(key)
            if x:
                total += value * x
        return total

    def substitute_zero(self, keys: Iterable[Key]) -> "LinExpr":
        drop = set(keys)
        return LinExpr._raw(
            {k: v for k, v in self._coeffs.items() if k not in drop},
            self._constant)

    def __add__(self, other: "LinExpr") -> "LinExpr":
        if not isinstance(other, LinExpr):
            return NotImplemented
        return linexpr_combine(self, 1, other, 1)

    def __sub__(self, other: "LinExpr") -> "LinExpr":
        if not isinstance(other, LinExpr):
            return NotImplemented
        return linexpr_combine(self, 1, other, -1)

    def __neg__(self) -> "LinExpr":
        return LinExpr._raw({k: -v for k, v in self._coeffs.items()},
                            -self._constant)

    def __mul__(self, scalar) -> "LinExpr":
        if isinstance(scalar, LinExpr):
            return NotImplemented
        scalar = _frac(scalar)
        if not scalar:
            return LinExpr()
        return LinExpr._raw({k: v * scalar for k, v in self._coeffs.items()},
                            self._constant * scalar)

    __rmul__ = __mul__

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinExpr):
            return NotImplemented
        return (self._constant == other._constant
                and self._coeffs == other._coeffs)

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((frozenset(self._coeffs.items()),
                               self._constant))
        return self._hash

    def __repr__(self) -> str:
        parts = []
        for (kind, idx), v in self.items():
            name = f"r{idx}" if kind == RATE else f"h{bin(idx)[2:]}"
            parts.append(f"{v}*{name}")
        if self._constant or not parts:
            parts.append(str(self._constant))
        return f"LinExpr({' + '.join(parts)})"


def linexpr_combine(a: LinExpr, ca: Number, b: LinExpr, cb: Number) -> LinExpr:
    """``ca*a + cb*b``, exact, with zero pruning."""
    ca = _frac(ca)
    cb = _frac(cb)
    out = {}
    if ca:
        for key, value in a._coeffs.items():
            out[key] = value * ca
    if cb:
        for key, value in b._coeffs.items():
            value = out.get(key, 0) + value * cb
            if value:
                out[key] = value
            else:
                out.pop(key, None)
    return LinExpr._raw(out, ca * a._constant + cb * b._constant)


def sum_exprs(exprs: Iterable[LinExpr]) -> LinExpr:
    out: dict = {}
    constant = Fraction(0)
    for e in exprs:
        constant += e._constant
        for key, value in e._coeffs.items():
            value = out.get(key, 0) + value
            if value:
                out[key] = value
            else:
                out.pop(key, None)
    return LinExpr._raw(out, constant)


# -- constraints ------------------------------------------------------------

class Relation(enum.Enum):
    GE = ">="
    EQ = "="


GE = Relation.GE
EQ = Relation.EQ


@dataclass(frozen=True)
class Constraint:
    """``expr >= 0`` or ``expr = 0``.

    ``origin`` records where the row came from: ``"line:<n>"`` for input
    rows, ``"fme"`` for rows produced by elimination, ``"nonneg"`` for the
    automatic rate bounds and ``"dependency"`` for dependency rows.
    """

    expr: LinExpr
    relation: Relation = GE
    origin: str = field(default="", compare=False)

    @property
    def is_eq(self) -> bool:
        return self.relation is EQ

    def with_expr(self, expr: LinExpr) -> "Constraint":
        return Constraint(expr, self.relation, self.origin)


def _integer_scale(values: Iterable[Fraction]) -> Fraction:
    """Positive factor turning ``values`` into coprime integers."""
    num_gcd = 0
    den_lcm = 1
    for v in values:
        num_gcd = gcd(num_gcd, v.numerator)
        den_lcm = den_lcm * v.denominator // gcd(den_lcm, v.denominator)
    if num_gcd == 0:
        return Fraction(1)
    return Fraction(den_lcm, num_gcd)


def normalize_expr(expr: LinExpr, relation: Relation = GE) -> LinExpr:
    values = list(expr._coeffs.values())
    if expr._constant:
        values.append(expr._constant)
    scale = _integer_scale(values)
    if relation is EQ:
        if expr._coeffs:
            lead = expr._coeffs[min(expr._coeffs)]
        else:
            lead = expr._constant
        if lead < 0:
            scale = -scale
    if scale == 1:
        return expr
    return expr * scale


def normalize_constraint(c: Constraint) -> Constraint:
    """Scale to coprime integer coefficients (constant included).

    GE rows are scaled by a positive factor only; EQ rows are also flipped
    so that the first nonzero coefficient in key order is positive.
    """
    expr = normalize_expr(c.expr, c.relation)
    if expr is c.expr:
        return c
    return Constraint(expr, c.relation, c.origin)


# -- Shannon measures -------------------------------------------------------

class MeasureKind(enum.Enum):
    ENTROPY = "H"             # H(A)
    COND_ENTROPY = "H|"       # H(A|B)
    MUTUAL_INFO = "I"         # I(A;B|C)


@dataclass(frozen=True)
class MeasureTerm:
    kind: MeasureKind
    a: int
    b: int = 0
    c: int = 0

    def __post_init__(self):
        if not self.a:
            raise ValueError("first operand of a measure must be nonempty")
        if self.kind is MeasureKind.MUTUAL_INFO and not self.b:
            raise ValueError("mutual information needs two nonempty operands")

    @classmethod
    def H(cls, a: int, given: int = 0) -> "MeasureTerm":
        if given:
            return cls(MeasureKind.COND_ENTROPY, a, given)
        return cls(MeasureKind.ENTROPY, a)

    @classmethod
    def I(cls, a: int, b: int, given: int = 0) -> "MeasureTerm":
        return cls(MeasureKind.MUTUAL_INFO, a, b, given)


def _h(out: dict, mask: int, coeff: int) -> None:
    if mask:
        key = (ENTROPY, mask)
        value = out.get(key, 0) + coeff
        if value:
            out[key] = value
        else:
            out.pop(key, None)


def entropy_combination(terms: Sequence[tuple[int, int]]) -> LinExpr:
    """``sum coeff * H(mask)`` with ``H(empty) = 0``."""
    out: dict = {}
    for mask, coeff in terms:
        _h(out, mask, coeff)
    return LinExpr({k: v for k, v in out.items()})


def canonicalize_measure(term: MeasureTerm, basis: EntropyBasis) -> LinExpr:
    """Expand a measure into joint-entropy coordinates."""
    for mask in (term.a, term.b, term.c):
        basis.check(mask)
    a, b, c = term.a, term.b, term.c
    if term.kind is MeasureKind.ENTROPY:
        return entropy_combination([(a, 1)])
    if term.kind is MeasureKind.COND_ENTROPY:
        return entropy_combination([(a | b, 1), (b, -1)])
    return entropy_combination(
        [(a | c, 1), (b | c, 1), (a | b | c, -1), (c, -1)])


def iter_subsets(mask: int) -> Iterator[int]:
    """All subsets of ``mask`` including 0 and ``mask``, ascending."""
    sub = 0
    while True:
        yield sub
        if sub == mask:
            return
        sub = (sub - mask) & mask
