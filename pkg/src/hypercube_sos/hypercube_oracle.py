"""Brute-force ground truth on the Boolean hypercube.

Multivariate expressions are small trees over the variables ``x_0..x_{n-1}``;
they are either reduced to a multilinear normal form (the quotient by
``x_i^2 - x_i``) or evaluated pointwise over all of ``{0,1}^n``.  Symmetric
univariate representatives are compared against both.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable

import numpy as np

from flint import fmpq

from .poly_core import UniPoly, to_fmpq, to_fraction

MAX_VARS = 20


def _guard(n: int) -> None:
    if n > MAX_VARS:
        raise ValueError(f"hypercube enumeration limited to n <= {MAX_VARS}, got {n}")


# ----------------------------------------------------------- level vectors


def levels(p: UniPoly, n: int) -> list[Fraction]:
    """Values of ``p`` at integer Hamming weights ``0..n``."""
    return [p(j) for j in range(n + 1)]


# ------------------------------------------------------------- expressions


class Expr:
    def __add__(self, other):
        return Add((self, _lift(other)))

    __radd__ = __add__

    def __sub__(self, other):
        return Add((self, Mul((Const(-1), _lift(other)))))

    def __rsub__(self, other):
        return Add((_lift(other), Mul((Const(-1), self))))

    def __mul__(self, other):
        return Mul((self, _lift(other)))

    __rmul__ = __mul__

    def __neg__(self):
        return Mul((Const(-1), self))

    def __pow__(self, e: int):
        return Pow(self, e)


def _lift(v) -> Expr:
    return v if isinstance(v, Expr) else Const(to_fraction(v))


@dataclass(frozen=True, eq=False)
class Var(Expr):
    index: int


@dataclass(frozen=True, eq=False)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True, eq=False)
class Add(Expr):
    terms: tuple[Expr, ...]


@dataclass(frozen=True, eq=False)
class Mul(Expr):
    factors: tuple[Expr, ...]


@dataclass(frozen=True, eq=False)
class Pow(Expr):
    base: Expr
    exponent: int


@dataclass(frozen=True, eq=False)
class SymPoly(Expr):
    """A univariate polynomial evaluated at the Hamming weight of the first ``n`` variables."""

    poly: UniPoly
    n: int


def variables(n: int) -> list[Var]:
    return [Var(i) for i in range(n)]


def hamming(n: int) -> Expr:
    return Add(tuple(variables(n)))


def sum_expr(items: Iterable[Expr]) -> Expr:
    return Add(tuple(items))


# ------------------------------------------------------- multilinear forms


class MultilinearForm(dict):
    """``frozenset`` of variable indices -> nonzero ``Fraction`` coefficient."""

    @classmethod
    def const(cls, c) -> "MultilinearForm":
        c = to_fraction(c)
        return cls({frozenset(): c}) if c else cls()

    def __add__(self, other: "MultilinearForm") -> "MultilinearForm":
        out = MultilinearForm(self)
        for mono, c in other.items():
            v = out.get(mono, 0) + c
            if v:
                out[mono] = v
            else:
                out.pop(mono, None)
        return out

    def __mul__(self, other: "MultilinearForm") -> "MultilinearForm":
        out: dict = {}
        for m1, c1 in self.items():
            for m2, c2 in other.items():
                m = m1 | m2
                out[m] = out.get(m, 0) + c1 * c2
        return MultilinearForm({m: c for m, c in out.items() if c})

    def scale(self, c) -> "MultilinearForm":
        c = to_fraction(c)
        return MultilinearForm({m: v * c for m, v in self.items()}) if c else MultilinearForm()

    def evaluate(self, point) -> Fraction:
        ones = {i for i, b in enumerate(point) if b}
        return sum((c for m, c in self.items() if m <= ones), Fraction(0))


def _elementary_symmetric(n: int, j: int) -> MultilinearForm:
    return MultilinearForm({frozenset(s): Fraction(1) for s in itertools.combinations(range(n), j)})


def _weight_basis(p: UniPoly, n: int) -> MultilinearForm:
    """Normal form of ``p(|x|)``: expand in binomials ``C(|x|, j)`` (= ``e_j`` on the cube)."""
    vals = levels(p, n)
    # forward differences give the binomial-basis coefficients
    out = MultilinearForm()
    diff = list(vals)
    for j in range(n + 1):
        if diff[0]:
            out = out + _elementary_symmetric(n, j).scale(diff[0])
        diff = [diff[i + 1] - diff[i] for i in range(len(diff) - 1)]
    return out


def reduce_mod_boolean(expr: Expr, n: int) -> MultilinearForm:
    """Canonical multilinear normal form of ``expr`` modulo ``x_i^2 - x_i``."""
    _guard(n)

    def go(e: Expr) -> MultilinearForm:
        if isinstance(e, Var):
            if e.index >= n:
                raise ValueError(f"variable x_{e.index} outside n={n}")
            return MultilinearForm({frozenset([e.index]): Fraction(1)})
        if isinstance(e, Const):
            return MultilinearForm.const(e.value)
        if isinstance(e, Add):
            out = MultilinearForm()
            for t in e.terms:
                out = out + go(t)
            return out
        if isinstance(e, Mul):
            out = MultilinearForm.const(1)
            for f in e.factors:
                out = out * go(f)
                if not out:
                    break
            return out
        if isinstance(e, Pow):
            base = go(e.base)
            out = MultilinearForm.const(1)
            for _ in range(e.exponent):
                out = out * base
            return out
        if isinstance(e, SymPoly):
            if e.n > n:
                raise ValueError("symmetric block wider than the ambient n")
            return _weight_basis(e.poly, e.n)
        raise TypeError(f"unknown expression node {e!r}")

    return go(expr)


# ------------------------------------------------------------- enumeration


def cube_points(n: int) -> np.ndarray:
    """All of ``{0,1}^n`` in lexicographic order as an ``(2^n, n)`` int8 array."""
    _guard(n)
    idx = np.arange(2**n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8)


def evaluate_on_cube(expr: Expr, n: int) -> np.ndarray:
    """Exact values of ``expr`` at every cube point (object array of ``Fraction``)."""
    return np.array([to_fraction(v) for v in _evaluate(expr, n)], dtype=object)


def _evaluate(expr: Expr, n: int) -> np.ndarray:
    """``evaluate_on_cube`` with ``fmpq`` entries.

    Huge certificate coefficients make ``Fraction`` arithmetic (and even the
    final conversion) the bottleneck, so internal comparisons stay in ``fmpq``.
    """
    pts = cube_points(n)
    weights = pts.sum(axis=1)
    cache: dict[int, np.ndarray] = {}
    zero, one = fmpq(0), fmpq(1)

    def go(e: Expr) -> np.ndarray:
        key = id(e)
        if key in cache:
            return cache[key]
        if isinstance(e, Var):
            out = np.array([one if v else zero for v in pts[:, e.index]], dtype=object)
        elif isinstance(e, Const):
            out = np.full(len(pts), to_fmpq(e.value), dtype=object)
        elif isinstance(e, Add):
            out = np.full(len(pts), zero, dtype=object)
            for t in e.terms:
                out = out + go(t)
        elif isinstance(e, Mul):
            out = go(e.factors[0]) if e.factors else np.full(len(pts), one, dtype=object)
            for f in e.factors[1:]:
                out = out * go(f)
        elif isinstance(e, Pow):
            out = go(e.base) ** e.exponent
        elif isinstance(e, SymPoly):
            sub = pts[:, : e.n].sum(axis=1) if e.n != n else weights
            table = [to_fmpq(v) for v in levels(e.poly, e.n)]
            out = np.array([table[int(w)] for w in sub], dtype=object)
        else:
            raise TypeError(f"unknown expression node {e!r}")
        cache[key] = out
        return out

    return go(expr)


def _level_table(p: UniPoly, n: int) -> list[fmpq]:
    return [to_fmpq(v) for v in levels(p, n)]


@dataclass
class EnumerationVerdict:
    holds: bool
    claim: str
    n: int
    counterexample: tuple[int, ...] | None = None
    lhs_value: Fraction | None = None
    rhs_value: Fraction | None = None
    minimum: Fraction | None = None
    minimizer_weights: tuple[int, ...] = ()

    def __bool__(self) -> bool:
        return self.holds


def enumerate_check(claim: str, lhs: Expr, rhs: Expr | None, n: int) -> EnumerationVerdict:
    """Exhaustive check of ``lhs == rhs`` (``identity``) or ``lhs >= 0`` (``nonnegativity``).

    The first counterexample in lexicographic order is reported.
    """
    _guard(n)
    pts = cube_points(n)
    left = _evaluate(lhs, n)
    if claim == "identity":
        right = _evaluate(rhs, n)
        bad = np.nonzero(left != right)[0]
        if len(bad):
            i = int(bad[0])
            return EnumerationVerdict(False, claim, n, tuple(int(v) for v in pts[i]), to_fraction(left[i]), to_fraction(right[i]))
        return EnumerationVerdict(True, claim, n)
    if claim == "nonnegativity":
        lo = min(left)
        weights = pts.sum(axis=1)
        at_min = tuple(sorted({int(w) for w, v in zip(weights, left) if v == lo}))
        neg = [i for i, v in enumerate(left) if v < 0]
        if neg:
            i = neg[0]
            return EnumerationVerdict(False, claim, n, tuple(int(v) for v in pts[i]), to_fraction(left[i]), None, to_fraction(lo), at_min)
        return EnumerationVerdict(True, claim, n, minimum=to_fraction(lo), minimizer_weights=at_min)
    raise ValueError(f"unknown claim {claim!r}")


def symmetric_agrees(p: UniPoly, n: int, expr: Expr | None = None) -> bool:
    """``p(|x|)`` from the level vector equals pointwise evaluation of ``expr`` (default ``p(sum x_i)``)."""
    _guard(n)
    if expr is None:
        expr = _poly_of(p, hamming(n))
    table = _level_table(p, n)
    weights = cube_points(n).sum(axis=1)
    vals = _evaluate(expr, n)
    return all(vals[i] == table[int(w)] for i, w in enumerate(weights))


def _poly_of(p: UniPoly, arg: Expr) -> Expr:
    """Horner form of ``p(arg)`` as an expression tree.

    The common denominator is pulled out front so the Horner steps stay
    integral at integer points; mixed huge denominators otherwise dominate.
    """
    coeffs = p.coeffs
    den = math.lcm(*(c.denominator for c in coeffs)) if coeffs else 1
    out: Expr = Const(Fraction(0))
    for c in reversed(coeffs):
        out = Add((Mul((out, arg)), Const(c * den)))
    return out if den == 1 else Mul((Const(Fraction(1, den)), out))


poly_of = _poly_of


def pointwise(fn: Callable[[tuple[int, ...]], Fraction], n: int) -> list[Fraction]:
    """Evaluate an arbitrary Python callable over the cube (for hand-rolled claims)."""
    _guard(n)
    return [fn(tuple(p)) for p in itertools.product((0, 1), repeat=n)]


# ------------------------------------------------------- evidence as trees


def evidence_expr(e, n: int) -> Expr:
    """Multivariate expression that an evidence tree denotes before reduction.

    Axiom leaves expand to their literal sums over the coordinates, so
    pointwise agreement with the claimed univariate representative is a real
    test of the closure rules rather than a restatement.
    """
    xs = variables(n)
    kind = e.kind
    if kind == "Square":
        return Pow(SymPoly(e.poly, n), 2)
    if kind == "NonnegScalar":
        return Const(e.scalar)
    if kind == "Sum":
        return Add(tuple(evidence_expr(c, n) for c in e.children))
    if kind == "Product":
        return Mul(tuple(evidence_expr(c, n) for c in e.children))
    if kind == "EvenPower":
        return Pow(SymPoly(e.poly, n), e.exponent)
    if kind == "VarSumAxiom":
        return sum_expr(x * x - (x * x - x) for x in xs)
    if kind == "ComplementAxiom":
        return sum_expr((1 - x) ** 2 - (x * x - x) for x in xs)
    if kind in ("FallingFactorialAxiom", "IntervalNonnegLift"):
        return SymPoly(e.claimed, n)
    raise TypeError(f"unknown evidence kind {kind!r}")


def check_evidence_pointwise(e, n: int) -> list[str]:
    """Every node's claimed polynomial matches its expression at every cube point."""
    _guard(n)
    weights = cube_points(n).sum(axis=1)
    errors = []
    for path, node in e.walk():
        vals = _evaluate(evidence_expr(node, n), n)
        table = _level_table(node.claimed, n)
        bad = [i for i, w in enumerate(weights) if vals[i] != table[int(w)]]
        if bad:
            errors.append(f"{path}: {node.kind} disagrees at {len(bad)} points")
    return errors
