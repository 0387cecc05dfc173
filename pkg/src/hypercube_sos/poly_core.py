"""Exact rational univariate polynomials and certified sign analysis.

Coefficients are held in a FLINT ``fmpq_poly``; every public value that
leaves this module is a :class:`fractions.Fraction`.  Sign questions are
answered exactly by Descartes-rule root isolation (Vincent-Collins-Akritas
bisection) on the square-free part, with Sturm sequences kept for plain
root counting and as an independent cross-check.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Iterable, Sequence, Union

from flint import arb, arb_poly, ctx, fmpq, fmpq_poly, fmpz, fmpz_poly

RationalLike = Union[int, Fraction, fmpq, str]


# ---------------------------------------------------------------- rationals


def to_fmpq(x: RationalLike) -> fmpq:
    if isinstance(x, fmpq):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a rational")
    if isinstance(x, int):
        return fmpq(x)
    if isinstance(x, fmpz):
        return fmpq(x)
    if isinstance(x, Fraction):
        return fmpq(x.numerator, x.denominator)
    if isinstance(x, str):
        return to_fmpq(to_fraction(x))
    raise TypeError(f"not an exact rational: {x!r}")


def to_fraction(x: RationalLike) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, fmpq):
        return Fraction(int(x.p), int(x.q))
    if isinstance(x, (int, fmpz)):
        return Fraction(int(x))
    if isinstance(x, str):
        num, _, den = x.strip().partition("/")
        return Fraction(int(fmpz(num)), int(fmpz(den)) if den else 1)
    raise TypeError(f"not an exact rational: {x!r}")


def rational_str(x: RationalLike) -> str:
    """Canonical ``num/den`` string (``num`` alone when integral)."""
    q = to_fraction(x)
    # fmpz formats without the interpreter's digit cap; long coefficients are routine here
    num = str(fmpz(q.numerator))
    return num if q.denominator == 1 else f"{num}/{fmpz(q.denominator)}"


def arb_to_fraction_bounds(v: arb) -> tuple[Fraction, Fraction]:
    """Exact rational endpoints of an arb ball."""
    out = []
    for end in (v.lower(), v.upper()):
        man, exp = end.man_exp()
        man, exp = int(man), int(exp)
        out.append(Fraction(man * 2**exp) if exp >= 0 else Fraction(man, 2**-exp))
    return out[0], out[1]


def arb_of(x: RationalLike) -> arb:
    return arb(to_fmpq(x))


# --------------------------------------------------------------- polynomial


class UniPoly:
    """Univariate polynomial with exact rational coefficients (low degree first)."""

    __slots__ = ("_p",)

    def __init__(self, coeffs: Iterable[RationalLike] | fmpq_poly | fmpz_poly = ()):
        if isinstance(coeffs, fmpq_poly):
            self._p = coeffs
        elif isinstance(coeffs, fmpz_poly):
            self._p = fmpq_poly(coeffs)
        else:
            self._p = fmpq_poly([to_fmpq(c) for c in coeffs])

    # construction helpers
    @classmethod
    def const(cls, c: RationalLike) -> "UniPoly":
        return cls([c])

    @classmethod
    def x(cls) -> "UniPoly":
        return cls([0, 1])

    @classmethod
    def linear(cls, slope: RationalLike, offset: RationalLike) -> "UniPoly":
        return cls([offset, slope])

    @classmethod
    def from_roots(cls, roots: Iterable[RationalLike]) -> "UniPoly":
        out = fmpq_poly([1])
        for r in roots:
            out *= fmpq_poly([-to_fmpq(r), 1])
        return cls(out)

    # accessors
    @property
    def flint(self) -> fmpq_poly:
        return self._p

    @property
    def degree(self) -> int:
        return int(self._p.degree())

    def is_zero(self) -> bool:
        return self._p.is_zero()

    def is_constant(self) -> bool:
        return self.degree <= 0

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(to_fraction(c) for c in self._p.coeffs())

    def coeff(self, i: int) -> Fraction:
        return to_fraction(self._p[i])

    @property
    def leading_coefficient(self) -> Fraction:
        return to_fraction(self._p.leading_coefficient()) if not self.is_zero() else Fraction(0)

    def height_bits(self) -> int:
        num = self._p.numer()
        return max(int(num.height_bits()), int(self._p.denom()).bit_length())

    # arithmetic
    @staticmethod
    def _coerce(other) -> fmpq_poly:
        if isinstance(other, UniPoly):
            return other._p
        return fmpq_poly([to_fmpq(other)])

    def __add__(self, other):
        return UniPoly(self._p + self._coerce(other))

    __radd__ = __add__

    def __sub__(self, other):
        return UniPoly(self._p - self._coerce(other))

    def __rsub__(self, other):
        return UniPoly(self._coerce(other) - self._p)

    def __neg__(self):
        return UniPoly(-self._p)

    def __mul__(self, other):
        if isinstance(other, UniPoly):
            return UniPoly(self._p * other._p)
        return UniPoly(self._p * to_fmpq(other))

    __rmul__ = __mul__

    def __truediv__(self, scalar: RationalLike) -> "UniPoly":
        if isinstance(scalar, UniPoly):
            return self.exact_div(scalar)
        return UniPoly(self._p / to_fmpq(scalar))

    def __pow__(self, e: int) -> "UniPoly":
        if e < 0:
            raise ValueError("negative exponent")
        return UniPoly(self._p**e)

    def __divmod__(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        q, r = divmod(self._p, other._p)
        return UniPoly(q), UniPoly(r)

    def __floordiv__(self, other: "UniPoly") -> "UniPoly":
        return divmod(self, other)[0]

    def __mod__(self, other: "UniPoly") -> "UniPoly":
        return divmod(self, other)[1]

    def exact_div(self, other: "UniPoly") -> "UniPoly":
        q, r = divmod(self, other)
        if not r.is_zero():
            raise ArithmeticError("division is not exact")
        return q

    def __eq__(self, other) -> bool:
        if isinstance(other, UniPoly):
            return self._p == other._p
        if isinstance(other, (int, Fraction, fmpq)):
            return self._p == fmpq_poly([to_fmpq(other)])
        return NotImplemented

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __call__(self, x):
        """Evaluate at an exact rational, or compose when ``x`` is a polynomial."""
        if isinstance(x, UniPoly):
            return self.compose(x)
        return to_fraction(self._p(to_fmpq(x)))

    def eval_fmpq(self, x: RationalLike) -> fmpq:
        return self._p(to_fmpq(x))

    def eval_arb(self, x: arb) -> arb:
        return arb_poly(self._p)(x)

    def compose(self, inner: "UniPoly") -> "UniPoly":
        return UniPoly(self._p(inner._p))

    def derivative(self) -> "UniPoly":
        return UniPoly(self._p.derivative())

    def gcd(self, other: "UniPoly") -> "UniPoly":
        return UniPoly(self._p.gcd(other._p))

    def primitive_integer(self) -> fmpz_poly:
        """Integer polynomial equal to ``c * self`` for some rational ``c > 0``, content 1."""
        num = self._p.numer()
        if num.is_zero():
            return num
        cont = num.content()
        return fmpz_poly([c // cont for c in num.coeffs()])

    def squarefree_part(self) -> "UniPoly":
        """``p / gcd(p, p')`` normalised to a positive multiple of a primitive integer polynomial."""
        if self.degree <= 0:
            return UniPoly([1])
        g = self._p.gcd(self._p.derivative())
        return UniPoly(UniPoly(divmod(self._p, g)[0]).primitive_integer())

    def squarefree_factors(self) -> list[tuple["UniPoly", int]]:
        """Square-free factorisation ``[(f_i, i)]``."""
        _, facs = self._p.factor_squarefree()
        return [(UniPoly(f), int(m)) for f, m in facs]

    def odd_part(self) -> tuple["UniPoly", bool]:
        """``c * prod f_i`` over square-free factors of odd multiplicity, so ``p = odd * (square)``.

        The flag says whether any factor of positive degree was dropped (had even multiplicity).
        """
        c, facs = self._p.factor_squarefree()
        out = fmpq_poly([c])
        dropped = False
        for f, m in facs:
            if int(m) % 2:
                out *= f
            elif f.degree() > 0:
                dropped = True
        return UniPoly(out), dropped

    def sign_at(self, x: RationalLike) -> int:
        v = self._p(to_fmpq(x))
        return (v > 0) - (v < 0)

    def __repr__(self) -> str:
        return f"UniPoly({self._p.str()})"

    def __str__(self) -> str:
        return self._p.str()


X = UniPoly.x()
ONE = UniPoly.const(1)


def linear_map(lo: RationalLike, hi: RationalLike, new_lo: RationalLike, new_hi: RationalLike) -> UniPoly:
    """Affine polynomial sending ``lo -> new_lo`` and ``hi -> new_hi``."""
    lo, hi, new_lo, new_hi = map(to_fraction, (lo, hi, new_lo, new_hi))
    slope = (new_hi - new_lo) / (hi - lo)
    return UniPoly([new_lo - slope * lo, slope])


@functools.lru_cache(maxsize=64)
def chebyshev_T(d: int) -> UniPoly:
    """Chebyshev polynomial of the first kind via the three-term recurrence."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    prev, cur = fmpq_poly([1]), fmpq_poly([0, 1])
    if d == 0:
        return UniPoly(prev)
    two_x = fmpq_poly([0, 2])
    for _ in range(d - 1):
        prev, cur = cur, two_x * cur - prev
    return UniPoly(cur)


@functools.lru_cache(maxsize=64)
def chebyshev_U(d: int) -> UniPoly:
    """Chebyshev polynomial of the second kind via the three-term recurrence."""
    if d < 0:
        raise ValueError("degree must be nonnegative")
    prev, cur = fmpq_poly([1]), fmpq_poly([0, 2])
    if d == 0:
        return UniPoly(prev)
    two_x = fmpq_poly([0, 2])
    for _ in range(d - 1):
        prev, cur = cur, two_x * cur - prev
    return UniPoly(cur)


def derivative(p: UniPoly) -> UniPoly:
    return p.derivative()


def compose(outer: UniPoly, inner: UniPoly) -> UniPoly:
    return outer.compose(inner)


# ---------------------------------------------------------------- intervals


@dataclass(frozen=True)
class IntervalQ:
    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", to_fraction(self.lo))
        object.__setattr__(self, "hi", to_fraction(self.hi))
        if self.lo > self.hi:
            raise ValueError(f"empty interval [{self.lo}, {self.hi}]")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def mid(self) -> Fraction:
        return (self.lo + self.hi) / 2

    def contains(self, x: RationalLike) -> bool:
        x = to_fraction(x)
        return self.lo <= x <= self.hi

    def to_json(self) -> list[str]:
        return [rational_str(self.lo), rational_str(self.hi)]

    @classmethod
    def from_json(cls, data: Sequence[str]) -> "IntervalQ":
        return cls(Fraction(data[0]), Fraction(data[1]))

    def __str__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def as_interval(interval) -> IntervalQ:
    if isinstance(interval, IntervalQ):
        return interval
    lo, hi = interval
    return IntervalQ(to_fraction(lo), to_fraction(hi))


# ------------------------------------------------------------ certificates


@dataclass(frozen=True)
class RootCell:
    """Open cell ``(lo, hi)`` holding exactly one root, or an exact root when ``lo == hi``."""

    lo: Fraction
    hi: Fraction

    @property
    def exact(self) -> bool:
        return self.lo == self.hi

    def to_json(self) -> list[str]:
        return [rational_str(self.lo), rational_str(self.hi)]


@dataclass(frozen=True)
class Leaf:
    """Subinterval of a Descartes partition with its sign-variation count (0 or 1)."""

    lo: Fraction
    hi: Fraction
    variations: int


@dataclass
class SignCertificate:
    """Outcome of an exact sign or root-count analysis on a closed interval.

    ``verdict`` is one of ``positive``, ``nonnegative``, ``negative`` (a point with
    ``p < 0`` is in ``witness_point``), ``zero`` (strict positivity requested but a
    root lies in the interval) or ``root_count``.
    """

    interval: IntervalQ
    verdict: str
    roots: list[RootCell] = field(default_factory=list)
    witness_point: Fraction | None = None
    witness_value: Fraction | None = None
    root_count: int | None = None
    root_at_lo: bool | None = None
    multiplicities: list[tuple[RootCell, int]] = field(default_factory=list)
    leaves: list[Leaf] = field(default_factory=list)
    strict: bool = False
    open_lo: bool = False
    open_hi: bool = False
    method: str = "descartes"

    @property
    def holds(self) -> bool:
        if self.verdict == "root_count":
            return True
        if self.strict:
            return self.verdict == "positive"
        return self.verdict in ("positive", "nonnegative")

    def to_json(self) -> dict:
        out = {
            "interval": self.interval.to_json(),
            "verdict": self.verdict,
            "strict": self.strict,
            "open_lo": self.open_lo,
            "open_hi": self.open_hi,
            "method": self.method,
            "roots": [r.to_json() for r in self.roots],
        }
        if self.witness_point is not None:
            out["witness"] = {
                "point": rational_str(self.witness_point),
                "value": rational_str(self.witness_value) if self.witness_value is not None else None,
            }
        if self.root_count is not None:
            out["root_count"] = self.root_count
            out["root_at_lo"] = self.root_at_lo
            out["multiplicities"] = [[c.to_json(), m] for c, m in self.multiplicities]
        if self.leaves:
            out["leaves"] = [[rational_str(l.lo), rational_str(l.hi), l.variations] for l in self.leaves]
        return out


# ------------------------------------------------------------ Sturm chains


def _primitive_positive(p: fmpq_poly) -> fmpz_poly:
    return UniPoly(p).primitive_integer()


def sturm_sequence(p: UniPoly) -> list[fmpz_poly]:
    """Sturm chain of a square-free polynomial, each element scaled by a positive rational."""
    f0 = _primitive_positive(p.flint)
    f1 = _primitive_positive(p.flint.derivative())
    seq = [f0, f1]
    while seq[-1].degree() > 0:
        r = fmpq_poly(seq[-2]) % fmpq_poly(seq[-1])
        if r.is_zero():
            break
        seq.append(_primitive_positive(-r))
    return seq


def _sign_variations_at(seq: Sequence[fmpz_poly], x: fmpq) -> int:
    signs = []
    for f in seq:
        v = fmpq_poly(f)(x)
        if v != 0:
            signs.append(v > 0)
    return sum(1 for a, b in zip(signs, signs[1:]) if a != b)


# degree * coefficient bits above which the remainder chain is too slow to build
STURM_BUDGET = 1_000_000


def _sturm_count_squarefree(f: UniPoly, lo: fmpq, hi: fmpq) -> int:
    if f.degree <= 0:
        return 0
    seq = sturm_sequence(f)
    return _sign_variations_at(seq, lo) - _sign_variations_at(seq, hi)


def sturm_count_roots(p: UniPoly, interval, sturm_budget: int = STURM_BUDGET) -> SignCertificate:
    """Count distinct real roots of ``p`` in ``(lo, hi]``.

    Small factors use Sturm chains; factors past ``sturm_budget`` (degree times
    coefficient bits) are counted by their isolating cells, which is equally
    exact.  Multiplicities come from the square-free factorisation;
    ``root_at_lo`` reports whether ``lo`` itself is a root.
    """
    I = as_interval(interval)
    if p.is_zero():
        raise ValueError("identically zero polynomial has no finite root count")
    lo, hi = to_fmpq(I.lo), to_fmpq(I.hi)
    total = 0
    methods = set()
    mults: list[tuple[RootCell, int]] = []
    for f, m in p.squarefree_factors():
        if f.degree <= 0:
            continue
        cells = [c for c in isolate_real_roots(f, I) if not c.lo == c.hi == I.lo]
        if f.degree * max(f.height_bits(), 1) <= sturm_budget:
            total += _sturm_count_squarefree(f, lo, hi)
            methods.add("sturm")
        else:
            total += len(cells)
            methods.add("descartes")
        for cell in cells:
            if f.degree == 1:
                r = -f.coeff(0) / f.coeff(1)
                cell = RootCell(r, r)
            elif not cell.exact:
                cell = refine_root(f, cell, I.width / 2**32)
            mults.append((cell, m))
    mults.sort(key=lambda cm: (cm[0].lo, cm[0].hi))
    return SignCertificate(
        interval=I,
        verdict="root_count",
        root_count=total,
        root_at_lo=p(I.lo) == 0,
        multiplicities=mults,
        method="+".join(sorted(methods)) or "sturm",
    )


# ---------------------------------------------------- Descartes isolation


def _variations(coeffs: Sequence) -> int:
    count = 0
    last = 0
    for c in coeffs:
        if c == 0:
            continue
        s = 1 if c > 0 else -1
        if last and s != last:
            count += 1
        last = s
    return count


_SHIFT_ONE = fmpz_poly([1, 1])


def _descartes_unit(P: fmpz_poly) -> int:
    """Sign variations bounding the number of roots of ``P`` in the open unit interval."""
    rev = fmpz_poly(list(reversed(P.coeffs())))
    return _variations(rev(_SHIFT_ONE).coeffs())


def _halve(P: fmpz_poly) -> fmpz_poly:
    """``2^deg P(t/2)``."""
    cs = P.coeffs()
    d = len(cs) - 1
    return fmpz_poly([c << (d - i) for i, c in enumerate(cs)])


def _content_reduce(P: fmpz_poly) -> fmpz_poly:
    c = P.content()
    if c == 1 or c == 0:
        return P
    return fmpz_poly([a // c for a in P.coeffs()])


def _unit_transform(p: UniPoly, lo: Fraction, hi: Fraction) -> fmpz_poly:
    """Primitive integer polynomial with the roots of ``p`` on ``[lo, hi]`` moved to ``[0, 1]``."""
    inner = UniPoly([lo, hi - lo])
    return p.compose(inner).primitive_integer()


def _isolate_unit(P: fmpz_poly):
    """Descartes bisection of a square-free ``P`` on ``(0, 1)``.

    Yields ``('leaf', c, k, v)`` for the cell ``(c/2^k, (c+1)/2^k)`` with
    variation count ``v`` in ``{0, 1}``, and ``('root', c, k)`` for exact dyadic
    roots found at bisection points.
    """
    stack = [(P, 0, 0)]
    out = []
    while stack:
        Q, c, k = stack.pop()
        if Q.degree() <= 0:
            out.append(("leaf", c, k, 0))
            continue
        v = _descartes_unit(Q)
        if v <= 1:
            out.append(("leaf", c, k, v))
            continue
        QL = _halve(Q)
        QR = QL(_SHIFT_ONE)
        if QR.coeffs()[0] == 0:
            out.append(("root", 2 * c + 1, k + 1))
            QR = fmpz_poly(QR.coeffs()[1:])
            QL = divmod(QL, fmpz_poly([-1, 1]))[0]
        stack.append((_content_reduce(QR), 2 * c + 1, k + 1))
        stack.append((_content_reduce(QL), 2 * c, k + 1))
    return out


def _descartes_partition(sf: UniPoly, lo: Fraction, hi: Fraction):
    """Partition ``[lo, hi]`` into Descartes leaves plus exact roots of square-free ``sf``."""
    width = hi - lo
    exact: list[Fraction] = []
    P = _unit_transform(sf, lo, hi)
    if P.coeffs() and P.coeffs()[0] == 0:
        exact.append(lo)
        P = fmpz_poly(P.coeffs()[1:])
    if sum(P.coeffs()) == 0:
        exact.append(hi)
        P = divmod(P, fmpz_poly([-1, 1]))[0]
    leaves: list[Leaf] = []
    for item in _isolate_unit(P):
        if item[0] == "root":
            _, c, k = item
            exact.append(lo + width * Fraction(c, 2**k))
        else:
            _, c, k, v = item
            leaves.append(Leaf(lo + width * Fraction(c, 2**k), lo + width * Fraction(c + 1, 2**k), v))
    leaves.sort(key=lambda l: l.lo)
    return leaves, sorted(set(exact))


def isolate_real_roots(p: UniPoly, interval) -> list[RootCell]:
    """Isolating cells for the distinct real roots of ``p`` on ``[lo, hi]``."""
    I = as_interval(interval)
    if p.is_zero():
        raise ValueError("identically zero polynomial")
    if p.degree <= 0:
        return []
    sf = p.squarefree_part()
    if I.lo == I.hi:
        return [RootCell(I.lo, I.lo)] if sf(I.lo) == 0 else []
    leaves, exact = _descartes_partition(sf, I.lo, I.hi)
    cells = [RootCell(r, r) for r in exact]
    cells += [RootCell(l.lo, l.hi) for l in leaves if l.variations == 1]
    cells.sort(key=lambda c: (c.lo, c.hi))
    return cells


def refine_root(p: UniPoly, cell: RootCell, width: Fraction) -> RootCell:
    """Bisect an isolating cell of a square-free-part root until it is at most ``width`` wide."""
    if cell.exact:
        return cell
    sf = p.squarefree_part()
    lo, hi = cell.lo, cell.hi
    # a leaf may end at an exact root that was deflated during isolation
    for end in (lo, hi):
        if sf(end) == 0:
            sf = sf.exact_div(UniPoly([-end, 1]))
    s_lo = sf.sign_at(lo)
    if s_lo == 0 or sf.sign_at(hi) == 0 or s_lo == sf.sign_at(hi):
        raise ValueError("cell endpoints do not bracket a sign change")
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = sf.sign_at(mid)
        if s == 0:
            return RootCell(mid, mid)
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return RootCell(lo, hi)


def prove_nonneg(
    p: UniPoly,
    interval,
    strict: bool = False,
    open_lo: bool = False,
    open_hi: bool = False,
) -> SignCertificate:
    """Exactly decide ``p >= 0`` (or ``p > 0`` when ``strict``) on a closed interval.

    With ``open_lo`` / ``open_hi`` a root at that endpoint does not spoil strict
    positivity, so ``(lo, hi]``, ``[lo, hi)`` and ``(lo, hi)`` are all expressible.
    A failure always carries an exact witness: a rational point with ``p < 0``,
    or the cell of an offending root.
    """
    I = as_interval(interval)
    if p.is_zero():
        raise ValueError("identically zero polynomial")
    kwargs = dict(interval=I, strict=strict, open_lo=open_lo, open_hi=open_hi)
    if p.degree == 0:
        c = p.coeff(0)
        if c < 0:
            return SignCertificate(verdict="negative", witness_point=I.lo, witness_value=c, **kwargs)
        return SignCertificate(verdict="positive", **kwargs)
    if I.lo == I.hi:
        v = p(I.lo)
        if v < 0:
            return SignCertificate(verdict="negative", witness_point=I.lo, witness_value=v, **kwargs)
        verdict = "positive" if v > 0 or open_lo or open_hi else "zero"
        return SignCertificate(verdict=verdict, roots=[RootCell(I.lo, I.lo)] if v == 0 else [], **kwargs)

    sf = None
    if not strict:
        # squared factors cannot change sign, so only the odd-multiplicity part needs isolating
        odd, dropped = p.odd_part()
        if dropped:
            cert = _odd_route(odd, I, open_lo, open_hi)
            if cert is not None:
                return cert
        else:
            sf = UniPoly(odd.primitive_integer())
    if sf is None:
        sf = p.squarefree_part()
    leaves, exact = _descartes_partition(sf, I.lo, I.hi)
    return _sign_from_partition(p, I, leaves, exact, strict, open_lo, open_hi, sf)


def _odd_route(odd: UniPoly, I: "IntervalQ", open_lo: bool, open_hi: bool) -> SignCertificate | None:
    """Nonnegativity via the odd part; ``None`` when it fails, so the caller finds a witness on ``p`` itself."""
    if odd.degree <= 0:
        ok = odd.coeff(0) > 0
        leaves = []
        exact: list[Fraction] = []
    else:
        odd_sf = odd.squarefree_part()
        leaves, exact = _descartes_partition(odd_sf, I.lo, I.hi)
        ok = _sign_from_partition(odd, I, leaves, exact, False, open_lo, open_hi, odd_sf).holds
    if not ok:
        return None
    cells = [RootCell(r, r) for r in exact] + [RootCell(l.lo, l.hi) for l in leaves if l.variations == 1]
    cells.sort(key=lambda c: (c.lo, c.hi))
    return SignCertificate(
        interval=I, verdict="nonnegative", roots=cells, leaves=leaves, open_lo=open_lo, open_hi=open_hi, method="descartes-odd"
    )


def _leaf_samples(sf: UniPoly, leaf: Leaf) -> list[Fraction]:
    """Interior points meeting every sign region of the open leaf: its midpoint, or one point each side of its root."""
    if leaf.variations == 0:
        return [(leaf.lo + leaf.hi) / 2]
    g = sf
    for end in (leaf.lo, leaf.hi):
        if g(end) == 0:
            g = g.exact_div(UniPoly([-end, 1]))
    s_lo = g.sign_at(leaf.lo)
    left = right = None
    a, b = leaf.lo, leaf.hi
    while left is None or right is None:
        m = (a + b) / 2
        s = g.sign_at(m)
        if s == 0:
            return [left if left is not None else (a + m) / 2, right if right is not None else (m + b) / 2]
        if s == s_lo:
            left, a = m, m
        else:
            right, b = m, m
    return [left, right]


def _sign_from_partition(p, I, leaves, exact, strict, open_lo, open_hi, sf) -> SignCertificate:
    kwargs = dict(interval=I, strict=strict, open_lo=open_lo, open_hi=open_hi, leaves=leaves)
    exact_set = set(exact)
    points = {l.lo for l in leaves} | {l.hi for l in leaves} | {I.lo, I.hi}
    for leaf in leaves:
        points.update(_leaf_samples(sf, leaf))
    points = sorted(points)
    pf = p.flint
    for x in points:
        if x in exact_set:
            continue
        v = pf(to_fmpq(x))
        if v < 0:
            return SignCertificate(
                verdict="negative",
                witness_point=x,
                witness_value=to_fraction(v),
                roots=[RootCell(r, r) for r in exact],
                **kwargs,
            )
    cells = [RootCell(r, r) for r in exact] + [RootCell(l.lo, l.hi) for l in leaves if l.variations == 1]
    cells.sort(key=lambda c: (c.lo, c.hi))
    offending = [
        c
        for c in cells
        if not ((open_lo and c.exact and c.lo == I.lo) or (open_hi and c.exact and c.lo == I.hi))
    ]
    if cells and not strict:
        return SignCertificate(verdict="nonnegative", roots=cells, **kwargs)
    if offending:
        first = offending[0]
        return SignCertificate(
            verdict="zero",
            roots=cells,
            witness_point=first.lo if first.exact else None,
            witness_value=Fraction(0) if first.exact else None,
            **kwargs,
        )
    return SignCertificate(verdict="positive", roots=cells, **kwargs)


def certify_nonneg(p: UniPoly, interval, strict: bool = False, **kw) -> SignCertificate:
    """:func:`prove_nonneg` that also accepts the zero polynomial (nonnegative, never positive)."""
    I = as_interval(interval)
    if p.is_zero():
        return SignCertificate(interval=I, verdict="zero" if strict else "nonnegative", strict=strict, method="identity")
    return prove_nonneg(p, I, strict=strict, **kw)


def check_sign_certificate(p: UniPoly, cert: SignCertificate) -> bool:
    """Replay a Descartes certificate without search: recount every leaf and recheck every sample."""
    if cert.method == "identity":
        return p.is_zero() and cert.verdict in ("nonnegative", "zero")
    if cert.verdict in ("negative",):
        return cert.witness_point is not None and p(cert.witness_point) < 0
    if cert.method == "descartes-odd":
        if cert.strict or cert.verdict != "nonnegative" or p.is_zero():
            return False
        odd, _ = p.odd_part()
        if odd.degree <= 0:
            return odd.coeff(0) > 0
        replayed = replace(cert, method="descartes", verdict="positive" if not cert.roots else "nonnegative")
        return check_sign_certificate(odd, replayed)
    if cert.method != "descartes" or p.is_zero():
        return False
    if p.degree <= 0 or cert.interval.lo == cert.interval.hi:
        fresh = prove_nonneg(p, cert.interval, cert.strict, cert.open_lo, cert.open_hi)
        return fresh.verdict == cert.verdict
    I = cert.interval
    sf = p.squarefree_part()
    exact = sorted(c.lo for c in cert.roots if c.exact)
    for r in exact:
        if sf(r) != 0:
            return False
    # leaves and exact roots must tile [lo, hi]
    leaves = sorted(cert.leaves, key=lambda l: l.lo)
    if not leaves:
        return False
    cursor = I.lo
    for leaf in leaves:
        if leaf.lo != cursor or leaf.hi <= leaf.lo or leaf.variations not in (0, 1):
            return False
        cursor = leaf.hi
        if _descartes_unit(_unit_transform(sf, leaf.lo, leaf.hi)) != leaf.variations:
            return False
    if cursor != I.hi:
        return False
    inner_exact = {l.lo for l in leaves} | {l.hi for l in leaves}
    if any(r not in inner_exact for r in exact):
        return False
    fresh = _sign_from_partition(p, I, leaves, exact, cert.strict, cert.open_lo, cert.open_hi, sf)
    return fresh.verdict == cert.verdict


# -------------------------------------------------------- interval bounds


def interval_bound(p: UniPoly, interval, precision_bits: int = 128, depth: int = 4) -> IntervalQ:
    """Outward-rounded enclosure of ``p`` over an interval.

    Centred (Taylor) form on ``2^depth`` equal pieces, evaluated in ball
    arithmetic at ``precision_bits``.  Used only to reject early.
    """
    I = as_interval(interval)
    old = ctx.prec
    ctx.prec = max(int(precision_bits), 53)
    try:
        ap = arb_poly(p.flint)
        pieces = 2**depth
        step = I.width / pieces
        lo_all = hi_all = None
        for j in range(pieces):
            a = I.lo + step * j
            c = arb_of(a + step / 2)
            r = arb_of(step / 2)
            shifted = ap(arb_poly([c, 1]))
            cs = shifted.coeffs()
            spread = arb(0)
            rp = arb(1)
            for cj in cs[1:]:
                rp = rp * r
                spread += abs(cj) * rp
            val = cs[0] if cs else arb(0)
            lo_b, _ = arb_to_fraction_bounds(val - spread)
            _, hi_b = arb_to_fraction_bounds(val + spread)
            lo_all = lo_b if lo_all is None else min(lo_all, lo_b)
            hi_all = hi_b if hi_all is None else max(hi_all, hi_b)
        return IntervalQ(lo_all, hi_all)
    finally:
        ctx.prec = old


def sup_norm_estimate(p: UniPoly, interval, samples: int = 2049) -> Fraction:
    """Lower estimate of ``max |p|`` on an interval from exact values on a uniform grid."""
    I = as_interval(interval)
    best = Fraction(0)
    for j in range(samples):
        x = I.lo + I.width * Fraction(j, samples - 1)
        best = max(best, abs(p(x)))
    return best


def coefficient_bound(p: UniPoly, radius: RationalLike) -> Fraction:
    """Rigorous ``sum |c_i| r^i`` bound on ``|p|`` over ``[-r, r]``."""
    r = to_fraction(radius)
    total = Fraction(0)
    for c in reversed(p.coeffs):
        total = total * r + abs(c)
    return total
