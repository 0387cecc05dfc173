"""Chebyshev facts checked instance by instance in exact arithmetic.

* location of the smallest root of ``T_d(x/n - 1)`` (a rational enclosure),
* growth of ``T_d`` just left of ``-1`` (lower and upper bounds in ``c``),
* the Markov bound ``|T_d'| <= d^2`` on ``[-1, 1]``.

Bounds of the form ``(1 + sqrt(sigma))^d`` are written ``A + B sqrt(sigma)`` with
``A, B`` rational and compared after squaring, so no real arithmetic enters a
verdict.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

from flint import arb, ctx, fmpq

from .poly_core import (
    IntervalQ,
    UniPoly,
    arb_to_fraction_bounds,
    chebyshev_T,
    linear_map,
    prove_nonneg,
    sturm_count_roots,
    to_fmpq,
    to_fraction,
)


def pi_enclosure(bits: int = 128) -> tuple[Fraction, Fraction]:
    old = ctx.prec
    ctx.prec = bits
    try:
        return arb_to_fraction_bounds(arb.pi())
    finally:
        ctx.prec = old


def chebyshev_value(d: int, y) -> fmpq:
    """``T_d(y)`` at a rational point by the numeric recurrence."""
    y = to_fmpq(y)
    if d == 0:
        return fmpq(1)
    prev, cur = fmpq(1), y
    for _ in range(d - 1):
        prev, cur = cur, 2 * y * cur - prev
    return cur


def sqrt_power(sigma, d: int) -> tuple[fmpq, fmpq]:
    """``(A, B)`` with ``(1 + sqrt(sigma))^d = A + B sqrt(sigma)``."""
    sigma = to_fmpq(sigma)
    A, B = fmpq(1), fmpq(0)
    for _ in range(d):
        A, B = A + B * sigma, A + B
    return A, B


def scaled_sqrt_power(scale, sigma, d: int) -> tuple[fmpq, fmpq]:
    """``(A, B)`` with ``(1 + scale*sqrt(sigma))^d = A + B sqrt(sigma)``."""
    scale, sigma = to_fmpq(scale), to_fmpq(sigma)
    A, B = fmpq(1), fmpq(0)
    for _ in range(d):
        A, B = A + B * scale * sigma, scale * A + B
    return A, B


def ge_surd(lhs, A, B, sigma) -> bool:
    """Exactly decide ``lhs >= A + B sqrt(sigma)`` for ``B >= 0``, ``sigma >= 0``."""
    lhs, A, B, sigma = map(to_fmpq, (lhs, A, B, sigma))
    gap = lhs - A
    if B == 0 or sigma == 0:
        return gap >= 0
    if gap < 0:
        return False
    return gap * gap >= B * B * sigma


def le_surd(lhs, A, B, sigma) -> bool:
    """Exactly decide ``lhs <= A + B sqrt(sigma)`` for ``B >= 0``, ``sigma >= 0``."""
    lhs, A, B, sigma = map(to_fmpq, (lhs, A, B, sigma))
    gap = lhs - A
    if gap <= 0:
        return True
    if B == 0 or sigma == 0:
        return False
    return gap * gap <= B * B * sigma


# ---------------------------------------------------------- smallest root


@dataclass(frozen=True)
class SmallestRootResult:
    d: int
    n: int
    r0_exact_form: str
    r0_enclosure: IntervalQ
    pi_bound: Fraction

    @property
    def upper(self) -> Fraction:
        return self.r0_enclosure.hi


def _scaled_cheb(d: int, n) -> UniPoly:
    return chebyshev_T(d).compose(linear_map(0, n, -1, 0))


def smallest_root_scaled(d: int, n: int, precision_bits: int = 128) -> SmallestRootResult:
    """Enclose ``r_0 = n (1 - cos(pi / 2d))``, the smallest root of ``T_d(x/n - 1)``.

    Bisection with exact signs of the scaled Chebyshev polynomial, started on a
    bracket whose single-root property is confirmed by a Sturm count.
    """
    if d < 1 or n < 1:
        raise ValueError("need d >= 1 and n >= 1")
    n = Fraction(n)
    _, pi_hi = pi_enclosure(128)
    pi_bound = pi_hi * pi_hi * n / (4 * d * d)
    form = f"{n}*(1-cos(pi/{2 * d}))"
    if d == 1:
        return SmallestRootResult(d, int(n), form, IntervalQ(n, n), pi_bound)
    # 1 - cos(t) <= t^2 / 2, so r_0 <= pi^2 n / (8 d^2) < pi_bound
    lo, hi = Fraction(0), min(pi_bound, n)
    f = _scaled_cheb(d, n)
    if sturm_count_roots(f, (lo, hi)).root_count != 1 or f(lo) == 0:
        raise ArithmeticError("initial bracket does not isolate the smallest root")
    s_lo = f.sign_at(lo)
    width = n / 2**precision_bits
    while hi - lo > width:
        mid = (lo + hi) / 2
        s = f.sign_at(mid)
        if s == 0:
            lo = hi = mid
            break
        if s == s_lo:
            lo = mid
        else:
            hi = mid
    return SmallestRootResult(d, int(n), form, IntervalQ(lo, hi), pi_bound)


def check_smallest_root(res: SmallestRootResult) -> dict[str, bool]:
    """Consistency of an enclosure: sign change at its ends and no earlier root."""
    f = _scaled_cheb(res.d, res.n)
    lo, hi = res.r0_enclosure.lo, res.r0_enclosure.hi
    if lo == hi:
        bracket = f(lo) == 0
    else:
        bracket = f.sign_at(lo) * f.sign_at(hi) < 0
    none_before = lo == 0 or (
        sturm_count_roots(f, (0, lo)).root_count == 0 and f(0) != 0
    )
    return {
        "sign_change": bracket,
        "no_root_before": none_before,
        "below_pi_bound": res.d < 2 or hi <= res.pi_bound,
    }


# ---------------------------------------------------------- growth bounds


@dataclass
class GrowthBoundCheck:
    n: int
    d: int
    c: Fraction
    case: int
    lhs: Fraction
    bounds: dict[str, str] = field(default_factory=dict)
    verdicts: dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(v for k, v in self.verdicts.items() if k != "refined_upper")


def verify_growth_bounds(n: int, d: int, c, include_refined: bool = True) -> GrowthBoundCheck:
    """Check the off-interval growth of ``T_d^2(-1 - c/n)`` against its closed-form bounds.

    ``0 <= c <= n`` (needs ``d <= n``): ``T^2 >= (1/4)(1+sqrt(2c/n))^{2d}`` and
    ``T^2 <= (1+2 sqrt(2c/n))^{2d}``; optionally the sharper
    ``T^2 <= (1+sqrt((2c+1)/n))^{2d}`` that only holds for large ``n``.
    ``c > n``: ``T^2 <= (1+3c/n)^{2d}``.
    """
    c = to_fraction(c)
    if c < 0:
        raise ValueError("c must be nonnegative")
    t = chebyshev_value(d, fmpq(-1) - to_fmpq(c) / n)
    lhs = t * t
    absT = abs(t)
    chk = GrowthBoundCheck(n=n, d=d, c=c, case=1 if c <= n else 2, lhs=to_fraction(lhs))
    if c <= n:
        if d > n:
            raise ValueError("case c <= n requires d <= n")
        sigma = 2 * to_fmpq(c) / n
        # |T| >= (1/2)(1+s)^d  <=>  2|T| >= A + B s
        A, B = sqrt_power(sigma, d)
        chk.bounds["lower"] = f"(1/4)(1+sqrt({to_fraction(sigma)}))^{2 * d}"
        chk.verdicts["lower"] = ge_surd(2 * absT, A, B, sigma)
        A2, B2 = scaled_sqrt_power(2, sigma, d)
        chk.bounds["upper"] = f"(1+2sqrt({to_fraction(sigma)}))^{2 * d}"
        chk.verdicts["upper"] = le_surd(absT, A2, B2, sigma)
        if include_refined:
            sig3 = (2 * to_fmpq(c) + 1) / n
            A3, B3 = sqrt_power(sig3, d)
            chk.bounds["refined_upper"] = f"(1+sqrt({to_fraction(sig3)}))^{2 * d}"
            chk.verdicts["refined_upper"] = le_surd(absT, A3, B3, sig3)
    else:
        bound = (1 + 3 * to_fmpq(c) / n) ** (2 * d)
        chk.bounds["upper_far"] = f"(1+3c/n)^{2 * d}"
        chk.verdicts["upper_far"] = lhs <= bound
    return chk


def refinement_threshold(c, ns, d_of_n=lambda n: n) -> int | None:
    """Smallest ``n`` in ``ns`` from which the large-``n`` refinement holds at every later ``n``."""
    first = None
    for n in sorted(ns):
        d = d_of_n(n)
        ok = verify_growth_bounds(n, d, c).verdicts["refined_upper"]
        if ok and first is None:
            first = n
        elif not ok:
            first = None
    return first


# ---------------------------------------------------------- Markov bound


@dataclass
class MarkovReport:
    d: int
    grid_points: int
    grid_ok: bool
    global_ok: bool
    max_on_grid: Fraction
    certificate: object

    @property
    def passed(self) -> bool:
        return self.grid_ok and self.global_ok


def markov_derivative_bound_check(d: int, grid_step=Fraction(1, 64)) -> MarkovReport:
    """``|T_d'| <= d^2`` on a grid of ``[-1, 1]`` and globally via ``d^4 - T_d'^2 >= 0``."""
    step = to_fraction(grid_step)
    dT = chebyshev_T(d).derivative()
    count = int(math.floor(2 / step)) + 1
    best = Fraction(0)
    ok = True
    for j in range(count):
        x = -1 + j * step
        v = abs(dT(x))
        best = max(best, v)
        ok &= v <= d * d
    gap = UniPoly.const(d**4) - dT * dT
    cert = prove_nonneg(gap, (-1, 1)) if not gap.is_zero() else None
    glob = gap.is_zero() or cert.holds
    return MarkovReport(d, count, ok, glob, best, cert)
