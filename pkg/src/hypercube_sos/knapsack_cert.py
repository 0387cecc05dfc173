"""Min Knapsack certificate: ``|x| - 1 = s0 + s1 (|x| - 1/P)`` on the hypercube.

``s1 = alpha * T(y)^m`` with ``y = (x - 1 + r0)/n - 1`` is tiny on ``[1, n]``
and large at ``0``.  ``r0`` (the smallest root of ``T_d(x/n - 1)``) is
irrational, so we use a rational upper enclosure ``r0_hat`` and replace
``T_d`` by ``(T_d - delta) / (1 + |delta|)`` with ``delta = T_d(r0_hat/n - 1)``.
That polynomial vanishes exactly at ``x = 1`` and is still bounded by 1 with
derivative bounded by ``d^2`` on ``[-1, 1]``.  Every property is re-certified
for it.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field
from fractions import Fraction

from flint import arb, ctx

from .cheb_bounds import ge_surd, pi_enclosure, smallest_root_scaled, sqrt_power
from .poly_core import (
    X,
    IntervalQ,
    RootCell,
    UniPoly,
    arb_of,
    arb_to_fraction_bounds,
    chebyshev_T,
    isolate_real_roots,
    prove_nonneg,
    rational_str,
    refine_root,
    sturm_count_roots,
    to_fraction,
)
from .reporting import ConditionReport, all_pass, nonneg_condition, scalar_condition
from .sos_univariate import (
    EvidenceReport,
    SosEvidence,
    check_evidence,
    even_power,
    lift_nonneg_to_hypercube,
    nonneg_scalar,
    product_of,
    residual_sup_bound,
)
from .sqf_cert import assemble_sqf_certificate, certificate_for_shifted_roots


def ceil_sqrt_scaled(c: int, n: int) -> int:
    """``ceil(c * sqrt(n))`` exactly."""
    t = math.isqrt(c * c * n)
    return t if t * t == c * c * n else t + 1


@dataclass(frozen=True)
class MkParams:
    n: int
    P: Fraction
    d: int
    alpha: Fraction
    m: int
    r0_enclosure: IntervalQ
    m_bound: Fraction | None = None

    def __post_init__(self):
        if self.m < 2 or self.m % 2:
            raise ValueError("m must be a positive even integer")
        if self.alpha <= 0 or self.d < 1:
            raise ValueError("need alpha > 0 and d >= 1")

    @property
    def r0_hat(self) -> Fraction:
        return self.r0_enclosure.hi

    def to_json(self) -> dict:
        out = {
            "n": self.n,
            "P": rational_str(self.P),
            "d": self.d,
            "alpha": rational_str(self.alpha),
            "m": self.m,
            "r0_enclosure": self.r0_enclosure.to_json(),
        }
        if self.m_bound is not None:
            out["m_bound"] = rational_str(self.m_bound)
        return out


# -------------------------------------------------------------- builder


def shifted_chebyshev(d: int, n: int, r0_hat: Fraction) -> tuple[UniPoly, Fraction]:
    """``(T_d - delta)/(1 + |delta|)`` as a polynomial in ``y``, and ``delta``."""
    T = chebyshev_T(d)
    delta = T(Fraction(r0_hat) / n - 1)
    return (T - delta) / (1 + abs(delta)), delta


def stilde_argument(n: int, r0_hat: Fraction) -> UniPoly:
    return (X - 1 + r0_hat) / n - 1


def build_stilde(n: int, P, d: int, alpha, m: int, precision_bits: int = 128, shift_root: bool = True) -> tuple[UniPoly, dict]:
    """``alpha * T(y)^m``; with ``shift_root`` the value at ``x = 1`` is exactly 0.

    Without it, ``T_d`` itself is used and ``s(1)`` is a certified-tiny positive number.
    """
    if m % 2:
        raise ValueError("m must be even")
    r0 = smallest_root_scaled(d, n, precision_bits)
    r0_hat = r0.upper
    if shift_root:
        T, delta = shifted_chebyshev(d, n, r0_hat)
    else:
        T, delta = chebyshev_T(d), Fraction(0)
    s = (T**m).compose(stilde_argument(n, r0_hat)) * Fraction(alpha)
    return s, {"r0": r0, "r0_hat": r0_hat, "delta": delta, "base": T.compose(stilde_argument(n, r0_hat))}


# ------------------------------------------------------- parameter choice


def _m_bound(n: int, P: Fraction, d: int, alpha: Fraction, r0_hat: Fraction, bits: int = 256) -> Fraction:
    """Upper end of an enclosure of ``(ln P - ln alpha) / (d ln(1 + sqrt(2(1-r0)/n)) - ln 4)``."""
    old = ctx.prec
    ctx.prec = bits
    try:
        sig = arb_of(2 * (1 - r0_hat) / n)
        den = d * (1 + sig.sqrt()).log() - arb(4).log()
        if not den > 0:
            raise ArithmeticError("denominator of the m bound is not positive")
        val = (arb_of(P).log() - arb_of(alpha).log()) / den
        return arb_to_fraction_bounds(val)[1]
    finally:
        ctx.prec = old


def corollary_premises(n: int, d: int, r0_hat: Fraction) -> list[ConditionReport]:
    _, pi_hi = pi_enclosure()
    pi_bound = pi_hi * pi_hi * n / (4 * d * d)
    sigma = 2 * (1 - r0_hat) / n
    A, B = sqrt_power(sigma, d)
    return [
        scalar_condition("d_ge_3sqrt_n", "d >= 3 sqrt(n)", d * d >= 9 * n, d=d),
        scalar_condition("r0_le_pi_bound", "r0_hat <= pi^2 n/(4 d^2) <= 1/2", r0_hat <= pi_bound <= Fraction(1, 2)),
        scalar_condition("growth_ge_8", "(1 + sqrt(2(1-r0)/n))^d >= 8", _surd_ge(A, B, sigma, 8)),
    ]


def _surd_ge(A, B, sigma, c) -> bool:
    """``A + B sqrt(sigma) >= c`` for ``B, sigma >= 0``."""
    A, B, sigma = to_fraction(A), to_fraction(B), to_fraction(sigma)
    if A >= c:
        return True
    return B * B * sigma >= (c - A) ** 2


def choose_params(n: int, P, precision_bits: int = 128) -> MkParams:
    """``d = ceil(3 sqrt n)``, ``alpha = 1/(2 d^2)``, ``m`` the least even integer above the bound."""
    if n < 2:
        raise ValueError("need n >= 2")
    P = Fraction(P)
    if P < 2:
        raise ValueError("need P >= 2")
    d = ceil_sqrt_scaled(3, n)
    alpha = Fraction(1, 2 * d * d)
    r0 = smallest_root_scaled(d, n, precision_bits)
    bad = [r for r in corollary_premises(n, d, r0.upper) if not r.verdict]
    if bad:
        raise ArithmeticError(f"premise failed: {bad[0].statement}")
    bound = _m_bound(n, P, d, alpha, r0.upper)
    m = int(bound) + 1
    m += m % 2
    return MkParams(n, P, d, alpha, m, r0.r0_enclosure, bound)


def oracle_minimal_m(n: int, P, d: int, alpha, precision_bits: int = 128, shift_root: bool = True) -> int:
    """Least even ``m`` with ``s(0) > P``, from exact values at ``0`` (no expansion)."""
    P, alpha = Fraction(P), Fraction(alpha)
    r0_hat = smallest_root_scaled(d, n, precision_bits).upper
    T = shifted_chebyshev(d, n, r0_hat)[0] if shift_root else chebyshev_T(d)
    t0 = T(stilde_argument(n, r0_hat)(0))
    if abs(t0) <= 1:
        raise ArithmeticError("no even power exceeds P")
    m = 2
    while alpha * t0**m <= P:
        m += 2
    return m


# ------------------------------------------------------------ conditions


def verify_mk_conditions(n: int, P, stilde1: UniPoly) -> list[ConditionReport]:
    P = Fraction(P)
    half = UniPoly.const(Fraction(1, 2))
    v0 = stilde1(0)
    return [
        scalar_condition("s1_at_0_gt_P", "s1(0) > P", v0 > P, value=v0),
        nonneg_condition("s1_le_linear_on_12", "s1 <= (x-1)/2 on [1, 2]", [("(x-1)/2-s1", (X - 1) / 2 - stilde1, (1, 2))]),
        nonneg_condition("s1_le_half_tail", f"s1 <= 1/2 on [2, {n}]", [("1/2-s1", half - stilde1, (2, n))]),
    ]


def verify_stilde_properties(params: MkParams, stilde1: UniPoly, base: UniPoly | None = None) -> list[ConditionReport]:
    """Upper envelope on ``[1, n]`` and the growth lower bound at 0.

    With ``base`` (``s = alpha * base^m``), ``s <= alpha`` is decided as ``|base| <= 1``:
    equivalent for even ``m`` and far cheaper than isolating the near-tangent
    factors of ``alpha - s``.
    """
    n, d, alpha, m = params.n, params.d, params.alpha, params.m
    if base is not None and stilde1 != alpha * base**m:
        raise ValueError("s is not alpha * base^m")
    if base is None:
        cap = [("alpha-s", alpha - stilde1, (1, n))]
    else:
        cap = [("1-base", 1 - base, (1, n)), ("1+base", 1 + base, (1, n))]
    r0_hat = params.r0_hat
    sigma = 2 * (1 - r0_hat) / n
    A, B = sqrt_power(sigma, d * m)
    # s(0) >= alpha (1/4)^m (1 + sqrt sigma)^(dm)  <=>  s(0) 4^m / alpha >= A + B sqrt(sigma)
    lhs = stilde1(0) * 4**m / alpha
    return [
        nonneg_condition(
            "envelope_on_1n",
            f"s <= min(alpha d^2 (x-1)/n, alpha) on [1, {n}]",
            [("linear-s", alpha * d * d * (X - 1) / n - stilde1, (1, n)), *cap],
        ),
        scalar_condition("growth_at_0", "s(0) >= alpha ((1/4)(1 + sqrt(2(1-r0)/n))^d)^m", ge_surd(lhs, A, B, sigma)),
    ]


# -------------------------------------------------------------- assembly


@dataclass
class RootFactorization:
    """``f = quotient * prod (x - r_i) + remainder`` with rational ``r_i``."""

    roots: list[RootCell]
    centers: list[Fraction]
    quotient: UniPoly
    remainder: UniPoly
    residual_bound: Fraction

    def to_json(self) -> dict:
        return {
            "roots": [c.to_json() for c in self.roots],
            "centers": [rational_str(c) for c in self.centers],
            "remainder": [rational_str(c) for c in self.remainder.coeffs],
            "residual_bound": rational_str(self.residual_bound),
        }


def factor_out_roots(f: UniPoly, cells: list[RootCell], interval, precision_bits: int = 128) -> RootFactorization:
    """Divide ``f`` by ``prod (x - c_i)``; exact roots are divided out exactly, others by refined centers."""
    width = Fraction(1, 2**precision_bits)
    centers, refined = [], []
    for cell in cells:
        c = refine_root(f, cell, width)
        refined.append(c)
        centers.append(c.lo if c.exact else (c.lo + c.hi) / 2)
    divisor = UniPoly.from_roots(centers)
    quo, rem = divmod(f, divisor)
    return RootFactorization(refined, centers, quo, rem, residual_sup_bound(rem, interval) if not rem.is_zero() else Fraction(0))


@dataclass
class MkCertificate:
    params: MkParams
    stilde1: UniPoly
    stilde0: UniPoly
    condition_reports: list[ConditionReport]
    property_reports: list[ConditionReport]
    root_pairs: list[tuple[Fraction, Fraction]]
    factorization: RootFactorization | None
    evidence: SosEvidence | None
    evidence_report: EvidenceReport | None
    m_oracle: int
    root_count: int
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def positive_part(self) -> UniPoly | None:
        return self.factorization.quotient if self.factorization else None

    @property
    def total_degree(self) -> int:
        """Certificate degree: the larger of ``s0``'s evidence and ``s1`` times the linear constraint."""
        s1_side = self.stilde1.degree + 2
        return max(s1_side, self.evidence_report.degree if self.evidence_report else 0)

    @property
    def passed(self) -> bool:
        return all_pass(self.condition_reports)


def assemble_mk_certificate(n: int, P, params: MkParams | None = None, precision_bits: int = 128) -> MkCertificate:
    timings: dict[str, float] = {}
    P = Fraction(P)
    t0 = time.perf_counter()
    params = choose_params(n, P, precision_bits) if params is None else params
    s1, info = build_stilde(n, P, params.d, params.alpha, params.m, precision_bits)
    m_oracle = oracle_minimal_m(n, P, params.d, params.alpha, precision_bits)
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    reports = corollary_premises(n, params.d, params.r0_hat)
    reports.append(scalar_condition("s1_at_1_zero", "s1(1) = 0", s1(1) == 0))
    reports += verify_mk_conditions(n, P, s1)
    props = verify_stilde_properties(params, s1, info["base"])
    timings["conditions"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    s0 = (X - 1) - s1 * (X - 1 / P)
    reports.append(scalar_condition("s0_at_0_pos", "s0(0) > 0", s0(0) > 0, value=s0(0)))
    reports.append(
        nonneg_condition("s0_pos_on_1n", f"s0 > 0 on (1, {n}]", [("s0", s0, (1, n))], strict=True, open_lo=True)
    )
    count = sturm_count_roots(s0, (0, 1)).root_count
    even = count % 2 == 0
    reports.append(scalar_condition("s0_even_roots_01", "s0 has an even number of roots in (0, 1]", even, count=count))
    timings["positivity"] = time.perf_counter() - t0
    if not even:
        raise ArithmeticError(f"odd root count {count} of s0 in (0, 1]: precision failure")

    t0 = time.perf_counter()
    cells = [c for c in isolate_real_roots(s0, (0, 1)) if not (c.exact and c.lo == 0)]
    fac = factor_out_roots(s0, cells, (0, n), precision_bits)
    centers = sorted(fac.centers)
    pairs = [(centers[i], centers[i + 1]) for i in range(0, len(centers), 2)]
    p = fac.quotient
    reports.append(nonneg_condition("positive_part", f"p > 0 on [0, {n}]", [("p", p, (0, n))], strict=True))
    tol = max(abs(s0(0)), Fraction(1)) / 2**64
    reports.append(
        scalar_condition("root_residual", "|remainder| <= 2^-64 max(1, s0(0)) on [0, n]", fac.residual_bound <= tol, bound=fac.residual_bound)
    )
    base = assemble_sqf_certificate(n, 1)
    factors = [lift_nonneg_to_hypercube(p, n, strict=True)]
    factors += [certificate_for_shifted_roots(n, 1, a, b, base) for a, b in pairs]
    ev = product_of(*factors)
    rep = check_evidence(ev, n)
    reports.append(
        ConditionReport(
            "evidence", "evidence tree for s0 checks", rep.valid, "closure rules", detail={"degree": rep.degree, "errors": rep.errors}
        )
    )
    timings["evidence"] = time.perf_counter() - t0
    cert = MkCertificate(params, s1, s0, reports, props, pairs, fac, ev, rep, m_oracle, count, timings)
    reports.append(
        scalar_condition("degree", "total degree <= d m + 4", cert.total_degree <= params.d * params.m + 4, degree=cert.total_degree)
    )
    return cert
