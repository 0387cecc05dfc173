"""Certificates for the symmetric quadratic ``q_k(|x|) = (|x| - k + 1)(|x| - k)``.

The certificate is ``q_k = s + (q_k - s)`` with ``s = s1 * s2``:

* ``s1 = q_k * r`` is built from a falling-factorial product, so its SoS form
  is structural; the ratio ``r`` is >= 1 between the two roots and small
  elsewhere.
* ``s2 = Q(H(x))^E`` is an even power.  ``H`` is a squared Chebyshev
  polynomial that decreases on ``[0, 2k-1]`` and stays in ``[0, 1]``
  beyond it; ``Q(h) = 1 - (h-a)(h-b)/C^2`` is >= 1 exactly on ``[a, b]``, the
  image of ``[k-1, k]``.
* ``q_k - s`` is certified nonnegative on ``[0, n]`` and lifted.

Two regimes share the code.  ``theory`` uses the proof's exponents, under
which ``s2`` has degree around ``10^13`` and is never expanded; its
properties are derived from exact facts about ``H`` and ``Q``.  ``search``
picks small exponents, expands everything and certifies ``q_k - s >= 0``
directly.
"""

from __future__ import annotations

import heapq
import math
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from flint import arb, ctx

from .poly_core import (
    X,
    SignCertificate,
    UniPoly,
    arb_of,
    arb_to_fraction_bounds,
    certify_nonneg,
    chebyshev_T,
    linear_map,
    prove_nonneg,
    rational_str,
)
from .reporting import ConditionReport, all_pass, nonneg_condition, scalar_condition
from .sos_univariate import (
    EvidenceReport,
    SosEvidence,
    check_evidence,
    even_power,
    falling_factorial,
    lift_nonneg_to_hypercube,
    nonneg_scalar,
    product_of,
    square,
    sum_of,
)

TIGHT_MARGIN = Fraction(10000001, 10000000)


def q_poly(k: int) -> UniPoly:
    return (X - (k - 1)) * (X - k)


def _ceil(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def ceil_sqrt_ratio(n: int, k: int) -> int:
    """Smallest integer ``t >= 1`` with ``t >= sqrt(n/k)``."""
    t = max(1, math.isqrt(n // k))
    while t * t * k < n:
        t += 1
    while t > 1 and (t - 1) ** 2 * k >= n:
        t -= 1
    return t


def ceil_log2_power(n: int, k: int) -> int:
    """``ceil(k log2 n)`` computed exactly as the least ``t`` with ``2^t >= n^k``."""
    target = n**k
    t = max(0, target.bit_length() - 1)
    while (1 << t) < target:
        t += 1
    return t


def exp_enclosure(t, bits: int = 128) -> tuple[Fraction, Fraction]:
    """Rational enclosure of ``e^t``; ``t`` is a rational or a callable producing an arb."""
    old = ctx.prec
    ctx.prec = bits
    try:
        v = t() if callable(t) else arb_of(t)
        return arb_to_fraction_bounds(v.exp())
    finally:
        ctx.prec = old


def theory_constant(bits: int = 128) -> Fraction:
    """Rational upper bound on ``e^(8 sqrt 3)``."""
    return exp_enclosure(lambda: 8 * arb(3).sqrt(), bits)[1]


# ---------------------------------------------------------------- params


@dataclass(frozen=True)
class SqfParams:
    n: int
    k: int
    e_g: int
    d_H: int
    e_p: int
    m_s2: int
    mode: str = "search"
    c_mode: str = "theory"

    def __post_init__(self):
        if self.n < 1 or not 1 <= self.k <= (self.n + 1) // 2:
            raise ValueError(f"need 1 <= k <= ceil(n/2), got n={self.n}, k={self.k}")
        if self.e_g < 0 or self.e_g % 2:
            raise ValueError("e_g must be a nonnegative even integer")
        if self.d_H < 1 or self.e_p < 1 or self.m_s2 < 1:
            raise ValueError("d_H, e_p, m_s2 must be >= 1")
        if (self.e_p * self.m_s2) % 2:
            raise ValueError("the total exponent of s2 must be even")
        if self.mode not in ("theory", "search"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.c_mode not in ("theory", "h0", "tight"):
            raise ValueError(f"unknown c_mode {self.c_mode!r}")

    @classmethod
    def theory(cls, n: int, k: int) -> "SqfParams":
        C = theory_constant()
        m = 40 * ceil_log2_power(n, k)
        return cls(n, k, 16 * k, ceil_sqrt_ratio(n, k), 4 * _ceil(C * C), m + m % 2, "theory", "theory")

    @property
    def s1_degree(self) -> int:
        if self.k == 1:
            return 2
        return 2 * self.e_g + 2 * self.k + (0 if self.k % 2 else 2)

    @property
    def s2_degree(self) -> int:
        return 0 if self.k == 1 else 4 * self.d_H * self.e_p * self.m_s2

    @property
    def total_degree(self) -> int:
        return self.s1_degree + self.s2_degree

    def to_json(self) -> dict:
        return asdict(self)


# ------------------------------------------------------------------ s1


def build_g(k: int, e_g: int) -> UniPoly:
    """``x^e (x-2k+1)^e prod_{i in 0..2k-1, i != k-1, k} (x - i)``."""
    if k < 2:
        raise ValueError("g is defined for k >= 2")
    core = UniPoly.from_roots(i for i in range(2 * k) if i not in (k - 1, k))
    return (X * (X - (2 * k - 1))) ** e_g * core


def build_s1(n: int, k: int, e_g: int | None = None) -> tuple[UniPoly, str]:
    """``s1`` and its construction tag (``k=1``, ``odd`` or ``even``)."""
    if not 1 <= k <= (n + 1) // 2:
        raise ValueError(f"need 1 <= k <= ceil(n/2), got n={n}, k={k}")
    if k == 1:
        return X * (X - 1), "k=1"
    e_g = 16 * k if e_g is None else e_g
    g = build_g(k, e_g)
    g0 = g(k - 1)
    if k % 2:
        return g * q_poly(k) / g0, "odd"
    return -(g * (X + 1) * (X - 2 * k) * q_poly(k)) / (g0 * k * (k + 1)), "even"


def s1_evidence(k: int, e_g: int) -> SosEvidence:
    """Scalar times a square times a falling-factorial leaf; the scalar sign is checked at build time."""
    if k == 1:
        return falling_factorial(1, "A")
    half = (X * (X - (2 * k - 1))) ** (e_g // 2)
    g0 = build_g(k, e_g)(k - 1)
    if k % 2:
        scale, ff = 1 / g0, falling_factorial(k, "A")
    else:
        scale, ff = -1 / (g0 * k * (k + 1)), falling_factorial(k, "B")
    if scale <= 0:
        raise ArithmeticError("s1 scale is not positive")
    return product_of(nonneg_scalar(scale), square(half), ff)


def s1_ratio(s1: UniPoly, k: int) -> UniPoly:
    """``r = s1 / q_k`` by exact division; refuses a nonzero remainder."""
    quo, rem = divmod(s1, q_poly(k))
    if not rem.is_zero():
        raise ValueError("s1 is not divisible by q_k")
    return quo


def verify_s1_conditions(n: int, k: int, s1: UniPoly) -> list[ConditionReport]:
    """The ratio ``r = s1/q_k`` on the four ranges, as polynomial inequalities in ``r``."""
    r = s1_ratio(s1, k)
    bound = UniPoly.const(Fraction(n) ** (40 * k))
    one = UniPoly.const(1)
    reports = [
        nonneg_condition("s1_ratio_between_roots", f"r >= 1 on [{k - 1}, {k}]", [("r-1", r - one, (k - 1, k))]),
    ]
    left = [("1-r", one - r, (0, k - 1)), ("1+r", one + r, (0, k - 1))]
    right = [("1-r", one - r, (k, 2 * k - 1)), ("1+r", one + r, (k, 2 * k - 1))]
    reports.append(nonneg_condition("s1_ratio_left", f"|r| <= 1 on [0, {k - 1}]", left))
    reports.append(nonneg_condition("s1_ratio_right", f"|r| <= 1 on [{k}, {2 * k - 1}]", right))
    if 2 * k - 1 < n:
        tail = [("B-r", bound - r, (2 * k - 1, n)), ("B+r", bound + r, (2 * k - 1, n))]
        reports.append(nonneg_condition("s1_ratio_tail", f"|r| <= n^(40k) on [{2 * k - 1}, {n}]", tail))
    else:
        reports.append(scalar_condition("s1_ratio_tail", "tail interval is a point", abs(r(n)) <= bound.coeff(0)))
    return reports


def g_ratio_lemma_check(k: int, m: int, points: list[Fraction]) -> ConditionReport:
    """At sample points of ``(k-2, k-1)``: the factor ratios against exponential bounds.

    ``|a(x-m)/a(x)| <= e^(16 m^2/k)`` and ``b(x-m)/b(x) <= e^(-m^2/k^2)``, each
    compared against the lower end of a rational enclosure (a sound test).
    """
    if not 1 <= m <= k - 2:
        raise ValueError("need 1 <= m <= k-2")
    a = UniPoly.from_roots(i for i in range(2 * k) if i not in (k - 1, k))
    b = X * (2 * k - 1 - X)
    up_a = exp_enclosure(Fraction(16 * m * m, k))[0]
    up_b = exp_enclosure(Fraction(-m * m, k * k))[0]
    bad = None
    for x in points:
        if not k - 2 < x < k - 1:
            raise ValueError(f"sample point {x} outside (k-2, k-1)")
        ra = abs(a(x - m) / a(x))
        rb = b(x - m) / b(x)
        if ra > up_a or rb > up_b:
            bad = x
            break
    witness = None if bad is None else {"point": rational_str(bad)}
    return ConditionReport(
        f"g_ratio_factors_m{m}",
        f"factor ratio bounds at {len(points)} points of ({k - 2}, {k - 1})",
        bad is None,
        "exact rational evaluation vs exponential enclosure",
        witness=witness,
    )


def g_ratio_certificate(k: int, m: int, e_g: int | None = None) -> ConditionReport:
    """``|g(x-m)| <= |g(x)|`` on ``[k-2, k-1]`` via ``g^2 - g(x-m)^2 >= 0``."""
    g = build_g(k, 16 * k if e_g is None else e_g)
    shifted = g.compose(X - m)
    return nonneg_condition(
        f"g_ratio_m{m}", f"|g(x-{m})| <= |g(x)| on [{k - 2}, {k - 1}]", [("g^2-g(x-m)^2", g * g - shifted * shifted, (k - 2, k - 1))]
    )


# -------------------------------------------------------------------- H


def build_H(n: int, k: int, d_H: int) -> UniPoly:
    """``T_d(2x/n - 1 - 2(2k-1)/n)^2``; equals 1 at ``x = 2k-1``."""
    if d_H < 1:
        raise ValueError("d_H must be >= 1")
    arg = linear_map(0, n, -1, 1) - Fraction(2 * (2 * k - 1), n)
    T = chebyshev_T(d_H).compose(arg)
    return T * T


def verify_H_properties(n: int, k: int, H: UniPoly, C: Fraction | None = None) -> list[ConditionReport]:
    C = theory_constant() if C is None else C
    one = UniPoly.const(1)
    reports = [scalar_condition("H_at_2k-1", f"H({2 * k - 1}) = 1", H(2 * k - 1) == 1, value=H(2 * k - 1))]
    if 2 * k - 1 < n:
        reports.append(nonneg_condition("H_tail_le_1", f"H <= 1 on [{2 * k - 1}, {n}]", [("1-H", one - H, (2 * k - 1, n))]))
    else:
        reports.append(scalar_condition("H_tail_le_1", "H(n) <= 1", H(n) <= 1))
    reports.append(
        nonneg_condition("H_decreasing", f"H' < 0 on [0, {2 * k - 1}]", [("-H'", -H.derivative(), (0, 2 * k - 1))], strict=True)
    )
    reports.append(scalar_condition("H_at_0_le_C", "H(0) <= C", H(0) <= C, value=H(0), C=C))
    reports.append(scalar_condition("H_at_k_ge_3/2", f"H({k}) >= 3/2", H(k) >= Fraction(3, 2), value=H(k)))
    return reports


# --------------------------------------------------------- p_{a,b,C}, s2


def p_abc_base(a: Fraction, b: Fraction, C2: Fraction) -> UniPoly:
    """``1 - (h-a)(h-b)/C^2`` with ``C^2`` given directly."""
    return 1 - (X - a) * (X - b) / C2


def check_p_abc_premises(a, b, C2) -> None:
    if not (Fraction(3, 2) <= a < b and b * b < C2):
        raise ValueError(f"need 3/2 <= a < b < C; got a={a}, b={b}, C^2={C2}")


def build_p_abc(a, b, C, e_p: int) -> UniPoly:
    a, b, C = Fraction(a), Fraction(b), Fraction(C)
    check_p_abc_premises(a, b, C * C)
    if e_p < 1:
        raise ValueError("e_p must be >= 1")
    return p_abc_base(a, b, C * C) ** e_p


def verify_p_abc_properties(a, b, C, e_p: int) -> list[ConditionReport]:
    """The three interval properties checked on the expanded polynomial."""
    a, b, C = Fraction(a), Fraction(b), Fraction(C)
    p = build_p_abc(a, b, C, e_p)
    one, half = UniPoly.const(1), UniPoly.const(Fraction(1, 2))
    return [
        nonneg_condition("p_ge_1_on_ab", "p >= 1 on [a, b]", [("p-1", p - one, (a, b))]),
        nonneg_condition("p_le_half_on_01", "|p| <= 1/2 on [0, 1]", [("1/2-p", half - p, (0, 1)), ("1/2+p", half + p, (0, 1))]),
        nonneg_condition(
            "p_le_1_outside",
            "|p| <= 1 on [0, a] and [b, C]",
            [("1-p", one - p, (0, a)), ("1+p", one + p, (0, a)), ("1-p", one - p, (b, C)), ("1+p", one + p, (b, C))],
        ),
    ]


def _power_le(rho: Fraction, exponent: int, target_log2_den: tuple[int, int]) -> bool:
    """Decide ``rho^exponent <= n^-e`` for ``0 <= rho < 1`` given ``(n, e)``; exact when small."""
    n, e = target_log2_den
    if rho == 0:
        return True
    if exponent * max(rho.numerator.bit_length(), rho.denominator.bit_length()) < 200_000:
        return rho**exponent * Fraction(n) ** e <= 1
    old = ctx.prec
    ctx.prec = 256
    try:
        lhs = exponent * arb_of(rho).log() + e * arb(n).log()
        if lhs < 0:
            return True
        if lhs > 0:
            return False
        raise ArithmeticError("power comparison not decided at 256 bits")
    finally:
        ctx.prec = old


def verify_s2_conditions(n: int, k: int, H: UniPoly, C2: Fraction, e_p: int, m_s2: int) -> list[ConditionReport]:
    """Properties of ``s2 = Q(H)^(e_p m_s2)`` derived from exact facts about ``H`` and ``Q``.

    Requires ``H`` strictly decreasing on ``[0, 2k-1]`` (checked here) so that
    images of the three left intervals are ``[a, b]``, ``[b, H(0)]``, ``[1, a]``,
    and ``0 <= H <= 1`` on ``[2k-1, n]``.  Works for any exponents, so
    ``s2`` is never expanded.
    """
    a, b, H0 = H(k), H(k - 1), H(0)
    Q = p_abc_base(a, b, C2)
    total = e_p * m_s2
    one = UniPoly.const(1)
    mono = prove_nonneg(-H.derivative(), (0, 2 * k - 1), strict=True)
    tail_ok = 2 * k - 1 >= n or prove_nonneg(one - H, (2 * k - 1, n)).holds
    even = total % 2 == 0
    reports = []
    r = nonneg_condition("s2_ge_1_between_roots", f"s2 >= 1 on [{k - 1}, {k}]", [("Q-1 on [a,b]", Q - one, (a, b))])
    r.verdict = r.verdict and mono.holds
    r.method = "image of H plus exact check of Q"
    reports.append(r)
    r = nonneg_condition(
        "s2_le_1_near",
        f"s2 <= 1 on [0, {k - 1}] and [{k}, {2 * k - 1}]",
        [("1-Q", one - Q, (b, H0)), ("1+Q", one + Q, (b, H0)), ("1-Q", one - Q, (1, a)), ("1+Q", one + Q, (1, a))],
    )
    r.verdict = r.verdict and mono.holds and even
    r.method = "image of H plus exact check of Q"
    reports.append(r)
    # Q is monotone on [0, 1] (its vertex (a+b)/2 exceeds 1), so the max of |Q| sits at an endpoint
    rho = max(abs(Q(0)), abs(Q(1)))
    small = rho < 1 and _power_le(rho, total, (n, 40 * k))
    reports.append(
        ConditionReport(
            "s2_tail_small",
            f"s2 <= n^(-40k) on [{2 * k - 1}, {n}]",
            bool(tail_ok and even and small),
            "H in [0,1] there; max|Q| on [0,1] is rho; rho^E vs n^(-40k)",
            detail={"rho": rho, "exponent": total, "one_minus_quarter_C2": 1 - 1 / (4 * C2), "rho_le_lemma_bound": rho <= 1 - 1 / (4 * C2)},
        )
    )
    return reports


def resolve_C2(n: int, k: int, H: UniPoly, c_mode: str) -> Fraction:
    a, b, H0 = H(k), H(k - 1), H(0)
    if c_mode == "theory":
        C = theory_constant()
        return C * C
    if c_mode == "h0":
        return H0 * H0
    return max((H0 - a) * (H0 - b) / 2, b * b * TIGHT_MARGIN)


def build_s2(n: int, k: int, params: SqfParams, H: UniPoly | None = None) -> tuple[UniPoly, dict]:
    """Expanded ``s2`` together with the data that describes it."""
    H = build_H(n, k, params.d_H) if H is None else H
    C2 = resolve_C2(n, k, H, params.c_mode)
    a, b = H(k), H(k - 1)
    check_p_abc_premises(a, b, C2)
    base = p_abc_base(a, b, C2).compose(H)
    info = {"H": H, "a": a, "b": b, "C2": C2, "base": base, "exponent": params.e_p * params.m_s2}
    return base ** (params.e_p * params.m_s2), info


# -------------------------------------------------------------- assembly


@dataclass
class SqfCertificate:
    params: SqfParams
    s1: UniPoly
    s2: UniPoly | None
    s: UniPoly | None
    condition_reports: list[ConditionReport]
    final_check: SignCertificate | None
    level_check: ConditionReport | None
    evidence_s: SosEvidence | None
    evidence_q: SosEvidence | None
    evidence_report: EvidenceReport | None
    diagnostics: list[ConditionReport] = field(default_factory=list)
    timings: dict[str, float] = field(default_factory=dict)
    s2_data: dict = field(default_factory=dict)
    searched: int = 0

    @property
    def total_degree(self) -> int:
        return self.s.degree if self.s is not None else self.params.total_degree

    @property
    def certificate_degree(self) -> int:
        """Degree of the full certificate for ``q_k`` (``s`` plus the lift of ``q_k - s``)."""
        return self.evidence_report.degree if self.evidence_report else self.total_degree

    @property
    def required(self) -> list[ConditionReport]:
        if self.params.mode == "theory":
            return self.condition_reports
        out = []
        if self.final_check is not None:
            out.append(
                ConditionReport(
                    "final_check",
                    f"q_k - s >= 0 on [0, {self.params.n}]",
                    self.final_check.holds,
                    "exact root isolation",
                    [("q-s", self.final_check)],
                    None if self.final_check.holds else {"point": rational_str(self.final_check.witness_point)},
                )
            )
        if self.level_check is not None:
            out.append(self.level_check)
        if self.evidence_report is not None:
            out.append(
                ConditionReport(
                    "evidence",
                    "evidence tree for q_k checks",
                    self.evidence_report.valid,
                    "closure rules",
                    detail={"degree": self.evidence_report.degree, "errors": self.evidence_report.errors},
                )
            )
        return out

    @property
    def passed(self) -> bool:
        return bool(self.required) and all_pass(self.required)


def _level_condition(q: UniPoly, s: UniPoly, n: int) -> ConditionReport:
    bad = [j for j in range(n + 1) if q(j) - s(j) < 0]
    return ConditionReport(
        "integer_levels",
        f"q_k(j) >= s(j) for j = 0..{n}",
        not bad,
        "exact evaluation",
        witness={"point": str(bad[0])} if bad else None,
    )


def _theory_certificate(n: int, k: int, params: SqfParams) -> SqfCertificate:
    t0 = time.perf_counter()
    s1, _ = build_s1(n, k, params.e_g)
    ev1 = s1_evidence(k, params.e_g)
    chk1 = check_evidence(ev1, n)
    reports = [
        ConditionReport(
            "sos_structure",
            "s1 evidence checks and s2 is an even power",
            chk1.valid and chk1.claimed == s1 and (params.e_p * params.m_s2) % 2 == 0,
            "closure rules",
            detail={"s1_evidence_degree": chk1.degree},
        )
    ]
    timings = {"s1": time.perf_counter() - t0}
    if k == 1:
        reports += verify_s1_conditions(n, k, s1)
        return SqfCertificate(params, s1, UniPoly.const(1), s1, reports, None, None, ev1, ev1, chk1, timings=timings)
    reports += verify_s1_conditions(n, k, s1)
    t0 = time.perf_counter()
    H = build_H(n, k, params.d_H)
    C = theory_constant()
    reports += verify_H_properties(n, k, H, C)
    a, b = H(k), H(k - 1)
    premises = Fraction(3, 2) <= a < b < C
    reports.append(scalar_condition("p_abc_premises", "3/2 <= a < b < C", premises, a=a, b=b, C=C))
    if premises:
        reports += verify_s2_conditions(n, k, H, C * C, params.e_p, params.m_s2)
    s1_bound, s2_bound = 34 * k + 2, 4 * params.d_H * params.e_p * params.m_s2
    reports.append(
        scalar_condition(
            "degrees",
            "deg s1 <= 34k + 2; deg s2 = 4 d_H e_p m_s2",
            s1.degree <= s1_bound and params.s2_degree == s2_bound,
            deg_s1=s1.degree,
            deg_s2=params.s2_degree,
        )
    )
    timings["s2_conditions"] = time.perf_counter() - t0
    return SqfCertificate(
        params, s1, None, None, reports, None, None, None, None, None, timings=timings, s2_data={"H": H, "a": a, "b": b, "C2": C * C}
    )


def _search_diagnostics(n, k, s1, info, params) -> list[ConditionReport]:
    out = verify_s1_conditions(n, k, s1)
    out += verify_H_properties(n, k, info["H"])
    out += verify_s2_conditions(n, k, info["H"], info["C2"], params.e_p, params.m_s2)
    return out


def _certify_params(n: int, k: int, params: SqfParams, diagnostics: bool = True) -> SqfCertificate:
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    q = q_poly(k)
    s1, _ = build_s1(n, k, params.e_g)
    if k == 1:
        s2, info = UniPoly.const(1), {}
        ev_s = s1_evidence(1, 0)
    else:
        s2, info = build_s2(n, k, params)
        ev_s = product_of(s1_evidence(k, params.e_g), even_power(info["base"], info["exponent"]))
    s = s1 * s2
    timings["build"] = time.perf_counter() - t0
    t0 = time.perf_counter()
    gap = q - s
    final = certify_nonneg(gap, (0, n))
    timings["final_check"] = time.perf_counter() - t0
    levels = _level_condition(q, s, n)
    ev_q = ev_rep = None
    if final.holds:
        t0 = time.perf_counter()
        ev_q = ev_s if gap.is_zero() else sum_of(ev_s, lift_nonneg_to_hypercube(gap, n))
        ev_rep = check_evidence(ev_q, n)
        if ev_rep.claimed != q:
            ev_rep.valid = False
            ev_rep.errors.append("root: evidence does not add up to q_k")
        timings["evidence"] = time.perf_counter() - t0
    diag = []
    if diagnostics and k > 1:
        t0 = time.perf_counter()
        diag = _search_diagnostics(n, k, s1, info, params)
        timings["diagnostics"] = time.perf_counter() - t0
    return SqfCertificate(
        params, s1, s2, s, [], final, levels, ev_s, ev_q, ev_rep, diag, timings,
        {key: info[key] for key in ("a", "b", "C2") if key in info},
    )


# ---------------------------------------------------------------- search


def _cheb_float(d: int, y: np.ndarray) -> np.ndarray:
    out = np.empty_like(y)
    inside = np.abs(y) <= 1
    out[inside] = np.cos(d * np.arccos(y[inside]))
    yo = y[~inside]
    out[~inside] = np.sign(yo) ** d * np.cosh(d * np.arccosh(np.abs(yo)))
    return out


def _log_abs_ratio(x: np.ndarray, k: int, e_g: int) -> np.ndarray:
    """``log |r(x)|`` in floating point (``r = s1 / q_k``)."""

    def log_g(t):
        v = e_g * (np.log(np.abs(t)) + np.log(np.abs(t - 2 * k + 1))) if e_g else np.zeros_like(t)
        for i in range(2 * k):
            if i not in (k - 1, k):
                v = v + np.log(np.abs(t - i))
        return v

    base = log_g(x) - log_g(np.array([k - 1.0]))[0]
    if k % 2 == 0:
        base = base + np.log(np.abs((x + 1) * (x - 2 * k))) - math.log(k * (k + 1))
    return base


def prescreen_exponent(n: int, k: int, e_g: int, d_H: int, c_mode: str, grid: int = 100_001) -> int | None:
    """Smallest even ``E`` for which ``r * Q(H)^E <= 1`` where ``q_k > 0``, on a float grid.

    ``None`` when the shape cannot work (``H(k) < 3/2`` or ``|Q| >= 1`` where
    ``r > 1``).  Only a pre-screen: the exact check decides.
    """
    x = np.linspace(0.0, float(n), grid)
    Hf = lambda t: _cheb_float(d_H, 2 * np.asarray(t, float) / n - 1 - 2 * (2 * k - 1) / n) ** 2
    a, b, H0 = (float(v) for v in Hf(np.array([k, k - 1, 0.0])))
    if a < 1.5 or not np.isfinite(H0):
        return None
    C2 = {"h0": H0 * H0, "tight": max((H0 - a) * (H0 - b) / 2, b * b * float(TIGHT_MARGIN))}.get(c_mode)
    if C2 is None:
        raise ValueError(c_mode)
    mask = (x - k + 1) * (x - k) > 1e-9
    xs = x[mask]
    with np.errstate(divide="ignore"):
        lr = _log_abs_ratio(xs, k, e_g)
        lp = np.log(np.abs(1 - (Hf(xs) - a) * (Hf(xs) - b) / C2))
    need = lr > 0
    if not need.any():
        return 2
    if np.any(lp[need] >= 0):
        return None
    E = float(np.max(-lr[need] / lp[need]))
    return max(2, 2 * math.ceil(E / 2 + 1e-9))


@dataclass(order=True)
class _Candidate:
    degree: int
    e_g: int
    d_H: int
    c_mode: str
    E: int
    bumps: int = 0


def search_candidates(n: int, k: int, e_gs=(0, 2, 4), c_modes=("tight", "h0"), d_max: int | None = None) -> list[_Candidate]:
    d_max = 2 * ceil_sqrt_ratio(n, k) if d_max is None else d_max
    out = []
    for e_g in e_gs:
        deg1 = SqfParams(n, k, e_g, 1, 1, 2).s1_degree
        for d_H in range(1, d_max + 1):
            for c_mode in c_modes:
                E = prescreen_exponent(n, k, e_g, d_H, c_mode)
                if E is not None:
                    out.append(_Candidate(deg1 + 4 * d_H * E, e_g, d_H, c_mode, E))
    return sorted(out)


def search_sqf_certificate(
    n: int,
    k: int,
    max_exact: int = 40,
    max_bumps: int = 4,
    e_gs=(0, 2, 4),
    diagnostics: bool = True,
) -> SqfCertificate:
    """Lowest-degree passing parameter vector among the pre-screened shapes.

    Candidates are tried exactly in order of total degree; a candidate that
    fails is re-queued with its exponent raised by 2, so the first passing
    vector popped has the least degree among everything tried.
    """
    if k == 1:
        return _certify_params(n, 1, SqfParams(n, 1, 0, 1, 1, 2), diagnostics)
    heap = search_candidates(n, k, e_gs)
    heapq.heapify(heap)
    tried = 0
    best_fail: SqfCertificate | None = None
    while heap and tried < max_exact:
        c = heapq.heappop(heap)
        params = SqfParams(n, k, c.e_g, c.d_H, 1, c.E, "search", c.c_mode)
        tried += 1
        cert = _certify_params(n, k, params, diagnostics=False)
        if cert.passed:
            if diagnostics:
                cert.diagnostics = _search_diagnostics(n, k, cert.s1, {"H": build_H(n, k, c.d_H), **cert.s2_data}, params)
            cert.searched = tried
            return cert
        best_fail = best_fail or cert
        if c.bumps < max_bumps:
            heapq.heappush(heap, _Candidate(c.degree + 8 * c.d_H, c.e_g, c.d_H, c.c_mode, c.E + 2, c.bumps + 1))
    if best_fail is None:
        raise RuntimeError(f"no admissible parameter shape for n={n}, k={k}")
    best_fail.searched = tried
    return best_fail


def assemble_sqf_certificate(n: int, k: int, params: SqfParams | None = None, mode: str = "search", **search_kw) -> SqfCertificate:
    """Theory mode checks the construction's conditions; search mode certifies ``q_k - s`` end to end."""
    if params is None:
        if mode == "theory":
            params = SqfParams.theory(n, k)
        else:
            return search_sqf_certificate(n, k, **search_kw)
    if params.mode == "theory":
        return _theory_certificate(n, k, params)
    return _certify_params(n, k, params)


# ------------------------------------------------------- shifted roots


def shifted_root_coefficients(k: int, a, b) -> tuple[Fraction, Fraction, Fraction]:
    a, b = Fraction(a), Fraction(b)
    return (
        (k - a) * (k - b),
        (a - k + 1) * (b - k + 1),
        (k - a) * (b - k + 1) + (k - b) * (a - k + 1),
    )


def certificate_for_shifted_roots(n: int, k: int, a, b, base: SqfCertificate | SosEvidence) -> SosEvidence:
    """Evidence for ``(x-a)(x-b)`` with ``k-1 <= a <= b <= k`` from a certificate of ``q_k``.

    Uses ``(x-a)(x-b) = c1 (x-k+1)^2 + c2 (x-k)^2 + c3 q_k`` with ``c_i >= 0``;
    zero terms are dropped and the identity is checked exactly.
    """
    a, b = Fraction(a), Fraction(b)
    if not k - 1 <= a <= b <= k:
        raise ValueError(f"need {k - 1} <= a <= b <= {k}")
    base_ev = base.evidence_q if isinstance(base, SqfCertificate) else base
    if base_ev is None or base_ev.claimed != q_poly(k):
        raise ValueError("base evidence does not certify q_k")
    c1, c2, c3 = shifted_root_coefficients(k, a, b)
    if min(c1, c2, c3) < 0:
        raise ArithmeticError("negative coefficient in the shifted-root identity")
    terms = []
    for c, node in ((c1, square(X - (k - 1))), (c2, square(X - k)), (c3, base_ev)):
        if c:
            terms.append(node if c == 1 else product_of(nonneg_scalar(c), node))
    ev = sum_of(*terms) if len(terms) != 1 else terms[0]
    if ev.claimed != (X - a) * (X - b):
        raise ArithmeticError("shifted-root identity failed")
    return ev
