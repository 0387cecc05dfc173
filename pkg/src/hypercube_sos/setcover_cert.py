"""Set Cover certificates for ``|x| - 2`` under ``g_i = sum_{j != i} x_j - 1 >= 0``.

Two routes.

``main``: one symmetric multiplier ``s(|x|)`` for every constraint, so
``|x| - 2 = s0 + s * sum_i g_i`` with ``sum_i g_i = (n-1)|x| - n``.  ``s`` is
the knapsack polynomial shifted right by one; ``s0`` has its two roots in
``[1, 2]`` factored out, and the quadratic through them is certified from the
``k = 2`` quadratic certificate.

``appendix``: ``|x| - 2 = f + p1 h1 + p2 h2``.  Here ``h1 = |x| - 1`` and
``h2 = |x|(|x| - 2)`` come from the constraints with explicit multipliers,
``p1, p2`` are squared Chebyshev polynomials, and ``f >= 0`` on ``[0, n]`` is
split into interval SoS pieces.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from flint import arb, ctx

from . import hypercube_oracle as oracle
from .knapsack_cert import RootFactorization, build_stilde, ceil_sqrt_scaled, factor_out_roots
from .poly_core import (
    X,
    UniPoly,
    arb_to_fraction_bounds,
    chebyshev_T,
    isolate_real_roots,
    linear_map,
    prove_nonneg,
    rational_str,
    sturm_count_roots,
    sup_norm_estimate,
)
from .reporting import ConditionReport, all_pass, nonneg_condition, scalar_condition
from .sos_univariate import (
    EvidenceReport,
    IntervalSosDecomposition,
    SosEvidence,
    check_evidence,
    decompose_on_interval,
    even_power,
    interval_lift,
    lift_nonneg_to_hypercube,
    nonneg_scalar,
    product_of,
    square,
)
from .sqf_cert import SqfCertificate, assemble_sqf_certificate, certificate_for_shifted_roots


# ---------------------------------------------------------- constraints


def constraint_exprs(n: int) -> list[oracle.Expr]:
    xs = oracle.variables(n)
    return [oracle.sum_expr(xs[j] for j in range(n) if j != i) - 1 for i in range(n)]


def sc_constraint_aggregate(n: int) -> tuple[UniPoly, list[ConditionReport]]:
    """``(n-1) x - n``, checked against the literal constraint sum."""
    if n < 3:
        raise ValueError("need n >= 3")
    g = (n - 1) * X - n
    # at a point of weight w, constraint i reads w - x_i - 1
    level_ok = all(sum(w - (1 if i < w else 0) - 1 for i in range(n)) == g(w) for w in range(n + 1))
    reports = [scalar_condition("aggregate_levels", "sum_i g_i = (n-1)|x| - n at every level", level_ok)]
    if n <= 12:
        v = oracle.enumerate_check("identity", oracle.sum_expr(constraint_exprs(n)), oracle.SymPoly(g, n), n)
        reports.append(scalar_condition("aggregate_cube", "identity on the full hypercube", v.holds))
    return g, reports


# ------------------------------------------------------------- main route


def sc_params(n: int, param_set: str = "lemma") -> tuple[int, Fraction, int]:
    """``(d, alpha, m)``: the in-line lemma set, or the alternative set stated with the zero count."""
    d = ceil_sqrt_scaled(3, n)
    if param_set == "lemma":
        t = 0
        while 4**t < 18 * n:
            t += 1
        return d, Fraction(1, 18 * n), 2 * t
    if param_set == "corollary":
        t = 0
        while 2**t < n:
            t += 1
        return d, Fraction(1, n), 2 * t
    raise ValueError(f"unknown parameter set {param_set!r}")


def build_sc_stilde(n: int, param_set: str = "lemma", precision_bits: int = 128) -> tuple[UniPoly, dict]:
    """Knapsack polynomial evaluated at ``x - 1``."""
    if n < 9:
        raise ValueError("need n >= 9")
    d, alpha, m = sc_params(n, param_set)
    s, info = build_stilde(n, 2, d, alpha, m, precision_bits)
    info.update(d=d, alpha=alpha, m=m, param_set=param_set, base=info["base"].compose(X - 1))
    return s.compose(X - 1), info


def verify_sc_properties(n: int, stilde: UniPoly) -> list[ConditionReport]:
    one = UniPoly.const(1)
    mono = stilde.derivative() * (X - 2) - stilde
    return [
        nonneg_condition("s_ge_1_on_01", "s >= 1 on [0, 1]", [("s-1", stilde - one, (0, 1))]),
        nonneg_condition(
            "ratio_negative_increasing",
            "s/(x-2) < 0 and increasing on [1, 2)",
            [("s", stilde, (1, 2)), ("s'(x-2)-s", mono, (1, 2))],
        ),
        nonneg_condition("s_le_linear_on_23", "s <= (x-2)/(2n) on [2, 3]", [("(x-2)/2n-s", (X - 2) / (2 * n) - stilde, (2, 3))]),
        nonneg_condition("s_le_tail", f"s <= 1/(2n) on [3, {n}]", [("1/2n-s", Fraction(1, 2 * n) - stilde, (3, n))]),
    ]


def _positive_on_1_2_open(stilde: UniPoly) -> ConditionReport:
    return nonneg_condition("s_pos_on_12", "s > 0 on [1, 2)", [("s", stilde, (1, 2))], strict=True, open_hi=True)


@dataclass
class ScMainCertificate:
    n: int
    params: dict
    stilde: UniPoly
    stilde0: UniPoly
    property_reports: list[ConditionReport]
    condition_reports: list[ConditionReport]
    factorization: RootFactorization | None
    root_a: Fraction | None
    base: SqfCertificate | None
    evidence: SosEvidence | None
    evidence_report: EvidenceReport | None
    multiplier_evidence: SosEvidence
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def positive_part(self) -> UniPoly | None:
        return self.factorization.quotient if self.factorization else None

    @property
    def total_degree(self) -> int:
        s0_side = self.evidence_report.degree if self.evidence_report else self.stilde0.degree
        return max(s0_side, self.multiplier_evidence.degree + 2)

    @property
    def passed(self) -> bool:
        return all_pass(self.property_reports) and all_pass(self.condition_reports)


def stilde_evidence(info: dict) -> SosEvidence:
    return product_of(nonneg_scalar(info["alpha"]), even_power(info["base"], info["m"]))


def assemble_sc_main(
    n: int,
    param_set: str = "lemma",
    precision_bits: int = 128,
    base: SqfCertificate | None = None,
) -> ScMainCertificate:
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    s, info = build_sc_stilde(n, param_set, precision_bits)
    g, agg = sc_constraint_aggregate(n)
    s0 = (X - 2) - s * g
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    props = verify_sc_properties(n, s)
    props.insert(1, _positive_on_1_2_open(s))
    props.append(scalar_condition("s_at_2_zero", "s(2) = 0", s(2) == 0))
    timings["properties"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    split = Fraction(n, n - 1)
    reports = list(agg)
    reports.append(nonneg_condition("s0_pos_01", "s0 > 0 on [0, 1)", [("s0", s0, (0, 1))], strict=True, open_hi=True))
    reports.append(nonneg_condition("s0_pos_2n", f"s0 > 0 on (2, {n}]", [("s0", s0, (2, n))], strict=True, open_lo=True))
    near = sturm_count_roots(s0, (1, split))
    one_near = near.root_count + (1 if near.root_at_lo else 0)
    whole = sturm_count_roots(s0, (1, 2))
    two_total = whole.root_count + (1 if whole.root_at_lo else 0)
    reports.append(scalar_condition("s0_at_2_zero", "s0(2) = 0", s0(2) == 0))
    reports.append(scalar_condition("s0_one_root_near_1", f"exactly one root in [1, {split}]", one_near == 1, count=one_near))
    reports.append(scalar_condition("s0_two_roots_12", "exactly two roots in [1, 2]", two_total == 2, count=two_total))
    timings["zeros"] = time.perf_counter() - t0
    params = {k: info[k] for k in ("d", "alpha", "m", "param_set", "r0_hat", "delta")}
    mult = stilde_evidence(info)
    if one_near != 1 or two_total != 2 or s0(2) != 0:
        return ScMainCertificate(n, params, s, s0, props, reports, None, None, base, None, None, mult, timings)

    t0 = time.perf_counter()
    cells = isolate_real_roots(s0, (1, 2))
    fac = factor_out_roots(s0, cells, (0, n), precision_bits)
    a = min(fac.centers)
    p = fac.quotient
    reports.append(nonneg_condition("p_pos", f"p > 0 on [0, {n}]", [("p", p, (0, n))], strict=True))
    tol = max(abs(s0(0)), Fraction(1)) / 2**64
    reports.append(
        scalar_condition("root_residual", "|remainder| <= 2^-64 max(1, s0(0)) on [0, n]", fac.residual_bound <= tol, bound=fac.residual_bound)
    )
    timings["factor"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    base = assemble_sqf_certificate(n, 2) if base is None else base
    reports.append(scalar_condition("q2_base", "k = 2 quadratic certificate passes", base.passed, degree=base.certificate_degree))
    timings["q2_base"] = time.perf_counter() - t0
    if not all_pass(reports):
        return ScMainCertificate(n, params, s, s0, props, reports, fac, a, base, None, None, mult, timings)
    t0 = time.perf_counter()
    ev = product_of(lift_nonneg_to_hypercube(p, n, strict=True), certificate_for_shifted_roots(n, 2, a, 2, base))
    rep = check_evidence(ev, n)
    mult_rep = check_evidence(mult, n)
    reports.append(
        ConditionReport(
            "evidence",
            "evidence trees for s0 and for the multiplier check",
            rep.valid and mult_rep.valid and mult_rep.claimed == s,
            "closure rules",
            detail={"degree": rep.degree, "errors": rep.errors + mult_rep.errors},
        )
    )
    timings["evidence"] = time.perf_counter() - t0
    return ScMainCertificate(n, params, s, s0, props, reports, fac, a, base, ev, rep, mult, timings)


# --------------------------------------------------------- appendix route


def appendix_degree(n: int, bits: int = 128) -> int:
    """``ceil(2 sqrt(n) log2(n))`` from a rigorous enclosure (exact when the value is an integer)."""
    r = ceil_sqrt_scaled(1, n)
    if r * r == n and n & (n - 1) == 0:
        return 2 * r * (n.bit_length() - 1)
    old = ctx.prec
    ctx.prec = bits
    try:
        v = 2 * arb(n).sqrt() * arb(n).log() / arb(2).log()
        lo, hi = arb_to_fraction_bounds(v)
    finally:
        ctx.prec = old
    c_lo, c_hi = -((-lo.numerator) // lo.denominator), -((-hi.numerator) // hi.denominator)
    if c_lo != c_hi and not (hi.denominator == 1 and c_hi == c_lo + 0):
        raise ArithmeticError("degree enclosure straddles an integer")
    return c_hi


def _shifted_chebyshev(D: int, n: int, shift: int) -> UniPoly:
    """``T_D(2(x - shift)/n - 1)``."""
    return chebyshev_T(D).compose(linear_map(0, n, -1, 1).compose(X - shift))


def build_p1_p2(n: int, D: int | None = None) -> tuple[UniPoly, UniPoly, Fraction, Fraction, int]:
    """``p1 = (x-2)^2 T(2(x-2)/n - 1)^2 / (2n^2 c1)``, ``p2 = T(2(x-3)/n - 1)^2 / (2n c2)``."""
    D = appendix_degree(n) if D is None else D
    edge = chebyshev_T(D)(Fraction(-2, n) - 1) ** 2
    c1 = edge / (2 * n * n)
    c2 = edge / n
    t1, t2 = _shifted_chebyshev(D, n, 2), _shifted_chebyshev(D, n, 3)
    p1 = (X - 2) ** 2 * t1 * t1 / (2 * n * n * c1)
    p2 = t2 * t2 / (2 * n * c2)
    return p1, p2, c1, c2, D


def verify_appendix_lemmas(n: int, p1: UniPoly, p2: UniPoly) -> list[ConditionReport]:
    w = (X - 2) ** 2
    return [
        nonneg_condition("p1_ge_4", "p1 >= 4 on [0, 1/2]", [("p1-4", p1 - 4, (0, Fraction(1, 2)))]),
        nonneg_condition(
            "p1_le_91", "p1 <= (1 - 9/10 (x-1)) (x-2)^2 on [1, 2]", [("rhs-p1", (1 - Fraction(9, 10) * (X - 1)) * w - p1, (1, 2))]
        ),
        nonneg_condition("p1_le_tail", f"p1 <= (x-2)^2/(2n^2) on [2, {n}]", [("rhs-p1", w / (2 * n * n) - p1, (2, n))]),
        nonneg_condition("p2_ge_4", "p2 >= 4 on [0, 1]", [("p2-4", p2 - 4, (0, 1))]),
        scalar_condition("p2_at_2", "p2(2) = 1/2", p2(2) == Fraction(1, 2)),
        nonneg_condition("p2_slope", "p2' <= -1 on [1, 2]", [("-1-p2'", -1 - p2.derivative(), (1, 2))]),
        nonneg_condition(
            "p2_le_45", "p2 <= -9/20 (x-2) + 1/2 on [2, 3]", [("rhs-p2", Fraction(1, 2) - Fraction(9, 20) * (X - 2) - p2, (2, 3))]
        ),
        nonneg_condition("p2_le_tail", f"p2 <= 1/(2n) on [3, {n}]", [("rhs-p2", Fraction(1, 2 * n) - p2, (3, n))]),
    ]


def build_h1_h2_evidence(n: int) -> dict:
    """Check the constraint expansions of ``h1 = |x| - 1`` and ``h2 = |x|(|x| - 2)``.

    ``h1 = (1/(n-1)) sum_i g_i + 1/(n-1)``;
    ``h2 = sum_j [x_j^2 g_j - (x_j^2 - x_j) g_j + (x_j^2 - x_j)]``.
    Returns the multiplier table (constraint index, SoS weight) and the checks.
    """
    if n < 2:
        raise ValueError("need n >= 2")
    xs = oracle.variables(n)
    gs = constraint_exprs(n) if n <= oracle.MAX_VARS else None
    reports = []
    # integer levels: at weight w, g_i = w - x_i - 1 and x_j^2 = x_j on the cube
    h1_lv = all(Fraction(sum(w - (1 if i < w else 0) - 1 for i in range(n)), n - 1) + Fraction(1, n - 1) == w - 1 for w in range(n + 1))
    h2_lv = all(sum((1 if j < w else 0) * (w - (1 if j < w else 0) - 1) for j in range(n)) == w * (w - 2) for w in range(n + 1))
    reports.append(scalar_condition("h1_levels", "h1 expansion at every level", h1_lv))
    reports.append(scalar_condition("h2_levels", "h2 expansion at every level", h2_lv))
    if n <= 12:
        inv = Fraction(1, n - 1)
        h1_expr = oracle.sum_expr(inv * g for g in gs) + inv
        h2_expr = oracle.sum_expr(x * x * g - (x * x - x) * g + (x * x - x) for x, g in zip(xs, gs))
        h1_target = oracle.hamming(n) - 1
        h2_target = oracle.hamming(n) * (oracle.hamming(n) - 2)
        nf = lambda e: oracle.reduce_mod_boolean(e, n)
        reports.append(scalar_condition("h1_normal_form", "h1 multilinear normal forms agree", nf(h1_expr) == nf(h1_target)))
        reports.append(scalar_condition("h2_normal_form", "h2 multilinear normal forms agree", nf(h2_expr) == nf(h2_target)))
        reports.append(
            scalar_condition("h1_cube", "h1 identity at every cube point", oracle.enumerate_check("identity", h1_expr, h1_target, n).holds)
        )
        reports.append(
            scalar_condition("h2_cube", "h2 identity at every cube point", oracle.enumerate_check("identity", h2_expr, h2_target, n).holds)
        )
    multipliers = {
        "h1": [{"constraint": i, "weight": rational_str(Fraction(1, n - 1))} for i in range(n)] + [{"constraint": None, "weight": rational_str(Fraction(1, n - 1))}],
        "h2": [{"constraint": j, "weight": f"x_{j}^2"} for j in range(n)],
    }
    return {"reports": reports, "multipliers": multipliers}


@dataclass
class ScAppendixCertificate:
    n: int
    D: int
    p1: UniPoly
    p2: UniPoly
    c1: Fraction
    c2: Fraction
    f: UniPoly
    lemma_reports: list[ConditionReport]
    condition_reports: list[ConditionReport]
    final_decomposition: IntervalSosDecomposition | None
    h_evidence: dict
    evidence: SosEvidence | None
    evidence_report: EvidenceReport | None
    timings: dict[str, float] = field(default_factory=dict)

    @property
    def total_degree(self) -> int:
        f_side = self.evidence_report.degree if self.evidence_report else self.f.degree + 1
        return max(f_side, self.p1.degree + 3, self.p2.degree + 3)

    @property
    def passed(self) -> bool:
        return all_pass(self.lemma_reports) and all_pass(self.condition_reports)


def multiplier_evidence(n: int, D: int, c1: Fraction, c2: Fraction) -> tuple[SosEvidence, SosEvidence]:
    """SoS forms of ``p1`` and ``p2``: a positive scalar times a square."""
    e1 = product_of(nonneg_scalar(1 / (2 * n * n * c1)), square((X - 2) * _shifted_chebyshev(D, n, 2)))
    e2 = product_of(nonneg_scalar(1 / (2 * n * c2)), square(_shifted_chebyshev(D, n, 3)))
    return e1, e2


def assemble_sc_appendix(n: int, precision_bits: int = 128, decompose: bool = True, samples: int = 256, seed: int = 0) -> ScAppendixCertificate:
    timings: dict[str, float] = {}
    t0 = time.perf_counter()
    p1, p2, c1, c2, D = build_p1_p2(n)
    h1, h2 = X - 1, X * (X - 2)
    f = (X - 2) - p1 * h1 - p2 * h2
    timings["build"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    lemmas = verify_appendix_lemmas(n, p1, p2)
    timings["lemmas"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    h = build_h1_h2_evidence(n)
    reports = list(h["reports"])
    reports.append(scalar_condition("p1_at_1", "p1(1) = 1", p1(1) == 1))
    reports.append(scalar_condition("f_at_2", "f(2) = 0", f(2) == 0))
    f_cert = prove_nonneg(f, (0, n))
    reports.append(
        ConditionReport(
            "f_nonneg",
            f"f >= 0 on [0, {n}]",
            f_cert.holds,
            "exact root isolation",
            [("f", f_cert)],
            None if f_cert.holds else {"point": rational_str(f_cert.witness_point)},
        )
    )
    e1, e2 = multiplier_evidence(n, D, c1, c2)
    r1, r2 = check_evidence(e1, n), check_evidence(e2, n)
    reports.append(scalar_condition("p_sos", "p1 and p2 are scalar multiples of squares", r1.valid and r2.valid and r1.claimed == p1 and r2.claimed == p2))
    timings["f"] = time.perf_counter() - t0

    dec = ev = rep = None
    if decompose and f_cert.holds:
        t0 = time.perf_counter()
        dec = decompose_on_interval(f, (0, n), precision_bits)
        timings["decomposition"] = time.perf_counter() - t0
        norm = dec.norm_estimate
        rng = random.Random(seed)
        rebuilt = dec.reassembled()
        worst = Fraction(0)
        for _ in range(samples):
            x = Fraction(rng.randrange(0, 2**32 + 1), 2**32) * n
            worst = max(worst, abs(f(x) - rebuilt(x)))
        reports.append(
            scalar_condition(
                "decomposition_residual",
                f"reassembled split matches f within 2^-64 max|f| at {samples} points",
                worst <= norm / 2**64 and dec.check(),
                worst=worst,
                bound=dec.residual_bound,
            )
        )
        ev = interval_lift(f, n, f_cert, dec)
        rep = check_evidence(ev, n)
        reports.append(scalar_condition("evidence", "evidence for f checks", rep.valid, errors=rep.errors))
    return ScAppendixCertificate(n, D, p1, p2, c1, c2, f, lemmas, reports, dec, h, ev, rep, timings)


def appendix_full_identity(n: int, cert: ScAppendixCertificate) -> bool:
    """``|x| - 2 = f + p1 h1 + p2 h2`` with ``h1, h2`` in their constraint expansions, pointwise on the cube."""
    xs = oracle.variables(n)
    gs = constraint_exprs(n)
    inv = Fraction(1, n - 1)
    P1, P2 = oracle.SymPoly(cert.p1, n), oracle.SymPoly(cert.p2, n)
    h1 = oracle.sum_expr(inv * g for g in gs) + inv
    h2 = oracle.sum_expr(x * x * g - (x * x - x) * g + (x * x - x) for x, g in zip(xs, gs))
    lhs = oracle.SymPoly(cert.f, n) + P1 * h1 + P2 * h2
    return oracle.enumerate_check("identity", lhs, oracle.hamming(n) - 2, n).holds


def main_full_identity(n: int, stilde: UniPoly, stilde0: UniPoly) -> bool:
    """``|x| - 2 = s0(|x|) + s(|x|) sum_i g_i`` pointwise on the cube.

    The multiplier is shared by every constraint, so it is factored out of the
    literal constraint sum (one huge-rational product per point instead of ``n``).
    """
    S = oracle.SymPoly(stilde, n)
    lhs = oracle.SymPoly(stilde0, n) + S * oracle.sum_expr(constraint_exprs(n))
    return oracle.enumerate_check("identity", lhs, oracle.hamming(n) - 2, n).holds
