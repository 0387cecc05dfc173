from fractions import Fraction

import mpmath
import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercube_sos.poly_core import (
    X,
    UniPoly,
    certify_nonneg,
    check_sign_certificate,
    chebyshev_T,
    chebyshev_U,
    compose,
    derivative,
    interval_bound,
    isolate_real_roots,
    linear_map,
    prove_nonneg,
    rational_str,
    refine_root,
    sturm_count_roots,
    to_fraction,
)

small_coeffs = st.lists(st.integers(-6, 6), min_size=1, max_size=21)
rationals = st.fractions(min_value=-8, max_value=8, max_denominator=50)


def test_arithmetic_examples():
    assert (X + 1) * (X - 1) == X**2 - 1
    p = 3 * X**2 - X + Fraction(1, 2)
    assert p + UniPoly() == p
    assert ((X - 2) ** 2 * (X - 2)).coeffs == (-8, 12, -6, 1)


def test_coefficients_stay_reduced():
    p = UniPoly([Fraction(2, 4), Fraction(-6, 9)])
    assert all(c.denominator > 0 for c in p.coeffs)
    assert p.coeffs == (Fraction(1, 2), Fraction(-2, 3))
    assert UniPoly().coeffs == ()
    assert UniPoly([1, 2, 0, 0]).degree == 1


def test_compose_examples():
    assert compose(X**2, X - 1) == X**2 - 2 * X + 1
    T2 = chebyshev_T(2)
    assert compose(T2, X) == 2 * X**2 - 1
    assert compose(T2, 2 * X / 4 - 1)(4) == 1


def test_chebyshev_examples():
    assert chebyshev_T(2).coeffs == (-1, 0, 2)
    assert chebyshev_T(3).coeffs == (0, -3, 0, 4)
    assert chebyshev_T(0) == 1
    assert chebyshev_U(1).coeffs == (0, 2)
    assert chebyshev_U(2).coeffs == (-1, 0, 4)
    assert derivative(chebyshev_T(5)) == 5 * chebyshev_U(4)


def test_derivative_examples():
    assert derivative((X - 2) ** 2) == 2 * X - 4
    assert derivative(UniPoly.const(7)).is_zero()
    assert derivative(chebyshev_T(4)) == 4 * chebyshev_U(3)


@pytest.mark.parametrize("d", range(0, 65))
def test_chebyshev_bounded_on_grid(d):
    T = chebyshev_T(d)
    assert T(1) == 1
    assert T(-1) == (-1) ** d
    assert all(abs(T(Fraction(j, 64))) <= 1 for j in range(-64, 65))
    if d >= 1:
        assert derivative(T) == d * chebyshev_U(d - 1)


def test_chebyshev_matches_sympy():
    x = sympy.Symbol("x")
    for d in (7, 20, 33):
        ref = sympy.Poly(sympy.chebyshevt(d, x), x).all_coeffs()[::-1]
        assert chebyshev_T(d).coeffs == tuple(Fraction(int(c)) for c in ref)


def test_linear_map_endpoints():
    L = linear_map(2, 7, -1, 1)
    assert L(2) == -1 and L(7) == 1


def test_sturm_count_examples():
    assert sturm_count_roots(X**2 - 2, (0, 2)).root_count == 1
    c = sturm_count_roots((X - 1) ** 2, (0, 2))
    assert c.root_count == 1
    assert [m for _, m in c.multiplicities] == [2]
    assert sturm_count_roots(chebyshev_T(3), (-1, 1)).root_count == 3


def test_sturm_endpoint_convention():
    p = (X - 1) * (X - 2)
    left = sturm_count_roots(p, (0, 1))
    right = sturm_count_roots(p, (1, 2))
    assert left.root_count == 1 and not left.root_at_lo
    assert right.root_count == 1 and right.root_at_lo


def test_sturm_and_descartes_counts_agree_above_budget():
    p = chebyshev_T(9) * (X - Fraction(1, 3))
    chain = sturm_count_roots(p, (-1, 1))
    cells = sturm_count_roots(p, (-1, 1), sturm_budget=0)
    assert chain.method == "sturm" and cells.method == "descartes"
    assert chain.root_count == cells.root_count == 10


def test_prove_nonneg_examples():
    assert prove_nonneg((X - 1) ** 2, (0, 3)).verdict == "nonnegative"
    bad = prove_nonneg(X - 2, (0, 3))
    assert not bad.holds and bad.witness_point == 0
    q2 = (X - 1) * (X - 2)
    assert prove_nonneg(-q2, (1, 2)).holds


def test_strict_and_open_endpoints():
    p = X * (X - 1)
    assert prove_nonneg(p, (1, 2), strict=True).verdict == "zero"
    assert prove_nonneg(p, (1, 2), strict=True, open_lo=True).verdict == "positive"
    assert prove_nonneg(-p, (0, 1), strict=True, open_lo=True, open_hi=True).holds


def test_zero_polynomial_handling():
    with pytest.raises(ValueError):
        prove_nonneg(UniPoly(), (0, 1))
    assert certify_nonneg(UniPoly(), (0, 1)).holds
    assert not certify_nonneg(UniPoly(), (0, 1), strict=True).holds


def test_interval_bound_examples():
    b = interval_bound(X**2, (-1, 1))
    assert b.lo <= 0 and b.hi >= 1
    five = interval_bound(UniPoly.const(5), (0, 1))
    assert five.lo <= 5 <= five.hi
    T = chebyshev_T(10)
    e = interval_bound(T, (-1, 1))
    assert e.lo <= -1 and e.hi >= 1
    dense = [T(Fraction(j, 500)) for j in range(-500, 501)]
    assert min(dense) == -1 and max(dense) == 1


def test_rational_strings_round_trip_huge_values():
    q = Fraction(7**9000, 3**8000 + 1)
    assert to_fraction(rational_str(q)) == q
    assert rational_str(Fraction(-3, 4)) == "-3/4"


def _distinct_real_roots_by_bisection(p: UniPoly, B: Fraction) -> int:
    """Independent count: mpmath roots, each confirmed by an exact sign change after refinement."""
    sf = p.squarefree_part()
    if sf.degree <= 0:
        return 0
    mpmath.mp.prec = 200
    approx = mpmath.polyroots([mpmath.mpf(c.numerator) / c.denominator for c in reversed(sf.coeffs)], maxsteps=400, extraprec=400)
    count = 0
    w = Fraction(1, 2**40)
    for r in approx:
        if abs(mpmath.im(r)) > mpmath.mpf(2) ** -60:
            continue
        c = Fraction(mpmath.nstr(mpmath.re(r), 60))
        lo, hi = c - w, c + w
        if sf(lo) == 0 or sf(hi) == 0 or sf.sign_at(lo) != sf.sign_at(hi):
            count += 1
    return count


@settings(max_examples=60)
@given(small_coeffs)
def test_sturm_matches_bisection_count(coeffs):
    p = UniPoly(coeffs)
    if p.degree <= 0:
        return
    B = 1 + max(abs(c) for c in p.coeffs[:-1]) / abs(p.leading_coefficient) if p.degree else 1
    cert = sturm_count_roots(p, (-B, B))
    total = cert.root_count + (1 if cert.root_at_lo else 0)
    x = sympy.Symbol("x")
    expected = len(sympy.Poly(list(reversed([sympy.Rational(c.numerator, c.denominator) for c in p.coeffs])), x).real_roots(multiple=False))
    assert total == expected
    assert total == _distinct_real_roots_by_bisection(p, B)


@settings(max_examples=60)
@given(small_coeffs, rationals, rationals)
def test_squares_are_nonnegative(coeffs, a, b):
    p = UniPoly(coeffs)
    lo, hi = min(a, b), max(a, b)
    if p.is_zero():
        return
    cert = prove_nonneg(p * p, (lo, hi))
    assert cert.holds
    assert check_sign_certificate(p * p, cert)


@settings(max_examples=40)
@given(small_coeffs, rationals, rationals, st.lists(st.fractions(0, 1, max_denominator=1000), min_size=100, max_size=100))
def test_interval_bound_contains_values(coeffs, a, b, ts):
    p = UniPoly(coeffs)
    lo, hi = min(a, b), max(a, b)
    enc = interval_bound(p, (lo, hi))
    for t in ts:
        v = p(lo + (hi - lo) * t)
        assert enc.lo <= v <= enc.hi


@settings(max_examples=60)
@given(st.lists(st.tuples(st.lists(st.integers(-4, 4), min_size=2, max_size=3), st.integers(1, 3)), min_size=1, max_size=3), rationals, rationals)
def test_nonneg_verdict_matches_dense_sampling(factors, a, b):
    p = UniPoly([1])
    for cs, m in factors:
        f = UniPoly(cs)
        if f.is_zero():
            return
        p = p * f**m
    lo, hi = min(a, b), max(a, b)
    if p.degree <= 0 or lo == hi:
        return
    cert = prove_nonneg(p, (lo, hi))
    assert check_sign_certificate(p, cert)
    if cert.holds:
        assert all(p(lo + (hi - lo) * Fraction(j, 200)) >= 0 for j in range(201))
    else:
        assert p(cert.witness_point) < 0


def test_isolated_roots_refine_to_sympy_values():
    p = chebyshev_T(7) * (X - Fraction(1, 3))
    cells = isolate_real_roots(p, (-1, 1))
    assert len(cells) == 8
    for cell in cells:
        c = refine_root(p, cell, Fraction(1, 2**60))
        mid = (c.lo + c.hi) / 2
        assert abs(p(mid)) < Fraction(1, 2**40)
