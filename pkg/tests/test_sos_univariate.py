from fractions import Fraction
import json
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypercube_sos.hypercube_oracle import levels
from hypercube_sos.poly_core import UniPoly, X
from hypercube_sos.sos_univariate import (
    IntervalSosDecomposition,
    check_evidence,
    complement,
    decompose_on_interval,
    evidence_from_json,
    evidence_to_json,
    even_power,
    falling_factorial,
    falling_factorial_poly,
    lift_nonneg_to_hypercube,
    nonneg_scalar,
    product_of,
    square,
    sum_of,
    var_sum,
)


def _random_points(I, count, seed=0):
    rng = random.Random(seed)
    return [I.lo + (I.hi - I.lo) * Fraction(rng.randrange(1 << 20), 1 << 20) for _ in range(count)]


def test_decompose_square():
    dec = decompose_on_interval((X - 1) ** 2, (0, 2))
    assert dec.parity == "even"
    assert dec.t.is_zero()
    assert dec.residual().is_zero() or dec.residual_bound <= dec.tolerance()
    assert dec.check()


def test_decompose_linear():
    dec = decompose_on_interval(X, (0, 2))
    assert dec.parity == "odd"
    assert dec.check()
    for x in (Fraction(0), Fraction(1, 3), Fraction(2)):
        assert abs(dec.reassembled()(x) - x) <= dec.residual_bound


def test_decompose_weight_only():
    dec = decompose_on_interval(1 - X**2, (-1, 1))
    assert dec.parity == "even"
    assert dec.check()
    assert float(dec.t(0)) == pytest.approx(1.0)
    assert abs(dec.s(0)) <= dec.residual_bound + Fraction(1, 10**30)


def test_decompose_rejects_negative():
    with pytest.raises(ValueError):
        decompose_on_interval(X - 1, (0, 2))


nonneg_factors = st.lists(
    st.tuples(st.fractions(min_value=-3, max_value=3, max_denominator=8), st.fractions(min_value=0, max_value=2, max_denominator=8)),
    min_size=1,
    max_size=5,
)


@settings(max_examples=40)
@given(nonneg_factors, st.integers(0, 1), st.fractions(min_value=Fraction(1, 2), max_value=4, max_denominator=4))
def test_decompose_residual_at_random_points(factors, extra_root, width):
    # squares of shifted quadratics stay nonnegative everywhere; the optional affine factor is nonnegative on [0, w]
    p = UniPoly.const(1)
    for r, q in factors:
        p = p * ((X - r) ** 2 + q)
    if extra_root:
        p = p * X
    dec = decompose_on_interval(p, (0, width))
    assert dec.check()
    d = p.degree
    half = -(-d // 2)
    assert dec.s.degree <= 2 * half
    assert dec.t.degree <= 2 * half - 2 or dec.t.is_zero()
    for x in _random_points(dec.interval, 256):
        assert abs(p(x) - dec.reassembled()(x)) <= dec.residual_bound


def test_decomposition_json_round_trip():
    p = (X - Fraction(1, 3)) ** 2 * (X + 1) + 2
    dec = decompose_on_interval(p, (0, 3))
    back = IntervalSosDecomposition.from_json(p, json.loads(json.dumps(dec.to_json())))
    assert back.reassembled() == dec.reassembled()
    assert back.check()


def test_square_evidence():
    rep = check_evidence(square(X - 1), 5)
    assert rep.valid
    assert rep.claimed == (X - 1) ** 2
    assert rep.degree == 2


def test_var_sum_complement_product():
    e = product_of(var_sum(), complement(5))
    rep = check_evidence(e, 5)
    assert rep.valid
    assert rep.claimed == X * (5 - X)
    assert levels(rep.claimed, 5) == [0, 4, 6, 6, 4, 0]


def test_falling_factorial_leaf():
    e = falling_factorial(2, "A")
    rep = check_evidence(e, 6)
    assert rep.valid and rep.degree == 4
    assert levels(rep.claimed, 6) == [0, 0, 0, 0, 24, 120, 360]


def test_falling_factorial_variant_b():
    e = falling_factorial(1, "B")
    assert e.claimed == (X + 1) * X * (X - 1) * (X - 2)
    assert check_evidence(e, 4).degree == 4


@pytest.mark.parametrize("n", range(1, 15))
def test_falling_factorial_levels_nonnegative(n):
    for k in range(1, -(-n // 2) + 1):
        for variant in ("A", "B"):
            assert min(levels(falling_factorial_poly(k, variant), n)) >= 0


def test_tampered_claim_is_rejected():
    good = sum_of(square(X), nonneg_scalar(2))
    bad = type(good)(good.kind, good.claimed + 1, good.degree, good.children)
    rep = check_evidence(bad, 4)
    assert not rep.valid
    assert any("root" in msg for msg in rep.errors)


def test_negative_scalar_is_rejected():
    assert not check_evidence(nonneg_scalar(-1), 3).valid


def test_even_power_requires_even_exponent():
    with pytest.raises(ValueError):
        even_power(X - 1, 3)
    rep = check_evidence(even_power(X - 1, 4), 3)
    assert rep.valid and rep.degree == 4


def test_lift_constant():
    e = lift_nonneg_to_hypercube(UniPoly.const(1), 4)
    assert e.kind == "Square"
    assert check_evidence(e, 4).degree == 0


def test_lift_boundary_product():
    e = lift_nonneg_to_hypercube(X * (4 - X), 4)
    rep = check_evidence(e, 4)
    assert rep.valid and rep.degree == 4
    assert levels(rep.claimed, 4) == [0, 3, 4, 3, 0]


def test_lift_general_quadratic():
    p = (X - 1) * (X - 2) + 1
    e = lift_nonneg_to_hypercube(p, 6, decompose=True)
    rep = check_evidence(e, 6)
    assert rep.valid
    assert rep.claimed == p
    assert rep.degree <= p.degree + 2
    assert min(levels(p, 6)) >= Fraction(3, 4)


def test_lift_rejects_negative_polynomial():
    with pytest.raises(ValueError):
        lift_nonneg_to_hypercube(X - 2, 4)


@settings(max_examples=30)
@given(st.lists(st.fractions(min_value=-4, max_value=4, max_denominator=6), min_size=1, max_size=4), st.integers(2, 9))
def test_lift_passes_check(roots, n):
    p = UniPoly.const(1)
    for r in roots:
        p = p * ((X - r) ** 2 + Fraction(1, 5))
    e = lift_nonneg_to_hypercube(p, n)
    rep = check_evidence(e, n)
    assert rep.valid, rep.errors
    assert rep.degree <= p.degree + 2
    assert levels(rep.claimed, n) == levels(p, n)


def test_evidence_json_round_trip():
    lifted = lift_nonneg_to_hypercube((X - Fraction(3, 2)) ** 2 + X, 5)
    tree = sum_of(product_of(var_sum(), complement(5), square(X - 2)), falling_factorial(1), lifted)
    data = json.loads(json.dumps(evidence_to_json(tree)))
    back = evidence_from_json(data)
    rep = check_evidence(back, 5)
    assert rep.valid
    assert rep.claimed == tree.claimed
    assert rep.degree == check_evidence(tree, 5).degree


def test_exact_trees_are_nonnegative_on_levels():
    tree = sum_of(product_of(var_sum(), complement(7)), falling_factorial(2), square(X - 3), nonneg_scalar(Fraction(1, 2)))
    assert min(levels(tree.claimed, 7)) >= 0
