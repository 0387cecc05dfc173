from fractions import Fraction
import itertools
import math

import pytest

from hypercube_sos.poly_core import X
from hypercube_sos.setcover_cert import (
    appendix_degree,
    appendix_full_identity,
    assemble_sc_appendix,
    assemble_sc_main,
    build_h1_h2_evidence,
    build_p1_p2,
    build_sc_stilde,
    main_full_identity,
    sc_constraint_aggregate,
    sc_params,
    verify_sc_properties,
)
from hypercube_sos.sos_univariate import check_evidence


@pytest.fixture(scope="module")
def main_12():
    return assemble_sc_main(12)


@pytest.fixture(scope="module")
def appendix_12():
    return assemble_sc_appendix(12)


def test_aggregate_examples():
    g, reports = sc_constraint_aggregate(5)
    assert g(2) == 3
    assert g(0) == -5
    assert all(r.verdict for r in reports)


def test_aggregate_full_cube():
    _, reports = sc_constraint_aggregate(12)
    assert {r.name: r.verdict for r in reports} == {"aggregate_levels": True, "aggregate_cube": True}


def test_aggregate_needs_three():
    with pytest.raises(ValueError):
        sc_constraint_aggregate(2)


def test_parameter_sets():
    d, alpha, m = sc_params(49, "lemma")
    assert (d, alpha) == (21, Fraction(1, 882))
    assert m == 2 * math.ceil(math.log2(math.sqrt(18 * 49)))
    d, alpha, m = sc_params(49, "corollary")
    assert (alpha, m) == (Fraction(1, 49), 2 * math.ceil(math.log2(49)))
    with pytest.raises(ValueError):
        sc_params(49, "other")


def test_stilde_shifted_root_and_value_at_one():
    s, info = build_sc_stilde(49)
    assert s(2) == 0
    assert s(1) >= info["alpha"] * 2 ** info["m"] >= 1


def test_sc_properties_small(main_12):
    reps = verify_sc_properties(12, main_12.stilde)
    assert [r.name for r in reps] == ["s_ge_1_on_01", "ratio_negative_increasing", "s_le_linear_on_23", "s_le_tail"]
    assert all(r.verdict for r in reps)
    assert (X - 2)(2) / 24 == main_12.stilde(2) == 0


def test_main_zero_structure(main_12):
    c = main_12
    assert c.passed, [r.name for r in c.property_reports + c.condition_reports if not r.verdict]
    rep = {r.name: r for r in c.condition_reports}
    assert rep["s0_at_2_zero"].verdict
    assert rep["s0_one_root_near_1"].detail["count"] == 1
    assert rep["s0_two_roots_12"].detail["count"] == 2
    assert 1 <= c.root_a <= Fraction(12, 11)
    assert c.stilde0(0) == -2 + 12 * c.stilde(0)
    assert c.stilde0(0) >= 10


def test_main_evidence(main_12):
    c = main_12
    assert c.evidence_report.valid
    assert check_evidence(c.multiplier_evidence, 12).claimed == c.stilde


def test_main_full_identity(main_12):
    assert main_full_identity(12, main_12.stilde, main_12.stilde0)


def test_corollary_parameter_set_is_reported():
    c = assemble_sc_main(12, param_set="corollary")
    assert c.params["param_set"] == "corollary"
    assert len(c.property_reports) == 6
    # outcome is recorded in the reports either way; no exception escapes
    assert isinstance(c.passed, bool)


def test_h1_h2_small():
    for n in (2, 5):
        out = build_h1_h2_evidence(n)
        assert all(r.verdict for r in out["reports"])
        assert len(out["multipliers"]["h1"]) == n + 1


def test_h2_expansion_on_weight_three_points():
    n = 5
    for pt in itertools.product((0, 1), repeat=n):
        if sum(pt) != 3:
            continue
        g = [sum(pt) - pt[i] - 1 for i in range(n)]
        val = sum(x * x * gi - (x * x - x) * gi + (x * x - x) for x, gi in zip(pt, g))
        assert val == 3


def test_appendix_degree():
    assert appendix_degree(16) == 32
    assert appendix_degree(100) == math.ceil(2 * 10 * math.log2(100))
    assert appendix_degree(144) == math.ceil(2 * 12 * math.log2(144))


def test_p1_p2_normalisation():
    p1, p2, c1, c2, D = build_p1_p2(100)
    assert D == 133
    assert p1(2) == 0
    assert p1(1) == 1
    assert p2(2) == Fraction(1, 2)
    assert c2 == 2 * 100 * c1


def test_f_at_three_positive():
    p1, p2, *_ = build_p1_p2(100)
    assert 1 - p1(3) * 2 - p2(3) * 3 > 0


def test_appendix_small(appendix_12):
    c = appendix_12
    assert c.f(2) == 0
    assert c.passed, [r.name for r in c.lemma_reports + c.condition_reports if not r.verdict]
    assert c.f == (X - 2) - c.p1 * (X - 1) - c.p2 * X * (X - 2)
    names = {r.name for r in c.condition_reports}
    assert {"h1_cube", "h2_cube", "decomposition_residual"} <= names


def test_appendix_full_identity(appendix_12):
    assert appendix_full_identity(12, appendix_12)
