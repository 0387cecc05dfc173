from fractions import Fraction
import math

import pytest

from hypercube_sos.hypercube_oracle import levels
from hypercube_sos.knapsack_cert import (
    MkParams,
    assemble_mk_certificate,
    build_stilde,
    ceil_sqrt_scaled,
    choose_params,
    corollary_premises,
    factor_out_roots,
    oracle_minimal_m,
    verify_mk_conditions,
    verify_stilde_properties,
)
from hypercube_sos.poly_core import X, isolate_real_roots
from hypercube_sos.sos_univariate import check_evidence


@pytest.fixture(scope="module")
def cert_25_2():
    return assemble_mk_certificate(25, 2)


def test_ceil_sqrt_scaled():
    assert ceil_sqrt_scaled(3, 25) == 15
    assert ceil_sqrt_scaled(3, 49) == 21
    assert ceil_sqrt_scaled(3, 10) == math.ceil(3 * math.sqrt(10))
    for n in range(1, 500):
        assert ceil_sqrt_scaled(3, n) == math.ceil(3 * math.sqrt(n) - 1e-12)


def test_params_for_n_100():
    p = choose_params(100, 2)
    assert p.d == 30
    assert p.alpha == Fraction(1, 1800)
    assert p.m % 2 == 0
    assert p.m > p.m_bound >= p.m - 2


def test_params_validation():
    with pytest.raises(ValueError):
        choose_params(25, 1)
    with pytest.raises(ValueError):
        MkParams(25, Fraction(2), 15, Fraction(1, 450), 3, choose_params(25, 2).r0_enclosure)


def test_degree_one_root_is_exact():
    s, info = build_stilde(10, 2, 1, Fraction(1, 2), 2)
    assert info["r0_hat"] == 10
    assert s(1) == 0


def test_unshifted_value_at_one_is_tiny():
    p = choose_params(25, 2)
    s, info = build_stilde(25, 2, p.d, p.alpha, p.m, shift_root=False)
    assert 0 <= s(1) <= Fraction(1, 2**100)
    shifted, _ = build_stilde(25, 2, p.d, p.alpha, p.m)
    assert shifted(1) == 0


def test_premises_hold(cert_25_2):
    p = cert_25_2.params
    assert all(r.verdict for r in corollary_premises(p.n, p.d, p.r0_hat))


@pytest.mark.parametrize("n,P", [(25, 2), (25, 10**6), (49, 10)])
def test_strengthened_conditions(n, P):
    p = choose_params(n, P)
    s, info = build_stilde(n, P, p.d, p.alpha, p.m)
    assert s(0) > P
    assert [r.verdict for r in verify_mk_conditions(n, P, s)] == [True, True, True]
    assert all(r.verdict for r in verify_stilde_properties(p, s, info["base"]))


def test_envelope_routes_agree():
    p = choose_params(9, 2)
    s, info = build_stilde(9, 2, p.d, p.alpha, p.m)
    direct = verify_stilde_properties(p, s)
    via_base = verify_stilde_properties(p, s, info["base"])
    assert [r.verdict for r in direct] == [r.verdict for r in via_base] == [True, True]
    with pytest.raises(ValueError):
        verify_stilde_properties(p, s, info["base"] + 1)


@pytest.mark.parametrize("n", [25, 49])
def test_oracle_m_monotone_in_P(n):
    p = choose_params(n, 2)
    ms = [oracle_minimal_m(n, P, p.d, p.alpha) for P in (2, 10, 10**3, 10**6)]
    assert ms == sorted(ms)
    assert all(m % 2 == 0 for m in ms)
    chosen = [choose_params(n, P).m for P in (2, 10, 10**3, 10**6)]
    assert all(c >= o for c, o in zip(chosen, ms))


def test_certificate_n25_P2(cert_25_2):
    c = cert_25_2
    assert c.passed, [r.name for r in c.condition_reports if not r.verdict]
    assert c.root_count == 2
    assert len(c.root_pairs) == 1
    a, b = c.root_pairs[0]
    assert 0 < a <= b <= 1
    assert c.stilde0(0) == -1 + c.stilde1(0) / 2
    assert c.stilde0(0) > 0
    assert c.total_degree <= c.params.d * c.params.m + 4
    assert c.total_degree < 25 * 10


def test_evidence_matches_levels(cert_25_2):
    c = cert_25_2
    rep = check_evidence(c.evidence, 25)
    assert rep.valid
    # the evidence claims the factored stand-in for s0; its residual is the division remainder
    diff = [abs(u - v) for u, v in zip(levels(rep.claimed, 25), levels(c.stilde0, 25))]
    assert max(diff) <= c.factorization.residual_bound * 2


def test_conditions_imply_positivity():
    for n, P in [(9, 2), (16, 10)]:
        cert = assemble_mk_certificate(n, P)
        names = {"s1_at_0_gt_P", "s1_le_linear_on_12", "s1_le_half_tail"}
        conds = [r for r in cert.condition_reports if r.name in names]
        if all(r.verdict for r in conds):
            pos = {r.name: r.verdict for r in cert.condition_reports}
            assert pos["s0_at_0_pos"] and pos["s0_pos_on_1n"]


def test_large_P_certificate():
    c = assemble_mk_certificate(25, 10**6)
    assert c.passed
    assert c.root_count % 2 == 0
    assert c.params.m >= choose_params(25, 2).m


def test_factor_out_exact_root():
    f = (X - Fraction(1, 2)) * (X - Fraction(3, 4)) * (X**2 + 1)
    cells = isolate_real_roots(f, (0, 1))
    fac = factor_out_roots(f, cells, (0, 1))
    assert fac.remainder.is_zero()
    assert fac.quotient == X**2 + 1
