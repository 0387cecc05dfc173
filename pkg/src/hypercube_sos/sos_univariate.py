"""Interval sum-of-squares decompositions and checkable evidence trees.

Two things live here.

``decompose_on_interval`` writes a polynomial that is nonnegative on ``[a, b]``
as ``s + (x-a)(b-x) t`` (even degree) or ``(x-a) s + (b-x) t`` (odd degree)
with ``s, t`` explicit weighted sums of squares.  Roots are located in ball
arithmetic; the reassembled identity is then checked exactly and the residual
bounded rigorously.

``SosEvidence`` is a tree of closure rules that witnesses "sum of squares
modulo the Boolean axioms" for a symmetric multivariate polynomial through
its univariate representative in the Hamming weight ``|x|``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction

from flint import acb_poly, arb, arb_poly, ctx, fmpq, fmpq_poly

from .poly_core import (
    IntervalQ,
    SignCertificate,
    UniPoly,
    X,
    as_interval,
    certify_nonneg,
    check_sign_certificate,
    linear_map,
    rational_str,
    sup_norm_estimate,
    to_fmpq,
    to_fraction,
)

# ------------------------------------------------------------ decomposition


@dataclass
class IntervalSosDecomposition:
    """``p ~ s + w t`` (even) or ``(x-a) s + (b-x) t`` (odd) on ``[a, b]``, ``w = (x-a)(b-x)``.

    ``s`` and ``t`` are stored as lists of ``(weight, root)`` pairs meaning
    ``sum weight * root^2`` with rational weights ``>= 0``.
    """

    p: UniPoly
    interval: IntervalQ
    parity: str
    s_terms: list[tuple[Fraction, UniPoly]]
    t_terms: list[tuple[Fraction, UniPoly]]
    residual_bound: Fraction
    norm_estimate: Fraction
    precision_bits: int
    working_precision: int = 0

    @staticmethod
    def _assemble(terms) -> UniPoly:
        out = UniPoly()
        for w, u in terms:
            out = out + (u * u) * w
        return out

    @property
    def s(self) -> UniPoly:
        return self._assemble(self.s_terms)

    @property
    def t(self) -> UniPoly:
        return self._assemble(self.t_terms)

    def reassembled(self) -> UniPoly:
        a, b = self.interval.lo, self.interval.hi
        if self.parity == "even":
            return self.s + (X - a) * (b - X) * self.t
        return (X - a) * self.s + (b - X) * self.t

    def residual(self) -> UniPoly:
        return self.p - self.reassembled()

    def tolerance(self) -> Fraction:
        return self.norm_estimate / 2**self.precision_bits

    def check(self) -> bool:
        """Re-derive the residual bound exactly and compare against the tolerance."""
        if any(w < 0 for w, _ in self.s_terms + self.t_terms):
            return False
        bound = residual_sup_bound(self.residual(), self.interval)
        return bound <= self.residual_bound <= self.tolerance()

    def to_json(self) -> dict:
        return {
            "interval": self.interval.to_json(),
            "parity": self.parity,
            "s": [[rational_str(w), poly_to_json(u)] for w, u in self.s_terms],
            "t": [[rational_str(w), poly_to_json(u)] for w, u in self.t_terms],
            "residual_bound": rational_str(self.residual_bound),
            "norm_estimate": rational_str(self.norm_estimate),
            "precision_bits": self.precision_bits,
        }

    @classmethod
    def from_json(cls, p: UniPoly, data: dict) -> "IntervalSosDecomposition":
        return cls(
            p=p,
            interval=IntervalQ.from_json(data["interval"]),
            parity=data["parity"],
            s_terms=[(Fraction(w), poly_from_json(u)) for w, u in data["s"]],
            t_terms=[(Fraction(w), poly_from_json(u)) for w, u in data["t"]],
            residual_bound=Fraction(data["residual_bound"]),
            norm_estimate=Fraction(data["norm_estimate"]),
            precision_bits=int(data["precision_bits"]),
        )


def residual_sup_bound(r: UniPoly, interval) -> Fraction:
    """Rigorous bound on ``sup |r|`` over the interval, via the map onto ``[-1, 1]``."""
    I = as_interval(interval)
    if r.is_zero():
        return Fraction(0)
    if I.lo == I.hi:
        return abs(r(I.lo))
    ry = r.compose(linear_map(-1, 1, I.lo, I.hi))
    return sum((abs(c) for c in ry.coeffs), Fraction(0))


def _arb_to_fmpq_mid(v: arb) -> fmpq:
    man, exp = v.mid().man_exp()
    man, exp = int(man), int(exp)
    return fmpq(man * 2**exp) if exp >= 0 else fmpq(man, 2**-exp)


def _round_poly(p: arb_poly) -> UniPoly:
    return UniPoly(fmpq_poly([_arb_to_fmpq_mid(c) for c in p.coeffs()]))


def _sqrt_nonneg(v: arb) -> arb:
    return v.nonnegative_part().sqrt()


def _pair_linear(l1, l2, a: arb, b: arb):
    """Write a product of two oriented linear factors as ``alpha (y - mu)^2 + c w``.

    Each factor is ``(side, r)`` meaning ``y - r`` (``side='L'``, ``r <= a``) or
    ``r - y`` (``side='R'``, ``r >= b``).  Returns ``(A, B)`` as arb polynomials
    with product ``A^2 + w B^2``.
    """
    (s1, r1), (s2, r2) = l1, l2
    same = s1 == s2
    S = r1 + r2
    sab = a + b
    width2 = (b - a) * (b - a)
    if same:
        Xv = (a - r1) * (b - r2)
        Yv = (a - r2) * (b - r1)
        c = (_sqrt_nonneg(Xv) - _sqrt_nonneg(Yv)) ** 2 / width2
        eps = 1
    else:
        if s1 == "R":
            r1, r2 = r2, r1
        Xv = (a - r1) * (r2 - b)
        Yv = (r2 - a) * (b - r1)
        c = (_sqrt_nonneg(Xv) + _sqrt_nonneg(Yv)) ** 2 / width2
        eps = -1
    alpha = c + eps
    alpha = alpha.nonnegative_part()
    if alpha == 0:
        A = arb_poly([0])
    else:
        mu = (eps * S + c * sab) / (2 * alpha)
        ra = alpha.sqrt()
        A = arb_poly([-ra * mu, ra])
    B = arb_poly([_sqrt_nonneg(c)])
    return A, B


def _leftover_weights(side, r, a: arb, b: arb):
    """``(lam, mu)`` with the linear factor equal to ``lam (y-a) + mu (b-y)``, both ``>= 0``."""
    if side == "L":
        mu = (a - r) / (b - a)
        lam = 1 + mu
    else:
        mu = (r - a) / (b - a)
        lam = (r - b) / (b - a)
    return lam.nonnegative_part(), mu.nonnegative_part()


def _decompose_unit(g: UniPoly, wp: int):
    """Decompose ``g >= 0`` on ``[-1, 1]``; returns ``(parity, K, s_roots, t_roots)``.

    ``s_roots`` / ``t_roots`` are rational root polynomials, each entering as
    ``K * u^2`` (with the odd-case weights already folded into ``u``).
    """
    old = ctx.prec
    ctx.prec = wp
    try:
        a_q, b_q = Fraction(-1), Fraction(1)
        const, facs = g.flint.factor_squarefree()
        E = fmpq_poly([1])
        F = fmpq_poly([to_fmpq(const)])
        for f, m in facs:
            m = int(m)
            E *= f ** (m // 2)
            if m % 2:
                F *= f
        F = UniPoly(F)
        linear: list[tuple[str, object]] = []
        if F.degree > 0 and F(a_q) == 0:
            F = F.exact_div(X - a_q)
            linear.append(("L", arb(-1)))
        if F.degree > 0 and F(b_q) == 0:
            F = -F.exact_div(X - b_q)
            linear.append(("R", arb(1)))
        # F has no root left on [-1, 1], so its sign there is that of F(0) >= 0
        Fz = F.primitive_integer()
        K = F.leading_coefficient if F.degree > 0 else F.coeff(0)
        upper = acb_poly([1])
        if F.degree > 0:
            for z, _ in Fz.complex_roots():
                im = z.imag
                if im.is_zero():
                    r = z.real
                    if r < -1:
                        linear.append(("L", r))
                    elif r > 1:
                        linear.append(("R", r))
                        K = -K
                    else:
                        raise ArithmeticError("real root of odd multiplicity inside the interval")
                elif im > 0:
                    upper *= acb_poly([-z, 1])
                elif not im < 0:
                    raise ArithmeticError("root not separated from the real axis; raise precision")
        if K < 0:
            raise ArithmeticError("negative leading factor: polynomial is not nonnegative")
        cs = upper.coeffs()
        U = arb_poly([c.real for c in cs])
        V = arb_poly([c.imag for c in cs])
        av, bv = arb(-1), arb(1)
        A, B = arb_poly([1]), arb_poly([0])
        w = arb_poly([1, 0, -1])
        leftover = None
        if len(linear) % 2:
            leftover = linear.pop()
        for i in range(0, len(linear), 2):
            C, D = _pair_linear(linear[i], linear[i + 1], av, bv)
            A, B = A * C - w * B * D, A * D + B * C
        Ea = arb_poly(E)
        EU, EV = Ea * U, Ea * V
        if leftover is None:
            parity = "even"
            s_roots = [EU * A, EV * A]
            t_roots = [EU * B, EV * B]
        else:
            parity = "odd"
            lam, mu = _leftover_weights(*leftover, av, bv)
            sl, sm = lam.sqrt(), mu.sqrt()
            left = arb_poly([1, 1])  # y - a
            right = arb_poly([1, -1])  # b - y
            s_roots = [EU * A * sl, EV * A * sl, EU * right * B * sm, EV * right * B * sm]
            t_roots = [EU * A * sm, EV * A * sm, EU * left * B * sl, EV * left * B * sl]
        s_q = [_round_poly(u) for u in s_roots]
        t_q = [_round_poly(u) for u in t_roots]
        return parity, Fraction(K), [u for u in s_q if not u.is_zero()], [u for u in t_q if not u.is_zero()]
    finally:
        ctx.prec = old


def decompose_on_interval(
    p: UniPoly,
    interval,
    precision_bits: int = 128,
    max_working_precision: int = 1 << 16,
) -> IntervalSosDecomposition:
    """Constructive decomposition of a polynomial nonnegative on ``[a, b]``.

    The work is done after mapping ``[a, b]`` onto ``[-1, 1]``, where
    Chebyshev-built polynomials are far better conditioned; the pieces map
    back exactly.  The residual ``p - (reassembled)`` is bounded rigorously and
    must not exceed ``2^-precision_bits`` times a sampled estimate of
    ``max |p|``; the working precision doubles until it does.
    """
    I = as_interval(interval)
    cert = certify_nonneg(p, I)
    if not cert.holds:
        raise ValueError(f"not nonnegative on {I}: p({float(cert.witness_point):.6g}) = {float(cert.witness_value):.6g}")
    a, b = I.lo, I.hi
    if a == b:
        raise ValueError("degenerate interval")
    parity_of = "even" if p.degree % 2 == 0 or p.is_zero() else "odd"
    norm = sup_norm_estimate(p, I)
    if p.is_zero() or p.degree <= 0:
        terms = [] if p.is_zero() else [(p.coeff(0), UniPoly([1]))]
        if parity_of == "even":
            return IntervalSosDecomposition(p, I, "even", terms, [], Fraction(0), norm, precision_bits)
    to_unit = linear_map(a, b, -1, 1)
    from_unit = linear_map(-1, 1, a, b)
    g = p.compose(from_unit)
    wp = max(precision_bits, 64) + 2 * g.height_bits() + 64
    half = (b - a) / 2
    while True:
        parity, K, s_u, t_u = _decompose_unit(g, wp)
        # (y+1) = (x-a)/half, (1-y) = (b-x)/half
        if parity == "even":
            s_w, t_w = K, K / (half * half)
        else:
            s_w, t_w = K / half, K / half
        s_terms = [(s_w, u.compose(to_unit)) for u in s_u]
        t_terms = [(t_w, u.compose(to_unit)) for u in t_u]
        dec = IntervalSosDecomposition(p, I, parity, s_terms, t_terms, Fraction(0), norm, precision_bits, wp)
        bound = residual_sup_bound(dec.residual(), I)
        dec.residual_bound = bound
        if bound <= dec.tolerance():
            return dec
        if wp >= max_working_precision:
            raise ArithmeticError(f"residual {float(bound):.3e} above tolerance at {wp} bits")
        wp *= 2


# ----------------------------------------------------------------- evidence


KINDS = (
    "Square",
    "NonnegScalar",
    "Sum",
    "Product",
    "EvenPower",
    "VarSumAxiom",
    "ComplementAxiom",
    "FallingFactorialAxiom",
    "IntervalNonnegLift",
)


@dataclass(frozen=True, eq=False)
class SosEvidence:
    """One node of an evidence tree; ``claimed`` is the univariate representative in ``|x|``."""

    kind: str
    claimed: UniPoly
    degree: int
    children: tuple["SosEvidence", ...] = ()
    poly: UniPoly | None = None
    scalar: Fraction | None = None
    exponent: int | None = None
    n: int | None = None
    k: int | None = None
    variant: str | None = None
    certificate: SignCertificate | None = None
    decomposition: IntervalSosDecomposition | None = None

    def walk(self, path: str = "root"):
        yield path, self
        for i, ch in enumerate(self.children):
            yield from ch.walk(f"{path}/{self.kind}[{i}]")

    def node_count(self) -> int:
        return sum(1 for _ in self.walk())

    def __repr__(self) -> str:
        return f"SosEvidence({self.kind}, degree={self.degree}, deg_claimed={self.claimed.degree})"


def square(u) -> SosEvidence:
    u = u if isinstance(u, UniPoly) else UniPoly.const(u)
    return SosEvidence("Square", u * u, 2 * max(u.degree, 0), poly=u)


def nonneg_scalar(c) -> SosEvidence:
    c = to_fraction(c)
    return SosEvidence("NonnegScalar", UniPoly.const(c), 0, scalar=c)


def sum_of(*children: SosEvidence) -> SosEvidence:
    total = UniPoly()
    for ch in children:
        total = total + ch.claimed
    return SosEvidence("Sum", total, max((ch.degree for ch in children), default=0), tuple(children))


def product_of(*children: SosEvidence) -> SosEvidence:
    total = UniPoly.const(1)
    for ch in children:
        total = total * ch.claimed
    return SosEvidence("Product", total, sum(ch.degree for ch in children), tuple(children))


def even_power(base: UniPoly, exponent: int) -> SosEvidence:
    if exponent < 0 or exponent % 2:
        raise ValueError("exponent must be a nonnegative even integer")
    return SosEvidence("EvenPower", base**exponent, exponent * max(base.degree, 0), poly=base, exponent=exponent)


def var_sum() -> SosEvidence:
    """``|x| = sum x_i^2 - sum (x_i^2 - x_i)``."""
    return SosEvidence("VarSumAxiom", X, 2)


def complement(n: int) -> SosEvidence:
    """``n - |x| = sum (1 - x_i)^2 - sum (x_i^2 - x_i)``."""
    return SosEvidence("ComplementAxiom", n - X, 2, n=n)


def falling_factorial_poly(k: int, variant: str) -> UniPoly:
    if variant == "A":
        return UniPoly.from_roots(range(2 * k))
    if variant == "B":
        return (X + 1) * UniPoly.from_roots(range(2 * k + 1))
    raise ValueError(f"unknown variant {variant!r}")


def falling_factorial(k: int, variant: str = "A") -> SosEvidence:
    """``prod_{i<2k} (|x| - i)`` (A) or ``(|x|+1) prod_{i<=2k} (|x| - i)`` (B), trusted leaves."""
    deg = 2 * k if variant == "A" else 2 * k + 2
    return SosEvidence("FallingFactorialAxiom", falling_factorial_poly(k, variant), deg, k=k, variant=variant)


def lift_degree(p: UniPoly) -> int:
    """Degree of the hypercube certificate obtained by splitting ``p`` on ``[0, n]``."""
    d = max(p.degree, 0)
    if d == 0:
        return 0
    return d + 2 if d % 2 == 0 else d + 1


def interval_lift(
    p: UniPoly,
    n: int,
    certificate: SignCertificate,
    decomposition: IntervalSosDecomposition | None = None,
) -> SosEvidence:
    return SosEvidence(
        "IntervalNonnegLift",
        p,
        lift_degree(p),
        poly=p,
        n=n,
        certificate=certificate,
        decomposition=decomposition,
    )


def lift_nonneg_to_hypercube(
    p: UniPoly,
    n: int,
    decompose: bool = False,
    precision_bits: int = 128,
    strict: bool = False,
) -> SosEvidence:
    """Evidence that the symmetric polynomial ``p(|x|)`` is SoS modulo the Boolean axioms.

    Plain shapes get exact nodes (a constant, a multiple of ``|x|(n-|x|)``);
    everything else becomes an ``IntervalNonnegLift`` leaf carrying the exact
    sign certificate on ``[0, n]`` and, on request, the explicit split
    ``s + |x|(n-|x|) t`` (or its odd-degree analogue).
    """
    if p.degree <= 0:
        c = p.coeff(0) if not p.is_zero() else Fraction(0)
        if c < 0:
            raise ValueError(f"negative constant {c}")
        return square(1) if c == 1 else nonneg_scalar(c)
    base = X * (n - X)
    if p.degree == 2:
        ratio = p.leading_coefficient / base.leading_coefficient
        if ratio > 0 and p == base * ratio:
            prod = product_of(var_sum(), complement(n))
            return prod if ratio == 1 else product_of(nonneg_scalar(ratio), prod)
    cert = certify_nonneg(p, (0, n), strict=strict)
    if not cert.holds:
        raise ValueError(f"lift failed: p({float(cert.witness_point):.6g}) = {float(cert.witness_value):.6g}")
    dec = decompose_on_interval(p, (0, n), precision_bits) if decompose else None
    return interval_lift(p, n, cert, dec)


# ------------------------------------------------------------------ checking


@dataclass
class EvidenceReport:
    valid: bool
    degree: int
    claimed: UniPoly
    errors: list[str] = field(default_factory=list)
    lifted_leaves: int = 0

    def __bool__(self) -> bool:
        return self.valid


def check_evidence(e: SosEvidence, n: int, recheck_lifts: bool = True) -> EvidenceReport:
    """Recursively validate identities, side conditions and degree tags.

    Every failure message names the offending node path.
    """
    errors: list[str] = []
    lifted = 0

    def visit(node: SosEvidence, path: str) -> tuple[UniPoly, int]:
        nonlocal lifted
        kind = node.kind
        if kind == "Square":
            value, deg = node.poly * node.poly, 2 * max(node.poly.degree, 0)
        elif kind == "NonnegScalar":
            if node.scalar is None or node.scalar < 0:
                errors.append(f"{path}: scalar {node.scalar} is negative")
            value, deg = UniPoly.const(node.scalar or 0), 0
        elif kind == "Sum":
            value, deg = UniPoly(), 0
            for i, ch in enumerate(node.children):
                v, d = visit(ch, f"{path}/Sum[{i}]")
                value, deg = value + v, max(deg, d)
        elif kind == "Product":
            value, deg = UniPoly.const(1), 0
            for i, ch in enumerate(node.children):
                v, d = visit(ch, f"{path}/Product[{i}]")
                value, deg = value * v, deg + d
        elif kind == "EvenPower":
            if node.exponent is None or node.exponent < 0 or node.exponent % 2:
                errors.append(f"{path}: exponent {node.exponent} is not even")
            value = node.poly ** (node.exponent or 0)
            deg = (node.exponent or 0) * max(node.poly.degree, 0)
        elif kind == "VarSumAxiom":
            value, deg = X, 2
        elif kind == "ComplementAxiom":
            if node.n != n:
                errors.append(f"{path}: complement axiom for n={node.n}, expected {n}")
            value, deg = (node.n or 0) - X, 2
        elif kind == "FallingFactorialAxiom":
            value = falling_factorial_poly(node.k, node.variant)
            deg = 2 * node.k if node.variant == "A" else 2 * node.k + 2
            if any(value(j) < 0 for j in range(n + 1)):
                errors.append(f"{path}: falling factorial negative at an integer level")
        elif kind == "IntervalNonnegLift":
            lifted += 1
            value, deg = node.poly, lift_degree(node.poly)
            cert = node.certificate
            if node.n != n:
                errors.append(f"{path}: lift built for n={node.n}, expected {n}")
            if cert is None or not cert.holds:
                errors.append(f"{path}: missing or failing sign certificate")
            elif cert.interval != IntervalQ(0, n):
                errors.append(f"{path}: certificate interval {cert.interval} is not [0, {n}]")
            elif recheck_lifts and not check_sign_certificate(node.poly, cert):
                errors.append(f"{path}: sign certificate does not replay")
            if node.decomposition is not None:
                dec = node.decomposition
                if dec.p != node.poly or dec.interval != IntervalQ(0, n):
                    errors.append(f"{path}: decomposition is for a different polynomial or interval")
                elif recheck_lifts and not dec.check():
                    errors.append(f"{path}: decomposition residual exceeds its tolerance")
        else:
            errors.append(f"{path}: unknown node kind {kind!r}")
            return node.claimed, node.degree
        if value != node.claimed:
            errors.append(f"{path}: claimed polynomial does not match the {kind} rule")
        if deg != node.degree:
            errors.append(f"{path}: degree tag {node.degree} but rule gives {deg}")
        return value, deg

    value, deg = visit(e, "root")
    return EvidenceReport(not errors, deg, value, errors, lifted)


# ------------------------------------------------------------ serialization


def poly_to_json(p: UniPoly) -> list[str]:
    return [rational_str(c) for c in p.coeffs]


def poly_from_json(data) -> UniPoly:
    return UniPoly([Fraction(c) for c in data])


def sign_certificate_from_json(data: dict) -> SignCertificate:
    from .poly_core import Leaf, RootCell

    cert = SignCertificate(
        interval=IntervalQ.from_json(data["interval"]),
        verdict=data["verdict"],
        strict=data.get("strict", False),
        open_lo=data.get("open_lo", False),
        open_hi=data.get("open_hi", False),
        method=data.get("method", "descartes"),
        roots=[RootCell(Fraction(a), Fraction(b)) for a, b in data.get("roots", [])],
        leaves=[Leaf(Fraction(a), Fraction(b), int(v)) for a, b, v in data.get("leaves", [])],
    )
    if "witness" in data:
        w = data["witness"]
        cert.witness_point = Fraction(w["point"])
        cert.witness_value = Fraction(w["value"]) if w.get("value") is not None else None
    return cert


def evidence_to_json(e: SosEvidence, include_claims: bool = True) -> dict:
    out: dict = {"kind": e.kind, "degree": e.degree}
    if include_claims and e.kind in ("Sum", "Product"):
        out["claimed"] = poly_to_json(e.claimed)
    if e.poly is not None:
        out["poly"] = poly_to_json(e.poly)
    if e.scalar is not None:
        out["scalar"] = rational_str(e.scalar)
    for name in ("exponent", "n", "k", "variant"):
        val = getattr(e, name)
        if val is not None:
            out[name] = val
    if e.certificate is not None:
        out["certificate"] = e.certificate.to_json()
    if e.decomposition is not None:
        out["decomposition"] = e.decomposition.to_json()
    if e.children:
        out["children"] = [evidence_to_json(ch, include_claims) for ch in e.children]
    return out


def evidence_from_json(data: dict) -> SosEvidence:
    """Rebuild a tree; claims stored in the JSON are kept so that checking compares them."""
    kind = data["kind"]
    children = tuple(evidence_from_json(ch) for ch in data.get("children", []))
    poly = poly_from_json(data["poly"]) if "poly" in data else None
    if kind == "Square":
        node = square(poly)
    elif kind == "NonnegScalar":
        node = nonneg_scalar(Fraction(data["scalar"]))
    elif kind == "Sum":
        node = sum_of(*children)
    elif kind == "Product":
        node = product_of(*children)
    elif kind == "EvenPower":
        node = SosEvidence("EvenPower", poly ** int(data["exponent"]), 0, poly=poly, exponent=int(data["exponent"]))
    elif kind == "VarSumAxiom":
        node = var_sum()
    elif kind == "ComplementAxiom":
        node = complement(int(data["n"]))
    elif kind == "FallingFactorialAxiom":
        node = falling_factorial(int(data["k"]), data["variant"])
    elif kind == "IntervalNonnegLift":
        cert = sign_certificate_from_json(data["certificate"]) if "certificate" in data else None
        dec = IntervalSosDecomposition.from_json(poly, data["decomposition"]) if "decomposition" in data else None
        node = interval_lift(poly, int(data["n"]), cert, dec)
    else:
        raise ValueError(f"unknown node kind {kind!r}")
    claimed = poly_from_json(data["claimed"]) if "claimed" in data else node.claimed
    return replace(node, claimed=claimed, degree=int(data["degree"]))
