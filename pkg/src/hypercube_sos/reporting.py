"""Condition records shared by the certificate pipelines and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from .poly_core import SignCertificate, UniPoly, as_interval, prove_nonneg, rational_str


@dataclass
class ConditionReport:
    """One checked statement: what was claimed, how it was decided, and the outcome."""

    name: str
    statement: str
    verdict: bool
    method: str
    certificates: list[tuple[str, SignCertificate]] = field(default_factory=list)
    witness: dict[str, str] | None = None
    detail: dict[str, Any] = field(default_factory=dict)
    # the polynomial behind each labelled certificate, kept for replay
    polys: dict[str, UniPoly] = field(default_factory=dict)

    def to_json(self, include_certificates: bool = False) -> dict:
        out: dict[str, Any] = {
            "name": self.name,
            "statement": self.statement,
            "verdict": "pass" if self.verdict else "fail",
            "method": self.method,
        }
        if self.witness:
            out["witness"] = self.witness
        if self.detail:
            out["detail"] = _jsonable(self.detail)
        if include_certificates and self.certificates:
            out["certificates"] = {label: c.to_json() for label, c in self.certificates}
        return out


def _jsonable(v):
    if isinstance(v, Fraction):
        return rational_str(v)
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, UniPoly):
        return [rational_str(c) for c in v.coeffs]
    return v


def nonneg_condition(
    name: str,
    statement: str,
    pieces: list[tuple[str, UniPoly, tuple]],
    strict: bool = False,
    **kw,
) -> ConditionReport:
    """Conjunction of ``poly >= 0`` (or ``> 0``) claims on intervals, each by exact isolation.

    ``pieces`` holds ``(label, poly, interval)``; the first failing piece supplies the witness.
    """
    certs = []
    polys = {label: p for label, p, _ in pieces}
    witness = None
    ok = True
    for label, p, interval in pieces:
        if p.is_zero():
            certs.append((label, _zero_cert(interval)))
            if strict and ok:
                ok, witness = False, {"piece": label, "point": rational_str(as_interval(interval).lo), "value": "0"}
            continue
        cert = prove_nonneg(p, interval, strict=strict, **kw)
        certs.append((label, cert))
        if not cert.holds and ok:
            ok = False
            witness = {"piece": label}
            if cert.witness_point is not None:
                witness["point"] = rational_str(cert.witness_point)
                if cert.witness_value is not None:
                    witness["value"] = rational_str(cert.witness_value)
    return ConditionReport(name, statement, ok, "exact root isolation", certs, witness, polys=polys)


def _zero_cert(interval) -> SignCertificate:
    return SignCertificate(interval=as_interval(interval), verdict="nonnegative", method="identity")


def scalar_condition(name: str, statement: str, holds: bool, **detail) -> ConditionReport:
    return ConditionReport(name, statement, bool(holds), "exact rational comparison", detail=detail)


def all_pass(reports: list[ConditionReport]) -> bool:
    return all(r.verdict for r in reports)
