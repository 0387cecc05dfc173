"""Batch driver: build or re-check certificates and write JSON/CSV reports.

Every rational in a report is a ``num/den`` string.  Exit status is 0 exactly
when every condition in the report passes.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import logging
import os
import sys
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable

from flint import arb

from . import knapsack_cert as mk
from . import setcover_cert as sc
from . import sqf_cert as sqf
from .cheb_bounds import smallest_root_scaled
from .poly_core import UniPoly, check_sign_certificate, rational_str, to_fmpq, to_fraction
from .reporting import ConditionReport, _jsonable
from .sos_univariate import sign_certificate_from_json

log = logging.getLogger("hsos")

PIPELINES = ("sqf", "knapsack", "setcover-main", "setcover-appendix")
PRECISION_ENV = "HSOS_PRECISION_BITS"
SQF_KEYS = ("e_g", "d_H", "e_p", "m_s2")
MK_KEYS = ("d", "alpha", "m")


def default_precision() -> int:
    raw = os.environ.get(PRECISION_ENV)
    if raw is None:
        return 128
    try:
        bits = int(raw)
    except ValueError:
        raise SystemExit(f"{PRECISION_ENV} must be an integer, got {raw!r}")
    if bits < 32:
        raise SystemExit(f"{PRECISION_ENV} must be >= 32")
    return bits


@dataclass
class RunConfig:
    command: str
    pipeline: str | None = None
    n: int | None = None
    k: int | None = None
    P: Fraction | None = None
    mode: str = "search"
    precision_bits: int = 128
    grid_step: Fraction | None = None
    report_path: Path | None = None
    csv_path: Path | None = None
    overrides: dict[str, Any] = field(default_factory=dict)
    c_mode: str = "tight"
    param_set: str = "lemma"
    certificate: Path | None = None
    replay_data: bool = False

    def validate(self) -> None:
        if self.command == "verify":
            if self.certificate is None:
                raise ValueError("verify needs a saved report")
            return
        if self.pipeline not in PIPELINES:
            raise ValueError(f"unknown pipeline {self.pipeline!r}")
        if self.n is None or self.n < 2:
            raise ValueError("--n (>= 2) is required")
        if self.pipeline == "sqf":
            if self.k is None:
                raise ValueError("sqf needs --k")
            if self.mode not in ("theory", "search"):
                raise ValueError(f"unknown mode {self.mode!r}")
        if self.pipeline == "knapsack" and (self.P is None or self.P < 2):
            raise ValueError("knapsack needs --P >= 2")
        if self.pipeline.startswith("setcover") and self.n < 9:
            raise ValueError("set cover needs n >= 9")
        allowed = {"sqf": SQF_KEYS, "knapsack": MK_KEYS}.get(self.pipeline, ())
        extra = set(self.overrides) - set(allowed)
        if extra:
            raise ValueError(f"overrides {sorted(extra)} do not apply to {self.pipeline}")
        for key, v in self.overrides.items():
            if key == "alpha":
                if not isinstance(v, Fraction) or v <= 0:
                    raise ValueError("alpha must be a positive rational")
            elif not isinstance(v, int) or v < 0:
                raise ValueError(f"{key} must be a nonnegative integer")
        if self.grid_step is not None and self.grid_step <= 0:
            raise ValueError("grid step must be positive")


@dataclass
class PipelineResult:
    header: dict[str, Any]
    conditions: list[ConditionReport]
    diagnostics: list[ConditionReport]
    degrees: dict[str, int]
    timings: dict[str, float]
    polys: dict[str, UniPoly]
    grid_range: tuple[Fraction, Fraction]


# ------------------------------------------------------------- pipelines


def _sqf_params(cfg: RunConfig) -> sqf.SqfParams | None:
    if cfg.mode == "theory":
        base = sqf.SqfParams.theory(cfg.n, cfg.k)
        return replace(base, **cfg.overrides) if cfg.overrides else base
    if not cfg.overrides:
        return None
    missing = [key for key in SQF_KEYS if key not in cfg.overrides]
    if missing:
        raise ValueError(f"search-mode overrides need all of {SQF_KEYS}; missing {missing}")
    return sqf.SqfParams(cfg.n, cfg.k, mode="search", c_mode=cfg.c_mode, **cfg.overrides)


def run_sqf(cfg: RunConfig, suite: bool = False) -> PipelineResult:
    mode = "theory" if suite else cfg.mode
    cfg = replace(cfg, mode=mode)
    cert = sqf.assemble_sqf_certificate(cfg.n, cfg.k, _sqf_params(cfg), mode=mode)
    polys = {"q_k": sqf.q_poly(cfg.k), "s1": cert.s1}
    if cert.s2 is not None:
        polys.update(s2=cert.s2, s=cert.s)
    degrees = {"total": cert.total_degree, "s1": cert.params.s1_degree, "s2": cert.params.s2_degree}
    if cert.evidence_report is not None:
        degrees["certificate"] = cert.certificate_degree
    return PipelineResult(
        {"params": cert.params.to_json(), "searched": cert.searched, "s2_data": cert.s2_data},
        cert.required,
        cert.diagnostics,
        degrees,
        cert.timings,
        polys,
        (Fraction(0), Fraction(cfg.n)),
    )


def _mk_params(cfg: RunConfig) -> mk.MkParams:
    params = mk.choose_params(cfg.n, cfg.P, cfg.precision_bits)
    if not cfg.overrides:
        return params
    params = replace(params, m_bound=None, **cfg.overrides)
    if "d" in cfg.overrides:
        params = replace(params, r0_enclosure=smallest_root_scaled(params.d, cfg.n, cfg.precision_bits).r0_enclosure)
    return params


def run_knapsack(cfg: RunConfig, suite: bool = False) -> PipelineResult:
    params = _mk_params(cfg)
    header = {"params": params.to_json()}
    if suite:
        s1, info = mk.build_stilde(cfg.n, cfg.P, params.d, params.alpha, params.m, cfg.precision_bits)
        conds = mk.corollary_premises(cfg.n, params.d, params.r0_hat)
        conds += mk.verify_mk_conditions(cfg.n, cfg.P, s1) + mk.verify_stilde_properties(params, s1, info["base"])
        return PipelineResult(header, conds, [], {"s1": s1.degree}, {}, {"s1": s1}, (Fraction(0), Fraction(cfg.n)))
    cert = mk.assemble_mk_certificate(cfg.n, cfg.P, params, cfg.precision_bits)
    header.update(m_oracle=cert.m_oracle, root_pairs=cert.root_pairs)
    degrees = {"total": cert.total_degree, "s1": cert.stilde1.degree, "s0": cert.stilde0.degree}
    if cert.evidence_report is not None:
        degrees["s0_evidence"] = cert.evidence_report.degree
    return PipelineResult(
        header,
        cert.condition_reports + cert.property_reports,
        [],
        degrees,
        cert.timings,
        {"s1": cert.stilde1, "s0": cert.stilde0},
        (Fraction(0), Fraction(cfg.n)),
    )


def run_setcover_main(cfg: RunConfig, suite: bool = False) -> PipelineResult:
    if suite:
        s, info = sc.build_sc_stilde(cfg.n, cfg.param_set, cfg.precision_bits)
        conds = sc.verify_sc_properties(cfg.n, s)
        header = {"params": {key: info[key] for key in ("d", "alpha", "m", "param_set", "r0_hat")}}
        return PipelineResult(header, conds, [], {"s": s.degree}, {}, {"s": s}, (Fraction(0), Fraction(cfg.n)))
    cert = sc.assemble_sc_main(cfg.n, cfg.param_set, cfg.precision_bits)
    header = {"params": cert.params, "root_a": cert.root_a}
    degrees = {"total": cert.total_degree, "s": cert.stilde.degree, "s0": cert.stilde0.degree}
    if cert.base is not None:
        degrees["q2_base"] = cert.base.certificate_degree
    return PipelineResult(
        header,
        cert.property_reports + cert.condition_reports,
        [],
        degrees,
        cert.timings,
        {"s": cert.stilde, "s0": cert.stilde0},
        (Fraction(0), Fraction(cfg.n)),
    )


def run_setcover_appendix(cfg: RunConfig, suite: bool = False) -> PipelineResult:
    cert = sc.assemble_sc_appendix(cfg.n, cfg.precision_bits, decompose=not suite)
    header = {"params": {"D": cert.D, "c1": cert.c1, "c2": cert.c2}, "multipliers": cert.h_evidence["multipliers"]}
    degrees = {"total": cert.total_degree, "p1": cert.p1.degree, "p2": cert.p2.degree, "f": cert.f.degree}
    return PipelineResult(
        header,
        cert.lemma_reports + cert.condition_reports,
        [],
        degrees,
        cert.timings,
        {"p1": cert.p1, "p2": cert.p2, "f": cert.f},
        (Fraction(0), Fraction(cfg.n)),
    )


RUNNERS: dict[str, Callable[..., PipelineResult]] = {
    "sqf": run_sqf,
    "knapsack": run_knapsack,
    "setcover-main": run_setcover_main,
    "setcover-appendix": run_setcover_appendix,
}


# --------------------------------------------------------------- reports


def poly_digest(p: UniPoly) -> str:
    h = hashlib.sha256()
    for c in p.coeffs:
        h.update(rational_str(c).encode())
        h.update(b",")
    return h.hexdigest()


def _replay_pieces(conds: list[ConditionReport]) -> list[dict]:
    out = []
    for r in conds:
        for label, cert in r.certificates:
            if label in r.polys:
                poly = [rational_str(c) for c in r.polys[label].coeffs]
                out.append({"condition": r.name, "label": label, "poly": poly, "certificate": cert.to_json()})
    return out


def build_report(cfg: RunConfig, res: PipelineResult, suite: bool = False) -> dict:
    header = {
        "pipeline": cfg.pipeline,
        "suite": suite,
        "n": cfg.n,
        "k": cfg.k,
        "P": rational_str(cfg.P) if cfg.P is not None else None,
        "mode": cfg.mode,
        "param_set": cfg.param_set if cfg.pipeline == "setcover-main" else None,
        "c_mode": cfg.c_mode if cfg.pipeline == "sqf" else None,
        "precision_bits": cfg.precision_bits,
        "overrides": {key: rational_str(v) for key, v in cfg.overrides.items()},
        **res.header,
    }
    report = {
        "header": _jsonable(header),
        "conditions": [r.to_json() for r in res.conditions],
        "diagnostics": [r.to_json() for r in res.diagnostics],
        "degrees": res.degrees,
        "polynomials": {name: {"degree": p.degree, "sha256": poly_digest(p)} for name, p in res.polys.items()},
        "timings": {key: round(v, 3) for key, v in res.timings.items()},
        "passed": all(r.verdict for r in res.conditions),
    }
    if cfg.replay_data:
        report["replay"] = {
            "polynomials": {name: [rational_str(c) for c in p.coeffs] for name, p in res.polys.items()},
            "sign_certificates": _replay_pieces(res.conditions),
        }
    return report


def _decimal(v: Fraction, digits: int = 17) -> str:
    # arb formats huge or tiny values without overflowing a float
    return arb(to_fmpq(v)).str(digits, radius=False)


def write_csv(path: Path, res: PipelineResult, step: Fraction) -> None:
    lo, hi = res.grid_range
    names = list(res.polys)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", *names])
        x = lo
        while x <= hi:
            w.writerow([rational_str(x), *(_decimal(res.polys[name](x)) for name in names)])
            x += step


def _comparable(report: dict) -> dict:
    return {key: report.get(key) for key in ("conditions", "degrees", "polynomials", "passed")}


def _cfg_from_header(h: dict) -> tuple[RunConfig, bool]:
    overrides = {}
    for key, v in h.get("overrides", {}).items():
        overrides[key] = to_fraction(v) if key == "alpha" else int(v)
    if h["pipeline"] == "sqf" and h["mode"] == "search" and not overrides:
        # fix the parameter vector the search found; replay must not depend on the search
        overrides = {key: int(h["params"][key]) for key in SQF_KEYS}
    cfg = RunConfig(
        command="replay",
        pipeline=h["pipeline"],
        n=h["n"],
        k=h["k"],
        P=to_fraction(h["P"]) if h["P"] is not None else None,
        mode=h["mode"],
        precision_bits=h["precision_bits"],
        overrides=overrides,
        c_mode=h.get("c_mode") or (h["params"].get("c_mode") if h["pipeline"] == "sqf" else "tight"),
        param_set=h.get("param_set") or "lemma",
    )
    return cfg, bool(h.get("suite"))


def replay_sign_certificates(report: dict) -> list[str]:
    """Recheck every stored sign certificate against its stored polynomial, leaf by leaf."""
    replay = report.get("replay")
    if not replay:
        return []
    mismatches = []
    for item in replay["sign_certificates"]:
        p = UniPoly([to_fraction(c) for c in item["poly"]])
        cert = sign_certificate_from_json(item["certificate"])
        if not check_sign_certificate(p, cert):
            mismatches.append(f"{item['condition']}/{item['label']}: stored {cert.verdict} certificate does not replay")
    return mismatches


def verify_report(path: Path) -> tuple[bool, dict]:
    saved = json.loads(Path(path).read_text())
    cfg, suite = _cfg_from_header(saved["header"])
    res = RUNNERS[cfg.pipeline](cfg, suite=suite)
    fresh = build_report(cfg, res, suite)
    same = _comparable(fresh) == _comparable(saved)
    diffs = [key for key in ("conditions", "degrees", "polynomials", "passed") if fresh.get(key) != saved.get(key)]
    mismatches = replay_sign_certificates(saved)
    out = {
        "header": saved["header"],
        "replay_identical": same,
        "differing_sections": diffs,
        "sign_replay_mismatches": mismatches,
        "passed": bool(saved.get("passed")) and same and not mismatches,
    }
    return out["passed"], out


# ------------------------------------------------------------------ run


def run(cfg: RunConfig) -> int:
    cfg.validate()
    if cfg.command == "verify":
        ok, out = verify_report(cfg.certificate)
        _emit(out, cfg.report_path)
        return 0 if ok else 1
    suite = cfg.command == "suite"
    t0 = time.perf_counter()
    try:
        res = RUNNERS[cfg.pipeline](cfg, suite=suite)
    except (ArithmeticError, ValueError, RuntimeError) as exc:
        failed = ConditionReport("pipeline", "pipeline ran to completion", False, "exception", detail={"error": f"{type(exc).__name__}: {exc}"})
        res = PipelineResult({}, [failed], [], {}, {"total": time.perf_counter() - t0}, {}, (Fraction(0), Fraction(cfg.n)))
    res.timings.setdefault("total", time.perf_counter() - t0)
    report = build_report(cfg, res, suite)
    _emit(report, cfg.report_path)
    if cfg.csv_path is not None and res.polys:
        write_csv(cfg.csv_path, res, cfg.grid_step or Fraction(1, 4))
    for r in res.conditions:
        if not r.verdict:
            log.error("condition failed: %s (%s)", r.name, r.statement)
    return 0 if report["passed"] else 1


def _emit(report: dict, path: Path | None) -> None:
    text = json.dumps(report, indent=2)
    if path is None:
        print(text)
    else:
        Path(path).write_text(text + "\n")
        summary = "pass" if report.get("passed") else "fail"
        print(f"{summary}: report written to {path}")


def _rational(s: str) -> Fraction:
    try:
        return to_fraction(s)
    except (ValueError, ZeroDivisionError):
        raise argparse.ArgumentTypeError(f"not a rational: {s!r}")


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--precision-bits", type=int, default=None)
    p.add_argument("--report", type=Path, default=None, help="JSON report path (stdout if omitted)")
    p.add_argument("--csv", type=Path, default=None, help="CSV grid of the constructed polynomials")
    p.add_argument("--grid-step", type=_rational, default=None)
    p.add_argument("--replay-data", action="store_true", help="embed polynomials and sign certificates in the report")


def _sqf_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--k", type=int)
    p.add_argument("--mode", choices=("theory", "search"), default="search")
    p.add_argument("--c-mode", choices=("tight", "h0", "theory"), default="tight")
    for key in SQF_KEYS:
        p.add_argument(f"--{key.replace('_', '-')}", dest=key, type=int, default=None)


def _mk_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--P", type=_rational)
    p.add_argument("--d", type=int, default=None)
    p.add_argument("--alpha", type=_rational, default=None)
    p.add_argument("--m", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hsos", description="Exact SoS certificates for symmetric polynomials on the hypercube.")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("sqf", help="quadratic q_k certificate")
    _common(p)
    _sqf_flags(p)

    p = sub.add_parser("knapsack", help="Min Knapsack certificate")
    _common(p)
    _mk_flags(p)

    p = sub.add_parser("setcover", help="Set Cover certificate")
    _common(p)
    p.add_argument("--pipeline", choices=("main", "appendix"), default="main")
    p.add_argument("--param-set", choices=("lemma", "corollary"), default="lemma")

    p = sub.add_parser("suite", help="factor-lemma suite of one pipeline")
    _common(p)
    p.add_argument("--pipeline", choices=PIPELINES, required=True)
    _sqf_flags(p)
    _mk_flags(p)
    p.add_argument("--param-set", choices=("lemma", "corollary"), default="lemma")

    p = sub.add_parser("verify", help="replay a saved JSON report")
    p.add_argument("certificate", type=Path)
    p.add_argument("--report", type=Path, default=None)
    return ap


def config_from_args(args: argparse.Namespace) -> RunConfig:
    if args.command == "verify":
        return RunConfig("verify", certificate=args.certificate, report_path=args.report)
    if args.command == "setcover":
        pipeline = f"setcover-{args.pipeline}"
    elif args.command == "suite":
        pipeline = args.pipeline
    else:
        pipeline = args.command
    overrides = {key: getattr(args, key) for key in SQF_KEYS + MK_KEYS if getattr(args, key, None) is not None}
    bits = args.precision_bits if args.precision_bits is not None else default_precision()
    return RunConfig(
        command=args.command,
        pipeline=pipeline,
        n=args.n,
        k=getattr(args, "k", None),
        P=getattr(args, "P", None),
        mode=getattr(args, "mode", "search"),
        precision_bits=bits,
        grid_step=args.grid_step,
        report_path=args.report,
        csv_path=args.csv,
        overrides=overrides,
        c_mode=getattr(args, "c_mode", "tight"),
        param_set=getattr(args, "param_set", "lemma"),
        replay_data=args.replay_data,
    )


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    cfg = config_from_args(args)
    try:
        cfg.validate()
    except ValueError as exc:
        ap.error(str(exc))
    return run(cfg)


if __name__ == "__main__":
    sys.exit(main())
