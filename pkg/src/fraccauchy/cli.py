"""Command line front end: ``fraccauchy analyze | solve | verify <config>``.

Exit codes: 0 ok, 2 configuration, 3 numeric failure, 4 hypothesis audit
failed (solve/verify without --force), 5 verification failed.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .config import ProblemConfig, load_config
from .entire_fn.growth import order_type_estimate
from .entire_fn.indicator import AngularDensity, IndicatorFunction, check_indicator_positivity, indicator_H
from .entire_fn.regularity import exceptional_circles, growth_constants
from .entire_fn.zeros import convergence_exponent, genus
from .errors import AuditFailed, ConfigError, FracCauchyError, NumericError
from .fractional import equation_residual
from .functional_calculus import beta_k, build_contour, semigroup_integral
from .solver import CauchyProblem, evaluate_series, hypothesis_audit, solve

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC, EXIT_AUDIT, EXIT_VERIFY = 0, 2, 3, 4, 5
OUT_ENV = "FRACCAUCHY_OUT"
CHECKS = ("oracle", "residual", "initial_condition", "beta_k", "regrouping")
CORRUPTION = 1.01
INDICATOR_POINTS = 361


def _plain(x):
    """JSON-ready copy: complex -> [re, im], arrays -> lists, nan/inf -> strings."""
    if isinstance(x, dict):
        return {str(k): _plain(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_plain(v) for v in x]
    if isinstance(x, np.ndarray):
        return _plain(x.tolist())
    if isinstance(x, (bool, np.bool_)):
        return bool(x)
    if isinstance(x, (int, np.integer)):
        return int(x)
    if isinstance(x, (complex, np.complexfloating)):
        return [_plain(float(x.real)), _plain(float(x.imag))]
    if isinstance(x, (float, np.floating)):
        x = float(x)
        return x if math.isfinite(x) else repr(x)
    return x


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header: list[str], rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def write_report(path: Path, report: dict) -> None:
    path.write_text(json.dumps(_plain(report), indent=2, sort_keys=True) + "\n")


def _out_dir(cfg: ProblemConfig, override: str | None) -> Path:
    d = Path(override or os.environ.get(OUT_ENV) or cfg.output.directory)
    d.mkdir(parents=True, exist_ok=True)
    return d


def _base_report(command: str, cfg: ProblemConfig) -> dict:
    return {"command": command, "version": __version__, "tolerances": cfg.tolerances.to_dict()}


# -- analyze -------------------------------------------------------------------


def analyze(cfg: ProblemConfig, out: Path) -> dict:
    cfg.need("function")
    spec = cfg.function.build()
    zs = spec.zeros
    rep = _base_report("analyze", cfg)
    info: dict = {"genus": spec.genus, "multiplicity": spec.multiplicity}
    if not zs.is_finite:
        info["genus_from_zeros"] = genus(zs)
        info["convergence_exponent"] = convergence_exponent(zs)
    rho, sigma = growth_constants(spec)
    info["closed_form_order"], info["closed_form_type"] = rho, sigma
    rep["function"] = info
    est = order_type_estimate(spec, 1e4 * 4.0 ** np.arange(8))
    rep["growth_estimate"] = {"order": est.order, "type": est.type, "residual": est.residual,
                              "radii": est.radii, "log_max": est.log_max}
    if zs.kind == "power" and abs(rho - round(rho)) > 1e-12:
        density = AngularDensity.from_zeros(zs)
        psi = np.linspace(-math.pi, math.pi, INDICATOR_POINTS)
        H = np.asarray(indicator_H(rho, density, psi), dtype=float)
        path = out / f"{cfg.output.prefix}_indicator.csv"
        write_csv(path, ["psi", "H"], zip(psi, H))
        ind = {"csv": path.name, "maximum": IndicatorFunction(rho, density).maximum()}
        if 0 < rho <= 0.5:
            pos = check_indicator_positivity(rho, density)
            ind.update(nonnegative=pos.nonnegative, minimum=pos.minimum, zero_angles=pos.zero_angles)
        rep["indicator"] = ind
        try:
            circ = exceptional_circles(zs, rho, 0.1, "II")
            rep["exceptional_circles"] = {"condition": "II", "d": 0.1, "passed": True,
                                          "verified_through": circ.verified_through}
        except NumericError as e:
            rep["exceptional_circles"] = {"condition": "II", "d": 0.1, "passed": False, "error": str(e),
                                          "offending": getattr(e, "pair", None)}
    else:
        rep["indicator"] = {"skipped": "indicator needs a power zero family of non-integer order"}
    return rep


# -- solve ---------------------------------------------------------------------


def _audit_dict(audit) -> dict:
    return {"passed": audit.passed,
            "checks": {k: {"passed": c.passed, "evidence": c.evidence} for k, c in audit.checks.items()}}


def _trajectory_rows(times, values):
    for t, u in zip(times, values):
        row = [t]
        for z in u:
            row.extend((z.real, z.imag))
        yield row


def run_solve(cfg: ProblemConfig, out: Path, force: bool) -> tuple[dict, int]:
    prob = cfg.build_problem()
    audit = hypothesis_audit(prob)
    rep = _base_report("solve", cfg)
    rep["audit"] = _audit_dict(audit)
    if not audit.passed and not force:
        rep["error"] = f"hypothesis audit failed: {', '.join(audit.failures())}"
        return rep, EXIT_AUDIT
    sol = solve(prob, force=force, audit=audit)
    N = prob.operator.dimension
    header = ["t"] + [f"{p}_u{i + 1}" for i in range(N) for p in ("re", "im")]
    path = out / f"{cfg.output.prefix}_trajectory.csv"
    write_csv(path, header, _trajectory_rows(prob.times, sol.values))
    rep["trajectory_csv"] = path.name
    rep["forced"] = sol.forced
    rep["annuli"] = {"radii": sol.annuli.radii, "groups": sol.annuli.groups}
    rep["block_norms"] = sol.block_norms
    rep["pairing_magnitudes"] = [np.abs(p) for p in sol.pairings]
    return rep, EXIT_OK


# -- verify --------------------------------------------------------------------


def _row(name, passed, value, threshold, **extra) -> dict:
    return {"check": name, "passed": bool(passed), "value": value, "threshold": threshold, **extra}


def _check_oracle(prob: CauchyProblem, sol, tol) -> list[dict]:
    ref = semigroup_integral(prob.operator, prob.phi, prob.alpha, prob.times, prob.f,
                             tol=tol.quadrature, relative=True).value
    dev = np.linalg.norm(sol.values - ref, axis=1) / np.linalg.norm(ref, axis=1)
    worst = int(np.argmax(dev))
    return [_row("oracle", dev.max() <= tol.oracle, float(dev.max()), tol.oracle,
                 at_time=float(prob.times[worst]), per_time=dev)]


def _check_residual(prob, sol, tol) -> list[dict]:
    if prob.alpha <= 1:
        return [_row("residual", True, None, tol.residual_mode, skipped="alpha = 1: no fractional derivative")]
    rows = []
    for t in prob.times:
        r = equation_residual(prob, sol, float(t))
        rows.append(_row("residual", r.mode_analytic <= tol.residual_mode and r.numeric <= tol.residual_numeric,
                         {"mode_analytic": r.mode_analytic, "numeric": r.numeric},
                         {"mode_analytic": tol.residual_mode, "numeric": tol.residual_numeric}, t=float(t)))
    return rows


def _check_initial(prob, sol, tol) -> list[dict]:
    ts = np.array([1e-1, 1e-2, 1e-3, 1e-4])
    dev = np.linalg.norm(evaluate_series(prob, ts, sol.rate_scale) - prob.f, axis=1) / np.linalg.norm(prob.f)
    decreasing = bool(np.all(np.diff(dev) < 0))
    return [_row("initial_condition", decreasing and dev[-1] <= tol.initial_condition, float(dev[-1]),
                 tol.initial_condition, times=ts, deviations=dev, decreasing=decreasing)]


def _check_beta(prob, sol, tol) -> list[dict]:
    contour = build_contour(prob.operator, prob.phi, prob.alpha, 0.1, tol=1e-12, power=8)
    rows = []
    for t in (0.1, 1.0, 10.0):
        vals = [abs(beta_k(prob.phi, prob.alpha, t, contour, k).value) for k in range(9)]
        rows.append(_row("beta_k", max(vals) <= tol.beta_k, max(vals), tol.beta_k, t=t, per_k=vals))
    return rows


def _check_regrouping(prob, sol, tol) -> list[dict]:
    base = sol.values
    devs, groups = [], []
    for kappa in (0.3, 0.5, 0.7):
        p = CauchyProblem(prob.operator, prob.phi, prob.alpha, prob.f, prob.times, prob.R, kappa, prob.tol)
        s = solve(p, force=True, audit=sol.audit, rate_scale=sol.rate_scale)
        devs.append(float(np.max(np.linalg.norm(s.values - base, axis=1) / np.linalg.norm(base, axis=1))))
        groups.append(s.annuli.groups)
    return [_row("regrouping", max(devs) <= tol.regrouping, max(devs), tol.regrouping,
                 kappas=[0.3, 0.5, 0.7], groupings=groups)]


CHECK_FUNCS = {
    "oracle": _check_oracle,
    "residual": _check_residual,
    "initial_condition": _check_initial,
    "beta_k": _check_beta,
    "regrouping": _check_regrouping,
}


def run_verify(cfg: ProblemConfig, force: bool, checks: tuple[str, ...], corrupt: bool) -> tuple[dict, int]:
    prob = cfg.build_problem()
    audit = hypothesis_audit(prob)
    rep = _base_report("verify", cfg)
    rep["audit"] = _audit_dict(audit)
    if not audit.passed and not force:
        rep["error"] = f"hypothesis audit failed: {', '.join(audit.failures())}"
        return rep, EXIT_AUDIT
    scale = CORRUPTION if corrupt else 1.0
    sol = solve(prob, force=force, audit=audit, rate_scale=scale)
    rep["corruption"] = {"injected": corrupt, "rate_scale": scale}
    rows = []
    for name in checks:
        try:
            rows.extend(CHECK_FUNCS[name](prob, sol, cfg.tolerances))
        except NumericError as e:
            rows.append(_row(name, False, None, None, error=f"{type(e).__name__}: {e}"))
    rep["checks"] = rows
    rep["passed"] = all(r["passed"] for r in rows)
    return rep, EXIT_OK if rep["passed"] else EXIT_VERIFY


# -- entry point -----------------------------------------------------------------


def _parse_checks(text: str | None) -> tuple[str, ...]:
    if not text:
        return CHECKS
    names = tuple(s.strip() for s in text.split(",") if s.strip())
    bad = [n for n in names if n not in CHECKS]
    if bad:
        raise ConfigError(f"unknown check(s) {', '.join(bad)}; choose from {', '.join(CHECKS)}")
    return names


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fraccauchy", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=("analyze", "solve", "verify"))
    p.add_argument("config", help="JSON problem configuration")
    p.add_argument("--force", action="store_true", help="run even when the hypothesis audit fails")
    p.add_argument("--checks", help=f"comma-separated subset of {','.join(CHECKS)} (verify only)")
    p.add_argument("--out", help=f"output directory (overrides ${OUT_ENV} and the config)")
    p.add_argument("--inject-corruption", action="store_true",
                   help="verify a solution whose rates are scaled by 1.01 (detector sensitivity probe)")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    started = time.perf_counter()
    report: dict = {"command": args.command}
    out = None
    try:
        cfg = load_config(args.config)
        checks = _parse_checks(args.checks)
        out = _out_dir(cfg, args.out)
        prefix = cfg.output.prefix
        if args.command == "analyze":
            report, code = analyze(cfg, out), EXIT_OK
        elif args.command == "solve":
            report, code = run_solve(cfg, out, args.force)
        else:
            report, code = run_verify(cfg, args.force, checks, args.inject_corruption)
    except ConfigError as e:
        print(f"configuration error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except AuditFailed as e:
        report["error"] = str(e)
        code = EXIT_AUDIT
    except (NumericError, FracCauchyError) as e:
        report["error"] = f"{type(e).__name__}: {e}"
        for attr in ("distance", "estimate", "trajectory", "pair", "radius", "ratios"):
            if hasattr(e, attr):
                report["offending"] = {attr: getattr(e, attr)}
        code = EXIT_NUMERIC
    if out is not None:
        write_report(out / f"{prefix}_{args.command}_report.json", report)
    status = "ok" if code == EXIT_OK else report.get("error", "verification failed")
    print(f"{args.command}: {status} (exit {code}, {time.perf_counter() - started:.2f}s)", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
