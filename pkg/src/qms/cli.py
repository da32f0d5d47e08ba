"""Command-line interface.

Commands: validate, analyze, compare, trajectory, pairs, ensemble.
Exit codes: 0 all checks passed; 1 a bound or invariant violation was
detected (still reported); 2 usage or parse error; 3 numerical failure.
All output is deterministic for fixed inputs and seed.
"""

from __future__ import annotations

import argparse
import math
import sys
from typing import Optional

import numpy as np

from . import serialize
from .channels import (DensityMatrix, GeneratorMap, SuperOperator,
                       maximally_mixed, validate)
from .contraction import DEFAULT_GRID, DEFAULT_RESTARTS
from .errors import (DomainError, NumericError, QmsError, SchemaError,
                     ValidationError)
from .ensembles import EnsembleConfig, sweep
from .finite_time import (continuous_trajectory_check, discrete_trajectory_check,
                          pair_chi2, pair_chi2_generator, pair_detailed_balance,
                          pair_detailed_balance_generator, pair_spectral_eq10,
                          user_pair)
from .spectral import fixed_point_analysis, spectral_quantities
from .stability import condition_numbers, fixed_point_perturbation


def _g12(x) -> str:
    if x is None:
        return "-"
    if isinstance(x, float) and math.isnan(x):
        return "-"
    return format(x, ".12g")


class _Output:
    def __init__(self, path: Optional[str]):
        self.path = path

    def write(self, text: str):
        if self.path:
            with open(self.path, "w", encoding="utf-8") as fh:
                fh.write(text)
        else:
            sys.stdout.write(text)


def _common_flags(p: argparse.ArgumentParser):
    p.add_argument("--format", default="text", choices=["text", "json", "csv"],
                   help="output format (csv only for row-oriented commands)")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="violation tolerance for slack checks")
    p.add_argument("--restarts", type=int, default=DEFAULT_RESTARTS,
                   help="multistart restarts for norm/contraction estimates")
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--grid", type=int, default=DEFAULT_GRID,
                   help="qubit grid size for the contraction oracle")
    p.add_argument("--out", default=None, help="write the report to a file")


def _load_super(path: str) -> SuperOperator:
    obj = serialize.load_channel(path)
    if isinstance(obj, GeneratorMap):
        raise ValidationError(
            f"{path}: expected a channel representation, got a generator")
    return obj


def _parse_pair_spec(spec: str):
    if spec in ("auto-chi2", "auto-db"):
        return spec, None
    if spec.startswith("auto-eq10:"):
        try:
            return "auto-eq10", float(spec.split(":", 1)[1])
        except ValueError:
            raise ValidationError(f"--pair: cannot parse mu in {spec!r}")
    parts = spec.split(":")
    if len(parts) == 2:
        try:
            return "user", (float(parts[0]), float(parts[1]))
        except ValueError:
            pass
    raise ValidationError(
        f"--pair: expected auto-chi2 | auto-db | auto-eq10:MU | K:MU, got {spec!r}")


def _resolve_state(spec: str, dim: int) -> DensityMatrix:
    if spec == "maximally-mixed":
        return maximally_mixed(dim)
    if spec.startswith("file:"):
        rho = serialize.load_state(spec[5:])
        if rho.dim != dim:
            raise ValidationError(
                f"state has dim {rho.dim}, expected {dim}")
        return rho
    raise ValidationError(
        f"--state: expected maximally-mixed or file:PATH, got {spec!r}")


def _eigs_to_lists(w: np.ndarray) -> list:
    return [[float(z.real), float(z.imag)] for z in w]


# ---------------------------------------------------------------------------
# commands


def _cmd_validate(args) -> int:
    t = _load_super(args.input)
    report = validate(t, n_samples=args.samples, seed=args.seed)
    doc = {"input": args.input, "dim": t.dim, "label": t.label,
           "validation": report.to_dict()}
    if args.format == "json":
        text = serialize.dumps_json(doc)
    elif args.format == "text":
        lines = [f"validation of {args.input} (dim {t.dim})"]
        for key, val in sorted(report.to_dict().items()):
            if key == "positivity_witness":
                continue
            shown = _g12(val) if isinstance(val, float) else val
            lines.append(f"  {key}: {shown}")
        text = "\n".join(lines) + "\n"
    else:
        raise ValidationError("validate does not produce csv output")
    _Output(args.out).write(text)
    ok = (report.trace_preserving and report.completely_positive
          and report.positivity == "no_counterexample")
    return 0 if ok else 1


def _analysis_doc(t: SuperOperator, args) -> tuple[dict, int]:
    spec = spectral_quantities(t)
    report = condition_numbers(t, restarts=args.restarts, seed=args.seed,
                               grid=args.grid)
    tau_t = report.tau_t
    doc = {
        "dim": t.dim,
        "label": t.label,
        "spectrum": {
            "eigenvalues": _eigs_to_lists(spec.eigenvalues),
            "min_dist_to_one": spec.min_dist_to_one if math.isfinite(
                spec.min_dist_to_one) else None,
            "spectral_gap": spec.spectral_gap if math.isfinite(
                spec.spectral_gap) else None,
            "subdominant_modulus": spec.subdominant_modulus,
            "peripheral_count": spec.peripheral_count,
            "one_group_multiplicity": spec.one_group_multiplicity,
        },
        "tau": tau_t.to_dict(),
        "condition_numbers": {
            "kappa_tau_z": report.kappa_tau_z.to_dict(),
            "kappa_contraction": (None if report.kappa_contraction is None
                                  else (report.kappa_contraction
                                        if math.isfinite(report.kappa_contraction)
                                        else "inf")),
            "kappa_contraction_reason": report.kappa_contraction_reason,
            "spectral_lower": report.spectral_lower,
            "spectral_upper": (report.spectral_upper
                               if math.isfinite(report.spectral_upper) else "inf"),
            "peripheral_spectrum": report.peripheral_spectrum,
            "unique_stationary": report.unique_stationary,
        },
    }
    violations = 0
    kz = report.kappa_tau_z.value
    if math.isfinite(report.spectral_upper) and kz > report.spectral_upper + args.tol:
        violations += 1
    if t.dim == 2:
        # the qubit oracle is tight, so the lower bound is checkable
        if report.spectral_lower > kz + args.tol:
            violations += 1
        if (report.kappa_contraction is not None
                and math.isfinite(report.kappa_contraction)
                and kz > report.kappa_contraction + args.tol):
            violations += 1
    doc["violations"] = violations
    return doc, (1 if violations else 0)


def _cmd_analyze(args) -> int:
    t = _load_super(args.input)
    doc, code = _analysis_doc(t, args)
    doc["input"] = args.input
    if args.format == "json":
        text = serialize.dumps_json(doc)
    elif args.format == "text":
        lines = [f"analysis of {args.input} (dim {t.dim})"]
        sp = doc["spectrum"]
        lines.append("  eigenvalues: " + ", ".join(
            f"{_g12(re)}{'+' if im >= 0 else ''}{_g12(im)}j" for re, im in sp["eigenvalues"]))
        for key in ("min_dist_to_one", "spectral_gap", "subdominant_modulus"):
            lines.append(f"  {key}: {_g12(sp[key]) if sp[key] is not None else 'inf'}")
        lines.append(f"  tau(T): {_g12(doc['tau']['value'])}")
        cn = doc["condition_numbers"]
        lines.append(f"  kappa = tau(Z): {_g12(cn['kappa_tau_z']['value'])}")
        kc = cn["kappa_contraction"]
        lines.append(f"  (1 - tau(T))^-1: "
                     f"{kc if isinstance(kc, str) else _g12(kc)}"
                     + (f"  [{cn['kappa_contraction_reason']}]"
                        if cn["kappa_contraction_reason"] else ""))
        lines.append(f"  spectral lower: {_g12(cn['spectral_lower'])}")
        su = cn["spectral_upper"]
        lines.append(f"  spectral upper: {su if isinstance(su, str) else _g12(su)}")
        lines.append(f"  violations: {doc['violations']}")
        text = "\n".join(lines) + "\n"
    else:
        raise ValidationError("analyze does not produce csv output")
    _Output(args.out).write(text)
    return code


def _cmd_compare(args) -> int:
    t1 = _load_super(args.input1)
    t2 = _load_super(args.input2)
    if t1.dim != t2.dim:
        raise ValidationError(f"dims differ: {t1.dim} vs {t2.dim}")
    requested = _resolve_state(args.state, t2.dim)
    # project the requested state onto the stationary subspace of T2 so the
    # comparison is made at an actual fixed point
    analysis2 = fixed_point_analysis(t2)
    m = analysis2.projector.apply(requested.matrix)
    m = (m + m.conj().T) / 2
    rho2 = DensityMatrix(t2.dim, m / np.trace(m).real)
    projection_shift = float(np.linalg.norm(rho2.matrix - requested.matrix))

    outcome = fixed_point_perturbation(t1, t2, rho2, restarts=args.restarts,
                                       seed=args.seed, grid=args.grid)
    doc = {"input1": args.input1, "input2": args.input2,
           "state": args.state, "projection_shift": projection_shift,
           "result": outcome.to_dict()}
    violation = (outcome.bound_value - outcome.actual_distance < -args.tol
                 or outcome.identity_residual > 1e-8)
    if args.format == "json":
        text = serialize.dumps_json(doc)
    elif args.format == "text":
        r = outcome
        lines = [f"fixed-point perturbation: {args.input1} vs {args.input2}",
                 f"  actual distance ||rho1 - rho2||_1: {_g12(r.actual_distance)}",
                 f"  bound kappa * ||T1 - T2||: {_g12(r.bound_value)}",
                 f"  slack: {_g12(r.bound_value - r.actual_distance)}",
                 f"  identity residual: {_g12(r.identity_residual)}"]
        for name, val in sorted(r.bounds.items()):
            lines.append(f"  bound[{name}]: {_g12(val)}")
        text = "\n".join(lines) + "\n"
    else:
        raise ValidationError("compare does not produce csv output")
    _Output(args.out).write(text)
    return 1 if violation else 0


def _derive_pair(kind: str, spec: str, t_or_gen, steps: int, t_max: float,
                 seed: int):
    mode, extra = _parse_pair_spec(spec)
    if kind == "discrete":
        if mode == "auto-chi2":
            return pair_chi2(t_or_gen, n_check=steps, seed=seed)
        if mode == "auto-db":
            return pair_detailed_balance(t_or_gen, n_check=steps, seed=seed)
        if mode == "auto-eq10":
            return pair_spectral_eq10(t_or_gen, extra, n_check=steps, seed=seed)
        return user_pair(extra[0], extra[1], "discrete")
    if mode == "auto-chi2":
        return pair_chi2_generator(t_or_gen, t_max=t_max, samples=steps, seed=seed)
    if mode == "auto-db":
        return pair_detailed_balance_generator(t_or_gen, t_max=t_max,
                                               samples=steps, seed=seed)
    if mode == "auto-eq10":
        raise ValidationError("--pair auto-eq10 applies to discrete chains only")
    return user_pair(extra[0], extra[1], "continuous")


def _emit_reports(reports, args, header: dict) -> int:
    bad = [r for r in reports if (not math.isnan(r.slack)) and r.slack < -args.tol]
    errors = [r for r in reports if r.regime == "error"]
    if args.format == "csv":
        text = serialize.reports_to_csv(reports)
    elif args.format == "json":
        doc = dict(header)
        doc["rows"] = [serialize.report_to_dict(r) for r in reports]
        doc["violations"] = len(bad)
        text = serialize.dumps_json(doc)
    else:
        lines = [", ".join(f"{k}={v}" for k, v in header.items())]
        lines.append(f"{'n_or_t':>10} {'exact':>18} {'bound':>18} {'slack':>18} regime")
        for r in reports:
            lines.append(f"{_g12(r.n_or_t):>10} {_g12(r.exact):>18} "
                         f"{_g12(r.bound):>18} {_g12(r.slack):>18} {r.regime}"
                         + (f"  {r.error}" if r.error else ""))
        lines.append(f"violations: {len(bad)}")
        text = "\n".join(lines) + "\n"
    _Output(args.out).write(text)
    if bad:
        return 1
    if errors:
        return 3
    return 0


def _cmd_trajectory(args) -> int:
    obj_t = serialize.load_channel(args.input1)
    obj_e = serialize.load_channel(args.input2)
    continuous = isinstance(obj_t, GeneratorMap)
    if continuous != isinstance(obj_e, GeneratorMap):
        raise ValidationError(
            "trajectory inputs must both be channels or both generators")
    dim = obj_t.dim
    rho0 = _resolve_state(args.state, dim)
    if continuous:
        pair = _derive_pair("continuous", args.pair, obj_t, args.steps,
                            args.t_max, args.seed)
        reports = continuous_trajectory_check(
            obj_t, obj_e, rho0, rho0, args.t_max, args.steps, pair,
            restarts=args.restarts, seed=args.seed, tol=args.tol, strict=False)
    else:
        pair = _derive_pair("discrete", args.pair, obj_t, args.steps,
                            args.t_max, args.seed)
        reports = discrete_trajectory_check(
            obj_t, obj_e, rho0, rho0, args.steps, pair,
            restarts=args.restarts, seed=args.seed, tol=args.tol, strict=False)
    header = {"command": "trajectory", "mode": "continuous" if continuous
              else "discrete", "pair": args.pair, "K": _g12(pair.K),
              "rate": _g12(pair.rate)}
    return _emit_reports(reports, args, header)


def _cmd_pairs(args) -> int:
    t = _load_super(args.input)
    results: dict[str, object] = {}
    exit_code = 0
    spec = spectral_quantities(t)
    default_mu = (args.mu if args.mu is not None
                  else (1.0 + spec.subdominant_modulus) / 2.0)
    recipes = {
        "chi2": lambda: pair_chi2(t, n_check=args.steps, seed=args.seed),
        "detailed_balance": lambda: pair_detailed_balance(
            t, n_check=args.steps, seed=args.seed),
        "spectral_eq10": lambda: pair_spectral_eq10(
            t, default_mu, n_check=args.steps, seed=args.seed),
    }
    for name, make in recipes.items():
        try:
            pair = make()
            results[name] = pair.to_dict()
            if not pair.valid:
                exit_code = 1
        except QmsError as exc:
            results[name] = {"error": f"{type(exc).__name__}: {exc}"}
    doc = {"input": args.input, "dim": t.dim, "mu_for_eq10": default_mu,
           "pairs": results}
    if args.format == "json":
        text = serialize.dumps_json(doc)
    elif args.format == "text":
        lines = [f"convergence pairs for {args.input}"]
        for name, val in results.items():
            if "error" in val:
                lines.append(f"  {name}: {val['error']}")
            else:
                lines.append(f"  {name}: K={_g12(val['K'])} rate={_g12(val['rate'])} "
                             f"valid={val['valid']} checked_to={_g12(val['validity_checked_to'])}")
        text = "\n".join(lines) + "\n"
    else:
        raise ValidationError("pairs does not produce csv output")
    _Output(args.out).write(text)
    return exit_code


def _cmd_ensemble(args) -> int:
    config = EnsembleConfig(dim=args.dim, count=args.count,
                            master_seed=args.seed, kraus_rank=args.kraus_rank,
                            perturbation_eps=args.eps, mode=args.mode)
    reports = sweep(config, steps=args.steps, restarts=args.restarts,
                    t_max=args.t_max)
    header = {"command": "ensemble", "dim": args.dim, "count": args.count,
              "mode": args.mode, "eps": _g12(args.eps), "seed": args.seed}
    return _emit_reports(reports, args, header)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qms",
        description="Perturbation and condition-number bounds for fixed "
                    "points of quantum Markov processes.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="structural checks on a channel file")
    p.add_argument("input")
    p.add_argument("--samples", type=int, default=1000,
                   help="Haar samples for the positivity search")
    _common_flags(p)
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("analyze", help="spectrum, tau and condition numbers")
    p.add_argument("input")
    _common_flags(p)
    p.set_defaults(func=_cmd_analyze)

    p = sub.add_parser("compare", help="fixed-point perturbation bound for two channels")
    p.add_argument("input1")
    p.add_argument("input2")
    p.add_argument("--state", default="maximally-mixed",
                   help="maximally-mixed or file:PATH; projected onto the "
                        "stationary subspace of the second channel")
    _common_flags(p)
    p.set_defaults(func=_cmd_compare)

    p = sub.add_parser("trajectory", help="finite-time bound along simulated evolutions")
    p.add_argument("input1", help="reference channel or generator")
    p.add_argument("input2", help="perturbed channel or generator")
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--t-max", type=float, default=10.0, dest="t_max")
    p.add_argument("--pair", default="auto-chi2",
                   help="auto-chi2 | auto-db | auto-eq10:MU | K:MU")
    p.add_argument("--state", default="maximally-mixed")
    _common_flags(p)
    p.set_defaults(func=_cmd_trajectory)

    p = sub.add_parser("pairs", help="derive exponential convergence pairs")
    p.add_argument("input")
    p.add_argument("--steps", type=int, default=50,
                   help="empirical validation horizon")
    p.add_argument("--mu", type=float, default=None,
                   help="decay rate for the spectral recipe "
                        "(default: halfway between subdominant modulus and 1)")
    _common_flags(p)
    p.set_defaults(func=_cmd_pairs)

    p = sub.add_parser("ensemble", help="random sweep with bound records")
    p.add_argument("--dim", type=int, default=2)
    p.add_argument("--count", type=int, default=10)
    p.add_argument("--eps", type=float, default=1e-2)
    p.add_argument("--kraus-rank", type=int, default=None, dest="kraus_rank")
    p.add_argument("--mode", default="discrete", choices=["discrete", "continuous"])
    p.add_argument("--steps", type=int, default=50)
    p.add_argument("--t-max", type=float, default=10.0, dest="t_max")
    _common_flags(p)
    p.set_defaults(func=_cmd_ensemble)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (SchemaError, ValidationError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
