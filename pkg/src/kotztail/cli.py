"""``kotztail`` command line.

Every invocation writes one JSON object holding the resolved configuration,
the library version and the result.  Exit status: 0 on success, 2 when a
validation scenario fails, 1 on errors, 64 on usage errors.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__, estimation, io, limits, validation
from .errors import KotzTailError
from .kernels import BACKEND
from .kotz import KotzModel, KotzParams, gaussian_params, induced_p, sample_kotz
from .linalg import IndexSet, factorize
from .qp import solve
from .tail import TailRequest, marginal_tail, tail_asymptotic

EXIT_OK, EXIT_ERROR, EXIT_FAILED, EXIT_USAGE = 0, 1, 2, 64
OUTPUT_DIR_ENV = "KOTZTAIL_OUTPUT_DIR"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise UsageError(message)


# ---------------------------------------------------------------------------
# argument helpers

def _add_sigma(p, required=True):
    p.add_argument("--sigma", required=required, help="correlation matrix file (CSV or JSON)")
    p.add_argument("--header", action="store_true", help="skip one header line in CSV inputs")


def _add_model(p):
    g = p.add_argument_group("radial tail parameters")
    g.add_argument("--gaussian", action="store_true", help="use the standard Gaussian parameters")
    g.add_argument("--p", type=float, help="tail constant (default: canonical induced value)")
    g.add_argument("--q", type=float)
    g.add_argument("--delta", type=float)
    g.add_argument("--N", type=float)


def _params(args, k: int) -> KotzParams:
    if args.gaussian:
        if any(getattr(args, n) is not None for n in ("p", "q", "delta", "N")):
            raise UsageError("--gaussian cannot be combined with --p/--q/--delta/--N")
        return gaussian_params(k)
    if args.q is None or args.delta is None or args.N is None:
        raise UsageError("give --gaussian or all of --q, --delta, --N")
    p = args.p if args.p is not None else induced_p(args.q, args.delta, args.N)
    return KotzParams(p=p, q=args.q, delta=args.delta, N=args.N)


def _spec(args):
    return factorize(io.read_matrix(args.sigma, args.header))


def _vec(text, args, k=None, name="vector"):
    v = io.parse_vector(text, getattr(args, "header", False))
    if k is not None and v.size != k:
        raise UsageError(f"{name} needs {k} entries, got {v.size}")
    return v


def _index_set(text, k):
    try:
        return IndexSet([int(v) for v in text.split(",") if v.strip()], k)
    except ValueError as exc:
        raise UsageError(f"bad index set {text!r}") from exc


def _resolve_output(path):
    if path is None:
        return None
    base = os.environ.get(OUTPUT_DIR_ENV)
    p = Path(path)
    if base and not p.is_absolute():
        p = Path(base) / p
    return p


# ---------------------------------------------------------------------------
# commands

def cmd_qp(args):
    spec = _spec(args)
    return solve(spec, _vec(args.a, args, spec.dim, "--a")).to_dict(), True


def cmd_tail(args):
    spec = _spec(args)
    k = spec.dim
    model = KotzModel(_params(args, k), spec)
    x = _vec(args.x, args, k, "--x") if args.x else None
    exp_ = tail_asymptotic(TailRequest(model, _vec(args.a, args, k, "--a"), x, args.t), seed=args.seed)
    log_v = exp_.log_value_at(args.t)
    out = exp_.to_dict()
    out.update({"t": args.t, "value": math.exp(log_v), "log10_value": log_v / math.log(10.0),
                "params": model.params.to_dict()})
    return out, True


def cmd_marginal_tail(args):
    params = _params(args, args.k)
    v = marginal_tail(params, args.k, args.t)
    return {"k": args.k, "t": args.t, "value": v, "log10_value": math.log10(v) if v > 0 else -math.inf,
            "params": params.to_dict()}, True


def cmd_excess(args):
    spec = _spec(args)
    k = spec.dim
    law = limits.excess_limit(spec, _vec(args.a, args, k, "--a"), seed=args.seed)
    out = law.to_dict()
    if args.x is not None:
        L = _index_set(args.L, k) if args.L else IndexSet.full(k)
        x = _vec(args.x, args, len(L), "--x")
        out.update({"L": L.tolist(), "x": x, "survivor": limits.excess_survivor(law, L, x, seed=args.seed)})
    return out, True


def cmd_profile(args):
    spec = _spec(args)
    k = spec.dim
    prof = limits.conditional_profile(spec, _vec(args.a, args, k, "--a"), _index_set(args.I, k),
                                      _params(args, k), args.t, mode=args.mode, strict=not args.lenient)
    return {"center": prof.center, "scale": prof.scale, "J": prof.law.J.tolist(),
            "cov": prof.law.cov, "mode": args.mode}, True


def cmd_hr(args):
    if (args.n is None) == (args.log_n is None):
        raise UsageError("give exactly one of --n and --log-n")
    params = _params(args, 2) if (args.gaussian or args.q is not None) else gaussian_params(2)
    a_n, b_n = limits.hr_norming(params, args.n, log_n=args.log_n)
    out = {"gamma": args.gamma, "a_n": a_n, "b_n": b_n, "params": params.to_dict(),
           "sigma": limits.hr_corr_for_gamma(args.gamma, norming=(a_n, b_n))}
    if args.x is not None or args.y is not None:
        if args.x is None or args.y is None:
            raise UsageError("--x and --y go together")
        out.update({"x": args.x, "y": args.y, "cdf": limits.hr_cdf(args.x, args.y, args.gamma)})
    return out, True


def cmd_sample(args):
    spec = _spec(args)
    model = KotzModel(_params(args, spec.dim), spec)
    path = _resolve_output(args.output)
    X = sample_kotz(model, args.n, args.seed)
    io.write_matrix_csv(path, X)
    sidecar = {"params": model.params.to_dict(), "sigma": spec.sigma, "n": args.n,
               "seed": args.seed, "version": __version__, "file": str(path)}
    io.write_json(sidecar, f"{path}.json")
    return {"file": str(path), "sidecar": f"{path}.json", "n": args.n, "seed": args.seed}, True


def _tn(text):
    if text is None or text in estimation.TN_CHOICES:
        return text
    try:
        return float(text)
    except ValueError as exc:
        raise UsageError(f"--Tn must be a number or one of {estimation.TN_CHOICES}") from exc


def cmd_estimate(args):
    data = io.read_matrix(args.sample, args.header)
    sample = estimation.SampleMatrix(data)
    fit = estimation.fit_tail(sample, args.coord, args.kn, _tn(args.Tn))
    spec = estimation.corr_estimate(sample)
    out = {"n": sample.n, "k": sample.k, "fit": fit.to_dict(), "sigma_hat": spec.sigma}
    sidecar = Path(f"{args.sample}.json")
    if sidecar.exists():
        import json

        meta = json.loads(sidecar.read_text())
        out["source"] = {"seed": meta.get("seed"), "params": meta.get("params"), "n": meta.get("n")}
    if args.t is not None:
        if args.p is None or args.N is None:
            raise UsageError("--t needs the known constants --p and --N")
        out["survivor_estimate"] = estimation.survivor_estimate(sample, args.t, args.p, args.N,
                                                                fit=fit, spec=spec)
        if args.x is not None:
            x = _vec(args.x, args, sample.k, "--x")
            out["excess_estimate"] = estimation.excess_estimate(sample, args.t, x, args.p, args.N,
                                                                fit=fit, spec=spec)
    return out, True


def cmd_validate(args):
    names = sorted(validation.SCENARIOS) if args.scenario == "all" else [args.scenario]
    if any(nm not in validation.SCENARIOS for nm in names):
        raise UsageError(f"unknown scenario; choose from {sorted(validation.SCENARIOS)} or 'all'")
    reports = []
    for nm in names:
        reports += [r.to_dict() for r in validation.run_scenario(nm, args.seed, args.n, args.workers)]
    ok = all(r["passed"] for r in reports)
    return {"reports": reports, "passed": ok}, ok


COMMANDS = {
    "qp": cmd_qp, "tail": cmd_tail, "marginal-tail": cmd_marginal_tail, "excess": cmd_excess,
    "profile": cmd_profile, "hr": cmd_hr, "sample": cmd_sample, "estimate": cmd_estimate,
    "validate": cmd_validate,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kotztail", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, help_):
        p = sub.add_parser(name, help=help_)
        p.add_argument("-o", "--output", help="write the JSON report here instead of stdout")
        p.add_argument("--seed", type=int, default=0)
        return p

    p = add("qp", "minimal index set of the quadratic program")
    _add_sigma(p)
    p.add_argument("--a", required=True)

    p = add("tail", "exact tail asymptotic of P(X > t a + x / v_t)")
    _add_sigma(p)
    _add_model(p)
    p.add_argument("--a", required=True)
    p.add_argument("--x")
    p.add_argument("--t", type=float, required=True)

    p = add("marginal-tail", "asymptotic P(X_1 > t)")
    _add_model(p)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--t", type=float, required=True)

    p = add("excess", "limit law of the scaled conditional excess")
    _add_sigma(p)
    p.add_argument("--a", required=True)
    p.add_argument("--L", help="coordinates for the survivor (default: all)")
    p.add_argument("--x", help="thresholds aligned with --L")

    p = add("profile", "centering and scale of X_J given X_I")
    _add_sigma(p)
    _add_model(p)
    p.add_argument("--a", required=True)
    p.add_argument("--I", required=True)
    p.add_argument("--t", type=float, required=True)
    p.add_argument("--mode", choices=limits.PROFILE_MODES, default="exceed")
    p.add_argument("--lenient", action="store_true", help="skip the precondition check")

    p = add("hr", "Husler-Reiss norming constants and distribution function")
    _add_model(p)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--n", type=float)
    p.add_argument("--log-n", type=float)
    p.add_argument("--x", type=float)
    p.add_argument("--y", type=float)

    p = sub.add_parser("sample", help="simulate vectors to CSV with a JSON sidecar")
    _add_sigma(p)
    _add_model(p)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="CSV destination")

    p = add("estimate", "fit the tail parameters to a CSV sample")
    p.add_argument("--sample", required=True)
    p.add_argument("--header", action="store_true")
    p.add_argument("--coord", type=int, default=1)
    p.add_argument("--kn", type=int)
    p.add_argument("--Tn")
    p.add_argument("--p", type=float)
    p.add_argument("--N", type=float)
    p.add_argument("--t", type=float)
    p.add_argument("--x")

    p = add("validate", "run Monte Carlo validation scenarios")
    p.add_argument("--scenario", required=True, help=f"one of {sorted(validation.SCENARIOS)} or 'all'")
    p.add_argument("--n", type=int, help="override the scenario's sample size")
    p.add_argument("--workers", type=int, default=1)
    return parser


def _config(args) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "command"}
    if "output" in cfg and cfg["output"] is not None:
        cfg["output"] = str(cfg["output"])
    return cfg


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError:
        return EXIT_USAGE
    try:
        result, ok = COMMANDS[args.command](args)
    except UsageError as exc:
        sys.stderr.write(f"kotztail {args.command}: usage error: {exc}\n")
        return EXIT_USAGE
    except (KotzTailError, OSError, ValueError, KeyError) as exc:
        sys.stderr.write(f"kotztail {args.command}: error: {type(exc).__name__}: {exc}\n")
        return EXIT_ERROR
    report = {"command": args.command, "version": __version__, "backend": BACKEND,
              "config": _config(args), "result": result}
    out = None if args.command == "sample" else _resolve_output(args.output)
    if out is None and args.command != "sample" and os.environ.get(OUTPUT_DIR_ENV):
        out = Path(os.environ[OUTPUT_DIR_ENV]) / f"{args.command}.json"
    io.write_json(report, out)
    return EXIT_OK if ok else EXIT_FAILED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
