"""Command-line front end: ``bir fit | eval | props | sample``.

Exit codes: 0 success, 1 invalid input or usage, 2 a requested fit did not converge.
"""

from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys

import numpy as np

from . import __version__
from . import analytics as an
from .datasets import DataError, load_data
from .distributions import (
    BirParams,
    EIRParams,
    GRParams,
    IRParams,
    RayleighParams,
    RngSpec,
    bir_sample,
)
from .exceptions import BIRError, DomainError, MomentNonexistenceError
from .inference import fit_family

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NOT_CONVERGED = 2

FAMILY_ORDER = ("bir", "eir", "ir", "rayleigh", "gr")
DISPLAY = {"bir": "BIR", "eir": "EIR", "ir": "IR", "rayleigh": "R", "gr": "GR"}
_ALIASES = {"r": "rayleigh", "all": "all"}
_FUNCTIONS = ("pdf", "cdf", "quantile", "hazard", "survival")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


# --------------------------------------------------------------------------
# argument helpers


def _float_list(text):
    try:
        return [float(tok) for tok in text.replace(",", " ").split()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a list of numbers, got {text!r}") from None


def _grid(text):
    parts = text.replace(",", " ").split()
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("grid must be MIN,MAX,COUNT")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad grid {text!r}") from None
    if count < 1 or not hi >= lo:
        raise argparse.ArgumentTypeError("grid needs MAX >= MIN and COUNT >= 1")
    return np.linspace(lo, hi, count).tolist()


def _positive_int(text):
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _model_name(text):
    name = _ALIASES.get(text.lower(), text.lower())
    if name != "all" and name not in FAMILY_ORDER:
        raise argparse.ArgumentTypeError(
            f"unknown model {text!r}; choose from bir, eir, ir, r, gr, all"
        )
    return name


def _add_bir_params(p, required=True):
    p.add_argument("-a", type=float, required=required, help="first shape parameter")
    p.add_argument("-b", type=float, required=required, help="second shape parameter")
    p.add_argument("--theta", type=float, required=required, help="scale parameter (units of x^2)")


def _family_from_args(args):
    model = args.model
    if model == "bir":
        missing = [n for n in ("a", "b", "theta") if getattr(args, n) is None]
        if missing:
            raise UsageError(f"model bir needs {', '.join('--' + m if len(m) > 1 else '-' + m for m in missing)}")
        return BirParams(args.a, args.b, args.theta)
    if model == "ir":
        _need(args, "theta", model)
        return IRParams(args.theta)
    if model == "eir":
        _need(args, "alpha", model)
        _need(args, "theta", model)
        return EIRParams(args.alpha, args.theta)
    if model == "rayleigh":
        _need(args, "sigma", model)
        return RayleighParams(args.sigma)
    if model == "gr":
        _need(args, "alpha", model)
        _need(args, "lam", model)
        return GRParams(args.alpha, args.lam)
    raise UsageError(f"model {model!r} cannot be evaluated")


def _need(args, name, model):
    if getattr(args, name) is None:
        flag = "--lambda" if name == "lam" else f"--{name}"
        raise UsageError(f"model {model} needs {flag}")


def _emit(text, out):
    if out is None:
        sys.stdout.write(text)
        return
    try:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataError(f"cannot write {out}: {exc}") from exc


def _fmt(v, width=0):
    if v is None:
        return "n/a".rjust(width)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v).rjust(width)
    return f"{v:.6g}".rjust(width)


# --------------------------------------------------------------------------
# fit


def _fit_report_text(label, n_obs, seed, results):
    lines = [
        f"# data: {label}  n={n_obs}  seed={seed}  version={__version__}",
        f"{'Model':<6}{'-2loglik':>11}{'AIC':>11}{'BIC':>11}{'CAIC':>11}{'HQIC':>11}  converged",
    ]
    for r in results:
        c = r.criteria
        row = [_fmt(-2.0 * r.loglik, 11)]
        row += [_fmt(None if c is None else getattr(c, k), 11) for k in ("aic", "bic", "caic", "hqic")]
        lines.append(f"{DISPLAY[r.family]:<6}{''.join(row)}  {'yes' if r.converged else 'NO'}")
        est = "  ".join(f"{n}={_fmt(v)}" for n, v in zip(r.names, r.estimates))
        lines.append(f"{'':6}{est}")
        if r.std_errors is None:
            lines.append(f"{'':6}(standard errors unavailable)")
        else:
            lines.append(f"{'':6}" + "  ".join(f"({_fmt(s)})" for s in r.std_errors))
        if r.message:
            lines.append(f"{'':6}note: {r.message}")
    ranked = [r for r in results if r.converged and r.criteria is not None]
    if len(ranked) > 1:
        for key in ("aic", "bic", "caic", "hqic"):
            order = sorted(ranked, key=lambda r: getattr(r.criteria, key))
            lines.append(f"rank by {key.upper()}: " + " < ".join(DISPLAY[r.family] for r in order))
    return "\n".join(lines) + "\n"


def _ranking(results):
    ranked = [r for r in results if r.converged and r.criteria is not None]
    return {
        key: [DISPLAY[r.family] for r in sorted(ranked, key=lambda r: getattr(r.criteria, key))]
        for key in ("aic", "bic", "caic", "hqic")
    }


def cmd_fit(args):
    data = load_data(args.data)
    families = FAMILY_ORDER if args.model == "all" else (args.model,)
    results = [
        fit_family(fam, data.values, restarts=args.restarts, seed=args.seed) for fam in families
    ]
    if args.format == "json":
        doc = {
            "data": data.label,
            "n_obs": len(data),
            "seed": args.seed,
            "version": __version__,
            "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
            "fits": [r.to_dict() for r in results],
            "ranking": _ranking(results),
        }
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = _fit_report_text(data.label, len(data), args.seed, results)
    _emit(text, args.out)
    return EXIT_OK if all(r.converged for r in results) else EXIT_NOT_CONVERGED


# --------------------------------------------------------------------------
# eval


def _evaluate(fp, fn, point):
    if fn == "pdf":
        return fp.pdf(point)
    if fn == "cdf":
        return fp.cdf(point)
    if fn == "survival":
        return fp.sf(point)
    if fn == "hazard":
        return fp.hazard(point)
    return fp.quantile(point)


def cmd_eval(args):
    fp = _family_from_args(args)
    points = args.points if args.points is not None else args.grid
    if not points:
        raise UsageError("eval needs --points or --grid")
    rows, bad = [], []
    for x in points:
        try:
            rows.append((x, float(_evaluate(fp, args.fn, x))))
        except DomainError:
            bad.append(x)
    if bad:
        where = ", ".join(_fmt(v) for v in bad)
        what = "u" if args.fn == "quantile" else "x"
        raise DomainError(f"{args.fn} is undefined at {what} = {where}")
    if args.format == "json":
        doc = {
            "family": fp.family,
            "params": dict(zip(fp.names, fp.values)),
            "fn": args.fn,
            "values": [[x, v] for x, v in rows],
        }
        text = json.dumps(doc, indent=2) + "\n"
    else:
        text = "".join(f"{x!r}\t{v!r}\n" for x, v in rows)
    _emit(text, args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# props


def _try(fn, *a):
    try:
        return fn(*a), None
    except MomentNonexistenceError as exc:
        reason = str(exc).split(": ", 1)[-1]
        return None, f"does not exist ({reason})"
    except BIRError as exc:
        return None, f"unavailable ({exc})"


def _props(p, orders, alphas):
    report = {"params": {"a": p.a, "b": p.b, "theta": p.theta}}
    moments = {}
    for r in orders:
        value, why = _try(an.moment, p, r)
        moments[f"{r:g}"] = value if why is None else why
    report["moments"] = moments
    mean, why = _try(an.moment, p, 1.0)
    report["mean"] = mean if why is None else why
    report["mode"] = an.mode(p)
    shape = an.quantile_shape(p)
    report["bowley"] = shape.bowley
    report["moors"] = shape.moors
    dev, why = _try(an.mean_deviations, p)
    report["delta1"] = dev.delta1 if why is None else why
    report["delta2"] = dev.delta2 if why is None else why
    check = an.EntropyCheck(an.shannon_entropy(p), an.shannon_entropy_quad(p))
    report["shannon"] = check.series
    report["shannon_quadrature"] = check.quadrature
    report["shannon_consistent"] = bool(check.rel_diff <= 1e-6)
    renyi = {}
    for alpha in alphas:
        value, why = _try(an.renyi_entropy, p, alpha)
        renyi[f"{alpha:g}"] = value if why is None else why
    report["renyi"] = renyi
    return report


def _props_text(report):
    lines = []
    for key, value in report.items():
        if isinstance(value, dict):
            for sub, v in value.items():
                label = {"moments": f"E[X^{sub}]", "renyi": f"renyi[{sub}]", "params": sub}[key]
                lines.append(f"{label:<20}{v if isinstance(v, str) else repr(v)}")
        else:
            lines.append(f"{key:<20}{value if isinstance(value, str) else repr(value)}")
    return "\n".join(lines) + "\n"


def cmd_props(args):
    p = BirParams(args.a, args.b, args.theta)
    report = _props(p, args.moments, args.renyi)
    text = json.dumps(report, indent=2) + "\n" if args.format == "json" else _props_text(report)
    _emit(text, args.out)
    return EXIT_OK


# --------------------------------------------------------------------------
# sample


def cmd_sample(args):
    p = BirParams(args.a, args.b, args.theta)
    rng = RngSpec(seed=args.seed)
    draws = bir_sample(p, args.n, rng)
    _emit("".join(f"{float(v)!r}\n" for v in np.atleast_1d(draws)), args.out)
    dest = args.out if args.out else "stdout"
    print(f"sampled {args.n} values with seed {args.seed} ({rng.algorithm}) -> {dest}", file=sys.stderr)
    return EXIT_OK


# --------------------------------------------------------------------------


def build_parser():
    parser = _Parser(prog="bir", description="Beta inverse Rayleigh distribution toolkit.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    fmt = {"choices": ("text", "json"), "default": "text", "help": "output format"}

    fit = sub.add_parser("fit", help="fit models to data by maximum likelihood")
    fit.add_argument("--data", required=True, help="data file or builtin:guinea")
    fit.add_argument("--model", type=_model_name, default="all", help="bir, eir, ir, r, gr or all")
    fit.add_argument("--seed", type=int, default=0, help="seed for multi-start jitter (default 0)")
    fit.add_argument("--restarts", type=_positive_int, default=8)
    fit.add_argument("--format", **fmt)
    fit.add_argument("--out", help="write the report here instead of stdout")
    fit.set_defaults(handler=cmd_fit)

    ev = sub.add_parser("eval", help="evaluate pdf, cdf, quantile, hazard or survival")
    ev.add_argument("--fn", choices=_FUNCTIONS, required=True)
    ev.add_argument("--model", type=_model_name, default="bir")
    _add_bir_params(ev, required=False)
    ev.add_argument("--alpha", type=float, help="EIR or GR shape")
    ev.add_argument("--lambda", dest="lam", type=float, help="GR scale")
    ev.add_argument("--sigma", type=float, help="Rayleigh scale")
    where = ev.add_mutually_exclusive_group(required=True)
    where.add_argument("--points", type=_float_list, help="comma separated points")
    where.add_argument("--grid", type=_grid, help="MIN,MAX,COUNT")
    ev.add_argument("--format", **fmt)
    ev.add_argument("--out")
    ev.set_defaults(handler=cmd_eval)

    pr = sub.add_parser("props", help="moments, mode, shape measures and entropies")
    _add_bir_params(pr)
    pr.add_argument("--moments", type=_float_list, default=[-1.0, 0.5, 1.0, 2.0],
                    help="moment orders (default -1,0.5,1,2)")
    pr.add_argument("--renyi", type=_float_list, default=[2.0], help="Renyi orders (default 2)")
    pr.add_argument("--format", **fmt)
    pr.add_argument("--out")
    pr.set_defaults(handler=cmd_props)

    sa = sub.add_parser("sample", help="draw a seeded random sample")
    _add_bir_params(sa)
    sa.add_argument("-n", type=_positive_int, required=True, help="sample size")
    sa.add_argument("--seed", type=int, default=0, help="generator seed (default 0)")
    sa.add_argument("--out", help="output file, one value per line")
    sa.set_defaults(handler=cmd_sample)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # usage errors, --help and --version end here
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    try:
        return args.handler(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"bir: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (BIRError, ValueError) as exc:
        print(f"bir: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
