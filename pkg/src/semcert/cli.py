"""Command-line front end.

Exit codes: 0 every executed check passed, 1 a check failed (the report is
still written), 2 input error. Total variation is transport under the
mismatch indicator 1(x != y).
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import io as sio
from .diagnostics import (
    ConstantF,
    Tolerances,
    all_pairs,
    asf_profile,
    check_asf_plus,
    check_lwi,
    f_from_dict,
    fit_a1_bounds,
    fit_asf_plus_envelope,
    geometric,
    support_separation,
    uniqueness_verdict,
    verify_a1,
    verify_a2,
)
from .errors import InputError, SemcertError
from .kernel import invariant_measures, push_weights
from .metric_space import capped_lipschitz_cost, metric_cost, mismatch_cost, separating_family
from .models import build_model, gaussian_pair_grid
from .reports import Report, plain, render
from .reproduce import EXAMPLES, run_example
from .transport import kantorovich_dual_value, max_closeness, maximal_coupling, tv_distance, wasserstein

DENSE_PAIR_LIMIT = 200


# argument helpers

def _floats(text):
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text):
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None


def _ak(text):
    vals = _floats(text)
    if len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected A,K, got {text!r}")
    return tuple(vals)


def _rate(text):
    """``geometric:scale,rate``."""
    kind, _, rest = text.partition(":")
    vals = _floats(rest) if rest else []
    if kind != "geometric" or len(vals) != 2:
        raise argparse.ArgumentTypeError(f"expected geometric:scale,rate, got {text!r}")
    return geometric(*vals)


def _envelope(text):
    try:
        return ConstantF(float(text))
    except ValueError:
        pass
    try:
        return f_from_dict(json.loads(text))
    except (json.JSONDecodeError, AttributeError):
        raise argparse.ArgumentTypeError(f"expected a number or an F descriptor in JSON, got {text!r}") from None


def _tolerances(items):
    overrides = {}
    for item in items or ():
        name, sep, value = item.partition("=")
        if not sep:
            raise InputError(f"--tol expects name=value, got {item!r}")
        try:
            overrides[name] = float(value)
        except ValueError:
            raise InputError(f"--tol {name}: {value!r} is not a number") from None
    return Tolerances().replace(**overrides)


def _kernel(args):
    if args.kernel:
        return sio.load_kernel(args.kernel)
    if not args.model:
        raise InputError("give --model or --kernel")
    params = {
        "xi-chain": {"xi": args.xi, "depth": args.depth},
        "interval": {"grid_points": args.grid},
        "gaussian": {"half_width": args.half_width, "step": args.step},
    }[args.model]
    return build_model(args.model, **params)


def _state(kernel, label, field):
    if label is None:
        raise InputError(f"missing --{field}")
    try:
        return kernel.space.index(label)
    except InputError:
        raise InputError(f"--{field}: unknown state label {label!r}") from None


def _pairs(kernel, args):
    if getattr(args, "pairs", None):
        data = sio._read_json(args.pairs)
        if not isinstance(data, list):
            raise InputError("pairs file: expected a list of [x, y] label pairs")
        return [(_state(kernel, str(x), "pairs"), _state(kernel, str(y), "pairs")) for x, y in data]
    if kernel.size <= DENSE_PAIR_LIMIT:
        return all_pairs(kernel.size)
    if kernel.meta.get("model") == "gaussian":
        return gaussian_pair_grid(kernel)
    pts = np.unique(np.linspace(0, kernel.size - 1, 40).round().astype(int))
    return [(int(a), int(b)) for i, a in enumerate(pts) for b in pts[i + 1:]]


def _emit(args, report, passed):
    text = render(report, args.format)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")
        print(f"passed: {str(bool(passed)).lower()}")
        print(f"report: {args.out}")
    else:
        print(text, end="" if text.endswith("\n") else "\n")
        sys.stdout.flush()
    return 0 if passed else 1


# subcommands

def cmd_distance(args) -> int:
    kernel = _kernel(args)
    x, y = _state(kernel, args.x, "x"), _state(kernel, args.y, "y")
    n = kernel.size
    mu = push_weights(kernel, np.eye(n)[x], args.t)
    nu = push_weights(kernel, np.eye(n)[y], args.t)
    coupling = None
    if args.what == "tv":
        value = tv_distance(mu, nu)
        coupling = maximal_coupling(mu, nu)
    elif args.what == "closeness":
        if args.eps is None:
            raise InputError("missing --eps")
        value, coupling = max_closeness(mu, nu, kernel.space, args.eps)
    else:
        cost = {
            "metric": lambda: metric_cost(kernel.space),
            "mismatch": lambda: mismatch_cost(n),
            "capped": lambda: capped_lipschitz_cost(kernel.space, args.A, args.K),
            "separating": lambda: separating_family(kernel.space, args.n),
        }[args.cost]()
        if args.what == "dual":
            value = kantorovich_dual_value(mu, nu, cost)
        else:
            res = wasserstein(mu, nu, cost)
            value, coupling = res.value, res.coupling
    print(repr(float(value)))
    if args.coupling:
        if coupling is None:
            raise InputError("--coupling is not available for the dual value")
        sio.save_json(sio.coupling_to_dict(coupling.joint, kernel.space), args.coupling)
    return 0


def cmd_check(args) -> int:
    kernel = _kernel(args)
    tol = _tolerances(args.tol)
    space = kernel.space
    x0 = _state(kernel, args.x0, "x0") if getattr(args, "x0", None) else space.base_index
    what = args.what
    if what == "asf":
        x = _state(kernel, args.x, "x") if args.x else x0
        prof = asf_profile(kernel, x, args.times, args.n_list, args.radii)
        return _emit(args, Report("asf-profile", [], summary=plain(prof)), True)
    if what in ("asf-plus", "uniqueness", "separation"):
        if not args.cert:
            raise InputError("missing --cert")
        cert = sio.load_certificate(args.cert)
    if what == "asf-plus":
        rep = check_asf_plus(kernel, cert, _pairs(kernel, args), args.ak or [(1.0, 1.0)], tol)
        return _emit(args, rep, rep.passed)
    if what == "lwi":
        rep = check_lwi(kernel, args.R, args.eps, args.times, x0, tol)
        return _emit(args, rep, rep.passed)
    if what == "uniqueness":
        verdict = uniqueness_verdict(kernel, cert, dict(R=args.R, eps=args.eps, times=args.times),
                                     _pairs(kernel, args), args.ak or [(1.0, 1.0)], tol)
        return _emit(args, verdict, verdict.passed)
    if what == "separation":
        dec = invariant_measures(kernel)
        if len(dec) < 2:
            raise InputError(f"separation needs two ergodic measures; the kernel has {len(dec)}")
        if len(args.classes) != 2:
            raise InputError("--classes expects two class ids I,J")
        i, j = args.classes
        if not (0 <= i < len(dec) and 0 <= j < len(dec)) or i == j:
            raise InputError(f"--classes must name two distinct classes among 0..{len(dec) - 1}")
        res = support_separation(dec.measures[i], dec.measures[j], cert.F, cert.x0, tol)
        res_report = Report("separation", [], passed=res.passed, summary=plain(res))
        return _emit(args, res_report, res.passed)
    # a1 / a2
    if not args.provider:
        raise InputError("missing --provider")
    provider = sio.load_provider(args.provider, kernel)
    if what == "a1":
        pairs = _pairs(kernel, args)
        if args.fit != "none":
            F1, F2 = fit_a1_bounds(kernel, provider, args.r, pairs, args.times, x0, args.fit, tol)
        else:
            F1, F2 = args.F1, args.F2
        rep = verify_a1(kernel, provider, F1, F2, args.r, pairs, args.times, x0, tol)
        if args.cert_out and rep.passed:
            sio.save_json(fit_asf_plus_envelope(rep).to_dict(), args.cert_out)
        return _emit(args, rep, rep.passed)
    B = space.ball(x0, args.radius)
    rep = verify_a2(kernel, provider, B, args.eps, args.r, args.times, tol)
    return _emit(args, rep, rep.passed)


def cmd_example(args) -> int:
    rep = run_example(args.name)
    return _emit(args, rep, rep.passed)


def cmd_export(args) -> int:
    kernel = _kernel(args)
    text = json.dumps(sio.kernel_to_dict(kernel))
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0


def cmd_decompose(args) -> int:
    kernel = _kernel(args)
    text = sio.decomposition_csv(invariant_measures(kernel), kernel.space)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        print(text, end="")
        sys.stdout.flush()
    return 0


# parser

def _model_options(p):
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=("xi-chain", "interval", "gaussian"))
    g.add_argument("--kernel", help="kernel JSON file")
    g.add_argument("--xi", type=float, default=0.4)
    g.add_argument("--depth", type=int, default=40)
    g.add_argument("--grid", type=int, default=3001)
    g.add_argument("--half-width", type=float, default=8.0)
    g.add_argument("--step", type=float, default=0.01)


def _output_options(p):
    p.add_argument("--out", help="write the report here")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--tol", action="append", metavar="NAME=VALUE",
                   help="override a tolerance (asf_plus, record, marginal, lwi_positive, separation, inequality)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="semcert", description=__doc__.split("\n")[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("distance", help="transport distances between P_t(x, .) and P_t(y, .)")
    p.add_argument("what", choices=("wasserstein", "tv", "dual", "closeness"))
    _model_options(p)
    p.add_argument("--x", required=True)
    p.add_argument("--y", required=True)
    p.add_argument("--t", type=int, default=1)
    p.add_argument("--cost", choices=("metric", "mismatch", "capped", "separating"), default="metric")
    p.add_argument("--A", type=float, default=1.0)
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--n", type=int, default=1)
    p.add_argument("--eps", type=float)
    p.add_argument("--coupling", help="write the optimal coupling JSON here")
    p.set_defaults(func=cmd_distance)

    p = sub.add_parser("check", help="property checks")
    p.add_argument("what", choices=("asf", "asf-plus", "lwi", "a1", "a2", "uniqueness", "separation"))
    _model_options(p)
    _output_options(p)
    p.add_argument("--cert", help="certificate JSON")
    p.add_argument("--provider", help="coupling provider JSON")
    p.add_argument("--pairs", help="JSON list of [x, y] state-label pairs")
    p.add_argument("--ak", type=_ak, action="append", metavar="A,K")
    p.add_argument("--x0", help="base state label (default: the space's base point)")
    p.add_argument("--x", help="state label for the ASF profile")
    p.add_argument("--R", type=float, default=1.0, help="LWI ball radius")
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--times", type=_ints, default=[1])
    p.add_argument("--n-list", type=_ints, default=[1, 2, 4, 8])
    p.add_argument("--radii", type=_floats, default=[1.0])
    p.add_argument("--F1", type=_envelope, default=ConstantF(1.0))
    p.add_argument("--F2", type=_envelope, default=ConstantF(1.0))
    p.add_argument("--r", type=_rate, default=geometric(1.0, 0.5), metavar="geometric:SCALE,RATE")
    p.add_argument("--fit", choices=("none", "constant", "table"), default="none")
    p.add_argument("--cert-out", help="with a1: write the fitted ASF+ certificate here when A1 passes")
    p.add_argument("--radius", type=float, default=1.0, help="A2 ball B_radius(x0)")
    p.add_argument("--classes", type=_ints, default=[0, 1], metavar="I,J")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("example", help="reproduce every claim of a built-in example")
    p.add_argument("name", choices=EXAMPLES)
    _output_options(p)
    p.set_defaults(func=cmd_example)

    p = sub.add_parser("export", help="write a model as kernel JSON")
    _model_options(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("decompose", help="ergodic decomposition as CSV")
    _model_options(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_decompose)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"semcert: error: {exc}", file=sys.stderr)
        return 2
    except SemcertError as exc:
        print(f"semcert: solver error: {exc}", file=sys.stderr)
        return 2
    except BrokenPipeError:
        # reader went away (e.g. piped into head); silence the flush at exit
        os.dup2(os.open(os.devnull, os.O_WRONLY), sys.stdout.fileno())
        return 0


if __name__ == "__main__":
    sys.exit(main())
