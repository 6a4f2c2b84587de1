"""Command-line interface: ``rcusaddle {info,approx,rate,curve,oracle}``.

Exit codes: 0 success, 2 input error, 3 unsupported channel class,
4 numeric or bracket failure.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .asymptotics import METHODS, exact_asymptotics_approx, log_value_at_rate, rate_for_epsilon
from .channel import load_channel, singularity_report
from .errors import (
    BracketError,
    ChannelSpecError,
    ConvergenceError,
    DegenerateChannelError,
    OracleUnavailableError,
    RegimeBoundaryError,
    SingularChannelError,
)
from .exponent import critical_rate, tilting_solution
from .information import LN2, density_moments, information_density, mutual_information, psi_s, support_lattice
from .regimes import classify_solution
from .saddlepoint import saddlepoint_approx

log = logging.getLogger("rcusaddle")

EXIT_OK, EXIT_INPUT, EXIT_CHANNEL, EXIT_NUMERIC = 0, 2, 3, 4
SADDLE_METHODS = {"saddlepoint", "exact_asymptotics", "oracle_rcuss"}
ORACLE_METHODS = ("oracle_rcu", "oracle_rcus", "oracle_rcuss", "oracle_mc")
RATE_COLUMNS = ["n", "rate_bits", "method", "s", "rho_hat", "regime", "log10_value", "reason"]
EPS_COLUMNS = ["n", "method", "s", "rho_hat", "regime", "rate_bits", "reason"]


def _fmt(v):
    if v is None:
        return ""
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.12g}"
    return str(v)


def _write(rows, columns, fmt, out):
    if fmt == "json":
        payload = [{k: (None if row.get(k) in (None, "") else row.get(k)) for k in columns} for row in rows]
        text = json.dumps(payload, indent=2, default=float) + "\n"
    else:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_fmt(row.get(k)) for k in columns])
        text = buf.getvalue()
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _parse_s(value):
    if value == "auto":
        return "auto"
    try:
        s = float(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"--s must be 'auto' or a positive real, got {value!r}") from None
    if not s > 0:
        raise argparse.ArgumentTypeError("--s must be positive")
    return s


def _rate_from_args(args):
    given = [v is not None for v in (args.rate_bits, args.rate_nats, args.logM)]
    if sum(given) != 1:
        raise ChannelSpecError("exactly one of --rate-bits, --rate-nats, --logM is required")
    if args.rate_bits is not None:
        rate = args.rate_bits * LN2
    elif args.rate_nats is not None:
        rate = args.rate_nats
    else:
        rate = args.logM / args.n
    if rate < 0:
        raise ChannelSpecError("rate must be nonnegative")
    return rate


def _method_s(method, s_policy):
    # the normal approximation defaults to s = 1, everything else to auto
    if method.startswith("normal") and s_policy is None:
        return 1.0
    return "auto" if s_policy is None else s_policy


def _effective_method(method, half_log_n):
    if method == "normal" and half_log_n == "off":
        return "normal_no_half_log"
    return method


def _diagnostics(channel, rate, method, s):
    """s, rho_hat and regime at ``rate``; empty when undefined for this channel."""
    if rate < 0 or singularity_report(channel).is_singular:
        return {}
    try:
        sol = tilting_solution(channel, rate, s)
    except (DegenerateChannelError, SingularChannelError):
        return {}
    out = {"s": sol.s, "rho_hat": sol.rho_hat, "regime": str(classify_solution(channel, sol))}
    if method.startswith("normal"):
        out["rho_hat"] = None
    return out


def _evaluate_row(channel, n, rate, method, s, opts):
    if method in SADDLE_METHODS and singularity_report(channel).is_singular:
        raise SingularChannelError("singular channel: saddlepoint methods are unavailable")
    row = {"n": n, "rate_bits": rate / LN2, "rate_nats": rate, "method": method}
    if method in ("saddlepoint", "exact_asymptotics"):
        res = (saddlepoint_approx if method == "saddlepoint" else exact_asymptotics_approx)(channel, n, rate, s)
        lv = res.log_value
        row.update(prefactor=res.prefactor, exponent=res.exponent)
    else:
        lv = log_value_at_rate(channel, n, rate, method, s, **opts)
        if method == "exponent":
            row.update(prefactor=1.0, exponent=-lv / n)
    row["log10_value"] = lv / math.log(10.0)
    row.update(_diagnostics(channel, rate, method, s))
    return row


def _mc_opts(args):
    return {"samples": args.samples, "seed": args.seed, "mc_tilt": args.mc_tilt}


def cmd_info(args):
    channel = load_channel(args.channel)
    rep = singularity_report(channel)
    m1 = density_moments(information_density(channel, 1.0))
    rcr = critical_rate(channel, 0.5)
    info = {
        "input_size": channel.input_size,
        "output_size": channel.output_size,
        "I_1_nats": m1.mean,
        "I_1_bits": m1.mean / LN2,
        "U_1_nats2": m1.variance,
        "capacity_with_Q_bits": mutual_information(channel) / LN2,
        "critical_rate_s_half_bits": rcr / LN2,
        "singular": rep.is_singular,
        "Y1": sorted(rep.y1_set),
    }
    lat = support_lattice(channel, 1.0)
    info["i1_support_lattice"] = lat.is_lattice
    info["i1_support_span"] = lat.span if lat.is_lattice else None
    if rep.is_singular:
        info["psi_1"] = None
        info["I1_set_lattice"] = None
        info["notice"] = "singular: saddlepoint and exact_asymptotics methods are disabled"
    else:
        psi, lat1 = psi_s(channel, 1.0)
        info["psi_1"] = psi
        info["I1_set_lattice"] = lat1.is_lattice
        info["I1_set_span"] = lat1.span if lat1.is_lattice else None
    if args.format == "json":
        sys.stdout.write(json.dumps(info, indent=2) + "\n")
    else:
        for key, value in info.items():
            sys.stdout.write(f"{key}: {_fmt(value) if not isinstance(value, list) else value}\n")
    return EXIT_OK


APPROX_COLUMNS = ["n", "rate_bits", "rate_nats", "method", "s", "rho_hat", "regime", "log10_value",
                  "prefactor", "exponent"]


def cmd_approx(args):
    channel = load_channel(args.channel)
    rate = _rate_from_args(args)
    method = _effective_method(args.method, args.half_log_n)
    row = _evaluate_row(channel, args.n, rate, method, _method_s(method, args.s), _mc_opts(args))
    _write([row], APPROX_COLUMNS, args.format, args.out)
    return EXIT_OK


def cmd_oracle(args):
    if args.method not in ORACLE_METHODS:
        raise ChannelSpecError(f"oracle method must be one of {', '.join(ORACLE_METHODS)}")
    return cmd_approx(args)


def cmd_rate(args):
    channel = load_channel(args.channel)
    method = _effective_method(args.method, args.half_log_n)
    s = _method_s(method, args.s)
    if method in SADDLE_METHODS and singularity_report(channel).is_singular:
        raise SingularChannelError("singular channel: saddlepoint methods are unavailable")
    rate = rate_for_epsilon(channel, args.n, args.eps, method, s, **_mc_kwargs(method, args))
    row = {"n": args.n, "method": method, "rate_bits": rate / LN2, "rate_nats": rate}
    row.update(_diagnostics(channel, rate, method, s))
    _write([row], ["n", "method", "s", "rho_hat", "regime", "rate_bits", "rate_nats"], args.format, args.out)
    return EXIT_OK


def _mc_kwargs(method, args):
    return _mc_opts(args) if method.startswith("oracle") else {}


def n_grid(n_min, n_max, count, spacing):
    if n_min < 1 or n_max < n_min or count < 1:
        raise ChannelSpecError("n-grid needs 1 <= n-min <= n-max and count >= 1")
    if count == 1:
        return [int(n_min)]
    pts = np.geomspace(n_min, n_max, count) if spacing == "log" else np.linspace(n_min, n_max, count)
    return sorted({int(round(p)) for p in pts})


def _expand_methods(spec):
    names = [m.strip() for m in spec.split(",") if m.strip()]
    if names == ["all"]:
        return [m for m in METHODS if m != "oracle_mc"]
    bad = [m for m in names if m not in METHODS]
    if bad or not names:
        raise ChannelSpecError(f"unknown method(s) {bad}; choose from {', '.join(METHODS)} or 'all'")
    return sorted(set(names), key=names.index)


def _curve_point(channel, n, method, args, rate):
    s = _method_s(method, args.s)
    try:
        if method in SADDLE_METHODS and singularity_report(channel).is_singular:
            raise SingularChannelError("singular channel")
        if args.eps is not None:
            r = rate_for_epsilon(channel, n, args.eps, method, s, **_mc_kwargs(method, args))
            row = {"n": n, "method": method, "rate_bits": r / LN2}
            row.update(_diagnostics(channel, r, method, s))
        else:
            row = _evaluate_row(channel, n, rate, method, s, _mc_opts(args))
        row["reason"] = ""
        return row
    except (BracketError, ConvergenceError, OracleUnavailableError, RegimeBoundaryError,
            SingularChannelError, DegenerateChannelError) as exc:
        return {"n": n, "method": method, "rate_bits": None if args.eps is not None else rate / LN2,
                "reason": f"{type(exc).__name__}: {exc}"}


def cmd_curve(args):
    channel = load_channel(args.channel)
    methods = _expand_methods(args.methods)
    grid = n_grid(args.n_min, args.n_max, args.n_count, args.spacing)
    rate = None
    if args.eps is None:
        if args.logM is not None:
            raise ChannelSpecError("curve in rate mode takes --rate-bits or --rate-nats, not --logM")
        args.n = grid[0]
        rate = _rate_from_args(args)
    tasks = [(n, m) for n in grid for m in methods]
    with ThreadPoolExecutor(max_workers=args.workers) as pool:
        rows = list(pool.map(lambda t: _curve_point(channel, t[0], t[1], args, rate), tasks))
    rows.sort(key=lambda r: (r["n"], r["method"]))
    warnings = sum(1 for r in rows if r.get("reason"))
    if warnings:
        log.warning("%d grid point(s) failed; see the reason column", warnings)
    _write(rows, EPS_COLUMNS if args.eps is not None else RATE_COLUMNS, args.format, args.out)
    return EXIT_OK


def _add_common(p, rate=True):
    p.add_argument("--channel", required=True, help="channel file path or bsc:<delta>")
    p.add_argument("--s", type=_parse_s, default=None, help="auto or a positive real (normal defaults to 1)")
    p.add_argument("--half-log-n", choices=("on", "off"), default="on")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--out", default=None)
    p.add_argument("--seed", type=int, default=0, help="Monte-Carlo seed")
    p.add_argument("--samples", type=int, default=10_000, help="Monte-Carlo sample count")
    p.add_argument("--mc-tilt", action="store_true", help="importance-sample the Monte-Carlo oracle")
    if rate:
        p.add_argument("--rate-bits", type=float, default=None)
        p.add_argument("--rate-nats", type=float, default=None)
        p.add_argument("--logM", type=float, default=None)


def build_parser():
    parser = argparse.ArgumentParser(prog="rcusaddle", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("info", help="channel summary")
    p.add_argument("--channel", required=True)
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_info)

    for name, func, default in (("approx", cmd_approx, "saddlepoint"), ("oracle", cmd_oracle, "oracle_rcu")):
        p = sub.add_parser(name, help="evaluate one method at one (n, rate)")
        _add_common(p)
        p.add_argument("--n", type=int, required=True)
        p.add_argument("--method", choices=METHODS + ("oracle_rcus",), default=default)
        p.set_defaults(func=func)

    p = sub.add_parser("rate", help="rate needed for a target error probability")
    _add_common(p, rate=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--method", choices=METHODS + ("oracle_rcus",), default="saddlepoint")
    p.set_defaults(func=cmd_rate)

    p = sub.add_parser("curve", help="sweep an n-grid for several methods")
    _add_common(p)
    p.add_argument("--eps", type=float, default=None)
    p.add_argument("--n-min", type=int, required=True)
    p.add_argument("--n-max", type=int, required=True)
    p.add_argument("--n-count", type=int, default=11)
    p.add_argument("--spacing", choices=("linear", "log"), default="log")
    p.add_argument("--methods", default="all")
    p.add_argument("--workers", type=int, default=4)
    p.set_defaults(func=cmd_curve)
    return parser


def main(argv=None):
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if getattr(args, "n", None) is not None and args.n < 1:
            raise ChannelSpecError("--n must be a positive integer")
        if getattr(args, "eps", None) is not None and not 0 < args.eps < 1:
            raise ChannelSpecError("--eps must lie in (0, 1)")
        return args.func(args)
    except (SingularChannelError, DegenerateChannelError) as exc:
        log.error("%s", exc)
        return EXIT_CHANNEL
    except (BracketError, ConvergenceError, OracleUnavailableError, RegimeBoundaryError) as exc:
        log.error("%s", exc)
        return EXIT_NUMERIC
    except (ChannelSpecError, ValueError) as exc:
        log.error("%s", exc)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
