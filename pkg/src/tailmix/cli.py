"""Batch command-line front end.

Every command writes one CSV whose ``#`` header lines record the full
configuration.  Nothing time- or host-dependent goes into the output, so a
rerun with the same flags reproduces the file byte for byte, whatever the
thread count.
"""

from __future__ import annotations

import argparse
import io
import logging
import math
import sys

from tailmix import __version__, fit, sim, tails
from tailmix._parallel import resolve_threads
from tailmix.copula import CopulaFamily
from tailmix.dist import INF, DomainError
from tailmix.mixing import parse_mixing

log = logging.getLogger("tailmix")

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_INPUT = 2


def parse_grid(text: str):
    """``<u_max>:<u_min>:<per_decade>`` to a decreasing log grid."""
    try:
        top, bottom, per = text.split(":")
        top, bottom, per = float(top), float(bottom), int(per)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must be u_max:u_min:per_decade, got {text!r}") from None
    if not (0 < bottom < top <= 1 and per > 0):
        raise argparse.ArgumentTypeError("grid needs 0 < u_min < u_max <= 1 and per_decade > 0")
    return tails.log_grid(top, bottom, per)


def _family(text):
    try:
        return CopulaFamily.parse(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _float_list(text):
    try:
        return tuple(INF if s.strip().lower() in ("inf", "gauss") else float(s) for s in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _threads(text):
    if text == "auto":
        return resolve_threads("auto")
    try:
        return resolve_threads(int(text))
    except ValueError:
        raise argparse.ArgumentTypeError(f"threads must be an integer or 'auto', got {text!r}") from None


def _fmt(x) -> str:
    if isinstance(x, bool):
        return str(x).lower()
    if isinstance(x, float):
        return "inf" if math.isinf(x) else f"{x:.17g}"
    return str(x)


def _header(args, extra=(), skip=()):
    """Config lines for the ``#`` header; threads are left out on purpose."""
    lines = [f"tailmix {__version__} {args.command}"]
    for key in sorted(vars(args)):
        if key in ("command", "handler", "threads", "out", "verbose", "grid_text") or key in skip:
            continue
        val = getattr(args, key)
        if key == "grid" and val is not None:
            val = args.grid_text
        lines.append(f"{key}: {val}")
    lines.extend(extra)
    return lines


def _write_rows(fh, header, columns, rows):
    for line in header:
        fh.write(f"# {line}\n")
    fh.write(",".join(columns) + "\n")
    for row in rows:
        fh.write(",".join(_fmt(v) for v in row) + "\n")


# -- commands ------------------------------------------------------------------

def cmd_tail_curve(args, fh):
    curve = tails.tail_curve(args.family, args.mix, args.grid, threads=args.threads)
    curve.write_csv(fh, _header(args))


def cmd_eta_sweep(args, fh):
    if args.curve:
        with open(args.curve) as src:
            curve = tails.TailCurve.read_csv(src)
    else:
        curve = tails.tail_curve(args.family, args.mix, args.grid, threads=args.threads)
    windows = tails.eta_windows(args.k_start, args.k_stop, args.k_step, args.width)
    estimates = tails.eta_sweep(curve, windows)
    _write_rows(fh, _header(args), ["u_lower", "eta", "chi_bar", "r2"],
                ((e.u_lower, e.eta, e.chi_bar, e.r_squared) for e in estimates))


def cmd_bias_study(args, fh):
    table = fit.bias_table(nus=args.nus, sigmas=args.sigmas, beta=args.beta, rho_bar=args.rho_bar,
                           sample_size=args.n, replicates=args.reps, u_eval=args.u, seed=args.seed,
                           path_mode=not args.iid, threads=args.threads)
    failures = sum(r.failures for r in table.rows.values())
    table.write_csv(fh, _header(args, [f"failed replicates: {failures}"]))
    if args.detail:
        with open(args.detail, "w", newline="") as det:
            table.write_detail_csv(det)


def cmd_fit(args, fh):
    sample = fit.load_sample(args.input, kind=args.input_kind)
    result = fit.fit_static_t(sample)
    if abs(result.rho_hat) >= fit.RHO_CLAMP:
        print(f"tailmix: warning: correlation estimate clamped to {result.rho_hat:g};"
              " data are (nearly) comonotone", file=sys.stderr)
    report = fit.implied_tail_report(result, args.frequency)
    extra = ["levels: " + ",".join(f"{u:.17g}" for u in report.levels)]
    _write_rows(fh, _header(args, extra),
                ["nu_hat", "rho_hat", "log_lik", "at_bound",
                 "lambda_year", "lambda_dec", "lambda_cent", "lambda"],
                [(result.nu_hat, result.rho_hat, result.log_lik, result.at_bound,
                  report.lambda_year, report.lambda_dec, report.lambda_cent, report.lambda_limit)])


def cmd_simulate(args, fh):
    sample = sim.sample_mixture(args.n, args.family, args.mix, seed=args.seed, path_mode=args.path_mode)
    sample.write_csv(fh, _header(args, skip=("seed",)))  # the sample writes its seed


def cmd_lambda(args, fh):
    limit = tails.mixture_limiting_lambda(args.family, args.mix)
    rows = [(u, tails.mixture_penultimate_lambda(u, args.family, args.mix), limit) for u in args.u]
    _write_rows(fh, _header(args), ["u", "lambda_u", "lambda"], rows)


# -- parser --------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailmix",
        description="Tail dependence of correlation mixtures of Gaussian and t copulas.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--out", default="-", help="output CSV path ('-' for stdout)")
        p.add_argument("--threads", type=_threads, default=1, help="worker processes or 'auto'")
        p.add_argument("-v", "--verbose", action="store_true")
        if seed:
            p.add_argument("--seed", type=int, default=0)

    def model(p, family="t:5", mix="point:0.5"):
        p.add_argument("--family", type=_family, default=_family(family),
                       help="'gauss' or 't:<nu>' (default %(default)s)")
        p.add_argument("--mix", type=parse_mixing, default=mix,
                       help="point:<rho> | uniform:<lo>,<hi> | scar:<beta>,<sigma>,mean=<rho_bar>"
                            " | empirical:<path> (default %(default)s)")

    p = sub.add_parser("tail-curve", help="lambda(u) of a mixture on a log grid")
    model(p)
    p.add_argument("--grid", default="1e-1:1e-10:50", help="u_max:u_min:per_decade (default %(default)s)")
    common(p, seed=False)
    p.set_defaults(handler=cmd_tail_curve)

    p = sub.add_parser("eta-sweep", help="Ledford-Tawn index over sliding windows")
    model(p, family="gauss", mix="scar:0.97,0.2,mean=0.5")
    p.add_argument("--grid", default="1e-3:1e-13:100", help="curve grid (default %(default)s)")
    p.add_argument("--curve", help="read a tail-curve CSV instead of computing one")
    p.add_argument("--k-start", type=float, default=3.0)
    p.add_argument("--k-stop", type=float, default=10.0)
    p.add_argument("--k-step", type=float, default=0.01)
    p.add_argument("--width", type=float, default=3.0, help="window width in decades")
    common(p, seed=False)
    p.set_defaults(handler=cmd_eta_sweep)

    p = sub.add_parser("bias-study", help="bias of static t-copula fits under SCAR correlation")
    p.add_argument("--nus", type=_float_list, default=(5.0, 10.0, 20.0, INF))
    p.add_argument("--sigmas", type=_float_list, default=(0.05, 0.1, 0.15, 0.2))
    p.add_argument("--beta", type=float, default=0.97)
    p.add_argument("--rho-bar", type=float, default=0.5)
    p.add_argument("--n", type=int, default=1000, help="sample size")
    p.add_argument("--reps", type=int, default=200, help="replicates per cell")
    p.add_argument("--u", type=float, default=0.01, help="level for lambda(u)")
    p.add_argument("--iid", action="store_true", help="i.i.d. stationary correlations instead of a path")
    p.add_argument("--detail", help="also write per-cell details to this CSV")
    common(p)
    p.set_defaults(handler=cmd_bias_study)

    p = sub.add_parser("fit", help="static t-copula fit with implied tail report")
    p.add_argument("input", help="two-column CSV")
    p.add_argument("--input-kind", choices=("raw", "uv"), default="raw")
    p.add_argument("--frequency", type=float, default=250, help="observations per year")
    common(p, seed=False)
    p.set_defaults(handler=cmd_fit)

    p = sub.add_parser("simulate", help="draw a sample from a mixture copula")
    model(p)
    p.add_argument("--n", type=int, default=1000)
    p.add_argument("--path-mode", action="store_true", help="use one SCAR path for the correlations")
    common(p)
    p.set_defaults(handler=cmd_simulate)

    p = sub.add_parser("lambda", help="lambda(u) and lambda at given levels")
    model(p)
    p.add_argument("--u", type=_float_list, default=(0.01,), help="comma-separated levels")
    common(p, seed=False)
    p.set_defaults(handler=cmd_lambda)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if "grid" in vars(args):
            args.grid_text = args.grid
            args.grid = parse_grid(args.grid)
    except SystemExit as exc:  # usage errors, --help, --version
        return exc.code if isinstance(exc.code, int) else EXIT_INPUT
    except (ValueError, OSError, argparse.ArgumentTypeError) as exc:
        print(f"tailmix: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="tailmix: %(levelname)s: %(message)s")

    buf = io.StringIO()
    try:
        args.handler(args, buf)
    except (fit.InputError, DomainError, tails.InsufficientDataError) as exc:
        print(f"tailmix: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (OSError, ValueError, ArithmeticError) as exc:
        print(f"tailmix: error: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    try:
        if args.out == "-":
            sys.stdout.write(buf.getvalue())
        else:
            with open(args.out, "w", newline="") as fh:
                fh.write(buf.getvalue())
    except OSError as exc:
        print(f"tailmix: cannot write output: {exc}", file=sys.stderr)
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
