"""``fracsylv`` command-line interface.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 self-test failure.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor

from .core import build_time_grid
from .exceptions import ConfigurationError, NumericalError
from .expr import EvaluationError

EXIT_OK, EXIT_CONFIG, EXIT_NUMERICAL, EXIT_SELFTEST = 0, 2, 3, 4


def _int_token(tok: str) -> int:
    tok = tok.strip()
    if "^" in tok:
        base, _, exp = tok.partition("^")
        return int(base) ** int(exp)
    return int(tok)


def _int_list(text: str) -> list[int]:
    try:
        return [_int_token(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers (2^k allowed), got {text!r}")


def _float_list(text: str) -> list[float]:
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def _emit(text: str, out: str | None) -> None:
    if out is None:
        return
    if out == "-":
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _cmd_caputo_study(args) -> int:
    from .study import run_caputo_study, test_function, write_study_csv

    alphas = args.alphas or [args.alpha]
    methods = args.method.split(",")
    tf = test_function(args.function, args.exact)
    res = run_caputo_study(alphas, args.ns, args.tf, tf, methods, threads=args.threads)
    if args.out != "-":
        print(f"{'alpha':>6} {'N':>8} {'method':>10} {'max_error':>12} {'runtime_s':>10}")
        for r in res.rows:
            print(f"{r.alpha:6.3f} {r.N:8d} {r.method:>10} {r.max_error:12.4e} {r.runtime_s:10.4f}")
        for (a, m), (slope, _, rho) in sorted(res.fits.items()):
            order = (2 - a) if m in ("linear", "star") else (3 - a)
            print(f"fit alpha={a:g} method={m}: slope {slope:.4f} (expected {-order:.2f}), rho {rho:.8f}")
    _emit(write_study_csv(res), args.out)
    return EXIT_OK


def _cmd_speed_bench(args) -> int:
    from .study import run_speed_benchmark, write_study_csv

    res = run_speed_benchmark(args.alpha, args.ns, args.tf)
    if args.out != "-":
        for N, info in sorted(res.extra.items()):
            print(f"N = {N:8d}: speedup {info['speedup']:7.1f}x, scaled difference {info['scaled_diff']:.2e}")
    _emit(write_study_csv(res), args.out)
    return EXIT_OK


def _cmd_solve(args) -> int:
    from .study import run_pde_case, write_pde_csv

    case = args.config or args.case
    if case is None:
        raise ConfigurationError("give a built-in case (edp1, edp2, edp3) or --config PATH")
    alphas = args.alphas or [args.alpha]

    def one(a):
        return run_pde_case(case, alpha=a, N_t=args.nt, nx=args.nx, hermite_scale=args.hermite_scale)

    if args.threads > 1 and len(alphas) > 1:
        with ThreadPoolExecutor(max_workers=args.threads) as pool:
            reports = list(pool.map(one, alphas))
    else:
        reports = [one(a) for a in alphas]
    if args.out != "-":
        for r in reports:
            extra = f", hermite scale {r.hermite_scale:g}" if r.hermite_scale is not None else ""
            print(
                f"{r.case}: alpha={r.alpha:g}, N_t={r.nt}, N_x={r.nx}{extra}: sup error {r.sup_error:.4e}, "
                f"Sylvester residual {r.sylvester_residual:.2e}, boundary residuals "
                f"{r.boundary_residual_a:.2e}/{r.boundary_residual_b:.2e}, {r.runtime_s:.2f} s"
            )
    _emit(write_pde_csv(reports), args.out)
    return EXIT_OK


def _cmd_opmatrix_dump(args) -> int:
    from .opmatrix import build_operational_matrix

    if args.n is None:
        raise ConfigurationError("--n is required")
    try:
        op = build_operational_matrix(args.alpha, build_time_grid(args.tf, args.n), form=args.form)
    except ValueError as exc:
        raise ConfigurationError(str(exc)) from exc
    if args.out is None or args.out == "-":
        import csv

        csv.writer(sys.stdout, lineterminator="\n").writerows(op.M.tolist())
    else:
        op.to_csv(args.out)
        print(f"wrote {op.M.shape[0]}x{op.M.shape[1]} matrix to {args.out}")
    return EXIT_OK


def _self_test() -> int:
    from .acceptance import run_all

    results = run_all(print)
    failed = [r.number for r in results if not r.passed]
    print(f"{len(results) - len(failed)}/{len(results)} criteria passed"
          + (f"; failed: {', '.join(map(str, failed))}" if failed else ""))
    return EXIT_SELFTEST if failed else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="fracsylv", description="Caputo quadrature and fractional PDE solver.")
    p.add_argument("--self-test", action="store_true", help="run the reproduction checks and exit")
    sub = p.add_subparsers(dest="command")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--alpha", type=float, default=None)
    common.add_argument("--alphas", type=_float_list, default=None)
    common.add_argument("--tf", type=float, default=1.2)
    common.add_argument("--out", default=None, help="CSV path, or '-' for CSV on stdout")
    common.add_argument("--threads", type=int, default=1)

    s = sub.add_parser("caputo-study", parents=[common], help="error study with slope fits")
    s.add_argument("--ns", type=_int_list, default=[2**k for k in range(8, 12)])
    s.add_argument("--method", default="quadratic", help="comma list of linear,quadratic,star,fft")
    s.add_argument("--function", default="exp2t", help="exp2t, monomial:<beta> or an expression in t")
    s.add_argument("--exact", default=None, help="exact Caputo derivative expression (for --function expressions)")
    s.set_defaults(func=_cmd_caputo_study, alpha_default=0.17)

    s = sub.add_parser("speed-bench", parents=[common], help="direct vs FFT timings")
    s.add_argument("--ns", type=_int_list, default=[2**10, 2**14, 2**17])
    s.set_defaults(func=_cmd_speed_bench, alpha_default=0.17)

    s = sub.add_parser("solve", parents=[common], help="solve a built-in case or a config file")
    s.add_argument("case", nargs="?", choices=["edp1", "edp2", "edp3"])
    s.add_argument("--config", default=None)
    s.add_argument("--nt", type=int, default=None)
    s.add_argument("--nx", type=int, default=None)
    s.add_argument("--hermite-scale", type=float, default=None)
    s.set_defaults(func=_cmd_solve, alpha_default=None)

    s = sub.add_parser("opmatrix-dump", parents=[common], help="write the operational matrix as CSV")
    s.add_argument("--n", type=int, default=None)
    s.add_argument("--form", choices=["stable", "literal"], default="stable")
    s.set_defaults(func=_cmd_opmatrix_dump, alpha_default=0.5)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.self_test:
        return _self_test()
    if args.command is None:
        parser.print_help()
        return EXIT_CONFIG
    if args.alpha is None:
        args.alpha = args.alpha_default
    if args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigurationError, EvaluationError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
