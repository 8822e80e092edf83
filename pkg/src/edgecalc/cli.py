"""Command line interface: ``edgecalc run|fit|list-symbols|acceptance``."""
import argparse
import sys

from . import harness

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _cmd_run(args):
    try:
        with open(args.config, encoding="utf-8") as fh:
            cfg = harness.load_config(fh.read())
    except OSError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    try:
        out = harness.run(cfg, jobs=args.jobs)
    except harness.ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    path = args.out or cfg.output
    text = harness.rows_to_csv(out.rows)
    if path:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    print(f"{cfg.experiment}: {'PASS' if out.passed else 'FAIL'} ({out.detail})", file=sys.stderr)
    return EXIT_PASS if out.passed else EXIT_FAIL


def _cmd_fit(args):
    try:
        rows = harness.read_csv(args.input)
    except (OSError, ValueError) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    status = EXIT_PASS
    for (exp, a, b, n), slope, resid, err in harness.fit_csv(rows, args.scale):
        name = " ".join(x for x in (exp, a, b, f"N={n}") if x)
        if err:
            print(f"{name}: {err}")
            status = EXIT_FAIL
        else:
            print(f"{name}: exponent {slope:.6g} residual {resid:.6g}")
    return status


def _cmd_list(args):
    for sid, desc in harness.list_symbols().items():
        print(f"{sid:24s} {desc}")
    return EXIT_PASS


def _cmd_acceptance(args):
    from .acceptance import run_acceptance
    only = [int(c) for c in args.only.split(",")] if args.only else None
    results = run_acceptance(only, jobs=args.jobs, stream=sys.stdout)
    return EXIT_PASS if all(r.passed for r in results) else EXIT_FAIL


def build_parser():
    parser = argparse.ArgumentParser(prog="edgecalc", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run one experiment from a JSON config")
    p.add_argument("--config", required=True)
    p.add_argument("--out", default=None, help="CSV path (default: config output, else stdout)")
    p.add_argument("--jobs", type=int, default=None, help="worker processes (env EDGECALC_JOBS)")
    p.set_defaults(func=_cmd_run)

    p = sub.add_parser("fit", help="refit growth exponents of a result CSV")
    p.add_argument("--input", required=True)
    p.add_argument("--scale", choices=("bracket", "log"), default="bracket",
                   help="fit against log<param> (bracket) or log(param)")
    p.set_defaults(func=_cmd_fit)

    p = sub.add_parser("list-symbols", help="list registered symbol generators")
    p.set_defaults(func=_cmd_list)

    p = sub.add_parser("acceptance", help="run the acceptance suite")
    p.add_argument("--only", default="", help="comma separated criterion numbers")
    p.add_argument("--jobs", type=int, default=None)
    p.set_defaults(func=_cmd_acceptance)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
