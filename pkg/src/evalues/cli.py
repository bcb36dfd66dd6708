"""Command-line front end: ``evalues <subcommand> [options] values...``.

Values are given inline, separated by spaces, commas or newlines; ``-`` reads
them from standard input and ``--input PATH`` from a file.  Exit status is 0
on success, 1 when ``validate`` finds a violation and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import math
import re
import sys
from functools import partial
from typing import Callable, Sequence, TextIO

from . import calibration, cross_merging, e_merging, multiple_testing, oracle, p_merging
from . import simulation

__all__ = ["main", "read_values", "UsageError"]


class UsageError(Exception):
    """Bad input or options; reported on stderr with exit status 2."""


def read_values(tokens: Sequence[str], input_path: str | None = None,
                stdin: TextIO | None = None) -> list[float]:
    """Parse numbers from inline tokens, a file, or standard input (token ``-``).

    Order is preserved.  Raises :class:`UsageError` naming the first bad token
    and its 1-based position, or when there are no values at all.
    """
    if input_path is not None:
        if tokens:
            raise UsageError("give values either inline or with --input, not both")
        try:
            with open(input_path) as fh:
                text = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {input_path}: {exc.strerror}") from None
    elif list(tokens) == ["-"]:
        text = (stdin or sys.stdin).read()
    else:
        text = " ".join(tokens)
    values = []
    for position, token in enumerate((t for t in re.split(r"[\s,]+", text) if t), start=1):
        try:
            x = float(token)
        except ValueError:
            raise UsageError(f"not a number: {token!r} (value {position})") from None
        if math.isnan(x):
            raise UsageError(f"not a number: {token!r} (value {position})")
        values.append(x)
    if not values:
        raise UsageError("no input values")
    return values


def _scalar(x: float) -> str:
    # shortest text that reads back as the same double
    return repr(float(x))


def _vector(xs: Sequence[float]) -> str:
    out = []
    for x in xs:
        s = repr(float(x))
        out.append(s[:-2] if s.endswith(".0") else s)
    return " ".join(out)


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(t) for t in re.split(r"[\s,]+", text.strip()) if t]
    except ValueError:
        raise UsageError(f"{what} must be a comma-separated list of numbers") from None


def _need(value, flag: str, method: str):
    if value is None:
        raise UsageError(f"--method {method} needs {flag}")
    return value


def _int(value: float | None, flag: str, method: str) -> int:
    value = _need(value, flag, method)
    if int(value) != value:
        raise UsageError(f"{flag} must be an integer")
    return int(value)


def _calibrator(text: str) -> calibration.CalibratorSpec:
    kind, _, kappa = text.partition(":")
    return calibration.CalibratorSpec(kind, float(kappa) if kappa else None)


# ---- subcommands -----------------------------------------------------------

CALIBRATORS = ("power", "integrated", "h", "f", "vs")


def _cmd_calibrate(args, values) -> int:
    m = args.method
    if m == "integrated":
        f = calibration.calibrate_integrated
    elif m == "vs":
        f = calibration.vs_bound
    else:
        kappa = _need(args.kappa, "--kappa", m)
        g = {"power": calibration.calibrate_power, "h": calibration.calibrate_h,
             "f": calibration.calibrate_f_kappa}[m]

        def f(p):
            return g(p, kappa)
    for p in values:
        print(_scalar(f(p)))
    return 0


def _cmd_e2p(args, values) -> int:
    for e in values:
        print(_scalar(calibration.e_to_p(e)))
    return 0


E_METHODS = ("average", "mixture", "u", "u-mixture", "product", "ruger", "e-simes", "m-family")


def _e_function(args) -> tuple[Callable[..., float], tuple]:
    """The e-merging function named by ``--method`` and its leading parameters."""
    m = args.method
    if m == "mixture":
        return e_merging.convex_mixture, (_need(args.lam, "--lambda", m),)
    if m == "u":
        return e_merging.u_statistic, (_int(args.k, "--k", m),)
    if m == "u-mixture":
        return e_merging.u_mixture, (_floats(_need(args.weights, "--weights", m), "--weights"),)
    if m == "ruger":
        return e_merging.ruger_e, (_int(args.k, "--k", m),)
    if m == "m-family":
        return e_merging.m_family_e, (_need(args.r, "--r", m),)
    return {"average": e_merging.arithmetic_mean, "product": e_merging.product,
            "e-simes": e_merging.e_simes}[m], ()


def _e_merger(args) -> Callable[[list[float]], float]:
    func, params = _e_function(args)
    return partial(func, *params)


def _cmd_merge_e(args, values) -> int:
    print(_scalar(_e_merger(args)(values)))
    return 0


P_METHODS = ("bonferroni", "ruger", "simes", "fisher", "maximum")


def _cmd_merge_p(args, values) -> int:
    m = args.method
    if m == "ruger":
        result = p_merging.ruger_p(_int(args.k, "--k", m), values)
    else:
        result = getattr(p_merging, m)(values)
    print(_scalar(result))
    return 0


CROSS_METHODS = ("e-to-p", "p-to-e", "p-to-e-mixture", "ville")


def _cmd_cross(args, values) -> int:
    m = args.method
    if m == "e-to-p":
        result = cross_merging.e_to_p_merge(values)
    elif m == "p-to-e":
        result = cross_merging.p_to_e_merge(_need(args.kappa, "--kappa", m), values)
    elif m == "p-to-e-mixture":
        weights = _floats(_need(args.weights, "--weights", m), "--weights")
        specs = [_calibrator(t) for t in _need(args.calibrators, "--calibrators", m).split(",")]
        result = cross_merging.p_to_e_mixture(weights, specs, values)
    else:
        result = cross_merging.ville_se_to_p(values)
    print(_scalar(result))
    return 0


ADJUST_METHODS = ("average", "product", "product-literal", "holm", "hommel")


def _cmd_adjust(args, values) -> int:
    m = args.method
    if m == "average":
        result = multiple_testing.adjust_e_average(values)
    elif m == "product":
        result = multiple_testing.adjust_e_product(values)
    elif m == "product-literal":
        result = multiple_testing.adjust_e_product(values, literal=True)
    elif m == "holm":
        result = multiple_testing.holm_adjust(values)
    else:
        result = multiple_testing.hommel_adjust(values)
    print(_vector(result.adjusted))
    return 0


FACT_METHODS = ("bonferroni", "simes", "fisher", "maximum")


def _cmd_fact(args, values) -> int:
    if args.method == "fisher":
        result = multiple_testing.fact_fisher(values)
    else:
        result = multiple_testing.fact_generic(getattr(p_merging, args.method), values)
    print(_vector(result.adjusted))
    return 0


def _cmd_validate(args) -> int:
    base = _e_merger(args)

    def merge(e):
        return args.scale * base(e) if args.scale != 1.0 else base(e)

    if args.merge_class:
        merge_class = args.merge_class
    else:
        func, params = _e_function(args)
        merge_class = e_merging.merge_class_of(func, *params).value
    dims = [int(d) for d in _floats(args.dims, "--dims")]
    report = oracle.check_e_merging_validity(merge, merge_class, args.trials, args.seed or 0, dims)
    if report.passed:
        print(f"pass class={merge_class} laws={report.trials} worst={_scalar(report.worst)}")
        return 0
    print(f"fail class={merge_class} laws={report.trials} "
          f"expectation={_scalar(report.witness_expectation)}")
    print("probability,values")
    for row, q in zip(report.witness.support, report.witness.probs):
        print(f"{_scalar(q)},{_vector(row)}")
    return 1


def _methods(text: str | None) -> list[str] | None:
    if text is None:
        return None
    return [t for t in re.split(r"[\s,]+", text) if t]


def _cmd_simulate(args) -> int:
    seed_base = args.seed or 0
    methods = _methods(args.method)
    if args.experiment == "combining":
        kw = {}
        if methods:
            kw["methods"] = tuple(methods)
        cfg = simulation.CombiningConfig(
            delta=-0.1 if args.delta is None else args.delta,
            n_obs=args.n_obs, n_seeds=args.seeds,
            fraction_alternative=args.fraction_alt, **kw)
        results = simulation.run_combining_experiment(cfg, seed_base)
    else:
        kw = {}
        if methods:
            kw["methods"] = tuple(methods)
        cfg = simulation.MultipleConfig(
            n_hypotheses=args.n_hypotheses, n_false=args.n_false,
            delta=-4.0 if args.delta is None else args.delta,
            n_seeds=args.seeds, **kw)
        results = simulation.run_multiple_experiment(cfg, seed_base)
    if args.out:
        simulation.write_csv(results, args.out)
    else:
        sys.stdout.write(simulation.format_csv(results))
    return 0


def _cmd_jeffreys(args, values) -> int:
    for e in values:
        print(calibration.jeffreys_category(e))
    return 0


# ---- parser ----------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse exits 2 by default; keep that, drop the traceback
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _values_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("values", nargs="*", help="numbers, or - to read standard input")
    p.add_argument("--input", metavar="PATH", help="read the numbers from a file")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="evalues", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("calibrate", help="turn p-values into e-values")
    p.add_argument("--method", required=True, choices=CALIBRATORS)
    p.add_argument("--kappa", type=float)
    _values_args(p)

    p = sub.add_parser("e2p", help="turn e-values into p-values, min(1, 1/e)")
    _values_args(p)

    for name, help_text in (("merge-e", "merge e-values into one e-value"),
                            ("validate", "search for a law that breaks an e-merging function")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--method", required=True, choices=E_METHODS)
        p.add_argument("--lambda", dest="lam", type=float, help="weight of 1 in 'mixture'")
        p.add_argument("--k", type=float, help="order for 'u' and 'ruger'")
        p.add_argument("--r", type=float, help="power for 'm-family' (inf allowed)")
        p.add_argument("--weights", help="K+1 comma-separated weights for 'u-mixture'")
        if name == "merge-e":
            _values_args(p)
        else:
            p.add_argument("--class", dest="merge_class",
                           choices=[c.value for c in e_merging.MergeClass],
                           help="dependence class to test (default: the function's own)")
            p.add_argument("--trials", type=int, default=10_000)
            p.add_argument("--seed", type=int)
            p.add_argument("--dims", default="1,2,3,4", help="input lengths to try")
            p.add_argument("--scale", type=float, default=1.0,
                           help="multiply the function by this constant")

    p = sub.add_parser("merge-p", help="merge p-values into one p-value")
    p.add_argument("--method", required=True, choices=P_METHODS)
    p.add_argument("--k", type=float, help="order for 'ruger'")
    _values_args(p)

    p = sub.add_parser("cross", help="merge e-values into a p-value or p-values into an e-value")
    p.add_argument("--method", required=True, choices=CROSS_METHODS)
    p.add_argument("--kappa", type=float)
    p.add_argument("--weights", help="comma-separated simplex weights for 'p-to-e-mixture'")
    p.add_argument("--calibrators",
                   help="one per p-value, e.g. power:0.5,integrated,h:1,f:2")
    _values_args(p)

    p = sub.add_parser("adjust", help="adjusted e-values or p-values for multiple testing")
    p.add_argument("--method", required=True, choices=ADJUST_METHODS)
    _values_args(p)

    p = sub.add_parser("fact", help="fast closed testing on a p-merging function")
    p.add_argument("--method", required=True, choices=FACT_METHODS)
    _values_args(p)

    p = sub.add_parser("simulate", help="run a seeded Gaussian experiment and print CSV")
    p.add_argument("experiment", choices=("combining", "multiple"))
    p.add_argument("--method", help="comma-separated method names (default: all)")
    p.add_argument("--delta", type=float)
    p.add_argument("--n-obs", type=int, default=10_000)
    p.add_argument("--fraction-alt", type=float, default=1.0)
    p.add_argument("--n-hypotheses", type=int, default=20)
    p.add_argument("--n-false", type=int, default=10)
    p.add_argument("--seeds", type=int, default=100, help="number of seeds")
    p.add_argument("--seed", type=int, help="first seed (default 0)")
    p.add_argument("--out", metavar="PATH", help="write CSV here instead of standard output")

    p = sub.add_parser("jeffreys", help="label e-values on Jeffreys's scale")
    _values_args(p)
    return parser


_COMMANDS = {
    "calibrate": _cmd_calibrate,
    "e2p": _cmd_e2p,
    "merge-e": _cmd_merge_e,
    "merge-p": _cmd_merge_p,
    "cross": _cmd_cross,
    "adjust": _cmd_adjust,
    "fact": _cmd_fact,
    "jeffreys": _cmd_jeffreys,
}


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "validate":
            return _cmd_validate(args)
        values = read_values(args.values, args.input)
        return _COMMANDS[args.command](args, values)
    except (UsageError, ValueError, TypeError, OverflowError) as exc:
        print(f"evalues {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
