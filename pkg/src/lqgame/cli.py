"""Command-line front end.

Exit codes: 0 success, 1 reproduction check failed, 2 usage, 3 spec-file
parse error, 4 numerical failure (singular H, no convergence, inapplicable
bound, unstable loop). Failures print one ``lqgame: <Kind>: <reason>`` line
on stderr.
"""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

import numpy as np

from . import tables
from .bounds import gap_bound
from .errors import InvalidSpec, NumericalFailure
from .fixtures import PRINTED, X1, example_game
from .riccati import backward_solve
from .simulate import make_receding_strategy, rollout, stationary_profile
from .specfile import SpecParseError, load_spec
from .stationary import TOL, iterate_to_limit
from .sweep import first_stage_path, horizon_sweep

EXIT_OK, EXIT_CHECKS, EXIT_USAGE, EXIT_PARSE, EXIT_NUMERIC = 0, 1, 2, 3, 4


class UsageError(Exception):
    pass


def _positive_int(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"horizon must be >= 1, got {v}")
    return v


def _int_list(text):
    return [_positive_int(t) for t in text.split(",") if t.strip()]


def _float_list(text):
    try:
        return [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of numbers: {text!r}") from None


def _range(text):
    lo, sep, hi = text.partition(":")
    if not sep:
        return [_positive_int(lo)]
    lo, hi = _positive_int(lo), _positive_int(hi)
    if hi < lo:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return list(range(lo, hi + 1))


def _formats(text):
    fmts = {f.strip() for f in text.split(",") if f.strip()}
    bad = fmts - {"csv", "svg"}
    if bad:
        raise argparse.ArgumentTypeError(f"unknown format(s): {', '.join(sorted(bad))}")
    return fmts


def build_parser():
    parser = argparse.ArgumentParser(prog="lqgame", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spec=True, x1=False):
        if spec:
            p.add_argument("--spec", required=True, type=Path, help="game-spec JSON file")
            p.add_argument("--zero-refs", action="store_true", help="replace every reference by zero")
        if x1:
            p.add_argument("--x1", type=_float_list, required=True,
                           help="initial state, comma separated (use --x1=-1,2 for a leading minus)")
        p.add_argument("--tol", type=float, default=TOL, help="convergence tolerance of the limit iteration")
        p.add_argument("--out", type=Path, default=Path("."), help="output directory")
        p.add_argument("--format", type=_formats, default={"csv"}, help="csv[,svg]")

    p = sub.add_parser("solve", help="finite-horizon equilibrium by backward recursion")
    common(p)
    p.add_argument("--horizon", type=_positive_int, required=True)

    p = sub.add_parser("limit", help="limiting infinite-horizon equilibrium")
    common(p)
    p.add_argument("--max-iter", type=_positive_int, default=10_000)

    p = sub.add_parser("simulate", help="roll out the stationary or a receding-horizon profile")
    common(p, x1=True)
    p.add_argument("--horizons", type=_int_list, help="T1,..,TN; stationary profile when omitted")
    p.add_argument("--steps", type=_positive_int, help="fixed number of stages")
    p.add_argument("--tail-tol", type=float, help="stop once every tail bound is below this")

    p = sub.add_parser("bound", help="certified cost-gap bound (zero references)")
    common(p, x1=True)
    p.add_argument("--horizons", type=_int_list, required=True)

    p = sub.add_parser("sweep", help="receding-horizon gains and costs over a horizon range")
    common(p, x1=True)
    p.add_argument("--horizon-range", type=_range, default=list(range(2, 51)), help="A:B (inclusive)")

    p = sub.add_parser("reproduce-paper", help="run the embedded two-player example and check printed values")
    common(p, spec=False)
    p.add_argument("--perturb-A", type=float, default=0.0, help=argparse.SUPPRESS)
    return parser


def _load(args):
    spec = load_spec(args.spec)
    return spec.with_zero_refs() if args.zero_refs else spec


def _x1(args, spec):
    if len(args.x1) != spec.n:
        raise UsageError(f"--x1 has {len(args.x1)} entries, spec has n={spec.n}")
    return np.array(args.x1)


def _write(out: Path, name, table):
    out.mkdir(parents=True, exist_ok=True)
    tables.write_csv(out / name, *table)


def cmd_solve(args):
    spec = _load(args)
    sol = backward_solve(spec, args.horizon)
    _write(args.out, "solve.csv", tables.finite_solution_table(spec, sol))
    return EXIT_OK


def cmd_limit(args):
    spec = _load(args)
    sol = iterate_to_limit(spec, tol=args.tol, max_iter=args.max_iter)
    _write(args.out, "limit.csv", tables.stationary_table(spec, sol))
    _write(args.out, "limit_diagnostics.csv", tables.stationary_diagnostics(spec, sol))
    return EXIT_OK


def cmd_simulate(args):
    spec = _load(args)
    x1 = _x1(args, spec)
    if args.steps is not None and args.tail_tol is not None:
        raise UsageError("give --steps or --tail-tol, not both")
    if args.horizons:
        if len(args.horizons) != spec.N:
            raise UsageError(f"--horizons needs {spec.N} values")
        profile = make_receding_strategy(spec, args.horizons)
    else:
        profile = stationary_profile(iterate_to_limit(spec, tol=args.tol))
    traj = rollout(spec, profile, x1, steps=args.steps, tail_tol=args.tail_tol)
    _write(args.out, "trajectory.csv", tables.trajectory_table(spec, traj))
    _write(args.out, "costs.csv", tables.totals_table(spec, traj))
    return EXIT_OK


def cmd_bound(args):
    spec = _load(args)
    x1 = _x1(args, spec)
    if len(args.horizons) != spec.N:
        raise UsageError(f"--horizons needs {spec.N} values")
    if not spec.zero_refs:
        raise UsageError("the bound covers zero-reference games; pass --zero-refs")
    sol = iterate_to_limit(spec, tol=args.tol)
    report = gap_bound(spec, sol, args.horizons, x1, strict=False)
    _write(args.out, "bound.csv", tables.bound_table(report))
    if report.M == float("inf"):
        print(f"lqgame: Inapplicable: lambda + b*eps = {report.lam + report.b * report.epsilon:.6g} >= 1",
              file=sys.stderr)
        return EXIT_NUMERIC
    return EXIT_OK


def _plot_gains(spec, path, out):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "lqgame"
    Ts = sorted(path)
    fig, axes = plt.subplots(1, spec.N, figsize=(5 * spec.N, 3.5), squeeze=False)
    for i, ax in enumerate(axes[0]):
        K = np.array([path[T][0][i].ravel() for T in Ts])
        L = np.array([path[T][1][i].ravel() for T in Ts])
        for k in range(K.shape[1]):
            ax.plot(Ts, K[:, k], marker=".", label=f"K[{k + 1}]")
        for k in range(L.shape[1]):
            ax.plot(Ts, L[:, k], marker=".", label="L" if L.shape[1] == 1 else f"L[{k + 1}]")
        ax.set_title(f"player {i + 1}")
        ax.set_xlabel("T")
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out, metadata={"Date": None})
    plt.close(fig)


def _plot_costs(spec, rows, out):
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    plt.rcParams["svg.hashsalt"] = "lqgame"
    Ts = [r.T for r in rows]
    fig, axes = plt.subplots(1, spec.N, figsize=(5 * spec.N, 3.5), squeeze=False)
    for i, ax in enumerate(axes[0]):
        ax.plot(Ts, [r.J_tilde[i] for r in rows], marker=".", label="receding horizon")
        ax.axhline(rows[0].J[i], color="k", linestyle="--", label="limiting equilibrium")
        ax.set_title(f"player {i + 1}")
        ax.set_xlabel("T")
        ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(out, metadata={"Date": None})
    plt.close(fig)


def run_sweep(spec, T_values, x1, out, formats, tol=TOL, name="sweep"):
    sol = iterate_to_limit(spec, tol=tol)
    rows = horizon_sweep(spec, T_values, x1, sol)
    _write(out, f"{name}.csv", tables.sweep_table(spec, rows))
    if "svg" in formats:
        _plot_gains(spec, first_stage_path(spec, T_values), out / f"{name}_gains.svg")
        _plot_costs(spec, rows, out / f"{name}_costs.svg")
    return sol, rows


def cmd_sweep(args):
    spec = _load(args)
    run_sweep(spec, args.horizon_range, _x1(args, spec), args.out, args.format, args.tol)
    return EXIT_OK


def converged_below(gaps, threshold):
    """First index from which every gap stays below ``threshold``; None if never."""
    first = None
    for k, g in enumerate(gaps):
        if g < threshold:
            first = k if first is None else first
        else:
            first = None
    return first


def reproduction_checks(spec, x1, tol=TOL):
    """Compare the embedded example against the printed values.

    Returns ``(sol, sweep_rows, checks)``; each check is
    ``(name, expected, computed, tolerance, passed)``.
    """
    sol = iterate_to_limit(spec, tol=tol)
    checks = []
    for i in range(spec.N):
        for k, (e, c) in enumerate(zip(PRINTED[f"K{i + 1}"].ravel(), sol.Kstar[i].ravel())):
            checks.append((f"K{i + 1}*[{k + 1}]", e, c, 5e-4, abs(e - c) <= 5e-4))
        e, c = PRINTED[f"L{i + 1}"][0], sol.Lstar[i][0]
        checks.append((f"L{i + 1}*", e, c, 5e-4, abs(e - c) <= 5e-4))
    J = rollout(spec, stationary_profile(sol), x1).totals
    for i in range(spec.N):
        e = PRINTED[f"J{i + 1}"]
        checks.append((f"J{i + 1}", e, J[i], 5e-2, abs(e - J[i]) <= 5e-2))
    rows = horizon_sweep(spec, range(2, 51), x1, sol)
    for i in range(spec.N):
        threshold = 1e-3 * abs(J[i])
        first = converged_below([r.gap[i] for r in rows], threshold)
        T_in = rows[first].T if first is not None else None
        checks.append((f"gap{i + 1} settles below 1e-3*|J{i + 1}| by T=50", 50,
                       T_in if T_in is not None else float("nan"), 0, T_in is not None))
    return sol, rows, checks


def cmd_reproduce_paper(args):
    spec = example_game(perturb_A=args.perturb_A)
    out = args.out
    sol, rows, checks = reproduction_checks(spec, X1, args.tol)
    _write(out, "limit.csv", tables.stationary_table(spec, sol))
    _write(out, "limit_diagnostics.csv", tables.stationary_diagnostics(spec, sol))
    path = first_stage_path(spec, range(1, 21))
    fig1 = [[T] + [v for i in range(spec.N) for v in (*path[T][0][i].ravel(), *path[T][1][i].ravel())]
            for T in sorted(path)]
    header1 = ["T"]
    for i in range(spec.N):
        header1 += [f"K{i + 1}_{k}" for k in range(spec.m[i] * spec.n)]
        header1 += [f"L{i + 1}_{k}" for k in range(spec.m[i])]
    _write(out, "figure1.csv", (header1, fig1))
    _write(out, "figure2.csv", tables.sweep_table(spec, rows))
    summary = (["check", "expected", "computed", "tolerance", "status"],
               [[name, e, c, tol, "pass" if ok else "FAIL"] for name, e, c, tol, ok in checks])
    _write(out, "summary.csv", summary)
    if "svg" in args.format:
        _plot_gains(spec, path, out / "figure1.svg")
        _plot_costs(spec, rows, out / "figure2.svg")
    for name, e, c, tol, ok in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}: expected {tables.fmt(e)}, got {tables.fmt(c)}")
    failed = [name for name, *_, ok in checks if not ok]
    if failed:
        print(f"lqgame: ReproductionFailed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_CHECKS
    return EXIT_OK


COMMANDS = {
    "solve": cmd_solve,
    "limit": cmd_limit,
    "simulate": cmd_simulate,
    "bound": cmd_bound,
    "sweep": cmd_sweep,
    "reproduce-paper": cmd_reproduce_paper,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"lqgame: UsageError: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SpecParseError, InvalidSpec) as exc:
        print(f"lqgame: ParseError: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"lqgame: ParseError: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalFailure as exc:
        print(f"lqgame: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"lqgame: UsageError: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    raise SystemExit(main())
