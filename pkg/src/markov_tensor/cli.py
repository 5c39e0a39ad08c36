from __future__ import annotations
import argparse
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np

from markov_tensor.config import Settings
from markov_tensor.profiling import (
    configure_logging, format_timing_report, clear_timing_data, enable_profiling,
)
from markov_tensor.engine.types import TransitionTensor, SimplexVector
from markov_tensor.engine.tensor_core import f_p, fiber_sums, min_entry
from markov_tensor.engine.conditions import check_min_entry_condition
from markov_tensor.engine.generator import (
    RandomTensorSpec, random_positive, random_simplex, fixture,
)
from markov_tensor.engine.solvers import (
    Method, SolveOptions, power_method, markov_process, oracle_solution,
    iteration_statistics, Quadratic222, solve_2x2x2, quadratic_trace, x_error_bound,
    DEFAULT_TOLERANCE, DEFAULT_MAX_ITERATIONS, ORACLE_TOLERANCE,
)
from markov_tensor.engine.errors import (
    MarkovTensorError, TensorFileError, TensorValidationError, MaxIterationsExceeded,
    HypothesisNotSatisfied, InfeasibleDelta, NoRootInUnitInterval, DimensionMismatch,
)
from markov_tensor.analysis import (
    diagnose, format_condition_report, report_to_dict, DEFAULT_SAMPLES,
)
from markov_tensor.tensorfile import (
    read_tensor_file, write_tensor_file, tensor_to_file, to_tensor, write_trace,
    write_table, wide_table,
)

logger = logging.getLogger("markov_tensor.cli")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_PARSE = 2
EXIT_VALIDATION = 3
EXIT_NONCONVERGENCE = 4
EXIT_HYPOTHESIS = 5

DEFAULT_MAX_FIBERS = 50
FIGURES = ("power-ratio", "markov-error", "random-markov")
FIGURE_ALIASES = {"1": "power-ratio", "2": "markov-error", "3": "random-markov"}
RANDOM_FIGURE_N = 100
RANDOM_FIGURE_TENSORS = 10


class UsageError(Exception):
    """Bad flag combination detected after parsing."""


class ArgumentParser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here 2 means an unparseable file."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _fmt_vector(x: SimplexVector) -> str:
    return "[" + ", ".join(f"{v:.10g}" for v in x.x) + "]"


def _load(path: str, tol: Optional[float]) -> Tuple[str, TransitionTensor]:
    tf = read_tensor_file(path)
    return tf.name or Path(path).stem, to_tensor(tf, tol)


def _load_vector(path: str, n: int) -> SimplexVector:
    """Read a starting vector stored as a JSON array."""
    try:
        values = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise TensorFileError(path, f"not valid JSON ({exc.msg})") from exc
    if not isinstance(values, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in values):
        raise TensorFileError(path, "expected a JSON array of numbers")
    x = SimplexVector(np.asarray(values, dtype=float))
    if x.n != n:
        raise DimensionMismatch(n, x.n, what=f"vector in {path}")
    return x


def _starting_vectors(args, P: TransitionTensor) -> Tuple[SimplexVector, SimplexVector]:
    x0 = random_simplex(P.n, args.seed) if args.x0 == "random" else _load_vector(args.x0, P.n)
    if args.x1 == "map":
        x1 = f_p(P, x0)
    elif args.x1 == "random":
        x1 = random_simplex(P.n, [args.seed, 1])
    else:
        x1 = _load_vector(args.x1, P.n)
    return x0, x1


def _run_trace_path(path: str, run: int, runs: int) -> Path:
    p = Path(path)
    if runs == 1:
        return p
    return p.with_name(f"{p.stem}_run{run:02d}{p.suffix}")


def cmd_validate(args, settings: Settings) -> int:
    tf = read_tensor_file(args.path)
    tol = tf.tolerance if args.tol is None else args.tol
    P = to_tensor(tf, tol)
    sums = fiber_sums(P)
    n = P.n
    shown = 0
    for k in range(n):
        for j in range(n):
            if args.max_fibers is not None and shown >= args.max_fibers:
                break
            s = float(sums[j, k])
            print(f"fiber (:, {j}, {k}): sum = {s:.12f}  deviation = {abs(s - 1.0):.2e}")
            shown += 1
    if shown < n * n:
        print(f"... {n * n - shown} more fibers not listed")
    worst = float(np.abs(sums - 1.0).max())
    print(f"OK: n = {n}, tolerance = {tol:g}, min entry = {min_entry(P):.6g}, "
          f"max fiber deviation = {worst:.2e}")
    return EXIT_OK


def cmd_diagnose(args, settings: Settings) -> int:
    _, P = _load(args.path, args.validation_tol)
    report = diagnose(P, samples=args.samples, seed=args.seed)
    print(format_condition_report(report, verbose=args.verbose))
    if args.json:
        path = Path(args.json)
        path.write_text(json.dumps(report_to_dict(report), indent=2) + "\n", encoding="utf-8")
        print(f"Report saved to {path}")
    if args.strict and not report.min_entry_condition_holds:
        return EXIT_HYPOTHESIS
    return EXIT_OK


def _solve_quadratic(args, P: TransitionTensor) -> int:
    if P.n != 2:
        raise UsageError(f"--method quadratic needs a 2x2x2 tensor, got n = {P.n}")
    if args.runs != 1:
        raise UsageError("--runs needs an iterative method")
    try:
        x, diag = solve_2x2x2(Quadratic222.from_tensor(P))
    except NoRootInUnitInterval as exc:
        print(f"no interior stationary vector: {exc}")
        return EXIT_HYPOTHESIS
    a, b, c = diag.coefficients
    print(f"equation: {a:.10g} s^2 + {b:.10g} s + {c:.10g} = 0 ({diag.case})")
    if diag.discriminant is not None:
        print(f"discriminant: {diag.discriminant:.10g}")
    if diag.note:
        print(f"note: {diag.note}")
    print(f"x* = {_fmt_vector(x)}")
    print(f"fixed-point residual: {diag.fixed_point_residual:.3e}")
    if args.trace:
        write_trace(args.trace, quadratic_trace(x, diag), tensor=args.path)
    return EXIT_OK


def cmd_solve(args, settings: Settings) -> int:
    name, P = _load(args.path, args.validation_tol)
    method = Method(args.method)
    if args.runs < 1:
        raise UsageError(f"--runs must be >= 1, got {args.runs}")
    if args.profile:
        clear_timing_data()
        enable_profiling()
    try:
        if method is Method.QUADRATIC:
            code = _solve_quadratic(args, P)
        else:
            code = _solve_iterative(args, P, name, method)
    finally:
        if args.profile:
            enable_profiling(False)
    if args.profile:
        print(format_timing_report())
    return code


def _solve_iterative(args, P: TransitionTensor, name: str, method: Method) -> int:
    reference = oracle_solution(P) if args.reference else None
    opts = SolveOptions(args.tol, args.max_iterations, record_trace=bool(args.trace),
                        reference_solution=reference)
    header = dict(tensor=name, n=P.n, seed=args.seed, tolerance=repr(args.tol),
                  reference=f"power method to {ORACLE_TOLERANCE:g}" if reference else None)

    if args.runs > 1:
        if args.x0 != "random" or args.x1 != "map":
            raise UsageError("--runs draws every start at random; drop --x0/--x1")
        try:
            stats = iteration_statistics(P, method, args.runs, args.seed, opts)
        except MaxIterationsExceeded as exc:
            print(f"run {exc.run}: {exc}")
            if args.trace:
                write_trace(_run_trace_path(args.trace, exc.run, args.runs), exc.trace,
                            **header, run=exc.run)
            return EXIT_NONCONVERGENCE
        for run, iters in enumerate(stats.iterations):
            print(f"run {run} (seed {args.seed + run}): {iters} iterations")
            if args.trace:
                write_trace(_run_trace_path(args.trace, run, args.runs), stats.traces[run],
                            **header, run=run)
        print(f"mean iterations over {args.runs} runs: {stats.mean_iterations:.4g}")
        print(f"max distance between solutions: {stats.spread:.3e}")
        print(f"x* = {_fmt_vector(stats.solutions[0])}")
        return EXIT_OK

    x0, x1 = _starting_vectors(args, P)
    try:
        if method is Method.POWER:
            x, trace = power_method(P, x0, opts)
        else:
            x, trace = markov_process(P, x0, x1, opts)
    except MaxIterationsExceeded as exc:
        print(str(exc))
        print(f"last iterate = {_fmt_vector(exc.x_last)}")
        if args.trace:
            write_trace(args.trace, exc.trace, **header)
            print(f"Partial trace saved to {args.trace}")
        return EXIT_NONCONVERGENCE

    print(f"x* = {_fmt_vector(x)}")
    print(f"iterations: {trace.iterations_used} (converged)")
    if not trace.bounds_available:
        print(f"bounds unavailable: min entry {trace.delta:.4g} <= 1/(2n)")
    if args.trace:
        write_trace(args.trace, trace, **header)
        print(f"Trace saved to {args.trace}")
    return EXIT_OK


def cmd_generate(args, settings: Settings) -> int:
    spec = RandomTensorSpec(args.n, args.delta, args.seed)
    P = random_positive(spec)
    name = f"random_n{spec.n}_seed{spec.seed}"
    source = f"random positive recipe, n={spec.n}, delta={spec.delta!r}, seed={spec.seed}"
    out = settings.resolve_output(args.output, f"{name}.json")
    write_tensor_file(out, tensor_to_file(P, name=name, source=source))
    print(f"wrote {out} (min entry {min_entry(P):.6g})")
    return EXIT_OK


def _figure_tensor(args) -> Tuple[str, TransitionTensor]:
    if args.path:
        return _load(args.path, args.validation_tol)
    return "dna_i", fixture("dna_i")


def _require_condition(P: TransitionTensor) -> None:
    cond = check_min_entry_condition(P)
    if not cond.holds:
        raise HypothesisNotSatisfied(cond.delta, cond.threshold, what="theoretical curve")


def _random_markov_figure(args, out: Path, opts_kw: dict) -> int:
    """Markov errors of ten random n = 100 tensors next to the recipe bound."""
    spec = RandomTensorSpec(RANDOM_FIGURE_N, seed=args.seed)
    r = 2.0 * (1.0 - spec.n * spec.delta)
    errors: List[List[Optional[float]]] = []
    columns = []
    failure: Optional[MaxIterationsExceeded] = None
    for t in range(RANDOM_FIGURE_TENSORS):
        P = random_positive(RandomTensorSpec(RANDOM_FIGURE_N, seed=args.seed + t))
        x0 = random_simplex(P.n, [args.seed + t, 1])
        opts = SolveOptions(reference_solution=oracle_solution(P), **opts_kw)
        columns.append(f"error_l1_{t}")
        try:
            _, trace = markov_process(P, x0, f_p(P, x0), opts)
        except MaxIterationsExceeded as exc:
            errors.append(exc.trace.column("error"))
            failure = exc
            failure.run = t
            break
        errors.append(trace.column("error"))

    length = max(len(e) for e in errors)
    # iterates s = k + 1, anchored at x(1), x(2)
    bound = [x_error_bound(r, k - 1) for k in range(1, length + 1)]
    table = wide_table(columns + ["bound"], errors + [bound], header={
        "figure": "random-markov", "method": "markov", "n": RANDOM_FIGURE_N,
        "delta": repr(spec.delta), "r": repr(r), "seed": args.seed,
        "tensors": f"seeds {args.seed}..{args.seed + RANDOM_FIGURE_TENSORS - 1}",
        "reference": f"power method to {ORACLE_TOLERANCE:g}",
        "converged": "false" if failure else "true",
    })
    write_table(out, table)
    if failure is not None:
        print(f"tensor {failure.run}: {failure}")
        print(f"Partial data saved to {out}")
        return EXIT_NONCONVERGENCE
    print(f"wrote {out}")
    return EXIT_OK


def cmd_figure(args, settings: Settings) -> int:
    which = FIGURE_ALIASES.get(args.which, args.which)
    out = settings.resolve_output(args.output, f"figure_{which}.csv")
    opts_kw = dict(tolerance=args.tol, max_iterations=args.max_iterations)

    if which == "random-markov":
        return _random_markov_figure(args, out, opts_kw)

    name, P = _figure_tensor(args)
    _require_condition(P)
    x0 = random_simplex(P.n, args.seed)
    opts = SolveOptions(reference_solution=oracle_solution(P), **opts_kw)
    try:
        if which == "power-ratio":
            _, trace = power_method(P, x0, opts)
        else:
            _, trace = markov_process(P, x0, f_p(P, x0), opts)
    except MaxIterationsExceeded as exc:
        write_trace(out, exc.trace, figure=which, tensor=name, seed=args.seed)
        print(str(exc))
        return EXIT_NONCONVERGENCE
    write_trace(out, trace, figure=which, tensor=name, n=P.n, seed=args.seed,
                reference=f"power method to {ORACLE_TOLERANCE:g}")
    print(f"wrote {out}")
    return EXIT_OK


def build_parser() -> ArgumentParser:
    ap = ArgumentParser(prog="markov-tensor",
                        description="Stationary distributions of second-order Markov chains")
    ap.add_argument("--log-level", default=None, help="logging level (default: $MARKOV_TENSOR_LOG_LEVEL or WARNING)")
    sub = ap.add_subparsers(dest="cmd", required=True, parser_class=ArgumentParser)

    va = sub.add_parser("validate", help="Check a tensor file")
    va.add_argument("path")
    va.add_argument("--tol", type=float, default=None, help="fiber-sum tolerance (default: the file's)")
    va.add_argument("--max-fibers", type=int, default=DEFAULT_MAX_FIBERS,
                    help=f"fibers to list (default: {DEFAULT_MAX_FIBERS})")
    va.set_defaults(func=cmd_validate)

    dg = sub.add_parser("diagnose", help="Report the uniqueness and convergence conditions")
    dg.add_argument("path")
    dg.add_argument("--validation-tol", type=float, default=None)
    dg.add_argument("--samples", type=int, default=DEFAULT_SAMPLES,
                    help=f"random simplex points (default: {DEFAULT_SAMPLES})")
    dg.add_argument("--seed", type=int, default=0)
    dg.add_argument("--json", help="also write the report as JSON to this path")
    dg.add_argument("--strict", action="store_true", help="exit 5 when the min-entry condition fails")
    dg.add_argument("--verbose", "-v", action="store_true", help="list every sampled point")
    dg.set_defaults(func=cmd_diagnose)

    so = sub.add_parser("solve", help="Compute the stationary distribution")
    so.add_argument("path")
    so.add_argument("--method", choices=[m.value for m in Method], default=Method.POWER.value)
    so.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE,
                    help=f"stop when ||x(k) - x(k-1)||_1 < tol (default: {DEFAULT_TOLERANCE:g})")
    so.add_argument("--max-iterations", type=int, default=DEFAULT_MAX_ITERATIONS)
    so.add_argument("--validation-tol", type=float, default=None)
    so.add_argument("--seed", type=int, default=0)
    so.add_argument("--x0", default="random", help="'random' or a JSON array file")
    so.add_argument("--x1", default="map", help="markov only: 'map' (x1 = P x0^2), 'random' or a file")
    so.add_argument("--trace", help="write the iteration trace CSV here")
    so.add_argument("--runs", type=int, default=1, help="seeded random starts; run r uses seed + r")
    so.add_argument("--reference", action="store_true", help="add error columns from an oracle run")
    so.add_argument("--profile", action="store_true", help="print a timing report")
    so.set_defaults(func=cmd_solve)

    ge = sub.add_parser("generate", help="Write a random tensor with a guaranteed min entry")
    ge.add_argument("--n", type=int, required=True)
    ge.add_argument("--delta", type=float, default=None, help="min entry (default: 13/(20n))")
    ge.add_argument("--seed", type=int, default=0)
    ge.add_argument("--output", "-o", help="output file (default: $MARKOV_TENSOR_OUTPUT_DIR/random_n<N>_seed<S>.json)")
    ge.set_defaults(func=cmd_generate)

    fi = sub.add_parser("figure", help="Write convergence data next to the theoretical bounds")
    fi.add_argument("path", nargs="?", help="tensor file (default: the dna_i fixture)")
    fi.add_argument("--which", choices=FIGURES + tuple(FIGURE_ALIASES), required=True,
                    help="power-ratio (1), markov-error (2) or random-markov (3)")
    fi.add_argument("--seed", type=int, default=0)
    fi.add_argument("--tol", type=float, default=DEFAULT_TOLERANCE)
    fi.add_argument("--max-iterations", type=int, default=DEFAULT_MAX_ITERATIONS)
    fi.add_argument("--validation-tol", type=float, default=None)
    fi.add_argument("--output", "-o", help="output CSV (default: $MARKOV_TENSOR_OUTPUT_DIR/figure_<which>.csv)")
    fi.set_defaults(func=cmd_figure)
    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    settings = Settings.from_env()
    configure_logging(args.log_level or settings.log_level)

    try:
        return args.func(args, settings)
    except FileNotFoundError as e:
        print(f"error: file not found: {e.filename}", file=sys.stderr)
        return EXIT_USAGE
    except UsageError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except TensorFileError as e:
        print(f"error: cannot parse {e}", file=sys.stderr)
        return EXIT_PARSE
    except TensorValidationError as e:
        print(f"error: invalid tensor: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except HypothesisNotSatisfied as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (InfeasibleDelta, DimensionMismatch) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE
    except MarkovTensorError as e:
        logger.error("%s", e)
        return EXIT_USAGE
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
