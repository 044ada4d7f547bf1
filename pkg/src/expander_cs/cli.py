"""Command-line entry point.

Subcommands: gen-graph, check-expansion, sketch, recover, recover-robust,
bench.  Exit codes: 0 success, 1 recovery failed (stuck / iteration cap),
2 invalid input, 3 enumeration budget exceeded.  Data goes to files or
stdout; human-readable summaries go to stderr.  No output file is
written on a nonzero exit.
"""

from __future__ import annotations

import argparse
import sys

from . import _kernels
from .bench import emit_report, parse_trial_spec, run_sweep
from .decode import RECOVERED, DecodeTrace, decode_fast, decode_majority
from .errors import (
    BudgetExceededError,
    ExpanderCSError,
    InvalidParametersError,
)
from .graph import (
    check_expansion,
    gen_random_graph,
    gen_right_regular_graph,
    load_graph,
    save_graph,
)
from .robust import AlmostSparseModel, robust_pipeline
from .sketch import (
    encode,
    format_number,
    load_signal,
    load_sketch,
    save_signal,
    save_sketch,
)

EXIT_OK = 0
EXIT_RECOVERY_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_BUDGET = 3


def _info(message: str) -> None:
    print(message, file=sys.stderr)


def _write_trace(path: str, trace: DecodeTrace) -> None:
    lines = ["iter,node,value,gap_support_before,gap_support_after"]
    for row in trace.rows:
        lines.append(
            f"{row.iteration},{row.node},{format_number(row.value)},"
            f"{row.gap_support_before},{row.gap_support_after}"
        )
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _cmd_gen_graph(args) -> int:
    if args.right_regular:
        graph = gen_right_regular_graph(args.n, args.m, args.d, args.seed)
    else:
        graph = gen_random_graph(args.n, args.m, args.d, args.seed)
    save_graph(graph, args.output)
    _info(
        f"wrote {'right-regular ' if args.right_regular else ''}graph "
        f"n={graph.n} m={graph.m} d={graph.d} to {args.output}"
    )
    return EXIT_OK


def _cmd_check_expansion(args) -> int:
    graph = load_graph(args.graph)
    report = check_expansion(
        graph, args.s_max, args.epsilon, sample=args.sample, seed=args.seed
    )
    mode = "exhaustive" if report.exhaustive else "sampled"
    lines = [
        f"mode {mode}",
        f"subsets_checked {report.subsets_checked}",
        f"worst_ratio {format_number(report.worst_ratio)}",
        f"verified {str(report.verified).lower()}",
        f"falsified {str(report.falsified).lower()}",
    ]
    if report.witness is not None:
        lines.append("witness " + " ".join(str(v) for v in report.witness))
    print("\n".join(lines))
    return EXIT_OK


def _cmd_sketch(args) -> int:
    graph = load_graph(args.graph)
    signal = load_signal(args.signal)
    y = encode(graph, signal)
    save_sketch(y, args.output)
    _info(f"wrote sketch of dimension {y.m} to {args.output}")
    return EXIT_OK


def _cmd_recover(args) -> int:
    graph = load_graph(args.graph)
    y = load_sketch(args.sketch)
    if args.algorithm == "fast":
        estimate, trace = decode_fast(graph, y, args.epsilon, args.max_iters)
    else:
        estimate, trace = decode_majority(graph, y, args.max_iters)
    if trace.status != RECOVERED:
        _info(
            f"recovery failed: status {trace.status} after {trace.iterations} "
            f"iterations; last gap support "
            f"{trace.rows[-1].gap_support_after if trace.rows else len([v for v in y.values if v])}"
        )
        return EXIT_RECOVERY_FAILED
    save_signal(estimate, args.output)
    if args.trace:
        _write_trace(args.trace, trace)
    _info(
        f"recovered {estimate.sparsity}-sparse signal in {trace.iterations} "
        f"iterations; wrote {args.output}"
    )
    return EXIT_OK


def _cmd_recover_robust(args) -> int:
    graph = load_graph(args.graph)
    y = load_sketch(args.sketch)
    if graph.right_degree is None:
        raise InvalidParametersError("recover-robust requires a right-regular graph")
    model = AlmostSparseModel(
        args.k, getattr(args, "lambda"), args.big_l, args.delta, graph.right_degree
    )
    result = robust_pipeline(graph, y, model, args.epsilon, args.max_iters)
    if result.trace.status != RECOVERED:
        _info(
            f"support identification failed: status {result.trace.status} "
            f"after {result.trace.iterations} iterations"
        )
        return EXIT_RECOVERY_FAILED
    save_signal(result.refined, args.output)
    if args.trace:
        _write_trace(args.trace, result.trace)
    lines = [
        "support " + " ".join(f"{j}:{'+' if s > 0 else '-'}" for j, s in result.support),
        "iterations " + str(result.trace.iterations),
    ]
    for j, value in result.refined.to_pairs():
        lines.append(f"value {j} {format_number(value)}")
    lines.append(f"residual_l1 {format_number(result.residual_norm1)}")
    lines.append(f"residual_l2 {format_number(result.residual_norm2)}")
    lines.append(f"support_error_bound {format_number(result.support_error_bound)}")
    print("\n".join(lines))
    _info(f"recovered support of size {len(result.support)}; wrote {args.output}")
    return EXIT_OK


def _cmd_bench(args) -> int:
    spec = parse_trial_spec(args.spec)
    report = run_sweep(spec)
    text = emit_report(report, format=args.format, include_timing=not args.no_timing)
    with open(args.output, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)
    _info(
        f"ran {len(report.records)} trials ({report.certified_count()} certified); "
        f"wrote {args.output}"
    )
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="expander-cs",
        description="Compressed sensing with bipartite expander graphs "
        f"(kernel backend: {_kernels.backend_name()})",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen-graph", help="generate a random measurement graph")
    p.add_argument("--n", type=int, required=True, help="left (signal) nodes")
    p.add_argument("--m", type=int, required=True, help="right (measurement) nodes")
    p.add_argument("--d", type=int, required=True, help="left degree")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--right-regular", action="store_true")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_gen_graph)

    p = sub.add_parser("check-expansion", help="certify or probe expansion")
    p.add_argument("--graph", required=True)
    p.add_argument("--s-max", type=int, required=True)
    p.add_argument("--epsilon", type=float, required=True)
    p.add_argument("--sample", type=int, default=None, help="sampled mode with N subsets")
    p.add_argument("--seed", type=int, default=0, help="seed for sampled mode")
    p.set_defaults(func=_cmd_check_expansion)

    p = sub.add_parser("sketch", help="measure a signal: y = A x")
    p.add_argument("--graph", required=True)
    p.add_argument("--signal", required=True)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_sketch)

    p = sub.add_parser("recover", help="recover a sparse signal from a sketch")
    p.add_argument("--graph", required=True)
    p.add_argument("--sketch", required=True)
    p.add_argument("--epsilon", type=float, default=0.125)
    p.add_argument("--algorithm", choices=("majority", "fast"), default="fast")
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--trace", default=None, help="write per-iteration CSV here")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_recover)

    p = sub.add_parser(
        "recover-robust", help="almost-sparse recovery: support + least squares"
    )
    p.add_argument("--graph", required=True)
    p.add_argument("--sketch", required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--lambda", type=float, required=True, dest="lambda")
    p.add_argument("--big-l", type=float, required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--epsilon", type=float, default=0.125)
    p.add_argument("--max-iters", type=int, default=None)
    p.add_argument("--trace", default=None)
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_recover_robust)

    p = sub.add_parser("bench", help="run a benchmark sweep from a spec file")
    p.add_argument("--spec", required=True)
    p.add_argument("--format", choices=("csv", "markdown"), default="csv")
    p.add_argument("--no-timing", action="store_true",
                   help="blank the wall-clock column for reproducible output")
    p.add_argument("-o", "--output", required=True)
    p.set_defaults(func=_cmd_bench)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        _info(f"error: {exc}")
        return EXIT_BUDGET
    except ExpanderCSError as exc:
        _info(f"error: {exc}")
        return EXIT_INVALID_INPUT
    except OSError as exc:
        _info(f"error: {exc}")
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
