"""Seeded benchmark sweeps over (graph, signal, decoder) configurations.

Each trial derives its RNG streams solely from (seed_base, trial index),
generates a fresh graph and signal, sketches, decodes, and re-verifies
every claimed success.  Certified sweeps certify each graph first
(exhaustively when the subset budget allows, sampled otherwise) and
aggregate statistics over the certified trials only, since the recovery
guarantees apply only to that case.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from ._rand import make_rng, randbelow, sample_sorted
from .decode import RECOVERED, decode_fast, decode_majority, verify_solution
from .errors import ExpanderCSError, InvalidParametersError, ParseError, enumeration_budget
from .graph import (
    BipartiteGraph,
    check_expansion,
    gen_random_graph,
    gen_right_regular_graph,
    subset_budget,
)
from .robust import AlmostSparseModel, decode_robust_support, gen_almost_sparse
from .sketch import SparseSignal, encode, format_number

DECODERS = ("majority", "fast", "robust")
CERTIFY_MODES = ("auto", "full", "sampled", "none")


@dataclass(eq=True)
class TrialSpec:
    """One benchmark configuration; see parse_trial_spec for the file keys."""

    decoder: str
    n: int
    m: int
    d: int
    k: int
    epsilon: float
    trials: int
    seed_base: int
    right_regular: bool = False
    certify: str = "auto"
    s_max: int | None = None
    sample: int = 2000
    max_iters: int | None = None
    near_zero: float = 0.0
    level: float = 1000.0
    spread: float = 0.0

    def __post_init__(self):
        if self.decoder not in DECODERS:
            raise InvalidParametersError(f"decoder must be one of {DECODERS}")
        if self.certify not in CERTIFY_MODES:
            raise InvalidParametersError(f"certify must be one of {CERTIFY_MODES}")
        if self.trials < 0:
            raise InvalidParametersError("trials must be >= 0")
        if self.decoder == "robust" and not self.right_regular:
            raise InvalidParametersError("robust decoding requires right_regular = true")

    def certification_s_max(self) -> int:
        if self.s_max is not None:
            return self.s_max
        return min(3 * self.k, self.n) if self.k else 1


@dataclass
class TrialRecord:
    trial: int
    success: bool
    iterations: int
    max_gap_delta: int
    wall_seconds: float
    certified: bool
    certification: str


@dataclass
class TrialReport:
    spec: TrialSpec
    records: list[TrialRecord] = field(default_factory=list)

    def counted(self) -> list[TrialRecord]:
        """Records the aggregates run over: certified trials when
        certification is on, all trials otherwise."""
        if self.spec.certify == "none":
            return list(self.records)
        return [r for r in self.records if r.certified]

    def certified_count(self) -> int:
        return sum(1 for r in self.records if r.certified)

    def success_rate(self) -> float:
        counted = self.counted()
        if not counted:
            return 0.0
        return sum(1 for r in counted if r.success) / len(counted)

    def iters_p50(self) -> int:
        counted = sorted(r.iterations for r in self.counted())
        if not counted:
            return 0
        return counted[(len(counted) - 1) // 2]

    def iters_max(self) -> int:
        counted = self.counted()
        return max((r.iterations for r in counted), default=0)

    def iters_per_k(self) -> float:
        counted = self.counted()
        if not counted or self.spec.k == 0:
            return 0.0
        return sum(r.iterations for r in counted) / len(counted) / self.spec.k

    def ms_per_iter(self) -> float:
        total_iters = sum(r.iterations for r in self.counted())
        if total_iters == 0:
            return 0.0
        total_time = sum(r.wall_seconds for r in self.counted())
        return 1000.0 * total_time / total_iters


def _exact_sparse_signal(rng, n: int, k: int) -> SparseSignal:
    """k-sparse signal with nonzero integer values in [-9, 9]."""
    entries = {}
    for idx in sample_sorted(rng, n, k):
        r = randbelow(rng, 18)
        entries[idx] = float(r - 9 if r < 9 else r - 8)
    return SparseSignal(n, entries)


def _certify(spec: TrialSpec, graph: BipartiteGraph, seed: int) -> tuple[bool, str]:
    s_max = spec.certification_s_max()
    mode = spec.certify
    if mode == "none" or spec.k == 0:
        return True, "none"
    if mode == "auto":
        required = subset_budget(spec.n, s_max)
        mode = "full" if required <= enumeration_budget() else "sampled"
    if mode == "full":
        report = check_expansion(graph, s_max, spec.epsilon)
        return report.verified, f"full(s_max={s_max})"
    report = check_expansion(graph, s_max, spec.epsilon, sample=spec.sample, seed=seed)
    return not report.falsified, f"sampled(s_max={s_max},n={spec.sample})"


def run_sweep(spec: TrialSpec) -> TrialReport:
    """Execute all trials of a spec; individual trial failures are
    recorded, never raised."""
    report = TrialReport(spec)
    for index in range(spec.trials):
        trial_seed = spec.seed_base + index
        graph_seed = 2 * trial_seed
        signal_seed = 2 * trial_seed + 1
        try:
            record = _run_trial(spec, index, trial_seed, graph_seed, signal_seed)
        except ExpanderCSError:
            record = TrialRecord(index, False, 0, 0, 0.0, False, "error")
        report.records.append(record)
    return report


def _run_trial(spec, index, trial_seed, graph_seed, signal_seed) -> TrialRecord:
    if spec.right_regular:
        graph = gen_right_regular_graph(spec.n, spec.m, spec.d, graph_seed)
    else:
        graph = gen_random_graph(spec.n, spec.m, spec.d, graph_seed)
    certified, certification = _certify(spec, graph, trial_seed)

    if spec.decoder == "robust":
        model = AlmostSparseModel(
            spec.k, spec.near_zero, spec.level, spec.spread, graph.right_degree
        )
        truth = gen_almost_sparse(model, spec.n, signal_seed)
        lo, _ = model.significant_band()
        true_support = tuple(
            sorted(
                (j, 1 if v > 0 else -1)
                for j, v in truth.entries.items()
                if abs(v) >= lo and lo > 0
            )
        )
        y = encode(graph, truth)
        start = time.perf_counter()
        support, trace = decode_robust_support(
            graph, y, model, spec.epsilon, spec.max_iters
        )
        elapsed = time.perf_counter() - start
        success = trace.status == RECOVERED and support == true_support
    else:
        rng = make_rng(signal_seed)
        truth = _exact_sparse_signal(rng, spec.n, spec.k)
        y = encode(graph, truth)
        start = time.perf_counter()
        if spec.decoder == "fast":
            estimate, trace = decode_fast(
                graph, y, spec.epsilon, spec.max_iters, k_hint=spec.k
            )
        else:
            estimate, trace = decode_majority(graph, y, spec.max_iters)
        elapsed = time.perf_counter() - start
        success = (
            trace.status == RECOVERED
            and verify_solution(graph, y, estimate)
            and estimate == truth
        )

    max_delta = max(
        (r.gap_support_before - r.gap_support_after for r in trace.rows), default=0
    )
    return TrialRecord(
        index, success, trace.iterations, max_delta, elapsed, certified, certification
    )


REPORT_COLUMNS = (
    "decoder,n,m,d,k,epsilon,success_rate,iters_p50,iters_max,iters_per_k,ms_per_iter"
)


def _report_row(report: TrialReport, include_timing: bool) -> list[str]:
    spec = report.spec
    timing = f"{report.ms_per_iter():.4f}" if include_timing else "-"
    return [
        spec.decoder,
        str(spec.n),
        str(spec.m),
        str(spec.d),
        str(spec.k),
        format_number(spec.epsilon),
        format_number(round(report.success_rate(), 6)),
        str(report.iters_p50()),
        str(report.iters_max()),
        format_number(round(report.iters_per_k(), 6)),
        timing,
    ]


def _report_comment(report: TrialReport) -> str:
    certs = {r.certification for r in report.records} or {"none"}
    label = ",".join(sorted(certs))
    return (
        f"trials={len(report.records)} certified={report.certified_count()} "
        f"certification={label}"
    )


def emit_report(
    reports: TrialReport | list[TrialReport],
    format: str = "csv",
    include_timing: bool = True,
) -> str:
    """Render one data row per report with the stable column order.

    CSV prefixes each data row with a `#` comment labeling the
    certification mode; markdown renders the same as a pipe table.
    """
    if isinstance(reports, TrialReport):
        reports = [reports]
    if format == "csv":
        lines = [REPORT_COLUMNS]
        for report in reports:
            if report.records:
                lines.append("# " + _report_comment(report))
                lines.append(",".join(_report_row(report, include_timing)))
        return "\n".join(lines) + "\n"
    if format == "markdown":
        header = REPORT_COLUMNS.split(",")
        lines = []
        for report in reports:
            if report.records:
                lines.append(_report_comment(report))
        lines.append("| " + " | ".join(header) + " |")
        lines.append("|" + "|".join(" --- " for _ in header) + "|")
        for report in reports:
            if report.records:
                lines.append("| " + " | ".join(_report_row(report, include_timing)) + " |")
        return "\n".join(lines) + "\n"
    raise InvalidParametersError(f"unknown report format {format!r}")


_SPEC_TYPES = {
    "decoder": str,
    "n": int,
    "m": int,
    "d": int,
    "k": int,
    "epsilon": float,
    "trials": int,
    "seed_base": int,
    "right_regular": bool,
    "certify": str,
    "s_max": int,
    "sample": int,
    "max_iters": int,
    "near_zero": float,
    "level": float,
    "spread": float,
}

_REQUIRED_KEYS = ("decoder", "n", "m", "d", "k", "epsilon", "trials", "seed_base")


def parse_trial_spec(path) -> TrialSpec:
    """Read the flat `key = value` spec format.

    Blank lines and `#` comments are allowed; anything else that is not
    a known `key = value` assignment is rejected with its line number.
    """
    with open(path, "r", encoding="utf-8") as fh:
        lines = fh.read().split("\n")
    values: dict = {}
    for offset, raw in enumerate(lines):
        lineno = offset + 1
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ParseError("expected `key = value`", line=lineno)
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in _SPEC_TYPES:
            raise ParseError(f"unknown key {key!r}", line=lineno)
        if key in values:
            raise ParseError(f"duplicate key {key!r}", line=lineno)
        kind = _SPEC_TYPES[key]
        try:
            if kind is bool:
                lowered = value.lower()
                if lowered not in ("true", "false"):
                    raise ValueError(value)
                values[key] = lowered == "true"
            else:
                values[key] = kind(value)
        except ValueError:
            raise ParseError(f"bad value for {key!r}: {value!r}", line=lineno) from None
    missing = [key for key in _REQUIRED_KEYS if key not in values]
    if missing:
        raise ParseError(f"missing required keys: {', '.join(missing)}")
    try:
        return TrialSpec(**values)
    except InvalidParametersError as exc:
        raise ParseError(str(exc)) from None
