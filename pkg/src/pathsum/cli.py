"""Command-line front end: run scenarios, print tables, emit JSON and DOT.

Exit status: 0 on success, 2 on parse/validation/query errors, 3 when the
two engines disagree beyond 1e-9 (the equivalence of the path engine and
the dilation oracle is the package's core claim, so disagreement is a hard
failure, not a warning).
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import library, oracle, paths
from .hilbert import ATOL_PROB
from .scenario import (
    Record,
    RecordErasedError,
    Scenario,
    ScenarioParseError,
    ScenarioValidationError,
    parse_scenario,
)


class CliError(ValueError):
    pass


@dataclass
class QueryOutcome:
    text: str
    given: tuple[str, str]
    then: tuple[str, str]
    holds: bool
    counter_probability: float


@dataclass
class RunReport:
    source: str
    regime: str | None
    engine: str
    paths_dist: paths.OutcomeDistribution | None
    oracle_dist: paths.OutcomeDistribution | None
    delta: float | None
    queries: list[QueryOutcome]
    graph_path: str | None = None
    scenario: Scenario | None = None

    @property
    def dist(self) -> paths.OutcomeDistribution:
        return self.paths_dist if self.paths_dist is not None else self.oracle_dist


def resolve_scenario(source: str, regime: str | None) -> tuple[Scenario, str]:
    """Builtin name or .scn path -> (scenario, display name)."""
    if source == "2w2f" or source in library.builtin_names():
        scenario = library.builtin(source, regime)
        name = source if regime is None else f"{source}_{regime}"
        return scenario, name
    path = Path(source)
    if path.exists():
        if regime is not None:
            raise CliError("--regime only applies to the built-in '2w2f'")
        return parse_scenario(path.read_text("utf-8")), source
    raise CliError(
        f"unknown scenario {source!r}; built-ins: 2w2f, " + ", ".join(library.builtin_names())
    )


def _resolve_query_side(s: Scenario, text: str) -> tuple[str, str]:
    """Resolve 'label' or 'agent.label' (case-insensitive) to (agent, label)."""
    agent_part, _, label_part = text.rpartition(".")
    matches = []
    for _, e in s.measurements():
        if agent_part and e.agent.lower() != agent_part.lower():
            continue
        for label in e.labels:
            if label.lower() == label_part.lower():
                matches.append((e, label))
    if not matches:
        raise CliError(f"no outcome matches {text!r} in this scenario")
    if len(matches) > 1:
        options = ", ".join(f"{e.agent}.{label}" for e, label in matches)
        raise CliError(f"{text!r} is ambiguous; qualify it: {options}")
    event, label = matches[0]
    if event.record is Record.ERASED:
        raise RecordErasedError(event.agent)
    return event.agent, label


def parse_query(s: Scenario, text: str) -> tuple[tuple[str, str], tuple[str, str]]:
    if "=>" not in text:
        raise CliError(f"query {text!r} must look like 'Ok=>Heads'")
    left, right = text.split("=>", 1)
    return _resolve_query_side(s, left.strip()), _resolve_query_side(s, right.strip())


def equivalence_delta(a: paths.OutcomeDistribution, b: paths.OutcomeDistribution) -> float:
    keys = set(a.weights) | set(b.weights)
    return max(abs(a.weights.get(k, 0.0) - b.weights.get(k, 0.0)) for k in keys)


def run(source: str, engine: str = "both", regime: str | None = None,
        queries: tuple[str, ...] = ()) -> RunReport:
    """Programmatic core of ``pathsum run``."""
    scenario, name = resolve_scenario(source, regime)
    if engine not in ("paths", "oracle", "both"):
        raise CliError(f"engine must be paths, oracle or both, got {engine!r}")
    paths_dist = paths.distribution(scenario) if engine in ("paths", "both") else None
    oracle_dist = oracle.distribution(scenario) if engine in ("oracle", "both") else None
    delta = None
    if paths_dist is not None and oracle_dist is not None:
        delta = equivalence_delta(paths_dist, oracle_dist)
    report = RunReport(name, regime, engine, paths_dist, oracle_dist, delta, [])
    for q in queries:
        given, then = parse_query(scenario, q)
        result = paths.implication(report.dist, given, then)
        report.queries.append(
            QueryOutcome(q, given, then, result.holds, result.counter_probability)
        )
    report.scenario = scenario
    return report


def format_probability(p: float) -> str:
    """Nine significant digits, plus the nearest small rational when exact."""
    dec = f"{p:.9g}"
    frac = Fraction(p).limit_denominator(144)
    if frac.denominator > 1 and abs(p - float(frac)) <= ATOL_PROB:
        return f"{dec} = {frac.numerator}/{frac.denominator}"
    return dec


def render_table(report: RunReport, scenario: Scenario) -> str:
    lines = [f"scenario: {report.source}"]
    dist = report.dist
    lines.append(f"records: {dist.regime_tag}")
    if report.delta is not None:
        lines.append(f"engine: both (max |paths - oracle| = {report.delta:.3g})")
    else:
        lines.append(f"engine: {report.engine}")
    lines.append("")
    rows = [
        (" ".join(f"{agent}={label}" for agent, label in key), format_probability(w))
        for key, w in paths.sorted_outcomes(dist, scenario)
    ]
    width = max(len(r[0]) for r in rows)
    for name, value in rows:
        lines.append(f"{name:<{width}}  {value}")
    lines.append(f"{'total':<{width}}  {format_probability(dist.total())}")
    for q in report.queries:
        verdict = "HOLDS" if q.holds else "FAILS"
        detail = f"P({q.given[0]}={q.given[1]} and not {q.then[0]}={q.then[1]}) = " \
                 f"{format_probability(q.counter_probability)}"
        lines.append(f'query "{q.text}": {verdict}  [{detail}]')
    return "\n".join(lines) + "\n"


def render_json(report: RunReport, scenario: Scenario) -> str:
    dist = report.dist
    doc = {
        "scenario": report.source,
        "regime": report.regime,
        "engine": report.engine,
        "outcomes": [
            {"tuple": [[agent, label] for agent, label in key], "p": w}
            for key, w in paths.sorted_outcomes(dist, scenario)
        ],
        "delta": report.delta,
    }
    if report.queries:
        doc["queries"] = [
            {
                "query": q.text,
                "given": list(q.given),
                "then": list(q.then),
                "holds": q.holds,
                "counter_probability": q.counter_probability,
            }
            for q in report.queries
        ]
    return json.dumps(doc, indent=2) + "\n"


def dot_source(d: paths.OutcomeDistribution, s: Scenario) -> str:
    """DOT digraph of the real-path network; vanishing edges are dashed."""
    graph = paths.real_path_graph(d, s)
    lines = ["digraph real_paths {", "  rankdir=LR;", "  node [shape=box];"]
    for k, (agent, labels) in enumerate(graph.layers):
        lines.append(f"  subgraph cluster_{k} {{")
        lines.append(f'    label="{agent}";')
        for label in labels:
            lines.append(f'    "n{k}_{label}" [label="{label}"];')
        lines.append("  }")
    for k, la, lb, w, vanishing in graph.edges:
        style = ', style=dashed' if vanishing else ""
        lines.append(f'  "n{k}_{la}" -> "n{k + 1}_{lb}" [label="{w:.9g}"{style}];')
    lines.append("}")
    return "\n".join(lines) + "\n"


def export_graph(d: paths.OutcomeDistribution, s: Scenario, path: str | Path) -> Path:
    """Write the real-path graph as a DOT file."""
    path = Path(path)
    path.write_text(dot_source(d, s), "utf-8")
    return path


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathsum",
        description="Run measurement scenarios through the path engine and the dilation oracle.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run a built-in scenario or a .scn file")
    run_p.add_argument("source", help="built-in name (see 'pathsum list') or path to a .scn file")
    run_p.add_argument("--regime", default=None,
                       help="record regime for the built-in 2w2f "
                            "(both_erased, fbar_preserved, f_preserved, both_preserved)")
    run_p.add_argument("--engine", default="both", choices=("paths", "oracle", "both"))
    run_p.add_argument("--format", dest="fmt", default="table",
                       choices=("table", "json", "dot"))
    run_p.add_argument("--query", action="append", default=[],
                       help="implication query like 'Ok=>Heads' (repeatable)")
    run_p.add_argument("--out", default=None, help="write output to a file instead of stdout")
    sub.add_parser("list", help="list built-in scenarios")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        print("2w2f  (--regime both_erased | fbar_preserved | f_preserved | both_preserved)")
        for name in library.builtin_names():
            print(name)
        return 0
    try:
        report = run(args.source, engine=args.engine, regime=args.regime,
                     queries=tuple(args.query))
    except (CliError, ScenarioParseError, ScenarioValidationError,
            RecordErasedError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    scenario = report.scenario
    if args.fmt == "table":
        rendered = render_table(report, scenario)
    elif args.fmt == "json":
        rendered = render_json(report, scenario)
    else:
        rendered = dot_source(report.dist, scenario)

    if args.out:
        Path(args.out).write_text(rendered, "utf-8")
        if args.fmt == "dot":
            report.graph_path = args.out
        print(f"wrote {args.out}")
    else:
        sys.stdout.write(rendered)

    if report.delta is not None and report.delta > ATOL_PROB:
        print(f"error: engines disagree (max entrywise delta = {report.delta:.3g})",
              file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":
    sys.exit(main())
