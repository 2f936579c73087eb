"""Command-line front end.

Explores the requested machine once, runs the selected checks over the
shared graph and prints a verdict table (or a JSON report).  The exit
status compares verdicts with the recorded expectations in
``data/expectations.json``: 0 when all match, 1 on any mismatch, 2 on a
configuration error or when exploration hits the state cap.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from importlib import resources
from typing import Sequence

from .bounds import overtake_report
from .explorer import (
    ExploreConfig,
    FiniteTrace,
    LassoTrace,
    StateCapExceeded,
    default_workers,
    explore,
    to_dot,
)
from .properties import (
    PER_STATE,
    READINGS,
    FairnessSet,
    check_mutex,
    check_request_availability,
    check_starvation_freedom,
    check_starvation_weak_fairness,
    default_fairness,
    min_overtake_bound,
    reference_fairness,
    parse_patterns,
)
from .semantics import CLASSIC, FAIR, VARIANTS, ActionLabel
from .topology import build_topology

__all__ = ["RunConfig", "CheckResult", "Report", "run", "main", "print_counterexample", "load_expectations"]

CHECKS = ("mutex", "request", "starvation", "starvation-fair", "bound", "analytic")
GRAPH_CHECKS = frozenset(CHECKS) - {"analytic"}

COLUMN_TITLES = {
    "mutex": "Mutual exclusion",
    "request": "Always eventually request CS",
    "starvation": "Starvation freedom",
    "starvation-fair": "Starvation freedom (weak fairness)",
    "bound": "Bounded overtaking",
    "analytic": "Analytic overtake bound",
}


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    n_processes: int
    variant: str = CLASSIC
    checks: tuple[str, ...] = ("mutex", "request", "starvation")
    max_states: int | None = None
    workers: int = field(default_factory=default_workers)
    output: str = "text"
    export_graph: str | None = None
    fairness_spec: str | None = None
    fairness_reading: str = PER_STATE
    pids: tuple[int, ...] | None = None

    def validate(self) -> None:
        if self.variant not in VARIANTS:
            raise ConfigError(f"unknown variant {self.variant!r}")
        if self.n_processes < 2:
            raise ConfigError("need at least 2 processes")
        if self.variant == FAIR and self.n_processes < 3:
            raise ConfigError("the fair variant needs at least 3 processes")
        if not self.checks:
            raise ConfigError("no checks requested")
        unknown = set(self.checks) - set(CHECKS)
        if unknown:
            raise ConfigError(f"unknown checks: {', '.join(sorted(unknown))}")
        if "analytic" in self.checks and self.n_processes < 3:
            raise ConfigError("the analytic bound needs at least 3 processes")
        if self.output not in ("text", "json"):
            raise ConfigError(f"unknown output format {self.output!r}")
        if self.fairness_reading not in READINGS:
            raise ConfigError(f"unknown fairness reading {self.fairness_reading!r}")
        if self.max_states is not None and self.max_states < 1:
            raise ConfigError("max-states must be positive")
        if self.workers < 1:
            raise ConfigError("workers must be positive")
        for pid in self.pids or ():
            if not 0 <= pid < self.n_processes:
                raise ConfigError(f"process id {pid} out of range")


@dataclass
class CheckResult:
    name: str
    holds: bool
    time_ms: float
    expected: object = None
    matches: bool | None = None
    witness: dict | None = None
    detail: dict = field(default_factory=dict)


@dataclass
class Report:
    config: dict
    graph: dict | None
    checks: list[CheckResult]
    analytic: dict | None = None
    truncated: bool = False

    @property
    def mismatches(self) -> list[str]:
        return [c.name for c in self.checks if c.matches is False]

    @property
    def exit_code(self) -> int:
        if self.truncated:
            return 2
        return 1 if self.mismatches else 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        d = json.loads(text)
        d["checks"] = [CheckResult(**c) for c in d["checks"]]
        return cls(**d)


def load_expectations() -> dict:
    text = resources.files("tournament_mutex").joinpath("data/expectations.json").read_text()
    return json.loads(text)


def _expected(expectations: dict, variant: str, n: int, check: str):
    table = expectations.get(FAIR if check == "analytic" else variant, {})
    return table.get(str(n), {}).get(check)


# -- rendering ----------------------------------------------------------------


def _label_line(a: ActionLabel) -> str:
    return f"{a.pid}: {a.body()}"


def print_counterexample(trace: LassoTrace | FiniteTrace) -> str:
    if isinstance(trace, FiniteTrace):
        return "\n".join([_label_line(a) for a in trace.labels] + ["-- deadlock --"])
    lines = [_label_line(a) for a in trace.stem]
    lines.append("-- cycle --")
    lines += [_label_line(a) for a in trace.cycle]
    return "\n".join(lines)


def _witness_dict(w) -> dict | None:
    if w is None:
        return None
    if isinstance(w, LassoTrace):
        return {
            "kind": "lasso",
            "stem": [a._asdict() for a in w.stem],
            "cycle": [a._asdict() for a in w.cycle],
            "cycle_states": list(w.cycle_states),
            "stem_states": list(w.stem_states),
        }
    return {"kind": "finite", "labels": [a._asdict() for a in w.labels], "states": list(w.states)}


def _witness_text(d: dict) -> str:
    if d["kind"] == "lasso":
        trace = LassoTrace([ActionLabel(**a) for a in d["stem"]], [ActionLabel(**a) for a in d["cycle"]],
                           d["cycle_states"])
    else:
        trace = FiniteTrace([ActionLabel(**a) for a in d["labels"]], d["states"])
    return print_counterexample(trace)


def _jsonable(detail: dict) -> dict:
    # JSON object keys are strings; normalize up front so reports round-trip
    out = {}
    for k, v in detail.items():
        out[str(k)] = _jsonable(v) if isinstance(v, dict) else v
    return out


def render_text(report: Report) -> str:
    cfg = report.config
    lines = [f"N = {cfg['n_processes']}, variant = {cfg['variant']}"]
    if report.graph:
        g = report.graph
        lines.append(f"states: {g['states']}  transitions: {g['transitions']}  deadlocks: {g['deadlocks']}")
    if report.truncated:
        lines.append("exploration truncated at the state cap; no verdicts")
        return "\n".join(lines)
    width = max(len(COLUMN_TITLES[c.name]) for c in report.checks)
    lines.append(f"{'property':<{width}}  result  time (ms)  expected")
    for c in report.checks:
        mark = "✓" if c.holds else "✗"
        extra = ""
        if "bound" in c.detail:
            extra = f"  B = {c.detail['bound']}"
        elif c.name == "analytic":
            extra = f"  max overtakes = {c.detail['maximum']} (process {c.detail['argmax']})"
        exp = "-" if c.expected is None else str(c.expected).lower()
        if c.matches is False:
            exp += "  MISMATCH"
        lines.append(f"{COLUMN_TITLES[c.name]:<{width}}  {mark:^6}  {c.time_ms:9.1f}  {exp}{extra}")
    for c in report.checks:
        if c.witness is not None:
            lines.append("")
            lines.append(f"counterexample for {c.name} (process {c.detail.get('pid', '?')}):")
            lines.append(_witness_text(c.witness))
    return "\n".join(lines)


# -- running ------------------------------------------------------------------


def _fairness_for(cfg: RunConfig, g, pid: int) -> FairnessSet:
    spec = cfg.fairness_spec
    if spec is None or spec == "default":
        return default_fairness(g, pid)
    if spec == "reference":
        return FairnessSet(pid, reference_fairness().labels)
    return FairnessSet(pid, parse_patterns(spec))


def _per_pid(check, pids):
    verdicts = [check(pid) for pid in pids]
    failing = next((v for v in verdicts if not v.holds), None)
    chosen = failing or verdicts[0]
    detail = dict(chosen.detail)
    detail["per_process"] = {v.detail["pid"]: v.holds for v in verdicts}
    return chosen.holds if failing is None else False, chosen.witness, detail


def run(cfg: RunConfig) -> Report:
    cfg.validate()
    expectations = load_expectations()
    topo = build_topology(cfg.n_processes)
    config_echo = asdict(cfg)
    config_echo["checks"] = list(cfg.checks)
    config_echo["pids"] = None if cfg.pids is None else list(cfg.pids)
    g = None
    graph_stats = None
    if GRAPH_CHECKS & set(cfg.checks) or cfg.export_graph:
        try:
            g = explore(topo, cfg.variant, ExploreConfig(max_states=cfg.max_states, workers=cfg.workers))
        except StateCapExceeded as exc:
            return Report(config_echo, exc.graph.stats(), [], truncated=True)
        graph_stats = g.stats()
        if cfg.export_graph:
            with open(cfg.export_graph, "w") as fh:
                fh.write(to_dot(g))
    pids = list(cfg.pids) if cfg.pids is not None else list(topo.processes())

    results = []
    analytic = None
    for name in cfg.checks:
        t0 = time.perf_counter()
        witness = None
        detail: dict = {}
        if name == "mutex":
            v = check_mutex(g)
            holds, witness, detail = v.holds, v.witness, v.detail
        elif name == "request":
            v = check_request_availability(g)
            holds, witness, detail = v.holds, v.witness, v.detail
        elif name == "starvation":
            holds, witness, detail = _per_pid(lambda p: check_starvation_freedom(g, p), pids)
        elif name == "starvation-fair":
            holds, witness, detail = _per_pid(
                lambda p: check_starvation_weak_fairness(g, p, _fairness_for(cfg, g, p), cfg.fairness_reading),
                pids,
            )
        elif name == "bound":
            v = min_overtake_bound(g, pids)
            holds, witness, detail = v.holds, v.witness, v.detail
        else:
            rep = overtake_report(topo)
            analytic = rep.to_dict()
            holds = True
            detail = {"maximum": rep.maximum, "argmax": rep.argmax, "theorem_bound": rep.theorem_bound}
        elapsed = (time.perf_counter() - t0) * 1000.0

        expected = _expected(expectations, cfg.variant, cfg.n_processes, name)
        if expected is None:
            matches = None
        elif name == "bound":
            matches = detail["bound"] == expected
        elif name == "analytic":
            matches = detail["maximum"] == expected
        else:
            matches = holds == expected
        results.append(CheckResult(name, holds, round(elapsed, 3), expected, matches,
                                   _witness_dict(witness), _jsonable(detail)))
    return Report(config_echo, graph_stats, results, analytic)


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="tournament-mutex",
        description="Explicit-state checks of tournament-tree Peterson locks.",
    )
    p.add_argument("--n", type=int, required=True, help="number of processes")
    p.add_argument("--variant", choices=VARIANTS, default=CLASSIC)
    p.add_argument("--checks", default="mutex,request,starvation",
                   help=f"comma-separated subset of {','.join(CHECKS)}")
    p.add_argument("--pids", default=None, help="restrict liveness checks to these processes")
    p.add_argument("--max-states", type=int, default=None)
    p.add_argument("--workers", type=int, default=None,
                   help="successor-generation workers (default from $TOURNAMENT_MUTEX_WORKERS or 1)")
    p.add_argument("--output", choices=("text", "json"), default="text")
    p.add_argument("--out", default=None, help="write the report here instead of stdout")
    p.add_argument("--export-graph", default=None, help="write the state graph in DOT format")
    p.add_argument("--fairness", default=None,
                   help='"default", "reference", or patterns such as "set_wait(1,*); get_flag(1,1,false)"')
    p.add_argument("--fairness-reading", choices=READINGS, default=PER_STATE)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = _parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig(
            n_processes=args.n,
            variant=args.variant,
            checks=tuple(c.strip() for c in args.checks.split(",") if c.strip()),
            max_states=args.max_states,
            workers=args.workers if args.workers is not None else default_workers(),
            output=args.output,
            export_graph=args.export_graph,
            fairness_spec=args.fairness,
            fairness_reading=args.fairness_reading,
            pids=None if args.pids is None else tuple(int(x) for x in args.pids.split(",")),
        )
        if cfg.fairness_spec not in (None, "default", "reference"):
            parse_patterns(cfg.fairness_spec)
        report = run(cfg)
    except ValueError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    if report.truncated:
        print(f"{parser.prog}: state cap of {cfg.max_states} exceeded; no verdicts", file=sys.stderr)
    text = report.to_json() if cfg.output == "json" else render_text(report)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return report.exit_code


if __name__ == "__main__":
    sys.exit(main())
