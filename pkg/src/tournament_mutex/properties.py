"""Decision procedures for the correctness requirements over a complete state graph.

Each modal formula is reduced to a graph question: mutual exclusion to
reachability, request availability to backward closure, starvation freedom
to cycle/sink detection after a request, and bounded overtaking to a
longest-path computation over the SCC condensation.
"""
from __future__ import annotations

import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Union

import numpy as np

from .explorer import (
    FiniteTrace,
    LassoTrace,
    StateGraph,
    _components,
    _reach,
    backward_closure,
    find_lasso,
    shortest_trace,
)
from .semantics import ActionLabel, Phase

__all__ = [
    "Verdict",
    "LabelPattern",
    "FairnessSet",
    "UNBOUNDED",
    "PER_STATE",
    "SINGLE_ACTION",
    "INFINITELY_OFTEN",
    "READINGS",
    "check_mutex",
    "check_request_availability",
    "check_starvation_freedom",
    "check_starvation_weak_fairness",
    "min_overtake_bound",
    "request_label",
    "request_entry_states",
    "default_fairness",
    "reference_fairness",
    "parse_patterns",
]

UNBOUNDED = "unbounded"

# readings of "some fairness action stays enabled" on a counterexample cycle
PER_STATE = "per-state"  # every cycle state enables some fairness action
SINGLE_ACTION = "single-action"  # one fairness action is enabled in every cycle state
INFINITELY_OFTEN = "infinitely-often"  # some cycle state enables a fairness action
READINGS = (PER_STATE, SINGLE_ACTION, INFINITELY_OFTEN)

Witness = Union[LassoTrace, FiniteTrace, None]


@dataclass
class Verdict:
    property: str
    holds: bool
    witness: Witness = None
    detail: dict = field(default_factory=dict)


class LabelPattern(NamedTuple):
    """Action pattern; ``None`` fields are wildcards. Matches actions of any process."""

    kind: str
    node: int | None = None
    side: int | None = None
    value: bool | None = None

    def matches(self, a: ActionLabel) -> bool:
        return (
            a.kind == self.kind
            and (self.node is None or a.node == self.node)
            and (self.side is None or a.side == self.side)
            and (self.value is None or a.value == self.value)
        )

    def __str__(self) -> str:
        def f(x):
            if x is None:
                return "*"
            if isinstance(x, bool):
                return "true" if x else "false"
            return str(x)

        args = [self.node, self.side] + ([self.value] if self.kind in ("set_flag", "get_flag") else [])
        return f"{self.kind}({','.join(f(x) for x in args)})"


@dataclass(frozen=True)
class FairnessSet:
    pid: int
    labels: frozenset[LabelPattern]

    def __post_init__(self):
        if not self.labels:
            raise ValueError("a fairness set needs at least one pattern")

    def matches(self, a: ActionLabel) -> bool:
        return any(p.matches(a) for p in self.labels)


_PATTERN = re.compile(r"\s*(\w+)\s*(?:\(([^)]*)\))?\s*")


def parse_patterns(text: str) -> frozenset[LabelPattern]:
    """Parse ``"set_wait(1,*); set_flag(0,0,true)"`` into patterns."""
    out = set()
    for chunk in filter(None, (c.strip() for c in text.split(";"))):
        m = _PATTERN.fullmatch(chunk)
        if not m:
            raise ValueError(f"cannot parse action pattern {chunk!r}")
        kind, args = m.group(1), m.group(2)
        fields: list = []
        for k, raw in enumerate(x.strip() for x in (args.split(",") if args else [])):
            if raw in ("*", "_", ""):
                fields.append(None)
            elif k == 2:
                if raw not in ("true", "false"):
                    raise ValueError(f"bad value {raw!r} in {chunk!r}")
                fields.append(raw == "true")
            else:
                fields.append(int(raw))
        if len(fields) > 3:
            raise ValueError(f"too many arguments in {chunk!r}")
        out.add(LabelPattern(kind, *fields))
    return frozenset(out)


def request_label(g: StateGraph, pid: int) -> ActionLabel:
    topo = g.topo
    return ActionLabel(pid, "set_flag", topo.init_node[pid], topo.init_side[pid], True)


def request_entry_states(g: StateGraph, pid: int) -> set[int]:
    """Targets of ``pid``'s request transitions: the obligation starts after the request fires."""
    a = g.label_ids.get(request_label(g, pid))
    if a is None:
        return set()
    return set(g.dst[g.lab == a].tolist())


def _is_enter(pid: int):
    return lambda a: a.kind == "enter" and a.pid == pid


def progress_rank(g: StateGraph, pid: int) -> np.ndarray:
    """How far ``pid`` has climbed towards the root in each state.

    A process cannot move backwards before it enters, so its rank is
    constant along any counterexample cycle; lasso searches prefer cycles
    where the starved process got as close to the critical section as the
    schedule allows.
    """
    levels = {n: k for k, (n, _) in enumerate(g.topo.root_path[pid])}
    return np.fromiter(
        (levels[s.procs[pid].node] * len(Phase) + s.procs[pid].phase for s in g.states),
        dtype=np.int64,
        count=g.n_states,
    )


# -- safety -------------------------------------------------------------------


def _double_enter_by_path(g: StateGraph) -> tuple[int, ...] | None:
    """Search the product of the graph with an "inside critical section" bit
    for an ``enter`` taken while the bit is set; returns the edge path."""
    start = (g.initial, False)
    pred = {start: None}
    queue = deque([start])
    labels, lab, dst, ptr = g.labels, g.lab, g.dst, g.out_ptr
    while queue:
        v, inside = node = queue.popleft()
        for e in range(ptr[v], ptr[v + 1]):
            kind = labels[lab[e]].kind
            if kind == "enter":
                if inside:
                    path = [e]
                    while pred[node] is not None:
                        node, e2 = pred[node]
                        path.append(e2)
                    return tuple(reversed(path))
                nxt = (int(dst[e]), True)
            elif kind == "leave":
                nxt = (int(dst[e]), False)
            else:
                nxt = (int(dst[e]), inside)
            if nxt not in pred:
                pred[nxt] = (node, e)
                queue.append(nxt)
    return None


def check_mutex(g: StateGraph) -> Verdict:
    """At most one process between ``enter`` and ``leave``, checked both on
    states and on action sequences; the two must agree."""
    g.require_complete()
    crowded = [k for k, s in enumerate(g.states) if sum(p.phase == Phase.LEAVE for p in s.procs) >= 2]
    path = _double_enter_by_path(g)
    if bool(crowded) != (path is not None):
        raise AssertionError("state-based and path-based mutual exclusion checks disagree")
    if not crowded:
        return Verdict("mutex", True)
    witness = FiniteTrace([g.labels[g.lab[e]] for e in path], [g.initial] + [int(g.dst[e]) for e in path])
    return Verdict("mutex", False, witness, {"violating_states": len(crowded)})


def check_request_availability(g: StateGraph) -> Verdict:
    """From every reachable state, every process can still reach its request."""
    g.require_complete()
    everything = set(range(g.n_states))
    for pid in g.topo.processes():
        a = g.label_ids.get(request_label(g, pid))
        sources = set(g.src[g.lab == a].tolist()) if a is not None else set()
        missing = everything - backward_closure(g, sources)
        if missing:
            witness = shortest_trace(g, missing)
            return Verdict("request", False, witness, {"pid": pid, "stuck_states": len(missing)})
    return Verdict("request", True)


# -- liveness -----------------------------------------------------------------


def _deadlock_after_request(g: StateGraph, pid: int, entry: set[int]) -> FiniteTrace | None:
    if not g.deadlocks:
        return None
    allowed = ~g.label_mask(_is_enter(pid))
    reach = _reach(g.n_states, g.src[allowed], g.dst[allowed], entry)
    stuck = [d for d in g.deadlocks if reach[d]]
    return shortest_trace(g, stuck) if stuck else None


def check_starvation_freedom(g: StateGraph, pid: int) -> Verdict:
    """After ``pid`` requests, ``enter(pid)`` happens within finitely many steps."""
    g.require_complete()
    entry = request_entry_states(g, pid)
    lasso = find_lasso(g, entry, _is_enter(pid), prefer=progress_rank(g, pid))
    if lasso is not None:
        return Verdict("starvation", False, lasso, {"pid": pid})
    sink = _deadlock_after_request(g, pid, entry)
    if sink is not None:
        return Verdict("starvation", False, sink, {"pid": pid})
    return Verdict("starvation", True, None, {"pid": pid})


def _enabled_masks(g: StateGraph, fair: FairnessSet) -> dict[ActionLabel, np.ndarray]:
    """For each concrete fairness action in the graph, the states enabling it."""
    out = {}
    for a_id, a in enumerate(g.labels):
        if fair.matches(a):
            mask = np.zeros(g.n_states, dtype=bool)
            mask[g.src[g.lab == a_id]] = True
            out[a] = mask
    return out


def check_starvation_weak_fairness(
    g: StateGraph, pid: int, fair: FairnessSet, reading: str = PER_STATE
) -> Verdict:
    """Starvation freedom where runs that keep a fairness action enabled are dismissed.

    ``reading`` fixes what makes a request-then-never-enter cycle unfair:
    ``per-state`` if each of its states enables some fairness action,
    ``single-action`` if one fairness action is enabled throughout, and
    ``infinitely-often`` if at least one of its states enables one.
    """
    g.require_complete()
    if fair.pid != pid:
        raise ValueError("fairness set belongs to a different process")
    if reading not in READINGS:
        raise ValueError(f"unknown fairness reading {reading!r}")
    entry = request_entry_states(g, pid)
    enabled = _enabled_masks(g, fair)
    any_enabled = np.zeros(g.n_states, dtype=bool)
    for mask in enabled.values():
        any_enabled |= mask
    detail = {"pid": pid, "reading": reading}
    rank = progress_rank(g, pid)

    if reading == PER_STATE:
        lasso = find_lasso(g, entry, _is_enter(pid), must_visit=[~any_enabled], prefer=rank)
    elif reading == SINGLE_ACTION:
        lasso = find_lasso(g, entry, _is_enter(pid), must_visit=[~m for m in enabled.values()], prefer=rank)
    else:
        lasso = find_lasso(g, entry, _is_enter(pid), cycle_within=~any_enabled, prefer=rank)
    if lasso is not None:
        return Verdict("starvation-fair", False, lasso, detail)
    sink = _deadlock_after_request(g, pid, entry)
    if sink is not None:
        return Verdict("starvation-fair", False, sink, detail)
    return Verdict("starvation-fair", True, None, detail)


# -- bounded overtaking -------------------------------------------------------


def _overtake_bound_for(g: StateGraph, pid: int) -> int | str:
    entry = request_entry_states(g, pid)
    if not entry:
        return 0
    enter_pid = g.label_mask(_is_enter(pid))
    allowed = ~enter_pid
    reach = _reach(g.n_states, g.src[allowed], g.dst[allowed], entry)
    sub = allowed & reach[g.src]
    src, dst = g.src[sub], g.dst[sub]
    weight = g.label_mask(lambda a: a.kind == "enter" and a.pid != pid)[sub].astype(np.int64)
    comp, _ = _components(g.n_states, src, dst)
    cs, cd = comp[src], comp[dst]
    if np.any((cs == cd) & (weight > 0)):
        return UNBOUNDED

    # longest path over the condensation, in topological order (Kahn)
    n_comp = int(comp.max()) + 1
    cross = cs != cd
    ca, cb, cw = cs[cross], cd[cross], weight[cross]
    order = np.argsort(ca, kind="stable")
    ca, cb, cw = ca[order], cb[order], cw[order]
    ptr = np.searchsorted(ca, np.arange(n_comp + 1)).tolist()
    cb_l, cw_l = cb.tolist(), cw.tolist()
    indeg = np.bincount(cb, minlength=n_comp).tolist()
    best = [-1] * n_comp
    for v in entry:
        best[comp[v]] = 0
    live = set(comp[reach].tolist())
    queue = deque(c for c in live if indeg[c] == 0)
    top = 0
    while queue:
        c = queue.popleft()
        here = best[c]
        if here > top:
            top = here
        for k in range(ptr[c], ptr[c + 1]):
            b = cb_l[k]
            if here >= 0 and here + cw_l[k] > best[b]:
                best[b] = here + cw_l[k]
            indeg[b] -= 1
            if indeg[b] == 0:
                queue.append(b)
    return top


def min_overtake_bound(g: StateGraph, pids: Iterable[int] | None = None) -> Verdict:
    """Least ``B`` such that, after a request by a process, other processes
    enter at most ``B`` times before it does.

    ``detail["per_process"]`` holds the bound for each process and
    ``detail["bound"]`` their maximum (or ``"unbounded"``).
    """
    g.require_complete()
    pids = list(g.topo.processes() if pids is None else pids)
    per = {pid: _overtake_bound_for(g, pid) for pid in pids}
    unbounded = [pid for pid, b in per.items() if b == UNBOUNDED]
    if unbounded:
        pid = unbounded[0]
        lasso = find_lasso(g, request_entry_states(g, pid), _is_enter(pid), prefer=progress_rank(g, pid))
        return Verdict("bound", False, lasso, {"bound": UNBOUNDED, "per_process": per, "pid": pid})
    return Verdict("bound", True, None, {"bound": max(per.values()), "per_process": per})


# -- fairness presets ---------------------------------------------------------


def default_fairness(g: StateGraph, pid: int) -> FairnessSet:
    """Fairness patterns for ``pid`` along its path below the root.

    At every non-root node ``m`` of the path, with ``pid`` on side ``s``:
    writes and reads of ``wait_m``, the read of the competitor's flag
    as ``false``, the competitor's reset of that flag, and ``pid``'s own flag
    write one level up.
    """
    topo = g.topo
    path = topo.root_path[pid]
    pats = set()
    for k, (m, s) in enumerate(path[:-1]):
        up_node, up_side = path[k + 1]
        pats |= {
            LabelPattern("set_wait", m),
            LabelPattern("get_wait", m),
            LabelPattern("get_flag", m, 1 - s, False),
            LabelPattern("set_flag", m, 1 - s, False),
            LabelPattern("set_flag", up_node, up_side, True),
        }
    if not pats:
        # single-node tree: nothing below the root
        m, s = path[0]
        pats = {LabelPattern("set_wait", m), LabelPattern("get_wait", m),
                LabelPattern("get_flag", m, 1 - s, False), LabelPattern("set_flag", m, 1 - s, False)}
    return FairnessSet(pid, frozenset(pats))


REFERENCE_FAIRNESS_N3 = "set_wait(1,*); set_flag(0,0,true); get_flag(1,1,false); set_flag(1,1,false); get_wait(1,*)"


def reference_fairness() -> FairnessSet:
    """The explicit action list stated for process 0 with three processes."""
    return FairnessSet(0, parse_patterns(REFERENCE_FAIRNESS_N3))
