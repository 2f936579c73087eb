"""Reachable state graph construction and the graph algorithms run on it."""
from __future__ import annotations

import heapq
import os
from collections import deque
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components, dijkstra

from .semantics import ActionLabel, GlobalState, enabled_actions, initial_state, step
from .topology import TreeTopology

__all__ = [
    "ExploreConfig",
    "StateGraph",
    "StateCapExceeded",
    "TruncatedGraphError",
    "Condensation",
    "LassoTrace",
    "FiniteTrace",
    "explore",
    "scc_condense",
    "backward_closure",
    "forward_closure",
    "find_lasso",
    "shortest_trace",
    "replay",
    "validate_lasso",
    "to_dot",
]

WORKERS_ENV = "TOURNAMENT_MUTEX_WORKERS"


def default_workers() -> int:
    return max(1, int(os.environ.get(WORKERS_ENV, "1")))


@dataclass(frozen=True)
class ExploreConfig:
    max_states: int | None = None
    workers: int = field(default_factory=default_workers)
    batch_size: int = 4096

    def __post_init__(self):
        if self.max_states is not None and self.max_states < 1:
            raise ValueError("max_states must be at least 1")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")


class TruncatedGraphError(ValueError):
    """A checker was handed a graph whose exploration hit the state cap."""


class StateCapExceeded(RuntimeError):
    def __init__(self, graph: "StateGraph"):
        super().__init__(f"state cap exceeded after {graph.n_states} states")
        self.graph = graph


class StateGraph:
    """Deduplicated reachable transition system.

    States are numbered in BFS discovery order with the initial state at 0.
    Transitions are stored column-wise (``src``, ``lab``, ``dst``) sorted by
    source, with labels interned in ``labels``.
    """

    initial = 0

    def __init__(self, topo, variant, states, labels, src, lab, dst, truncated=False):
        self.topo: TreeTopology = topo
        self.variant: str = variant
        self.states: list[GlobalState] = states
        self.index: dict[GlobalState, int] = {s: k for k, s in enumerate(states)}
        self.labels: list[ActionLabel] = labels
        self.label_ids: dict[ActionLabel, int] = {a: k for k, a in enumerate(labels)}
        self.src = np.asarray(src, dtype=np.int64)
        self.lab = np.asarray(lab, dtype=np.int64)
        self.dst = np.asarray(dst, dtype=np.int64)
        self.truncated = truncated
        n = len(states)
        order = np.argsort(self.src, kind="stable")
        if not np.array_equal(order, np.arange(len(order))):
            self.src, self.lab, self.dst = self.src[order], self.lab[order], self.dst[order]
        self.out_ptr = np.searchsorted(self.src, np.arange(n + 1))
        self.in_order = np.argsort(self.dst, kind="stable")
        self.in_ptr = np.searchsorted(self.dst[self.in_order], np.arange(n + 1))
        out_deg = np.diff(self.out_ptr)
        # a truncated graph has unexpanded frontier states that are not deadlocks
        self.deadlocks: list[int] = [] if truncated else np.flatnonzero(out_deg == 0).tolist()

    @property
    def n_states(self) -> int:
        return len(self.states)

    @property
    def n_transitions(self) -> int:
        return len(self.src)

    @property
    def transitions(self) -> Iterator[tuple[int, ActionLabel, int]]:
        labels = self.labels
        for s, a, d in zip(self.src.tolist(), self.lab.tolist(), self.dst.tolist()):
            yield s, labels[a], d

    def out_edges(self, v: int) -> range:
        return range(self.out_ptr[v], self.out_ptr[v + 1])

    def successors(self, v: int) -> list[tuple[ActionLabel, int]]:
        return [(self.labels[self.lab[e]], int(self.dst[e])) for e in self.out_edges(v)]

    def label_mask(self, pred: Callable[[ActionLabel], bool]) -> np.ndarray:
        """Boolean mask over transitions whose label satisfies ``pred``."""
        per_label = np.fromiter((bool(pred(a)) for a in self.labels), dtype=bool, count=len(self.labels))
        return per_label[self.lab] if len(self.lab) else np.zeros(0, dtype=bool)

    def require_complete(self) -> None:
        if self.truncated:
            raise TruncatedGraphError("graph exploration was truncated; no verdicts on partial state spaces")

    def stats(self) -> dict[str, int]:
        return {"states": self.n_states, "transitions": self.n_transitions, "deadlocks": len(self.deadlocks)}


def _expand(topo, variant, batch):
    return [enabled_actions(topo, variant, s) for s in batch]


def explore(topo: TreeTopology, variant: str, cfg: ExploreConfig | None = None) -> StateGraph:
    """Breadth-first closure of the transition relation from the initial state.

    Frontier batches may be expanded by several workers, but discovered
    states are always committed in frontier order, so numbering does not
    depend on ``cfg.workers``.
    """
    cfg = cfg or ExploreConfig()
    s0 = initial_state(topo, variant)
    states = [s0]
    index = {s0: 0}
    labels: list[ActionLabel] = []
    label_ids: dict[ActionLabel, int] = {}
    src: list[int] = []
    lab: list[int] = []
    dst: list[int] = []
    cap = cfg.max_states
    head = 0
    pool = ThreadPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        while head < len(states):
            chunk = cfg.batch_size * cfg.workers
            frontier = states[head : head + chunk]
            if pool is None:
                expanded = _expand(topo, variant, frontier)
            else:
                size = -(-len(frontier) // cfg.workers)
                parts = [frontier[k : k + size] for k in range(0, len(frontier), size)]
                expanded = [succ for part in pool.map(lambda b: _expand(topo, variant, b), parts) for succ in part]
            for offset, succs in enumerate(expanded):
                v = head + offset
                for label, t in succs:
                    w = index.get(t)
                    if w is None:
                        if cap is not None and len(states) >= cap:
                            graph = StateGraph(topo, variant, states, labels, src, lab, dst, truncated=True)
                            raise StateCapExceeded(graph)
                        w = len(states)
                        index[t] = w
                        states.append(t)
                    a = label_ids.get(label)
                    if a is None:
                        a = label_ids[label] = len(labels)
                        labels.append(label)
                    src.append(v)
                    lab.append(a)
                    dst.append(w)
            head += len(frontier)
    finally:
        if pool is not None:
            pool.shutdown()
    return StateGraph(topo, variant, states, labels, src, lab, dst)


# -- graph algorithms -------------------------------------------------------


def _matrix(n: int, src: np.ndarray, dst: np.ndarray) -> csr_matrix:
    return csr_matrix((np.ones(len(src), dtype=np.int8), (src, dst)), shape=(n, n))


def _reach(n: int, src: np.ndarray, dst: np.ndarray, seeds: Iterable[int]) -> np.ndarray:
    """Mask of nodes reachable from ``seeds`` along ``src -> dst`` edges."""
    seeds = np.fromiter(seeds, dtype=np.int64)
    mask = np.zeros(n, dtype=bool)
    if len(seeds) == 0:
        return mask
    # a virtual super-source at index n fans out to every seed
    s = np.concatenate([src, np.full(len(seeds), n)])
    d = np.concatenate([dst, seeds])
    order = breadth_first_order(_matrix(n + 1, s, d), n, directed=True, return_predecessors=False)
    mask[order[order < n]] = True
    return mask


def forward_closure(g: StateGraph, seeds: Iterable[int], edge_mask: np.ndarray | None = None) -> set[int]:
    g.require_complete()
    src, dst = (g.src, g.dst) if edge_mask is None else (g.src[edge_mask], g.dst[edge_mask])
    return set(np.flatnonzero(_reach(g.n_states, src, dst, seeds)).tolist())


def backward_closure(g: StateGraph, seeds: Iterable[int]) -> set[int]:
    """All states from which some seed is reachable (seeds included)."""
    g.require_complete()
    return set(np.flatnonzero(_reach(g.n_states, g.dst, g.src, seeds)).tolist())


@dataclass
class Condensation:
    component: np.ndarray  # state -> component id
    members: list[list[int]]
    trivial: np.ndarray  # component id -> single state without self-loop
    dag_edges: set[tuple[int, int]]

    @property
    def n_components(self) -> int:
        return len(self.members)

    def topological_order(self) -> list[int]:
        succ: dict[int, list[int]] = {}
        indeg = [0] * self.n_components
        for a, b in self.dag_edges:
            succ.setdefault(a, []).append(b)
            indeg[b] += 1
        queue = deque(c for c in range(self.n_components) if indeg[c] == 0)
        order = []
        while queue:
            c = queue.popleft()
            order.append(c)
            for b in succ.get(c, ()):
                indeg[b] -= 1
                if indeg[b] == 0:
                    queue.append(b)
        return order


def _components(n: int, src: np.ndarray, dst: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """SCC id per node and a per-component non-triviality mask."""
    if n == 0:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)
    n_comp, comp = connected_components(_matrix(n, src, dst), directed=True, connection="strong")
    sizes = np.bincount(comp, minlength=n_comp)
    nontrivial = sizes > 1
    loops = src[src == dst]
    nontrivial[comp[loops]] = True
    return comp.astype(np.int64), nontrivial


def scc_condense(g: StateGraph, edge_mask: np.ndarray | None = None) -> Condensation:
    """Strongly connected components of ``g`` (optionally of an edge subset)."""
    g.require_complete()
    src, dst = (g.src, g.dst) if edge_mask is None else (g.src[edge_mask], g.dst[edge_mask])
    comp, nontrivial = _components(g.n_states, src, dst)
    members: list[list[int]] = [[] for _ in range(len(nontrivial))]
    for v, c in enumerate(comp.tolist()):
        members[c].append(v)
    cs, cd = comp[src], comp[dst]
    cross = cs != cd
    dag = set(zip(cs[cross].tolist(), cd[cross].tolist()))
    return Condensation(comp, members, ~nontrivial, dag)


# -- traces -------------------------------------------------------------------


@dataclass
class FiniteTrace:
    labels: list[ActionLabel]
    states: list[int]  # len(labels) + 1 state indices, starting at the initial state

    @property
    def end(self) -> int:
        return self.states[-1]


@dataclass
class LassoTrace:
    stem: list[ActionLabel]
    cycle: list[ActionLabel]
    cycle_states: list[int]
    stem_states: list[int] = field(default_factory=list)

    def __post_init__(self):
        if not self.cycle:
            raise ValueError("a lasso needs a non-empty cycle")
        if len(self.cycle_states) != len(self.cycle):
            raise ValueError("cycle_states must list one state per cycle action")


def _bfs_path(g: StateGraph, sources: Sequence[int], goal: Callable[[int], bool],
              edge_ok: np.ndarray | None = None, within: np.ndarray | None = None,
              require_step: bool = False):
    """Shortest path (edge ids) from any source to a node satisfying ``goal``."""
    pred: dict[int, tuple[int, int] | None] = {}
    queue: deque[int] = deque()
    for s in sources:
        if s not in pred:
            pred[s] = None
            queue.append(s)
    if not require_step:
        for s in sources:
            if goal(s):
                return s, []
    ptr, dsts = g.out_ptr, g.dst
    while queue:
        v = queue.popleft()
        for e in range(ptr[v], ptr[v + 1]):
            if edge_ok is not None and not edge_ok[e]:
                continue
            w = int(dsts[e])
            if within is not None and not within[w]:
                continue
            if goal(w):
                path = [e]
                while pred[v] is not None:
                    u, e2 = pred[v]
                    path.append(e2)
                    v = u
                return w, path[::-1]
            if w not in pred:
                pred[w] = (v, e)
                queue.append(w)
    return None, None


def shortest_trace(g: StateGraph, targets: Iterable[int]) -> FiniteTrace | None:
    """Shortest access path from the initial state to any of ``targets``."""
    targets = set(targets)
    end, path = _bfs_path(g, [g.initial], targets.__contains__)
    if end is None:
        return None
    return FiniteTrace([g.labels[g.lab[e]] for e in path], [g.initial] + [int(g.dst[e]) for e in path])


def _distances_from_initial(g: StateGraph) -> np.ndarray:
    dist = dijkstra(_matrix(g.n_states, g.src, g.dst), indices=g.initial, unweighted=True)
    return np.where(np.isinf(dist), -1, dist).astype(np.int64)


def find_lasso(
    g: StateGraph,
    entry: Iterable[int],
    forbidden: Callable[[ActionLabel], bool],
    must_visit: Sequence[np.ndarray] = (),
    cycle_within: np.ndarray | None = None,
    prefer: np.ndarray | None = None,
) -> LassoTrace | None:
    """Search for an infinite run that reaches an ``entry`` state and then
    never takes a ``forbidden`` action.

    ``must_visit`` holds boolean state masks; the returned cycle passes
    through at least one state of every mask (generalized Büchi
    acceptance).  With no masks any cycle qualifies.  ``cycle_within``
    optionally confines the whole cycle to a set of states.  ``prefer``
    ranks states; cycles through the highest-ranked qualifying states win,
    and ties go to the cycle reachable by the shortest stem.
    """
    g.require_complete()
    entry = sorted(set(entry))
    if not entry:
        return None
    allowed = ~g.label_mask(forbidden)
    reach = _reach(g.n_states, g.src[allowed], g.dst[allowed], entry)
    sub = allowed & reach[g.src]
    cyc = sub if cycle_within is None else sub & cycle_within[g.src] & cycle_within[g.dst]
    comp, nontrivial = _components(g.n_states, g.src[cyc], g.dst[cyc])
    good = nontrivial.copy()
    good_nodes = reach.copy() if cycle_within is None else reach & cycle_within
    for mask in must_visit:
        hit = np.zeros(len(nontrivial), dtype=bool)
        hit[comp[mask & reach]] = True
        good &= hit
    good_nodes &= good[comp]
    if not good_nodes.any():
        return None
    if prefer is not None:
        good_nodes &= prefer == prefer[good_nodes].max()

    # stem: shortest (unrestricted) path to an entry state, then restricted path into a good SCC
    dist0 = _distances_from_initial(g)
    best: dict[int, int] = {}
    pred: dict[int, int | None] = {}
    heap = []
    for e in entry:
        best[e] = int(dist0[e])
        pred[e] = None
        heap.append((best[e], e))
    heapq.heapify(heap)
    start = None
    while heap:
        d, v = heapq.heappop(heap)
        if d > best[v]:
            continue
        if good_nodes[v]:
            start = v
            break
        for e in range(g.out_ptr[v], g.out_ptr[v + 1]):
            if not sub[e]:
                continue
            w = int(g.dst[e])
            if w not in best or d + 1 < best[w]:
                best[w] = d + 1
                pred[w] = e
                heapq.heappush(heap, (d + 1, w))
    assert start is not None

    tail: list[int] = []
    v = start
    while pred[v] is not None:
        e = pred[v]
        tail.append(e)
        v = int(g.src[e])
    first_entry = v
    head_trace = shortest_trace(g, [first_entry])
    stem_edges_labels = head_trace.labels + [g.labels[g.lab[e]] for e in reversed(tail)]
    stem_states = head_trace.states + [int(g.dst[e]) for e in reversed(tail)]

    within = comp == comp[start]
    cycle_edges: list[int] = []
    here = start
    for mask in must_visit:
        if mask[here]:
            continue
        here, path = _bfs_path(g, [here], lambda w, m=mask: bool(m[w]), cyc, within)
        cycle_edges += path
    _, path = _bfs_path(g, [here], lambda w: w == start, cyc, within, require_step=not cycle_edges)
    cycle_edges += path
    cycle_states = [start] + [int(g.dst[e]) for e in cycle_edges[:-1]]
    return LassoTrace(
        stem=stem_edges_labels,
        cycle=[g.labels[g.lab[e]] for e in cycle_edges],
        cycle_states=cycle_states,
        stem_states=stem_states,
    )


def replay(topo: TreeTopology, variant: str, labels: Iterable[ActionLabel],
           start: GlobalState | None = None) -> list[GlobalState]:
    """Re-execute ``labels`` through the transition rules; returns the visited states."""
    s = start if start is not None else initial_state(topo, variant)
    visited = [s]
    for a in labels:
        s = step(topo, variant, s, a)
        visited.append(s)
    return visited


def validate_lasso(g: StateGraph, trace: LassoTrace) -> bool:
    """Independent check that ``trace`` is a genuine run of the machine."""
    try:
        stem = replay(g.topo, g.variant, trace.stem)
        loop = replay(g.topo, g.variant, trace.cycle, start=stem[-1])
    except ValueError:
        return False
    if stem[-1] != g.states[trace.cycle_states[0]] or loop[-1] != loop[0]:
        return False
    return all(loop[k] == g.states[c] for k, c in enumerate(trace.cycle_states))


def to_dot(g: StateGraph) -> str:
    lines = ["digraph states {", f"  init -> {g.initial};"]
    for s, a, d in g.transitions:
        lines.append(f'  {s} -> {d} [label="{a}"];')
    lines.append("}")
    return "\n".join(lines) + "\n"
