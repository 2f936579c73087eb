"""Atomic-step transition machines for the classic and the fair tournament lock.

Every transition touches exactly one shared variable (a read or a write of a
flag or wait variable), or is an ``enter``/``leave`` of the critical section.
Busy-wait loops are not transitions: a process spinning in a loop simply has
no enabled step until the guard it waits on changes.
"""
from __future__ import annotations

from enum import IntEnum
from typing import NamedTuple

from .topology import TreeTopology, next_target

__all__ = [
    "CLASSIC",
    "FAIR",
    "VARIANTS",
    "Phase",
    "ProcessState",
    "SharedVars",
    "GlobalState",
    "ActionLabel",
    "initial_state",
    "enabled_actions",
    "step",
]

CLASSIC = "classic"
FAIR = "fair"
VARIANTS = (CLASSIC, FAIR)

KINDS = ("set_flag", "get_flag", "set_wait", "get_wait", "enter", "leave")


class Phase(IntEnum):
    SET_FLAG = 0
    SET_WAIT = 1
    GATE = 2
    ENTER = 3
    LEAVE = 4
    UNWIND = 5
    WAIT_FOR_TARGET = 6


class ProcessState(NamedTuple):
    pid: int
    phase: Phase
    node: int
    target: int | None = None


class SharedVars(NamedTuple):
    """Packed shared memory: bit ``2 * node + side`` of ``flags`` is
    ``flag_node[side]``; bit ``node`` of ``waits`` is ``wait_node``."""

    flags: int = 0
    waits: int = 0

    def flag(self, node: int, side: int) -> bool:
        return bool(self.flags >> (2 * node + side) & 1)

    def wait(self, node: int) -> int:
        return self.waits >> node & 1


class GlobalState(NamedTuple):
    procs: tuple[ProcessState, ...]
    shared: SharedVars


class ActionLabel(NamedTuple):
    pid: int
    kind: str
    node: int | None = None
    side: int | None = None
    value: bool | None = None

    def body(self) -> str:
        if self.kind in ("enter", "leave"):
            return self.kind
        args = [str(self.node), str(self.side)]
        if self.value is not None:
            args.append("true" if self.value else "false")
        return f"{self.kind}({','.join(args)})"

    def __str__(self) -> str:
        return f"{self.pid}:{self.body()}"


def _check_variant(topo: TreeTopology, variant: str) -> None:
    if variant not in VARIANTS:
        raise ValueError(f"unknown variant {variant!r}")
    if variant == FAIR and topo.n_processes < 3:
        raise ValueError("the fair variant requires at least 3 processes")


def initial_state(topo: TreeTopology, variant: str) -> GlobalState:
    _check_variant(topo, variant)
    procs = []
    for i in topo.processes():
        target = next_target(topo, i, i) if variant == FAIR else None
        procs.append(ProcessState(i, Phase.SET_FLAG, topo.init_node[i], target))
    return GlobalState(tuple(procs), SharedVars())


def _replace(procs: tuple[ProcessState, ...], i: int, p: ProcessState) -> tuple[ProcessState, ...]:
    return procs[:i] + (p,) + procs[i + 1 :]


def enabled_actions(
    topo: TreeTopology, variant: str, s: GlobalState
) -> list[tuple[ActionLabel, GlobalState]]:
    """All atomic steps enabled in ``s`` with their successor states,
    ordered by process id (gate exits: flag read before wait read)."""
    procs = s.procs
    flags, waits = s.shared
    out = []
    for p in procs:
        i, phase, n = p.pid, p.phase, p.node
        if phase == Phase.SET_FLAG:
            side = topo.side_at[i][n]
            shared = SharedVars(flags | 1 << (2 * n + side), waits)
            out.append((
                ActionLabel(i, "set_flag", n, side, True),
                GlobalState(_replace(procs, i, p._replace(phase=Phase.SET_WAIT)), shared),
            ))
        elif phase == Phase.SET_WAIT:
            side = topo.side_at[i][n]
            shared = SharedVars(flags, (waits & ~(1 << n)) | side << n)
            out.append((
                ActionLabel(i, "set_wait", n, side),
                GlobalState(_replace(procs, i, p._replace(phase=Phase.GATE)), shared),
            ))
        elif phase == Phase.GATE:
            other = 1 - topo.side_at[i][n]
            if n == 0:
                moved = p._replace(phase=Phase.ENTER)
            else:
                moved = p._replace(phase=Phase.SET_FLAG, node=(n + 1) // 2 - 1)
            if not flags >> (2 * n + other) & 1:
                out.append((ActionLabel(i, "get_flag", n, other, False),
                            GlobalState(_replace(procs, i, moved), s.shared)))
            if (waits >> n & 1) == other:
                out.append((ActionLabel(i, "get_wait", n, other),
                            GlobalState(_replace(procs, i, moved), s.shared)))
        elif phase == Phase.ENTER:
            out.append((ActionLabel(i, "enter"),
                        GlobalState(_replace(procs, i, p._replace(phase=Phase.LEAVE)), s.shared)))
        elif phase == Phase.LEAVE:
            out.append((ActionLabel(i, "leave"),
                        GlobalState(_replace(procs, i, p._replace(phase=Phase.UNWIND)), s.shared)))
        elif phase == Phase.UNWIND:
            side = topo.side_at[i][n]
            shared = SharedVars(flags & ~(1 << (2 * n + side)), waits)
            if n != topo.init_node[i]:
                moved = p._replace(node=topo.below[i][n])
            elif variant == FAIR:
                moved = p._replace(phase=Phase.WAIT_FOR_TARGET)
            else:
                moved = p._replace(phase=Phase.SET_FLAG)
            out.append((ActionLabel(i, "set_flag", n, side, False),
                        GlobalState(_replace(procs, i, moved), shared)))
        else:  # WAIT_FOR_TARGET
            t = p.target
            tn, ts = topo.init_node[t], topo.init_side[t]
            if not flags >> (2 * tn + ts) & 1:
                moved = p._replace(phase=Phase.SET_FLAG, target=topo.next_table[t][i])
                out.append((ActionLabel(i, "get_flag", tn, ts, False),
                            GlobalState(_replace(procs, i, moved), s.shared)))
    return out


def step(topo: TreeTopology, variant: str, s: GlobalState, label: ActionLabel) -> GlobalState:
    """Successor of ``s`` under ``label``; raises if the step is not enabled."""
    for lab, succ in enabled_actions(topo, variant, s):
        if lab == label:
            return succ
    raise ValueError(f"action {label} is not enabled")
