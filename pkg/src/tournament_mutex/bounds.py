"""Closed-form overtake counts for the fair algorithm.

``overtake(topo, i, j)`` bounds how often process ``i`` can enter before a
requesting process ``j`` does; ``overtakes(topo, j)`` sums that over all
``i``.  The three-case closed form and the maximum over processes are
provided next to the summation so they can be checked against each other.
"""
from __future__ import annotations

from dataclasses import asdict, dataclass

from .topology import TreeTopology, next_image, sibling

__all__ = [
    "OvertakeReport",
    "overtake",
    "overtakes",
    "overtakes_closed_form",
    "max_overtakes",
    "theorem_bound",
    "overtake_report",
]


def _require_fair(topo: TreeTopology) -> None:
    if topo.n_processes < 3:
        raise ValueError("overtake counts are defined for N >= 3")


def overtake(topo: TreeTopology, i: int, j: int) -> int:
    _require_fair(topo)
    if i == j:
        return 0
    if i == sibling(topo, j):
        return 2
    return len(next_image(topo, i))


def overtakes(topo: TreeTopology, j: int) -> int:
    return sum(overtake(topo, i, j) for i in topo.processes())


def overtakes_closed_form(topo: TreeTopology, i: int) -> int:
    _require_fair(topo)
    n = topo.n_processes
    if sibling(topo, i) is None:
        return (n - 1) * (n - 2)
    return (2 if n % 2 == 0 else 3) + (n - 2) ** 2


def max_overtakes(topo: TreeTopology) -> tuple[int, int]:
    """Largest overtake count and a process attaining it.

    Ties go to process 0 when N = 3 and to process N - 1 otherwise (the
    processes known to be worst off), falling back to the highest id.
    """
    _require_fair(topo)
    counts = [overtakes(topo, j) for j in topo.processes()]
    top = max(counts)
    tied = [j for j, c in enumerate(counts) if c == top]
    favourite = 0 if topo.n_processes == 3 else topo.n_processes - 1
    return top, favourite if favourite in tied else tied[-1]


def theorem_bound(n_processes: int) -> int:
    if n_processes < 4:
        raise ValueError("the (N-1)(N-2) bound needs N >= 4")
    return (n_processes - 1) * (n_processes - 2)


@dataclass
class OvertakeReport:
    n_processes: int
    per_pair: dict[tuple[int, int], int]
    per_process: dict[int, int]
    maximum: int
    argmax: int
    theorem_bound: int | None  # None for N = 3, where the theorem does not apply
    attains_theorem_bound: bool | None

    def to_dict(self) -> dict:
        d = asdict(self)
        d["per_pair"] = [[i, j, c] for (i, j), c in sorted(self.per_pair.items())]
        d["per_process"] = {str(j): c for j, c in sorted(self.per_process.items())}
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "OvertakeReport":
        d = dict(d)
        d["per_pair"] = {(i, j): c for i, j, c in d["per_pair"]}
        d["per_process"] = {int(j): c for j, c in d["per_process"].items()}
        return cls(**d)


def overtake_report(topo: TreeTopology) -> OvertakeReport:
    n = topo.n_processes
    per_pair = {(i, j): overtake(topo, i, j) for i in topo.processes() for j in topo.processes()}
    per_process = {j: sum(per_pair[i, j] for i in topo.processes()) for j in topo.processes()}
    maximum, argmax = max_overtakes(topo)
    bound = theorem_bound(n) if n >= 4 else None
    return OvertakeReport(
        n_processes=n,
        per_pair=per_pair,
        per_process=per_process,
        maximum=maximum,
        argmax=argmax,
        theorem_bound=bound,
        attains_theorem_bound=None if bound is None else maximum == bound,
    )
