"""Tournament tree arithmetic and the cyclic waiting order of the fair variant.

Nodes are numbered breadth-first from the root ``0``; node ``n`` has parent
``ceil(n / 2) - 1``.  Processes ``2k`` and ``2k + 1`` start on the left and
right side of leaf ``n_leaves - 1 + k``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

__all__ = [
    "TreeTopology",
    "build_topology",
    "parent",
    "sibling",
    "next_target",
    "next_image",
]


def parent(node: int) -> int:
    """Parent of a non-root node."""
    if node < 1:
        raise ValueError(f"node {node} has no parent")
    return (node + 1) // 2 - 1


@dataclass(frozen=True)
class TreeTopology:
    """Immutable tree layout for ``n_processes`` competitors.

    Besides the fields describing the tree, lookup tables used on the hot
    path of state exploration are precomputed here: ``side_at[i][n]`` is the
    side process ``i`` occupies at node ``n`` of its root path, ``below[i][n]``
    is the node it returns to when unwinding from ``n``, ``siblings[i]`` is
    its sibling (or ``None``), ``next_table[t][i]`` caches
    :func:`next_target` and ``next_images[i]`` caches :func:`next_image`
    (both empty when ``N == 2``).
    """

    n_processes: int
    n_leaves: int
    n_nodes: int
    init_node: tuple[int, ...]
    init_side: tuple[int, ...]
    root_path: tuple[tuple[tuple[int, int], ...], ...]
    siblings: tuple[int | None, ...] = field(repr=False)
    side_at: tuple[dict[int, int], ...] = field(repr=False, compare=False)
    below: tuple[dict[int, int], ...] = field(repr=False, compare=False)
    next_table: tuple[tuple[int, ...], ...] = field(repr=False, compare=False)
    next_images: tuple[frozenset[int], ...] = field(repr=False, compare=False)

    @property
    def depth(self) -> int:
        return len(self.root_path[0])

    def processes(self) -> range:
        return range(self.n_processes)

    def owner(self, node: int, side: int) -> int | None:
        """Process whose root path uses ``(node, side)`` first, if it is a leaf slot."""
        for i in self.processes():
            if self.init_node[i] == node and self.init_side[i] == side:
                return i
        return None


def _path_to_root(node: int, side: int) -> tuple[tuple[int, int], ...]:
    path = [(node, side)]
    while node != 0:
        node, side = parent(node), (node + 1) % 2
        path.append((node, side))
    return tuple(path)


def _next_unrolled(init_node: tuple[int, ...], t: int, i: int) -> int:
    n = len(init_node)
    candidate = (t + 1) % n
    while init_node[candidate] == init_node[i]:
        candidate = (candidate + 1) % n
    return candidate


def build_topology(n_processes: int) -> TreeTopology:
    if n_processes < 2:
        raise ValueError(f"need at least 2 processes, got {n_processes}")
    half = -(-n_processes // 2)
    n_leaves = 1
    while n_leaves < half:
        n_leaves *= 2
    init_node = tuple(n_leaves - 1 + i // 2 for i in range(n_processes))
    init_side = tuple(i % 2 for i in range(n_processes))
    paths = tuple(_path_to_root(init_node[i], init_side[i]) for i in range(n_processes))

    siblings = []
    for i in range(n_processes):
        mates = [j for j in range(n_processes) if j != i and init_node[j] == init_node[i]]
        siblings.append(mates[0] if mates else None)

    side_at = tuple({n: s for n, s in path} for path in paths)
    below = tuple({path[k + 1][0]: path[k][0] for k in range(len(path) - 1)} for path in paths)

    if n_processes >= 3:
        next_table = tuple(
            tuple(_next_unrolled(init_node, t, i) for i in range(n_processes))
            for t in range(n_processes)
        )
        next_images = tuple(frozenset(row[i] for row in next_table) for i in range(n_processes))
    else:
        next_table, next_images = (), ()

    return TreeTopology(
        n_processes=n_processes,
        n_leaves=n_leaves,
        n_nodes=2 * n_leaves - 1,
        init_node=init_node,
        init_side=init_side,
        root_path=paths,
        siblings=tuple(siblings),
        side_at=side_at,
        below=below,
        next_table=next_table,
        next_images=next_images,
    )


def _check_pid(topo: TreeTopology, i: int) -> None:
    if not 0 <= i < topo.n_processes:
        raise ValueError(f"process id {i} out of range for N={topo.n_processes}")


def sibling(topo: TreeTopology, i: int) -> int | None:
    """The other process starting at ``i``'s leaf, or ``None`` for an unpaired leaf."""
    _check_pid(topo, i)
    return topo.siblings[i]


def next_target(topo: TreeTopology, t: int, i: int) -> int:
    """Process that ``i`` waits for after ``t``: the cyclic successor of ``t``
    skipping everything that shares ``i``'s initial node."""
    if topo.n_processes < 3:
        raise ValueError("the waiting order is only defined for N >= 3")
    _check_pid(topo, t)
    _check_pid(topo, i)
    return topo.next_table[t][i]


def next_image(topo: TreeTopology, i: int) -> frozenset[int]:
    """Every process ``i`` can end up waiting for: ``{next(t, i) | t}``."""
    if topo.n_processes < 3:
        raise ValueError("the waiting order is only defined for N >= 3")
    _check_pid(topo, i)
    return topo.next_images[i]
