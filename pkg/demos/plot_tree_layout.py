"""
=============================================
Tree layout and the waiting order
=============================================

Processes compete pairwise at the leaves of a binary tree and climb to the
root one two-process lock at a time.  This script prints the layout for a
few sizes and shows which processes a leaver can end up waiting for in the
fair variant.
"""

# %%
# Leaves and root paths
# ---------------------
#
# Process ``i`` starts at leaf node ``n_leaves - 1 + i // 2`` on side
# ``i % 2``.  With an odd count the last leaf has a single occupant.

from tournament_mutex import build_topology, next_image, next_target, sibling

for n in (2, 3, 5, 8):
    topo = build_topology(n)
    print(f"N = {n}: {topo.n_leaves} leaves, {topo.n_nodes} nodes, depth {topo.depth}")
    for i in topo.processes():
        path = " -> ".join(f"{node}/{side}" for node, side in topo.root_path[i])
        print(f"  process {i} (sibling {sibling(topo, i)}): {path}")

# %%
# The waiting order
# -----------------
#
# After leaving, a process waits until its current target's initial flag
# drops, then moves the target one step along the cycle, skipping itself
# and its sibling.  Every other process is eventually visited.

topo = build_topology(5)
for i in topo.processes():
    t, order = i, []
    for _ in range(len(next_image(topo, i))):
        t = next_target(topo, t, i)
        order.append(t)
    print(f"process {i} waits in turn for {order}; image size {len(next_image(topo, i))}")
