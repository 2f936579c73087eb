"""
=============================================
Bounded overtaking in the fair variant
=============================================

In the fair variant a process that leaves the critical section waits for
one other process before requesting again.  That makes overtaking finite.
We compare the model-checked bound with the counting argument.
"""

# %%
# Model-checked bound
# -------------------

from tournament_mutex import FAIR, build_topology, explore, min_overtake_bound, overtake_report

for n in (3, 4):
    g = explore(build_topology(n), FAIR)
    v = min_overtake_bound(g)
    print(f"N = {n}: {g.n_states} states, B = {v.detail['bound']}, per process {v.detail['per_process']}")

# %%
# Counting overtakes
# ------------------
#
# ``overtake(i, j)`` counts how often ``i`` can enter ahead of a requesting
# ``j``: twice for the sibling, otherwise once per process ``i`` may wait
# for.  The worst process is compared with ``(N - 1)(N - 2)``.

import numpy as np

for n in (3, 4, 5, 8, 16):
    rep = overtake_report(build_topology(n))
    counts = np.array([rep.per_process[j] for j in range(n)])
    bound = "-" if rep.theorem_bound is None else rep.theorem_bound
    print(f"N = {n:2d}: max {rep.maximum:4d} at process {rep.argmax:2d}, "
          f"mean {counts.mean():7.2f}, (N-1)(N-2) = {bound}")
