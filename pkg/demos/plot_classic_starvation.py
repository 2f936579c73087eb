"""
=============================================
Starvation in the classic tournament lock
=============================================

The classic lock is safe, but a process can wait forever while another
keeps re-entering.  We explore the state space for three and four
processes, run the verdict table and print the starvation lasso.
"""

# %%
# Verdict table
# -------------

from tournament_mutex import (
    CLASSIC,
    build_topology,
    check_mutex,
    check_request_availability,
    check_starvation_freedom,
    check_starvation_weak_fairness,
    explore,
    reference_fairness,
    validate_lasso,
)
from tournament_mutex.cli import print_counterexample

for n in (3, 4):
    g = explore(build_topology(n), CLASSIC)
    print(f"N = {n}: {g.n_states} states, {g.n_transitions} transitions")
    print("  mutual exclusion     ", "yes" if check_mutex(g).holds else "no")
    print("  can always request   ", "yes" if check_request_availability(g).holds else "no")
    starving = [pid for pid in range(n) if not check_starvation_freedom(g, pid).holds]
    print("  starvation-free      ", "yes" if not starving else f"no (processes {starving})")

# %%
# A starvation lasso
# ------------------
#
# Process 0 requests and climbs to its leaf's parent.  Process 2 then
# cycles through the critical section indefinitely.  The stem is the
# prefix before the loop.

g = explore(build_topology(3), CLASSIC)
lasso = check_starvation_freedom(g, 0).witness
print(print_counterexample(lasso))
print("replays on the model:", validate_lasso(g, lasso))

# %%
# Dismissing unfair runs
# ----------------------
#
# The loop above keeps a few of process 0's actions enabled without ever
# taking them.  Requiring weak fairness on those actions rules it out.

print("starvation-free under weak fairness:",
      check_starvation_weak_fairness(g, 0, reference_fairness()).holds)
