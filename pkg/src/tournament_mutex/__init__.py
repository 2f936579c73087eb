"""Explicit-state verification of tournament-tree Peterson mutual exclusion.

Two machines are modelled: the classic tournament-tree generalization of
two-process Peterson and a fair variant in which every process, after
leaving the critical section, waits for one other process in cyclic order.
"""
from .bounds import (
    OvertakeReport,
    max_overtakes,
    overtake,
    overtake_report,
    overtakes,
    overtakes_closed_form,
    theorem_bound,
)
from .explorer import (
    ExploreConfig,
    LassoTrace,
    StateCapExceeded,
    StateGraph,
    TruncatedGraphError,
    backward_closure,
    explore,
    find_lasso,
    scc_condense,
    validate_lasso,
)
from .properties import (
    FairnessSet,
    LabelPattern,
    Verdict,
    check_mutex,
    check_request_availability,
    check_starvation_freedom,
    check_starvation_weak_fairness,
    default_fairness,
    min_overtake_bound,
    reference_fairness,
)
from .semantics import CLASSIC, FAIR, ActionLabel, GlobalState, enabled_actions, initial_state
from .topology import TreeTopology, build_topology, next_image, next_target, parent, sibling

__version__ = "0.1.0"
