"""Acceptance gate: one test per criterion, each reporting a PASS/FAIL line.

Timings are measured on fresh explorations (not the shared graph cache)
so the budgets reflect a cold run.
"""
import time
from contextlib import contextmanager

import pytest

from tournament_mutex.bounds import max_overtakes, overtakes, overtakes_closed_form, theorem_bound
from tournament_mutex.explorer import ExploreConfig, LassoTrace, explore, validate_lasso
from tournament_mutex.properties import (
    check_mutex,
    check_request_availability,
    check_starvation_freedom,
    check_starvation_weak_fairness,
    min_overtake_bound,
    reference_fairness,
)
from tournament_mutex.semantics import CLASSIC, FAIR, ActionLabel
from tournament_mutex.topology import build_topology, next_image, sibling

from conftest import ACCEPTANCE_LINES
from oracles import two_process_peterson

pytestmark = pytest.mark.slow


@contextmanager
def criterion(number, title):
    t0 = time.perf_counter()
    try:
        yield
    except BaseException as exc:
        line = f"FAIL  criterion {number:>2}: {title} ({type(exc).__name__}: {exc})"
        ACCEPTANCE_LINES.append(line)
        print(line)
        raise
    line = f"PASS  criterion {number:>2}: {title} [{time.perf_counter() - t0:.2f} s]"
    ACCEPTANCE_LINES.append(line)
    print(line)


def fresh(n, variant, workers=1):
    return explore(build_topology(n), variant, ExploreConfig(workers=workers))


def test_criterion_01_classic_verdicts():
    with criterion(1, "classic verdicts for N=3,4 in < 60 s"):
        t0 = time.perf_counter()
        for n in (3, 4):
            g = fresh(n, CLASSIC)
            assert check_mutex(g).holds
            assert check_request_availability(g).holds
            starving = [pid for pid in range(n) if not check_starvation_freedom(g, pid).holds]
            assert starving, f"N={n}: starvation freedom unexpectedly holds"
        elapsed = time.perf_counter() - t0
        assert elapsed < 60, f"took {elapsed:.1f} s"


def test_criterion_02_starvation_lasso():
    with criterion(2, "starvation lasso for process 0, N=3 classic"):
        g = fresh(3, CLASSIC)
        v = check_starvation_freedom(g, 0)
        assert not v.holds
        lasso = v.witness
        assert isinstance(lasso, LassoTrace)
        assert ActionLabel(0, "set_flag", 1, 0, True) in lasso.stem
        assert ActionLabel(0, "set_wait", 1, 0) in lasso.stem
        assert ActionLabel(2, "enter") in lasso.cycle
        assert ActionLabel(2, "leave") in lasso.cycle
        assert ActionLabel(0, "enter") not in lasso.cycle
        assert validate_lasso(g, lasso)


def test_criterion_03_weak_fairness():
    with criterion(3, "weak-fairness starvation freedom, N=3 classic, reference fairness list"):
        g = fresh(3, CLASSIC)
        assert check_starvation_weak_fairness(g, 0, reference_fairness()).holds


def test_criterion_04_fair_verdicts():
    with criterion(4, "fair verdicts with B=4, B=6 for N=3,4 in < 10 min"):
        t0 = time.perf_counter()
        for n, expected in ((3, 4), (4, 6)):
            g = fresh(n, FAIR)
            assert check_mutex(g).holds
            assert check_request_availability(g).holds
            assert all(check_starvation_freedom(g, pid).holds for pid in range(n))
            v = min_overtake_bound(g)
            assert v.holds and v.detail["bound"] == expected, v.detail
            del g
        elapsed = time.perf_counter() - t0
        assert elapsed < 600, f"took {elapsed:.1f} s"


def test_criterion_05_next_image():
    with criterion(5, "next image equals filtered set for N in 3..64 in < 1 s"):
        t0 = time.perf_counter()
        for n in range(3, 65):
            topo = build_topology(n)
            for i in range(n):
                sib = sibling(topo, i)
                expected = set(range(n)) - {i} - ({sib} if sib is not None else set())
                image = next_image(topo, i)
                assert image == expected, (n, i)
                assert len(image) == (n - 1 if sib is None else n - 2)
        elapsed = time.perf_counter() - t0
        assert elapsed < 1, f"took {elapsed:.2f} s"


def test_criterion_06_closed_form():
    with criterion(6, "closed-form overtakes equals the summation for N in 3..64 in < 1 s"):
        t0 = time.perf_counter()
        for n in range(3, 65):
            topo = build_topology(n)
            for i in range(n):
                assert overtakes_closed_form(topo, i) == overtakes(topo, i), (n, i)
        elapsed = time.perf_counter() - t0
        assert elapsed < 1, f"took {elapsed:.2f} s"


def test_criterion_07_maximum():
    with criterion(7, "max overtakes within (N-1)(N-2) with the stated argmax; N=3 gives 4 at 0"):
        assert max_overtakes(build_topology(3)) == (4, 0)
        for n in range(4, 65):
            topo = build_topology(n)
            top, arg = max_overtakes(topo)
            assert top <= theorem_bound(n) == (n - 1) * (n - 2)
            assert arg == n - 1
            assert overtakes(topo, arg) == top == max(overtakes(topo, i) for i in range(n))


def test_criterion_08_cross_validation():
    with criterion(8, "model-checked B per process within the analytic count; global B equals the maximum"):
        for n in (3, 4):
            g = fresh(n, FAIR)
            topo = g.topo
            v = min_overtake_bound(g)
            for pid, b in v.detail["per_process"].items():
                assert b <= overtakes(topo, pid), (n, pid, b)
            assert v.detail["bound"] == max_overtakes(topo)[0]
            del g


def test_criterion_09_determinism():
    with criterion(9, "state and transition counts stable across workers {1,8} and repeated runs"):
        for n, variant in ((2, CLASSIC), (3, CLASSIC), (4, CLASSIC), (3, FAIR), (4, FAIR)):
            counts = set()
            for workers in (1, 8, 8):
                g = fresh(n, variant, workers)
                counts.add((g.n_states, g.n_transitions))
                del g
            assert len(counts) == 1, (n, variant, counts)


def test_criterion_10_two_processes():
    with criterion(10, "N=2 classic: mutex, starvation freedom, finite bound, two-process model counts"):
        _, states, edges = two_process_peterson()
        for _ in range(2):
            g = fresh(2, CLASSIC)
            assert check_mutex(g).holds
            assert all(check_starvation_freedom(g, pid).holds for pid in range(2))
            v = min_overtake_bound(g)
            assert v.holds and isinstance(v.detail["bound"], int)
            assert (g.n_states, g.n_transitions) == (len(states), len(edges))


def test_stretch_classic_five_processes():
    with criterion("1+", "stretch: classic verdicts for N=5"):
        g = fresh(5, CLASSIC)
        assert check_mutex(g).holds
        assert check_request_availability(g).holds
        assert not check_starvation_freedom(g, 0).holds
