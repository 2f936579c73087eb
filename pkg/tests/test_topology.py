import math

import pytest
from hypothesis import given, strategies as st

from tournament_mutex.topology import build_topology, next_image, next_target, parent, sibling


def next_by_definition(n, t, i):
    """The waiting order exactly as its recursive definition reads."""
    init = build_topology(n).init_node
    candidate = (t + 1) % n
    if init[candidate] != init[i]:
        return candidate
    return next_by_definition(n, candidate, i)


def leaves_by_search(n):
    k = 0
    while 2 ** k < math.ceil(n / 2):
        k += 1
    return 2 ** k


class TestBuild:
    def test_three_processes(self):
        topo = build_topology(3)
        assert topo.init_node == (1, 1, 2)
        assert topo.init_side == (0, 1, 0)
        assert topo.n_nodes == 3

    def test_two_processes_share_the_root(self):
        topo = build_topology(2)
        assert topo.init_node == (0, 0)
        assert topo.n_nodes == 1
        assert topo.root_path == (((0, 0),), ((0, 1),))

    def test_five_processes(self):
        topo = build_topology(5)
        assert topo.n_leaves == 4
        assert topo.n_nodes == 7
        assert topo.init_node == (3, 3, 4, 4, 5)

    @pytest.mark.parametrize("n", [-1, 0, 1])
    def test_rejects_fewer_than_two(self, n):
        with pytest.raises(ValueError):
            build_topology(n)

    @pytest.mark.parametrize("n", range(2, 65))
    def test_layout_invariants(self, n):
        topo = build_topology(n)
        assert topo.n_leaves == leaves_by_search(n)
        assert topo.n_nodes == 2 * topo.n_leaves - 1
        slots = {(topo.init_node[i], topo.init_side[i]) for i in range(n)}
        assert len(slots) == n
        for i in range(n):
            path = topo.root_path[i]
            assert path[0] == (topo.init_node[i], topo.init_side[i])
            assert path[-1][0] == 0
            for (a, _), (b, s) in zip(path, path[1:]):
                assert b == parent(a)
                assert s == (a + 1) % 2
            assert all(0 <= node < topo.n_nodes for node, _ in path)


class TestParent:
    @pytest.mark.parametrize("node, expected", [(1, 0), (2, 0), (5, 2), (6, 2), (3, 1)])
    def test_examples(self, node, expected):
        assert parent(node) == expected

    def test_root_has_no_parent(self):
        with pytest.raises(ValueError):
            parent(0)


class TestSibling:
    def test_examples(self):
        assert sibling(build_topology(3), 0) == 1
        assert sibling(build_topology(3), 2) is None
        assert sibling(build_topology(4), 2) == 3

    @pytest.mark.parametrize("n", range(2, 20))
    def test_sibling_shares_initial_node(self, n):
        topo = build_topology(n)
        for i in range(n):
            j = sibling(topo, i)
            if j is not None:
                assert j != i
                assert topo.init_node[j] == topo.init_node[i]
                assert sibling(topo, j) == i

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            sibling(build_topology(3), 3)


class TestNext:
    @pytest.mark.parametrize("n, t, i, expected", [(3, 0, 2, 1), (3, 1, 2, 0), (4, 0, 1, 2)])
    def test_examples(self, n, t, i, expected):
        assert next_target(build_topology(n), t, i) == expected

    def test_two_processes_rejected(self):
        with pytest.raises(ValueError):
            next_target(build_topology(2), 0, 0)

    @given(st.integers(3, 40).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 1), st.integers(0, n - 1))))
    def test_agrees_with_recursive_definition(self, args):
        n, t, i = args
        topo = build_topology(n)
        got = next_target(topo, t, i)
        assert got == next_by_definition(n, t, i)
        assert got != i and got != sibling(topo, i)

    @pytest.mark.parametrize(
        "n, i, expected", [(3, 2, {0, 1}), (4, 0, {2, 3}), (5, 4, {0, 1, 2, 3})]
    )
    def test_image_examples(self, n, i, expected):
        assert next_image(build_topology(n), i) == expected

    @pytest.mark.parametrize("n", range(3, 65))
    def test_image_is_everyone_but_self_and_sibling(self, n):
        topo = build_topology(n)
        for i in range(n):
            image = next_image(topo, i)
            assert image == {j for j in range(n) if j != i and j != sibling(topo, i)}
            assert len(image) == (n - 1 if sibling(topo, i) is None else n - 2)

    @pytest.mark.parametrize("n", [3, 4, 5, 8, 13])
    def test_iterating_covers_image_within_n_steps(self, n):
        topo = build_topology(n)
        for i in range(n):
            for start in range(n):
                seen, t = set(), start
                for _ in range(n):
                    t = next_target(topo, t, i)
                    seen.add(t)
                assert seen == next_image(topo, i)
