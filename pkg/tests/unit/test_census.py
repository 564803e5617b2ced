"""Tests for pattern templates and the subgraph census."""

from math import comb

import pytest

from wishart_mask_lab.census import (
    CENSUS_PATTERNS,
    SubgraphCensus,
    brute_force_count,
    census,
    count,
    oriented_count,
)
from wishart_mask_lab.graphs import Graph, complete_bipartite, complete_graph, cycle_graph, erdos_renyi
from wishart_mask_lab.patterns import PLAIN_PATTERNS, Pattern, PatternError, PatternTag
from wishart_mask_lab.seeding import make_rng


def template_graph(pattern):
    template = pattern.template()
    orientation = None
    if template.sides is not None:
        left = [v for v, side in enumerate(template.sides) if side == "L"]
        right = [v for v, side in enumerate(template.sides) if side == "R"]
        orientation = (left, right)
    return Graph(template.n_vertices, template.edges, orientation)


class TestPatterns:
    """Test pattern construction and templates."""

    def test_star_and_biclique_names(self):
        assert Pattern.star(3).name == "K1K(3)"
        assert Pattern.oriented_biclique(2, 4).name == "OK(2,4)"
        assert str(Pattern(PatternTag.C4)) == "C4"

    def test_parameter_validation(self):
        with pytest.raises(PatternError):
            Pattern(PatternTag.K1K, ())
        with pytest.raises(PatternError):
            Pattern(PatternTag.OK, (0, 2))
        with pytest.raises(PatternError):
            Pattern(PatternTag.C3, (1,))

    def test_oriented_flags(self):
        assert Pattern(PatternTag.OP4).is_oriented
        assert Pattern.oriented_biclique(1, 3).is_oriented
        assert not Pattern.star(3).is_oriented

    def test_search_order_is_connected(self):
        for pattern in CENSUS_PATTERNS.values():
            template = pattern.template()
            order = template.search_order
            assert sorted(order) == list(range(template.n_vertices))
            for step, vertex in enumerate(order[1:], start=1):
                assert template.neighbors[vertex] & set(order[:step])

    @pytest.mark.parametrize("name", list(CENSUS_PATTERNS))
    def test_each_template_contains_one_copy_of_itself(self, name):
        pattern = CENSUS_PATTERNS[name]
        graph = template_graph(pattern)
        assert brute_force_count(graph, pattern) == 1
        if pattern.is_oriented:
            assert oriented_count(graph, pattern) == 1
        else:
            assert count(graph, pattern) == 1


class TestHandCheckedCounts:
    """Census counts on tiny graphs, against the fixture file."""

    def test_fixture_counts(self, pattern_shapes):
        for name, (graph, expected) in pattern_shapes.items():
            assert census(graph).as_dict() == expected, name

    def test_fixture_counts_match_brute_force(self, pattern_shapes):
        for name, (graph, expected) in pattern_shapes.items():
            for field, pattern in CENSUS_PATTERNS.items():
                if expected[field] is None:
                    continue
                assert brute_force_count(graph, pattern) == expected[field], (name, field)

    def test_documented_examples(self, k4, k23, k24):
        assert count(k4, Pattern(PatternTag.C3)) == 4
        assert count(k23, Pattern(PatternTag.C4)) == 3
        assert count(cycle_graph(5), Pattern(PatternTag.P2)) == 5
        assert oriented_count(complete_bipartite(3, 5), Pattern.oriented_biclique(1, 1)) == 15
        assert oriented_count(k24, Pattern.oriented_biclique(2, 4)) == 1
        assert oriented_count(k24, Pattern.oriented_biclique(4, 2)) == 0
        assert oriented_count(k23, Pattern(PatternTag.OP4)) == 6

    def test_edgeless_graph_has_no_copies(self, edgeless):
        for pattern in (*PLAIN_PATTERNS, Pattern.star(1), Pattern.star(3)):
            assert count(edgeless, pattern) == 0
        assert census(edgeless).num_e == 0

    def test_doubled_cycle_paths_agree(self):
        graph = erdos_renyi(8, 0.5, make_rng(7))
        pattern = Pattern(PatternTag.C4_2E)
        assert count(graph, pattern) == brute_force_count(graph, pattern)


class TestCountingErrors:
    """Test plain/oriented mismatches."""

    def test_count_rejects_oriented_pattern(self, k23):
        with pytest.raises(PatternError):
            count(k23, Pattern(PatternTag.OP4))

    def test_oriented_count_rejects_plain_pattern(self, k23):
        with pytest.raises(PatternError):
            oriented_count(k23, Pattern(PatternTag.C4))

    def test_oriented_count_needs_orientation(self, k4):
        with pytest.raises(PatternError):
            oriented_count(k4, Pattern.oriented_biclique(1, 3))

    def test_brute_force_needs_orientation(self, k4):
        with pytest.raises(PatternError):
            brute_force_count(k4, Pattern(PatternTag.OP4))


class TestCensus:
    """Test the census record."""

    @pytest.mark.parametrize("n", range(4, 13))
    def test_closed_forms_on_complete_graphs(self, n):
        c = census(complete_graph(n))
        assert c.num_c3 == comb(n, 3)
        assert c.num_c4 == 3 * comb(n, 4)
        assert c.num_p2 == n * comb(n - 1, 2)
        assert c.num_k13 == n * comb(n - 1, 3)
        assert c.num_k14 == n * comb(n - 1, 4)
        assert c.num_k18 == n * comb(n - 1, 8)

    def test_oriented_fields_absent_on_plain_graphs(self, k4):
        c = census(k4)
        assert c.onum_k13 is None
        assert c.onum_p4 is None
        with pytest.raises(PatternError):
            c.total("num_e", "onum_k24")

    def test_oriented_fields_on_bipartite_graphs(self, k24):
        c = census(k24)
        assert c.onum_k24 == 1
        assert c.num_c3 == 0
        assert c.total("onum_k13", "onum_k14") == 10

    def test_total(self, k4):
        assert census(k4).total("num_c4", "num_p2", "num_e") == 3 + 12 + 6

    def test_as_dict_keys_follow_field_order(self, k4):
        assert list(census(k4).as_dict()) == list(CENSUS_PATTERNS)
        assert set(SubgraphCensus.__dataclass_fields__) == set(CENSUS_PATTERNS)

    def test_census_is_cached_by_graph(self):
        assert census(complete_graph(6)) is census(complete_graph(6))

    @pytest.mark.parametrize("threads", [2, 4])
    def test_threads_do_not_change_counts(self, threads, k24):
        graph = erdos_renyi(30, 0.3, make_rng(5))
        assert census(graph, threads=threads) == census(graph)
        assert census(k24, threads=threads) == census(k24)

    def test_thread_count_must_be_positive(self, k4):
        with pytest.raises(ValueError, match="Thread count"):
            census(k4, threads=0)

    def test_counts_are_label_invariant(self, paw):
        assert census(paw.relabel([3, 1, 0, 2])) == census(paw)

    def test_counts_in_regularity_relations(self):
        """num(C3) <= 3 num(P2) and doubled 4-cycle counts stay below num(C4)^2."""
        graph = erdos_renyi(12, 0.5, make_rng(3))
        c = census(graph)
        assert c.num_c3 <= 3 * c.num_p2
        assert c.num_k24 + c.num_c4_2e + c.num_c4_2v <= c.num_c4**2
