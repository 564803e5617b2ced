"""The tests separate the ensembles below their thresholds and not far above."""

import math

import pytest

from wishart_mask_lab.experiments import DistinguishingTest, estimate_test_error
from wishart_mask_lab.graphs import complete_bipartite, complete_graph, star_graph

pytestmark = [pytest.mark.integration, pytest.mark.slow]

TRIALS = 2000


def estimate(graph, d, test, trials=TRIALS):
    return estimate_test_error(graph, d, test, trials, 4242, method="bartlett")


class TestBipartiteQuarticSeparation:
    """deg4 on K_{12,12}."""

    @pytest.fixture(scope="class")
    def estimates(self):
        graph = complete_bipartite(12, 12)
        return [estimate(graph, d, DistinguishingTest.DEG4) for d in (8, 144, 2048, 50_000)]

    def test_small_d_separates(self, estimates):
        assert estimates[0].tv_lower >= 0.9

    def test_large_d_does_not(self, estimates):
        assert estimates[-1].tv_lower <= 0.1

    def test_tv_lower_is_nonincreasing(self, estimates):
        for smaller, larger in zip(estimates, estimates[1:], strict=False):
            slack = 2 * math.hypot(
                smaller.stderr1, smaller.stderr2, larger.stderr1, larger.stderr2
            )
            assert larger.tv_lower <= smaller.tv_lower + slack, (smaller.d, larger.d)


class TestTriangleSeparation:
    """deg3 on K_16, where num(C3) = 560."""

    def test_small_d_separates(self):
        result = estimate(complete_graph(16), 50, DistinguishingTest.DEG3)
        assert result.type1 <= 0.1
        assert result.tv_lower >= 0.5

    def test_large_d_does_not(self):
        assert estimate(complete_graph(16), 10**6, DistinguishingTest.DEG3).tv_lower <= 0.2


class TestMaxDegreeSeparation:
    def test_star(self):
        result = estimate(star_graph(2000), 10, DistinguishingTest.MAXDEG, trials=500)
        assert result.type1 + result.type2 <= 0.3
