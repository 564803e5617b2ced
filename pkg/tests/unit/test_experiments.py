"""Tests for the distinguishing tests, error estimates, thresholds and sweeps."""

import math
from decimal import Decimal, localcontext
from unittest.mock import patch

import numpy as np
import pytest

from wishart_mask_lab.census import census
from wishart_mask_lab.ensembles import Ensemble, MaskedMatrix
from wishart_mask_lab.experiments import (
    TESTS,
    DistinguishingTest,
    InapplicableTestError,
    SweepConfig,
    Verdict,
    bip_divergence_threshold,
    bip_threshold,
    bip_threshold_terms,
    convergence_report,
    decide,
    decision_threshold,
    deg3_test,
    deg4_test,
    er_divergence_threshold,
    er_threshold,
    er_threshold_terms,
    estimate_test_error,
    maxdeg_test,
    phase_sweep,
    predicts_wishart,
    resolve_threads,
    simulate_statistics,
)
from wishart_mask_lab.graphs import Graph, complete_bipartite, complete_graph
from wishart_mask_lab.seeding import Stream, derive_seed, make_rng
from wishart_mask_lab.statistics import Statistic


class TestThresholds:
    """Test the decision thresholds of the three tests."""

    def test_deg3(self, k4):
        assert decision_threshold(k4, 16, DistinguishingTest.DEG3) == pytest.approx(0.5)

    def test_deg4(self, square):
        assert decision_threshold(square, 1, DistinguishingTest.DEG4) == pytest.approx(4.5)

    def test_maxdeg(self, star5):
        threshold = decision_threshold(star5, 80, DistinguishingTest.MAXDEG)
        assert threshold == pytest.approx(400**-0.25)

    def test_inapplicable(self, k23, edgeless):
        assert decision_threshold(k23, 10, DistinguishingTest.DEG3) is None
        assert decision_threshold(edgeless, 10, DistinguishingTest.DEG4) is None
        assert decision_threshold(edgeless, 10, DistinguishingTest.MAXDEG) is None
        assert decision_threshold(Graph(0), 10, DistinguishingTest.MAXDEG) is None

    def test_d_must_be_positive(self, k4):
        with pytest.raises(ValueError):
            decision_threshold(k4, 0, DistinguishingTest.DEG3)


class TestDecisions:
    """Test the decision rules."""

    def test_deg3_below_threshold_is_goe(self, k4):
        verdict = deg3_test(MaskedMatrix(k4, np.zeros(6)), 16)
        assert verdict.predicted == Verdict.GOE
        assert verdict.statistic_value == 0.0
        assert verdict.threshold == pytest.approx(0.5)

    def test_deg3_at_threshold_is_wishart(self):
        assert decide(DistinguishingTest.DEG3, 0.5, 0.5) == Verdict.WISHART

    def test_deg3_on_bipartite_mask_is_inapplicable(self, k23):
        verdict = deg3_test(MaskedMatrix(k23, np.ones(6)), 10)
        assert verdict.predicted == Verdict.INAPPLICABLE
        assert verdict.statistic_value is None
        assert verdict.threshold is None

    def test_deg4_on_zero_square(self, square):
        verdict = deg4_test(MaskedMatrix(square, np.zeros(4)), 1)
        assert verdict.statistic_value == 16.0
        assert verdict.threshold == pytest.approx(4.5)
        assert verdict.predicted == Verdict.WISHART

    def test_deg4_on_edgeless_mask(self, edgeless):
        assert deg4_test(MaskedMatrix(edgeless, np.empty(0)), 5).predicted == Verdict.INAPPLICABLE

    def test_maxdeg_band(self):
        eps = 0.1
        assert decide(DistinguishingTest.MAXDEG, 1.0, eps) == Verdict.GOE
        assert decide(DistinguishingTest.MAXDEG, 1.0 + eps, eps) == Verdict.GOE
        assert decide(DistinguishingTest.MAXDEG, 1.0 - eps, eps) == Verdict.GOE
        assert decide(DistinguishingTest.MAXDEG, 1.5, eps) == Verdict.WISHART
        assert decide(DistinguishingTest.MAXDEG, 0.5, eps) == Verdict.WISHART

    def test_precomputed_census_is_used(self, k4):
        matrix = MaskedMatrix(k4, np.zeros(6))
        with patch("wishart_mask_lab.experiments.census") as lookup:
            verdict = deg3_test(matrix, 16, counts=census(k4))

        lookup.assert_not_called()
        assert verdict == deg3_test(matrix, 16)

    def test_maxdeg_on_unit_row(self, star5):
        verdict = maxdeg_test(MaskedMatrix(star5, np.ones(5)), 10)
        assert verdict.predicted == Verdict.GOE
        assert verdict.statistic_value == 1.0

    def test_vectorized_rule(self):
        values = np.array([0.0, 1.0, 2.0])
        assert predicts_wishart(DistinguishingTest.DEG4, values, 1.0).tolist() == [False, True, True]
        assert predicts_wishart(DistinguishingTest.MAXDEG, values, 0.5).tolist() == [True, False, True]

    def test_registry(self):
        assert set(TESTS) == set(DistinguishingTest)
        assert DistinguishingTest.DEG3.statistic == Statistic.KAPPA3
        assert DistinguishingTest.DEG4.statistic == Statistic.KAPPA4
        assert DistinguishingTest.MAXDEG.statistic == Statistic.KAPPA_R


class TestSimulation:
    """Test the seeded Monte Carlo driver."""

    def test_resolve_threads(self):
        assert resolve_threads(3) == 3
        with patch("wishart_mask_lab.experiments.config") as mock_config:
            mock_config.experiment.threads = None
            with patch("wishart_mask_lab.experiments.psutil.cpu_count", return_value=6):
                assert resolve_threads(None) == 6

    def test_trials_are_seeded_by_index(self, k4):
        """Trial i of the GOE uses the generator seeded by (seed, GOE, i)."""
        result = simulate_statistics(
            k4, Ensemble.GOE, None, 5, 77, (Statistic.KAPPA3,), threads=1, batch_size=2
        )
        for index in range(5):
            rng = make_rng(derive_seed(77, Stream.GOE, index))
            values = rng.standard_normal(6)
            expected = sum(
                values[k4.edges.index((i, j))] * values[k4.edges.index((j, k))] * values[k4.edges.index((i, k))]
                for i, j, k in k4.triangles.tolist()
            )
            assert result[Statistic.KAPPA3][index] == pytest.approx(expected)

    @pytest.mark.parametrize("ensemble", [Ensemble.GOE, Ensemble.WISHART])
    def test_results_do_not_depend_on_threads_or_batches(self, ensemble):
        graph = complete_graph(6)
        statistics = (Statistic.KAPPA3, Statistic.KAPPA4, Statistic.KAPPA_R)
        serial = simulate_statistics(graph, ensemble, 20, 40, 5, statistics, threads=1, batch_size=40)
        parallel = simulate_statistics(graph, ensemble, 20, 40, 5, statistics, threads=4, batch_size=3)
        for statistic in statistics:
            np.testing.assert_array_equal(serial[statistic], parallel[statistic])

    def test_validation(self, k4):
        with pytest.raises(ValueError):
            simulate_statistics(k4, Ensemble.GOE, None, 0, 1, (Statistic.KAPPA3,))
        with pytest.raises(ValueError):
            simulate_statistics(k4, Ensemble.WISHART, None, 5, 1, (Statistic.KAPPA3,))


class TestErrorEstimates:
    """Test Type I / Type II estimation."""

    def test_estimate_fields(self, k4):
        estimate = estimate_test_error(k4, 4, DistinguishingTest.DEG3, 200, 3, threads=1)
        assert 0.0 <= estimate.type1 <= 1.0
        assert 0.0 <= estimate.type2 <= 1.0
        assert estimate.tv_lower == pytest.approx(max(0.0, 1.0 - estimate.type1 - estimate.type2))
        assert estimate.stderr1 == pytest.approx(
            math.sqrt(estimate.type1 * (1 - estimate.type1) / 200)
        )
        assert estimate.threshold == pytest.approx(0.5 * 4 / 2)

    def test_is_reproducible(self, k4):
        first = estimate_test_error(k4, 4, DistinguishingTest.DEG4, 100, 9, threads=1)
        second = estimate_test_error(k4, 4, DistinguishingTest.DEG4, 100, 9, threads=3)
        assert first == second

    def test_inapplicable(self, k23):
        with pytest.raises(InapplicableTestError):
            estimate_test_error(k23, 10, DistinguishingTest.DEG3, 10, 0)

    def test_trials_must_be_positive(self, k4):
        with pytest.raises(ValueError):
            estimate_test_error(k4, 10, DistinguishingTest.DEG3, 0, 0)


class TestConvergenceReport:
    """Test the hypothesis ratios."""

    def test_triangle_ratio(self):
        report = convergence_report(complete_graph(10), 10**6)
        assert report.ratio("r_tri").ratio == pytest.approx(1.2e-4)
        assert report.ratio("r_tri").regime_suggestive

    def test_plain_graph_omits_bipartite_ratios(self, k4):
        names = convergence_report(k4, 10).names()
        assert "r_bip_4cyc" not in names
        assert {"r_tri", "r_4cyc", "r_k18", "reg_tri", "reg_4cyc", "div_tri"} <= set(names)

    def test_bipartite_ratios(self):
        graph = complete_bipartite(8, 8)
        report = convergence_report(graph, 100)
        assert {"r_bip_4cyc", "r_bip_k14", "r_bip_d8", "r_bip_d9"} <= set(report.names())
        quartic = 3 * 28 * 28 / 3 + 16 * 28 + 64
        assert report.ratio("r_4cyc").numerator == pytest.approx(quartic)
        assert report.ratio("r_4cyc").ratio == pytest.approx(quartic / 10**4)

    def test_edgeless_numerators_are_zero(self, edgeless):
        report = convergence_report(edgeless, 10)
        for name in ("r_tri", "r_4cyc", "r_k18"):
            assert report.ratio(name).numerator == 0.0
        assert report.ratio("reg_tri").ratio is None
        assert report.ratio("div_maxdeg").ratio is None

    def test_unknown_ratio(self, k4):
        with pytest.raises(KeyError):
            convergence_report(k4, 10).ratio("r_missing")

    def test_cutoff_marks_ratios(self, k4):
        report = convergence_report(k4, 10**6, cutoff=1.0)
        assert "r_tri" in report.suggestive
        assert "div_tri" not in report.suggestive

    def test_d_must_be_positive(self, k4):
        with pytest.raises(ValueError):
            convergence_report(k4, 0)


class TestClosedFormThresholds:
    def test_er_threshold_dense(self):
        terms = er_threshold_terms(100, 1.0)
        assert terms[0] == pytest.approx(1e6)
        assert max(terms) == terms[0]
        assert er_threshold(100, 1.0) == pytest.approx(math.fsum(terms))

    def test_bip_threshold_dense(self):
        terms = bip_threshold_terms(100, 100, 1.0)
        assert terms[0] == pytest.approx(1e4)
        assert max(terms) == terms[0]

    def test_sparse_terms_match_high_precision(self):
        with localcontext() as ctx:
            ctx.prec = 50
            n, p = Decimal(10**4), Decimal("1e-4")
            log_n = n.ln()
            expected = (
                n**3 * p**3,
                n ** Decimal("1.5") * p,
                n * p.sqrt(),
                n.sqrt() * p ** Decimal("0.25") * log_n**2,
                log_n**3,
            )
        for term, reference in zip(er_threshold_terms(10**4, 1e-4), expected, strict=True):
            assert term == pytest.approx(float(reference), rel=1e-12)

    def test_divergence_thresholds_keep_polynomial_terms(self):
        assert er_divergence_threshold(100, 0.5) == pytest.approx(
            math.fsum(er_threshold_terms(100, 0.5)[:3])
        )
        assert bip_divergence_threshold(50, 40, 0.5) < bip_threshold(50, 40, 0.5)

    def test_domain(self):
        with pytest.raises(ValueError):
            er_threshold(1, 0.5)
        with pytest.raises(ValueError):
            er_threshold(10, 1.5)
        with pytest.raises(ValueError):
            bip_threshold(10, 0, 0.5)


class TestPhaseSweep:
    """Test grid sweeps."""

    def test_row_count_and_order(self):
        sweep = SweepConfig("er", 6, (0.5, 0.8, 1.0), (5, 10, 20, 40), DistinguishingTest.DEG4, 20, 1)
        rows = phase_sweep(sweep, threads=1)
        assert len(rows) == 12
        assert [(row.p, row.d) for row in rows] == [
            (p, d) for p in (0.5, 0.8, 1.0) for d in (5, 10, 20, 40)
        ]

    def test_single_point(self):
        sweep = SweepConfig("complete", 5, (1.0,), (10,), DistinguishingTest.DEG3, 10, 0)
        rows = phase_sweep(sweep, threads=1)
        assert len(rows) == 1
        assert rows[0].seed == derive_seed(0, Stream.TRIALS, 0)
        assert rows[0].theory_threshold == pytest.approx(er_threshold(5, 1.0))

    def test_inapplicable_rows(self):
        sweep = SweepConfig("kbip", 3, (1.0,), (10, 20), DistinguishingTest.DEG3, 10, 0, m=3)
        rows = phase_sweep(sweep, threads=1)
        assert len(rows) == 2
        assert all(not row.applicable and row.tv_lower is None for row in rows)

    def test_is_reproducible_across_threads(self):
        sweep = SweepConfig("biper", 4, (0.6,), (5, 50), DistinguishingTest.DEG4, 30, 11, m=5)
        assert phase_sweep(sweep, threads=1) == phase_sweep(sweep, threads=4)

    @pytest.mark.parametrize(
        "kwargs",
        [
            {"family": "torus"},
            {"p_grid": ()},
            {"d_grid": (0,)},
            {"p_grid": (1.5,)},
            {"trials": 0},
            {"family": "biper", "m": None},
        ],
    )
    def test_validation(self, kwargs):
        base = {
            "family": "er",
            "n": 5,
            "p_grid": (0.5,),
            "d_grid": (10,),
            "test": DistinguishingTest.DEG4,
            "trials": 10,
            "base_seed": 0,
        }
        with pytest.raises(ValueError):
            SweepConfig(**{**base, **kwargs})
