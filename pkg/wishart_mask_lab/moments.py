"""Closed-form moment predictions.

Three groups of formulas live here:

- means and variances (or variance upper bounds) of kappa3, kappa4 and the
  kappa4 parts under both ensembles, expressed through census counts;
- the pairwise-product expectations of the twenty two-copy shapes that
  appear when those variances are expanded, as polynomials in ``1/d``, with
  the concrete vertex configurations used to check them by simulation;
- trace and determinant moments of a ``k x k`` Wishart(d) matrix.

Wishart variance bounds carry unit constants and are flagged as bounds.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import StrEnum

import numpy as np

from .census import census
from .ensembles import Ensemble
from .graphs import Graph
from .statistics import Statistic

logger = logging.getLogger(__name__)

# E[(g^4 - 6 g^2 + 3)^2] for a standard normal g
GOE_EDGE_CONSTANT = 24
# the same constant as printed in the variance lemma for the GOE quartic term
PRINTED_EDGE_CONSTANT = 6


class UnsupportedPredictionError(ValueError):
    """No closed form exists for this statistic under this ensemble."""


class MeanKind(StrEnum):
    EXACT = "exact"
    LOWER_BOUND = "lower_bound"


class VarianceKind(StrEnum):
    EXACT = "exact"
    UPPER_BOUND = "upper_bound"


@dataclass(frozen=True)
class MomentPrediction:
    statistic: Statistic
    ensemble: Ensemble
    d: int | None
    mean: float
    mean_kind: MeanKind
    variance: float
    variance_kind: VarianceKind
    notes: dict[str, float] = field(default_factory=dict)


def _goe_prediction(graph: Graph, statistic: Statistic) -> MomentPrediction:
    c = census(graph)
    notes: dict[str, float] = {}
    match statistic:
        case Statistic.KAPPA3:
            variance = c.num_c3
        case Statistic.KAPPA4:
            variance = c.num_c4 + 4 * c.num_p2 + GOE_EDGE_CONSTANT * c.num_e
            notes["printed_edge_constant"] = PRINTED_EDGE_CONSTANT
        case Statistic.KAPPA4_C4:
            variance = c.num_c4
        case Statistic.KAPPA4_P2:
            variance = 4 * c.num_p2
        case Statistic.KAPPA4_E:
            variance = GOE_EDGE_CONSTANT * c.num_e
            notes["printed_edge_constant"] = PRINTED_EDGE_CONSTANT
        case _:
            raise UnsupportedPredictionError(
                f"No closed-form moments for {statistic} under the GOE; use kappa_r_law"
            )
    return MomentPrediction(
        statistic,
        Ensemble.GOE,
        None,
        0.0,
        MeanKind.EXACT,
        float(variance),
        VarianceKind.EXACT,
        notes,
    )


def _wishart_prediction(graph: Graph, d: int, statistic: Statistic) -> MomentPrediction:
    c = census(graph)
    notes: dict[str, float] = {}
    match statistic:
        case Statistic.KAPPA3:
            mean = c.num_c3 / math.sqrt(d)
            variance = c.num_c3 + c.num_c3_2e / d + c.num_c3_2v / d**2
        case Statistic.KAPPA4:
            mean = (c.num_c4 + 2 * c.num_p2 + 6 * c.num_e) / d
            core = c.num_c4 + c.num_p2
            variance = (
                core
                + c.num_e
                + float(core) ** 1.5 / d
                + (c.num_k14 + c.num_k24 + c.num_c4_2e) / d**2
                + c.num_c4_2v / d**3
            )
            notes["mean_lower_bound"] = (c.num_c4 + c.num_p2 + c.num_e) / d
        case Statistic.KAPPA4_C4:
            mean = c.num_c4 / d
            variance = (
                c.num_c4
                + c.num_k23 / d
                + (c.num_k24 + c.num_c4_2e + c.num_c4_2ev) / d**2
                + c.num_c4_2v / d**3
            )
        case Statistic.KAPPA4_P2:
            mean = 2 * c.num_p2 / d
            variance = (
                c.num_p2
                + (c.num_k13 + c.num_c3) / d
                + (c.num_k14 + c.num_c4 + c.num_c3_plus + c.num_p3) / d**2
                + (c.num_k13_plus + c.num_p4) / d**3
            )
        case Statistic.KAPPA4_E:
            mean = 6 * c.num_e / d
            variance = c.num_e + c.num_p2 / d**2
        case _:
            raise UnsupportedPredictionError(
                f"No closed-form moments for {statistic} under Wishart; use kappa_r_law"
            )
    return MomentPrediction(
        statistic,
        Ensemble.WISHART,
        d,
        float(mean),
        MeanKind.EXACT,
        float(variance),
        VarianceKind.UPPER_BOUND,
        notes,
    )


def predicted_moments(
    graph: Graph, d: int | None, statistic: Statistic, ensemble: Ensemble
) -> MomentPrediction:
    """Closed-form mean and variance of a statistic on ``graph``.

    GOE moments are exact. Wishart means are exact; Wishart variances are
    upper bounds with unit constants.

    Raises:
        ValueError: If the Wishart ensemble is requested without ``d >= 1``.
        UnsupportedPredictionError: For kappa_r, whose law is given by
            :func:`wishart_mask_lab.statistics.kappa_r_law` instead.
    """
    statistic = Statistic(statistic)
    if Ensemble(ensemble) == Ensemble.GOE:
        return _goe_prediction(graph, statistic)
    if d is None or d < 1:
        raise ValueError(f"Wishart predictions need d >= 1, got {d}")
    return _wishart_prediction(graph, d, statistic)


class PairTransform(StrEnum):
    """Per-edge transform applied before multiplying the edge values of a copy."""

    IDENTITY = "identity"
    CENTERED_SQUARE = "centered_square"
    HERMITE4 = "hermite4"

    def apply(self, values: np.ndarray) -> np.ndarray:
        match self:
            case PairTransform.IDENTITY:
                return values
            case PairTransform.CENTERED_SQUARE:
                return values * values - 1.0
            case _:
                squares = values * values
                return squares * squares - 6.0 * squares + 3.0


@dataclass(frozen=True)
class PairShape:
    """Two copies of a small structure laid out on ``n_vertices`` latent columns.

    The expectation of the product of the transformed edge values over both
    copies, under the masked Wishart ensemble, is the tabulated polynomial.
    """

    shape_id: int
    description: str
    n_vertices: int
    first: tuple[tuple[int, int], ...]
    second: tuple[tuple[int, int], ...]
    transform: PairTransform
    coefficients: tuple[int, int, int, int]

    def expectation(self, d: int) -> float:
        return math.fsum(c / d**power for power, c in enumerate(self.coefficients))


_TRIANGLE = ((0, 1), (1, 2), (0, 2))
_SQUARE = ((0, 1), (1, 2), (2, 3), (0, 3))
_ID = PairTransform.IDENTITY
_SQ = PairTransform.CENTERED_SQUARE
_H4 = PairTransform.HERMITE4

PAIR_SHAPES: dict[int, PairShape] = {
    s.shape_id: s
    for s in (
        PairShape(1, "triangle with itself", 3, _TRIANGLE, _TRIANGLE, _ID, (1, 10, 16, 0)),
        PairShape(2, "triangles sharing an edge", 4, _TRIANGLE, ((0, 1), (1, 3), (0, 3)), _ID, (0, 3, 6, 0)),
        PairShape(3, "triangles sharing a vertex", 5, _TRIANGLE, ((0, 3), (3, 4), (0, 4)), _ID, (0, 1, 2, 0)),
        PairShape(4, "4-cycle with itself", 4, _SQUARE, _SQUARE, _ID, (1, 8, 32, 40)),
        PairShape(5, "4-cycles sharing a 2-path", 5, _SQUARE, ((0, 1), (1, 2), (2, 4), (0, 4)), _ID, (0, 1, 10, 16)),
        PairShape(6, "4-cycles sharing a diagonal", 6, _SQUARE, ((0, 4), (2, 4), (2, 5), (0, 5)), _ID, (0, 0, 3, 6)),
        PairShape(7, "4-cycles sharing an edge", 6, _SQUARE, ((0, 1), (1, 4), (4, 5), (0, 5)), _ID, (0, 0, 3, 6)),
        PairShape(8, "4-cycle through an edge and 4-cycle across it", 6, _SQUARE, ((0, 4), (1, 4), (1, 5), (0, 5)), _ID, (0, 0, 3, 6)),
        PairShape(9, "4-cycles sharing a vertex", 7, _SQUARE, ((0, 4), (4, 5), (5, 6), (0, 6)), _ID, (0, 0, 1, 2)),
        PairShape(10, "2-path with itself", 3, ((0, 1), (1, 2)), ((0, 1), (1, 2)), _SQ, (4, 56, 300, 432)),
        PairShape(11, "2-paths sharing an edge at the center", 4, ((1, 0), (0, 2)), ((1, 0), (0, 3)), _SQ, (0, 4, 68, 144)),
        PairShape(12, "2-paths of a triangle", 3, ((0, 1), (1, 2)), ((1, 2), (0, 2)), _SQ, (0, 20, 196, 336)),
        PairShape(13, "edge-disjoint 2-paths on one center", 5, ((1, 0), (0, 2)), ((0, 3), (0, 4)), _SQ, (0, 0, 12, 48)),
        PairShape(14, "complementary 2-paths of a 4-cycle", 4, ((0, 1), (1, 2)), ((2, 3), (0, 3)), _SQ, (0, 0, 16, 40)),
        PairShape(15, "2-paths forming a triangle with a pendant edge", 4, ((0, 1), (1, 2)), ((0, 2), (2, 3)), _SQ, (0, 0, 24, 64)),
        PairShape(16, "2-paths forming a 3-path", 4, ((0, 1), (1, 2)), ((1, 2), (2, 3)), _SQ, (0, 0, 40, 96)),
        PairShape(17, "2-paths forming a fork", 5, ((0, 2), (0, 3)), ((0, 1), (1, 4)), _SQ, (0, 0, 4, 16)),
        PairShape(18, "2-paths forming a 4-path", 5, ((0, 1), (1, 2)), ((2, 3), (3, 4)), _SQ, (0, 0, 4, 8)),
        PairShape(19, "edge with itself", 2, ((0, 1),), ((0, 1),), _H4, (24, 432, 3180, 5040)),
        PairShape(20, "edges sharing a vertex", 3, ((0, 1),), ((0, 2),), _H4, (0, 0, 108, 432)),
    )
}


def pair_term_expectation(shape_id: int, d: int) -> float:
    """Expected pairwise product for one of the twenty two-copy shapes.

    Raises:
        ValueError: On an unknown shape id or ``d < 1``.
    """
    if shape_id not in PAIR_SHAPES:
        raise ValueError(f"Unknown pair shape {shape_id}; expected 1..{len(PAIR_SHAPES)}")
    if d < 1:
        raise ValueError(f"Degrees of freedom must be positive, got {d}")
    return PAIR_SHAPES[shape_id].expectation(d)


def edge_fourth_moment(d: int) -> float:
    """E[M_ij^4] for one masked Wishart entry: ``3 + 6/d``."""
    return 3.0 + 6.0 / d


def entry_covariance(i: int, j: int, k: int, l: int, d: int) -> float:
    """E[D_ij D_kl] for ``D = X^T X / d - I``."""
    if i == j == k == l:
        return 2.0 / d
    if i != j and {i, j} == {k, l}:
        return 1.0 / d
    return 0.0


@dataclass(frozen=True)
class TraceMomentReport:
    """Moments of ``M = X^T X`` for ``d x k`` Gaussian ``X``.

    Bound fields are ``None`` when their condition on ``(k, d)`` fails.
    """

    k: int
    d: int
    e_tr_sq_centered: float
    e_tr_sq: float
    e_tr_delta_sq: float
    var_tr_delta_sq_bound: float | None
    e_inv_det_bound: float | None
    e_log2_det_bound: float | None

    @property
    def variance_bound_applies(self) -> bool:
        return self.d >= self.k

    @property
    def determinant_bounds_apply(self) -> bool:
        return self.d >= 2 * self.k + 2


def wishart_trace_moments(k: int, d: int) -> TraceMomentReport:
    """Exact trace moments and determinant bounds for a ``k x k`` Wishart(d).

    ``e_tr_sq_centered`` is ``E[Tr(M/d - I)]^2``, ``e_tr_sq`` is
    ``E[Tr(M/d)]^2`` and ``e_tr_delta_sq`` is ``E Tr((M/d - I)^2)``.
    """
    if k < 1 or d < 1:
        raise ValueError(f"Need k, d >= 1, got k={k}, d={d}")
    variance_ok = d >= k
    determinant_ok = d >= 2 * k + 2
    return TraceMomentReport(
        k=k,
        d=d,
        e_tr_sq_centered=2 * k / d,
        e_tr_sq=k * k + 2 * k / d,
        e_tr_delta_sq=(k * k + k) / d,
        var_tr_delta_sq_bound=56 * k * k / d**2 if variance_ok else None,
        e_inv_det_bound=math.exp(k) if determinant_ok else None,
        e_log2_det_bound=3.0 * k if determinant_ok else None,
    )
