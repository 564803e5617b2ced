"""Distinguishing statistics kappa3, kappa4 and kappa_r.

kappa3 sums the triangle products ``M_ij M_jk M_ki``. kappa4 adds three
parts: 4-cycle products, centered 2-path products ``(M_ij^2 - 1)(M_jk^2 - 1)``
and the quartic edge term ``M_ij^4 - 6 M_ij^2 + 3``. kappa_r averages the
squared entries on the row of the maximal-degree vertex.

Every statistic has a batch form taking a ``(trials, num_edges)`` array of
edge values, which is what the Monte Carlo code uses. Sums are exactly
rounded (``math.fsum``) row by row.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from functools import lru_cache
from typing import Literal, NamedTuple

import numpy as np

from .ensembles import Ensemble, MaskedMatrix
from .graphs import Graph, max_degree_vertex


class Statistic(StrEnum):
    KAPPA3 = "kappa3"
    KAPPA4 = "kappa4"
    KAPPA4_C4 = "kappa4_c4"
    KAPPA4_P2 = "kappa4_p2"
    KAPPA4_E = "kappa4_e"
    KAPPA_R = "kappa_r"


class InapplicableStatisticError(ValueError):
    """The statistic is undefined on this mask."""


@dataclass(frozen=True)
class Kappa4Breakdown:
    c4_part: float
    p2_part: float
    e_part: float
    total: float

    @classmethod
    def from_parts(cls, c4_part: float, p2_part: float, e_part: float) -> Kappa4Breakdown:
        return cls(c4_part, p2_part, e_part, math.fsum((c4_part, p2_part, e_part)))


class Kappa4Samples(NamedTuple):
    c4_part: np.ndarray
    p2_part: np.ndarray
    e_part: np.ndarray
    total: np.ndarray


@dataclass(frozen=True, eq=False)
class _TermIndex:
    """Edge-id tuples of every term, each structure listed once."""

    triangles: np.ndarray
    cycles: np.ndarray
    paths: np.ndarray


def _edge_tuples(graph: Graph, rows: np.ndarray, hops: tuple[tuple[int, int], ...]) -> np.ndarray:
    if rows.shape[0] == 0:
        return np.empty((0, len(hops)), dtype=np.int64)
    columns = [graph.edge_ids(rows[:, a], rows[:, b]) for a, b in hops]
    return np.column_stack(columns)


@lru_cache(maxsize=32)
def _term_index(graph: Graph) -> _TermIndex:
    return _TermIndex(
        triangles=_edge_tuples(graph, graph.triangles, ((0, 1), (1, 2), (0, 2))),
        cycles=_edge_tuples(graph, graph.four_cycles, ((0, 1), (1, 2), (2, 3), (0, 3))),
        paths=_edge_tuples(graph, graph.two_paths, ((0, 1), (1, 2))),
    )


def _as_batch(graph: Graph, values: np.ndarray) -> np.ndarray:
    batch = np.atleast_2d(np.asarray(values, dtype=np.float64))
    if batch.ndim != 2 or batch.shape[1] != graph.num_edges:
        raise ValueError(
            f"Expected edge values of shape (trials, {graph.num_edges}), got {batch.shape}"
        )
    return batch


def _row_sums(terms: np.ndarray) -> np.ndarray:
    if terms.shape[1] == 0:
        return np.zeros(terms.shape[0])
    return np.array([math.fsum(row) for row in terms.tolist()])


def _product_sums(batch: np.ndarray, tuples: np.ndarray) -> np.ndarray:
    if tuples.shape[0] == 0:
        return np.zeros(batch.shape[0])
    terms = batch[:, tuples[:, 0]]
    for col in range(1, tuples.shape[1]):
        terms = terms * batch[:, tuples[:, col]]
    return _row_sums(terms)


def kappa3_samples(graph: Graph, values: np.ndarray) -> np.ndarray:
    batch = _as_batch(graph, values)
    return _product_sums(batch, _term_index(graph).triangles)


def kappa4_samples(graph: Graph, values: np.ndarray) -> Kappa4Samples:
    batch = _as_batch(graph, values)
    index = _term_index(graph)
    squares = batch * batch
    c4 = _product_sums(batch, index.cycles)
    p2 = _product_sums(squares - 1.0, index.paths)
    e = _row_sums(squares * squares - 6.0 * squares + 3.0)
    total = np.array([math.fsum(parts) for parts in zip(c4, p2, e, strict=True)])
    return Kappa4Samples(c4, p2, e, total)


def kappa_r_samples(graph: Graph, values: np.ndarray) -> np.ndarray:
    batch = _as_batch(graph, values)
    vertex, degree = _max_row(graph)
    ids = graph.incident_edge_ids(vertex)
    row = batch[:, ids]
    return _row_sums(row * row) / degree


def _max_row(graph: Graph) -> tuple[int, int]:
    if graph.n_vertices == 0:
        raise InapplicableStatisticError("kappa_r is undefined on the empty graph")
    vertex, degree = max_degree_vertex(graph)
    if degree == 0:
        raise InapplicableStatisticError("kappa_r is undefined when the maximal degree is 0")
    return vertex, degree


def statistic_samples(
    graph: Graph, values: np.ndarray, statistics: tuple[Statistic, ...]
) -> dict[Statistic, np.ndarray]:
    """Evaluate several statistics on one batch, sharing the kappa4 parts."""
    wanted = {Statistic(s) for s in statistics}
    out: dict[Statistic, np.ndarray] = {}
    if Statistic.KAPPA3 in wanted:
        out[Statistic.KAPPA3] = kappa3_samples(graph, values)
    if wanted & {Statistic.KAPPA4, Statistic.KAPPA4_C4, Statistic.KAPPA4_P2, Statistic.KAPPA4_E}:
        parts = kappa4_samples(graph, values)
        out[Statistic.KAPPA4] = parts.total
        out[Statistic.KAPPA4_C4] = parts.c4_part
        out[Statistic.KAPPA4_P2] = parts.p2_part
        out[Statistic.KAPPA4_E] = parts.e_part
    if Statistic.KAPPA_R in wanted:
        out[Statistic.KAPPA_R] = kappa_r_samples(graph, values)
    return {s: out[s] for s in statistics}


def kappa3(matrix: MaskedMatrix) -> float:
    return float(kappa3_samples(matrix.graph, matrix.values[None, :])[0])


def kappa4(matrix: MaskedMatrix) -> Kappa4Breakdown:
    parts = kappa4_samples(matrix.graph, matrix.values[None, :])
    return Kappa4Breakdown(
        float(parts.c4_part[0]),
        float(parts.p2_part[0]),
        float(parts.e_part[0]),
        float(parts.total[0]),
    )


def kappa_r(matrix: MaskedMatrix) -> float:
    """Mean squared entry on the row of the maximal-degree vertex.

    Raises:
        InapplicableStatisticError: If the mask has no edges.
    """
    return float(kappa_r_samples(matrix.graph, matrix.values[None, :])[0])


@dataclass(frozen=True)
class KappaRLaw:
    """Reference law of kappa_r.

    GOE: ``chi2(D) / D``. Wishart: ``(chi2(D) / D) * (chi2(d) / d)`` with the
    two chi-squared variables independent.
    """

    kind: Literal["scaled_chi2", "product_scaled_chi2"]
    degree: int
    d: int | None = None

    def __post_init__(self) -> None:
        if self.degree < 1:
            raise InapplicableStatisticError(f"kappa_r law needs D >= 1, got {self.degree}")
        if self.kind == "product_scaled_chi2" and (self.d is None or self.d < 1):
            raise ValueError(f"The Wishart kappa_r law needs d >= 1, got {self.d}")

    @property
    def mean(self) -> float:
        return 1.0

    @property
    def variance(self) -> float:
        D = self.degree
        if self.kind == "scaled_chi2":
            return 2.0 / D
        assert self.d is not None
        return 2.0 / D + 2.0 / self.d + 4.0 / (D * self.d)

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        draws = rng.chisquare(self.degree, size) / self.degree
        if self.kind == "product_scaled_chi2":
            assert self.d is not None
            draws = draws * (rng.chisquare(self.d, size) / self.d)
        return draws


def kappa_r_law(graph: Graph, d: int | None, ensemble: Ensemble) -> KappaRLaw:
    _, degree = _max_row(graph)
    if Ensemble(ensemble) == Ensemble.GOE:
        return KappaRLaw("scaled_chi2", degree)
    if d is None or d < 1:
        raise ValueError(f"The Wishart kappa_r law needs d >= 1, got {d}")
    return KappaRLaw("product_scaled_chi2", degree, d)
