"""Masked Wishart and masked GOE samplers, Bartlett factors and Gaussian KL.

A masked Wishart sample keeps the entries ``d^{-1/2} <X_i, X_j>`` of the
centered, normalized Gram matrix of ``d x n`` standard Gaussian data on the
edges of the mask. A masked GOE sample puts an independent standard normal
on every edge. Values are stored aligned with ``graph.edges``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import StrEnum
from typing import Literal

import numpy as np
from scipy import linalg

from .graphs import Graph, GraphError

logger = logging.getLogger(__name__)

WishartMethod = Literal["latent", "bartlett"]

# edge inner products are formed in blocks of at most this many entries
DEFAULT_BLOCK_ELEMENTS = 1 << 22
DEFAULT_DENSE_FRACTION = 0.125
DEFAULT_REORTHOGONALIZE_RATIO = 0.5
DEFAULT_DEGENERACY_TOLERANCE = 1e-12


class Ensemble(StrEnum):
    WISHART = "wishart"
    GOE = "goe"


class NumericalDegeneracyError(ArithmeticError):
    """Gram-Schmidt met a (numerically) dependent column."""


class NotPositiveDefiniteError(ValueError):
    """A covariance matrix failed its Cholesky factorization."""


@dataclass(frozen=True, eq=False)
class LatentMatrix:
    """``d x n`` standard Gaussian data; column ``i`` is the vector of vertex ``i``."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        entries = np.asarray(self.entries, dtype=np.float64)
        if entries.ndim != 2 or min(entries.shape) < 1:
            raise ValueError(f"Latent matrix must be a nonempty 2-D array, got {entries.shape}")
        if not np.all(np.isfinite(entries)):
            raise ValueError("Latent matrix has non-finite entries")
        object.__setattr__(self, "entries", entries)

    @property
    def d(self) -> int:
        return int(self.entries.shape[0])

    @property
    def n(self) -> int:
        return int(self.entries.shape[1])


@dataclass(frozen=True, eq=False)
class MaskedMatrix:
    """Symmetric real values supported exactly on the edges of ``graph``."""

    graph: Graph
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.shape != (self.graph.num_edges,):
            raise ValueError(
                f"Expected {self.graph.num_edges} edge values, got shape {values.shape}"
            )
        if not np.all(np.isfinite(values)):
            raise ValueError("Masked matrix has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def value(self, i: int, j: int) -> float:
        """Entry ``(i, j)``; equal to entry ``(j, i)``."""
        if not self.graph.has_edge(i, j):
            raise GraphError(f"({i}, {j}) is outside the mask")
        ids = self.graph.edge_ids(np.array([i]), np.array([j]))
        return float(self.values[ids[0]])

    def to_dense(self) -> np.ndarray:
        n = self.graph.n_vertices
        dense = np.zeros((n, n))
        if self.graph.num_edges:
            us, vs = self.graph.edge_array[:, 0], self.graph.edge_array[:, 1]
            dense[us, vs] = self.values
            dense[vs, us] = self.values
        return dense

    def relabel(self, permutation: list[int]) -> MaskedMatrix:
        """The same matrix with vertex ``v`` renamed ``permutation[v]``."""
        graph = self.graph.relabel(permutation)
        perm = np.asarray(permutation, dtype=np.int64)
        if self.graph.num_edges == 0:
            return MaskedMatrix(graph, self.values)
        us, vs = self.graph.edge_array[:, 0], self.graph.edge_array[:, 1]
        ids = graph.edge_ids(perm[us], perm[vs])
        values = np.empty_like(self.values)
        values[ids] = self.values
        return MaskedMatrix(graph, values)


@dataclass(frozen=True, eq=False)
class BartlettDecomposition:
    """Gram-Schmidt factorization ``X = U W^T`` of a ``d x k`` matrix.

    ``W`` is ``k x k`` lower triangular with a positive diagonal and ``U``
    has orthonormal columns. Leading batch axes are allowed on both.
    """

    W: np.ndarray
    U: np.ndarray

    def reconstruct(self) -> np.ndarray:
        return self.U @ np.swapaxes(self.W, -1, -2)


def sample_latent(d: int, n: int, rng: np.random.Generator) -> LatentMatrix:
    if d < 1 or n < 1:
        raise ValueError(f"Latent dimensions must be positive, got d={d}, n={n}")
    return LatentMatrix(rng.standard_normal((d, n)))


def _edge_inner_products(
    entries: np.ndarray,
    us: np.ndarray,
    vs: np.ndarray,
    block_elements: int,
    dense_fraction: float,
) -> np.ndarray:
    d, n = entries.shape
    m = us.shape[0]
    if m > dense_fraction * n * n / 2:
        gram = entries.T @ entries
        return gram[us, vs]
    out = np.empty(m)
    step = max(1, block_elements // max(d, 1))
    for start in range(0, m, step):
        stop = min(start + step, m)
        out[start:stop] = np.einsum(
            "ti,ti->i", entries[:, us[start:stop]], entries[:, vs[start:stop]]
        )
    return out


def wishart_from_latent(
    graph: Graph,
    latent: LatentMatrix,
    *,
    block_elements: int = DEFAULT_BLOCK_ELEMENTS,
    dense_fraction: float = DEFAULT_DENSE_FRACTION,
) -> MaskedMatrix:
    """Masked Wishart values ``d^{-1/2} <X_i, X_j>`` from a fixed latent sample."""
    if latent.n != graph.n_vertices:
        raise ValueError(
            f"Latent sample has {latent.n} columns for a {graph.n_vertices}-vertex mask"
        )
    if graph.num_edges == 0:
        return MaskedMatrix(graph, np.empty(0))
    us, vs = graph.edge_array[:, 0], graph.edge_array[:, 1]
    products = _edge_inner_products(latent.entries, us, vs, block_elements, dense_fraction)
    return MaskedMatrix(graph, products / math.sqrt(latent.d))


def bartlett_factor(k: int, d: int, rng: np.random.Generator) -> np.ndarray:
    """Lower-triangular ``W`` with ``W W^T`` distributed as a ``k x k`` Wishart(d)."""
    if not 1 <= k <= d:
        raise ValueError(f"Bartlett factor needs 1 <= k <= d, got k={k}, d={d}")
    factor = np.zeros((k, k))
    factor[np.tril_indices(k, -1)] = rng.standard_normal(k * (k - 1) // 2)
    factor[np.diag_indices(k)] = np.sqrt(rng.chisquare(d - np.arange(k)))
    return factor


def masked_wishart(
    graph: Graph,
    d: int,
    rng: np.random.Generator,
    *,
    method: WishartMethod = "latent",
    block_elements: int = DEFAULT_BLOCK_ELEMENTS,
    dense_fraction: float = DEFAULT_DENSE_FRACTION,
) -> MaskedMatrix:
    """Sample from the masked Wishart ensemble W(G, d).

    ``method="latent"`` draws the full ``d x n`` latent matrix. ``"bartlett"``
    draws the Gram matrix through its Bartlett factor, which needs ``n <= d``
    and costs ``O(n^2)`` instead of ``O(d n)``; it falls back to latent
    sampling when ``n > d``. The two methods agree in law, not sample by
    sample.
    """
    if d < 1:
        raise ValueError(f"Degrees of freedom must be positive, got {d}")
    n = graph.n_vertices
    if graph.num_edges == 0:
        return MaskedMatrix(graph, np.empty(0))
    if method == "bartlett" and n <= d:
        factor = bartlett_factor(n, d, rng)
        gram = factor @ factor.T
        us, vs = graph.edge_array[:, 0], graph.edge_array[:, 1]
        return MaskedMatrix(graph, gram[us, vs] / math.sqrt(d))
    if method == "bartlett":
        logger.debug(f"Bartlett sampling needs n <= d (n={n}, d={d}); using latent")
    elif method != "latent":
        raise ValueError(f"Unknown Wishart sampling method: {method}")
    latent = sample_latent(d, n, rng)
    return wishart_from_latent(
        graph, latent, block_elements=block_elements, dense_fraction=dense_fraction
    )


def masked_goe(graph: Graph, rng: np.random.Generator) -> MaskedMatrix:
    """Sample from the masked GOE M(G): one standard normal per edge."""
    return MaskedMatrix(graph, rng.standard_normal(graph.num_edges))


def sample_masked(
    graph: Graph,
    ensemble: Ensemble,
    d: int | None,
    rng: np.random.Generator,
    *,
    method: WishartMethod = "latent",
) -> MaskedMatrix:
    if Ensemble(ensemble) == Ensemble.GOE:
        return masked_goe(graph, rng)
    if d is None:
        raise ValueError("The Wishart ensemble needs degrees of freedom d")
    return masked_wishart(graph, d, rng, method=method)


def bartlett_decompose(
    latent: LatentMatrix | np.ndarray,
    *,
    reorthogonalize_ratio: float = DEFAULT_REORTHOGONALIZE_RATIO,
    tolerance: float = DEFAULT_DEGENERACY_TOLERANCE,
) -> BartlettDecomposition:
    """Classical Gram-Schmidt on the columns of a ``d x k`` matrix.

    Column ``i`` is projected against the orthonormal columns found so far
    using its original coordinates. When ``k / d`` exceeds
    ``reorthogonalize_ratio`` a second projection pass is applied and its
    coefficients are folded into ``W``. Arrays with leading batch axes are
    decomposed independently along those axes.

    Raises:
        ValueError: If ``k > d``.
        NumericalDegeneracyError: If a diagonal coefficient falls below
            ``tolerance``.
    """
    data = latent.entries if isinstance(latent, LatentMatrix) else np.asarray(latent, float)
    if data.ndim < 2:
        raise ValueError(f"Expected a matrix, got shape {data.shape}")
    d, k = data.shape[-2:]
    if k > d:
        raise ValueError(f"Gram-Schmidt needs k <= d, got k={k}, d={d}")

    batch = data.shape[:-2]
    basis = np.zeros(data.shape)
    factor = np.zeros((*batch, k, k))
    second_pass = k / d > reorthogonalize_ratio
    for i in range(k):
        column = data[..., :, i]
        previous = basis[..., :, :i]
        coeffs = np.einsum("...ti,...t->...i", previous, column)
        residual = column - np.einsum("...ti,...i->...t", previous, coeffs)
        if second_pass and i:
            correction = np.einsum("...ti,...t->...i", previous, residual)
            residual = residual - np.einsum("...ti,...i->...t", previous, correction)
            coeffs = coeffs + correction
        norm = np.linalg.norm(residual, axis=-1)
        if np.any(norm < tolerance):
            raise NumericalDegeneracyError(
                f"Column {i} is numerically dependent on the previous columns"
            )
        factor[..., i, :i] = coeffs
        factor[..., i, i] = norm
        basis[..., :, i] = residual / norm[..., None]
    return BartlettDecomposition(W=factor, U=basis)


def _cholesky(matrix: np.ndarray, name: str) -> np.ndarray:
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise NotPositiveDefiniteError(f"{name} must be square, got shape {matrix.shape}")
    if not np.allclose(matrix, matrix.T, rtol=1e-10, atol=1e-12):
        raise NotPositiveDefiniteError(f"{name} is not symmetric")
    try:
        return linalg.cholesky(matrix, lower=True)
    except linalg.LinAlgError as e:
        raise NotPositiveDefiniteError(f"{name} is not positive definite") from e


def gaussian_kl(sigma1: np.ndarray, sigma2: np.ndarray) -> float:
    """KL divergence between N(0, sigma1) and N(0, sigma2).

    Log-determinants come from Cholesky factors.

    Raises:
        NotPositiveDefiniteError: If either input is not symmetric positive
            definite or the shapes differ.
    """
    first = np.asarray(sigma1, dtype=np.float64)
    second = np.asarray(sigma2, dtype=np.float64)
    if first.shape != second.shape:
        raise NotPositiveDefiniteError(f"Shape mismatch: {first.shape} vs {second.shape}")
    chol1 = _cholesky(first, "sigma1")
    chol2 = _cholesky(second, "sigma2")
    k = first.shape[0]
    logdet1 = 2.0 * float(np.sum(np.log(np.diag(chol1))))
    logdet2 = 2.0 * float(np.sum(np.log(np.diag(chol2))))
    trace = float(np.trace(linalg.cho_solve((chol2, True), first)))
    kl = 0.5 * (logdet2 - logdet1 + trace - k)
    if -1e-10 < kl < 0.0:
        return 0.0
    return kl
