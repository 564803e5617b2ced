"""Subgraph census: fast pattern counts and a brute-force oracle.

Counts are non-degenerate, not necessarily induced copies of a pattern, i.e.
edge subsets of the mask isomorphic to the pattern. Fast counts use degree
and codegree identities on the sparse adjacency matrix; the doubled 4-cycle
patterns group an explicit 4-cycle enumeration by the shared substructure.
:func:`brute_force_count` enumerates embeddings directly and is kept
independent of every formula here.
"""

from __future__ import annotations

import logging
import math
import time
from collections import Counter, defaultdict
from collections.abc import Callable, Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass
from functools import cached_property, lru_cache
from itertools import combinations

import numpy as np
from scipy import sparse

from .graphs import Graph
from .patterns import Pattern, PatternError, PatternTag

logger = logging.getLogger(__name__)

MAX_COUNT = (1 << 127) - 1


class CountOverflowError(OverflowError):
    """A count left the signed 128-bit range."""


def _checked(value: int, pattern: Pattern) -> int:
    value = int(value)
    if value < 0:
        raise ArithmeticError(f"Negative count {value} for {pattern}")
    if value > MAX_COUNT:
        raise CountOverflowError(f"Count for {pattern} exceeds 128 bits")
    return value


def _exact_sum(values: np.ndarray) -> int:
    return sum(values.tolist())


def _binomial_sum(values: np.ndarray, k: int) -> int:
    return sum(math.comb(v, k) for v in values.tolist() if v >= k)


def _subset_counts(members: Iterable[frozenset[int]]) -> Counter[frozenset[int]]:
    counts: Counter[frozenset[int]] = Counter()
    for member in members:
        items = sorted(member)
        for size in range(1, len(items) + 1):
            for sub in combinations(items, size):
                counts[frozenset(sub)] += 1
    return counts


def _disjoint_pairs(members: list[frozenset[int]]) -> int:
    """Unordered pairs of list entries with disjoint vertex sets."""
    overlapping = 0
    for subset, n in _subset_counts(members).items():
        sign = 1 if len(subset) % 2 else -1
        overlapping += sign * math.comb(n, 2)
    return math.comb(len(members), 2) - overlapping


def _disjoint_cross_pairs(first: list[frozenset[int]], second: list[frozenset[int]]) -> int:
    """Pairs ``(x, y)`` from two lists with disjoint vertex sets."""
    counts_second = _subset_counts(second)
    overlapping = 0
    for subset, n in _subset_counts(first).items():
        sign = 1 if len(subset) % 2 else -1
        overlapping += sign * n * counts_second.get(subset, 0)
    return len(first) * len(second) - overlapping


class _CountingContext:
    """Shared derived quantities for all counts on one graph."""

    def __init__(self, graph: Graph) -> None:
        self.graph = graph

    def warm(self) -> None:
        """Build the shared structures before counts run concurrently."""
        _ = self.codegree, self.pair_codegrees, self.edge_triangles, self.vertex_triangles
        _ = self.cycle_groups

    @cached_property
    def degrees(self) -> np.ndarray:
        return np.asarray(self.graph.degrees, dtype=np.int64)

    @cached_property
    def endpoints(self) -> tuple[np.ndarray, np.ndarray]:
        arr = self.graph.edge_array
        return arr[:, 0], arr[:, 1]

    @cached_property
    def codegree(self) -> sparse.csr_matrix:
        adjacency = self.graph.adjacency
        return (adjacency @ adjacency).tocsr()

    @cached_property
    def pair_codegrees(self) -> np.ndarray:
        """Codegrees of unordered vertex pairs ``u < w`` with at least one common neighbor."""
        upper = sparse.triu(self.codegree, k=1).tocsr()
        upper.eliminate_zeros()
        return np.asarray(upper.data, dtype=np.int64)

    @cached_property
    def edge_triangles(self) -> np.ndarray:
        """Triangles through each edge, aligned with ``graph.edges``."""
        if self.graph.num_edges == 0:
            return np.empty(0, dtype=np.int64)
        us, vs = self.endpoints
        return np.asarray(self.codegree[us, vs]).ravel().astype(np.int64)

    @cached_property
    def vertex_triangles(self) -> np.ndarray:
        counts = np.zeros(self.graph.n_vertices, dtype=np.int64)
        us, vs = self.endpoints
        np.add.at(counts, us, self.edge_triangles)
        np.add.at(counts, vs, self.edge_triangles)
        return counts // 2

    @cached_property
    def c3(self) -> int:
        return _exact_sum(self.edge_triangles) // 3

    @cached_property
    def c4(self) -> int:
        # each 4-cycle is seen from both of its diagonals
        return _binomial_sum(self.pair_codegrees, 2) // 2

    @cached_property
    def cycle_groups(self) -> _CycleGroups:
        return _CycleGroups.build(self.graph)

    def count_e(self) -> int:
        return self.graph.num_edges

    def count_p2(self) -> int:
        return _binomial_sum(self.degrees, 2)

    def count_p3(self) -> int:
        us, vs = self.endpoints
        degs = self.degrees
        middles = (degs[us] - 1) * (degs[vs] - 1)
        return _exact_sum(middles) - 3 * self.c3

    def count_p4(self) -> int:
        if self.graph.num_edges == 0:
            return 0
        degs = self.degrees
        adjacency = self.graph.adjacency
        branch = degs - 1
        spread = adjacency @ branch
        spread_sq = adjacency @ (branch * branch)
        ordered = _exact_sum(spread * spread - spread_sq) // 2
        closing = _exact_sum(self.vertex_triangles * degs)
        return ordered + 9 * self.c3 - 2 * closing - 4 * self.c4

    def count_c3(self) -> int:
        return self.c3

    def count_c4(self) -> int:
        return self.c4

    def count_c3_plus(self) -> int:
        return _exact_sum(self.vertex_triangles * (self.degrees - 2))

    def count_k13_plus(self) -> int:
        if self.graph.num_edges == 0:
            return 0
        us, vs = self.endpoints
        degs = self.degrees
        tri = self.edge_triangles
        total = 0
        for center, extended in ((us, vs), (vs, us)):
            dc, de = degs[center], degs[extended]
            leaf_pairs = (dc - 1) * (dc - 2) // 2
            total += _exact_sum(leaf_pairs * (de - 1) - tri * (dc - 2))
        return total

    def count_c3_2e(self) -> int:
        return _binomial_sum(self.edge_triangles, 2)

    def count_c3_2v(self) -> int:
        return _binomial_sum(self.vertex_triangles, 2) - 2 * self.count_c3_2e()

    def count_c4_2e(self) -> int:
        return sum(_disjoint_pairs(group) for group in self.cycle_groups.by_edge.values())

    def count_c4_2v(self) -> int:
        return sum(_disjoint_pairs(group) for group in self.cycle_groups.by_vertex.values())

    def count_c4_2ev(self) -> int:
        groups = self.cycle_groups
        total = 0
        for pair, opposite in groups.by_diagonal.items():
            through = groups.by_edge.get(pair)
            if through:
                total += _disjoint_cross_pairs(through, opposite)
        return total

    def count_k1k(self, k: int) -> int:
        if k == 1:
            return self.graph.num_edges
        return _binomial_sum(self.degrees, k)

    def count_k2s(self, s: int) -> int:
        return _binomial_sum(self.pair_codegrees, s)

    def count_oriented_biclique(self, r: int, s: int) -> int:
        orientation = self.graph.orientation
        assert orientation is not None
        if r <= s:
            return _biclique_count(self.graph, sorted(orientation.left), r, s)
        return _biclique_count(self.graph, sorted(orientation.right), s, r)

    def count_oriented_path(self) -> int:
        orientation = self.graph.orientation
        assert orientation is not None
        if self.graph.num_edges == 0:
            return 0
        degs = self.degrees
        adjacency = self.graph.adjacency
        branch = degs - 1
        spread = adjacency @ branch
        spread_sq = adjacency @ (branch * branch)
        right = np.array(sorted(orientation.right), dtype=np.int64)
        ordered = _exact_sum(spread[right] * spread[right] - spread_sq[right]) // 2
        left = np.array(sorted(orientation.left), dtype=np.int64)
        if left.size < 2:
            return ordered
        left_codegree = self.codegree[left][:, left]
        upper = sparse.triu(left_codegree, k=1).tocsr()
        shared = np.asarray(upper.data, dtype=np.int64)
        return ordered - _exact_sum(shared * (shared - 1))


def _biclique_count(graph: Graph, side: list[int], a: int, b: int) -> int:
    """Copies of K_{a,b} whose ``a``-vertex class lies in ``side``."""
    nbrs = graph.neighbor_sets
    total = 0

    def extend(start: int, chosen: int, common: frozenset[int] | None) -> None:
        nonlocal total
        if chosen == a:
            assert common is not None
            total += math.comb(len(common), b)
            return
        for idx in range(start, len(side) - (a - chosen) + 1):
            v = side[idx]
            narrowed = nbrs[v] if common is None else common & nbrs[v]
            if len(narrowed) >= b:
                extend(idx + 1, chosen + 1, narrowed)

    extend(0, 0, None)
    return total


@dataclass
class _CycleGroups:
    """4-cycles grouped by shared substructure.

    ``by_edge[(u, v)]`` holds, for every 4-cycle through edge ``uv``, the set
    of its two other vertices; ``by_vertex[w]`` the other three vertices of
    every 4-cycle through ``w``; ``by_diagonal[(u, v)]`` the two remaining
    vertices of every 4-cycle in which ``u`` and ``v`` are opposite.
    """

    by_edge: dict[tuple[int, int], list[frozenset[int]]]
    by_vertex: dict[int, list[frozenset[int]]]
    by_diagonal: dict[tuple[int, int], list[frozenset[int]]]

    @classmethod
    def build(cls, graph: Graph) -> _CycleGroups:
        by_edge: dict[tuple[int, int], list[frozenset[int]]] = defaultdict(list)
        by_vertex: dict[int, list[frozenset[int]]] = defaultdict(list)
        by_diagonal: dict[tuple[int, int], list[frozenset[int]]] = defaultdict(list)
        for ring in graph.four_cycles.tolist():
            members = frozenset(ring)
            for pos in range(4):
                u, v = ring[pos], ring[(pos + 1) % 4]
                key = (u, v) if u < v else (v, u)
                by_edge[key].append(frozenset((ring[(pos + 2) % 4], ring[(pos + 3) % 4])))
                by_vertex[ring[pos]].append(members - {ring[pos]})
            i, j, k, l = ring
            by_diagonal[(i, k) if i < k else (k, i)].append(frozenset((j, l)))
            by_diagonal[(j, l) if j < l else (l, j)].append(frozenset((i, k)))
        return cls(dict(by_edge), dict(by_vertex), dict(by_diagonal))


_PLAIN_COUNTERS: dict[PatternTag, Callable[[_CountingContext], int]] = {
    PatternTag.E: _CountingContext.count_e,
    PatternTag.P2: _CountingContext.count_p2,
    PatternTag.P3: _CountingContext.count_p3,
    PatternTag.P4: _CountingContext.count_p4,
    PatternTag.C3: _CountingContext.count_c3,
    PatternTag.C4: _CountingContext.count_c4,
    PatternTag.C3_PLUS: _CountingContext.count_c3_plus,
    PatternTag.K13_PLUS: _CountingContext.count_k13_plus,
    PatternTag.C3_2E: _CountingContext.count_c3_2e,
    PatternTag.C3_2V: _CountingContext.count_c3_2v,
    PatternTag.C4_2E: _CountingContext.count_c4_2e,
    PatternTag.C4_2V: _CountingContext.count_c4_2v,
    PatternTag.C4_2EV: _CountingContext.count_c4_2ev,
    PatternTag.K23: lambda ctx: ctx.count_k2s(3),
    PatternTag.K24: lambda ctx: ctx.count_k2s(4),
}


def _count_plain(ctx: _CountingContext, pattern: Pattern) -> int:
    if pattern.is_oriented:
        raise PatternError(f"Oriented pattern {pattern} needs oriented_count")
    if pattern.tag == PatternTag.K1K:
        return _checked(ctx.count_k1k(pattern.params[0]), pattern)
    return _checked(_PLAIN_COUNTERS[pattern.tag](ctx), pattern)


def _count_oriented(ctx: _CountingContext, pattern: Pattern) -> int:
    if not pattern.is_oriented:
        raise PatternError(f"Plain pattern {pattern} needs count")
    if ctx.graph.orientation is None:
        raise PatternError(f"Oriented pattern {pattern} needs an oriented graph")
    if pattern.tag == PatternTag.OK:
        r, s = pattern.params
        return _checked(ctx.count_oriented_biclique(r, s), pattern)
    return _checked(ctx.count_oriented_path(), pattern)


def count(graph: Graph, pattern: Pattern) -> int:
    """Number of copies of a plain pattern in ``graph``.

    Raises:
        PatternError: If ``pattern`` is oriented.
    """
    return _count_plain(_CountingContext(graph), pattern)


def oriented_count(graph: Graph, pattern: Pattern) -> int:
    """Number of copies of an oriented pattern respecting the graph's sides.

    Raises:
        PatternError: If ``pattern`` is plain or ``graph`` has no orientation.
    """
    return _count_oriented(_CountingContext(graph), pattern)


def brute_force_count(graph: Graph, pattern: Pattern) -> int:
    """Count copies by enumerating every embedding and deduplicating edge sets."""
    if pattern.is_oriented and graph.orientation is None:
        raise PatternError(f"Oriented pattern {pattern} needs an oriented graph")
    template = pattern.template()
    order = template.search_order
    position = {v: i for i, v in enumerate(order)}
    # template neighbors placed before each vertex in search order
    earlier = [
        sorted((w for w in template.neighbors[v] if position[w] < position[v]), key=position.get)
        for v in order
    ]
    sides = template.sides
    orientation = graph.orientation
    nbrs = graph.neighbor_sets
    all_vertices = range(graph.n_vertices)
    image = [-1] * template.n_vertices
    used: set[int] = set()
    copies: set[frozenset[tuple[int, int]]] = set()

    def place(step: int) -> None:
        if step == len(order):
            copies.add(
                frozenset(
                    (min(image[u], image[v]), max(image[u], image[v]))
                    for u, v in template.edges
                )
            )
            return
        vertex = order[step]
        anchors = earlier[step]
        candidates = nbrs[image[anchors[0]]] if anchors else all_vertices
        for g in candidates:
            if g in used:
                continue
            if sides is not None and orientation is not None and orientation.side(g) != sides[vertex]:
                continue
            if any(image[w] not in nbrs[g] for w in anchors):
                continue
            image[vertex] = g
            used.add(g)
            place(step + 1)
            used.discard(g)
        image[vertex] = -1

    place(0)
    return len(copies)


@dataclass(frozen=True)
class SubgraphCensus:
    """Every count the convergence and divergence conditions consume."""

    num_e: int
    num_p2: int
    num_p3: int
    num_p4: int
    num_c3: int
    num_c4: int
    num_c3_plus: int
    num_k13_plus: int
    num_k13: int
    num_k14: int
    num_k18: int
    num_k23: int
    num_k24: int
    num_c3_2e: int
    num_c3_2v: int
    num_c4_2e: int
    num_c4_2v: int
    num_c4_2ev: int
    onum_k13: int | None = None
    onum_k14: int | None = None
    onum_k24: int | None = None
    onum_p4: int | None = None

    def total(self, *names: str) -> int:
        """Grouped count, e.g. ``total("num_c4", "num_p2", "num_e")``."""
        values = [getattr(self, name) for name in names]
        if any(v is None for v in values):
            raise PatternError(f"Oriented counts are absent in {names}")
        return sum(values)

    def as_dict(self) -> dict[str, int | None]:
        return asdict(self)


# census field -> pattern, in field order
CENSUS_PATTERNS: dict[str, Pattern] = {
    "num_e": Pattern(PatternTag.E),
    "num_p2": Pattern(PatternTag.P2),
    "num_p3": Pattern(PatternTag.P3),
    "num_p4": Pattern(PatternTag.P4),
    "num_c3": Pattern(PatternTag.C3),
    "num_c4": Pattern(PatternTag.C4),
    "num_c3_plus": Pattern(PatternTag.C3_PLUS),
    "num_k13_plus": Pattern(PatternTag.K13_PLUS),
    "num_k13": Pattern.star(3),
    "num_k14": Pattern.star(4),
    "num_k18": Pattern.star(8),
    "num_k23": Pattern(PatternTag.K23),
    "num_k24": Pattern(PatternTag.K24),
    "num_c3_2e": Pattern(PatternTag.C3_2E),
    "num_c3_2v": Pattern(PatternTag.C3_2V),
    "num_c4_2e": Pattern(PatternTag.C4_2E),
    "num_c4_2v": Pattern(PatternTag.C4_2V),
    "num_c4_2ev": Pattern(PatternTag.C4_2EV),
    "onum_k13": Pattern.oriented_biclique(1, 3),
    "onum_k14": Pattern.oriented_biclique(1, 4),
    "onum_k24": Pattern.oriented_biclique(2, 4),
    "onum_p4": Pattern(PatternTag.OP4),
}


@lru_cache(maxsize=32)
def census(graph: Graph, *, threads: int = 1) -> SubgraphCensus:
    """All census counts, sharing one set of codegree and cycle structures.

    With ``threads > 1`` the patterns are counted concurrently once the shared
    structures exist; the counts do not depend on ``threads``.
    """
    if threads < 1:
        raise ValueError(f"Thread count must be positive, got {threads}")
    started = time.perf_counter()
    ctx = _CountingContext(graph)
    names = [
        name
        for name, pattern in CENSUS_PATTERNS.items()
        if graph.is_oriented or not pattern.is_oriented
    ]

    def run(name: str) -> int:
        pattern = CENSUS_PATTERNS[name]
        return _count_oriented(ctx, pattern) if pattern.is_oriented else _count_plain(ctx, pattern)

    if threads > 1:
        ctx.warm()
        with ThreadPoolExecutor(max_workers=threads) as pool:
            counted = dict(zip(names, pool.map(run, names), strict=True))
    else:
        counted = {name: run(name) for name in names}
    values = {name: counted.get(name) for name in CENSUS_PATTERNS}
    result = SubgraphCensus(**values)  # type: ignore[arg-type]
    logger.debug(
        f"Census of {graph!r} with {threads} thread(s) took {time.perf_counter() - started:.3f}s"
    )
    return result
