"""Mask graphs: construction, degree queries and the graph-spec mini-language.

A mask graph marks which entries of a symmetric random matrix are observed.
Graphs are immutable; adjacency is stored as a sorted edge list plus sorted
per-vertex neighbor lists, and heavier derived structures (sparse adjacency,
triangle / 2-path / 4-cycle enumerations) are built lazily and cached.
"""

from __future__ import annotations

import json
import logging
from collections import defaultdict
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
from scipy import sparse

logger = logging.getLogger(__name__)

Edge = tuple[int, int]


class GraphError(ValueError):
    """Invalid graph construction or query."""


class GraphSpecError(GraphError):
    """Malformed graph specification string."""


@dataclass(frozen=True)
class Orientation:
    """Bipartition of the vertex labels into left and right sides."""

    left: frozenset[int]
    right: frozenset[int]

    def side(self, vertex: int) -> str:
        return "L" if vertex in self.left else "R"


OrientationLike = Orientation | tuple[Iterable[int], Iterable[int]]


def _as_label(value: Any, what: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int | np.integer):
        raise GraphError(f"{what} must be an integer, got {value!r}")
    return int(value)


class Graph:
    """Immutable simple undirected graph on labels ``0..n_vertices-1``.

    Args:
        n_vertices: Number of vertices.
        edges: Unordered vertex pairs. Each pair may be given in either order.
        orientation: Optional ``(left, right)`` bipartition. Every edge must
            cross it.

    Raises:
        GraphError: On invalid labels, self-loops, duplicate edges or an
            orientation that does not partition the vertices.
    """

    def __init__(
        self,
        n_vertices: int,
        edges: Iterable[Sequence[int]] = (),
        orientation: OrientationLike | None = None,
    ) -> None:
        n = _as_label(n_vertices, "Vertex count")
        if n < 0:
            raise GraphError(f"Vertex count must be nonnegative, got {n}")

        normalized: set[Edge] = set()
        for raw in edges:
            pair = tuple(raw)
            if len(pair) != 2:
                raise GraphError(f"Edge must have two endpoints, got {raw!r}")
            u, v = (_as_label(x, "Vertex label") for x in pair)
            if not (0 <= u < n and 0 <= v < n):
                raise GraphError(f"Edge {pair} has an endpoint outside 0..{n - 1}")
            if u == v:
                raise GraphError(f"Self-loop at vertex {u}")
            edge = (u, v) if u < v else (v, u)
            if edge in normalized:
                raise GraphError(f"Duplicate edge {edge}")
            normalized.add(edge)

        self._n = n
        self._edges: tuple[Edge, ...] = tuple(sorted(normalized))
        adjacency: list[list[int]] = [[] for _ in range(n)]
        for u, v in self._edges:
            adjacency[u].append(v)
            adjacency[v].append(u)
        self._neighbors: tuple[tuple[int, ...], ...] = tuple(
            tuple(sorted(nbrs)) for nbrs in adjacency
        )
        self._orientation = self._check_orientation(orientation)

    def _check_orientation(self, orientation: OrientationLike | None) -> Orientation | None:
        if orientation is None:
            return None
        if isinstance(orientation, Orientation):
            left, right = orientation.left, orientation.right
        else:
            left = frozenset(_as_label(v, "Left label") for v in orientation[0])
            right = frozenset(_as_label(v, "Right label") for v in orientation[1])
        if left & right:
            raise GraphError("Orientation sides overlap")
        if left | right != frozenset(range(self._n)):
            raise GraphError("Orientation sides must partition the vertex labels")
        for u, v in self._edges:
            if (u in left) == (v in left):
                raise GraphError(f"Edge {(u, v)} does not cross the orientation")
        return Orientation(left, right)

    @property
    def n_vertices(self) -> int:
        return self._n

    @property
    def edges(self) -> tuple[Edge, ...]:
        """Edges as ``(u, v)`` with ``u < v``, in lexicographic order."""
        return self._edges

    @property
    def num_edges(self) -> int:
        return len(self._edges)

    @property
    def orientation(self) -> Orientation | None:
        return self._orientation

    @property
    def is_oriented(self) -> bool:
        return self._orientation is not None

    def check_vertex(self, vertex: int) -> int:
        label = _as_label(vertex, "Vertex label")
        if not 0 <= label < self._n:
            raise GraphError(f"Vertex {label} is not a label of a {self._n}-vertex graph")
        return label

    def neighbors(self, vertex: int) -> tuple[int, ...]:
        return self._neighbors[self.check_vertex(vertex)]

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.neighbor_sets[self.check_vertex(u)]

    @cached_property
    def neighbor_sets(self) -> tuple[frozenset[int], ...]:
        return tuple(frozenset(nbrs) for nbrs in self._neighbors)

    @cached_property
    def degrees(self) -> np.ndarray:
        degs = np.fromiter((len(n) for n in self._neighbors), dtype=np.int64, count=self._n)
        degs.setflags(write=False)
        return degs

    @cached_property
    def edge_array(self) -> np.ndarray:
        """``(m, 2)`` int64 array of the sorted edge list."""
        arr = np.array(self._edges, dtype=np.int64).reshape(-1, 2)
        arr.setflags(write=False)
        return arr

    @cached_property
    def adjacency(self) -> sparse.csr_matrix:
        """Symmetric 0/1 adjacency matrix in CSR form with int64 entries."""
        us, vs = self.edge_array[:, 0], self.edge_array[:, 1]
        rows = np.concatenate([us, vs])
        cols = np.concatenate([vs, us])
        data = np.ones(rows.shape[0], dtype=np.int64)
        return sparse.csr_matrix((data, (rows, cols)), shape=(self._n, self._n))

    @cached_property
    def _edge_id_matrix(self) -> sparse.csr_matrix:
        us, vs = self.edge_array[:, 0], self.edge_array[:, 1]
        ids = np.arange(1, self.num_edges + 1, dtype=np.int64)
        rows = np.concatenate([us, vs])
        cols = np.concatenate([vs, us])
        return sparse.csr_matrix(
            (np.concatenate([ids, ids]), (rows, cols)), shape=(self._n, self._n)
        )

    def edge_ids(self, us: np.ndarray, vs: np.ndarray) -> np.ndarray:
        """Positions in :attr:`edges` of the pairs ``(us[i], vs[i])``.

        Raises:
            GraphError: If some pair is not an edge.
        """
        us = np.asarray(us, dtype=np.int64).ravel()
        vs = np.asarray(vs, dtype=np.int64).ravel()
        if us.size == 0:
            return np.empty(0, dtype=np.int64)
        ids = np.asarray(self._edge_id_matrix[us, vs]).ravel().astype(np.int64) - 1
        if np.any(ids < 0):
            bad = int(np.flatnonzero(ids < 0)[0])
            raise GraphError(f"Pair {(int(us[bad]), int(vs[bad]))} is not an edge")
        return ids

    def incident_edge_ids(self, vertex: int) -> np.ndarray:
        v = self.check_vertex(vertex)
        nbrs = np.array(self._neighbors[v], dtype=np.int64)
        return self.edge_ids(np.full(nbrs.shape, v, dtype=np.int64), nbrs)

    @cached_property
    def triangles(self) -> np.ndarray:
        """``(t, 3)`` array of triangles ``i < j < k``."""
        nbrs = self.neighbor_sets
        found: list[tuple[int, int, int]] = []
        for u, v in self._edges:
            found.extend((u, v, w) for w in sorted(nbrs[u] & nbrs[v]) if w > v)
        return np.array(found, dtype=np.int64).reshape(-1, 3)

    @cached_property
    def two_paths(self) -> np.ndarray:
        """``(p, 3)`` array of 2-paths ``i - j - k`` with center ``j`` and ``i < k``."""
        blocks: list[np.ndarray] = []
        for center, nbrs in enumerate(self._neighbors):
            k = len(nbrs)
            if k < 2:
                continue
            arr = np.array(nbrs, dtype=np.int64)
            first, second = np.triu_indices(k, 1)
            blocks.append(
                np.column_stack([arr[first], np.full(first.shape, center), arr[second]])
            )
        if not blocks:
            return np.empty((0, 3), dtype=np.int64)
        return np.vstack(blocks).astype(np.int64)

    @cached_property
    def four_cycles(self) -> np.ndarray:
        """``(c, 4)`` array of 4-cycles ``i - j - k - l - i``.

        Each cycle appears once, with ``i`` its smallest vertex, ``k`` the
        vertex opposite ``i`` and ``j < l``.
        """
        found: list[tuple[int, int, int, int]] = []
        for u, nbrs in enumerate(self._neighbors):
            buckets: dict[int, list[int]] = defaultdict(list)
            for a in nbrs:
                if a <= u:
                    continue
                for w in self._neighbors[a]:
                    if w > u:
                        buckets[w].append(a)
            for w, mids in buckets.items():
                for x in range(len(mids)):
                    for y in range(x + 1, len(mids)):
                        a, b = mids[x], mids[y]
                        found.append((u, a, w, b) if a < b else (u, b, w, a))
        found.sort()
        return np.array(found, dtype=np.int64).reshape(-1, 4)

    def relabel(self, permutation: Sequence[int]) -> Graph:
        """Graph with vertex ``v`` renamed ``permutation[v]``."""
        perm = [int(p) for p in permutation]
        if sorted(perm) != list(range(self._n)):
            raise GraphError("Relabeling must be a permutation of the vertex labels")
        orientation = None
        if self._orientation is not None:
            orientation = (
                [perm[v] for v in self._orientation.left],
                [perm[v] for v in self._orientation.right],
            )
        return Graph(self._n, [(perm[u], perm[v]) for u, v in self._edges], orientation)

    def with_edge(self, u: int, v: int) -> Graph:
        """Graph with one more edge; the orientation is dropped if it no longer fits."""
        edges = [*self._edges, (u, v)]
        orientation = self._orientation
        if orientation is not None and (u in orientation.left) == (v in orientation.left):
            orientation = None
        return Graph(self._n, edges, orientation)

    def to_dict(self) -> dict[str, Any]:
        data: dict[str, Any] = {"n": self._n, "edges": [list(e) for e in self._edges]}
        if self._orientation is not None:
            data["left"] = sorted(self._orientation.left)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> Graph:
        try:
            n = data["n"]
            edges = data.get("edges", [])
        except (KeyError, TypeError) as e:
            raise GraphError(f"Graph object needs an 'n' field: {e}") from e
        left = data.get("left")
        orientation = None
        if left is not None:
            left_set = {int(v) for v in left}
            orientation = (left_set, set(range(int(n))) - left_set)
        return cls(n, edges, orientation)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return (
            self._n == other._n
            and self._edges == other._edges
            and self._orientation == other._orientation
        )

    def __hash__(self) -> int:
        return self._hash

    @cached_property
    def _hash(self) -> int:
        return hash((self._n, self._edges, self._orientation))

    def __repr__(self) -> str:
        side = ", oriented" if self.is_oriented else ""
        return f"Graph(n={self._n}, edges={self.num_edges}{side})"


def _check_probability(p: float) -> float:
    p = float(p)
    if not 0.0 <= p <= 1.0:
        raise GraphError(f"Edge probability must lie in [0, 1], got {p}")
    return p


def _check_count(value: int, what: str) -> int:
    value = _as_label(value, what)
    if value < 0:
        raise GraphError(f"{what} must be nonnegative, got {value}")
    return value


def complete_graph(n: int) -> Graph:
    n = _check_count(n, "Vertex count")
    first, second = np.triu_indices(n, 1)
    return Graph(n, zip(first.tolist(), second.tolist(), strict=True))


def complete_bipartite(n: int, m: int) -> Graph:
    """K_{n,m} with left side ``0..n-1`` and right side ``n..n+m-1``."""
    n = _check_count(n, "Left count")
    m = _check_count(m, "Right count")
    edges = [(i, n + j) for i in range(n) for j in range(m)]
    return Graph(n + m, edges, (range(n), range(n, n + m)))


def star_graph(k: int) -> Graph:
    """K_{1,k} with the center labeled 0."""
    return complete_bipartite(1, k)


def cycle_graph(n: int) -> Graph:
    n = _check_count(n, "Vertex count")
    if n < 3:
        raise GraphError(f"A cycle needs at least 3 vertices, got {n}")
    return Graph(n, [(v, (v + 1) % n) for v in range(n)])


def path_graph(n: int) -> Graph:
    n = _check_count(n, "Vertex count")
    return Graph(n, [(v, v + 1) for v in range(n - 1)])


def erdos_renyi(n: int, p: float, rng: np.random.Generator) -> Graph:
    """G(n, p): one uniform draw per pair, pairs in lexicographic order."""
    n = _check_count(n, "Vertex count")
    p = _check_probability(p)
    first, second = np.triu_indices(n, 1)
    keep = rng.random(first.shape[0]) < p
    graph = Graph(n, zip(first[keep].tolist(), second[keep].tolist(), strict=True))
    logger.debug(f"Sampled G({n}, {p}) with {graph.num_edges} edges")
    return graph


def bipartite_erdos_renyi(n: int, m: int, p: float, rng: np.random.Generator) -> Graph:
    """Bipartite G(n, m, p), left side ``0..n-1``; pairs drawn in lexicographic order."""
    n = _check_count(n, "Left count")
    m = _check_count(m, "Right count")
    p = _check_probability(p)
    keep = (rng.random(n * m) < p).reshape(n, m)
    rows, cols = np.nonzero(keep)
    graph = Graph(
        n + m,
        zip(rows.tolist(), (cols + n).tolist(), strict=True),
        (range(n), range(n, n + m)),
    )
    logger.debug(f"Sampled G({n}, {m}, {p}) with {graph.num_edges} edges")
    return graph


def degree(graph: Graph, vertex: int) -> int:
    return len(graph.neighbors(vertex))


def shared_degree(graph: Graph, vertices: Iterable[int]) -> int:
    """Number of vertices adjacent to every listed vertex; duplicates collapse."""
    distinct = {graph.check_vertex(v) for v in vertices}
    if not distinct:
        raise GraphError("Shared degree needs at least one vertex")
    nbrs = graph.neighbor_sets
    common = frozenset.intersection(*(nbrs[v] for v in distinct))
    return len(common)


def max_degree_vertex(graph: Graph) -> tuple[int, int]:
    """Maximal-degree vertex with the smallest label, and its degree."""
    if graph.n_vertices == 0:
        raise GraphError("The empty graph has no maximal-degree vertex")
    vertex = int(np.argmax(graph.degrees))
    return vertex, int(graph.degrees[vertex])


# family -> (required parameters, needs a generator)
_FAMILIES: dict[str, tuple[tuple[str, ...], bool]] = {
    "complete": (("n",), False),
    "kbip": (("n", "m"), False),
    "er": (("n", "p"), True),
    "biper": (("n", "m", "p"), True),
    "cycle": (("n",), False),
    "path": (("n",), False),
}

GRAPH_FAMILIES = tuple(_FAMILIES)


def _parse_value(key: str, value: str, token: str) -> int | float:
    try:
        return float(value) if key == "p" else int(value)
    except ValueError:
        raise GraphSpecError(f"Invalid value in token {token!r}") from None


def parse_graph_spec(spec: str, rng: np.random.Generator | None = None) -> Graph:
    """Build a graph from a spec such as ``er:n=50,p=0.3``.

    Families: ``complete:n``, ``kbip:n,m``, ``er:n,p``, ``biper:n,m,p``,
    ``cycle:n``, ``path:n``. Random families draw from ``rng``.

    Raises:
        GraphSpecError: On malformed specs; the message names the offending
            token.
        GraphError: On parameter values outside their domain.
    """
    text = spec.strip()
    family, sep, rest = text.partition(":")
    family = family.strip()
    if not family:
        raise GraphSpecError(f"Missing graph family in spec {spec!r}")
    if family not in _FAMILIES:
        raise GraphSpecError(f"Unknown graph family {family!r} in spec {spec!r}")
    if not sep or not rest.strip():
        raise GraphSpecError(f"Missing parameters after {family!r} in spec {spec!r}")

    required, needs_rng = _FAMILIES[family]
    params: dict[str, int | float] = {}
    for token in rest.split(","):
        key, eq, value = (part.strip() for part in token.partition("="))
        if not eq or not key or not value:
            raise GraphSpecError(f"Malformed parameter token {token.strip()!r}")
        if key not in required:
            raise GraphSpecError(f"Unknown parameter {key!r} for family {family!r}")
        if key in params:
            raise GraphSpecError(f"Repeated parameter token {token.strip()!r}")
        params[key] = _parse_value(key, value, token.strip())
    missing = [k for k in required if k not in params]
    if missing:
        raise GraphSpecError(f"Missing parameter {missing[0]!r} for family {family!r}")
    if needs_rng and rng is None:
        raise GraphSpecError(f"Random family {family!r} needs a generator")

    n = int(params["n"])
    m = int(params.get("m", 0))
    p = float(params.get("p", 1.0))
    match family:
        case "complete":
            return complete_graph(n)
        case "kbip":
            return complete_bipartite(n, m)
        case "er":
            assert rng is not None
            return erdos_renyi(n, p, rng)
        case "biper":
            assert rng is not None
            return bipartite_erdos_renyi(n, m, p, rng)
        case "cycle":
            return cycle_graph(n)
        case _:
            return path_graph(n)
