"""Small pattern graphs counted by the census.

Each pattern has a frozen template: vertex count, edge list and, for oriented
patterns, the side (``"L"`` or ``"R"``) every template vertex must map to.
The templates are the single source of truth for the brute-force oracle.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property


class PatternError(ValueError):
    """Invalid pattern parameters or a plain/oriented mismatch."""


class PatternTag(StrEnum):
    E = "E"
    P2 = "P2"
    P3 = "P3"
    P4 = "P4"
    C3 = "C3"
    C4 = "C4"
    C3_PLUS = "C3_PLUS"
    K13_PLUS = "K13_PLUS"
    C3_2E = "C3_2E"
    C3_2V = "C3_2V"
    C4_2E = "C4_2E"
    C4_2V = "C4_2V"
    C4_2EV = "C4_2EV"
    K23 = "K23"
    K24 = "K24"
    K1K = "K1K"
    OK = "OK"
    OP4 = "OP4"


ORIENTED_TAGS = frozenset({PatternTag.OK, PatternTag.OP4})

_FIXED_EDGES: dict[PatternTag, tuple[int, tuple[tuple[int, int], ...]]] = {
    PatternTag.E: (2, ((0, 1),)),
    PatternTag.P2: (3, ((0, 1), (1, 2))),
    PatternTag.P3: (4, ((0, 1), (1, 2), (2, 3))),
    PatternTag.P4: (5, ((0, 1), (1, 2), (2, 3), (3, 4))),
    PatternTag.C3: (3, ((0, 1), (1, 2), (0, 2))),
    PatternTag.C4: (4, ((0, 1), (1, 2), (2, 3), (0, 3))),
    # triangle with a pendant edge (paw)
    PatternTag.C3_PLUS: (4, ((0, 1), (1, 2), (0, 2), (2, 3))),
    # K_{1,3} with one leaf extended (fork)
    PatternTag.K13_PLUS: (5, ((0, 1), (0, 2), (0, 3), (1, 4))),
    # two triangles on the edge 0-1 (diamond)
    PatternTag.C3_2E: (4, ((0, 1), (0, 2), (1, 2), (0, 3), (1, 3))),
    # two triangles through vertex 0 (bowtie)
    PatternTag.C3_2V: (5, ((0, 1), (1, 2), (0, 2), (0, 3), (3, 4), (0, 4))),
    # 4-cycles 0-1-2-3 and 0-1-4-5 sharing only the edge 0-1
    PatternTag.C4_2E: (
        6,
        ((0, 1), (1, 2), (2, 3), (0, 3), (1, 4), (4, 5), (0, 5)),
    ),
    # 4-cycles 0-1-2-3 and 0-4-5-6 sharing only vertex 0
    PatternTag.C4_2V: (
        7,
        ((0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (4, 5), (5, 6), (0, 6)),
    ),
    # 4-cycle 0-1-2-3 through the edge 0-1, and 4-cycle 0-4-1-5 with 0, 1 opposite
    PatternTag.C4_2EV: (
        6,
        ((0, 1), (1, 2), (2, 3), (0, 3), (0, 4), (1, 4), (1, 5), (0, 5)),
    ),
    PatternTag.K23: (5, ((0, 2), (0, 3), (0, 4), (1, 2), (1, 3), (1, 4))),
    PatternTag.K24: (
        6,
        ((0, 2), (0, 3), (0, 4), (0, 5), (1, 2), (1, 3), (1, 4), (1, 5)),
    ),
}


@dataclass(frozen=True)
class PatternTemplate:
    """Concrete labeled copy of a pattern."""

    n_vertices: int
    edges: tuple[tuple[int, int], ...]
    sides: tuple[str, ...] | None = None

    @cached_property
    def neighbors(self) -> tuple[frozenset[int], ...]:
        adjacency: list[set[int]] = [set() for _ in range(self.n_vertices)]
        for u, v in self.edges:
            adjacency[u].add(v)
            adjacency[v].add(u)
        return tuple(frozenset(a) for a in adjacency)

    @cached_property
    def search_order(self) -> tuple[int, ...]:
        """Breadth-first vertex order; each later vertex touches an earlier one."""
        order: list[int] = []
        seen: set[int] = set()
        for root in range(self.n_vertices):
            if root in seen:
                continue
            seen.add(root)
            queue = deque([root])
            while queue:
                v = queue.popleft()
                order.append(v)
                for w in sorted(self.neighbors[v]):
                    if w not in seen:
                        seen.add(w)
                        queue.append(w)
        return tuple(order)


@dataclass(frozen=True)
class Pattern:
    """A census pattern: a plain tag, ``K1K(k)``, ``OK(r, s)`` or ``OP4``."""

    tag: PatternTag
    params: tuple[int, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "tag", PatternTag(self.tag))
        object.__setattr__(self, "params", tuple(int(p) for p in self.params))
        if self.tag == PatternTag.K1K:
            if len(self.params) != 1 or self.params[0] < 1:
                raise PatternError(f"K1K needs one parameter k >= 1, got {self.params}")
        elif self.tag == PatternTag.OK:
            if len(self.params) != 2 or min(self.params) < 1:
                raise PatternError(f"OK needs parameters r, s >= 1, got {self.params}")
        elif self.params:
            raise PatternError(f"Pattern {self.tag} takes no parameters")

    @classmethod
    def star(cls, k: int) -> Pattern:
        return cls(PatternTag.K1K, (k,))

    @classmethod
    def oriented_biclique(cls, r: int, s: int) -> Pattern:
        return cls(PatternTag.OK, (r, s))

    @property
    def is_oriented(self) -> bool:
        return self.tag in ORIENTED_TAGS

    @property
    def name(self) -> str:
        if self.params:
            return f"{self.tag}({','.join(map(str, self.params))})"
        return str(self.tag)

    def template(self) -> PatternTemplate:
        match self.tag:
            case PatternTag.K1K:
                (k,) = self.params
                return PatternTemplate(k + 1, tuple((0, leaf) for leaf in range(1, k + 1)))
            case PatternTag.OK:
                r, s = self.params
                edges = tuple((i, r + j) for i in range(r) for j in range(s))
                return PatternTemplate(r + s, edges, ("L",) * r + ("R",) * s)
            case PatternTag.OP4:
                # path a-b-c-d-e; the 2-vertex class {b, d} is left
                return PatternTemplate(
                    5, ((0, 1), (1, 2), (2, 3), (3, 4)), ("R", "L", "R", "L", "R")
                )
            case _:
                n, edges = _FIXED_EDGES[self.tag]
                return PatternTemplate(n, edges)

    def __str__(self) -> str:
        return self.name


PLAIN_PATTERNS: tuple[Pattern, ...] = tuple(
    Pattern(tag) for tag in PatternTag if tag not in ORIENTED_TAGS and tag != PatternTag.K1K
)
