"""Shared data model: typed variables, mixed datasets, and marked graphs.

Variables are identified by stable integer index within a dataset or graph;
names are metadata carried along so that results can be compared across
column permutations ("up to relabeling").
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "VariableMeta",
    "MixedDataset",
    "Mark",
    "Edge",
    "MarkedGraph",
    "edge_type",
    "skeleton",
    "is_dag",
]


@dataclass(frozen=True)
class VariableMeta:
    """A named variable: continuous, or categorical with fixed level labels.

    ``levels is None`` means continuous; otherwise the tuple of distinct
    level labels defines both the level count and the coding order.
    """

    name: str
    levels: tuple[str, ...] | None = None

    def __post_init__(self):
        if self.levels is not None:
            if len(self.levels) < 2:
                raise ValueError(f"{self.name}: categorical needs >= 2 levels")
            if len(set(self.levels)) != len(self.levels):
                raise ValueError(f"{self.name}: duplicate level labels")

    @property
    def is_continuous(self) -> bool:
        return self.levels is None

    @property
    def n_levels(self) -> int:
        return 0 if self.levels is None else len(self.levels)

    @property
    def dof(self) -> int:
        """Degrees of freedom: 1 if continuous, level count - 1 otherwise."""
        return 1 if self.levels is None else len(self.levels) - 1


def continuous(name: str) -> VariableMeta:
    return VariableMeta(name)


def categorical(name: str, n_levels: int = 3) -> VariableMeta:
    return VariableMeta(name, tuple(str(i) for i in range(n_levels)))


def _check_unique_names(variables) -> None:
    names = [v.name for v in variables]
    if len(set(names)) != len(names):
        raise ValueError("variable names must be unique")


class MixedDataset:
    """Column-typed sample matrix over mixed variables.

    Continuous columns are float64 arrays; categorical columns are integer
    level codes in ``0..n_levels-1``. Instances are immutable once built and
    safe to share across concurrent readers.
    """

    def __init__(self, variables, columns):
        variables = tuple(variables)
        _check_unique_names(variables)
        if len(columns) != len(variables):
            raise ValueError("one column per variable required")
        n = len(columns[0]) if len(columns) else 0
        if n < 1:
            raise ValueError("need at least one sample")
        cols = []
        for v, c in zip(variables, columns):
            if v.is_continuous:
                a = np.asarray(c, dtype=np.float64)
            else:
                a = np.asarray(c, dtype=np.int32)
                if a.size and (a.min() < 0 or a.max() >= v.n_levels):
                    raise ValueError(f"{v.name}: level code out of range")
            if a.shape != (n,):
                raise ValueError("all columns must have equal length")
            a.flags.writeable = False
            cols.append(a)
        self.variables = variables
        self.columns = tuple(cols)
        self.n = n
        self._index = {v.name: i for i, v in enumerate(variables)}

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    def index_of(self, name: str) -> int:
        return self._index[name]

    def column(self, i: int) -> np.ndarray:
        return self.columns[i]

    def subsample(self, rows: np.ndarray) -> "MixedDataset":
        """Dataset restricted to the given row indices (metadata unchanged)."""
        return MixedDataset(self.variables, [c[rows] for c in self.columns])

    def permute_columns(self, perm) -> "MixedDataset":
        """Reorder variables; column ``j`` of the result is column ``perm[j]``."""
        return MixedDataset(
            [self.variables[p] for p in perm], [self.columns[p] for p in perm]
        )


class Mark(str, Enum):
    """Endpoint marking of an edge."""

    DIRECTED = "-->"
    UNDIRECTED = "---"
    BIDIRECTED = "<->"


@dataclass(frozen=True)
class Edge:
    """One edge over variable indices.

    For :attr:`Mark.DIRECTED`, ``a`` is the tail and ``b`` the head; for the
    symmetric marks the pair is normalized so that ``a < b``.
    """

    mark: Mark
    a: int
    b: int

    def __post_init__(self):
        if self.a == self.b:
            raise ValueError("edge endpoints must be distinct")
        if self.mark is not Mark.DIRECTED and self.a > self.b:
            a, b = self.a, self.b
            object.__setattr__(self, "a", b)
            object.__setattr__(self, "b", a)

    @property
    def pair(self) -> tuple[int, int]:
        return (self.a, self.b) if self.a < self.b else (self.b, self.a)


def directed(tail: int, head: int) -> Edge:
    return Edge(Mark.DIRECTED, tail, head)


def undirected(a: int, b: int) -> Edge:
    return Edge(Mark.UNDIRECTED, a, b)


def bidirected(a: int, b: int) -> Edge:
    return Edge(Mark.BIDIRECTED, a, b)


class MarkedGraph:
    """Graph over variables whose edges carry endpoint marks.

    At most one edge per unordered pair is enforced structurally. Ambiguous
    triples ``(x, z, y)`` record unshielded triples whose collider status the
    conservative search could not decide; both pairs must be adjacent.
    """

    def __init__(self, variables, edges=(), ambiguous_triples=()):
        variables = tuple(variables)
        _check_unique_names(variables)
        p = len(variables)
        pairs: dict[tuple[int, int], Edge] = {}
        for e in edges:
            if not (0 <= e.a < p and 0 <= e.b < p):
                raise ValueError(f"edge endpoint out of range: {e}")
            if e.pair in pairs:
                raise ValueError(f"duplicate edge for pair {e.pair}")
            pairs[e.pair] = e
        self.variables = variables
        self._pairs = pairs
        triples = set()
        for x, z, y in ambiguous_triples:
            x, y = (x, y) if x < y else (y, x)
            key_xz = (x, z) if x < z else (z, x)
            key_zy = (z, y) if z < y else (y, z)
            if key_xz not in pairs or key_zy not in pairs:
                raise ValueError(f"ambiguous triple ({x},{z},{y}) not adjacent")
            triples.add((x, z, y))
        self.ambiguous_triples = frozenset(triples)
        self._index = {v.name: i for i, v in enumerate(variables)}

    @classmethod
    def empty(cls, variables) -> "MarkedGraph":
        return cls(variables)

    @classmethod
    def complete_undirected(cls, variables) -> "MarkedGraph":
        variables = tuple(variables)
        p = len(variables)
        return cls(
            variables, [undirected(i, j) for i in range(p) for j in range(i + 1, p)]
        )

    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def edges(self) -> frozenset[Edge]:
        return frozenset(self._pairs.values())

    @property
    def n_edges(self) -> int:
        return len(self._pairs)

    def index_of(self, name: str) -> int:
        return self._index[name]

    def edge_between(self, a: int, b: int) -> Edge | None:
        return self._pairs.get((a, b) if a < b else (b, a))

    def has_edge(self, a: int, b: int) -> bool:
        return ((a, b) if a < b else (b, a)) in self._pairs

    def adjacent(self, i: int) -> set[int]:
        out = set()
        for a, b in self._pairs:
            if a == i:
                out.add(b)
            elif b == i:
                out.add(a)
        return out

    def parents(self, i: int) -> set[int]:
        return {
            e.a
            for e in self._pairs.values()
            if e.mark is Mark.DIRECTED and e.b == i
        }

    def adjacency_pairs(self) -> set[tuple[int, int]]:
        return set(self._pairs)

    def named_edges(self) -> frozenset[tuple[str, str, str]]:
        """Edges as (mark, name, name), canonical for symmetric marks.

        Directed edges keep tail/head order; symmetric marks sort the names.
        This is the representation used to compare graphs up to relabeling.
        """
        out = []
        for e in self._pairs.values():
            na, nb = self.variables[e.a].name, self.variables[e.b].name
            if e.mark is not Mark.DIRECTED and na > nb:
                na, nb = nb, na
            out.append((e.mark.value, na, nb))
        return frozenset(out)

    def named_ambiguous_triples(self) -> frozenset[tuple[str, str, str]]:
        out = []
        for x, z, y in self.ambiguous_triples:
            nx, nz, ny = (self.variables[i].name for i in (x, z, y))
            if nx > ny:
                nx, ny = ny, nx
            out.append((nx, nz, ny))
        return frozenset(out)

    def same_pattern(self, other: "MarkedGraph") -> bool:
        """True if both graphs have identical named edges and triples."""
        return (
            self.named_edges() == other.named_edges()
            and self.named_ambiguous_triples() == other.named_ambiguous_triples()
        )


def edge_type(a: VariableMeta, b: VariableMeta) -> str:
    """Classify an edge by endpoint kinds: 'cc', 'cd', or 'dd'."""
    if a.is_continuous and b.is_continuous:
        return "cc"
    if not a.is_continuous and not b.is_continuous:
        return "dd"
    return "cd"


def skeleton(g: MarkedGraph) -> MarkedGraph:
    """Adjacency structure of ``g``: every edge undirected, no triples."""
    return MarkedGraph(
        g.variables, [undirected(a, b) for a, b in g.adjacency_pairs()]
    )


def is_dag(g: MarkedGraph) -> bool:
    """True iff all edges are directed and no directed cycle exists."""
    if any(e.mark is not Mark.DIRECTED for e in g.edges):
        return False
    children: dict[int, list[int]] = {i: [] for i in range(g.n_vars)}
    indeg = [0] * g.n_vars
    for e in g.edges:
        children[e.a].append(e.b)
        indeg[e.b] += 1
    queue = [i for i in range(g.n_vars) if indeg[i] == 0]
    seen = 0
    while queue:
        i = queue.pop()
        seen += 1
        for c in children[i]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    return seen == g.n_vars


def topological_order(g: MarkedGraph) -> list[int]:
    """A topological order of a DAG (raises if ``g`` is not one)."""
    children: dict[int, list[int]] = {i: [] for i in range(g.n_vars)}
    indeg = [0] * g.n_vars
    for e in g.edges:
        if e.mark is not Mark.DIRECTED:
            raise ValueError("graph has non-directed edges")
        children[e.a].append(e.b)
        indeg[e.b] += 1
    order, queue = [], sorted(i for i in range(g.n_vars) if indeg[i] == 0)
    while queue:
        i = queue.pop(0)
        order.append(i)
        for c in children[i]:
            indeg[c] -= 1
            if indeg[c] == 0:
                queue.append(c)
    if len(order) != g.n_vars:
        raise ValueError("graph has a directed cycle")
    return order
