"""Constraint-based directed search: PC-stable, CPC-stable, and the MGM
hybrids that start from the undirected MGM graph instead of the complete
graph.

All enumeration (edges, neighbors, conditioning subsets) runs in variable
NAME order, which makes every stage of the output — skeleton, recorded
sepsets, v-structures, and the Meek closure — invariant to input column
order up to relabeling. Within one depth the adjacency snapshot is frozen
and removals applied only after all tests of that depth, so the per-edge
subset scans are independent and can run on a thread pool.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations

from .citest import CiTester
from .mgm import MgmConfig, mgm_learn
from .model import (
    Edge,
    Mark,
    MarkedGraph,
    MixedDataset,
    bidirected,
    directed,
    undirected,
)

__all__ = [
    "SearchConfig",
    "SepsetMap",
    "pcs_skeleton",
    "orient_v_structures",
    "meek_rules",
    "pc_stable",
    "cpc_stable",
    "mgm_pcs",
    "mgm_cpcs",
]


@dataclass(frozen=True)
class SearchConfig:
    """Settings shared by the PC-family searches."""

    alpha: float
    max_depth: int | None = None
    conservative: bool = False
    initial_graph: MarkedGraph | None = None
    threads: int = 1

    def __post_init__(self):
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")


class SepsetMap:
    """Conditioning sets that separated removed pairs, keyed per pair."""

    def __init__(self):
        self._sets: dict[tuple[int, int], tuple[int, ...]] = {}

    @staticmethod
    def _key(x: int, y: int) -> tuple[int, int]:
        return (x, y) if x < y else (y, x)

    def record(self, x: int, y: int, s) -> None:
        self._sets[self._key(x, y)] = tuple(sorted(s))

    def get(self, x: int, y: int) -> tuple[int, ...] | None:
        return self._sets.get(self._key(x, y))

    def __len__(self) -> int:
        return len(self._sets)

    def items(self):
        return self._sets.items()


def _canonical_rank(data: MixedDataset) -> list[int]:
    """rank[i] = position of variable i in name order."""
    order = sorted(range(data.n_vars), key=lambda i: data.variables[i].name)
    rank = [0] * data.n_vars
    for pos, i in enumerate(order):
        rank[i] = pos
    return rank


def pcs_skeleton(
    data: MixedDataset,
    cfg: SearchConfig,
    tester: CiTester | None = None,
    stats: dict | None = None,
) -> tuple[MarkedGraph, SepsetMap]:
    """Stable skeleton phase.

    Starts from ``cfg.initial_graph`` (complete graph when absent). At each
    depth d every surviving edge is tested against all size-d subsets of
    either endpoint's frozen adjacency set; the first separating set wins
    and removals apply after the whole depth.
    """
    if tester is None:
        tester = CiTester(data)
    p = data.n_vars
    rank = _canonical_rank(data)
    if cfg.initial_graph is not None:
        g0 = cfg.initial_graph
        if tuple(v.name for v in g0.variables) != tuple(
            v.name for v in data.variables
        ):
            raise ValueError("initial graph variables do not match the data")
        adj: list[set[int]] = [set() for _ in range(p)]
        for a, b in g0.adjacency_pairs():
            adj[a].add(b)
            adj[b].add(a)
    else:
        adj = [set(range(p)) - {i} for i in range(p)]

    sepsets = SepsetMap()
    n_tests = 0
    depth = 0
    while cfg.max_depth is None or depth <= cfg.max_depth:
        frozen = [tuple(sorted(s, key=lambda v: rank[v])) for s in adj]
        edges = sorted(
            ((x, y) for x in range(p) for y in adj[x] if rank[x] < rank[y]),
            key=lambda e: (rank[e[0]], rank[e[1]]),
        )
        if not any(
            max(len(frozen[x]) - 1, len(frozen[y]) - 1) >= depth for x, y in edges
        ):
            break

        def scan(edge: tuple[int, int], d: int = depth):
            x, y = edge
            tried: set[tuple[int, ...]] = set()
            tests = 0
            for base in (x, y):
                cands = [v for v in frozen[base] if v != (y if base == x else x)]
                if len(cands) < d:
                    continue
                for s in combinations(cands, d):
                    if s in tried:
                        continue
                    tried.add(s)
                    tests += 1
                    if tester.test(x, y, set(s), cfg.alpha).independent:
                        return x, y, s, tests
            return None, None, None, tests

        if cfg.threads > 1 and len(edges) > 1:
            with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
                results = list(pool.map(scan, edges))
        else:
            results = [scan(e) for e in edges]

        for x, y, s, tests in results:
            n_tests += tests
            if x is not None:
                adj[x].discard(y)
                adj[y].discard(x)
                sepsets.record(x, y, s)
        depth += 1

    if stats is not None:
        stats["n_tests"] = stats.get("n_tests", 0) + n_tests
        stats["depth_reached"] = depth
    graph = MarkedGraph(
        data.variables,
        [undirected(x, y) for x in range(p) for y in adj[x] if x < y],
    )
    return graph, sepsets


def _unshielded_triples(adj: list[set[int]], rank: list[int]):
    """Triples (x, z, y), x/y nonadjacent, both adjacent to z; canonical
    order with rank[x] < rank[y]."""
    triples = []
    for z in sorted(range(len(adj)), key=lambda v: rank[v]):
        nbrs = sorted(adj[z], key=lambda v: rank[v])
        for i, x in enumerate(nbrs):
            for y in nbrs[i + 1 :]:
                if y not in adj[x]:
                    triples.append((x, z, y))
    return triples


def orient_v_structures(
    skel: MarkedGraph,
    sepsets: SepsetMap,
    conservative: bool,
    data: MixedDataset,
    cfg: SearchConfig,
    tester: CiTester | None = None,
    stats: dict | None = None,
) -> MarkedGraph:
    """Collider orientation over an undirected skeleton.

    Plain mode orients x -> z <- y when z is outside the recorded sepset of
    (x, y); pairs with no recorded sepset (possible with an initial graph)
    stay unoriented. Conflicting orientations of one edge make it
    bidirected. Conservative mode re-tests every subset of either
    endpoint's neighbors: colliders need z absent from all separating
    sets, triples with mixed evidence (or none at all) are recorded as
    ambiguous.
    """
    p = skel.n_vars
    rank = _canonical_rank(data)
    adj = [skel.adjacent(i) for i in range(p)]
    triples = _unshielded_triples(adj, rank)

    demands: dict[tuple[int, int], set[int]] = {}
    ambiguous: list[tuple[int, int, int]] = []
    n_tests = 0

    def demand(tail: int, head: int) -> None:
        key = (tail, head) if tail < head else (head, tail)
        demands.setdefault(key, set()).add(head)

    if not conservative:
        for x, z, y in triples:
            s = sepsets.get(x, y)
            if s is not None and z not in s:
                demand(x, z)
                demand(y, z)
    else:
        if tester is None:
            tester = CiTester(data)
        sep_cache: dict[tuple[int, int], list[set[int]]] = {}
        for x, z, y in triples:
            key = (x, y) if rank[x] < rank[y] else (y, x)
            if key not in sep_cache:
                found: list[set[int]] = []
                tried: set[tuple[int, ...]] = set()
                for base, other in (key, key[::-1]):
                    cands = sorted(
                        (v for v in adj[base] if v != other),
                        key=lambda v: rank[v],
                    )
                    top = len(cands) if cfg.max_depth is None else min(
                        len(cands), cfg.max_depth
                    )
                    for d in range(top + 1):
                        for s in combinations(cands, d):
                            if s in tried:
                                continue
                            tried.add(s)
                            n_tests += 1
                            if tester.test(key[0], key[1], set(s), cfg.alpha).independent:
                                found.append(set(s))
                sep_cache[key] = found
            found = sep_cache[key]
            if not found:
                ambiguous.append((x, z, y))
            else:
                hits = sum(1 for s in found if z in s)
                if hits == 0:
                    demand(x, z)
                    demand(y, z)
                elif hits < len(found):
                    ambiguous.append((x, z, y))

    edges: list[Edge] = []
    for a, b in skel.adjacency_pairs():
        want = demands.get((a, b))
        if not want:
            edges.append(undirected(a, b))
        elif len(want) == 2:
            edges.append(bidirected(a, b))
        else:
            head = next(iter(want))
            tail = a if head == b else b
            edges.append(directed(tail, head))

    if stats is not None:
        stats["n_tests"] = stats.get("n_tests", 0) + n_tests
    return MarkedGraph(data.variables, edges, ambiguous)


def meek_rules(g: MarkedGraph) -> MarkedGraph:
    """Orientation propagation (rules R1-R3) to fixpoint.

    Per sweep all firings are collected against the frozen graph and then
    applied in canonical order; an edge already directed or bidirected is
    never re-oriented. Ambiguous triples block R1 at the triple itself and
    R3 at the (parent, pivot, parent) triple.
    """
    p = g.n_vars
    names = [v.name for v in g.variables]
    rank = sorted(range(p), key=lambda i: names[i])
    rank_of = [0] * p
    for pos, i in enumerate(rank):
        rank_of[i] = pos

    und: set[tuple[int, int]] = set()
    direct: dict[tuple[int, int], tuple[int, int]] = {}
    bid: set[tuple[int, int]] = set()
    for e in g.edges:
        if e.mark is Mark.UNDIRECTED:
            und.add(e.pair)
        elif e.mark is Mark.BIDIRECTED:
            bid.add(e.pair)
        else:
            direct[e.pair] = (e.a, e.b)
    adj: list[set[int]] = [set() for _ in range(p)]
    for a, b in list(und) + list(bid) + list(direct):
        adj[a].add(b)
        adj[b].add(a)

    amb = set()
    for x, z, y in g.ambiguous_triples:
        amb.add((x, z, y) if x < y else (y, z, x))

    def blocked(x: int, z: int, y: int) -> bool:
        return ((x, z, y) if x < y else (y, z, x)) in amb

    while True:
        parents: list[list[int]] = [[] for _ in range(p)]
        for t, h in direct.values():
            parents[h].append(t)
        demands: list[tuple[int, int]] = []
        for pair in und:
            for a, b in (pair, pair[::-1]):
                # R1: t -> a, a - b, t not adjacent to b.
                for t in parents[a]:
                    if t != b and t not in adj[b] and not blocked(t, a, b):
                        demands.append((a, b))
                        break
            # R2: a -> z -> b plus a - b orients a -> b (both directions).
            for a, b in (pair, pair[::-1]):
                if any(
                    (min(a, z), max(a, z)) in direct
                    and direct[(min(a, z), max(a, z))] == (a, z)
                    and (min(z, b), max(z, b)) in direct
                    and direct[(min(z, b), max(z, b))] == (z, b)
                    for z in adj[a] & adj[b]
                ):
                    demands.append((a, b))
            # R3: a - b with two nonadjacent common neighbors c, d where
            # a - c, a - d undirected and c -> b, d -> b.
            for a, b in (pair, pair[::-1]):
                cands = [
                    c
                    for c in adj[a] & adj[b]
                    if (min(a, c), max(a, c)) in und
                    and (min(c, b), max(c, b)) in direct
                    and direct[(min(c, b), max(c, b))] == (c, b)
                ]
                fired = False
                for i, c in enumerate(cands):
                    for d in cands[i + 1 :]:
                        if c not in adj[d] and not blocked(c, a, d):
                            demands.append((a, b))
                            fired = True
                            break
                    if fired:
                        break
        if not demands:
            break
        demands.sort(key=lambda th: (rank_of[th[0]], rank_of[th[1]]))
        applied = False
        for tail, head in demands:
            pair = (tail, head) if tail < head else (head, tail)
            if pair in und:
                und.remove(pair)
                direct[pair] = (tail, head)
                applied = True
        if not applied:
            break

    edges = [undirected(a, b) for a, b in und]
    edges += [bidirected(a, b) for a, b in bid]
    edges += [directed(t, h) for t, h in direct.values()]
    return MarkedGraph(g.variables, edges, g.ambiguous_triples)


def _pipeline(
    data: MixedDataset,
    cfg: SearchConfig,
    conservative: bool,
    stats: dict | None = None,
) -> MarkedGraph:
    tester = CiTester(data)
    skel, sepsets = pcs_skeleton(data, cfg, tester=tester, stats=stats)
    pattern = orient_v_structures(
        skel, sepsets, conservative, data, cfg, tester=tester, stats=stats
    )
    return meek_rules(pattern)


def pc_stable(
    data: MixedDataset, cfg: SearchConfig, stats: dict | None = None
) -> MarkedGraph:
    """PC-stable: stable skeleton, sepset colliders, Meek closure."""
    return _pipeline(data, cfg, conservative=False, stats=stats)


def cpc_stable(
    data: MixedDataset, cfg: SearchConfig, stats: dict | None = None
) -> MarkedGraph:
    """Conservative PC-stable: collider decisions from exhaustive re-tests."""
    return _pipeline(data, cfg, conservative=True, stats=stats)


def _with_mgm_start(
    data: MixedDataset,
    cfg: SearchConfig,
    mgm_cfg: MgmConfig,
    conservative: bool,
    stats: dict | None = None,
) -> MarkedGraph:
    result = mgm_learn(data, mgm_cfg)
    if stats is not None:
        stats["mgm_iterations"] = result.iterations
        stats["mgm_edges"] = result.graph.n_edges
    cfg2 = SearchConfig(
        alpha=cfg.alpha,
        max_depth=cfg.max_depth,
        conservative=conservative,
        initial_graph=result.graph,
        threads=cfg.threads,
    )
    return _pipeline(data, cfg2, conservative=conservative, stats=stats)


def mgm_pcs(
    data: MixedDataset,
    cfg: SearchConfig,
    mgm_cfg: MgmConfig,
    stats: dict | None = None,
) -> MarkedGraph:
    """PC-stable started from the undirected MGM graph."""
    return _with_mgm_start(data, cfg, mgm_cfg, conservative=False, stats=stats)


def mgm_cpcs(
    data: MixedDataset,
    cfg: SearchConfig,
    mgm_cfg: MgmConfig,
    stats: dict | None = None,
) -> MarkedGraph:
    """CPC-stable started from the undirected MGM graph."""
    return _with_mgm_start(data, cfg, mgm_cfg, conservative=True, stats=stats)
