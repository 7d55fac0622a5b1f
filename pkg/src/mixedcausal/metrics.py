"""Evaluation against ground truth via Markov-equivalence-class patterns.

The true DAG is converted to its pattern (compelled edges directed,
reversible ones undirected); estimates are scored on adjacency recovery
over unordered pairs and on direction recovery over ordered pairs, where
bidirected estimates count as undirected. SHD follows the minimum-edit
convention in which only undirected edges are inserted or deleted.
"""

from __future__ import annotations

from dataclasses import dataclass

from .model import Mark, MarkedGraph, directed, edge_type, is_dag, undirected
from .search import meek_rules

__all__ = [
    "NotADag",
    "VariableMismatch",
    "Counts",
    "EvalReport",
    "dag_to_cpdag",
    "evaluate",
    "shd",
]

SCOPES = ("all", "cc", "cd", "dd")


class NotADag(ValueError):
    pass


class VariableMismatch(ValueError):
    pass


def dag_to_cpdag(dag: MarkedGraph) -> MarkedGraph:
    """Pattern of the DAG's Markov equivalence class.

    Unshielded colliders keep their orientation, everything else starts
    undirected, and the Meek rules compel the rest.
    """
    if not is_dag(dag):
        raise NotADag("input must be a DAG")
    adj = [dag.adjacent(i) for i in range(dag.n_vars)]
    collider_edges: set[tuple[int, int]] = set()
    for z in range(dag.n_vars):
        pars = sorted(dag.parents(z))
        for i, x in enumerate(pars):
            for y in pars[i + 1 :]:
                if y not in adj[x]:
                    collider_edges.add((x, z))
                    collider_edges.add((y, z))
    edges = []
    for e in dag.edges:
        if (e.a, e.b) in collider_edges:
            edges.append(directed(e.a, e.b))
        else:
            edges.append(undirected(e.a, e.b))
    return meek_rules(MarkedGraph(dag.variables, edges))


@dataclass(frozen=True)
class Counts:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    @property
    def precision(self) -> float | None:
        d = self.tp + self.fp
        return self.tp / d if d else None

    @property
    def recall(self) -> float | None:
        d = self.tp + self.fn
        return self.tp / d if d else None

    @property
    def mcc(self) -> float:
        a = (self.tp + self.fp) * (self.tp + self.fn)
        b = (self.tn + self.fp) * (self.tn + self.fn)
        if a == 0 or b == 0:
            return 0.0
        num = self.tp * self.tn - self.fp * self.fn
        return num / (a * b) ** 0.5


@dataclass
class EvalReport:
    """Adjacency and direction confusion counts plus SHD, per scope."""

    adjacency: dict[str, Counts]
    direction: dict[str, Counts]
    shd: dict[str, int]

    def rows(self):
        """Flat (scope, metric, value, tp, fp, fn, tn) rows for CSV output."""
        out = []
        for scope in SCOPES:
            for view, counts in (
                ("adjacency", self.adjacency[scope]),
                ("direction", self.direction[scope]),
            ):
                for metric, value in (
                    ("precision", counts.precision),
                    ("recall", counts.recall),
                    ("mcc", counts.mcc),
                ):
                    out.append(
                        (
                            scope,
                            f"{view}_{metric}",
                            value,
                            counts.tp,
                            counts.fp,
                            counts.fn,
                            counts.tn,
                        )
                    )
            out.append((scope, "shd", self.shd[scope], "", "", "", ""))
        return out


def _match_variables(est: MarkedGraph, truth: MarkedGraph) -> list[int]:
    """est index -> truth index mapping by name."""
    truth_by_name = {v.name: i for i, v in enumerate(truth.variables)}
    if {v.name for v in est.variables} != set(truth_by_name):
        raise VariableMismatch("graphs are over different variable sets")
    return [truth_by_name[v.name] for v in est.variables]


def _pair_states(g: MarkedGraph, to_truth: list[int] | None = None):
    """Per unordered truth-index pair: None, 'und', or (tail, head)."""
    states: dict[tuple[int, int], object] = {}
    for e in g.edges:
        a = to_truth[e.a] if to_truth else e.a
        b = to_truth[e.b] if to_truth else e.b
        key = (a, b) if a < b else (b, a)
        if e.mark is Mark.DIRECTED:
            states[key] = (a, b)
        else:
            # Bidirected edges carry no usable direction.
            states[key] = "und"
    return states


def _pair_cost(est_state, truth_state) -> int:
    if est_state is None and truth_state is None:
        return 0
    if est_state is None or truth_state is None:
        present = truth_state if est_state is None else est_state
        return 1 if present == "und" else 2
    return 0 if est_state == truth_state else 1


def shd(est: MarkedGraph, truth_pattern: MarkedGraph) -> int:
    """Structural Hamming distance between two patterns.

    Per pair: presence mismatch costs 1 if the present edge is undirected
    and 2 if directed (direction change plus insert/delete); mark
    mismatches on a shared adjacency cost 1. Bidirected edges are treated
    as undirected.
    """
    to_truth = _match_variables(est, truth_pattern)
    est_states = _pair_states(est, to_truth)
    truth_states = _pair_states(truth_pattern)
    total = 0
    for key in est_states.keys() | truth_states.keys():
        total += _pair_cost(est_states.get(key), truth_states.get(key))
    return total


def evaluate(est: MarkedGraph, truth_dag: MarkedGraph) -> EvalReport:
    """Score an estimate against the pattern of the true DAG."""
    to_truth = _match_variables(est, truth_dag)
    pattern = dag_to_cpdag(truth_dag)
    est_states = _pair_states(est, to_truth)
    truth_states = _pair_states(pattern)
    metas = truth_dag.variables
    p = len(metas)

    adj = {s: [0, 0, 0, 0] for s in SCOPES}  # tp, fp, fn, tn
    dirs = {s: [0, 0, 0, 0] for s in SCOPES}
    shd_acc = {s: 0 for s in SCOPES}
    for a in range(p):
        for b in range(a + 1, p):
            key = (a, b)
            scope = edge_type(metas[a], metas[b])
            e, t = est_states.get(key), truth_states.get(key)
            for s in ("all", scope):
                slot = adj[s]
                if e is not None and t is not None:
                    slot[0] += 1
                elif e is not None:
                    slot[1] += 1
                elif t is not None:
                    slot[2] += 1
                else:
                    slot[3] += 1
                shd_acc[s] += _pair_cost(e, t)
                # Direction view scores both orderings of the pair.
                for od in (key, key[::-1]):
                    ep = isinstance(e, tuple) and e == od
                    tp_ = isinstance(t, tuple) and t == od
                    dslot = dirs[s]
                    if ep and tp_:
                        dslot[0] += 1
                    elif ep:
                        dslot[1] += 1
                    elif tp_:
                        dslot[2] += 1
                    else:
                        dslot[3] += 1

    return EvalReport(
        adjacency={s: Counts(*adj[s]) for s in SCOPES},
        direction={s: Counts(*dirs[s]) for s in SCOPES},
        shd=dict(shd_acc),
    )
