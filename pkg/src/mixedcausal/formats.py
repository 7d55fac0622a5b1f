"""File formats: text graphs, dataset CSV, and the variable-metadata sidecar.

Graph format (UTF-8, LF endings), one item per line::

    nodes: A,B,C
    A --> B
    A --- C
    B <-> C
    amb: A,C,B

Dataset CSV: header row of variable names; continuous values as decimal
literals, categorical values as their level labels. The sidecar is JSON::

    {"n": 500,
     "variables": [{"name": "X1", "kind": "continuous"},
                   {"name": "X2", "kind": "categorical",
                    "levels": ["0", "1", "2"]}]}
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .model import Edge, Mark, MarkedGraph, MixedDataset, VariableMeta

__all__ = [
    "write_graph",
    "read_graph",
    "write_dataset",
    "read_dataset",
    "write_meta",
    "read_meta",
]

_MARKS = {m.value: m for m in Mark}


def graph_to_text(g: MarkedGraph) -> str:
    lines = ["nodes: " + ",".join(v.name for v in g.variables)]
    names = [v.name for v in g.variables]
    for e in sorted(g.edges, key=lambda e: (names[e.a], names[e.b], e.mark.value)):
        lines.append(f"{names[e.a]} {e.mark.value} {names[e.b]}")
    for x, z, y in sorted(
        g.ambiguous_triples, key=lambda t: (names[t[0]], names[t[1]], names[t[2]])
    ):
        lines.append(f"amb: {names[x]},{names[z]},{names[y]}")
    return "\n".join(lines) + "\n"


def write_graph(g: MarkedGraph, path) -> None:
    Path(path).write_text(graph_to_text(g), encoding="utf-8", newline="\n")


def graph_from_text(text: str, variables=None) -> MarkedGraph:
    """Parse the text format.

    When ``variables`` is given (metadata with kinds), node names must match
    it; otherwise nodes default to continuous metadata.
    """
    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("nodes:"):
        raise ValueError("graph text must start with a 'nodes:' header")
    names = [n.strip() for n in lines[0][len("nodes:") :].split(",") if n.strip()]
    if variables is not None:
        by_name = {v.name: v for v in variables}
        if set(names) != set(by_name):
            raise ValueError("graph nodes do not match supplied variables")
        metas = [by_name[n] for n in names]
    else:
        metas = [VariableMeta(n) for n in names]
    index = {n: i for i, n in enumerate(names)}
    edges, triples = [], []
    for ln in lines[1:]:
        if ln.startswith("amb:"):
            parts = [p.strip() for p in ln[len("amb:") :].split(",")]
            if len(parts) != 3:
                raise ValueError(f"malformed ambiguous triple: {ln!r}")
            x, z, y = (index[p] for p in parts)
            triples.append((x, z, y))
            continue
        parts = ln.split()
        if len(parts) != 3 or parts[1] not in _MARKS:
            raise ValueError(f"malformed edge line: {ln!r}")
        a, mark, b = index[parts[0]], _MARKS[parts[1]], index[parts[2]]
        edges.append(Edge(mark, a, b))
    return MarkedGraph(metas, edges, triples)


def read_graph(path, variables=None) -> MarkedGraph:
    return graph_from_text(Path(path).read_text(encoding="utf-8"), variables)


def write_dataset(data: MixedDataset, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow([v.name for v in data.variables])
        cols = []
        for v, c in zip(data.variables, data.columns):
            if v.is_continuous:
                cols.append([repr(float(x)) for x in c])
            else:
                cols.append([v.levels[int(x)] for x in c])
        for row in zip(*cols):
            writer.writerow(row)


def write_meta(data: MixedDataset, path) -> None:
    payload = {"n": data.n, "variables": []}
    for v in data.variables:
        if v.is_continuous:
            payload["variables"].append({"name": v.name, "kind": "continuous"})
        else:
            payload["variables"].append(
                {"name": v.name, "kind": "categorical", "levels": list(v.levels)}
            )
    Path(path).write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")


def read_meta(path) -> list[VariableMeta]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    metas = []
    for entry in payload["variables"]:
        if entry["kind"] == "continuous":
            metas.append(VariableMeta(entry["name"]))
        elif entry["kind"] == "categorical":
            metas.append(VariableMeta(entry["name"], tuple(entry["levels"])))
        else:
            raise ValueError(f"unknown variable kind: {entry['kind']!r}")
    return metas


def read_dataset(csv_path, meta_path=None, variables=None) -> MixedDataset:
    """Load a dataset CSV; kinds come from ``variables`` or the meta sidecar.

    Without either, every column whose values all parse as floats is treated
    as continuous and the rest become categoricals with observed labels.
    """
    with open(csv_path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ValueError("empty dataset file")
    header, body = rows[0], rows[1:]
    if variables is None and meta_path is not None:
        variables = read_meta(meta_path)
    raw = list(zip(*body)) if body else [[] for _ in header]
    if variables is not None:
        by_name = {v.name: v for v in variables}
        if set(header) != set(by_name):
            raise ValueError("CSV header does not match variable metadata")
        metas = [by_name[n] for n in header]
    else:
        metas = []
        for name, values in zip(header, raw):
            try:
                [float(v) for v in values]
                metas.append(VariableMeta(name))
            except ValueError:
                metas.append(VariableMeta(name, tuple(sorted(set(values)))))
    columns = []
    for meta, values in zip(metas, raw):
        if meta.is_continuous:
            columns.append(np.array([float(v) for v in values]))
        else:
            code = {lab: i for i, lab in enumerate(meta.levels)}
            columns.append(np.array([code[v] for v in values], dtype=np.int32))
    return MixedDataset(metas, columns)
