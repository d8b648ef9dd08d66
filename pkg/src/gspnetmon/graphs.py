"""Two-layer network representation: per-layer graphs, interlayer couplings, signals.

Node identifiers are dense integers 0..N-1 within each layer, carrying a stable
string label. Base-layer graphs are undirected and binary; coarsened graphs may
carry positive real edge weights.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, GraphError

NODE_ROLES = ("host", "leaf-switch", "spine-switch", "monitor")

TOPOLOGY_VERSION = 1


@dataclass(eq=False)
class LayerGraph:
    """One layer: symmetric nonnegative adjacency plus node labels and roles.

    Immutable after construction; safe to share across threads.
    """

    layer_index: int
    labels: tuple[str, ...]
    adjacency: sp.csr_matrix
    roles: tuple[str, ...]

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def node_ids(self) -> range:
        return range(self.n_nodes)

    @property
    def n_edges(self) -> int:
        return int(sp.triu(self.adjacency, k=1).nnz)

    def degrees(self) -> np.ndarray:
        return np.asarray(self.adjacency.sum(axis=1)).ravel()

    def neighbors(self, v: int) -> np.ndarray:
        return self.adjacency.indices[self.adjacency.indptr[v]:self.adjacency.indptr[v + 1]]

    def edges(self) -> list[tuple[int, int, float]]:
        """Undirected edge list as (i, j, weight) with i < j, sorted."""
        coo = sp.triu(self.adjacency, k=1).tocoo()
        order = np.lexsort((coo.col, coo.row))
        return [(int(coo.row[k]), int(coo.col[k]), float(coo.data[k])) for k in order]

    def is_connected(self) -> bool:
        n = self.n_nodes
        if n <= 1:
            return True
        seen = np.zeros(n, dtype=bool)
        seen[0] = True
        queue = deque([0])
        while queue:
            v = queue.popleft()
            for w in self.neighbors(v):
                if not seen[w]:
                    seen[w] = True
                    queue.append(int(w))
        return bool(seen.all())

    def bfs_order(self) -> np.ndarray:
        """Breadth-first vertex order from vertex 0, neighbors by ascending id.

        Disconnected remainders are restarted from the lowest unvisited id so
        the order always covers every vertex.
        """
        n = self.n_nodes
        seen = np.zeros(n, dtype=bool)
        order = []
        for root in range(n):
            if seen[root]:
                continue
            seen[root] = True
            queue = deque([root])
            while queue:
                v = queue.popleft()
                order.append(v)
                for w in sorted(self.neighbors(v)):
                    if not seen[w]:
                        seen[w] = True
                        queue.append(int(w))
        return np.array(order, dtype=np.int64)


@dataclass(eq=False)
class InterlayerCoupling:
    """Binary links from nodes of one layer to nodes of another."""

    layer_a: int
    layer_b: int
    matrix: sp.csr_matrix  # shape (N_a, N_b), entries in {0, 1}

    def __post_init__(self):
        if self.layer_a == self.layer_b:
            raise GraphError("interlayer coupling must join two distinct layers")
        data = self.matrix.data
        if data.size and not np.isin(data, (0.0, 1.0)).all():
            raise GraphError("interlayer coupling entries must be 0 or 1")


@dataclass(eq=False)
class MultilayerNetwork:
    layers: tuple[LayerGraph, ...]
    couplings: tuple[InterlayerCoupling, ...]

    def layer(self, index: int) -> LayerGraph:
        for g in self.layers:
            if g.layer_index == index:
                return g
        raise GraphError(f"no layer with index {index}")


@dataclass(eq=False)
class GraphSignal:
    """One value per node of a layer for a single sampling interval."""

    layer_index: int
    values: np.ndarray
    interval_index: int = 0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 1:
            raise DimensionError("graph signal must be one-dimensional")
        if not np.isfinite(self.values).all():
            raise ValueError("graph signal contains non-finite values")

    def __len__(self) -> int:
        return self.values.shape[0]


def _validate_roles(roles):
    for r in roles:
        if r not in NODE_ROLES:
            raise GraphError(f"unknown node role {r!r}; expected one of {NODE_ROLES}")


def layer_from_adjacency(adjacency, labels, roles, layer_index=1) -> LayerGraph:
    """Wrap an existing symmetric nonnegative adjacency (weighted allowed)."""
    adj = sp.csr_matrix(adjacency, dtype=np.float64)
    n = adj.shape[0]
    if adj.shape != (n, n):
        raise GraphError("adjacency must be square")
    if len(labels) != n or len(roles) != n:
        raise GraphError("labels/roles length must match adjacency size")
    if (abs(adj - adj.T) > 1e-12 * max(1.0, abs(adj).max() if adj.nnz else 1.0)).nnz:
        raise GraphError("adjacency must be symmetric")
    if adj.diagonal().any():
        raise GraphError("adjacency diagonal must be zero")
    if adj.nnz and adj.data.min() < 0:
        raise GraphError("edge weights must be nonnegative")
    adj.eliminate_zeros()
    adj.sort_indices()
    _validate_roles(roles)
    return LayerGraph(layer_index=layer_index, labels=tuple(labels),
                      adjacency=adj, roles=tuple(roles))


def build_layer(node_ids, edge_list, roles=None, layer_index=1) -> LayerGraph:
    """Build a binary undirected layer from a node list and edge list.

    ``node_ids`` may be ints or strings; positions define the dense 0..N-1
    indexing. Edges reference entries of ``node_ids``; duplicates are merged.

    Raises:
        GraphError: on unknown endpoints or self loops.
    """
    ids = list(node_ids)
    n = len(ids)
    index = {v: i for i, v in enumerate(ids)}
    if len(index) != n:
        raise GraphError("duplicate node identifiers")
    rows, cols = [], []
    for a, b in edge_list:
        if a not in index or b not in index:
            raise GraphError(f"edge ({a!r}, {b!r}) references an unknown node")
        i, j = index[a], index[b]
        if i == j:
            raise GraphError(f"self loop on node {a!r} is not allowed")
        rows.extend((i, j))
        cols.extend((j, i))
    data = np.ones(len(rows), dtype=np.float64)
    adj = sp.csr_matrix((data, (rows, cols)), shape=(n, n))
    adj.sum_duplicates()
    adj.data[:] = 1.0  # duplicate edges collapse to weight 1

    if roles is None:
        role_seq = ("host",) * n
    elif isinstance(roles, dict):
        role_seq = tuple(roles.get(v, "host") for v in ids)
    else:
        role_seq = tuple(roles)
        if len(role_seq) != n:
            raise GraphError("roles length must match node count")
    _validate_roles(role_seq)
    return LayerGraph(layer_index=layer_index, labels=tuple(str(v) for v in ids),
                      adjacency=adj, roles=role_seq)


def build_multilayer(layers, couplings=()) -> MultilayerNetwork:
    """Assemble layers and couplings into a validated multilayer network."""
    layers = tuple(layers)
    if not layers:
        raise GraphError("a multilayer network needs at least one layer")
    indices = [g.layer_index for g in layers]
    if len(set(indices)) != len(indices):
        raise GraphError("layer indices must be distinct")
    by_index = {g.layer_index: g for g in layers}
    couplings = tuple(couplings)
    for c in couplings:
        if c.layer_a not in by_index or c.layer_b not in by_index:
            raise GraphError(f"coupling references missing layer ({c.layer_a}, {c.layer_b})")
        expect = (by_index[c.layer_a].n_nodes, by_index[c.layer_b].n_nodes)
        if c.matrix.shape != expect:
            raise GraphError(
                f"coupling ({c.layer_a}, {c.layer_b}) has shape {c.matrix.shape}, "
                f"expected {expect}")
    return MultilayerNetwork(layers=layers, couplings=couplings)


def project(m: MultilayerNetwork) -> LayerGraph:
    """Flatten a multilayer network to a single graph.

    The node set is the disjoint union of the layer node sets; the edge set is
    the union of all intra-layer edges and all interlayer links.
    """
    if len(m.layers) == 1 and not m.couplings:
        return m.layers[0]
    offsets = {}
    total = 0
    for g in m.layers:
        offsets[g.layer_index] = total
        total += g.n_nodes
    adj = sp.lil_matrix((total, total), dtype=np.float64)
    labels, roles = [], []
    for g in m.layers:
        o = offsets[g.layer_index]
        adj[o:o + g.n_nodes, o:o + g.n_nodes] = g.adjacency
        labels.extend(f"{g.layer_index}/{lab}" for lab in g.labels)
        roles.extend(g.roles)
    for c in m.couplings:
        oa, ob = offsets[c.layer_a], offsets[c.layer_b]
        na, nb = c.matrix.shape
        block = c.matrix.tolil()
        adj[oa:oa + na, ob:ob + nb] = block
        adj[ob:ob + nb, oa:oa + na] = block.T
    return layer_from_adjacency(adj.tocsr(), labels, roles,
                                layer_index=m.layers[0].layer_index)


def save_topology(g: LayerGraph, path) -> None:
    doc = {
        "version": TOPOLOGY_VERSION,
        "nodes": [{"id": i, "label": g.labels[i], "role": g.roles[i]}
                  for i in range(g.n_nodes)],
        "edges": [[i, j] for i, j, _ in g.edges()],
    }
    Path(path).write_text(json.dumps(doc, indent=1) + "\n")


def load_topology(path, layer_index=1) -> LayerGraph:
    """Load the versioned topology JSON; edge order in the file is free."""
    doc = json.loads(Path(path).read_text())
    if doc.get("version") != TOPOLOGY_VERSION:
        raise GraphError(f"unsupported topology version {doc.get('version')!r}")
    nodes = sorted(doc["nodes"], key=lambda d: d["id"])
    ids = [d["id"] for d in nodes]
    if ids != list(range(len(ids))):
        raise GraphError("topology node ids must be dense 0..N-1")
    g = build_layer(ids, [tuple(e) for e in doc["edges"]],
                    roles=[d.get("role", "host") for d in nodes],
                    layer_index=layer_index)
    return LayerGraph(layer_index=layer_index,
                      labels=tuple(d.get("label", str(d["id"])) for d in nodes),
                      adjacency=g.adjacency, roles=g.roles)
