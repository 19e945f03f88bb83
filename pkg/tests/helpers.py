"""Shared helpers for the test suite."""

import numpy as np

from streamcut import BinaryEdgeWriter, open_edge_file


def make_edge_file(path, edges, num_nodes):
    """Writes edges to a binary edge file and opens it."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    with BinaryEdgeWriter(str(path), num_nodes) as writer:
        writer.write(edges)
    return open_edge_file(str(path))


def random_multigraph(rng, max_nodes=40, max_edges=400, self_loops=True):
    """A random directed multigraph; may contain duplicates and self-loops."""
    num_nodes = int(rng.integers(2, max_nodes + 1))
    num_edges = int(rng.integers(1, max_edges + 1))
    edges = rng.integers(0, num_nodes, size=(num_edges, 2))
    if not self_loops:
        loops = edges[:, 0] == edges[:, 1]
        edges[loops, 1] = (edges[loops, 1] + 1) % num_nodes
    return edges.astype(np.int64), num_nodes


def brute_force_cut(edges, labels):
    """Naive recount of edges whose endpoints carry different labels."""
    return sum(1 for u, v in np.asarray(edges).tolist() if labels[u] != labels[v])


def majority_align(edges, labels, num_nodes):
    """Flips nodes to their majority side until no strict improvement remains.

    The result is a labeling where every node sits with the majority of its
    neighbors, which makes the full-information expected-cut identity exact.
    """
    labels = np.asarray(labels).copy()
    changed = True
    while changed:
        changed = False
        side = np.zeros((num_nodes, 2), dtype=np.int64)
        for u, v in np.asarray(edges).tolist():
            if u == v:
                continue
            side[u, labels[v]] += 1
            side[v, labels[u]] += 1
        for n in range(num_nodes):
            if side[n, 1 - labels[n]] > side[n, labels[n]]:
                labels[n] = 1 - labels[n]
                changed = True
    return labels


def is_connected(edges, num_nodes):
    """Union-find connectivity over the undirected view of the edges."""
    parent = list(range(num_nodes))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    for u, v in np.asarray(edges).tolist():
        ra, rb = find(u), find(v)
        if ra != rb:
            parent[ra] = rb
    return len({find(n) for n in range(num_nodes)}) == 1
