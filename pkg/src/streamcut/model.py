"""Core value types: graph metadata, edge chunks, bisection state, reports."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import FormatError


@dataclass(frozen=True)
class GraphMeta:
    """Size and id-width metadata for an edge list."""

    num_nodes: int
    num_edges: int
    node_id_width: int = 32  # bits per node id, 32 or 64

    def __post_init__(self):
        if self.num_nodes < 1:
            raise FormatError(f"num_nodes must be >= 1, got {self.num_nodes}")
        if self.num_edges < 0:
            raise FormatError(f"num_edges must be >= 0, got {self.num_edges}")
        if self.node_id_width not in (32, 64):
            raise FormatError(f"node_id_width must be 32 or 64, got {self.node_id_width}")
        if self.node_id_width == 32 and self.num_nodes > 2**32:
            raise FormatError("num_nodes does not fit in 32-bit node ids")


def width_for(num_nodes: int) -> int:
    """Smallest supported id width that can address ``num_nodes`` dense ids."""
    return 32 if num_nodes <= 2**32 else 64


class EdgeChunk:
    """A contiguous in-memory slice of the edge list with a chunk-local adjacency index.

    ``nodes`` holds the sorted unique endpoints of the chunk's edges.  The
    adjacency index is symmetric over the chunk (for an edge (u, v) both
    directions are indexed), counts duplicate edges with multiplicity, and
    excludes self-loops.  Neighbor lists are sorted ascending so traversals
    over them are deterministic.
    """

    __slots__ = ("chunk_index", "edges", "nodes", "_starts", "_ends", "_nbrs")

    def __init__(self, chunk_index: int, edges: np.ndarray):
        edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
        self.chunk_index = int(chunk_index)
        self.edges = edges
        src, dst = edges[:, 0], edges[:, 1]
        mask = src != dst
        keys = np.concatenate([src[mask], dst[mask]])
        vals = np.concatenate([dst[mask], src[mask]])
        order = np.lexsort((vals, keys))
        skeys = keys[order]
        self._nbrs = vals[order]
        self.nodes = np.unique(edges) if edges.size else np.empty(0, dtype=np.int64)
        self._starts = np.searchsorted(skeys, self.nodes, side="left")
        self._ends = np.searchsorted(skeys, self.nodes, side="right")

    @property
    def num_edges(self) -> int:
        return self.edges.shape[0]

    def neighbors(self, node: int) -> np.ndarray:
        """Chunk-local neighbors of ``node`` (empty if absent from the chunk)."""
        i = int(np.searchsorted(self.nodes, node))
        if i >= len(self.nodes) or self.nodes[i] != node:
            return np.empty(0, dtype=np.int64)
        return self._nbrs[self._starts[i] : self._ends[i]]

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Raw (nodes, starts, ends, neighbors) arrays of the adjacency index."""
        return self.nodes, self._starts, self._ends, self._nbrs


class PartitionState:
    """Mutable state of one streaming bisection.

    parts[n] is -1 (unassigned), 0 or 1.  ``sizes`` tracks the node count of
    each partition and must match a recount of ``parts`` at every observable
    point.  ``nbr0``/``nbr1`` hold the running per-node estimates of the number
    of neighbors in each partition; they stay (0, 0) for nodes never seen in a
    processed chunk.  ``capacity`` is the maximum node count per partition.
    """

    __slots__ = ("parts", "sizes", "nbr0", "nbr1", "capacity")

    def __init__(self, num_nodes: int, capacity: int):
        if num_nodes < 1:
            raise FormatError("PartitionState needs num_nodes >= 1")
        self.parts: list[int] = [-1] * num_nodes
        self.sizes: list[int] = [0, 0]
        self.nbr0: list[float] = [0.0] * num_nodes
        self.nbr1: list[float] = [0.0] * num_nodes
        self.capacity = int(capacity)

    @property
    def num_nodes(self) -> int:
        return len(self.parts)

    def nbr_counts(self, node: int) -> tuple[float, float]:
        return self.nbr0[node], self.nbr1[node]

    def recount_sizes(self) -> list[int]:
        """Sizes recomputed from scratch out of ``parts``."""
        return [self.parts.count(0), self.parts.count(1)]

    def labels_array(self) -> np.ndarray:
        return np.asarray(self.parts, dtype=np.int32)


@dataclass(frozen=True)
class CutReport:
    """Measured edge-cut quality of a labeling."""

    total_edges: int
    cut_edges: int
    cut_fraction: float
    partition_sizes: tuple[int, ...]
    balance_ratio: float  # max partition size / ceil(num_nodes / p)

    def to_dict(self) -> dict:
        return {
            "total_edges": self.total_edges,
            "cut_edges": self.cut_edges,
            "cut_fraction": self.cut_fraction,
            "partition_sizes": list(self.partition_sizes),
            "balance_ratio": self.balance_ratio,
        }


class NodeStats:
    """Per-node degree ``k`` and majority-side degree ``k0``.

    ``k0[n]`` is the larger of the two per-side neighbor counts of node n
    relative to a reference bisection, so k0 >= k - k0 always holds.
    """

    __slots__ = ("k", "k0")

    def __init__(self, k: np.ndarray, k0: np.ndarray):
        k = np.asarray(k, dtype=np.int64)
        k0 = np.asarray(k0, dtype=np.int64)
        if k.shape != k0.shape:
            raise FormatError("k and k0 must have the same shape")
        if np.any(k0 < 0) or np.any(k0 > k) or np.any(2 * k0 < k):
            raise FormatError("need 0 <= k - k0 <= k0 <= k for every node")
        self.k = k
        self.k0 = k0

    def __len__(self) -> int:
        return len(self.k)

    @property
    def total_endpoints(self) -> int:
        """Sum of degrees; equals twice the number of indexed edges."""
        return int(self.k.sum())
