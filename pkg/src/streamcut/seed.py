"""In-memory seed bisection of the first streamed chunk.

Two algorithms sit behind one interface: ``bfs_grow`` grows one side by
breadth-first search from the highest-degree chunk node and then runs a few
boundary refinement passes; ``random`` splits a seeded random permutation in
half.  Both are pure functions of (chunk contents, config, capacity).
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from math import ceil

import numpy as np

from .errors import CapacityError, FormatError
from .model import EdgeChunk

ALGORITHMS = ("bfs_grow", "random")


@dataclass(frozen=True)
class SeedConfig:
    algorithm: str = "bfs_grow"
    refinement_passes: int = 2  # bfs_grow only
    rng_seed: int = 0

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise FormatError(f"unknown seed algorithm {self.algorithm!r}")
        if self.refinement_passes < 0:
            raise FormatError("refinement_passes must be >= 0")


def seed_bisect(chunk: EdgeChunk, config: SeedConfig, capacity: int) -> np.ndarray:
    """Labels every chunk node 0 or 1; returned array is aligned with chunk.nodes.

    The BFS split starts out within one node of balance; refinement passes
    may trade balance for cut quality up to ``capacity`` per side.
    """
    nodes, starts, ends, nbrs = chunk.csr()
    n = len(nodes)
    if n == 0:
        raise FormatError("cannot seed an empty chunk")
    if 2 * capacity < n:
        raise CapacityError(f"capacity {capacity} infeasible for {n} chunk nodes")
    if config.algorithm == "random":
        rng = np.random.default_rng(config.rng_seed)
        labels = np.ones(n, dtype=np.int8)
        labels[rng.permutation(n)[: ceil(n / 2)]] = 0
        return labels
    return _bfs_grow(nodes, starts, ends, nbrs, config.refinement_passes, capacity)


def _bfs_grow(nodes, starts, ends, nbrs, refinement_passes: int, capacity: int) -> np.ndarray:
    n = len(nodes)
    target = ceil(n / 2)
    # local positions: neighbor node-ids -> indices into `nodes`
    local = np.searchsorted(nodes, nbrs)
    starts = starts.tolist()
    ends = ends.tolist()
    local = local.tolist()
    degrees = [ends[i] - starts[i] for i in range(n)]

    picked = [False] * n
    count = 0
    queue: deque[int] = deque()
    while count < target:
        if not queue:
            # (re)start from the highest-degree unpicked node, lowest id on ties
            best = -1
            for i in range(n):
                if not picked[i] and (best < 0 or degrees[i] > degrees[best]):
                    best = i
            queue.append(best)
            picked[best] = True
            count += 1
            if count >= target:
                break
        v = queue.popleft()
        for w in local[starts[v] : ends[v]]:  # neighbor lists are ascending
            if not picked[w]:
                picked[w] = True
                count += 1
                queue.append(w)
                if count >= target:
                    break

    labels = [1] * n
    for i in range(n):
        if picked[i]:
            labels[i] = 0
    sizes = [target, n - target]

    for _ in range(refinement_passes):
        moved = False
        for i in range(n):
            side = labels[i]
            same = other = 0
            for w in local[starts[i] : ends[i]]:
                if labels[w] == side:
                    same += 1
                else:
                    other += 1
            if other == 0:
                continue  # not a boundary node
            # move iff it strictly reduces the chunk-local cut and the
            # receiving side has capacity
            if other > same and sizes[1 - side] < capacity:
                labels[i] = 1 - side
                sizes[side] -= 1
                sizes[1 - side] += 1
                moved = True
        if not moved:
            break

    return np.asarray(labels, dtype=np.int8)
