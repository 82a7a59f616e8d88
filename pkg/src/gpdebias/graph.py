"""Undirected simple graphs and partition quality metrics for two-way partitioning."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = ["Graph", "gen_erdos_renyi", "cut_size", "imbalance", "is_balanced"]


def as_spins(s, n: int | None = None) -> np.ndarray:
    """Validate a spin assignment and return it as an int64 array.

    Spins must be -1 or +1; when ``n`` is given the length must match.
    """
    arr = np.asarray(s)
    if arr.ndim != 1:
        raise ValueError("spin assignment must be one-dimensional")
    if arr.dtype.kind not in "iuf":
        raise ValueError("spins must be numeric")
    arr = arr.astype(np.int64)
    if n is not None and arr.shape[0] != n:
        raise ValueError(f"expected {n} spins, got {arr.shape[0]}")
    if arr.size and not np.all(np.abs(arr) == 1):
        raise ValueError("spins must be -1 or +1")
    return arr


@dataclass(frozen=True)
class Graph:
    """Immutable undirected simple graph on vertices 0..n-1.

    Edges are stored canonically as sorted (i, j) pairs with i < j.
    """

    n: int
    edges: tuple[tuple[int, int], ...] = ()

    def __post_init__(self):
        if not isinstance(self.n, int) or self.n < 1:
            raise ValueError(f"vertex count must be a positive integer, got {self.n!r}")
        canon = []
        seen = set()
        for edge in self.edges:
            i, j = int(edge[0]), int(edge[1])
            if i == j:
                raise ValueError(f"self-loop on vertex {i}")
            if not (0 <= i < self.n and 0 <= j < self.n):
                raise ValueError(f"edge ({i}, {j}) out of range for n={self.n}")
            e = (i, j) if i < j else (j, i)
            if e in seen:
                raise ValueError(f"duplicate edge {e}")
            seen.add(e)
            canon.append(e)
        object.__setattr__(self, "edges", tuple(sorted(canon)))

    @property
    def num_edges(self) -> int:
        return len(self.edges)

    def edge_array(self) -> np.ndarray:
        """Edges as an (m, 2) int array; shape (0, 2) for an empty graph."""
        if not self.edges:
            return np.empty((0, 2), dtype=np.int64)
        return np.asarray(self.edges, dtype=np.int64)

    def to_json_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json_dict(cls, data: dict) -> Graph:
        return cls(int(data["n"]), tuple((int(i), int(j)) for i, j in data["edges"]))

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict()) + "\n")

    @classmethod
    def load(cls, path: str | Path) -> Graph:
        return cls.from_json_dict(json.loads(Path(path).read_text()))


def gen_erdos_renyi(n: int, p: float, seed: int) -> Graph:
    """Sample a G(n, p) random graph; (n, p, seed) fully determines the result.

    Each of the n(n-1)/2 candidate edges is included independently with
    probability p, consuming one PCG64 uniform per pair in lexicographic
    order, so graphs are reproducible bit-for-bit across runs.
    """
    if n < 1:
        raise ValueError(f"vertex count must be positive, got {n}")
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"edge probability must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    u = rng.random(n * (n - 1) // 2)
    edges = []
    k = 0
    for i in range(n - 1):
        for j in range(i + 1, n):
            if u[k] < p:
                edges.append((i, j))
            k += 1
    return Graph(n, tuple(edges))


def cut_size(g: Graph, s) -> int:
    """Number of edges whose endpoints carry opposite spins."""
    spins = as_spins(s, g.n)
    e = g.edge_array()
    if e.shape[0] == 0:
        return 0
    return int(np.count_nonzero(spins[e[:, 0]] != spins[e[:, 1]]))


def imbalance(s) -> int:
    """Absolute difference between the sizes of the two spin classes, |sum(s)|."""
    spins = as_spins(s)
    return int(abs(int(spins.sum())))


def is_balanced(s) -> bool:
    """True when the two partition sizes differ by at most one."""
    return imbalance(s) <= 1
