"""Immutable simple-graph core: canonical edge lists, set/edge-count
primitives, and the edge-list text format.

Edge counts follow the ordered-pair convention: e(S, T) counts pairs
(u, v) in S x T with uv an edge, so edges inside S cap T contribute
twice. `internal_edge_count` gives the unordered count.
"""

from __future__ import annotations

from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DuplicateEdgeError,
    FormatError,
    SelfLoopError,
    VertexRangeError,
)

__all__ = [
    "Graph",
    "build_graph",
    "vertex_set",
    "set_mask",
    "directed_pair_count",
    "internal_edge_count",
    "write_edge_list",
    "parse_edge_list",
]


class Graph:
    """Undirected simple graph on vertices 0..n-1, immutable after build.

    `edges` is the canonical lexicographically sorted (m, 2) array with
    u < v per row; the row index is the canonical edge id used to key
    per-edge randomness. `parts`, when present, records a bipartition.
    """

    __slots__ = ("n", "edges", "parts", "__dict__")

    def __init__(self, n: int, edges: np.ndarray, parts=None):
        self.n = int(n)
        edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
        self.edges = edges
        self.edges.setflags(write=False)
        self.parts = parts

    @property
    def m(self) -> int:
        return self.edges.shape[0]

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        if self.m:
            np.add.at(deg, self.edges[:, 0], 1)
            np.add.at(deg, self.edges[:, 1], 1)
        deg.setflags(write=False)
        return deg

    @cached_property
    def adj(self) -> tuple[np.ndarray, ...]:
        """Sorted neighbor array per vertex."""
        nbrs: list[list[int]] = [[] for _ in range(self.n)]
        for u, v in self.edges:
            nbrs[u].append(v)
            nbrs[v].append(u)
        out = []
        for lst in nbrs:
            a = np.array(sorted(lst), dtype=np.int64)
            a.setflags(write=False)
            out.append(a)
        return tuple(out)

    @cached_property
    def adj_bits(self) -> tuple[int, ...]:
        """Neighborhood bitmasks (bit v set on row u iff uv is an edge)."""
        bits = [0] * self.n
        for u, v in self.edges:
            bits[u] |= 1 << int(v)
            bits[v] |= 1 << int(u)
        return tuple(bits)

    @cached_property
    def edge_index(self) -> dict[tuple[int, int], int]:
        return {(int(u), int(v)): i for i, (u, v) in enumerate(self.edges)}

    def has_edge(self, u: int, v: int) -> bool:
        return bool((self.adj_bits[u] >> v) & 1)

    def neighbors(self, v: int) -> np.ndarray:
        return self.adj[v]

    def induced(self, verts: Sequence[int]) -> tuple["Graph", np.ndarray]:
        """Induced subgraph plus the original-label array (position i of
        the result is vertex `labels[i]` of self)."""
        labels = np.asarray(vertex_set(self.n, verts), dtype=np.int64)
        pos = -np.ones(self.n, dtype=np.int64)
        pos[labels] = np.arange(len(labels))
        if self.m:
            keep = (pos[self.edges[:, 0]] >= 0) & (pos[self.edges[:, 1]] >= 0)
            sub = pos[self.edges[keep]]
            sub.sort(axis=1)
            order = np.lexsort((sub[:, 1], sub[:, 0]))
            sub = sub[order]
        else:
            sub = np.empty((0, 2), dtype=np.int64)
        return Graph(len(labels), sub), labels

    def __eq__(self, other):
        return (
            isinstance(other, Graph)
            and self.n == other.n
            and self.edges.shape == other.edges.shape
            and bool(np.all(self.edges == other.edges))
        )

    def __hash__(self):
        return hash((self.n, self.edges.tobytes()))

    def __repr__(self):
        return f"Graph(n={self.n}, m={self.m})"


def build_graph(n: int, edges: Iterable[tuple[int, int]]) -> Graph:
    """Validating constructor; raises distinct errors for out-of-range
    endpoints, self-loops, and duplicate edges (in either orientation)."""
    n = int(n)
    if n < 0:
        raise VertexRangeError(f"negative vertex count {n}")
    canon: list[tuple[int, int]] = []
    seen: set[tuple[int, int]] = set()
    for pair in edges:
        u, v = int(pair[0]), int(pair[1])
        if not (0 <= u < n and 0 <= v < n):
            raise VertexRangeError(f"edge ({u},{v}) outside [0,{n})")
        if u == v:
            raise SelfLoopError(f"self-loop at vertex {u}")
        if u > v:
            u, v = v, u
        if (u, v) in seen:
            raise DuplicateEdgeError(f"edge ({u},{v}) repeated")
        seen.add((u, v))
        canon.append((u, v))
    arr = np.array(sorted(canon), dtype=np.int64).reshape(-1, 2)
    return Graph(n, arr)


def from_edge_array(n: int, edges: np.ndarray, parts=None) -> Graph:
    """Fast path for generator internals: `edges` must already be simple;
    rows are canonicalized and sorted here."""
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    if edges.size:
        edges = np.sort(edges, axis=1)
        order = np.lexsort((edges[:, 1], edges[:, 0]))
        edges = edges[order]
    return Graph(n, edges, parts=parts)


def vertex_set(n: int, verts: Iterable[int]) -> tuple[int, ...]:
    """Canonical strictly-increasing vertex tuple, validated against n."""
    vs = sorted({int(v) for v in verts})
    if vs and not (0 <= vs[0] and vs[-1] < n):
        raise VertexRangeError(f"vertex set not inside [0,{n})")
    return tuple(vs)


def set_mask(verts: Iterable[int]) -> int:
    mask = 0
    for v in verts:
        mask |= 1 << int(v)
    return mask


def directed_pair_count(G: Graph, S: Iterable[int], T: Iterable[int]) -> int:
    """e(S,T) = #{(u,v) in S x T : uv in E}; edges in S cap T count twice."""
    S = vertex_set(G.n, S)
    T = vertex_set(G.n, T)
    if len(S) > len(T):
        S, T = T, S
    mask_t = set_mask(T)
    bits = G.adj_bits
    return sum((bits[u] & mask_t).bit_count() for u in S)


def internal_edge_count(G: Graph, S: Iterable[int]) -> int:
    """Unordered edges with both endpoints in S."""
    return directed_pair_count(G, S, S) // 2


# -- edge-list text format: "n m" header then one "u v" line per edge ------


def write_edge_list(G: Graph) -> str:
    lines = [f"{G.n} {G.m}"]
    lines.extend(f"{u} {v}" for u, v in G.edges)
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty edge-list input")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError(f"bad header {lines[0]!r}, expected 'n m'")
    try:
        n, m = int(head[0]), int(head[1])
    except ValueError as exc:
        raise FormatError(f"non-integer header {lines[0]!r}") from exc
    if len(lines) - 1 != m:
        raise FormatError(f"header says {m} edges, found {len(lines) - 1}")
    edges = []
    for ln in lines[1:]:
        toks = ln.split()
        if len(toks) != 2:
            raise FormatError(f"bad edge line {ln!r}")
        try:
            u, v = int(toks[0]), int(toks[1])
        except ValueError as exc:
            raise FormatError(f"non-integer edge line {ln!r}") from exc
        if not (0 <= u < v < n):
            raise FormatError(f"edge line {ln!r} violates 0 <= u < v < n")
        edges.append((u, v))
    return build_graph(n, edges)
