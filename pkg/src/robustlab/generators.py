"""Pseudorandom host families and the Bernoulli edge sparsification G_p.

Per-edge randomness is keyed by (seed, canonical edge id), never by
iteration order, so sparsifications at p' < p with the same seed are
nested and threshold sweeps can reuse one uniform per edge.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ParameterError, RetryBudgetError
from .graph import Graph, from_edge_array
from .rng import stream

__all__ = [
    "SparsifyParams",
    "gen_random_regular",
    "gen_paley",
    "gen_gnp",
    "gen_bipartite_biregular",
    "sparsify",
    "edge_uniforms",
    "sparsify_with_uniforms",
]

CONFIG_MODEL_RETRIES = 1000


@dataclass(frozen=True)
class SparsifyParams:
    p: float
    seed: int = 0

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ParameterError(f"p={self.p} outside [0,1]")


def gen_random_regular(n: int, d: int, seed: int = 0) -> Graph:
    """d-regular graph by the pairing model: shuffle the stub multiset,
    pair consecutive stubs, keep the loop-free non-repeated pairs, and
    re-pair the leftover stubs; a stalled round rejects the whole draw."""
    if n * d % 2 != 0:
        raise ParameterError(f"n*d = {n * d} is odd, no {d}-regular graph on {n} vertices")
    if d >= n:
        raise ParameterError(f"d={d} must be < n={n}")
    rng = stream(seed, "gen/regular")
    all_stubs = np.repeat(np.arange(n, dtype=np.int64), d)
    for _ in range(CONFIG_MODEL_RETRIES):
        stubs = all_stubs.copy()
        seen: set[int] = set()
        edges = []
        stalled = False
        while len(stubs):
            perm = rng.permutation(stubs)
            pairs = perm.reshape(-1, 2)
            leftover = []
            progress = False
            for u, v in pairs:
                u, v = int(u), int(v)
                if u > v:
                    u, v = v, u
                key = u * n + v
                if u == v or key in seen:
                    leftover.extend((u, v))
                    continue
                seen.add(key)
                edges.append((u, v))
                progress = True
            if not progress:
                stalled = True
                break
            stubs = np.array(leftover, dtype=np.int64)
        if not stalled:
            return from_edge_array(n, np.array(edges, dtype=np.int64).reshape(-1, 2))
    raise RetryBudgetError(
        f"pairing model: no simple graph in {CONFIG_MODEL_RETRIES} attempts (n={n}, d={d})"
    )


def _is_prime(q: int) -> bool:
    if q < 2:
        return False
    if q % 2 == 0:
        return q == 2
    f = 3
    while f * f <= q:
        if q % f == 0:
            return False
        f += 2
    return True


def gen_paley(q: int) -> Graph:
    """Paley graph: vertices 0..q-1, edge uv iff u-v is a nonzero square mod q."""
    if not _is_prime(q) or q % 4 != 1:
        raise ParameterError(f"q={q} must be a prime congruent to 1 mod 4")
    residues = np.zeros(q, dtype=bool)
    residues[(np.arange(1, q, dtype=np.int64) ** 2) % q] = True
    u, v = np.triu_indices(q, k=1)
    diff = (v - u) % q
    keep = residues[diff]
    return from_edge_array(q, np.column_stack([u[keep], v[keep]]))


def gen_gnp(n: int, p: float, seed: int = 0) -> Graph:
    """Binomial random graph, one uniform per unordered pair."""
    if not (0.0 <= p <= 1.0):
        raise ParameterError(f"p={p} outside [0,1]")
    u, v = np.triu_indices(n, k=1)
    uni = stream(seed, "gen/gnp").random(len(u))
    keep = uni < p
    return from_edge_array(n, np.column_stack([u[keep], v[keep]]))


def gen_bipartite_biregular(n: int, d: int, seed: int = 0) -> Graph:
    """d-regular balanced bipartite graph: union of d random perfect
    matchings between parts {0..n-1} and {n..2n-1}, rejected on repeats."""
    if d > n:
        raise ParameterError(f"d={d} exceeds part size n={n}")
    rng = stream(seed, "gen/bipartite")
    left = np.arange(n, dtype=np.int64)
    for _ in range(CONFIG_MODEL_RETRIES):
        cols = np.concatenate([rng.permutation(n) for _ in range(d)])
        rows = np.tile(left, d)
        keys = rows * n + cols
        if len(np.unique(keys)) != len(keys):
            continue
        edges = np.column_stack([rows, cols + n])
        parts = (left.copy(), np.arange(n, 2 * n, dtype=np.int64))
        return from_edge_array(2 * n, edges, parts=parts)
    raise RetryBudgetError(
        f"bipartite model: no simple graph in {CONFIG_MODEL_RETRIES} attempts (n={n}, d={d})"
    )


def edge_uniforms(G: Graph, seed: int) -> np.ndarray:
    """One uniform per canonical edge id of G."""
    return stream(seed, "sparsify").random(G.m)


def sparsify_with_uniforms(G: Graph, p: float, uniforms: np.ndarray) -> Graph:
    """Keep edge i iff uniforms[i] < p; shares a monotone coupling across p."""
    keep = uniforms < p
    return Graph(G.n, G.edges[keep], parts=G.parts)


def sparsify(G: Graph, params: SparsifyParams) -> Graph:
    """G_p: keep each edge independently with probability params.p."""
    return sparsify_with_uniforms(G, params.p, edge_uniforms(G, params.seed))
