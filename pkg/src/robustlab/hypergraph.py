"""Triangle hypergraphs: enumeration, sparsification, and the forbidden
configurations used by the coupling failure analysis.

A linear 3-cycle is three hyperedges pairwise meeting in one vertex with
the three meeting points distinct (six vertices total). The family F
consists of five linear 3-cycles through one common hyperedge whose ten
other hyperedges are pairwise distinct; F' is the three-hyperedge
pattern on five vertices {abc, cde, bde}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import FormatError, ParameterError, SearchBudgetError
from .graph import Graph
from .rng import stream

__all__ = [
    "TripleHypergraph",
    "ConfigWitness",
    "build_triangle_hypergraph",
    "triangle_degree_stats",
    "sparsify_hypergraph",
    "detect_B1",
    "find_linear_3cycles_through",
    "detect_F_config",
    "detect_F_prime",
    "count_F_configs",
    "write_triple_list",
    "parse_triple_list",
]


class TripleHypergraph:
    """3-uniform hypergraph on 0..n-1; triples lexicographically sorted,
    strictly increasing within each row."""

    __slots__ = ("n", "triples", "__dict__")

    def __init__(self, n: int, triples: np.ndarray):
        self.n = int(n)
        triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
        self.triples = triples
        self.triples.setflags(write=False)

    @property
    def t(self) -> int:
        return self.triples.shape[0]

    @cached_property
    def incidence(self) -> tuple[np.ndarray, ...]:
        lists: list[list[int]] = [[] for _ in range(self.n)]
        for i, row in enumerate(self.triples):
            for v in row:
                lists[v].append(i)
        return tuple(np.array(lst, dtype=np.int64) for lst in lists)

    @cached_property
    def degrees(self) -> np.ndarray:
        deg = np.zeros(self.n, dtype=np.int64)
        for v in range(self.n):
            deg[v] = len(self.incidence[v])
        return deg

    def triple(self, i: int) -> tuple[int, int, int]:
        a, b, c = self.triples[i]
        return int(a), int(b), int(c)

    def triple_set(self, i: int) -> frozenset[int]:
        return frozenset(self.triple(i))

    def __eq__(self, other):
        return (
            isinstance(other, TripleHypergraph)
            and self.n == other.n
            and self.triples.shape == other.triples.shape
            and bool(np.all(self.triples == other.triples))
        )

    def __repr__(self):
        return f"TripleHypergraph(n={self.n}, t={self.t})"


def hypergraph_from_triples(n: int, triples) -> TripleHypergraph:
    """Validating constructor used by tests and the text parser."""
    rows = []
    seen = set()
    for tri in triples:
        a, b, c = sorted(int(x) for x in tri)
        if not (0 <= a < b < c < n):
            raise ParameterError(f"triple {tri} not three distinct vertices in [0,{n})")
        if (a, b, c) in seen:
            raise ParameterError(f"triple {tri} repeated")
        seen.add((a, b, c))
        rows.append((a, b, c))
    arr = np.array(sorted(rows), dtype=np.int64).reshape(-1, 3)
    return TripleHypergraph(n, arr)


def build_triangle_hypergraph(G: Graph) -> TripleHypergraph:
    """All triangles of G as sorted triples; each edge (u,v) contributes
    common neighbors w > v, so every triangle appears exactly once."""
    rows = []
    adj = G.adj
    for u, v in G.edges:
        common = np.intersect1d(adj[u], adj[v], assume_unique=True)
        for w in common[common > v]:
            rows.append((int(u), int(v), int(w)))
    arr = np.array(sorted(rows), dtype=np.int64).reshape(-1, 3)
    return TripleHypergraph(G.n, arr)


def triangle_degree_stats(H: TripleHypergraph, d: float, eps: float) -> dict:
    """Hyperdegrees against the regular-host band (1 +- eps) d^3 / (2n)."""
    deg = H.degrees
    center = d**3 / (2 * H.n)
    lo, hi = (1 - eps) * center, (1 + eps) * center
    return {
        "degrees": deg,
        "min": int(deg.min()) if H.n else 0,
        "max": int(deg.max()) if H.n else 0,
        "band_center": center,
        "band": (lo, hi),
        "in_band": bool(H.n and lo <= deg.min() and deg.max() <= hi),
    }


def sparsify_hypergraph(H: TripleHypergraph, pi: float, seed: int = 0) -> TripleHypergraph:
    """Keep each triple independently with probability pi, keyed by the
    canonical triple index."""
    if not (0.0 <= pi <= 1.0):
        raise ParameterError(f"pi={pi} outside [0,1]")
    uni = stream(seed, "sparsify-hypergraph").random(H.t)
    return TripleHypergraph(H.n, H.triples[uni < pi])


# -- forbidden configurations ------------------------------------------------


@dataclass(frozen=True)
class ConfigWitness:
    kind: str  # "F" | "F_prime" | "B1"
    common: int | None = None  # hyperedge id (F)
    cycles: tuple[tuple[int, int], ...] = ()  # 5 pairs of hyperedge ids (F)
    hyperedges: tuple[int, ...] = ()  # 3 ids for F_prime
    vertex: int | None = None  # B1
    threshold: float | None = None  # B1

    def verify(self, H: TripleHypergraph) -> bool:
        """Re-check the defining conditions from scratch."""
        if self.kind == "B1":
            if self.vertex is None or self.threshold is None:
                return False
            return len(H.incidence[self.vertex]) >= self.threshold
        if self.kind == "F_prime":
            if len(self.hyperedges) != 3:
                return False
            e1, e2, e3 = (H.triple_set(i) for i in self.hyperedges)
            if len({e1, e2, e3}) != 3 or len(e1 | e2 | e3) != 5:
                return False
            # one pair shares two vertices; the remaining hyperedge meets
            # each of them in exactly one vertex
            for a, b, c in ((e1, e2, e3), (e2, e3, e1), (e1, e3, e2)):
                if len(a & b) == 2 and len(c & a) == 1 and len(c & b) == 1:
                    return True
            return False
        if self.kind == "F":
            if self.common is None or len(self.cycles) != 5:
                return False
            h = self.common
            others = [e for pair in self.cycles for e in pair]
            if len(set(others)) != 10 or h in others:
                return False
            if not all(_is_linear_3cycle(H, h, f, g) for f, g in self.cycles):
                return False
            # every cycle must anchor the same two vertices of the common
            # hyperedge (the role of u1 is private in each cycle)
            hset = H.triple_set(h)
            anchors = {
                frozenset(
                    (
                        next(iter(H.triple_set(f) & hset)),
                        next(iter(H.triple_set(g) & hset)),
                    )
                )
                for f, g in self.cycles
            }
            return len(anchors) == 1
        return False


def _is_linear_3cycle(H: TripleHypergraph, a: int, b: int, c: int) -> bool:
    A, B, C = H.triple_set(a), H.triple_set(b), H.triple_set(c)
    ab, bc, ca = A & B, B & C, C & A
    if not (len(ab) == len(bc) == len(ca) == 1):
        return False
    x, y, z = next(iter(ab)), next(iter(bc)), next(iter(ca))
    return len({x, y, z}) == 3


def find_linear_3cycles_through(H: TripleHypergraph, h: int) -> list[tuple[int, int]]:
    """Unordered pairs {f, g} forming a linear 3-cycle with hyperedge h."""
    if not (0 <= h < H.t):
        raise ParameterError(f"no hyperedge with id {h}")
    hset = H.triple_set(h)
    cands = set()
    for v in hset:
        cands.update(int(i) for i in H.incidence[v])
    cands.discard(h)
    cands = [i for i in cands if len(H.triple_set(i) & hset) == 1]
    out = []
    for idx, f in enumerate(cands):
        for g in cands[idx + 1 :]:
            if _is_linear_3cycle(H, h, f, g):
                out.append((f, g) if f < g else (g, f))
    return sorted(out)


def detect_B1(H: TripleHypergraph, threshold: float | None = None) -> ConfigWitness | None:
    """A vertex lying in at least `threshold` hyperedges (default 2 ln n)."""
    if threshold is None:
        threshold = 2 * math.log(H.n) if H.n > 1 else 0.0
    if H.t == 0:
        return None
    deg = H.degrees
    v = int(np.argmax(deg))
    if deg[v] >= threshold:
        return ConfigWitness(kind="B1", vertex=v, threshold=threshold)
    return None


def _pack_five(pairs: list[tuple[int, int]], budget: int) -> tuple[tuple, int] | None:
    """Five pairs with ten pairwise-distinct hyperedges, by DFS with a
    node budget; returns (choice, nodes) or None. Raises on budget."""
    chosen: list[tuple[int, int]] = []
    used: set[int] = set()
    nodes = 0

    def dfs(start: int) -> bool:
        nonlocal nodes
        if len(chosen) == 5:
            return True
        if len(pairs) - start < 5 - len(chosen):
            return False
        for i in range(start, len(pairs)):
            f, g = pairs[i]
            if f in used or g in used:
                continue
            nodes += 1
            if nodes > budget:
                raise SearchBudgetError("F-configuration packing budget exceeded")
            chosen.append((f, g))
            used.update((f, g))
            if dfs(i + 1):
                return True
            chosen.pop()
            used.difference_update((f, g))
        return False

    if dfs(0):
        return tuple(chosen), nodes
    return None


def detect_F_config(H: TripleHypergraph, budget: int = 1_000_000) -> ConfigWitness | None:
    """A hyperedge with five linear 3-cycles through it, all anchored at
    the same two of its vertices, whose ten other hyperedges are pairwise
    distinct (vertices may repeat otherwise)."""
    if H.t < 11:
        return None
    for h in range(H.t):
        pairs = find_linear_3cycles_through(H, h)
        if len(pairs) < 5:
            continue
        hset = H.triple_set(h)
        by_anchor: dict[frozenset[int], list[tuple[int, int]]] = {}
        for f, g in pairs:
            af = next(iter(H.triple_set(f) & hset))
            ag = next(iter(H.triple_set(g) & hset))
            by_anchor.setdefault(frozenset((af, ag)), []).append((f, g))
        for group in by_anchor.values():
            if len(group) < 5:
                continue
            packed = _pack_five(group, budget)
            if packed is not None:
                witness = ConfigWitness(kind="F", common=h, cycles=packed[0])
                assert witness.verify(H)
                return witness
    return None


def detect_F_prime(H: TripleHypergraph) -> ConfigWitness | None:
    """Three hyperedges on five vertices matching {abc, cde, bde}: scan
    hyperedge pairs sharing exactly two vertices, then complete."""
    pair_index: dict[tuple[int, int], list[int]] = {}
    for i in range(H.t):
        a, b, c = H.triple(i)
        for pr in ((a, b), (a, c), (b, c)):
            pair_index.setdefault(pr, []).append(i)
    for pr, ids in pair_index.items():
        if len(ids) < 2:
            continue
        # e2, e3 share the pair pr; their free vertices s2, s3 plus a
        # third hyperedge containing {s2, s3} and a fifth vertex
        for ii, e2 in enumerate(ids):
            s2 = next(iter(H.triple_set(e2) - set(pr)))
            for e3 in ids[ii + 1 :]:
                s3 = next(iter(H.triple_set(e3) - set(pr)))
                if s2 == s3:
                    continue
                key = (s2, s3) if s2 < s3 else (s3, s2)
                for e1 in pair_index.get(key, ()):
                    w1 = next(iter(H.triple_set(e1) - {s2, s3}))
                    if w1 not in pr:
                        witness = ConfigWitness(kind="F_prime", hyperedges=(e1, e2, e3))
                        assert witness.verify(H)
                        return witness
    return None


def count_F_configs(H: TripleHypergraph, budget: int = 5_000_000) -> int:
    """Ordered-labeled F count: tuples (oriented common hyperedge
    (v1, u1, v2), ordered 5-tuple of cycles) where each cycle is a linear
    3-cycle {f, g} through the common hyperedge with f meeting it exactly
    in v2 and g exactly in v1, and the ten non-common hyperedges are
    pairwise distinct. Oracle for tiny hypergraphs."""
    total = 0
    nodes = 0
    for h in range(H.t):
        pairs = find_linear_3cycles_through(H, h)
        if len(pairs) < 5:
            continue
        hset = H.triple_set(h)
        by_anchor: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for f, g in pairs:
            af = next(iter(H.triple_set(f) & hset))
            ag = next(iter(H.triple_set(g) & hset))
            by_anchor.setdefault((af, ag), []).append((f, g))
            by_anchor.setdefault((ag, af), []).append((g, f))
        a, b, c = H.triple(h)
        for v1, u1, v2 in (
            (a, b, c), (a, c, b), (b, a, c), (b, c, a), (c, a, b), (c, b, a),
        ):
            # cycles compatible with this orientation anchor f at v2, g at v1
            compat = by_anchor.get((v2, v1), [])
            if len(compat) < 5:
                continue
            used: set[int] = set()

            def count_tuples(depth: int) -> int:
                nonlocal nodes
                if depth == 5:
                    return 1
                sub = 0
                for f, g in compat:
                    if f in used or g in used:
                        continue
                    nodes += 1
                    if nodes > budget:
                        raise SearchBudgetError("F-count budget exceeded")
                    used.update((f, g))
                    sub += count_tuples(depth + 1)
                    used.difference_update((f, g))
                return sub

            total += count_tuples(0)
    return total


# -- triple-list text format: "n t" then one "a b c" line per triple --------


def write_triple_list(H: TripleHypergraph) -> str:
    lines = [f"{H.n} {H.t}"]
    lines.extend(f"{a} {b} {c}" for a, b, c in H.triples)
    return "\n".join(lines) + "\n"


def parse_triple_list(text: str) -> TripleHypergraph:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise FormatError("empty triple-list input")
    head = lines[0].split()
    if len(head) != 2:
        raise FormatError(f"bad header {lines[0]!r}, expected 'n t'")
    try:
        n, t = int(head[0]), int(head[1])
    except ValueError as exc:
        raise FormatError(f"non-integer header {lines[0]!r}") from exc
    if len(lines) - 1 != t:
        raise FormatError(f"header says {t} triples, found {len(lines) - 1}")
    triples = []
    for ln in lines[1:]:
        toks = ln.split()
        if len(toks) != 3:
            raise FormatError(f"bad triple line {ln!r}")
        try:
            row = tuple(int(x) for x in toks)
        except ValueError as exc:
            raise FormatError(f"non-integer triple line {ln!r}") from exc
        if not (0 <= row[0] < row[1] < row[2] < n):
            raise FormatError(f"triple line {ln!r} violates 0 <= a < b < c < n")
        triples.append(row)
    try:
        return hypergraph_from_triples(n, triples)
    except ParameterError as exc:
        raise FormatError(str(exc)) from exc
