"""Sequential thinning coupling between triangles of G_p and hyperedges
of the pi-sparsified triangle hypergraph.

Triangles are processed in lexicographic order. At step j the algorithm
computes pi_j, the conditional probability that triangle j has all three
edges in G_p and its indicator on, given everything revealed so far
(revealed set R, refuted index set X). If pi_j >= pi = a p^3, a coin with
head probability pi/pi_j decides whether to test the event; a confirmed
test reveals the triangle's elements. If pi_j < pi, a coin with head
probability pi decides membership outright and a head marks the coupling
failed. Either way each hyperedge lands in H' with probability exactly
pi given the history, so H' has the law of the pi-sparsified hypergraph
whenever pi_j is computed exactly.

Conditional probabilities factor over connected components of the
dependency graph on refuted constraints (two constraints interact only
through shared undetermined edges). Within the element cap the component
is solved exactly, either by enumerating edge assignments with the
indicator variables summed out analytically, or by inclusion-exclusion
over constraint subsets, whichever is cheaper; beyond the cap the engine
falls back per params to a Monte Carlo estimate or to the proved lower
bound p^{|E_j \\ R|} (c - c^2 S).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from .errors import CapExceededError, ParameterError
from .graph import Graph
from .hypergraph import build_triangle_hypergraph
from .rng import stream

__all__ = [
    "CouplingParams",
    "CouplingState",
    "StepRecord",
    "CouplingTranscript",
    "TriangleSystem",
    "CouplingEngine",
    "conditional_prob",
    "run_coupling",
    "run_trials",
    "verify_coupling_embedding",
    "coupling_marginal_stats",
]

EXACT_ELEMENT_CAP = 25


@dataclass(frozen=True)
class CouplingParams:
    p: float
    a: float = 2.0**-11
    c: float = 2.0**-9
    seed: int = 0
    mode: str = "bound"  # fallback past the cap: "exact" | "montecarlo" | "bound"
    mc_samples: int = 20_000
    element_cap: int = EXACT_ELEMENT_CAP

    def __post_init__(self):
        if not (0.0 <= self.p <= 1.0):
            raise ParameterError(f"p={self.p} outside [0,1]")
        if not self.a < 2.0**-10:
            raise ParameterError(f"a={self.a} must be < 2^-10")
        if not (0.0 < self.c < 1.0):
            raise ParameterError("c must lie in (0,1)")
        if not self.c * (1 - 2**8 * self.c) > self.a:
            raise ParameterError(f"constraint c(1-2^8 c) > a fails for c={self.c}, a={self.a}")
        if self.mode not in ("exact", "montecarlo", "bound"):
            raise ParameterError(f"unknown mode {self.mode!r}")

    @property
    def pi(self) -> float:
        return self.a * self.p**3


class TriangleSystem:
    """Per-host precomputation shared by every trial: triangles in lex
    order, their canonical edge-id triples, and per-edge triangle lists."""

    def __init__(self, G: Graph):
        self.G = G
        self.H = build_triangle_hypergraph(G)
        self.m = self.H.t
        eidx = G.edge_index
        tri_edges = np.empty((self.m, 3), dtype=np.int64)
        for i, (a, b, c) in enumerate(self.H.triples):
            tri_edges[i, 0] = eidx[(int(a), int(b))]
            tri_edges[i, 1] = eidx[(int(a), int(c))]
            tri_edges[i, 2] = eidx[(int(b), int(c))]
        self.tri_edges = tri_edges
        at_edge: list[list[int]] = [[] for _ in range(G.m)]
        for i in range(self.m):
            for e in tri_edges[i]:
                at_edge[e].append(i)
        self.tris_at_edge = tuple(tuple(lst) for lst in at_edge)
        self.tri_edge_tuples = tuple(tuple(int(e) for e in tri_edges[i]) for i in range(self.m))
        self.tri_edge_masks = tuple(
            (1 << t[0]) | (1 << t[1]) | (1 << t[2]) for t in self.tri_edge_tuples
        )
        # triangles sharing an edge with triangle i (static dependency graph)
        nbrs: list[set[int]] = [set() for _ in range(self.m)]
        for e in range(G.m):
            for a in at_edge[e]:
                for b in at_edge[e]:
                    if a != b:
                        nbrs[a].add(b)
        self.tri_neighbors = tuple(tuple(sorted(s)) for s in nbrs)


@dataclass(frozen=True)
class CouplingState:
    """Knowledge state: edge elements revealed present (r_edges),
    indicators revealed present (r_indicators, from confirmed events),
    and indices whose events were tested and refuted (X)."""

    system: TriangleSystem
    params: CouplingParams
    r_edges: frozenset[int]
    refuted: frozenset[int]
    r_indicators: frozenset[int] = frozenset()

    def element_states(self) -> dict:
        """present / absent / undetermined per edge and indicator. An
        indicator is determined absent exactly when its refuted constraint
        collapsed onto it (all of the triangle's edges already in R)."""
        sys_ = self.system
        edges = {
            e: ("present" if e in self.r_edges else "undetermined") for e in range(sys_.G.m)
        }
        inds = {}
        for i in range(sys_.m):
            if i in self.r_indicators:
                inds[i] = "present"
            elif i in self.refuted and all(e in self.r_edges for e in sys_.tri_edge_tuples[i]):
                inds[i] = "absent"
            else:
                inds[i] = "undetermined"
        return {"edges": edges, "indicators": inds}


class CouplingEngine:
    """Conditional-probability evaluator with a structural memo cache."""

    def __init__(self, system: TriangleSystem, params: CouplingParams):
        self.sys = system
        self.params = params
        self.p = params.p
        self.c = params.c
        m_max = 3 * system.m + 4
        self.p_pow = np.array([params.p**i for i in range(m_max)])
        self.c_pow = np.array([params.c**i for i in range(system.m + 2)])
        self.cache: dict = {}
        self.cache_cap = 1_000_000
        self.fallback_uses = 0
        self.exact_uses = 0

    # -- component extraction ------------------------------------------------

    def _component(self, j: int, x_mask: int, r_mask: int, cap: int | None = None):
        """Undetermined target edges plus the constraints transitively
        connected to them through shared undetermined edges. With `cap`
        set, bail out as soon as the element count (edges + indicators +
        the target's indicator) must exceed it; the caller then falls
        back without paying for the full closure."""
        sys_ = self.sys
        if r_mask == 0:
            # fast path over the static triangle dependency graph
            target = sys_.tri_edge_tuples[j]
            if not x_mask:
                return list(target), [], [], False
            edge_mask = sys_.tri_edge_masks[j]
            seen_c_mask = 0
            cons_ids: list[int] = []
            stack = [j]
            while stack:
                a = stack.pop()
                for i in sys_.tri_neighbors[a]:
                    if (seen_c_mask >> i) & 1 or not (x_mask >> i) & 1 or i == j:
                        continue
                    seen_c_mask |= 1 << i
                    cons_ids.append(i)
                    edge_mask |= sys_.tri_edge_masks[i]
                    stack.append(i)
                    if cap is not None and edge_mask.bit_count() + len(cons_ids) + 1 > cap:
                        return list(target), cons_ids, [], True
            cons_ids.sort()
            return list(target), cons_ids, [sys_.tri_edge_tuples[i] for i in cons_ids], False

        target = [e for e in sys_.tri_edge_tuples[j] if not (r_mask >> e) & 1]
        if not target or not x_mask:
            return target, [], [], False
        seen_e_mask = 0
        for e in target:
            seen_e_mask |= 1 << e
        seen_c_mask = 0
        n_edges = len(target)
        n_cons = 0
        cons_ids = []
        stack = list(target)
        while stack:
            e = stack.pop()
            for i in sys_.tris_at_edge[e]:
                if i == j or (seen_c_mask >> i) & 1 or not (x_mask >> i) & 1:
                    continue
                seen_c_mask |= 1 << i
                cons_ids.append(i)
                n_cons += 1
                for e2 in sys_.tri_edge_tuples[i]:
                    if (r_mask >> e2) & 1 or (seen_e_mask >> e2) & 1:
                        continue
                    seen_e_mask |= 1 << e2
                    n_edges += 1
                    stack.append(e2)
                if cap is not None and n_edges + n_cons + 1 > cap:
                    return target, cons_ids, [], True
        cons_ids.sort()
        cons_edges = [
            tuple(e for e in self.sys.tri_edge_tuples[i] if not (r_mask >> e) & 1)
            for i in cons_ids
        ]
        return target, cons_ids, cons_edges, False

    # -- exact methods ---------------------------------------------------------

    def _exact_sigma(self, target, cons_edges) -> float:
        """Enumerate edge assignments; indicators integrate to factors
        (1 - c [edges present]) per constraint and c for the target."""
        p, c = self.p, self.c
        universe = sorted(set(target).union(*cons_edges) if cons_edges else set(target))
        pos = {e: b for b, e in enumerate(universe)}
        k = len(universe)
        ids = np.arange(1 << k, dtype=np.int64)
        pop = np.zeros(1 << k, dtype=np.int64)
        for b in range(k):
            pop += (ids >> b) & 1
        w = p**pop * (1 - p) ** (k - pop)
        prod = np.ones(1 << k)
        for edges in cons_edges:
            mask = 0
            for e in edges:
                mask |= 1 << pos[e]
            prod *= np.where((ids & mask) == mask, 1.0 - c, 1.0)
        jmask = 0
        for e in target:
            jmask |= 1 << pos[e]
        hit = (ids & jmask) == jmask
        denom = float(w @ prod)
        numer = c * float((w * prod) @ hit)
        return numer / denom

    def _exact_inclusion_exclusion(self, target, cons_edges) -> float:
        """Sum over subsets T of constraints of (-1)^|T| c^|T| p^|union(T)|,
        enumerated in Gray-code order with incremental edge-coverage
        counters, so each subset costs O(3) updates."""
        universe = sorted(set(target).union(*cons_edges) if cons_edges else set(target))
        pos = {e: b for b, e in enumerate(universe)}
        kt = len(cons_edges)
        cons_pos = [[pos[e] for e in edges] for edges in cons_edges]
        in_target = [False] * len(universe)
        for e in target:
            in_target[pos[e]] = True
        count = [0] * len(universe)
        covered = 0
        covered_or_target = len(target)
        p_pow = self.p_pow
        c_pow = self.c_pow
        den = 1.0
        num = p_pow[len(target)]
        member = [False] * kt
        size = 0
        for g in range(1, 1 << kt):
            bit = (g & -g).bit_length() - 1
            if member[bit]:
                member[bit] = False
                size -= 1
                for k in cons_pos[bit]:
                    count[k] -= 1
                    if count[k] == 0:
                        covered -= 1
                        if not in_target[k]:
                            covered_or_target -= 1
            else:
                member[bit] = True
                size += 1
                for k in cons_pos[bit]:
                    if count[k] == 0:
                        covered += 1
                        if not in_target[k]:
                            covered_or_target += 1
                    count[k] += 1
            term = c_pow[size] if size % 2 == 0 else -c_pow[size]
            den += term * p_pow[covered]
            num += term * p_pow[covered_or_target]
        return self.c * num / den

    # -- fallbacks --------------------------------------------------------------

    def bound_value(self, j: int, x_mask: int, r_mask: int) -> float:
        """The proved lower bound p^{|E_j \\ R|} (c - c^2 S) with
        S = sum over refuted constraints sharing an undetermined edge of
        p^{|E_i \\ (E_j u R)|}. A bound, not a probability."""
        tri = self.sys.tri_edge_tuples[j]
        target = [e for e in tri if not (r_mask >> e) & 1]
        tri_set = set(tri)
        S = 0.0
        seen = set()
        for e in target:
            for i in self.sys.tris_at_edge[e]:
                if i == j or i in seen or not (x_mask >> i) & 1:
                    continue
                seen.add(i)
                expo = sum(
                    1
                    for e2 in self.sys.tri_edge_tuples[i]
                    if e2 not in tri_set and not (r_mask >> e2) & 1
                )
                S += self.p_pow[expo]
        c = self.c
        return self.p_pow[len(target)] * (c - c * c * S)

    def _montecarlo(self, target, cons_edges, key) -> tuple[float, dict]:
        """Rejection sampling against the component's refuted constraints;
        the estimate is keyed by the component structure so reuse is
        deterministic."""
        p, c = self.p, self.c
        universe = sorted(set(target).union(*cons_edges) if cons_edges else set(target))
        pos = {e: b for b, e in enumerate(universe)}
        rng = stream(self.params.seed, f"mcprob/{hash(key) & 0xFFFFFFFF}")
        B = self.params.mc_samples
        sigma = rng.random((B, len(universe))) < p
        hs = rng.random((B, len(cons_edges))) < c
        ok = np.ones(B, dtype=bool)
        for col, edges in enumerate(cons_edges):
            cols = [pos[e] for e in edges]
            ok &= ~(sigma[:, cols].all(axis=1) & hs[:, col])
        kept = int(ok.sum())
        if kept == 0:
            raise ParameterError("monte carlo conditional estimate: no sample satisfied the constraints")
        tcols = [pos[e] for e in target]
        hits = int((sigma[np.flatnonzero(ok)][:, tcols].all(axis=1)).sum())
        est = c * hits / kept
        z = 3.0
        phat = hits / kept
        half = z * math.sqrt(max(phat * (1 - phat), 1e-12) / kept)
        return est, {"samples": kept, "ci": (c * max(phat - half, 0.0), c * min(phat + half, 1.0))}

    # -- entry point -------------------------------------------------------------

    def evaluate(self, j: int, x_mask: int, r_mask: int) -> tuple[float, str, dict]:
        target, cons_ids, cons_edges, over_cap = self._component(
            j, x_mask, r_mask, cap=self.params.element_cap
        )
        if over_cap:
            if self.params.mode == "exact":
                raise CapExceededError(
                    f"conditional component exceeds the element cap "
                    f"{self.params.element_cap} and fallback is disabled (mode='exact')"
                )
            self.fallback_uses += 1
            if self.params.mode == "montecarlo":
                target, cons_ids, cons_edges, _ = self._component(j, x_mask, r_mask)
                key = (tuple(target), tuple(sorted(cons_edges)))
                hit = self.cache.get(key)
                if hit is not None:
                    return hit
                value, detail = self._montecarlo(target, cons_edges, key)
                out = (value, "montecarlo", detail)
                if len(self.cache) < self.cache_cap:
                    self.cache[key] = out
                return out
            return self.bound_value(j, x_mask, r_mask), "bound", {"is_bound": True}
        if not cons_ids:
            self.exact_uses += 1
            return self.c * self.p_pow[len(target)], "exact", {}
        key = (tuple(target), tuple(sorted(cons_edges)))
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        self.exact_uses += 1
        universe = set().union(*cons_edges, target)
        if (1 << len(cons_ids)) <= (1 << len(universe)):
            value = self._exact_inclusion_exclusion(target, cons_edges)
        else:
            value = self._exact_sigma(target, cons_edges)
        out = (value, "exact", {})
        if len(self.cache) < self.cache_cap:
            self.cache[key] = out
        return out


def conditional_prob(state: CouplingState, j: int) -> tuple[float, str]:
    """pi_j for the state's knowledge, plus the computation mode used."""
    sys_ = state.system
    if not (0 <= j < sys_.m):
        raise ParameterError(f"no triangle with id {j}")
    engine = CouplingEngine(sys_, state.params)
    x_mask = 0
    for i in state.refuted:
        x_mask |= 1 << i
    r_mask = 0
    for e in state.r_edges:
        r_mask |= 1 << e
    value, mode, _ = engine.evaluate(j, x_mask, r_mask)
    return value, mode


# -- transcripts ---------------------------------------------------------------


@dataclass(frozen=True)
class StepRecord:
    j: int
    e_j_prime: tuple[int, ...]  # undetermined edge ids of E_j at step time; h_j implicit
    pi_j: float
    mode: str
    branch: str  # "thin" | "fail-branch"
    coin: float
    checked: bool
    verdict: bool | None
    revealed_edges: tuple[int, ...]
    refuted: bool
    in_hprime: bool


@dataclass
class CouplingTranscript:
    params: CouplingParams
    n: int
    triangles: np.ndarray
    hprime_ids: tuple[int, ...]
    gp_edge_ids: tuple[int, ...]
    gp_edges: np.ndarray
    failed: bool
    steps: list[StepRecord] = field(default_factory=list)
    mode_counts: dict = field(default_factory=dict)

    def hprime_triples(self) -> np.ndarray:
        return self.triangles[list(self.hprime_ids)] if self.hprime_ids else np.empty((0, 3), dtype=np.int64)


def _trial_arrays(system: TriangleSystem, params: CouplingParams, gen_e, gen_i, gen_c, batch: int):
    ue = gen_e.random((batch, system.G.m))
    ui = gen_i.random((batch, system.m))
    uc = gen_c.random((batch, system.m))
    return ue, ui, uc


def run_trials(
    G: Graph,
    params: CouplingParams,
    trials: int,
    *,
    record_steps: bool = False,
    batch: int = 4096,
    engine: CouplingEngine | None = None,
    system: TriangleSystem | None = None,
) -> Iterator[CouplingTranscript]:
    """Stream transcripts for `trials` seeded runs; trial t consumes rows
    t of the three labeled uniform streams."""
    system = system or TriangleSystem(G)
    engine = engine or CouplingEngine(system, params)
    m = system.m
    pi = params.pi
    gen_e = stream(params.seed, "couple/edges")
    gen_i = stream(params.seed, "couple/indicators")
    gen_c = stream(params.seed, "couple/coins")
    done = 0
    while done < trials:
        cur = min(batch, trials - done)
        ue, ui, uc = _trial_arrays(system, params, gen_e, gen_i, gen_c, cur)
        edges_ok = ue < params.p
        inds = ui < params.c
        if m:
            tri_ok = edges_ok[:, system.tri_edges].all(axis=2)
            a_true = tri_ok & inds
        else:
            a_true = np.empty((cur, 0), dtype=bool)
        for t in range(cur):
            r_mask = 0
            x_mask = 0
            hprime: list[int] = []
            failed = False
            steps: list[StepRecord] = []
            mode_counts: dict[str, int] = {}
            row_true = a_true[t]
            row_coin = uc[t]
            for j in range(m):
                prior_r_mask = r_mask
                pi_j, mode, _ = engine.evaluate(j, x_mask, r_mask)
                mode_counts[mode] = mode_counts.get(mode, 0) + 1
                coin = float(row_coin[j])
                if pi_j >= pi:
                    branch = "thin"
                    head = pi > 0 and coin < pi / pi_j
                    checked = bool(head)
                    verdict = None
                    revealed: tuple[int, ...] = ()
                    refuted = False
                    added = False
                    if checked:
                        verdict = bool(row_true[j])
                        if verdict:
                            added = True
                            hprime.append(j)
                            new = [
                                e for e in system.tri_edge_tuples[j] if not (r_mask >> e) & 1
                            ]
                            for e in new:
                                r_mask |= 1 << e
                            revealed = tuple(new)
                        else:
                            refuted = True
                            x_mask |= 1 << j
                else:
                    branch = "fail-branch"
                    checked = False
                    verdict = None
                    revealed = ()
                    refuted = False
                    added = coin < pi
                    if added:
                        hprime.append(j)
                        failed = True
                if record_steps:
                    steps.append(
                        StepRecord(
                            j=j,
                            e_j_prime=tuple(
                                e for e in system.tri_edge_tuples[j]
                                if not (prior_r_mask >> e) & 1
                            ),
                            pi_j=pi_j,
                            mode=mode,
                            branch=branch,
                            coin=coin,
                            checked=checked,
                            verdict=verdict,
                            revealed_edges=revealed,
                            refuted=refuted,
                            in_hprime=added,
                        )
                    )
            kept = np.flatnonzero(edges_ok[t])
            yield CouplingTranscript(
                params=params,
                n=G.n,
                triangles=system.H.triples,
                hprime_ids=tuple(hprime),
                gp_edge_ids=tuple(int(e) for e in kept),
                gp_edges=G.edges[kept],
                failed=failed,
                steps=steps,
                mode_counts=mode_counts,
            )
        done += cur


def run_coupling(G: Graph, params: CouplingParams) -> CouplingTranscript:
    """Single fully recorded run."""
    return next(run_trials(G, params, 1, record_steps=True))


def verify_coupling_embedding(transcript: CouplingTranscript) -> bool:
    """True iff the coupling did not fail and every hyperedge of H' spans
    a triangle whose three edges are present in the emitted G_p."""
    if transcript.failed:
        return False
    present = {(int(u), int(v)) for u, v in transcript.gp_edges}
    for tid in transcript.hprime_ids:
        a, b, c = (int(x) for x in transcript.triangles[tid])
        if ((a, b) not in present) or ((a, c) not in present) or ((b, c) not in present):
            return False
    return True


def coupling_marginal_stats(G: Graph, params: CouplingParams, trials: int) -> dict:
    """Per-hyperedge frequencies of H' against Binomial(trials, pi), a
    chi-square style aggregate, the failure rate, and incidence of the
    three bad events on the realized H'."""
    from scipy.stats import chi2

    from .hypergraph import detect_F_config, detect_F_prime, hypergraph_from_triples

    system = TriangleSystem(G)
    engine = CouplingEngine(system, params)
    m = system.m
    counts = np.zeros(m, dtype=np.int64)
    failures = 0
    b1 = b2 = b3 = 0
    embed_ok = 0
    threshold = 2 * math.log(G.n) if G.n > 1 else 0.0
    for tr in run_trials(G, params, trials, system=system, engine=engine):
        ids = tr.hprime_ids
        for tid in ids:
            counts[tid] += 1
        if tr.failed:
            failures += 1
        if verify_coupling_embedding(tr):
            embed_ok += 1
        k = len(ids)
        if k:
            degs: dict[int, int] = {}
            for tid in ids:
                for v in system.H.triple(tid):
                    degs[v] = degs.get(v, 0) + 1
            if max(degs.values()) >= threshold:
                b1 += 1
            if k >= 3:
                hp = hypergraph_from_triples(G.n, [system.H.triple(t) for t in ids])
                if detect_F_prime(hp) is not None:
                    b3 += 1
                if k >= 11 and detect_F_config(hp) is not None:
                    b2 += 1
    pi = params.pi
    if m and 0 < pi < 1:
        expected = trials * pi
        stat = float(np.sum((counts - expected) ** 2) / (trials * pi * (1 - pi)))
        band = (float(chi2.ppf(0.0005, df=m)), float(chi2.ppf(0.9995, df=m)))
    else:
        stat, band = 0.0, (0.0, 0.0)
    return {
        "trials": trials,
        "pi": pi,
        "counts": counts,
        "frequencies": counts / trials if trials else counts.astype(float),
        "chi_square": stat,
        "chi_square_band_999": band,
        "failure_rate": failures / trials if trials else 0.0,
        "embedding_ok_rate": embed_ok / trials if trials else 0.0,
        "b1_incidence": b1 / trials if trials else 0.0,
        "b2_incidence": b2 / trials if trials else 0.0,
        "b3_incidence": b3 / trials if trials else 0.0,
        "exact_evals": engine.exact_uses,
        "fallback_evals": engine.fallback_uses,
    }
