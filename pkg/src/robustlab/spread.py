"""Iterative-absorption machinery for triangle factors: greedy almost
factor, vortex of nested random vertex sets, cover-down, exact finishing
on the residual, and Monte Carlo spread estimation.

Desk-scale hosts cannot satisfy the asymptotic parameter hierarchy, so
every sampler carries a regime report recording which of the stated
constraints the instance actually meets; runs proceed whenever they are
structurally possible.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .errors import (
    CapExceededError,
    ParameterError,
    PipelineStageError,
    RegimeError,
    RetryBudgetError,
    SearchBudgetError,
)
from .graph import Graph, vertex_set
from .rng import stream
from .spectral import second_eigenvalue
from .stats import wilson_interval

__all__ = [
    "TriangleMatching",
    "VortexSample",
    "CoverDownResult",
    "SpreadFactorResult",
    "SpreadEstimate",
    "sample_almost_factor",
    "sample_vortex",
    "vortex_membership_spread_check",
    "cover_down",
    "exact_triangle_factor",
    "sample_spread_factor",
    "estimate_spread",
]

EXACT_FACTOR_CAP = 120


def _ceil(x: float) -> int:
    """Ceiling with a tiny guard against float noise in products like
    (1 - 1/3) * 9 or 0.4**2 * 300."""
    return math.ceil(x - 1e-9)


@dataclass(frozen=True)
class TriangleMatching:
    triples: tuple[tuple[int, int, int], ...]

    @staticmethod
    def build(host: Graph, triples) -> "TriangleMatching":
        canon = tuple(sorted(tuple(sorted(int(x) for x in tri)) for tri in triples))
        tm = TriangleMatching(canon)
        tm.verify(host)
        return tm

    def verify(self, host: Graph) -> bool:
        """Hard invariant: pairwise vertex-disjoint triangles of the host."""
        seen: set[int] = set()
        for a, b, c in self.triples:
            if len({a, b, c}) != 3:
                raise ParameterError(f"degenerate triple {(a, b, c)}")
            if seen & {a, b, c}:
                raise ParameterError(f"triple {(a, b, c)} reuses a covered vertex")
            seen.update((a, b, c))
            if not (host.has_edge(a, b) and host.has_edge(a, c) and host.has_edge(b, c)):
                raise ParameterError(f"triple {(a, b, c)} is not a triangle of the host")
        return True

    def covered(self) -> frozenset[int]:
        return frozenset(v for tri in self.triples for v in tri)

    def __len__(self):
        return len(self.triples)


def _mask_vertices(mask: int):
    while mask:
        v = (mask & -mask).bit_length() - 1
        yield v
        mask &= mask - 1


def _count_triangles_at(bits, v: int, alive: int) -> int:
    nv = bits[v] & alive
    total = 0
    rest = nv
    while rest:
        u = (rest & -rest).bit_length() - 1
        rest &= rest - 1
        total += (bits[u] & nv & ~((1 << (u + 1)) - 1)).bit_count()
    return total


def _sample_triangle_at(bits, v: int, alive: int, rng) -> tuple[int, int] | None:
    """Uniform edge inside the alive neighborhood of v (with v it forms a
    uniform triangle at v); None when no triangle exists."""
    nv = bits[v] & alive
    counts = []
    total = 0
    rest = nv
    while rest:
        u = (rest & -rest).bit_length() - 1
        rest &= rest - 1
        cnt = (bits[u] & nv & ~((1 << (u + 1)) - 1)).bit_count()
        if cnt:
            counts.append((u, cnt))
            total += cnt
    if total == 0:
        return None
    k = int(rng.integers(total))
    for u, cnt in counts:
        if k < cnt:
            opts = bits[u] & nv & ~((1 << (u + 1)) - 1)
            for w in _mask_vertices(opts):
                if k == 0:
                    return u, w
                k -= 1
        else:
            k -= cnt
    raise AssertionError("uniform triangle selection fell through")


def _almost_factor_rounds(G: Graph, alive: int, t: int, q: float, rng):
    """t greedy rounds: pick a uniformly random vertex among those of
    alive-degree at least q|V_i|/2, then a uniformly random triangle at
    it, remove its vertices. Raises with the round index on starvation."""
    bits = G.adj_bits
    triples = []
    alive_count = alive.bit_count()
    for i in range(t):
        threshold = q * alive_count / 2
        pool = [v for v in _mask_vertices(alive) if (bits[v] & alive).bit_count() >= threshold]
        if not pool:
            raise RegimeError(
                f"no vertex meets the q|V_i|/2 degree threshold in round {i}", round_index=i
            )
        v = pool[int(rng.integers(len(pool)))]
        pick = _sample_triangle_at(bits, v, alive, rng)
        if pick is None:
            raise RegimeError(
                f"no triangle at sampled vertex {v} in round {i}", round_index=i, vertex=v
            )
        x, y = pick
        triples.append(tuple(sorted((v, x, y))))
        alive &= ~((1 << v) | (1 << x) | (1 << y))
        alive_count -= 3
    return triples, alive


def sample_almost_factor(G: Graph, q: float, eta: float, seed: int = 0) -> TriangleMatching:
    """Matching of exactly ceil((1-eta) n / 3) disjoint triangles."""
    if not (0.0 < q <= 1.0):
        raise ParameterError("q must lie in (0,1]")
    if not (0.0 < eta < 1.0):
        raise ParameterError("eta must lie in (0,1)")
    t = _ceil((1 - eta) * G.n / 3)
    rng = stream(seed, "almost-factor")
    triples, _ = _almost_factor_rounds(G, (1 << G.n) - 1, t, q, rng)
    return TriangleMatching.build(G, triples)


# -- vortex -------------------------------------------------------------------


@dataclass(frozen=True)
class VortexSample:
    levels: tuple[tuple[int, ...], ...]  # V_0 superset ... superset V_N
    alpha: float
    gamma: float
    d_target: float
    lam_host: float
    rejections: int
    audits: tuple[dict, ...]
    terminal_window: tuple[float, float]
    regime: dict

    @property
    def N(self) -> int:
        return len(self.levels) - 1


def _level_sizes(n: int, alpha: float, hi: float) -> list[int]:
    sizes = [n]
    while sizes[-1] > hi:
        sizes.append(_ceil(alpha**2 * sizes[-1]))
    return sizes


def pipeline_terminal_hi(n: int, d: float, alpha: float, cap: int = EXACT_FACTOR_CAP) -> float:
    """Desk default for the vortex stop size: the residual must stay
    inside the exact-solver cap, and the bottom of the window must stay
    at or above the smallest solvable residual."""
    return min(float(cap), max(n ** (4 / 3) / d, 9.0 / alpha**2))


def sample_vortex(
    G: Graph,
    alpha: float,
    gamma: float,
    seed: int = 0,
    max_retries: int = 100,
    terminal_hi: float | None = None,
    d_target: float | None = None,
) -> VortexSample:
    """Nested uniform subsets |V_{i+1}| = ceil(alpha^2 |V_i|), resampled
    until every level passes the degree-band and induced-spectrum audits."""
    n = G.n
    if not (0.0 < alpha < 1.0):
        raise ParameterError("alpha must lie in (0,1)")
    if _ceil(alpha**2 * n) >= n and n > 1:
        raise ParameterError(f"alpha={alpha} does not shrink n={n}")
    if not (0.0 < gamma):
        raise ParameterError("gamma must be positive")
    d = float(d_target) if d_target is not None else float(G.degrees.mean())
    if d <= 0:
        raise ParameterError("host has no edges")
    lam_host = second_eigenvalue(G).lam
    paper_hi = n ** (4 / 3) / d
    hi = float(terminal_hi) if terminal_hi is not None else paper_hi
    lo = max(9.0, alpha**2 * hi)
    sizes = _level_sizes(n, alpha, hi)
    regime = {
        "paper_window": (alpha**2 * paper_hi, paper_hi),
        "terminal_in_paper_window": alpha**2 * paper_hi <= sizes[-1] <= paper_hi,
        "window_used": (lo, hi),
        "sizes": tuple(sizes),
    }
    if len(sizes) > 1 and not (lo <= sizes[-1] <= hi):
        raise ParameterError(
            f"size ladder terminates at {sizes[-1]}, outside the window [{lo:.1f}, {hi:.1f}]"
        )
    rng = stream(seed, "vortex")
    bits = G.adj_bits

    def audit_level(i, level):
        p_i = len(level) / n
        mask = 0
        for v in level:
            mask |= 1 << v
        degs_into = np.array([(bits[v] & mask).bit_count() for v in range(n)])
        lo_band, hi_band = (1 - gamma) * p_i * d, (1 + gamma) * p_i * d
        band_ok = bool(np.all((degs_into >= lo_band) & (degs_into <= hi_band)))
        if not band_ok:
            return {"level": i, "size": len(level), "p_i": p_i, "degree_band_ok": False}, "degree-band"
        sub, _ = G.induced(level)
        sub_deg = sub.degrees
        lo2, hi2 = (1 - 2 * gamma) * p_i * d, (1 + 2 * gamma) * p_i * d
        induced_band_ok = bool(len(level) == 0 or (sub_deg.min() >= lo2 and sub_deg.max() <= hi2))
        if not induced_band_ok:
            return (
                {"level": i, "size": len(level), "p_i": p_i, "degree_band_ok": True,
                 "induced_band_ok": False},
                "induced-band",
            )
        lam_i = second_eigenvalue(sub).lam if sub.n > 1 else 0.0
        lam_ok = bool(lam_i <= 6 * p_i * lam_host + 1e-12)
        audit = {
            "level": i,
            "size": len(level),
            "p_i": p_i,
            "degree_band_ok": True,
            "induced_band_ok": True,
            "lambda": lam_i,
            "lambda_bound": 6 * p_i * lam_host,
            "lambda_ok": lam_ok,
        }
        return audit, (None if lam_ok else "spectrum")

    # level 0 is V(G) on every draw; audit it once
    audit0, fail0 = audit_level(0, tuple(range(n)))
    if fail0 is not None:
        raise RetryBudgetError(f"vortex level 0 audit fails deterministically: {fail0}")
    failure = None
    for attempt in range(max_retries):
        levels = [tuple(range(n))]
        for size in sizes[1:]:
            prev = levels[-1]
            chosen = rng.choice(len(prev), size=size, replace=False)
            levels.append(tuple(sorted(prev[i] for i in chosen)))
        audits = [audit0]
        failure = None
        for i, level in enumerate(levels[1:], start=1):
            audit, fail = audit_level(i, level)
            audits.append(audit)
            if fail is not None:
                failure = (fail, i)
                break
        if failure is None:
            return VortexSample(
                levels=tuple(levels),
                alpha=alpha,
                gamma=gamma,
                d_target=d,
                lam_host=lam_host,
                rejections=attempt,
                audits=tuple(audits),
                terminal_window=(lo, hi),
                regime=regime,
            )
    raise RetryBudgetError(
        f"vortex rejected {max_retries} times; last failure: {failure[0]} at level {failure[1]}"
    )


def vortex_membership_spread_check(
    G: Graph,
    alpha: float,
    gamma: float,
    vertices: tuple[int, ...],
    levels: tuple[int, ...],
    trials: int,
    seed: int = 0,
    **vortex_kwargs,
) -> dict:
    """Empirical joint membership frequency of (v_i in V_{x_i}) against
    the product bound prod 2|V_{x_i}|/n."""
    if len(vertices) != len(levels) or not (1 <= len(vertices) <= 3):
        raise ParameterError("need 1 to 3 (vertex, level) pairs")
    hits = 0
    sizes = None
    for t in range(trials):
        vs = sample_vortex(G, alpha, gamma, seed=stream(seed, f"vmsc/{t}").integers(2**63), **vortex_kwargs)
        if sizes is None:
            sizes = [len(lvl) for lvl in vs.levels]
        if all(v in set(vs.levels[x]) for v, x in zip(vertices, levels)):
            hits += 1
    bound = math.prod(2 * sizes[x] / G.n for x in levels)
    lo, hi = wilson_interval(hits, trials)
    return {
        "trials": trials,
        "hits": hits,
        "frequency": hits / trials,
        "wilson": (lo, hi),
        "bound": bound,
        "within_bound": lo <= bound,
    }


# -- cover-down ----------------------------------------------------------------


@dataclass(frozen=True)
class CoverDownResult:
    matching: TriangleMatching
    covered_in_u: int
    budget: float
    branches: tuple[str, ...]  # per leftover vertex: "good" | "bad"
    permutation_rejections: int
    regime: dict


def cover_down(
    G: Graph,
    U,
    q: float,
    alpha: float,
    c: float,
    seed: int = 0,
    eps: float = 0.05,
    perm_retries: int = 200,
) -> CoverDownResult:
    """Cover every vertex outside U by triangles, consuming at most
    alpha^2 |U| vertices of U (hard budget): random permutation split of
    U, almost factor on G - U, then one triangle with two U-vertices per
    leftover vertex (good branch from U_1, bad branch from U_2)."""
    n = G.n
    U = vertex_set(n, U)
    if not U:
        raise ParameterError("U must be nonempty (|U| = ceil(alpha^2 n))")
    u_size = len(U)
    bits = G.adj_bits
    u_mask = 0
    for v in U:
        u_mask |= 1 << v
    required = c * q * u_size
    for v in range(n):
        if (bits[v] & u_mask).bit_count() < required:
            raise ParameterError(
                f"degree precondition fails: d({v}, U) = {(bits[v] & u_mask).bit_count()} "
                f"< c q |U| = {required:.2f}"
            )
    budget = alpha**2 * u_size
    vprime = [v for v in range(n) if not (u_mask >> v) & 1]
    n_prime = len(vprime)
    # leftover size: largest w = |V'| mod 3 (+3k) with 2w inside the budget
    r = n_prime % 3
    k = max(0, min((int(budget) // 2 - r) // 3, (n_prime - r) // 3))
    w = r + 3 * k
    if 2 * w > budget:
        raise ParameterError(
            f"budget alpha^2 |U| = {budget:.2f} cannot absorb the leftover class "
            f"|V'| mod 3 = {n_prime % 3}"
        )
    regime = {
        "u_size": u_size,
        "u_size_formula": _ceil(alpha**2 * n),
        "u_size_matches_formula": u_size == _ceil(alpha**2 * n),
        "target_leftover": w,
    }
    rng = stream(seed, "cover-down")
    u1_size = _ceil(alpha**2 * u_size)
    u_arr = np.array(U, dtype=np.int64)
    rejections = 0
    u1_mask = u2_mask = 0
    for attempt in range(perm_retries):
        perm = rng.permutation(u_arr)
        u1, u2 = perm[:u1_size], perm[u1_size:]
        m1 = m2 = 0
        for v in u1:
            m1 |= 1 << int(v)
        for v in u2:
            m2 |= 1 << int(v)
        ok = True
        for j, (mask, size) in enumerate(((m1, len(u1)), (m2, len(u2)))):
            need = (1 - eps) * c * q * size
            if any((bits[v] & mask).bit_count() < need for v in range(n)):
                ok = False
                break
        if ok:
            u1_mask, u2_mask = m1, m2
            rejections = attempt
            break
    else:
        raise RetryBudgetError(
            f"no permutation split of U passed the degree event in {perm_retries} draws"
        )

    alive = 0
    for v in vprime:
        alive |= 1 << v
    t = (n_prime - w) // 3
    triples, alive_after = _almost_factor_rounds(G, alive, t, q, rng)
    leftover = sorted(_mask_vertices(alive_after))
    assert len(leftover) == w
    branches = []
    good_threshold = alpha**5 * q * n
    u1_alive, u2_alive = u1_mask, u2_mask
    for v in leftover:
        if (bits[v] & u1_alive).bit_count() >= good_threshold:
            branch, pool = "good", u1_alive
        else:
            branch, pool = "bad", u2_alive
        pick = _sample_triangle_at(bits, v, pool, rng)
        if pick is None:
            raise RegimeError(
                f"no triangle with two U-vertices available for leftover vertex {v} "
                f"({branch} branch)",
                vertex=v,
            )
        x, y = pick
        triples.append(tuple(sorted((v, x, y))))
        u1_alive &= ~((1 << x) | (1 << y))
        u2_alive &= ~((1 << x) | (1 << y))
        branches.append(branch)
    covered_in_u = 2 * len(leftover)
    if covered_in_u > budget:
        raise RegimeError(
            f"cover-down consumed {covered_in_u} vertices of U, over the hard "
            f"budget alpha^2 |U| = {budget:.2f}"
        )
    matching = TriangleMatching.build(G, triples)
    missing = set(vprime) - matching.covered()
    assert not missing, f"cover-down left {sorted(missing)} uncovered"
    return CoverDownResult(
        matching=matching,
        covered_in_u=covered_in_u,
        budget=budget,
        branches=tuple(branches),
        permutation_rejections=rejections,
        regime=regime,
    )


# -- exact finishing -----------------------------------------------------------


class _FactorBudgetHit(Exception):
    pass


def exact_triangle_factor(
    G: Graph, node_budget: int = 300_000, cap: int = EXACT_FACTOR_CAP
) -> TriangleMatching | None:
    """Exact cover search: repeatedly branch on the uncovered vertex with
    fewest available triangles, pruning on any zero-candidate vertex.
    Returns a factor, or None = certified none; budget exhaustion raises."""
    if G.n % 3 != 0:
        raise ParameterError(f"3 does not divide n = {G.n}")
    if G.n > cap:
        raise CapExceededError(f"exact triangle factor capped at n <= {cap}")
    if G.n == 0:
        return TriangleMatching.build(G, [])
    bits = G.adj_bits
    nodes = 0

    def candidates(v: int, alive: int):
        nv = bits[v] & alive
        out = []
        rest = nv
        while rest:
            u = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            ws = bits[u] & nv & ~((1 << (u + 1)) - 1)
            for w in _mask_vertices(ws):
                out.append((u, w))
        return out

    def solve(alive: int):
        nonlocal nodes
        if alive == 0:
            return []
        nodes += 1
        if nodes > node_budget:
            raise _FactorBudgetHit
        best_v, best_cnt = -1, None
        rest = alive
        while rest:
            v = (rest & -rest).bit_length() - 1
            rest &= rest - 1
            cnt = _count_triangles_at(bits, v, alive)
            if cnt == 0:
                return None
            if best_cnt is None or cnt < best_cnt:
                best_v, best_cnt = v, cnt
                if cnt == 1:
                    break
        for u, w in candidates(best_v, alive):
            sub = solve(alive & ~((1 << best_v) | (1 << u) | (1 << w)))
            if sub is not None:
                return [(best_v, u, w)] + sub
        return None

    try:
        result = solve((1 << G.n) - 1)
    except _FactorBudgetHit as exc:
        raise SearchBudgetError(
            f"triangle-factor search exceeded {node_budget} nodes (inconclusive)"
        ) from exc
    if result is None:
        return None
    return TriangleMatching.build(G, result)


# -- full pipeline ---------------------------------------------------------------


@dataclass(frozen=True)
class SpreadFactorResult:
    matching: TriangleMatching
    vortex: VortexSample
    level_audits: tuple[dict, ...]
    regime: dict


def sample_spread_factor(
    G: Graph,
    alpha: float,
    gamma: float,
    seed: int = 0,
    *,
    q: float | None = None,
    c: float = 0.4,
    eps: float = 0.05,
    terminal_hi: float | None = None,
    vortex_retries: int = 100,
    node_budget: int = 300_000,
) -> SpreadFactorResult:
    """Vortex, per-level cover-down, exact finish; output is a verified
    triangle factor of G."""
    if G.n % 3 != 0:
        raise ParameterError(f"3 does not divide n = {G.n}")
    d_mean = float(G.degrees.mean())
    if d_mean <= 0:
        raise PipelineStageError("vortex", "host has no edges")
    if q is None:
        q = d_mean / G.n
    if terminal_hi is None:
        terminal_hi = pipeline_terminal_hi(G.n, d_mean, alpha)
    try:
        vortex = sample_vortex(
            G, alpha, gamma, seed=seed, max_retries=vortex_retries, terminal_hi=terminal_hi
        )
    except (ParameterError, RetryBudgetError) as exc:
        raise PipelineStageError("vortex", str(exc), cause=exc) from exc

    levels = [set(lvl) for lvl in vortex.levels]
    N = len(levels) - 1
    levels.append(set())  # V_{N+1} = empty
    matching_triples: list[tuple[int, int, int]] = []
    covered: set[int] = set()
    level_audits = []
    for i in range(N):
        vi_prime = sorted(levels[i] - covered - levels[i + 2])
        u_i = sorted(levels[i + 1] - levels[i + 2])
        sub, labels = G.induced(vi_prime)
        local = {v: k for k, v in enumerate(labels)}
        u_local = [local[v] for v in u_i]
        try:
            res = cover_down(
                sub,
                u_local,
                q=q,
                alpha=alpha,
                c=c,
                seed=stream(seed, f"pipeline/coverdown/{i}").integers(2**63),
                eps=eps,
            )
        except (ParameterError, RegimeError, RetryBudgetError) as exc:
            raise PipelineStageError(f"cover-down level {i}", str(exc), cause=exc) from exc
        new_triples = [tuple(sorted(int(labels[x]) for x in tri)) for tri in res.matching.triples]
        new_cover = {v for tri in new_triples for v in tri}
        mandate = set(vi_prime) - set(u_i)
        audit = {
            "level": i,
            "mandate_covered": mandate <= new_cover,
            "avoided_next2": not (new_cover & levels[i + 2]),
            "covered_in_u": res.covered_in_u,
            "u_budget": res.budget,
            "branches": res.branches,
        }
        assert audit["mandate_covered"] and audit["avoided_next2"]
        level_audits.append(audit)
        matching_triples.extend(new_triples)
        covered |= new_cover

    residual = sorted(levels[N] - covered)
    sub, labels = G.induced(residual)
    try:
        finish = exact_triangle_factor(sub, node_budget=node_budget)
    except (SearchBudgetError, CapExceededError, ParameterError) as exc:
        raise PipelineStageError("finish", str(exc), cause=exc) from exc
    if finish is None:
        raise PipelineStageError("finish", f"residual on {len(residual)} vertices has no triangle factor")
    matching_triples.extend(
        tuple(sorted(int(labels[x]) for x in tri)) for tri in finish.triples
    )
    matching = TriangleMatching.build(G, matching_triples)
    if matching.covered() != frozenset(range(G.n)):
        raise PipelineStageError("assemble", "output is not a spanning triangle factor")
    return SpreadFactorResult(
        matching=matching,
        vortex=vortex,
        level_audits=tuple(level_audits),
        regime={"q": q, "c": c, "eps": eps, "terminal_hi": terminal_hi, **vortex.regime},
    )


# -- spread estimation ------------------------------------------------------------


@dataclass(frozen=True)
class SpreadEstimate:
    r: int
    trials: int
    q_target: float
    max_probability: float
    max_wilson_upper: float
    max_ratio: float  # wilson upper vs q_target^r
    argmax: tuple
    histogram: dict
    confidence: float = 0.95


def estimate_spread(sampler, r: int, trials: int, q_target: float, seed: int = 0) -> SpreadEstimate:
    """Empirical max over observed size-r sets of triples of the
    inclusion probability P[S subset M], via `sampler(seed) -> matching`.
    Meaningful spread comparisons need trials >= 10^4 (caller obligation;
    smaller runs still return honest counts and intervals)."""
    if r not in (1, 2):
        raise ParameterError("r must be 1 or 2")
    counts: Counter = Counter()
    for t in range(trials):
        m = sampler(int(stream(seed, f"spread/{t}").integers(2**63)))
        triples = m.triples if isinstance(m, TriangleMatching) else tuple(
            tuple(sorted(int(x) for x in tri)) for tri in m
        )
        if r == 1:
            counts.update(triples)
        else:
            srt = sorted(triples)
            for ii in range(len(srt)):
                for jj in range(ii + 1, len(srt)):
                    counts[(srt[ii], srt[jj])] += 1
    if not counts:
        return SpreadEstimate(r, trials, q_target, 0.0, 0.0, 0.0, (), {})
    argmax, top = max(counts.items(), key=lambda kv: kv[1])
    _, hi = wilson_interval(top, trials)
    hist = Counter(counts.values())
    target = q_target**r
    return SpreadEstimate(
        r=r,
        trials=trials,
        q_target=q_target,
        max_probability=top / trials,
        max_wilson_upper=hi,
        max_ratio=hi / target if target > 0 else math.inf,
        argmax=argmax,
        histogram=dict(sorted(hist.items())),
    )
