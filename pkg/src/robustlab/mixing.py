"""Verifiers for the mixing inequality of spectral expanders and for
(q, beta)-bijumbledness.

Exhaustive mode covers ALL subset pairs (S, T) at n <= cap without
enumerating 2^n x 2^n pairs: for fixed S the pair count e(S, T) depends
on T only through which vertices it takes, and the inequality bound only
through |T|, so the extremal T of each size are the top/bottom |T|
entries of the degree-into-S vector. 2^n sets, not 2^2n pairs.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import CapExceededError, DegreeBandError, ParameterError
from .graph import Graph
from .rng import stream

__all__ = [
    "MixingReport",
    "BijumbledReport",
    "check_mixing",
    "check_almost_mixing",
    "check_bijumbled",
]

EXHAUSTIVE_CAP = 16
_CHUNK = 1 << 13


@dataclass(frozen=True)
class MixingReport:
    checked_pairs: int
    max_violation: float
    worst_pair: tuple[tuple[int, ...], tuple[int, ...]] | None

    @property
    def holds(self) -> bool:
        return self.max_violation <= 0

    def to_json(self) -> str:
        wp = None if self.worst_pair is None else [list(self.worst_pair[0]), list(self.worst_pair[1])]
        return json.dumps(
            {
                "checked_pairs": self.checked_pairs,
                "max_violation": self.max_violation,
                "worst_pair": wp,
            }
        )


@dataclass(frozen=True)
class BijumbledReport(MixingReport):
    q: float
    beta: float


def _adjacency(G: Graph) -> np.ndarray:
    A = np.zeros((G.n, G.n))
    if G.m:
        A[G.edges[:, 0], G.edges[:, 1]] = 1.0
        A[G.edges[:, 1], G.edges[:, 0]] = 1.0
    return A


def _subset_members(ids: np.ndarray, nbits: int) -> np.ndarray:
    return ((ids[:, None] >> np.arange(nbits)[None, :]) & 1).astype(np.float64)


def _exhaustive_scan(G, s_universe, t_universe, violation_fn):
    """Max of violation_fn over all nonempty S subset of s_universe and
    T subset of t_universe (all sizes). Returns (max, S, T, count)."""
    A = _adjacency(G)
    a = np.asarray(s_universe, dtype=np.int64)
    b = np.asarray(t_universe, dtype=np.int64)
    Ab = A[np.ix_(a, b)]
    k, nt = len(a), len(b)
    t_sizes = np.arange(1, nt + 1, dtype=np.float64)

    best = -np.inf
    best_key = None  # (subset id, t, take_max)
    for lo in range(1, 1 << k, _CHUNK):
        ids = np.arange(lo, min(lo + _CHUNK, 1 << k), dtype=np.int64)
        member = _subset_members(ids, k)
        sizes = member.sum(axis=1)
        W = member @ Ab  # degree into S, restricted to the T side
        Ws = np.sort(W, axis=1)
        e_min = np.cumsum(Ws, axis=1)
        e_max = np.cumsum(Ws[:, ::-1], axis=1)
        v_lo, v_hi = violation_fn(sizes[:, None], t_sizes[None, :], e_min, e_max)
        viol = np.maximum(v_lo, v_hi)
        flat = int(np.argmax(viol))
        val = float(viol.flat[flat])
        if val > best:
            row, t_idx = divmod(flat, nt)
            take_max = bool(v_hi[row, t_idx] >= v_lo[row, t_idx])
            best = val
            best_key = (int(ids[row]), t_idx + 1, take_max)

    sid, t, take_max = best_key
    s_bits = [int(a[i]) for i in range(k) if (sid >> i) & 1]
    w = A[np.ix_(np.array(s_bits, dtype=np.int64), b)].sum(axis=0)
    order = np.argsort(w, kind="stable")
    chosen = order[-t:] if take_max else order[:t]
    t_set = tuple(sorted(int(b[i]) for i in chosen))
    count = ((1 << k) - 1) * ((1 << nt) - 1)
    return best, tuple(s_bits), t_set, count


def _sampled_scan(G, s_universe, t_universe, violation_fn, k, seed):
    A = _adjacency(G)
    rng = stream(seed, "mixing/sampled")
    a = np.asarray(s_universe, dtype=np.int64)
    b = np.asarray(t_universe, dtype=np.int64)
    Ab = A[np.ix_(a, b)]
    best = -np.inf
    best_pair = None
    checked = 0
    batch = 2048
    remaining = k
    while remaining > 0:
        cur = min(batch, remaining)
        remaining -= cur
        S = rng.integers(0, 2, size=(cur, len(a))).astype(np.float64)
        T = rng.integers(0, 2, size=(cur, len(b))).astype(np.float64)
        s_sizes = S.sum(axis=1)
        t_sizes = T.sum(axis=1)
        ok = (s_sizes > 0) & (t_sizes > 0)
        if not np.any(ok):
            continue
        S, T = S[ok], T[ok]
        s_sizes, t_sizes = s_sizes[ok], t_sizes[ok]
        e = np.einsum("ij,ij->i", S @ Ab, T)
        v_lo, v_hi = violation_fn(s_sizes[:, None], t_sizes[:, None], e[:, None], e[:, None])
        viol = np.maximum(v_lo, v_hi).ravel()
        checked += len(viol)
        i = int(np.argmax(viol))
        if float(viol[i]) > best:
            best = float(viol[i])
            s_set = tuple(int(a[j]) for j in np.flatnonzero(S[i]))
            t_set = tuple(int(b[j]) for j in np.flatnonzero(T[i]))
            best_pair = (s_set, t_set)
    if best_pair is None:
        raise ParameterError("sampled verification drew no nonempty pair")
    return best, best_pair[0], best_pair[1], checked


def _run(G, s_universe, t_universe, violation_fn, mode, k, seed, cap):
    if mode == "exhaustive":
        if len(s_universe) > cap:
            raise CapExceededError(
                f"exhaustive mode enumerates 2^{len(s_universe)} sets, cap is 2^{cap}"
            )
        return _exhaustive_scan(G, s_universe, t_universe, violation_fn)
    if mode == "sampled":
        if k is None or k <= 0:
            raise ParameterError("sampled mode needs k > 0")
        return _sampled_scan(G, s_universe, t_universe, violation_fn, k, seed)
    raise ParameterError(f"unknown mode {mode!r}")


def check_mixing(
    G: Graph,
    d: float,
    lam: float,
    mode: str = "exhaustive",
    k: int | None = None,
    seed: int = 0,
    cap: int = EXHAUSTIVE_CAP,
) -> MixingReport:
    """Slack of |e(S,T) - (d/n)|S||T|| <= lam sqrt(|S||T|) over pairs."""
    n = G.n

    def violation(s, t, e_min, e_max):
        mu = (d / n) * s * t
        bound = lam * np.sqrt(s * t)
        return mu - e_min - bound, e_max - mu - bound

    univ = np.arange(n)
    best, S, T, count = _run(G, univ, univ, violation, mode, k, seed, cap)
    return MixingReport(count, best, (S, T))


def check_almost_mixing(
    G: Graph,
    d: float,
    gamma: float,
    lam: float,
    mode: str = "exhaustive",
    k: int | None = None,
    seed: int = 0,
    cap: int = EXHAUSTIVE_CAP,
) -> MixingReport:
    """Two-sided almost-regular bound with factors (1 +- gamma)^2/(1 -+ gamma)
    and additive term ((1+gamma)/(1-gamma)) lam sqrt(|S||T|). Requires every
    degree inside (1 +- gamma) d."""
    deg = G.degrees
    lo_d, hi_d = (1 - gamma) * d, (1 + gamma) * d
    if G.n and (deg.min() < lo_d or deg.max() > hi_d):
        bad = int(np.argmax((deg < lo_d) | (deg > hi_d)))
        raise DegreeBandError(
            f"degree {int(deg[bad])} of vertex {bad} outside (1±{gamma}) d = [{lo_d:.3f}, {hi_d:.3f}]"
        )
    n = G.n

    def violation(s, t, e_min, e_max):
        eps = (1 + gamma) / (1 - gamma) * lam * np.sqrt(s * t)
        lower = (1 - gamma) ** 2 * d * s * t / ((1 + gamma) * n) - eps
        upper = (1 + gamma) ** 2 * d * s * t / ((1 - gamma) * n) + eps
        return lower - e_min, e_max - upper

    univ = np.arange(n)
    best, S, T, count = _run(G, univ, univ, violation, mode, k, seed, cap)
    return MixingReport(count, best, (S, T))


def check_bijumbled(
    G: Graph,
    q: float,
    beta: float,
    mode: str = "exhaustive",
    k: int | None = None,
    seed: int = 0,
    cap: int = EXHAUSTIVE_CAP,
    bipartite: bool = False,
) -> BijumbledReport:
    """Slack of |e(X,Y) - q|X||Y|| <= beta sqrt(|X||Y|); with bipartite=True
    restricts X to part A and Y to part B of a graph carrying parts."""

    def violation(s, t, e_min, e_max):
        mu = q * s * t
        bound = beta * np.sqrt(s * t)
        return mu - e_min - bound, e_max - mu - bound

    if bipartite:
        if G.parts is None:
            raise ParameterError("bipartite variant needs a graph with parts")
        s_universe, t_universe = G.parts
    else:
        s_universe = t_universe = np.arange(G.n)
    best, S, T, count = _run(G, s_universe, t_universe, violation, mode, k, seed, cap)
    return BijumbledReport(count, best, (S, T), q=q, beta=beta)
