"""Monte Carlo threshold estimation, the isolated/uncovered vertex moment
formulas, sampled robust-expander events, and scaling fits.

Sweeps share one uniform per edge per trial across the whole p-grid, so
for monotone properties the per-trial success indicator is nondecreasing
in p; this is asserted per trial whenever every evaluation is certified.
All logarithms are natural, and every emitted reference value is stored
with the curve rather than recomputed downstream.
"""

from __future__ import annotations

import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.optimize import curve_fit

from .errors import ParameterError, SearchBudgetError
from .graph import Graph, directed_pair_count
from .generators import sparsify_with_uniforms
from .hypergraph import build_triangle_hypergraph
from .rng import stream
from .spread import exact_triangle_factor
from .stats import wilson_interval
from .structure import count_isolated, find_hamiltonian_cycle, max_matching

__all__ = [
    "PROPERTIES",
    "CurvePoint",
    "ThresholdCurve",
    "MomentReport",
    "threshold_sweep",
    "isolated_vertex_moments",
    "uncovered_vertex_expectation",
    "robust_expander_events",
    "scaling_fit",
    "reference_value",
]

PROPERTIES = ("PM", "HAM", "TRIANGLE_FACTOR", "NO_ISOLATED")

CSV_HEADER = [
    "family",
    "n",
    "d",
    "lambda",
    "property",
    "p",
    "trials",
    "successes",
    "phat",
    "ci_lo",
    "ci_hi",
    "reference_value",
]


@dataclass(frozen=True)
class CurvePoint:
    p: float
    trials: int
    successes: int
    phat: float
    ci_lo: float
    ci_hi: float


@dataclass
class ThresholdCurve:
    family: str
    n: int
    d: float
    lam: float
    property: str
    points: list[CurvePoint]
    reference_value: float
    p_half: float = 0.0
    certified: bool = True
    heuristic: bool = False

    def __eq__(self, other):
        if not isinstance(other, ThresholdCurve):
            return NotImplemented
        lam_eq = (self.lam == other.lam) or (math.isnan(self.lam) and math.isnan(other.lam))
        return (
            lam_eq
            and (self.family, self.n, self.d, self.property) == (other.family, other.n, other.d, other.property)
            and self.points == other.points
            and self.reference_value == other.reference_value
            and self.p_half == other.p_half
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf)
        w.writerow(CSV_HEADER)
        for pt in self.points:
            w.writerow(
                [
                    self.family,
                    self.n,
                    repr(self.d),
                    repr(self.lam),
                    self.property,
                    repr(pt.p),
                    pt.trials,
                    pt.successes,
                    repr(pt.phat),
                    repr(pt.ci_lo),
                    repr(pt.ci_hi),
                    repr(self.reference_value),
                ]
            )
        return buf.getvalue()

    @staticmethod
    def from_csv(text: str) -> "ThresholdCurve":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != CSV_HEADER:
            raise ParameterError(f"bad CSV header {rows[0] if rows else None}")
        if len(rows) < 2:
            raise ParameterError("CSV carries no points")
        pts = []
        fam = rows[1][0]
        n = int(rows[1][1])
        d = float(rows[1][2])
        lam = float(rows[1][3])
        prop = rows[1][4]
        ref = float(rows[1][11])
        for row in rows[1:]:
            pts.append(
                CurvePoint(
                    p=float(row[5]),
                    trials=int(row[6]),
                    successes=int(row[7]),
                    phat=float(row[8]),
                    ci_lo=float(row[9]),
                    ci_hi=float(row[10]),
                )
            )
        curve = ThresholdCurve(fam, n, d, lam, prop, pts, ref)
        curve.p_half = fit_half_point(curve.points)
        return curve

    def to_json(self) -> str:
        return json.dumps(
            {
                "family": self.family,
                "n": self.n,
                "d": self.d,
                "lambda": self.lam,
                "property": self.property,
                "reference_value": self.reference_value,
                "p_half": self.p_half,
                "certified": self.certified,
                "heuristic": self.heuristic,
                "points": [
                    {
                        "p": pt.p,
                        "trials": pt.trials,
                        "successes": pt.successes,
                        "phat": pt.phat,
                        "ci_lo": pt.ci_lo,
                        "ci_hi": pt.ci_hi,
                    }
                    for pt in self.points
                ],
            },
            sort_keys=True,
        )


@dataclass(frozen=True)
class MomentReport:
    expectation: float
    variance_bound: float
    mc_mean: float
    mc_std: float
    trials: int


def reference_value(n: int, d: float, prop: str) -> float:
    """ln n / d for matchings and cycles; n^{1/3} (ln n)^{1/3} / d for
    triangle factors."""
    if prop == "TRIANGLE_FACTOR":
        return n ** (1 / 3) * math.log(n) ** (1 / 3) / d
    return math.log(n) / d


def _evaluate(G_p: Graph, prop: str, seed: int, ham_budget: int = 50, tf_budget: int = 300_000):
    """(success, certified) for one realized sparsification."""
    if prop == "NO_ISOLATED":
        return count_isolated(G_p) == 0, True
    if prop == "PM":
        return max_matching(G_p).is_perfect(G_p.n), True
    if prop == "HAM":
        res = find_hamiltonian_cycle(G_p, budget=ham_budget, seed=seed)
        certified = res.found or res.certified_absent
        return res.found, certified
    if prop == "TRIANGLE_FACTOR":
        try:
            return exact_triangle_factor(G_p, node_budget=tf_budget) is not None, True
        except SearchBudgetError:
            return False, False
    raise ParameterError(f"unknown property {prop!r}")


def _trial_successes(G: Graph, prop: str, grid, seed: int, trial: int):
    uniforms = stream(seed, f"sweep/{trial}").random(G.m)
    out = []
    for p in grid:
        gp = sparsify_with_uniforms(G, p, uniforms)
        out.append(_evaluate(gp, prop, seed=trial))
    return out


def _trial_worker(args):
    G, prop, grid, seed, trial = args
    return trial, _trial_successes(G, prop, grid, seed, trial)


def threshold_sweep(
    G: Graph,
    family: str,
    prop: str,
    grid=None,
    trials: int = 100,
    seed: int = 0,
    jobs: int = 1,
    bisect_target: float | None = None,
    bisect_iters: int = 8,
    lam: float = float("nan"),
    d: float | None = None,
) -> ThresholdCurve:
    """Success-probability curve over a p-grid with monotone-coupled
    samples, Wilson intervals, and a logistic half-point estimate. With
    bisect_target set, the grid is grown adaptively around the target."""
    if prop not in PROPERTIES:
        raise ParameterError(f"property must be one of {PROPERTIES}")
    if prop == "TRIANGLE_FACTOR" and G.n % 3 != 0:
        raise ParameterError("TRIANGLE_FACTOR needs 3 | n")
    d_val = float(d) if d is not None else float(G.degrees.mean())
    ref = reference_value(G.n, d_val, prop)

    if bisect_target is not None:
        lo, hi = 0.0, min(1.0, 4 * ref)
        grid = []
        for _ in range(bisect_iters):
            grid.append((lo + hi) / 2)
            mid = grid[-1]
            succ = 0
            for t in range(trials):
                uniforms = stream(seed, f"sweep/{t}").random(G.m)
                ok, _ = _evaluate(sparsify_with_uniforms(G, mid, uniforms), prop, seed=t)
                succ += ok
            if succ / trials < bisect_target:
                lo = mid
            else:
                hi = mid
        grid = sorted(set(grid))
    if grid is None or len(grid) == 0:
        raise ParameterError("grid must be nonempty (or pass bisect_target)")
    grid = sorted(float(p) for p in grid)
    if not all(0.0 <= p <= 1.0 for p in grid):
        raise ParameterError("grid values must lie in [0,1]")

    results: dict[int, list] = {}
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            for trial, row in pool.map(
                _trial_worker,
                [(G, prop, grid, seed, t) for t in range(trials)],
                chunksize=max(1, trials // (4 * jobs)),
            ):
                results[trial] = row
    else:
        for t in range(trials):
            results[t] = _trial_successes(G, prop, grid, seed, t)

    successes = np.zeros(len(grid), dtype=np.int64)
    all_certified = True
    monotone_checked = 0
    for t in range(trials):
        row = results[t]
        flags = [ok for ok, _ in row]
        certs = [cert for _, cert in row]
        successes += np.array(flags, dtype=np.int64)
        if all(certs):
            monotone_checked += 1
            assert flags == sorted(flags), (
                f"monotone coupling violated in trial {t}: {flags}"
            )
        else:
            all_certified = False
    points = []
    for i, p in enumerate(grid):
        succ = int(successes[i])
        lo_ci, hi_ci = wilson_interval(succ, trials)
        points.append(CurvePoint(float(p), trials, succ, succ / trials, lo_ci, hi_ci))
    curve = ThresholdCurve(
        family=family,
        n=G.n,
        d=d_val,
        lam=lam,
        property=prop,
        points=points,
        reference_value=ref,
        certified=all_certified,
        heuristic=(prop == "HAM" and G.n > 20),
    )
    curve.p_half = fit_half_point(points)
    return curve


def fit_half_point(points) -> float:
    """Monotone logistic fit, half-point clipped into the grid hull."""
    ps = np.array([pt.p for pt in points])
    ys = np.array([pt.phat for pt in points])
    lo, hi = float(ps.min()), float(ps.max())
    if np.all(ys >= 0.5):
        return lo
    if np.all(ys <= 0.5):
        return hi
    # initial guess: first crossing by linear interpolation
    mu0 = hi
    for i in range(1, len(ps)):
        if ys[i - 1] < 0.5 <= ys[i]:
            frac = (0.5 - ys[i - 1]) / max(ys[i] - ys[i - 1], 1e-12)
            mu0 = ps[i - 1] + frac * (ps[i] - ps[i - 1])
            break
    if len(ps) < 3:
        return float(min(max(mu0, lo), hi))

    def logistic(x, mu, s):
        return 1.0 / (1.0 + np.exp(-(x - mu) / s))

    try:
        popt, _ = curve_fit(
            logistic,
            ps,
            ys,
            p0=[mu0, max((hi - lo) / 10, 1e-6)],
            bounds=([lo, 1e-9], [hi, 10 * (hi - lo) + 1e-6]),
            maxfev=10_000,
        )
        mu = float(popt[0])
    except RuntimeError:
        mu = mu0
    return float(min(max(mu, lo), hi))


def isolated_vertex_moments(G: Graph, p: float, trials: int = 2000, seed: int = 0) -> MomentReport:
    """E[I] = sum_v (1-p)^{deg v} exactly; the second-moment proof's
    variance bound sum_{uv in E} p (1-p)^{deg u + deg v - 1}; MC estimate."""
    deg = G.degrees.astype(float)
    expectation = float(np.sum((1 - p) ** deg))
    if G.m:
        du = deg[G.edges[:, 0]]
        dv = deg[G.edges[:, 1]]
        var_bound = float(np.sum(p * (1 - p) ** (du + dv - 1)))
    else:
        var_bound = 0.0
    gen = stream(seed, "moments/isolated")
    counts = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        keep = gen.random(G.m) < p
        touched = np.zeros(G.n, dtype=bool)
        kept = G.edges[keep]
        touched[kept[:, 0]] = True
        touched[kept[:, 1]] = True
        counts[t] = G.n - int(touched.sum())
    return MomentReport(
        expectation=expectation,
        variance_bound=var_bound,
        mc_mean=float(counts.mean()),
        mc_std=float(counts.std(ddof=1)) if trials > 1 else 0.0,
        trials=trials,
    )


def uncovered_vertex_expectation(G: Graph, p: float, trials: int = 2000, seed: int = 0) -> dict:
    """Harris lower bound sum_v (1-p^3)^{t_v} on the expected number of
    triangle-uncovered vertices of G_p, with an MC estimate."""
    H = build_triangle_hypergraph(G)
    t_v = H.degrees.astype(float)
    bound = float(np.sum((1 - p**3) ** t_v))
    eidx = G.edge_index
    tri_edges = np.empty((H.t, 3), dtype=np.int64)
    for i, (a, b, c) in enumerate(H.triples):
        tri_edges[i] = (
            eidx[(int(a), int(b))],
            eidx[(int(a), int(c))],
            eidx[(int(b), int(c))],
        )
    gen = stream(seed, "moments/uncovered")
    counts = np.empty(trials, dtype=np.int64)
    for t in range(trials):
        keep = gen.random(G.m) < p
        covered = np.zeros(G.n, dtype=bool)
        if H.t:
            present = keep[tri_edges].all(axis=1)
            for tri in H.triples[present]:
                covered[tri] = True
        counts[t] = G.n - int(covered.sum())
    return {
        "harris_bound": bound,
        "triangle_degrees": t_v,
        "mc_mean": float(counts.mean()),
        "mc_std": float(counts.std(ddof=1)) if trials > 1 else 0.0,
        "trials": trials,
    }


def robust_expander_events(
    G: Graph,
    p: float,
    C: float,
    delta: float,
    trials: int = 100,
    seed: int = 0,
    eps: float = 0.05,
    sets_per_trial: int = 20,
) -> dict:
    """Empirical failure frequencies of the three expander-robustness
    proof events on G_p: minimum degree delta ln n, sampled big-pair edge
    retention, sampled small-set sparsity."""
    n = G.n
    logn = math.log(n)
    pair_size = max(1, int(math.ceil(n / (2 * C * C))))
    y_lo = max(1, int(delta * logn / (2 * C)))
    y_hi = max(y_lo, min(n, int((C + 1) * n / logn)))
    gen = stream(seed, "events")
    fail_deg = fail_pairs = fail_small = 0
    for t in range(trials):
        keep = gen.random(G.m) < p
        gp = Graph(G.n, G.edges[keep])
        if G.n and (gp.degrees.min() < delta * logn):
            fail_deg += 1
        pair_bad = False
        for _ in range(sets_per_trial):
            if 2 * pair_size > n:
                break
            both = gen.choice(n, size=2 * pair_size, replace=False)
            A1, A2 = both[:pair_size], both[pair_size:]
            e_host = directed_pair_count(G, A1, A2)
            e_sub = directed_pair_count(gp, A1, A2)
            if e_sub <= (1 - eps) * p * e_host:
                pair_bad = True
                break
        fail_pairs += pair_bad
        small_bad = False
        for _ in range(sets_per_trial):
            size = int(gen.integers(y_lo, y_hi + 1))
            Y = gen.choice(n, size=size, replace=False)
            if directed_pair_count(gp, Y, Y) / 2 > delta * logn / (2 * C) * size:
                small_bad = True
                break
        fail_small += small_bad
    return {
        "trials": trials,
        "p": p,
        "min_degree_failure": fail_deg / trials,
        "pair_edges_failure": fail_pairs / trials,
        "small_set_failure": fail_small / trials,
    }


EVENTS_HEADER = [
    "family",
    "n",
    "d",
    "p",
    "C",
    "delta",
    "eps",
    "event",
    "trials",
    "failures",
    "frequency",
]


def events_to_csv(report: dict, family: str, n: int, d: float, C: float, delta: float, eps: float) -> str:
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(EVENTS_HEADER)
    trials = report["trials"]
    for event, key in (
        ("min-degree", "min_degree_failure"),
        ("pair-edges", "pair_edges_failure"),
        ("small-set", "small_set_failure"),
    ):
        freq = report[key]
        w.writerow(
            [family, n, repr(float(d)), repr(report["p"]), repr(float(C)), repr(float(delta)),
             repr(float(eps)), event, trials, int(round(freq * trials)), repr(freq)]
        )
    return buf.getvalue()


SCALING_HEADER = [
    "property",
    "n",
    "d",
    "p_half",
    "reference_value",
    "corrected_p_half",
    "slope_raw",
    "slope_corrected",
]


def scaling_fit(
    n_list,
    prop: str,
    trials: int = 200,
    seed: int = 0,
    jobs: int = 1,
    grid_span: tuple[float, float] = (0.4, 2.5),
    grid_points: int = 8,
) -> dict:
    """log-log slope of the estimated half point against n on complete
    hosts, with the logarithmic correction divided out (exponent 1/3 for
    triangle factors, 1 for the ln n / d family)."""
    n_list = sorted(int(n) for n in n_list)
    if len(n_list) < 3:
        raise ParameterError("need at least 3 sizes for a slope fit")
    log_exp = 1 / 3 if prop == "TRIANGLE_FACTOR" else 1.0
    rows = []
    for n in n_list:
        if prop == "TRIANGLE_FACTOR" and n % 3 != 0:
            raise ParameterError(f"3 does not divide n = {n}")
        u, v = np.triu_indices(n, k=1)
        K = Graph(n, np.column_stack([u, v]).astype(np.int64))
        ref = reference_value(n, n - 1, prop)
        grid = np.geomspace(grid_span[0] * ref, min(1.0, grid_span[1] * ref), grid_points)
        curve = threshold_sweep(
            K, f"complete({n})", prop, grid=grid.tolist(), trials=trials,
            seed=seed + n, jobs=jobs, d=float(n - 1),
        )
        rows.append((n, curve.p_half, ref))
    ln_n = np.log([r[0] for r in rows])
    ln_p = np.log([r[1] for r in rows])
    ln_p_corr = np.log(
        [r[1] / math.log(r[0]) ** log_exp for r in rows]
    )
    slope_raw = float(np.polyfit(ln_n, ln_p, 1)[0])
    slope_corr = float(np.polyfit(ln_n, ln_p_corr, 1)[0])
    buf = io.StringIO()
    w = csv.writer(buf)
    w.writerow(SCALING_HEADER)
    for n, p_half, ref in rows:
        w.writerow(
            [
                prop,
                n,
                n - 1,
                repr(p_half),
                repr(ref),
                repr(p_half / math.log(n) ** log_exp),
                repr(slope_raw),
                repr(slope_corr),
            ]
        )
    return {
        "rows": rows,
        "slope_raw": slope_raw,
        "slope_corrected": slope_corr,
        "log_exponent": log_exp,
        "csv": buf.getvalue(),
    }
