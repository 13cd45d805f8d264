"""Command-line orchestration: generators, verifiers, the coupling, the
factor pipeline, and the Monte Carlo experiments.

Graphs travel as edge-list text ("n m" header, one "u v" line per edge),
matchings and factors as triple-list text, reports as JSON. --seed falls
back to ROBUSTLAB_SEED, default 0.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import experiments
from .coupling import CouplingParams, coupling_marginal_stats, run_trials, verify_coupling_embedding
from .errors import RobustLabError
from .generators import (
    SparsifyParams,
    gen_bipartite_biregular,
    gen_gnp,
    gen_paley,
    gen_random_regular,
    sparsify,
)
from .graph import Graph, parse_edge_list, write_edge_list
from .hypergraph import build_triangle_hypergraph, write_triple_list
from .mixing import check_bijumbled, check_mixing
from .rng import default_seed
from .spectral import second_eigenvalue
from .spread import (
    TriangleMatching,
    cover_down,
    estimate_spread,
    exact_triangle_factor,
    sample_almost_factor,
    sample_spread_factor,
    sample_vortex,
)
from .structure import check_c_expander, count_isolated, find_hamiltonian_cycle, max_matching


def _read_graph(path: str) -> Graph:
    text = sys.stdin.read() if path == "-" else open(path).read()
    return parse_edge_list(text)


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _matching_text(n: int, matching: TriangleMatching) -> str:
    lines = [f"{n} {len(matching.triples)}"]
    lines.extend(f"{a} {b} {c}" for a, b, c in matching.triples)
    return "\n".join(lines) + "\n"


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="robustlab")
    sub = ap.add_subparsers(dest="cmd", required=True)

    def add_seed(p):
        p.add_argument("--seed", type=int, default=None, help="master seed (env ROBUSTLAB_SEED, default 0)")

    def seed_of(args) -> int:
        return args.seed if args.seed is not None else default_seed()

    p = sub.add_parser("gen-regular", help="random d-regular host")
    p.add_argument("n", type=int)
    p.add_argument("d", type=int)
    p.add_argument("--out")
    add_seed(p)

    p = sub.add_parser("gen-paley", help="Paley graph on a prime q = 1 mod 4")
    p.add_argument("q", type=int)
    p.add_argument("--out")

    p = sub.add_parser("gen-gnp", help="binomial random graph")
    p.add_argument("n", type=int)
    p.add_argument("p", type=float)
    p.add_argument("--out")
    add_seed(p)

    p = sub.add_parser("gen-bipartite", help="random d-regular balanced bipartite host")
    p.add_argument("n", type=int)
    p.add_argument("d", type=int)
    p.add_argument("--out")
    add_seed(p)

    p = sub.add_parser("sparsify", help="keep each edge independently with probability p")
    p.add_argument("graph")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--out")
    add_seed(p)

    p = sub.add_parser("spectrum", help="second largest absolute adjacency eigenvalue")
    p.add_argument("graph")
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--method", choices=["auto", "dense", "iterative"], default="auto")

    p = sub.add_parser("mixing", help="expander mixing / bijumbledness slack report")
    p.add_argument("graph")
    p.add_argument("--d", type=float)
    p.add_argument("--lam", type=float)
    p.add_argument("--q", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--mode", choices=["exhaustive", "sampled"], default="exhaustive")
    p.add_argument("--k", type=int, default=10000)
    add_seed(p)

    p = sub.add_parser("check-expander", help="C-expander verification")
    p.add_argument("graph")
    p.add_argument("--C", type=float, required=True)
    p.add_argument("--mode", choices=["exact", "sampled"], default="exact")
    p.add_argument("--k", type=int, default=2000)
    add_seed(p)

    p = sub.add_parser("matching", help="maximum matching report")
    p.add_argument("graph")

    p = sub.add_parser("hamilton", help="Hamiltonian cycle search")
    p.add_argument("graph")
    p.add_argument("--budget", type=int, default=50)
    add_seed(p)

    p = sub.add_parser("triangles", help="triangle hypergraph stats")
    p.add_argument("graph")
    p.add_argument("--emit-triples")
    p.add_argument("--d", type=float, help="target degree for the hyperdegree band")
    p.add_argument("--eps", type=float, default=0.2)

    p = sub.add_parser("couple", help="sequential triangle coupling")
    p.add_argument("graph")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--a", type=float, default=2.0**-11)
    p.add_argument("--c", type=float, default=2.0**-9)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--mode", choices=["exact", "montecarlo", "bound"], default="bound")
    p.add_argument("--stats", action="store_true", help="aggregate marginal statistics")
    p.add_argument("--dump-transcript", help="write one element-event per line for trial 0")
    add_seed(p)

    p = sub.add_parser("almost-factor", help="greedy almost triangle factor")
    p.add_argument("graph")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--out")
    add_seed(p)

    p = sub.add_parser("vortex", help="nested random vertex subsets with audits")
    p.add_argument("graph")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--terminal-hi", type=float)
    p.add_argument("--retries", type=int, default=100)
    add_seed(p)

    p = sub.add_parser("coverdown", help="cover V minus U using few U-vertices")
    p.add_argument("graph")
    p.add_argument("--u", required=True, help="comma-separated vertex list")
    p.add_argument("--q", type=float, required=True)
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--c", type=float, default=0.4)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--out")
    add_seed(p)

    p = sub.add_parser("factor", help="triangle factor: full pipeline or exact solver")
    p.add_argument("graph")
    p.add_argument("--exact", action="store_true", help="exact solver only (n <= cap)")
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--gamma", type=float, default=0.35)
    p.add_argument("--out")
    add_seed(p)

    p = sub.add_parser("spread-estimate", help="empirical spread of a factor sampler")
    p.add_argument("graph")
    p.add_argument("--sampler", choices=["almost-factor", "spread-factor"], required=True)
    p.add_argument("--r", type=int, default=1)
    p.add_argument("--trials", type=int, default=10000)
    p.add_argument("--q-target", type=float, required=True)
    p.add_argument("--q", type=float, help="density parameter for almost-factor")
    p.add_argument("--eta", type=float, default=0.1)
    p.add_argument("--alpha", type=float, default=0.4)
    p.add_argument("--gamma", type=float, default=0.35)
    add_seed(p)

    p = sub.add_parser("threshold-sweep", help="Monte Carlo success curve over a p-grid")
    p.add_argument("graph")
    p.add_argument("--family", default="custom")
    p.add_argument("--property", choices=list(experiments.PROPERTIES), required=True)
    p.add_argument("--grid", help="comma-separated p values")
    p.add_argument("--bisect", type=float, help="bisect toward this success probability")
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", help="write curve CSV here")
    add_seed(p)

    p = sub.add_parser("moments", help="isolated/uncovered vertex moment formulas")
    p.add_argument("graph")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--uncovered", action="store_true")
    add_seed(p)

    p = sub.add_parser("events", help="robust-expander proof events on G_p")
    p.add_argument("graph")
    p.add_argument("--p", type=float, required=True)
    p.add_argument("--C", type=float, default=3.0)
    p.add_argument("--delta", type=float, default=0.25)
    p.add_argument("--eps", type=float, default=0.5)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--family", default="custom")
    p.add_argument("--csv")
    add_seed(p)

    p = sub.add_parser("scaling", help="log-log threshold scaling on complete hosts")
    p.add_argument("--n-list", required=True, help="comma-separated sizes")
    p.add_argument("--property", choices=list(experiments.PROPERTIES), default="TRIANGLE_FACTOR")
    p.add_argument("--trials", type=int, default=200)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv")
    add_seed(p)

    args = ap.parse_args(argv)
    try:
        return _dispatch(args, seed_of)
    except RobustLabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def _dispatch(args, seed_of) -> int:
    cmd = args.cmd
    if cmd == "gen-regular":
        _emit(write_edge_list(gen_random_regular(args.n, args.d, seed_of(args))), args.out)
    elif cmd == "gen-paley":
        _emit(write_edge_list(gen_paley(args.q)), args.out)
    elif cmd == "gen-gnp":
        _emit(write_edge_list(gen_gnp(args.n, args.p, seed_of(args))), args.out)
    elif cmd == "gen-bipartite":
        _emit(write_edge_list(gen_bipartite_biregular(args.n, args.d, seed_of(args))), args.out)
    elif cmd == "sparsify":
        G = _read_graph(args.graph)
        _emit(write_edge_list(sparsify(G, SparsifyParams(args.p, seed_of(args)))), args.out)
    elif cmd == "spectrum":
        rep = second_eigenvalue(_read_graph(args.graph), tol=args.tol, method=args.method)
        print(json.dumps(rep.to_json_dict(), sort_keys=True))
    elif cmd == "mixing":
        G = _read_graph(args.graph)
        if args.q is not None:
            if args.beta is None:
                raise SystemExit("--q needs --beta")
            rep = check_bijumbled(G, args.q, args.beta, mode=args.mode, k=args.k, seed=seed_of(args))
        else:
            d = args.d if args.d is not None else float(G.degrees.mean())
            lam = args.lam if args.lam is not None else second_eigenvalue(G).lam
            rep = check_mixing(G, d, lam, mode=args.mode, k=args.k, seed=seed_of(args))
        print(rep.to_json())
    elif cmd == "check-expander":
        rep = check_c_expander(_read_graph(args.graph), args.C, mode=args.mode, k=args.k, seed=seed_of(args))
        print(
            json.dumps(
                {
                    "C": rep.C,
                    "holds": rep.holds,
                    "verdict": rep.verdict,
                    "failing_kind": rep.failing_kind,
                    "witness": rep.witness,
                },
                sort_keys=True,
            )
        )
    elif cmd == "matching":
        G = _read_graph(args.graph)
        m = max_matching(G)
        print(
            json.dumps(
                {
                    "size": len(m),
                    "perfect": m.is_perfect(G.n),
                    "deficiency": G.n - 2 * len(m),
                    "edges": sorted(map(list, m.edges)),
                    "isolated_vertices": count_isolated(G),
                },
                sort_keys=True,
            )
        )
    elif cmd == "hamilton":
        res = find_hamiltonian_cycle(_read_graph(args.graph), budget=args.budget, seed=seed_of(args))
        print(
            json.dumps(
                {
                    "found": res.found,
                    "method": res.method,
                    "certified_absent": res.certified_absent,
                    "restarts": res.restarts,
                    "cycle": list(res.cycle),
                },
                sort_keys=True,
            )
        )
    elif cmd == "triangles":
        G = _read_graph(args.graph)
        H = build_triangle_hypergraph(G)
        if args.emit_triples:
            _emit(write_triple_list(H), args.emit_triples)
        deg = H.degrees
        out = {
            "n": H.n,
            "triangles": H.t,
            "min_hyperdegree": int(deg.min()) if H.n else 0,
            "max_hyperdegree": int(deg.max()) if H.n else 0,
        }
        if args.d is not None:
            from .hypergraph import triangle_degree_stats

            stats = triangle_degree_stats(H, args.d, args.eps)
            out["band"] = list(stats["band"])
            out["in_band"] = stats["in_band"]
        print(json.dumps(out, sort_keys=True))
    elif cmd == "couple":
        G = _read_graph(args.graph)
        params = CouplingParams(p=args.p, a=args.a, c=args.c, seed=seed_of(args), mode=args.mode)
        if args.stats:
            rep = coupling_marginal_stats(G, params, args.trials)
            rep = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in rep.items()}
            print(json.dumps(rep, sort_keys=True))
        else:
            first = True
            for tr in run_trials(G, params, args.trials, record_steps=bool(args.dump_transcript) or args.trials == 1):
                print(
                    json.dumps(
                        {
                            "hprime": [list(map(int, tr.triangles[i])) for i in tr.hprime_ids],
                            "failed": tr.failed,
                            "gp_edges": len(tr.gp_edge_ids),
                            "embedding_ok": verify_coupling_embedding(tr),
                        },
                        sort_keys=True,
                    )
                )
                if first and args.dump_transcript:
                    with open(args.dump_transcript, "w") as fh:
                        for s in tr.steps:
                            fh.write(
                                f"step {s.j} pi_j {s.pi_j!r} mode {s.mode} branch {s.branch} "
                                f"e_j_prime {','.join(map(str, s.e_j_prime)) or '-'} "
                                f"coin {s.coin!r} checked {s.checked} verdict {s.verdict} "
                                f"revealed {','.join(map(str, s.revealed_edges)) or '-'} "
                                f"refuted {s.refuted} in_hprime {s.in_hprime}\n"
                            )
                    first = False
    elif cmd == "almost-factor":
        G = _read_graph(args.graph)
        m = sample_almost_factor(G, q=args.q, eta=args.eta, seed=seed_of(args))
        _emit(_matching_text(G.n, m), args.out)
    elif cmd == "vortex":
        G = _read_graph(args.graph)
        vs = sample_vortex(
            G, args.alpha, args.gamma, seed=seed_of(args),
            max_retries=args.retries, terminal_hi=args.terminal_hi,
        )
        print(
            json.dumps(
                {
                    "sizes": [len(l) for l in vs.levels],
                    "rejections": vs.rejections,
                    "audits": list(vs.audits),
                    "window": list(vs.terminal_window),
                },
                sort_keys=True,
            )
        )
    elif cmd == "coverdown":
        G = _read_graph(args.graph)
        U = [int(x) for x in args.u.split(",")]
        res = cover_down(G, U, q=args.q, alpha=args.alpha, c=args.c, seed=seed_of(args), eps=args.eps)
        _emit(_matching_text(G.n, res.matching), args.out)
        print(
            json.dumps(
                {"covered_in_u": res.covered_in_u, "budget": res.budget, "branches": list(res.branches)},
                sort_keys=True,
            ),
            file=sys.stderr,
        )
    elif cmd == "factor":
        G = _read_graph(args.graph)
        if args.exact:
            m = exact_triangle_factor(G)
            if m is None:
                print(json.dumps({"factor": None, "certified_none": True}))
                return 1
            _emit(_matching_text(G.n, m), args.out)
        else:
            res = sample_spread_factor(G, alpha=args.alpha, gamma=args.gamma, seed=seed_of(args))
            _emit(_matching_text(G.n, res.matching), args.out)
    elif cmd == "spread-estimate":
        G = _read_graph(args.graph)
        if args.sampler == "almost-factor":
            q = args.q if args.q is not None else 2 * G.m / (G.n * (G.n - 1))
            sampler = lambda s: sample_almost_factor(G, q=q, eta=args.eta, seed=s)
        else:
            sampler = lambda s: sample_spread_factor(G, alpha=args.alpha, gamma=args.gamma, seed=s).matching
        est = estimate_spread(sampler, r=args.r, trials=args.trials, q_target=args.q_target, seed=seed_of(args))
        print(
            json.dumps(
                {
                    "r": est.r,
                    "trials": est.trials,
                    "max_probability": est.max_probability,
                    "max_wilson_upper": est.max_wilson_upper,
                    "q_target": est.q_target,
                    "max_ratio": est.max_ratio,
                    "histogram": {str(k): v for k, v in est.histogram.items()},
                },
                sort_keys=True,
            )
        )
    elif cmd == "threshold-sweep":
        G = _read_graph(args.graph)
        grid = [float(x) for x in args.grid.split(",")] if args.grid else None
        curve = experiments.threshold_sweep(
            G, args.family, args.property, grid=grid, trials=args.trials,
            seed=seed_of(args), jobs=args.jobs, bisect_target=args.bisect,
        )
        if args.csv:
            with open(args.csv, "w") as fh:
                fh.write(curve.to_csv())
        print(curve.to_json())
    elif cmd == "moments":
        G = _read_graph(args.graph)
        if args.uncovered:
            rep = experiments.uncovered_vertex_expectation(G, args.p, trials=args.trials, seed=seed_of(args))
            rep = {k: (v.tolist() if isinstance(v, np.ndarray) else v) for k, v in rep.items()}
            print(json.dumps(rep, sort_keys=True))
        else:
            rep = experiments.isolated_vertex_moments(G, args.p, trials=args.trials, seed=seed_of(args))
            print(
                json.dumps(
                    {
                        "expectation": rep.expectation,
                        "variance_bound": rep.variance_bound,
                        "mc_mean": rep.mc_mean,
                        "mc_std": rep.mc_std,
                        "trials": rep.trials,
                    },
                    sort_keys=True,
                )
            )
    elif cmd == "events":
        G = _read_graph(args.graph)
        rep = experiments.robust_expander_events(
            G, p=args.p, C=args.C, delta=args.delta,
            trials=args.trials, seed=seed_of(args), eps=args.eps,
        )
        if args.csv:
            with open(args.csv, "w") as fh:
                fh.write(
                    experiments.events_to_csv(
                        rep, args.family, G.n, float(G.degrees.mean()), args.C, args.delta, args.eps
                    )
                )
        print(json.dumps(rep, sort_keys=True))
    elif cmd == "scaling":
        n_list = [int(x) for x in args.n_list.split(",")]
        fit = experiments.scaling_fit(
            n_list, args.property, trials=args.trials, seed=seed_of(args), jobs=args.jobs
        )
        if args.csv:
            with open(args.csv, "w") as fh:
                fh.write(fit["csv"])
        print(
            json.dumps(
                {
                    "slope_raw": fit["slope_raw"],
                    "slope_corrected": fit["slope_corrected"],
                    "log_exponent": fit["log_exponent"],
                    "rows": [[n, ph, ref] for n, ph, ref in fit["rows"]],
                },
                sort_keys=True,
            )
        )
    else:
        raise SystemExit(f"unhandled command {cmd}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
