#!/usr/bin/env python3
"""Marginal statistics of the triangle coupling on a small complete host:
per-hyperedge frequencies against Binomial(trials, a p^3), the chi-square
aggregate, failure rate, and bad-event incidence."""

import argparse
import json
import os

import numpy as np

from robustlab.coupling import CouplingParams, coupling_marginal_stats
from robustlab.graph import Graph

ap = argparse.ArgumentParser()
ap.add_argument("--n", type=int, default=6)
ap.add_argument("--p", type=float, default=0.5)
ap.add_argument("--a", type=float, default=2.0**-11)
ap.add_argument("--c", type=float, default=2.0**-9)
ap.add_argument("--trials", type=int, default=100_000)
ap.add_argument("--mode", choices=["exact", "montecarlo", "bound"], default="bound")
ap.add_argument("--seed", type=int, default=int(os.environ.get("ROBUSTLAB_SEED", 0)))
args = ap.parse_args()

u, v = np.triu_indices(args.n, k=1)
K = Graph(args.n, np.column_stack([u, v]).astype(np.int64))
params = CouplingParams(p=args.p, a=args.a, c=args.c, seed=args.seed, mode=args.mode)
rep = coupling_marginal_stats(K, params, args.trials)
rep = {k: (val.tolist() if isinstance(val, np.ndarray) else val) for k, val in rep.items()}
print(json.dumps(rep, sort_keys=True, indent=2))
