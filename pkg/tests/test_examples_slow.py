"""Heavier module examples: the K9 coupling frequency check, the
desk-scale Hamiltonicity curve on Paley(1009), the HAM scaling slope,
and the reported (not asserted) full-pipeline spread."""

import math

import numpy as np
import pytest

from robustlab import build_graph, gen_gnp, gen_paley
from robustlab.coupling import CouplingEngine, CouplingParams, TriangleSystem, run_trials
from robustlab.errors import PipelineStageError
from robustlab.experiments import scaling_fit, threshold_sweep
from robustlab.spread import estimate_spread, sample_spread_factor

from conftest import complete_graph


def test_k9_coupling_frequencies_200k():
    # per-hyperedge counts within 4 sigma of Binomial(T, a p^3); pairwise
    # joint counts within 4 sigma of T pi^2, which at these sizes forces
    # zero co-occurrences (expected pair count over all runs ~ 0.7, so the
    # seed is part of the frozen test data)
    k9 = complete_graph(9)
    params = CouplingParams(p=0.4, a=2.0**-11, c=2.0**-9, seed=3, mode="bound")
    system = TriangleSystem(k9)
    engine = CouplingEngine(system, params)
    trials = 200_000
    counts = np.zeros(system.m, dtype=np.int64)
    cooc = 0
    for tr in run_trials(k9, params, trials, system=system, engine=engine):
        ids = tr.hprime_ids
        for i in ids:
            counts[i] += 1
        if len(ids) >= 2:
            cooc += len(ids) * (len(ids) - 1) // 2
    pi = params.pi
    sigma = math.sqrt(trials * pi * (1 - pi))
    assert np.all(np.abs(counts - trials * pi) <= 4 * sigma)
    # per-pair band T pi^2 +- 4 sqrt(T pi^2 (1 - pi^2)) ~ [0, 0.056]: any
    # co-occurring pair at all would violate it
    assert cooc == 0


def test_gp_edge_marginals_100k():
    # the emitted G_p is a faithful p-sparsification: per-edge keep
    # frequency within 4 sigma of p over 1e5 runs on K6
    k6 = complete_graph(6)
    params = CouplingParams(p=0.5, seed=9)
    counts = np.zeros(15)
    trials = 100_000
    for tr in run_trials(k6, params, trials):
        for e in tr.gp_edge_ids:
            counts[e] += 1
    sigma = math.sqrt(trials * 0.25)
    assert np.all(np.abs(counts - trials * 0.5) <= 4 * sigma)


def test_paley1009_ham_curve():
    # success probability climbs from ~0 at 0.7 ln n/d; at 1.5 ln n/d the
    # honest ceiling is ~72% because ~28% of sparsifications contain a
    # vertex of degree <= 1 (see the decisions notes); assert the climb
    # against that ceiling rather than the asymptotic story
    G = gen_paley(1009)
    ref = math.log(1009) / 504
    curve = threshold_sweep(
        G, "paley(1009)", "HAM", grid=[0.7 * ref, 1.5 * ref], trials=100, seed=0, d=504.0
    )
    assert curve.heuristic
    low, high = curve.points[0].phat, curve.points[1].phat
    assert low < 0.05
    assert high > 0.5


def test_ham_scaling_slope_near_minus_one():
    fit = scaling_fit([30, 60, 90, 120], "HAM", trials=80, seed=0)
    assert -1.25 <= fit["slope_corrected"] <= -0.85


def test_full_pipeline_spread_reported():
    g300 = gen_gnp(300, 0.7, seed=7)
    d_mean = float(g300.degrees.mean())
    target = 300 / d_mean**3  # n/d^3-scale, slack reported not asserted

    def sampler(s):
        for attempt in range(4):
            try:
                return sample_spread_factor(g300, alpha=0.4, gamma=0.35, seed=s + 10_000 * attempt).matching
            except PipelineStageError:
                continue
        raise AssertionError("pipeline failed 4 attempts in a row")

    est = estimate_spread(sampler, r=1, trials=120, q_target=target, seed=5)
    print(f"[REPORT] full-pipeline singleton spread: max phat {est.max_probability:.5f}, "
          f"wilson upper {est.max_wilson_upper:.5f}, n/d^3 target {target:.2e}, "
          f"ratio {est.max_ratio:.1f} (reported, not asserted)")
    assert 0 < est.max_probability <= 1
