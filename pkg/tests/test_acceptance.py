"""Exit criteria. Each test records one PASS/FAIL line, printed in the pytest summary."""
import json
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE_RESULTS
from oracles import random_search_sup
from tangentdp.certification import (
    NormPair,
    Theorem,
    certify,
    hm1_tv_interval,
    kernel_for,
    op_norm,
    theorem_R,
)
from tangentdp.cli import main
from tangentdp.estimators import estimate_R_T1, estimate_R_T3
from tangentdp.instances import random_connected_graph, random_instance, write_zero_one_fixture
from tangentdp.mechanism import GibbsMechanism, RiskTable, gibbs_output
from tangentdp.spaces import Distribution, FiniteSpace, TangentVector, build_laplacian, h1_norm, hm1_norm
from tangentdp.tangent import dA, dlogA, fd_validate

PAIRS = {"T1": "tv-tv", "T2": "tv-linf", "T3": "w2-tv", "T4": "w2-linf"}


def record(key, ok, detail):
    ACCEPTANCE_RESULTS[key] = (bool(ok), detail)
    return ok


# 1 ---------------------------------------------------------------------------

_DOMINANCE = {}


def _dominance_sweep():
    if _DOMINANCE:
        return _DOMINANCE
    rng = np.random.default_rng(20240101)
    start = time.perf_counter()
    worst = {t: -np.inf for t in PAIRS}
    violations = {t: 0 for t in PAIRS}
    n_inst = 200
    for _ in range(n_inst):
        inst = random_instance(rng, max_size=10)
        for theorem, name in PAIRS.items():
            cert = certify(inst.mechanism, inst.p, NormPair.from_name(name, inst.laplacian))
            excess = cert.exact_ambient - cert.bound
            worst[theorem] = max(worst[theorem], excess)
            violations[theorem] += excess > 1e-9
    _DOMINANCE.update(worst=worst, violations=violations, n=n_inst, seconds=time.perf_counter() - start)
    return _DOMINANCE


@pytest.mark.parametrize("theorem", list(PAIRS))
def test_c1_theorem_dominance(theorem):
    sweep = _dominance_sweep()
    v, worst = sweep["violations"][theorem], sweep["worst"][theorem]
    ok = v == 0 and sweep["seconds"] < 30
    record(
        f"C1 dominance {theorem} ({PAIRS[theorem]})",
        ok,
        f"{v}/{sweep['n']} instances with exact norm > 2*beta*R + 1e-9 "
        f"(max excess {worst:.3e}); sweep {sweep['seconds']:.1f}s",
    )
    assert sweep["seconds"] < 30
    assert v == 0, f"{theorem}: {v} of {sweep['n']} instances violate the bound (max excess {worst:.3e})"


# 2 ---------------------------------------------------------------------------

def test_c2_nonasymptotic_loo_bound(tmp_path):
    cfg = write_zero_one_fixture(tmp_path, n_points=20, beta=1.0, norm_pair="tv-linf")
    out = tmp_path / "loo.json"
    code = main(["loo", "--config", str(cfg), "--out", str(out)])
    report = json.loads(out.read_text())
    ratios = [r["sup_log_ratio"] for r in report["loo"]]
    ok = code == 0 and len(ratios) == 20 and all(x <= 0.2 + 1e-9 for x in ratios) and all(r["ok"] for r in report["loo"])
    record("C2 LOO bound (0/1 loss, N=20, beta=1)", ok, f"exit {code}, max sup|log q - log q'| = {max(ratios):.6f} <= 0.2")
    assert ok


# 3 ---------------------------------------------------------------------------

def test_c3_finite_difference_slopes():
    rng = np.random.default_rng(33)
    slopes = []
    for _ in range(20):
        n_w, n_x = int(rng.integers(2, 11)), int(rng.integers(2, 11))
        inst = random_instance(rng, n_w=n_w, n_x=n_x)
        w = 0.5 * inst.p.weights + 0.5 / n_x
        p = Distribution(inst.p.space, w)
        v = rng.normal(size=n_x)
        v -= v.mean()
        eps = TangentVector(p.space, v / np.abs(v).max())
        rep = fd_validate(inst.mechanism, p, eps, [1e-2, 5e-3, 2.5e-3])
        slopes += [rep.slope_A, rep.slope_log]
    ok = all(s is not None and abs(s - 2.0) <= 0.2 for s in slopes)
    record("C3 finite-difference slopes", ok, f"slopes in [{min(slopes):.3f}, {max(slopes):.3f}] over 20 instances")
    assert ok


# 4 ---------------------------------------------------------------------------

def test_c4_chain_rule_and_structure():
    rng = np.random.default_rng(44)
    chain, colsum = 0.0, 0.0
    for _ in range(100):
        inst = random_instance(rng)
        m, p = inst.mechanism, inst.p
        q = gibbs_output(m, p).weights
        a, lg = dA(m, p).table, dlogA(m, p).table
        chain = max(chain, float(np.abs(a - q[:, None] * lg).max()))
        colsum = max(colsum, float(np.abs(a.sum(axis=0)).max()))
    W, X = FiniteSpace.range(4), FiniteSpace.range(5)
    p = Distribution(X, rng.dirichlet(np.ones(5)))
    const = GibbsMechanism(RiskTable(W, X, np.full((4, 5), 0.8)), 1.9)
    zero_beta = GibbsMechanism(RiskTable(W, X, rng.uniform(size=(4, 5))), 0.0)
    zeros = all(np.all(k(mm, p).table == 0) for k in (dA, dlogA) for mm in (const, zero_beta))
    ok = chain <= 1e-12 and colsum <= 1e-10 and zeros
    record("C4 chain rule / structure", ok, f"max |dA - diag(q) dlogA| = {chain:.1e}, max |col sum| = {colsum:.1e}, exact zeros: {zeros}")
    assert ok


# 5 ---------------------------------------------------------------------------

def test_c5_norm_duality():
    rng = np.random.default_rng(55)
    worst_ratio, worst_eq = 0.0, 0.0
    count = 0
    while count < 1000:
        n = int(rng.integers(2, 9))
        space = FiniteSpace.range(n)
        L = build_laplacian(random_connected_graph(rng, space), Distribution(space, rng.dirichlet(np.ones(n))))
        for _ in range(20):
            g = rng.normal(size=n)
            eps = rng.normal(size=n)
            eps -= eps.mean()
            worst_ratio = max(worst_ratio, abs(g @ eps) / (h1_norm(g, L) * hm1_norm(eps, L)))
            e2 = L.matrix @ g
            lhs, rhs = abs(g @ e2), h1_norm(g, L) * hm1_norm(e2, L)
            worst_eq = max(worst_eq, abs(lhs - rhs) / rhs)
            count += 1
    ok = worst_ratio <= 1 + 1e-12 and worst_eq <= 1e-8
    record("C5 norm duality", ok, f"max |<g,e>|/(|g|_H1 |e|_H-1) = {worst_ratio:.12f}, equality rel. error {worst_eq:.1e} ({count} pairs)")
    assert ok


# 6 ---------------------------------------------------------------------------

@pytest.mark.parametrize("name", list(PAIRS.values()))
def test_c6_operator_norm_oracle(name):
    rng = np.random.default_rng(66)
    fractions = []
    exceeded = False
    for i in range(2):
        inst = random_instance(rng, n_w=6, n_x=6)
        pair = NormPair.from_name(name, inst.laplacian)
        k = kernel_for(inst.mechanism, inst.p, pair)
        _, reported = op_norm(k, pair)
        found = random_search_sup(k.table, pair.input.value, pair.output.value, inst.laplacian, count=200_000, seed=i)
        exceeded |= found > reported * (1 + 1e-9)
        fractions.append(found / reported)
    inside = True
    if name == "w2-tv":
        for n_w in (2, 8, 14, 20):
            inst = random_instance(rng, n_w=n_w, n_x=6)
            pair = NormPair.from_name(name, inst.laplacian)
            k = kernel_for(inst.mechanism, inst.p, pair)
            exact, _ = op_norm(k, pair)
            iv = hm1_tv_interval(k, inst.laplacian)
            inside &= iv.lower <= exact * (1 + 1e-12) and exact <= iv.upper * (1 + 1e-12)
    ok = not exceeded and min(fractions) >= 0.98 and inside
    extra = ", enumerated value inside interval for |W| in {2,8,14,20}" if name == "w2-tv" else ""
    record(f"C6 op-norm oracle {name}", ok, f"random-search/reported in [{min(fractions):.4f}, {max(fractions):.4f}]{extra}")
    assert ok


# 7 ---------------------------------------------------------------------------

@pytest.mark.parametrize("target", ["T1", "T3"])
def test_c7_estimator_consistency(target):
    start = time.perf_counter()
    inst = random_instance(np.random.default_rng(77), n_w=5, n_x=8, beta=1.0)
    m, p, L = inst.mechanism, inst.p, inst.laplacian
    if target == "T1":
        exact = theorem_R(m, p, Theorem.T1)
        est = lambda n, s: estimate_R_T1(m, p, n, s).estimate  # noqa: E731
    else:
        exact = theorem_R(m, p, Theorem.T3, L)
        est = lambda n, s: estimate_R_T3(m, p, L, n, s).estimate  # noqa: E731
    ns = [1_000, 10_000, 100_000]
    gaps = [np.mean([abs(est(n, seed) - exact) for seed in range(16)]) for n in ns]
    slope = float(np.polyfit(np.log(ns), np.log(gaps), 1)[0])
    seconds = time.perf_counter() - start
    ok = abs(slope + 0.5) <= 0.2 and seconds < 60
    record(f"C7 estimator consistency R_{target}", ok, f"log-log slope {slope:.3f} (mean |gap| over 16 seeds), {seconds:.1f}s")
    assert ok


# 8 ---------------------------------------------------------------------------

def test_c8_cli_determinism(tmp_path):
    cfg = write_zero_one_fixture(tmp_path)
    identical = {}
    for verb in ("certify", "loo", "estimate", "fdcheck"):
        for pair in ("tv-linf", "w2-tv"):
            outs = []
            for rep in range(2):
                out = tmp_path / f"{verb}-{pair}-{rep}.json"
                main([verb, "--config", str(cfg), "--norm-pair", pair, "--seed", "11", "--out", str(out)])
                outs.append(out.read_bytes())
            identical[(verb, pair)] = outs[0] == outs[1]
    ok = all(identical.values())
    record("C8 CLI determinism", ok, f"{sum(identical.values())}/{len(identical)} verb/pair runs byte-identical")
    assert ok
