import numpy as np
import pytest

from tangentdp.certification import Theorem, theorem_R
from tangentdp.estimators import estimate_R_T1, estimate_R_T3
from tangentdp.errors import MissingLaplacian
from tangentdp.instances import path_graph, random_instance
from tangentdp.mechanism import GibbsMechanism, RiskTable
from tangentdp.spaces import Distribution, FiniteSpace, build_laplacian, h1_norm


def constant_instance(c=0.42, n_w=3, n_x=5):
    W, X = FiniteSpace.range(n_w), FiniteSpace.range(n_x)
    m = GibbsMechanism(RiskTable(W, X, np.full((n_w, n_x), c)), 1.3)
    p = Distribution(X, np.full(n_x, 1 / n_x))
    return m, p, build_laplacian(path_graph(X), p)


def mean_gap(fn, exact, n, seeds):
    return float(np.mean([abs(fn(n, s).estimate - exact) for s in seeds]))


def test_single_output_is_exact():
    rng = np.random.default_rng(0)
    inst = random_instance(rng, n_w=1)
    m, p, L = inst.mechanism, inst.p, inst.laplacian
    for n in (1, 7, 1000):
        assert estimate_R_T1(m, p, n, seed=n).estimate == m.risk.r[0].max()
        assert estimate_R_T3(m, p, L, n, seed=n).estimate == h1_norm(m.risk.r[0], L)


def test_constant_risk():
    m, p, L = constant_instance()
    for n in (1, 10, 1000):
        assert estimate_R_T1(m, p, n, seed=1).estimate == 0.42
        assert estimate_R_T3(m, p, L, n, seed=1).estimate == 0.0


def test_constant_in_x_gives_zero_T3():
    W, X = FiniteSpace.range(3), FiniteSpace.range(4)
    r = np.repeat(np.array([[0.1], [0.5], [0.9]]), 4, axis=1)
    m = GibbsMechanism(RiskTable(W, X, r), 1.0)
    p = Distribution(X, np.full(4, 0.25))
    assert estimate_R_T3(m, p, build_laplacian(path_graph(X), p), 500, seed=3).estimate == 0.0


def test_determinism_and_recomputability():
    rng = np.random.default_rng(1)
    inst = random_instance(rng)
    a = estimate_R_T1(inst.mechanism, inst.p, 2000, seed=9)
    b = estimate_R_T1(inst.mechanism, inst.p, 2000, seed=9)
    assert a.to_dict() == b.to_dict()
    assert a.estimate == a.per_x_values.max()
    t3 = estimate_R_T3(inst.mechanism, inst.p, inst.laplacian, 2000, seed=9)
    assert t3.to_dict() == estimate_R_T3(inst.mechanism, inst.p, inst.laplacian, 2000, seed=9).to_dict()
    assert t3.estimate == pytest.approx(h1_norm(t3.per_x_values, inst.laplacian), rel=1e-12)


def test_T1_never_exceeds_max_risk():
    rng = np.random.default_rng(2)
    for s in range(20):
        inst = random_instance(rng)
        assert estimate_R_T1(inst.mechanism, inst.p, 50, seed=s).estimate <= inst.mechanism.risk.r.max()


def test_custom_gradient_oracle_matches_default():
    rng = np.random.default_rng(3)
    inst = random_instance(rng)
    g = inst.laplacian.graph
    r = inst.mechanism.risk.r
    custom = estimate_R_T3(inst.mechanism, inst.p, inst.laplacian, 300, seed=4, gradient_oracle=lambda w: g.gradient(r[w]))
    default = estimate_R_T3(inst.mechanism, inst.p, inst.laplacian, 300, seed=4)
    assert custom.estimate == default.estimate


def test_T3_requires_laplacian():
    rng = np.random.default_rng(4)
    inst = random_instance(rng)
    with pytest.raises(MissingLaplacian):
        estimate_R_T3(inst.mechanism, inst.p, None, 10, seed=0)


@pytest.mark.parametrize("target", ["T1", "T3"])
def test_monte_carlo_rate(target):
    rng = np.random.default_rng(5)
    inst = random_instance(rng, n_w=5, n_x=8, beta=1.0)
    m, p, L = inst.mechanism, inst.p, inst.laplacian
    if target == "T1":
        exact = theorem_R(m, p, Theorem.T1)
        fn = lambda n, s: estimate_R_T1(m, p, n, s)  # noqa: E731
    else:
        exact = theorem_R(m, p, Theorem.T3, L)
        fn = lambda n, s: estimate_R_T3(m, p, L, n, s)  # noqa: E731
    ns = [1_000, 10_000, 100_000]
    gaps = [mean_gap(fn, exact, n, range(16)) for n in ns]
    slope = np.polyfit(np.log(ns), np.log(gaps), 1)[0]
    assert slope == pytest.approx(-0.5, abs=0.2)
