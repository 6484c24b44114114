"""Random and fixed problem instances shared by the experiment scripts and tests."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mechanism import GibbsMechanism, RiskTable, zero_one_risk_table
from .spaces import Distribution, FiniteSpace, GraphLaplacian, MetricGraph, build_laplacian


@dataclass(frozen=True, eq=False)
class Instance:
    mechanism: GibbsMechanism
    p: Distribution
    graph: MetricGraph
    laplacian: GraphLaplacian


def random_connected_graph(
    rng: np.random.Generator, space: FiniteSpace, extra_edge_prob: float = 0.3
) -> MetricGraph:
    """Random spanning tree plus independent extra edges; lengths in [0.5, 2]."""
    n = space.size
    order = rng.permutation(n)
    pairs = set()
    for i in range(1, n):
        j = order[rng.integers(0, i)]
        pairs.add((min(order[i], j), max(order[i], j)))
    for u in range(n):
        for v in range(u + 1, n):
            if (u, v) not in pairs and rng.random() < extra_edge_prob:
                pairs.add((u, v))
    edges = tuple((int(u), int(v), float(rng.uniform(0.5, 2.0))) for u, v in sorted(pairs))
    return MetricGraph(space, edges)


def random_instance(
    rng: np.random.Generator,
    n_w: int | None = None,
    n_x: int | None = None,
    beta: float | None = None,
    max_size: int = 10,
) -> Instance:
    """Risk entries uniform in [0, 1], p Dirichlet(1), beta uniform in (0, 2]."""
    n_w = int(rng.integers(1, max_size + 1)) if n_w is None else n_w
    n_x = int(rng.integers(2, max_size + 1)) if n_x is None else n_x
    beta = float(2.0 - rng.uniform(0.0, 2.0)) if beta is None else beta
    W, X = FiniteSpace.range(n_w, "w"), FiniteSpace.range(n_x, "x")
    risk = RiskTable(W, X, rng.uniform(0.0, 1.0, size=(n_w, n_x)))
    p = Distribution(X, rng.dirichlet(np.ones(n_x)))
    graph = random_connected_graph(rng, X)
    return Instance(GibbsMechanism(risk, beta), p, graph, build_laplacian(graph, p))


def zero_one_fixture(n_points: int = 20, seed: int = 7) -> tuple[RiskTable, list[tuple[float, int]]]:
    """Noisy 1-D classification data and the 0/1 loss of threshold classifiers.

    Features are sorted uniform draws on [0, 1]; labels follow ``feature > 0.5``
    with 20% flips. Thresholds sit at 0, 0.1, ..., 1.
    """
    rng = np.random.default_rng(seed)
    features = np.sort(rng.uniform(0.0, 1.0, n_points))
    labels = (features > 0.5).astype(int)
    flips = rng.random(n_points) < 0.2
    labels = np.where(flips, 1 - labels, labels)
    points = [(float(f), int(y)) for f, y in zip(features, labels)]
    thresholds = [i / 10 for i in range(11)]
    return zero_one_risk_table(points, thresholds), points


def path_graph(space: FiniteSpace, length: float = 1.0) -> MetricGraph:
    return MetricGraph(space, tuple((i, i + 1, length) for i in range(space.size - 1)))


def write_zero_one_fixture(directory, n_points: int = 20, seed: int = 7, beta: float = 1.0, norm_pair: str = "tv-linf"):
    """Write risk/data/graph CSVs and a config for the 0/1-loss fixture; return the config path.

    The graph is the path through the points in feature order, with edge
    length equal to the feature gap.
    """
    import json
    from pathlib import Path

    from .io import write_graph_csv, write_risk_csv

    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    risk, points = zero_one_fixture(n_points, seed)
    write_risk_csv(directory / "risk.csv", risk)
    (directory / "data.csv").write_text("label\n" + "".join(f"{x}\n" for x in risk.X.labels), encoding="utf-8")
    gaps = np.diff([f for f, _ in points])
    graph = MetricGraph(risk.X, tuple((i, i + 1, float(g)) for i, g in enumerate(gaps)))
    write_graph_csv(directory / "graph.csv", graph)
    config = {
        "risk_path": "risk.csv",
        "data_path": "data.csv",
        "graph_path": "graph.csv",
        "beta": beta,
        "norm_pair": norm_pair,
        "loo_indices": "all",
        "samples": 10000,
        "seed": 0,
    }
    path = directory / "config.json"
    path.write_text(json.dumps(config, indent=2) + "\n", encoding="utf-8")
    return path
