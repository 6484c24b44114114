"""Monte Carlo estimates of the risk functionals R_T1 and R_T3 from samples w ~ q."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import MissingLaplacian, SpaceMismatch, TangentDPError
from .mechanism import GibbsMechanism, _sample_indices, gibbs_output
from .spaces import Distribution, GraphLaplacian

GradientOracle = Callable[[int], np.ndarray]


class EstimateTarget(str, enum.Enum):
    R_T1 = "R_T1"
    R_T3 = "R_T3"


@dataclass(frozen=True, eq=False)
class EstimateReport:
    """Result of one seeded estimation run.

    ``per_x_values`` is the sample mean of ``r(w_i, x)``. For R_T1 the
    estimate is its maximum; for R_T3 ``per_edge_values`` holds the sample mean
    of the discrete gradient and the estimate is
    ``sqrt(sum_e weight_e * per_edge_values_e**2)``.
    """

    target: EstimateTarget
    estimate: float
    sample_count: int
    seed: int
    per_x_values: np.ndarray
    per_edge_values: np.ndarray | None = None

    def to_dict(self) -> dict:
        out = {
            "target": self.target.value,
            "estimate": self.estimate,
            "sample_count": self.sample_count,
            "seed": self.seed,
            "per_x_values": [float(v) for v in self.per_x_values],
        }
        if self.per_edge_values is not None:
            out["per_edge_values"] = [float(v) for v in self.per_edge_values]
        return out


def _sample_frequencies(m: GibbsMechanism, p: Distribution, n: int, seed: int) -> np.ndarray:
    if n < 1:
        raise TangentDPError("sample count must be at least 1")
    q = gibbs_output(m, p).weights
    idx = _sample_indices(q, n, seed)
    return np.bincount(idx, minlength=q.size) / n


def _mean_over_samples(freq: np.ndarray, rows: np.ndarray) -> np.ndarray:
    # Anchored on the first row so a w-independent table is reproduced exactly.
    return rows[0] + freq @ (rows - rows[0])


def estimate_R_T1(m: GibbsMechanism, p: Distribution, n: int, seed: int) -> EstimateReport:
    freq = _sample_frequencies(m, p, n, seed)
    per_x = _mean_over_samples(freq, m.risk.r)
    return EstimateReport(EstimateTarget.R_T1, float(per_x.max()), int(n), int(seed), per_x)


def estimate_R_T3(
    m: GibbsMechanism,
    p: Distribution,
    laplacian: GraphLaplacian | None,
    n: int,
    seed: int,
    gradient_oracle: GradientOracle | None = None,
) -> EstimateReport:
    """Estimate ``||sum_w q(w) r(w, .)||_{H1(p)}`` from ``n`` samples.

    ``gradient_oracle(w)`` returns the per-edge discrete gradient of
    ``r(w, .)``; by default ``(r(w, u) - r(w, v)) / length`` on the Laplacian's
    graph. The estimate squares a sample mean, so it is biased upward by
    O(1/n).
    """
    if laplacian is None:
        raise MissingLaplacian("R_T3 estimation needs a graph Laplacian")
    if laplacian.graph.space != m.X:
        raise SpaceMismatch("Laplacian is not over the mechanism's data space")
    r = m.risk.r
    if gradient_oracle is None:
        grads = laplacian.graph.gradient(r)
    else:
        grads = np.array([np.asarray(gradient_oracle(w), dtype=float) for w in range(m.W.size)])
    freq = _sample_frequencies(m, p, n, seed)
    per_edge = _mean_over_samples(freq, grads)
    per_x = _mean_over_samples(freq, r)
    estimate = float(np.sqrt(np.dot(laplacian.edge_weights, per_edge * per_edge)))
    return EstimateReport(EstimateTarget.R_T3, estimate, int(n), int(seed), per_x, per_edge)
