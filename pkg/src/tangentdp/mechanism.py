"""The entropically regularized risk minimizer ``A: p -> q`` on finite spaces.

``q(w) ∝ exp(-beta * sum_x r(w, x) p(x))`` is the minimizer over output
distributions of expected risk plus ``1/beta`` times negative entropy, i.e.
the exponential mechanism with utility ``-r``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import LengthMismatch, SpaceMismatch, TangentDPError
from .spaces import Distribution, FiniteSpace


@dataclass(frozen=True, eq=False)
class RiskTable:
    """Nonnegative risk ``r[w, x]``; rows index outputs W, columns index data X."""

    W: FiniteSpace
    X: FiniteSpace
    r: np.ndarray

    def __post_init__(self):
        r = np.array(self.r, dtype=float)
        if r.shape != (self.W.size, self.X.size):
            raise LengthMismatch(
                f"risk table has shape {r.shape}, expected ({self.W.size}, {self.X.size})"
            )
        if not np.all(np.isfinite(r)):
            raise TangentDPError("risk entries must be finite")
        if np.any(r < 0):
            raise TangentDPError("risk entries must be nonnegative")
        r.setflags(write=False)
        object.__setattr__(self, "r", r)


@dataclass(frozen=True)
class GibbsMechanism:
    risk: RiskTable
    beta: float

    def __post_init__(self):
        beta = float(self.beta)
        # beta = 0 (uniform output) is accepted as a limiting case.
        if not (np.isfinite(beta) and beta >= 0):
            raise TangentDPError(f"beta must be finite and nonnegative, got {self.beta!r}")
        object.__setattr__(self, "beta", beta)

    @property
    def W(self) -> FiniteSpace:
        return self.risk.W

    @property
    def X(self) -> FiniteSpace:
        return self.risk.X


def _check_data(m: GibbsMechanism, p: Distribution) -> None:
    if p.space != m.X:
        raise SpaceMismatch("distribution is not over the mechanism's data space")


def expected_risk(m: GibbsMechanism, p: Distribution) -> np.ndarray:
    _check_data(m, p)
    return m.risk.r @ p.weights


def log_output(m: GibbsMechanism, p: Distribution) -> np.ndarray:
    """``log q(w)``, normalized with a max-shifted log-sum-exp."""
    a = -m.beta * expected_risk(m, p)
    shift = a.max()
    return (a - shift) - np.log(np.exp(a - shift).sum())


def gibbs_output(m: GibbsMechanism, p: Distribution) -> Distribution:
    a = -m.beta * expected_risk(m, p)
    z = np.exp(a - a.max())
    return Distribution(m.W, z / z.sum())


def _sample_indices(q: np.ndarray, count: int, seed: int) -> np.ndarray:
    if count < 1:
        raise TangentDPError("sample count must be positive")
    cdf = np.cumsum(q)
    cdf[-1] = 1.0
    u = np.random.default_rng(seed).random(count)
    idx = np.searchsorted(cdf, u, side="right")
    return np.minimum(idx, q.size - 1)


def sample_output(m: GibbsMechanism, p: Distribution, count: int, seed: int) -> list[str]:
    """Draw ``count`` i.i.d. labels from ``gibbs_output(m, p)`` by inverse CDF."""
    q = gibbs_output(m, p).weights
    return [m.W.labels[i] for i in _sample_indices(q, count, seed)]


def zero_one_risk_table(
    points: Sequence[tuple[float, int]], thresholds: Sequence[float]
) -> RiskTable:
    """0/1 loss of 1-D threshold classifiers.

    For each threshold ``t`` there are two rows, in order: ``t<i>+`` predicts
    label 1 iff ``feature > t``; ``t<i>-`` predicts the complement. Columns
    follow the order of ``points``.
    """
    if len(points) == 0 or len(thresholds) == 0:
        raise TangentDPError("points and thresholds must be nonempty")
    features = np.array([float(f) for f, _ in points])
    labels = np.array([int(y) for _, y in points])
    if not np.all((labels == 0) | (labels == 1)):
        raise TangentDPError("labels must be 0 or 1")
    rows, names = [], []
    for i, t in enumerate(thresholds):
        above = (features > float(t)).astype(int)
        rows.append((above != labels).astype(float))
        rows.append(((1 - above) != labels).astype(float))
        names += [f"t{i}+", f"t{i}-"]
    X = FiniteSpace(tuple(f"x{j}" for j in range(len(points))))
    return RiskTable(FiniteSpace(tuple(names)), X, np.array(rows))
