"""Differentials of ``A`` and ``log A`` at a data distribution, plus Taylor checks.

In matrix form (rows W, columns X)::

    DA_p      = -beta (diag(q) - q q^T) r
    D(log A)_p = -beta (I - 1 q^T) r

Both operators annihilate anything constant in ``w``, so ``r`` is first
re-centred on its first row; this keeps the kernels exactly zero when the risk
does not depend on ``w``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SpaceMismatch, StepTooLarge
from .mechanism import GibbsMechanism, gibbs_output, log_output
from .spaces import SIMPLEX_ATOL, Distribution, TangentVector


class KernelKind(str, enum.Enum):
    DA = "DA"
    DLOGA = "DLOGA"


@dataclass(frozen=True, eq=False)
class TangentMapKernel:
    kind: KernelKind
    table: np.ndarray
    mechanism: GibbsMechanism
    base: Distribution


def _log_kernel_table(m: GibbsMechanism, q: np.ndarray) -> np.ndarray:
    r = m.risk.r
    centred = r - r[0]
    table = -m.beta * (centred - q @ centred)
    return table + 0.0  # no negative zeros


def dlogA(m: GibbsMechanism, p: Distribution) -> TangentMapKernel:
    q = gibbs_output(m, p).weights
    table = _log_kernel_table(m, q)
    table.setflags(write=False)
    return TangentMapKernel(KernelKind.DLOGA, table, m, p)


def dA(m: GibbsMechanism, p: Distribution) -> TangentMapKernel:
    q = gibbs_output(m, p).weights
    table = q[:, None] * _log_kernel_table(m, q) + 0.0
    table.setflags(write=False)
    return TangentMapKernel(KernelKind.DA, table, m, p)


def apply(k: TangentMapKernel, eps: TangentVector) -> np.ndarray:
    if eps.space != k.mechanism.X:
        raise SpaceMismatch("tangent vector is not over the mechanism's data space")
    return k.table @ eps.values


def _perturbed(p: Distribution, eps: TangentVector, h: float) -> Distribution:
    w = p.weights + h * eps.values
    if np.any(w < -SIMPLEX_ATOL):
        raise StepTooLarge(h)
    return Distribution(p.space, np.clip(w, 0.0, None))


def max_feasible_step(p: Distribution, eps: TangentVector) -> float:
    """Largest ``h`` with ``p + h*eps`` still nonnegative."""
    neg = eps.values < 0
    if not np.any(neg):
        return math.inf
    return float(np.min(p.weights[neg] / -eps.values[neg]))


def loglog_slope(steps: Sequence[float], errors: Sequence[float]) -> float | None:
    """Least-squares slope of log(error) against log(step); None if any error is 0."""
    e = np.asarray(errors, dtype=float)
    if e.size < 2 or np.any(e <= 0):
        return None
    return float(np.polyfit(np.log(np.asarray(steps, dtype=float)), np.log(e), 1)[0])


@dataclass
class FDReport:
    steps: list[float]
    err_A: list[float]
    err_log: list[float]
    slope_A: float | None = None
    slope_log: float | None = None
    min_slope: float = field(default=1.8, repr=False)

    @property
    def passed(self) -> bool:
        # A slope is undefined only when the remainder vanishes identically,
        # which is a pass (e.g. beta = 0 or eps = 0).
        ok = True
        for slope, errs in ((self.slope_A, self.err_A), (self.slope_log, self.err_log)):
            if slope is None:
                ok &= all(e == 0 for e in errs)
            else:
                ok &= slope >= self.min_slope
        return ok

    def to_dict(self) -> dict:
        return {
            "steps": list(self.steps),
            "err_a": list(self.err_A),
            "err_log": list(self.err_log),
            "slope_a": self.slope_A,
            "slope_log": self.slope_log,
            "passed": self.passed,
        }


def fd_validate(
    m: GibbsMechanism, p: Distribution, eps: TangentVector, steps: Sequence[float]
) -> FDReport:
    """Taylor-remainder check of both linearizations along ``eps``.

    For each ``h``::

        e_A(h)   = || A(p + h eps) - A(p) - h DA eps ||_1
        e_log(h) = || log A(p + h eps) - log A(p) - h DlogA eps ||_inf

    Both are second order in ``h`` when the differentials are right.
    """
    steps = [float(h) for h in steps]
    for h in steps:
        if not h > 0:
            raise StepTooLarge(h, f"step h={h!r} must be positive")
        if h > max_feasible_step(p, eps) * (1 + 1e-12):
            raise StepTooLarge(h)
    q0 = gibbs_output(m, p).weights
    lq0 = log_output(m, p)
    lin_A = apply(dA(m, p), eps)
    lin_log = apply(dlogA(m, p), eps)
    err_A, err_log = [], []
    for h in steps:
        ph = _perturbed(p, eps, h)
        err_A.append(float(np.abs(gibbs_output(m, ph).weights - q0 - h * lin_A).sum()))
        err_log.append(float(np.abs(log_output(m, ph) - lq0 - h * lin_log).max()))
    return FDReport(steps, err_A, err_log, loglog_slope(steps, err_A), loglog_slope(steps, err_log))
