"""Finite spaces, distributions, tangent vectors and the norms used on them.

Norm conventions:

* ``tv_norm`` is the plain L1 norm. For a zero-sum vector it coincides with
  ``2 * max_S |eps(S)|``.
* ``h1_norm`` / ``hm1_norm`` are the graph discretization of the weighted
  Sobolev seminorm ``int |grad g|^2 p`` and its dual on zero-sum vectors.
  Edge ``(u, v)`` of length ``l`` carries weight ``(p(u) + p(v)) / 2`` and
  gradient ``(g(u) - g(v)) / l``.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    BadIndex,
    Disconnected,
    LengthMismatch,
    NegativeWeight,
    NotEmpirical,
    NotNormalized,
    NotZeroSum,
    SolverFailure,
    SpaceMismatch,
    TangentDPError,
    ZeroMass,
)

SIMPLEX_ATOL = 1e-12
SOLVER_RTOL = 1e-10
REFINEMENT_STEPS = 4


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class FiniteSpace:
    labels: tuple[str, ...]

    def __post_init__(self):
        labels = tuple(str(s) for s in self.labels)
        object.__setattr__(self, "labels", labels)
        if not labels:
            raise TangentDPError("a finite space needs at least one element")
        if len(set(labels)) != len(labels):
            raise TangentDPError("space labels must be unique")

    @classmethod
    def range(cls, n: int, prefix: str = "") -> "FiniteSpace":
        return cls(tuple(f"{prefix}{i}" for i in range(n)))

    @property
    def size(self) -> int:
        return len(self.labels)

    def __len__(self) -> int:
        return len(self.labels)

    @cached_property
    def _index(self) -> dict[str, int]:
        return {s: i for i, s in enumerate(self.labels)}

    def index(self, label: str) -> int:
        try:
            return self._index[str(label)]
        except KeyError:
            raise BadIndex(f"unknown label {label!r}") from None


def _check_same_space(a: FiniteSpace, b: FiniteSpace, what: str = "") -> None:
    if a != b:
        raise SpaceMismatch(f"space mismatch{': ' + what if what else ''}")


@dataclass(frozen=True, eq=False)
class Distribution:
    space: FiniteSpace
    weights: np.ndarray

    def __post_init__(self):
        w = _frozen(self.weights)
        object.__setattr__(self, "weights", w)
        if w.shape != (self.space.size,):
            raise LengthMismatch(f"expected {self.space.size} weights, got shape {w.shape}")
        if not np.all(np.isfinite(w)):
            raise TangentDPError("weights must be finite")
        if np.any(w < 0):
            raise NegativeWeight("distribution weights must be nonnegative")
        if abs(w.sum() - 1.0) > SIMPLEX_ATOL:
            raise NotNormalized(f"weights sum to {w.sum()!r}, not 1")

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.weights > 0)


@dataclass(frozen=True, eq=False)
class TangentVector:
    space: FiniteSpace
    values: np.ndarray

    def __post_init__(self):
        v = _frozen(self.values)
        object.__setattr__(self, "values", v)
        if v.shape != (self.space.size,):
            raise LengthMismatch(f"expected {self.space.size} values, got shape {v.shape}")
        if not np.all(np.isfinite(v)):
            raise TangentDPError("tangent values must be finite")
        if abs(v.sum()) > SIMPLEX_ATOL:
            raise NotZeroSum(f"tangent vector sums to {v.sum()!r}, not 0")

    def __mul__(self, c: float) -> "TangentVector":
        return TangentVector(self.space, self.values * float(c))

    __rmul__ = __mul__


def make_distribution(space: FiniteSpace, raw: Sequence[float]) -> Distribution:
    raw = np.asarray(raw, dtype=float)
    if raw.shape != (space.size,):
        raise LengthMismatch(f"expected {space.size} weights, got shape {raw.shape}")
    if np.any(raw < 0):
        raise NegativeWeight("raw weights must be nonnegative")
    total = raw.sum()
    if not total > 0:
        raise ZeroMass("all weights are zero")
    return Distribution(space, raw / total)


def tangent_between(p: Distribution, p_prime: Distribution) -> TangentVector:
    """The tangent direction ``p' - p``."""
    _check_same_space(p.space, p_prime.space)
    return TangentVector(p.space, p_prime.weights - p.weights)


def leave_one_out(p: Distribution, k: int) -> tuple[Distribution, TangentVector]:
    """Remove atom ``k`` from a uniform empirical distribution.

    Returns ``(p', eps)`` with ``eps = p' - p``.
    """
    w = p.weights
    support = p.support
    n_atoms = support.size
    if n_atoms < 2:
        raise NotEmpirical("leave-one-out needs at least two atoms")
    if not np.all(w[support] == w[support[0]]):
        raise NotEmpirical("distribution is not uniform on its support")
    if not 0 <= k < w.size:
        raise BadIndex(f"index {k} out of range for a space of size {w.size}")
    if w[k] == 0:
        raise BadIndex(f"index {k} carries no mass")
    new = np.zeros_like(w)
    new[support] = 1.0 / (n_atoms - 1)
    new[k] = 0.0
    p_prime = Distribution(p.space, new)
    # Build eps entrywise so the mass at k and at the survivors is exact.
    eps = np.zeros_like(w)
    eps[support] = 1.0 / (n_atoms - 1) - 1.0 / n_atoms
    eps[k] = -1.0 / n_atoms
    return p_prime, TangentVector(p.space, eps)


def tv_norm(eps: TangentVector | np.ndarray) -> float:
    values = eps.values if isinstance(eps, TangentVector) else np.asarray(eps, dtype=float)
    return float(np.abs(values).sum())


@dataclass(frozen=True, eq=False)
class MetricGraph:
    """Undirected graph on a finite space; edges are ``(u, v, length)`` index triples."""

    space: FiniteSpace
    edges: tuple[tuple[int, int, float], ...]

    def __post_init__(self):
        n = self.space.size
        clean = []
        seen = set()
        for e in self.edges:
            u, v, length = int(e[0]), int(e[1]), float(e[2])
            if not (0 <= u < n and 0 <= v < n):
                raise BadIndex(f"edge ({u}, {v}) references a vertex outside the space")
            if u == v:
                raise TangentDPError(f"self-loop at vertex {u}")
            if not (length > 0 and np.isfinite(length)):
                raise TangentDPError(f"edge ({u}, {v}) has nonpositive length {length}")
            key = (min(u, v), max(u, v))
            if key in seen:
                raise TangentDPError(f"duplicate edge {key}")
            seen.add(key)
            clean.append((u, v, length))
        object.__setattr__(self, "edges", tuple(clean))
        if not _is_connected(n, [(u, v) for u, v, _ in clean]):
            raise Disconnected("metric graph is not connected")

    @classmethod
    def from_labels(cls, space: FiniteSpace, edges: Iterable[tuple[str, str, float]]) -> "MetricGraph":
        return cls(space, tuple((space.index(u), space.index(v), float(l)) for u, v, l in edges))

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    @cached_property
    def heads(self) -> np.ndarray:
        return np.array([e[0] for e in self.edges], dtype=int)

    @cached_property
    def tails(self) -> np.ndarray:
        return np.array([e[1] for e in self.edges], dtype=int)

    @cached_property
    def lengths(self) -> np.ndarray:
        return np.array([e[2] for e in self.edges], dtype=float)

    def incidence(self) -> np.ndarray:
        """Edge-vertex incidence scaled by ``1/length`` (rows are edges)."""
        G = np.zeros((self.n_edges, self.space.size))
        rows = np.arange(self.n_edges)
        G[rows, self.heads] = 1.0 / self.lengths
        G[rows, self.tails] = -1.0 / self.lengths
        return G

    def gradient(self, g: np.ndarray) -> np.ndarray:
        """Per-edge discrete gradient ``(g(u) - g(v)) / length``; works row-wise on 2-D input."""
        g = np.asarray(g, dtype=float)
        return (g[..., self.heads] - g[..., self.tails]) / self.lengths


def _is_connected(n: int, pairs) -> bool:
    if n == 1:
        return True
    if not pairs:
        return False
    u, v = np.array(pairs, dtype=int).T
    adj = coo_matrix((np.ones(u.size), (u, v)), shape=(n, n))
    n_comp, _ = connected_components(adj, directed=False)
    return n_comp == 1


@dataclass(frozen=True, eq=False)
class GraphLaplacian:
    graph: MetricGraph
    base: Distribution
    matrix: np.ndarray
    edge_weights: np.ndarray

    @property
    def size(self) -> int:
        return self.graph.space.size

    @cached_property
    def _factor(self):
        n = self.size
        L = self.matrix
        # L + s*J/n is SPD when ker L = constants; on zero-sum vectors its
        # inverse coincides with the pseudo-inverse of L.
        scale = max(np.trace(L) / n, np.finfo(float).tiny)
        return scipy.linalg.cho_factor(L + scale / n * np.ones((n, n)))

    def solve(self, rhs: np.ndarray) -> np.ndarray:
        """Return ``L^+ rhs`` for a vector or a matrix of column vectors.

        The right-hand side is projected onto the zero-sum subspace first.
        """
        b = np.asarray(rhs, dtype=float)
        b = b - b.mean(axis=0)
        u = np.zeros_like(b)
        # Short edges make L ill-conditioned, and no double-precision u can push
        # |Lu - b| / |b| below eps * cond(L). Convergence is therefore judged by the
        # normwise backward error |Lu - b| / (|L| |u| + |b|).
        for _ in range(REFINEMENT_STEPS):
            u = u + scipy.linalg.cho_solve(self._factor, b - self.matrix @ u)
            u = u - u.mean(axis=0)
            resid = np.linalg.norm(self.matrix @ u - b, axis=0)
            denom = self._norm * np.linalg.norm(u, axis=0) + np.linalg.norm(b, axis=0)
            backward = resid / np.maximum(denom, np.finfo(float).tiny)
            if np.all(backward <= SOLVER_RTOL):
                break
        if np.any(backward > SOLVER_RTOL):
            raise SolverFailure(
                f"Laplacian solve backward error {float(np.max(backward)):.3e} "
                f"exceeds tolerance {SOLVER_RTOL}"
            )
        return u

    @cached_property
    def _norm(self) -> float:
        return float(np.linalg.norm(self.matrix, 2))

    @cached_property
    def pinv(self) -> np.ndarray:
        n = self.size
        P = np.eye(n) - 1.0 / n
        out = self.solve(P)
        out = 0.5 * (out + out.T)
        out.setflags(write=False)
        return out


def build_laplacian(graph: MetricGraph, p: Distribution) -> GraphLaplacian:
    _check_same_space(graph.space, p.space, "graph and distribution")
    w = p.weights
    edge_w = 0.5 * (w[graph.heads] + w[graph.tails])
    positive = [(u, v) for (u, v, _), we in zip(graph.edges, edge_w) if we > 0]
    if not _is_connected(graph.space.size, positive):
        raise Disconnected("the p-weighted graph is disconnected (edges between zero-mass vertices)")
    G = graph.incidence()
    L = G.T @ (edge_w[:, None] * G)
    L = 0.5 * (L + L.T)
    return GraphLaplacian(graph=graph, base=p, matrix=_frozen(L), edge_weights=_frozen(edge_w))


def h1_norm(g: np.ndarray, L: GraphLaplacian) -> float:
    """Weighted Sobolev seminorm ``sqrt(g^T L_p g)``, evaluated edge by edge."""
    g = np.asarray(g, dtype=float)
    if g.shape != (L.size,):
        raise LengthMismatch(f"expected a vector of length {L.size}, got shape {g.shape}")
    grad = L.graph.gradient(g)
    return float(np.sqrt(np.dot(L.edge_weights, grad * grad)))


def hm1_norm(eps: TangentVector | np.ndarray, L: GraphLaplacian) -> float:
    values = eps.values if isinstance(eps, TangentVector) else np.asarray(eps, dtype=float)
    if isinstance(eps, TangentVector):
        _check_same_space(eps.space, L.graph.space)
    if values.shape != (L.size,):
        raise LengthMismatch(f"expected a vector of length {L.size}, got shape {values.shape}")
    if not np.any(values):
        return 0.0
    u = L.solve(values)
    return float(np.sqrt(max(float(np.dot(values, u)), 0.0)))
