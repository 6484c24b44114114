"""Induced operator norms of the tangent maps and the ``2 beta R`` certificates.

Four norm pairs are supported, each bound to one risk functional ``R``:

=========  ========  ======  ====================================
pair       kernel    R       R computed as
=========  ========  ======  ====================================
TV -> TV   DA        T1      max_x sum_w q(w) r(w, x)
TV -> Linf DlogA     T2      max_{w,x} r(w, x)
H-1 -> TV  DA        T3      ||sum_w q(w) r(w, .)||_{H1(p)}
H-1 -> Linf DlogA    T4      max_w ||r(w, .)||_{H1(p)}
=========  ========  ======  ====================================

``op_norm`` returns the ambient norm (supremum over all signed inputs) and the
tangent-restricted one (zero-sum inputs only). For an H-1 input both coincide
because the H-1 norm is only finite on zero-sum vectors. The dual of the H-1
norm is the H1 seminorm, so the H-1 -> Linf norm is the largest H1 seminorm of
a kernel row, and the H-1 -> TV norm is ``max_s sqrt(s^T M L M^T s)`` over sign
vectors ``s``.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Union

import numpy as np

from .errors import MissingLaplacian, SpaceMismatch, TangentDPError
from .mechanism import GibbsMechanism, gibbs_output
from .spaces import Distribution, GraphLaplacian, h1_norm
from .tangent import KernelKind, TangentMapKernel, dA, dlogA

DOMINANCE_ATOL = 1e-9
ENUMERATION_LIMIT = 20
RANDOM_SIGN_DRAWS = 1024


class InputNorm(str, enum.Enum):
    TV = "TV"
    HM1 = "HM1"


class OutputNorm(str, enum.Enum):
    TV = "TV"
    LINF = "LINF"


class Theorem(str, enum.Enum):
    T1 = "T1"
    T2 = "T2"
    T3 = "T3"
    T4 = "T4"


PAIR_NAMES = {
    "tv-tv": (InputNorm.TV, OutputNorm.TV),
    "tv-linf": (InputNorm.TV, OutputNorm.LINF),
    "w2-tv": (InputNorm.HM1, OutputNorm.TV),
    "w2-linf": (InputNorm.HM1, OutputNorm.LINF),
}


@dataclass(frozen=True)
class Interval:
    lower: float
    upper: float

    def to_dict(self) -> dict:
        return {"lower": self.lower, "upper": self.upper}


Norm = Union[float, Interval]


def _upper(x: Norm) -> float:
    return x.upper if isinstance(x, Interval) else x


@dataclass(frozen=True, eq=False)
class NormPair:
    input: InputNorm
    output: OutputNorm
    laplacian: GraphLaplacian | None = None

    def __post_init__(self):
        object.__setattr__(self, "input", InputNorm(self.input))
        object.__setattr__(self, "output", OutputNorm(self.output))
        if self.input is InputNorm.HM1 and self.laplacian is None:
            raise MissingLaplacian("an H-1 input norm needs a graph Laplacian")
        if self.input is InputNorm.TV and self.laplacian is not None:
            raise TangentDPError("a Laplacian is only meaningful for an H-1 input norm")

    @classmethod
    def from_name(cls, name: str, laplacian: GraphLaplacian | None = None) -> "NormPair":
        try:
            inp, out = PAIR_NAMES[name]
        except KeyError:
            raise TangentDPError(f"unknown norm pair {name!r}; expected one of {sorted(PAIR_NAMES)}") from None
        return cls(inp, out, laplacian if inp is InputNorm.HM1 else None)

    @property
    def name(self) -> str:
        return {v: k for k, v in PAIR_NAMES.items()}[(self.input, self.output)]

    @property
    def theorem(self) -> Theorem:
        return {
            (InputNorm.TV, OutputNorm.TV): Theorem.T1,
            (InputNorm.TV, OutputNorm.LINF): Theorem.T2,
            (InputNorm.HM1, OutputNorm.TV): Theorem.T3,
            (InputNorm.HM1, OutputNorm.LINF): Theorem.T4,
        }[(self.input, self.output)]

    @property
    def kernel_kind(self) -> KernelKind:
        return KernelKind.DLOGA if self.output is OutputNorm.LINF else KernelKind.DA


def _row_h1_norms(M: np.ndarray, L: GraphLaplacian) -> np.ndarray:
    grad = L.graph.gradient(M)
    return np.sqrt((grad * grad) @ L.edge_weights)


def _sign_gram(M: np.ndarray, L: GraphLaplacian) -> np.ndarray:
    grad = L.graph.gradient(M)  # |W| x |E|
    return (grad * L.edge_weights) @ grad.T


def max_sign_quadratic(K: np.ndarray, chunk: int = 1 << 15) -> float:
    """Exact ``max_{s in {+-1}^n} s^T K s`` by enumeration (first sign fixed to +1)."""
    n = K.shape[0]
    if n == 1:
        return float(K[0, 0])
    best = -np.inf
    total = 1 << (n - 1)
    bits = np.arange(n - 1)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total))
        S = np.ones((codes.size, n))
        S[:, 1:] = 1.0 - 2.0 * ((codes[:, None] >> bits) & 1)
        vals = np.einsum("ij,jk,ik->i", S, K, S)
        best = max(best, float(vals.max()))
    return best


def random_sign_quadratic(K: np.ndarray, draws: int = RANDOM_SIGN_DRAWS, seed: int = 0) -> float:
    """Lower bound on ``max_s s^T K s`` from random signs refined by ``s <- sign(K s)``.

    For PSD ``K`` each refinement step never decreases the objective.
    """
    rng = np.random.default_rng(seed)
    S = rng.choice([-1.0, 1.0], size=(draws, K.shape[0]))
    for _ in range(K.shape[0]):
        KS = S @ K
        nxt = np.where(KS >= 0, 1.0, -1.0)
        if np.array_equal(nxt, S):
            break
        S = nxt
    return float(np.einsum("ij,jk,ik->i", S, K, S).max())


def op_norm(k: TangentMapKernel, pair: NormPair) -> tuple[Norm, Norm]:
    """Return ``(ambient, tangent_restricted)`` induced norms of a kernel."""
    M = k.table
    if pair.input is InputNorm.TV:
        if pair.output is OutputNorm.TV:
            ambient = float(np.abs(M).sum(axis=0).max())
            # extreme points of the zero-sum unit ball are (e_x - e_x')/2
            diffs = np.abs(M[:, :, None] - M[:, None, :]).sum(axis=0)
            tangent = 0.5 * float(diffs.max())
        else:
            ambient = float(np.abs(M).max())
            tangent = 0.5 * float((M.max(axis=1) - M.min(axis=1)).max())
        return ambient, tangent

    L = pair.laplacian
    if L.graph.space != k.mechanism.X:
        raise SpaceMismatch("Laplacian is not over the mechanism's data space")
    if pair.output is OutputNorm.LINF:
        value = float(_row_h1_norms(M, L).max())
        return value, value
    if M.shape[0] <= ENUMERATION_LIMIT:
        value = float(np.sqrt(max(max_sign_quadratic(_sign_gram(M, L)), 0.0)))
        return value, value
    interval = hm1_tv_interval(k, L)
    return interval, interval


def hm1_tv_interval(k: TangentMapKernel, L: GraphLaplacian) -> Interval:
    """The randomized/triangle-inequality bracket used for large ``|W|``."""
    K = _sign_gram(k.table, L)
    lower = float(np.sqrt(max(random_sign_quadratic(K), 0.0)))
    return Interval(lower, float(_row_h1_norms(k.table, L).sum()))


def theorem_R(
    m: GibbsMechanism,
    p: Distribution,
    theorem: Theorem | str,
    laplacian: GraphLaplacian | None = None,
) -> float:
    """Smallest ``R`` meeting the hypothesis of the given theorem at ``(m, p)``."""
    theorem = Theorem(theorem)
    r = m.risk.r
    if theorem is Theorem.T2:
        return float(r.max())
    q = gibbs_output(m, p).weights
    if theorem is Theorem.T1:
        return float((r[0] + q @ (r - r[0])).max())
    if laplacian is None:
        raise MissingLaplacian(f"{theorem.value} needs a graph Laplacian")
    if laplacian.graph.space != m.X:
        raise SpaceMismatch("Laplacian is not over the mechanism's data space")
    if theorem is Theorem.T3:
        return h1_norm(r[0] + q @ (r - r[0]), laplacian)
    return float(_row_h1_norms(r, laplacian).max())


def t3_sound_R(m: GibbsMechanism, p: Distribution, laplacian: GraphLaplacian) -> float:
    """``sum_w q(w) ||r(w, .)||_{H1(p)}``, a constant for which ``2 beta R`` does
    bound the H-1 -> TV norm of DA (triangle inequality over ``w``)."""
    q = gibbs_output(m, p).weights
    return float(q @ _row_h1_norms(m.risk.r, laplacian))


@dataclass(frozen=True)
class Certificate:
    theorem: Theorem
    pair: str
    beta: float
    R: float
    bound: float
    exact_ambient: Norm
    exact_tangent: Norm
    satisfied: bool
    sound_bound: float

    def to_dict(self) -> dict:
        def norm(x):
            return x.to_dict() if isinstance(x, Interval) else x

        return {
            "theorem": self.theorem.value,
            "pair": self.pair,
            "beta": self.beta,
            "r": self.R,
            "bound": self.bound,
            "exact_ambient": norm(self.exact_ambient),
            "exact_tangent": norm(self.exact_tangent),
            "satisfied": self.satisfied,
            "sound_bound": self.sound_bound,
        }


def kernel_for(m: GibbsMechanism, p: Distribution, pair: NormPair) -> TangentMapKernel:
    return dlogA(m, p) if pair.kernel_kind is KernelKind.DLOGA else dA(m, p)


def certify(m: GibbsMechanism, p: Distribution, pair: NormPair) -> Certificate:
    """Compare the exact induced norm with the theorem's ``2 beta R``.

    ``satisfied`` uses the upper end of an interval, so it is only set when
    the bound is actually established. ``sound_bound`` equals ``bound`` except
    for T3, where it uses ``t3_sound_R``.
    """
    theorem = pair.theorem
    R = theorem_R(m, p, theorem, pair.laplacian)
    bound = 2.0 * m.beta * R
    ambient, tangent = op_norm(kernel_for(m, p, pair), pair)
    satisfied = _upper(ambient) <= bound + DOMINANCE_ATOL
    sound = 2.0 * m.beta * t3_sound_R(m, p, pair.laplacian) if theorem is Theorem.T3 else bound
    return Certificate(theorem, pair.name, m.beta, R, bound, ambient, tangent, bool(satisfied), sound)
