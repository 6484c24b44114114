"""Audit runs behind the command line: certify, loo, estimate, fdcheck.

Every ``run_*`` function takes an :class:`AuditConfig` and returns
``(report, exit_code)`` where ``report`` is a plain dict of the form
``{"meta": ..., "certificate": ..., "loo": ..., "estimate": ..., "fdcheck": ...}``
(only the sections relevant to the verb are present).
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any

import numpy as np

from . import __version__
from .certification import NormPair, OutputNorm, Theorem, certify, kernel_for, theorem_R
from .errors import ConfigError, MissingGraph, ParseError
from .estimators import estimate_R_T1, estimate_R_T3
from .io import file_digest, read_distribution_csv, read_graph_csv, read_risk_csv
from .mechanism import GibbsMechanism, gibbs_output, log_output
from .spaces import Distribution, GraphLaplacian, build_laplacian, hm1_norm, leave_one_out, tv_norm
from .tangent import apply, fd_validate

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_VIOLATION = 3
EXIT_IO = 4

NORM_PAIRS = ("tv-tv", "tv-linf", "w2-tv", "w2-linf")
DEFAULT_FD_STEPS = (1e-2, 5e-3, 2.5e-3)
TV_LINF_SLACK = 1e-9
FD_MIN_SLOPE = 1.8


@dataclass(frozen=True)
class AuditConfig:
    risk_path: Path
    data_path: Path
    beta: float
    norm_pair: str = "tv-linf"
    graph_path: Path | None = None
    loo_indices: Any = "all"
    samples: int = 10_000
    seed: int = 0
    output_path: Path | None = None
    fd_steps: tuple[float, ...] = DEFAULT_FD_STEPS
    estimate_target: str | None = None
    # Paths exactly as written in the config, used in report provenance.
    display_paths: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        try:
            beta = float(self.beta)
        except (TypeError, ValueError):
            raise ConfigError(f"beta must be a number, got {self.beta!r}") from None
        if not (np.isfinite(beta) and beta > 0):
            raise ConfigError(f"beta must be > 0, got {self.beta!r}")
        object.__setattr__(self, "beta", beta)
        if self.norm_pair not in NORM_PAIRS:
            raise ConfigError(f"norm_pair must be one of {', '.join(NORM_PAIRS)}; got {self.norm_pair!r}")
        if self.norm_pair.startswith("w2") and self.graph_path is None:
            raise MissingGraph(f"norm pair {self.norm_pair} needs graph_path")
        if int(self.samples) < 1:
            raise ConfigError("samples must be >= 1")
        if self.loo_indices != "all" and not isinstance(self.loo_indices, (list, tuple)):
            raise ConfigError("loo_indices must be 'all' or a list")
        if not self.fd_steps:
            raise ConfigError("fd_steps must be nonempty")
        if self.estimate_target not in (None, "T1", "T3"):
            raise ConfigError("estimate_target must be 'T1' or 'T3'")

    @classmethod
    def from_dict(cls, raw: dict, base_dir: Path | str = ".") -> "AuditConfig":
        base_dir = Path(base_dir)
        known = {f for f in cls.__dataclass_fields__ if f != "display_paths"}
        unknown = set(raw) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {', '.join(sorted(unknown))}")
        for key in ("risk_path", "data_path", "beta"):
            if key not in raw:
                raise ConfigError(f"config is missing {key!r}")
        kw = dict(raw)
        display = {}
        for key in ("risk_path", "data_path", "graph_path", "output_path"):
            if kw.get(key) is not None:
                display[key] = str(kw[key])
                kw[key] = base_dir / kw[key]
        if "fd_steps" in kw:
            kw["fd_steps"] = tuple(float(h) for h in kw["fd_steps"])
        if "seed" in kw:
            kw["seed"] = int(kw["seed"])
        if "samples" in kw:
            kw["samples"] = int(kw["samples"])
        return cls(display_paths=display, **kw)

    @classmethod
    def load(cls, path) -> "AuditConfig":
        path = Path(path)
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise ParseError(path, None, f"cannot read config: {exc.strerror or exc}") from exc
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.lineno, f"invalid JSON: {exc.msg}") from exc
        if not isinstance(raw, dict):
            raise ConfigError("config must be a JSON object")
        return cls.from_dict(raw, path.parent)

    def with_overrides(self, **overrides) -> "AuditConfig":
        overrides = {k: v for k, v in overrides.items() if v is not None}
        return replace(self, **overrides) if overrides else self


@dataclass
class AuditContext:
    config: AuditConfig
    mechanism: GibbsMechanism
    p: Distribution
    laplacian: GraphLaplacian | None

    @property
    def pair(self) -> NormPair:
        return NormPair.from_name(self.config.norm_pair, self.laplacian)


def load_context(config: AuditConfig) -> AuditContext:
    risk = read_risk_csv(config.risk_path)
    p = read_distribution_csv(config.data_path, risk.X)
    laplacian = None
    if config.graph_path is not None:
        laplacian = build_laplacian(read_graph_csv(config.graph_path, risk.X), p)
    return AuditContext(config, GibbsMechanism(risk, config.beta), p, laplacian)


def _meta(ctx: AuditContext, verb: str) -> dict:
    cfg = ctx.config
    inputs = {}
    for key, path in (("risk", cfg.risk_path), ("data", cfg.data_path), ("graph", cfg.graph_path)):
        if path is not None:
            shown = cfg.display_paths.get(f"{key}_path", str(path))
            inputs[key] = {"path": shown, "sha256": file_digest(path)}
    return {
        "tool": "tangentdp",
        "version": __version__,
        "verb": verb,
        "beta": cfg.beta,
        "norm_pair": cfg.norm_pair,
        "seed": cfg.seed,
        "inputs": inputs,
    }


def _loo_indices(ctx: AuditContext) -> list[int]:
    chosen = ctx.config.loo_indices
    if chosen == "all":
        return [int(i) for i in ctx.p.support]
    out = []
    for item in chosen:
        out.append(ctx.mechanism.X.index(item) if isinstance(item, str) else int(item))
    return sorted(set(out))


def run_certify(config: AuditConfig) -> tuple[dict, int]:
    ctx = load_context(config)
    cert = certify(ctx.mechanism, ctx.p, ctx.pair)
    report = {"meta": _meta(ctx, "certify"), "certificate": cert.to_dict()}
    return report, EXIT_OK if cert.satisfied else EXIT_VIOLATION


@dataclass(frozen=True)
class LooRecord:
    k: int
    label: str
    tv_dist: float
    hm1_dist: float | None
    sup_log_ratio: float
    output_dist: float
    linear_pred: float
    bound_rhs: float
    slack: float
    ok: bool

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def loo_record(ctx: AuditContext, k: int, bound: float) -> LooRecord:
    """Exact and linearized output change when atom ``k`` is removed.

    ``output_dist`` is measured in the pair's output norm: the sup log-ratio
    for ``*-linf`` pairs and ``||q - q'||_1`` for ``*-tv`` pairs. For tv-linf
    the bound holds along the whole segment from p to p' (its R does not depend
    on p), so only rounding slack is allowed; for the other pairs the slack is
    the measured gap between the exact change and its linear prediction.
    """
    m, p, pair = ctx.mechanism, ctx.p, ctx.pair
    p_prime, eps = leave_one_out(p, k)
    tv = tv_norm(eps)
    hm1 = hm1_norm(eps, ctx.laplacian) if ctx.laplacian is not None else None
    sup_log = float(np.abs(log_output(m, p) - log_output(m, p_prime)).max())
    lin = apply(kernel_for(m, p, pair), eps)
    if pair.output is OutputNorm.LINF:
        output_dist, linear_pred = sup_log, float(np.abs(lin).max())
    else:
        diff = gibbs_output(m, p).weights - gibbs_output(m, p_prime).weights
        output_dist, linear_pred = float(np.abs(diff).sum()), float(np.abs(lin).sum())
    dist = hm1 if config_uses_hm1(ctx.config) else tv
    bound_rhs = bound * dist
    if ctx.config.norm_pair == "tv-linf":
        slack = TV_LINF_SLACK
    else:
        slack = abs(output_dist - linear_pred) + TV_LINF_SLACK
    ok = output_dist <= bound_rhs + slack
    return LooRecord(k, m.X.labels[k], tv, hm1, sup_log, output_dist, linear_pred, bound_rhs, slack, bool(ok))


def config_uses_hm1(config: AuditConfig) -> bool:
    return config.norm_pair.startswith("w2")


def run_loo(config: AuditConfig) -> tuple[dict, int]:
    ctx = load_context(config)
    cert = certify(ctx.mechanism, ctx.p, ctx.pair)
    records = [loo_record(ctx, k, cert.bound) for k in _loo_indices(ctx)]
    report = {
        "meta": _meta(ctx, "loo"),
        "certificate": cert.to_dict(),
        "loo": [r.to_dict() for r in records],
    }
    return report, EXIT_OK if all(r.ok for r in records) else EXIT_VIOLATION


def run_estimate(config: AuditConfig) -> tuple[dict, int]:
    ctx = load_context(config)
    target = config.estimate_target or ("T3" if config_uses_hm1(config) else "T1")
    if target == "T1":
        est = estimate_R_T1(ctx.mechanism, ctx.p, config.samples, config.seed)
        exact = theorem_R(ctx.mechanism, ctx.p, Theorem.T1)
    else:
        if ctx.laplacian is None:
            raise MissingGraph("T3 estimation needs graph_path")
        est = estimate_R_T3(ctx.mechanism, ctx.p, ctx.laplacian, config.samples, config.seed)
        exact = theorem_R(ctx.mechanism, ctx.p, Theorem.T3, ctx.laplacian)
    section = est.to_dict()
    section["exact_r"] = exact
    section["abs_gap"] = abs(est.estimate - exact)
    report = {"meta": _meta(ctx, "estimate"), "estimate": section}
    report["meta"]["samples"] = config.samples
    return report, EXIT_OK


def run_fdcheck(config: AuditConfig) -> tuple[dict, int]:
    ctx = load_context(config)
    entries = []
    for k in _loo_indices(ctx):
        _, eps = leave_one_out(ctx.p, k)
        rep = fd_validate(ctx.mechanism, ctx.p, eps, config.fd_steps)
        rep.min_slope = FD_MIN_SLOPE
        entries.append({"k": k, "label": ctx.mechanism.X.labels[k], **rep.to_dict()})
    report = {"meta": _meta(ctx, "fdcheck"), "fdcheck": entries}
    return report, EXIT_OK if all(e["passed"] for e in entries) else EXIT_VIOLATION


RUNNERS = {
    "certify": run_certify,
    "loo": run_loo,
    "estimate": run_estimate,
    "fdcheck": run_fdcheck,
}


def emit_csv(report: dict, directory) -> list[Path]:
    """Write flat CSVs (loo records, finite-difference errors) for plotting."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    if report.get("loo"):
        path = directory / "loo.csv"
        fields = list(report["loo"][0])
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
            w.writeheader()
            for rec in report["loo"]:
                w.writerow({k: ("" if v is None else repr(v) if isinstance(v, float) else v) for k, v in rec.items()})
        written.append(path)
    if report.get("fdcheck"):
        path = directory / "fd_errors.csv"
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["k", "label", "h", "err_a", "err_log"])
            for entry in report["fdcheck"]:
                for h, ea, el in zip(entry["steps"], entry["err_a"], entry["err_log"]):
                    w.writerow([entry["k"], entry["label"], repr(h), repr(ea), repr(el)])
        written.append(path)
    return written
