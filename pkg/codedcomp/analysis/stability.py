"""
codedcomp Stability Lab

Condition-number experiments for coded computation: random square
submatrices of a generator (with a Gaussian baseline), the Gram matrices
solved at the leaves of the projective decoder, and end-to-end precision
loss when observations carry rounding-level noise.
"""

import math
from dataclasses import dataclass, field
from itertools import product
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
from loguru import logger

from ..codes.channel import ErasurePattern
from ..codes.constructions import CodeFamily, GeneratorMatrix, rm_generator
from ..decoders.base import ErasureDecoder
from ..decoders.map_decoder import recover_message
from ..decoders.projective import build_projection_plan
from ..errors import InputError
from ..linalg import condition_number, independent_columns, independent_rows, numeric_rank

PERTURBATION_FLOOR = 1e-15


@dataclass
class ConditionStudy:
    samples: int
    kappa_max: float
    kappa_mean: float
    kappa_quantiles: Dict[str, float]
    singular_count: int
    context: Dict[str, Any] = field(default_factory=dict)
    records: List[Dict[str, Any]] = field(default_factory=list)
    baseline: Optional["ConditionStudy"] = None

    @classmethod
    def from_kappas(
        cls, kappas: Sequence[float], context: Dict[str, Any], records: Optional[List[Dict[str, Any]]] = None
    ) -> "ConditionStudy":
        values = np.asarray(kappas, dtype=np.float64)
        finite = values[np.isfinite(values)]
        singular = int(values.size - finite.size)
        if finite.size:
            quantiles = {f"p{q}": float(np.percentile(finite, q)) for q in (50, 90, 99)}
            kmax, kmean = float(finite.max()), float(finite.mean())
        else:
            quantiles = {"p50": math.inf, "p90": math.inf, "p99": math.inf}
            kmax = kmean = math.inf
        return cls(int(values.size), kmax, kmean, quantiles, singular, context, records or [])

    def summary(self) -> Dict[str, Any]:
        out = {
            "samples": self.samples,
            "kappa_max": self.kappa_max,
            "kappa_mean": self.kappa_mean,
            "kappa_quantiles": self.kappa_quantiles,
            "singular_count": self.singular_count,
            "context": self.context,
        }
        if self.baseline is not None:
            out["baseline"] = self.baseline.summary()
        return out


def submatrix_condition_study(
    G: GeneratorMatrix,
    sub_k: int,
    trials: int,
    rng: np.random.Generator,
    baseline: bool = True,
    singular_floor: float = 1e-300,
) -> ConditionStudy:
    """kappa of random sub_k x sub_k submatrices (random rows and columns).

    Submatrices whose smallest singular value is below `singular_floor` count
    as singular.
    """
    if not 1 <= sub_k <= min(G.k, G.n):
        raise InputError(f"submatrix size must lie in [1, {min(G.k, G.n)}], got {sub_k}")
    entries = G.entries.astype(np.float64)
    kappas = []
    for _ in range(trials):
        rows = np.sort(rng.choice(G.k, sub_k, replace=False))
        cols = np.sort(rng.choice(G.n, sub_k, replace=False))
        kappas.append(condition_number(entries[np.ix_(rows, cols)], singular_floor=singular_floor))
    context = {"family": G.family.value, "n": G.n, "k": G.k, "sub_k": sub_k, "trials": trials}
    study = ConditionStudy.from_kappas(kappas, context)
    if baseline:
        gauss = [
            condition_number(rng.standard_normal((sub_k, sub_k)), singular_floor=singular_floor) for _ in range(trials)
        ]
        study.baseline = ConditionStudy.from_kappas(gauss, {"family": "gaussian", "sub_k": sub_k, "trials": trials})
    logger.info(f"submatrix study {G.family.value} sub_k={sub_k}: max={study.kappa_max:.3g} mean={study.kappa_mean:.3g}")
    return study


def default_eps_grid() -> np.ndarray:
    return np.linspace(0.01, 0.6, 60)


def _leaf_kappas(plans, known: np.ndarray, singular_floor: float = 1e-300) -> List[Optional[float]]:
    out: List[Optional[float]] = []
    for plan in plans:
        coset_known = known[plan.members].all(axis=1)
        sub = plan.projected[:, coset_known]
        if sub.shape[1] == 0:
            out.append(None)
            continue
        rows = independent_rows(sub)
        if len(rows) < plan.rank:
            out.append(None)
            continue
        reduced = sub[rows].astype(np.float64)
        out.append(condition_number(reduced, mode="gram", singular_floor=singular_floor))
    return out


def projection_condition_study(
    m: int,
    r: int,
    eps_grid: Optional[Sequence[float]] = None,
    patterns_per_eps: int = 1000,
    rng: Optional[np.random.Generator] = None,
    exhaustive: bool = False,
    singular_floor: float = 1e-300,
) -> ConditionStudy:
    """kappa(G~ G~^T) for the full-rank leaf systems met while decoding random patterns.

    G~ keeps the first independent rows of each unerased projected generator.
    Plans whose unerased columns lose rank are skipped, since no leaf solve
    happens there. `exhaustive` walks every pattern of length 2^m instead of
    sampling.
    """
    plans = build_projection_plan(m, r, rm_generator(m, r))
    n = 2**m
    records: List[Dict[str, Any]] = []
    kappas: List[float] = []

    def visit(eps: Optional[float], mask: np.ndarray) -> None:
        for plan, kappa in zip(plans, _leaf_kappas(plans, ~mask, singular_floor)):
            if kappa is None:
                continue
            kappas.append(kappa)
            records.append({"eps": eps, "plan": "-".join(map(str, plan.basis)) or "none", "kappa": kappa})

    if exhaustive:
        if n > 16:
            raise InputError("exhaustive projection study is limited to n <= 16")
        for bits in product((False, True), repeat=n):
            visit(None, np.array(bits))
        grid_desc: Any = "exhaustive"
    else:
        if rng is None:
            raise InputError("a random generator is required unless exhaustive is set")
        grid = default_eps_grid() if eps_grid is None else np.asarray(eps_grid, dtype=np.float64)
        for eps in grid:
            for _ in range(patterns_per_eps):
                visit(float(eps), rng.random(n) < eps)
        grid_desc = [float(e) for e in grid]

    context = {"code": f"RM({m},{r})", "plans": len(plans), "patterns_per_eps": patterns_per_eps, "grid": grid_desc}
    study = ConditionStudy.from_kappas(kappas, context, records)
    logger.info(f"projection study RM({m},{r}): {study.samples} leaf systems, max kappa {study.kappa_max:.4g}")
    return study


def per_eps_means(study: ConditionStudy) -> Dict[float, float]:
    """Mean kappa per erasure probability for sampled studies."""
    buckets: Dict[float, List[float]] = {}
    for rec in study.records:
        if rec["eps"] is not None and math.isfinite(rec["kappa"]):
            buckets.setdefault(rec["eps"], []).append(rec["kappa"])
    return {eps: float(np.mean(vals)) for eps, vals in sorted(buckets.items())}


@dataclass
class PayloadSpec:
    """Shape and kind of the random message rows encoded for a precision run."""

    columns: int = 1
    integer: bool = False
    perturbation: float = PERTURBATION_FLOOR
    scale: float = 1.0


@dataclass
class PrecisionResult:
    rel_error: float
    digits_lost: float
    kappa: float


def _used_submatrix(G: GeneratorMatrix, pattern: ErasurePattern) -> np.ndarray:
    unerased = np.array(pattern.unerased, dtype=np.int64)
    sub = G.entries[:, unerased]
    if G.is_binary:
        cols = independent_columns(sub)
    else:
        cols = numeric_rank(sub)[1]
    return G.entries[:, unerased[cols]].astype(np.float64)


def end_to_end_precision(
    G: GeneratorMatrix,
    decoder: ErasureDecoder,
    payload_spec: PayloadSpec,
    pattern: ErasurePattern,
    rng: np.random.Generator,
    singular_floor: float = 1e-300,
) -> PrecisionResult:
    """Encode a random message, perturb the unerased observations, decode and compare.

    Digits lost are log10(error / 1e-15), floored at zero.
    """
    if not decoder.decodable(pattern.erased):
        raise InputError(f"{decoder.name} cannot decode the given pattern")
    if payload_spec.integer:
        x = rng.integers(-100, 101, size=(G.k, payload_spec.columns)).astype(np.float64)
    else:
        x = payload_spec.scale * rng.standard_normal((G.k, payload_spec.columns))
    y = G.entries.T.astype(np.float64) @ x
    if payload_spec.perturbation > 0:
        y = y * (1.0 + payload_spec.perturbation * rng.uniform(-1.0, 1.0, size=y.shape))
    y[list(pattern.erased)] = 0.0

    exact = payload_spec.integer and payload_spec.perturbation == 0 and G.family is not CodeFamily.MDS_REAL
    codeword = decoder.complete(y, pattern)
    x_hat = recover_message(G, codeword, ErasurePattern(G.n, ()), exact=exact)

    denom = float(np.max(np.abs(x)))
    err = float(np.max(np.abs(x_hat - x))) / denom if denom > 0 else 0.0
    digits = max(0.0, math.log10(err / PERTURBATION_FLOOR)) if err > 0 else 0.0
    kappa = condition_number(_used_submatrix(G, pattern), singular_floor=singular_floor)
    return PrecisionResult(err, digits, kappa)
