"""
codedcomp Erasure Channel

Erasure patterns, pattern sampling and decoder-failure estimation. The
conditional failure profile p(i) (probability that a uniformly random set of
i erasures is undecodable) is computed exactly by enumeration when the number
of patterns is small and by Monte-Carlo otherwise.
"""

from dataclasses import dataclass, field
from enum import Enum
from itertools import combinations
from math import comb
from typing import TYPE_CHECKING, List, Optional, Sequence, Tuple, Union

import numpy as np
from loguru import logger
from scipy import stats

from ..errors import InputError
from ..utils.parallel import map_chunks
from ..utils.rng import chunk_sizes, keyed_rng
from ..utils.stats import wilson_interval

if TYPE_CHECKING:
    from ..decoders.base import ErasureDecoder


class EstimateMethod(str, Enum):
    EXACT = "exact"
    MONTE_CARLO = "monte-carlo"
    BOUND = "bound"


@dataclass(frozen=True)
class ErasurePattern:
    """Sorted set of erased coordinates of a length-n word."""

    n: int
    erased: Tuple[int, ...]

    def __post_init__(self):
        erased = tuple(sorted(int(e) for e in self.erased))
        if len(set(erased)) != len(erased):
            raise InputError("erased coordinates must be distinct")
        if erased and (erased[0] < 0 or erased[-1] >= self.n):
            raise InputError(f"erased coordinates must lie in [0, {self.n})")
        object.__setattr__(self, "erased", erased)

    @classmethod
    def from_mask(cls, mask: np.ndarray) -> "ErasurePattern":
        mask = np.asarray(mask, dtype=bool)
        return cls(n=int(mask.size), erased=tuple(int(i) for i in np.flatnonzero(mask)))

    @property
    def size(self) -> int:
        return len(self.erased)

    @property
    def mask(self) -> np.ndarray:
        out = np.zeros(self.n, dtype=bool)
        out[list(self.erased)] = True
        return out

    @property
    def unerased(self) -> Tuple[int, ...]:
        erased = set(self.erased)
        return tuple(i for i in range(self.n) if i not in erased)


def sample_pattern(n: int, eps: float, rng: np.random.Generator) -> ErasurePattern:
    """Erase each coordinate independently with probability eps."""
    if not 0.0 <= eps <= 1.0:
        raise InputError(f"erasure probability must lie in [0, 1], got {eps}")
    return ErasurePattern.from_mask(rng.random(n) < eps)


@dataclass
class FailureEstimate:
    value: float
    method: EstimateMethod
    trials: int = 0
    ci_low: float = 0.0
    ci_high: float = 1.0


@dataclass
class EnumerationBudget:
    """Exact enumeration runs when C(n, i) <= enum_limit, otherwise `trials` Monte-Carlo draws."""

    enum_limit: int = 100_000
    trials: int = 100_000
    seed: int = 2021
    chunk_size: int = 1024
    workers: int = 1


@dataclass
class ConditionalFailureProfile:
    """p(i) for i = 0..n; index 0 is the no-erasure case and is always 0."""

    n: int
    k: int
    failure: np.ndarray
    methods: List[EstimateMethod] = field(default_factory=list)
    trials: List[int] = field(default_factory=list)
    ci_low: Optional[np.ndarray] = None
    ci_high: Optional[np.ndarray] = None
    decoder: str = ""

    def __post_init__(self):
        self.failure = np.asarray(self.failure, dtype=np.float64)
        if self.failure.shape != (self.n + 1,):
            raise InputError(f"failure profile must have n + 1 = {self.n + 1} entries")

    def p(self, i: int) -> float:
        return float(self.failure[i])

    def to_records(self) -> List[dict]:
        rows = []
        for i in range(1, self.n + 1):
            rows.append(
                {
                    "i": i,
                    "p": self.p(i),
                    "method": self.methods[i].value if self.methods else "",
                    "trials": self.trials[i] if self.trials else 0,
                    "ci_low": float(self.ci_low[i]) if self.ci_low is not None else self.p(i),
                    "ci_high": float(self.ci_high[i]) if self.ci_high is not None else self.p(i),
                }
            )
        return rows


@dataclass(frozen=True)
class _PatternChunk:
    decoder: "ErasureDecoder"
    n: int
    i: int
    seed: int
    chunk: int
    size: int


def _count_failures(task: _PatternChunk) -> int:
    rng = keyed_rng(task.seed, "conditional", task.n, task.i, task.chunk)
    draws = np.argpartition(rng.random((task.size, task.n)), task.i - 1, axis=1)[:, : task.i]
    return sum(0 if task.decoder.decodable(sorted(row.tolist())) else 1 for row in draws)


def conditional_failure_prob(
    decoder: "ErasureDecoder", i: int, budget: Optional[EnumerationBudget] = None
) -> FailureEstimate:
    """Probability that `decoder` fails on a uniformly random set of i erasures."""
    budget = budget or EnumerationBudget()
    n, k = decoder.generator.n, decoder.generator.k
    if not 1 <= i <= n:
        raise InputError(f"erasure count must satisfy 1 <= i <= {n}, got {i}")
    if i > n - k:
        return FailureEstimate(1.0, EstimateMethod.EXACT, 0, 1.0, 1.0)

    total = comb(n, i)
    if total <= budget.enum_limit:
        failures = sum(0 if decoder.decodable(list(e)) else 1 for e in combinations(range(n), i))
        value = failures / total
        return FailureEstimate(value, EstimateMethod.EXACT, total, value, value)

    tasks = [
        _PatternChunk(decoder, n, i, budget.seed, chunk, size)
        for chunk, size in chunk_sizes(budget.trials, budget.chunk_size)
    ]
    failures = sum(map_chunks(_count_failures, tasks, budget.workers))
    low, high = wilson_interval(failures, budget.trials)
    return FailureEstimate(failures / budget.trials, EstimateMethod.MONTE_CARLO, budget.trials, low, high)


def conditional_failure_profile(
    decoder: "ErasureDecoder", budget: Optional[EnumerationBudget] = None
) -> ConditionalFailureProfile:
    """p(i) for every i; entries beyond n - k are exactly one."""
    budget = budget or EnumerationBudget()
    n, k = decoder.generator.n, decoder.generator.k
    failure = np.ones(n + 1)
    failure[0] = 0.0
    low, high = failure.copy(), failure.copy()
    methods = [EstimateMethod.EXACT] * (n + 1)
    trials = [0] * (n + 1)
    for i in range(1, n - k + 1):
        est = conditional_failure_prob(decoder, i, budget)
        failure[i], low[i], high[i] = est.value, est.ci_low, est.ci_high
        methods[i], trials[i] = est.method, est.trials
    logger.debug(f"{decoder.name} profile for ({n},{k}): {np.round(failure[1:n - k + 1], 4).tolist()}")
    return ConditionalFailureProfile(
        n=n, k=k, failure=failure, methods=methods, trials=trials, ci_low=low, ci_high=high, decoder=decoder.name
    )


def pe_from_conditionals(
    profile: ConditionalFailureProfile, eps: Union[float, np.ndarray]
) -> Union[float, np.ndarray]:
    """Block failure probability on BEC(eps): sum_i C(n,i) eps^i (1-eps)^(n-i) p(i)."""
    eps_arr = np.atleast_1d(np.asarray(eps, dtype=np.float64))
    if np.any((eps_arr < 0) | (eps_arr > 1)):
        raise InputError("erasure probabilities must lie in [0, 1]")
    i = np.arange(profile.n + 1)
    weights = stats.binom.pmf(i[None, :], profile.n, eps_arr[:, None])
    pe = np.clip(weights @ profile.failure, 0.0, 1.0)
    return float(pe[0]) if np.ndim(eps) == 0 else pe


@dataclass
class BlerPoint:
    eps: float
    bler: float
    trials: int
    ci_low: float
    ci_high: float


@dataclass(frozen=True)
class _BlerChunk:
    decoder: "ErasureDecoder"
    n: int
    eps: float
    grid_index: int
    seed: int
    chunk: int
    size: int


def _count_block_errors(task: _BlerChunk) -> int:
    # patterns depend only on (seed, grid index, chunk), so decoders compared on one grid see identical draws
    rng = keyed_rng(task.seed, "bler", task.grid_index, task.chunk)
    masks = rng.random((task.size, task.n)) < task.eps
    return sum(0 if task.decoder.decodable(np.flatnonzero(row).tolist()) else 1 for row in masks)


def block_error_curve(
    decoder: "ErasureDecoder",
    eps_grid: Sequence[float],
    trials: int,
    seed: int = 2021,
    chunk_size: int = 1024,
    workers: int = 1,
) -> List[BlerPoint]:
    """Monte-Carlo block error rate of `decoder` on BEC(eps) for each eps in the grid."""
    if trials < 1:
        raise InputError("trials must be positive")
    n = decoder.generator.n
    points = []
    for idx, eps in enumerate(eps_grid):
        if not 0.0 <= eps <= 1.0:
            raise InputError(f"erasure probability must lie in [0, 1], got {eps}")
        tasks = [
            _BlerChunk(decoder, n, float(eps), idx, seed, chunk, size)
            for chunk, size in chunk_sizes(trials, chunk_size)
        ]
        errors = sum(map_chunks(_count_block_errors, tasks, workers))
        low, high = wilson_interval(errors, trials)
        points.append(BlerPoint(float(eps), errors / trials, trials, low, high))
        logger.info(f"{decoder.name} n={n} eps={eps:.4f} bler={errors / trials:.5f}")
    return points

