"""
codedcomp Runtime Analytics

Average job execution time under shifted-exponential and shifted-Weibull
straggling: closed forms, the conditional-failure series, the random-code
bound, quadrature over the block failure probability, asymptotic gap bounds
and the search for the best code dimension.

Times are normalized so that a worker holding 1/k of the job finishes no
earlier than 1/k.
"""

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger
from scipy import integrate, optimize, special, stats

from ..codes.channel import (
    ConditionalFailureProfile,
    EnumerationBudget,
    EstimateMethod,
    conditional_failure_profile,
    pe_from_conditionals,
)
from ..codes.constructions import polar_info_set, rm_dimension, rm_generator, rm_subcode_generator
from ..decoders.map_decoder import MapDecoder
from ..decoders.polar_sc import sc_failure_curve
from ..decoders.projective import ProjectiveDecoder
from ..errors import BudgetExhausted, InputError, NumericError, SamplingError
from ..linalg import has_full_row_rank
from ..utils.rng import chunk_sizes, keyed_rng
from ..utils.stats import wilson_interval


class RuntimeFamily(str, Enum):
    EXPONENTIAL = "exponential"
    WEIBULL = "weibull"


class TimeMethod(str, Enum):
    CLOSED_FORM = "closed-form"
    SERIES = "series"
    BOUND = "bound"
    QUADRATURE = "quadrature"


@dataclass(frozen=True)
class RuntimeModel:
    """Worker runtime T_i with Pr(T_i > t) = exp(-[mu (k t - 1)]^alpha) for t >= 1/k."""

    mu: float = 1.0
    alpha: float = 1.0
    family: RuntimeFamily = RuntimeFamily.EXPONENTIAL

    def __post_init__(self):
        if not self.mu > 0:
            raise InputError(f"straggling rate mu must be positive, got {self.mu}")
        if not self.alpha > 0:
            raise InputError(f"shape alpha must be positive, got {self.alpha}")
        if self.family is RuntimeFamily.EXPONENTIAL and self.alpha != 1.0:
            raise InputError("the shifted-exponential family has alpha = 1")

    @classmethod
    def exponential(cls, mu: float = 1.0) -> "RuntimeModel":
        return cls(mu=mu, alpha=1.0, family=RuntimeFamily.EXPONENTIAL)

    @classmethod
    def weibull(cls, mu: float = 1.0, alpha: float = 2.0) -> "RuntimeModel":
        return cls(mu=mu, alpha=alpha, family=RuntimeFamily.WEIBULL)

    @property
    def is_exponential(self) -> bool:
        return self.alpha == 1.0

    def erasure_prob(self, t: float, k: int) -> float:
        if t < 1.0 / k:
            return 1.0
        return float(math.exp(-((self.mu * (k * t - 1.0)) ** self.alpha)))


@dataclass
class TimeResult:
    t_avg: float
    k: int
    method: TimeMethod
    n: int = 0
    diagnostics: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.t_avg < 1.0 / self.k - 1e-12:
            raise NumericError(f"average time {self.t_avg} below the floor 1/k for k={self.k}", dict(self.diagnostics))


def _check_nk(n: int, k: int) -> None:
    if not 1 <= k <= n:
        raise InputError(f"need 1 <= k <= n, got n={n}, k={k}")


def _harmonic(lo: int, hi: int) -> float:
    """sum_{i=lo}^{hi} 1/i."""
    if hi < lo:
        return 0.0
    return float(np.sum(1.0 / np.arange(lo, hi + 1, dtype=np.float64)))


def avg_time_series(n: int, k: int, mu: float, profile: ConditionalFailureProfile) -> TimeResult:
    """(1/k)[1 + sum_{i>n-k} 1/(i mu)] + (1/(mu k)) sum_{i<=n-k} p(i)/i."""
    _check_nk(n, k)
    if profile.n != n or profile.k != k:
        raise InputError(f"profile is for ({profile.n},{profile.k}), expected ({n},{k})")
    if mu <= 0:
        raise InputError("mu must be positive")
    i = np.arange(1, n - k + 1, dtype=np.float64)
    tail = float(np.sum(profile.failure[1 : n - k + 1] / i)) if n > k else 0.0
    t = (1.0 + _harmonic(n - k + 1, n) / mu) / k + tail / (mu * k)
    return TimeResult(t, k, TimeMethod.SERIES, n, {"decoder": profile.decoder})


def avg_time_mds(n: int, k: int, mu: float) -> TimeResult:
    """1/k + (1/(mu k)) sum_{i=n-k+1}^{n} 1/i."""
    _check_nk(n, k)
    if mu <= 0:
        raise InputError("mu must be positive")
    return TimeResult(1.0 / k + _harmonic(n - k + 1, n) / (mu * k), k, TimeMethod.CLOSED_FORM, n)


def brc_conditional_bound(n: int, k: int, i: int) -> float:
    """Upper bound on p(i) for a random binary code: 1 - prod_j (1 - 2^(j-1-n+i))."""
    _check_nk(n, k)
    if not 0 <= i <= n:
        raise InputError(f"erasure count must lie in [0, {n}], got {i}")
    if i > n - k:
        return 1.0
    j = np.arange(1, k + 1, dtype=np.float64)
    logs = np.log1p(-np.exp2(j - 1 - n + i))
    return float(np.clip(-np.expm1(logs.sum()), 0.0, 1.0))


def brc_bound_profile(n: int, k: int) -> ConditionalFailureProfile:
    failure = np.array([0.0] + [brc_conditional_bound(n, k, i) for i in range(1, n + 1)])
    return ConditionalFailureProfile(
        n=n, k=k, failure=failure, methods=[EstimateMethod.BOUND] * (n + 1), decoder="brc-bound"
    )


def avg_time_brc_bound(n: int, k: int, mu: float) -> TimeResult:
    result = avg_time_series(n, k, mu, brc_bound_profile(n, k))
    result.method = TimeMethod.BOUND
    return result


def brc_ensemble_profile(
    n: int, k: int, budget: Optional[EnumerationBudget] = None, rejection_budget: int = 1000, certify: bool = True
) -> ConditionalFailureProfile:
    """Monte-Carlo p(i) over the random binary ensemble: each trial draws a fresh full-rank code and an i-subset."""
    _check_nk(n, k)
    budget = budget or EnumerationBudget()
    failure = np.ones(n + 1)
    failure[0] = 0.0
    low, high = failure.copy(), failure.copy()
    trials = [0] * (n + 1)
    methods = [EstimateMethod.EXACT] * (n + 1)
    for i in range(1, n - k + 1):
        failures = 0
        for chunk, size in chunk_sizes(budget.trials, budget.chunk_size):
            rng = keyed_rng(budget.seed, "brc-ensemble", n, k, i, chunk)
            for _ in range(size):
                for _attempt in range(rejection_budget):
                    G = rng.choice(np.array([-1, 1], dtype=np.int64), size=(k, n))
                    if has_full_row_rank(G, certify):
                        break
                else:
                    raise SamplingError(f"no full-rank ({k}x{n}) draw within {rejection_budget} attempts")
                kept = np.sort(rng.permutation(n)[i:])
                failures += 0 if has_full_row_rank(G[:, kept], certify) else 1
        failure[i] = failures / budget.trials
        low[i], high[i] = wilson_interval(failures, budget.trials)
        trials[i] = budget.trials
        methods[i] = EstimateMethod.MONTE_CARLO
    return ConditionalFailureProfile(
        n=n, k=k, failure=failure, methods=methods, trials=trials, ci_low=low, ci_high=high, decoder="brc-ensemble"
    )


def mds_failure_prob(n: int, k: int) -> Callable[[float], float]:
    """Block failure of an MDS code: more than n - k erasures."""
    return lambda eps: float(stats.binom.sf(n - k, n, eps))


def _tail_cutoff(n: int, alpha: float, budget: float) -> float:
    """W such that the integral of n exp(-w^alpha) over [W, inf) is below `budget`."""
    w = 1.0
    for _ in range(64):
        tail = n * special.gamma(1.0 / alpha) * special.gammaincc(1.0 / alpha, w**alpha) / alpha
        if tail < budget:
            return w
        w *= 2.0
    raise NumericError("could not bound the integration tail", {"n": n, "alpha": alpha})


def avg_time_quadrature(
    n: int,
    k: int,
    model: RuntimeModel,
    pe: Callable[[float], float],
    abs_tol: float = 1e-6,
    tail_tol: float = 1e-8,
) -> TimeResult:
    """1/k + (1/(mu k)) * integral_0^inf pe(exp(-w^alpha)) dw.

    The substitution w = mu (k t - 1) removes the singular weight at eps -> 0
    and eps -> 1; the infinite range is cut where the union bound pe <= n eps
    certifies a remainder below `tail_tol`.
    """
    _check_nk(n, k)
    scale = model.mu * k
    cutoff = _tail_cutoff(n, model.alpha, tail_tol * scale)
    alpha = model.alpha

    def integrand(w: float) -> float:
        return pe(math.exp(-(w**alpha)))

    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, err = integrate.quad(integrand, 0.0, cutoff, epsabs=abs_tol * scale, epsrel=1e-10, limit=400)
        except integrate.IntegrationWarning as exc:
            logger.error(f"quadrature failed for n={n}, k={k}: {exc}")
            raise NumericError(f"quadrature did not converge: {exc}", {"n": n, "k": k, "cutoff": cutoff}) from exc
    if not math.isfinite(value):
        raise NumericError("quadrature returned a non-finite value", {"n": n, "k": k})
    return TimeResult(
        1.0 / k + value / scale,
        k,
        TimeMethod.QUADRATURE,
        n,
        {"abs_error": err / scale, "cutoff": cutoff, "alpha": alpha},
    )


def default_gap_v(n: int, k: int) -> int:
    return int(min(max(math.floor(2 * math.log2(n)), 0), n - k))


def gap_bound(n: int, k: int, mu: float, v: Optional[int] = None) -> float:
    """Upper bound on n |T_BRC - T_MDS| at rate R = k/n.

    (1/(mu R)) [v/(n-k-v+1) + n R (1 + ln(n-k-v)) / 2^v], with the logarithm
    read as zero when n - k - v = 0.
    """
    _check_nk(n, k)
    if v is None:
        v = default_gap_v(n, k)
    if not 0 <= v <= n - k:
        raise InputError(f"v must lie in [0, n - k] = [0, {n - k}], got {v}")
    rate = k / n
    first = v / (n - k - v + 1)
    second = n * rate * (1.0 + math.log(max(n - k - v, 1))) / 2.0**v
    return (first + second) / (mu * rate)


def execution_time_tail_bound(n: int, k: int, mu: float, x: float, v: Optional[int] = None) -> float:
    """Markov bound on Pr[n (T_BRC - T_MDS) >= x]."""
    if x <= 0:
        raise InputError("x must be positive")
    return min(1.0, gap_bound(n, k, mu, v) / x)


def optimal_rate(mu: float) -> float:
    """Root R* in (0, 1) of (1 - R) ln(1 - R) - mu (1 - R) + R = 0."""
    if mu <= 0:
        raise InputError("mu must be positive")

    def f(rate: float) -> float:
        return (1 - rate) * math.log1p(-rate) - mu * (1 - rate) + rate

    grid = np.linspace(1e-9, 1 - 1e-9, 2001)
    signs = np.sign([f(r) for r in grid])
    changes = int(np.count_nonzero(np.diff(signs)))
    if changes != 1:
        raise NumericError(f"expected one sign change for mu={mu}, found {changes}", {"mu": mu})
    root = optimize.bisect(f, 1e-12, 1 - 1e-12, xtol=1e-13, maxiter=200)
    return float(root)


def code_gains(t: float, t_uncoded: float, t_mds: float) -> Tuple[float, float]:
    """(G_cod, g_opt): saving over uncoded and excess over the best MDS code."""
    return 1.0 - t / t_uncoded, t / t_mds - 1.0


class Scheme(str, Enum):
    UNCODED = "uncoded"
    MDS = "mds"
    BRC_BOUND = "brc-bound"
    BRC_ENSEMBLE = "brc-ensemble"
    POLAR_SC = "polar-sc"
    RM_MAP = "rm-map"
    RM_PROJECTIVE = "rm-projective"


DECODER_SCHEMES = {Scheme.BRC_ENSEMBLE, Scheme.RM_MAP, Scheme.RM_PROJECTIVE}


@dataclass
class SweepBudget:
    enum_limit: int = 100_000
    trials: int = 100_000
    seed: int = 2021
    chunk_size: int = 1024
    workers: int = 1
    eps_design: float = 0.1
    n_max: Optional[int] = None
    certify: bool = True
    rejection_budget: int = 1000
    max_evaluations: Optional[int] = None
    coarse_above: int = 64
    quad_abs_tol: float = 1e-6
    quad_tail_tol: float = 1e-8

    def enumeration(self) -> EnumerationBudget:
        return EnumerationBudget(self.enum_limit, self.trials, self.seed, self.chunk_size, self.workers)


@dataclass
class SweepRow:
    scheme: str
    n: int
    k: int
    t_avg: float
    method: str
    ci_low: float
    ci_high: float
    g_opt: float = float("nan")
    g_cod: float = float("nan")


@dataclass
class SweepResult:
    scheme: Scheme
    n: int
    best: TimeResult
    curve: List[SweepRow]
    t_uncoded: float
    t_mds: float

    @property
    def k_star(self) -> int:
        return self.best.k

    @property
    def gains(self) -> Tuple[float, float]:
        return code_gains(self.best.t_avg, self.t_uncoded, self.t_mds)


def _log2_exact(n: int) -> int:
    m = n.bit_length() - 1
    if 2**m != n:
        raise InputError(f"n must be a power of two for this scheme, got {n}")
    return m


def _profile_time(n: int, k: int, model: RuntimeModel, profile: ConditionalFailureProfile, budget: SweepBudget) -> TimeResult:
    if model.is_exponential:
        return avg_time_series(n, k, model.mu, profile)
    return avg_time_quadrature(
        n, k, model, lambda eps: pe_from_conditionals(profile, eps), budget.quad_abs_tol, budget.quad_tail_tol
    )


def _with_ci(
    n: int, k: int, model: RuntimeModel, profile: ConditionalFailureProfile, budget: SweepBudget
) -> Tuple[TimeResult, float, float]:
    result = _profile_time(n, k, model, profile, budget)
    if profile.ci_low is None or all(m is EstimateMethod.EXACT for m in profile.methods):
        return result, result.t_avg, result.t_avg
    bounds = []
    for edge in (profile.ci_low, profile.ci_high):
        shifted = ConditionalFailureProfile(n=n, k=k, failure=edge, decoder=profile.decoder)
        bounds.append(_profile_time(n, k, model, shifted, budget).t_avg)
    return result, bounds[0], bounds[1]


def mds_time(n: int, k: int, model: RuntimeModel, budget: Optional[SweepBudget] = None) -> TimeResult:
    """MDS average time under any runtime model."""
    budget = budget or SweepBudget()
    if model.is_exponential:
        return avg_time_mds(n, k, model.mu)
    return avg_time_quadrature(n, k, model, mds_failure_prob(n, k), budget.quad_abs_tol, budget.quad_tail_tol)


def scheme_time(
    scheme: Scheme, n: int, k: int, model: RuntimeModel, budget: Optional[SweepBudget] = None
) -> Tuple[TimeResult, float, float]:
    """Average time of one (scheme, n, k) with a confidence band when Monte-Carlo is involved."""
    budget = budget or SweepBudget()
    _check_nk(n, k)
    if scheme is Scheme.UNCODED:
        if k != n:
            raise InputError("the uncoded scheme has k = n")
        result = mds_time(n, n, model, budget)
        return result, result.t_avg, result.t_avg
    if scheme is Scheme.MDS:
        result = mds_time(n, k, model, budget)
        return result, result.t_avg, result.t_avg
    if scheme is Scheme.BRC_BOUND:
        result = _profile_time(n, k, model, brc_bound_profile(n, k), budget)
        result.method = TimeMethod.BOUND if model.is_exponential else result.method
        return result, result.t_avg, result.t_avg
    if scheme is Scheme.BRC_ENSEMBLE:
        profile = brc_ensemble_profile(n, k, budget.enumeration(), budget.rejection_budget, budget.certify)
        return _with_ci(n, k, model, profile, budget)
    if scheme is Scheme.POLAR_SC:
        m = _log2_exact(n)
        info = polar_info_set(m, k, budget.eps_design)
        result = avg_time_quadrature(
            n, k, model, lambda eps: float(sc_failure_curve(m, info, eps)[0]), budget.quad_abs_tol, budget.quad_tail_tol
        )
        result.diagnostics["eps_design"] = budget.eps_design
        return result, result.t_avg, result.t_avg
    if scheme is Scheme.RM_MAP:
        decoder = MapDecoder(rm_subcode_generator(_log2_exact(n), k), certify=budget.certify)
        return _with_ci(n, k, model, conditional_failure_profile(decoder, budget.enumeration()), budget)
    if scheme is Scheme.RM_PROJECTIVE:
        m = _log2_exact(n)
        r = next((r for r in range(1, m + 1) if rm_dimension(m, r) == k), None)
        if r is None:
            raise InputError(f"k={k} is not the dimension of RM({m}, r) with r >= 1")
        decoder = ProjectiveDecoder(rm_generator(m, r), n_max=budget.n_max)
        return _with_ci(n, k, model, conditional_failure_profile(decoder, budget.enumeration()), budget)
    raise InputError(f"unknown scheme: {scheme}")


def feasible_dimensions(scheme: Scheme, n: int) -> List[int]:
    if scheme is Scheme.UNCODED:
        return [n]
    if scheme is Scheme.RM_PROJECTIVE:
        m = _log2_exact(n)
        return [rm_dimension(m, r) for r in range(1, m + 1)]
    if scheme in (Scheme.POLAR_SC, Scheme.RM_MAP):
        _log2_exact(n)
    return list(range(1, n + 1))


def _best_mds(n: int, model: RuntimeModel, budget: SweepBudget) -> float:
    if model.is_exponential:
        return min(avg_time_mds(n, k, model.mu).t_avg for k in range(1, n + 1))
    return min(mds_time(n, k, model, budget).t_avg for k in range(1, n + 1))


def sweep_k(n: int, scheme: Scheme, model: RuntimeModel, budget: Optional[SweepBudget] = None) -> SweepResult:
    """Evaluate every feasible k and return the minimizer; ties go to the smaller k.

    Monte-Carlo schemes above `coarse_above` use a grid of step ceil(n/64)
    followed by unit-step refinement around the coarse minimum.
    """
    budget = budget or SweepBudget()
    scheme = Scheme(scheme)
    candidates = feasible_dimensions(scheme, n)
    t_uncoded = mds_time(n, n, model, budget).t_avg
    t_mds = _best_mds(n, model, budget)

    rows: Dict[int, SweepRow] = {}
    results: Dict[int, TimeResult] = {}

    def evaluate(k: int) -> None:
        if k in rows:
            return
        if budget.max_evaluations is not None and len(rows) >= budget.max_evaluations:
            partial = [rows[key] for key in sorted(rows)]
            logger.warning(f"{scheme.value} sweep at n={n} stopped after {len(rows)} evaluations")
            raise BudgetExhausted(f"evaluation budget of {budget.max_evaluations} exhausted", partial)
        result, low, high = scheme_time(scheme, n, k, model, budget)
        g_cod, g_opt = code_gains(result.t_avg, t_uncoded, t_mds)
        rows[k] = SweepRow(scheme.value, n, k, result.t_avg, result.method.value, low, high, g_opt, g_cod)
        results[k] = result
        logger.debug(f"{scheme.value} n={n} k={k} T={result.t_avg:.6f}")

    if scheme in DECODER_SCHEMES and n > budget.coarse_above and scheme is not Scheme.RM_PROJECTIVE:
        step = math.ceil(n / 64)
        coarse = sorted(set(candidates[::step]) | {candidates[-1]})
        for k in coarse:
            evaluate(k)
        centre = min(rows, key=lambda key: (rows[key].t_avg, key))
        for k in range(max(1, centre - step + 1), min(n, centre + step - 1) + 1):
            evaluate(k)
    else:
        for k in candidates:
            evaluate(k)

    k_star = min(rows, key=lambda key: (rows[key].t_avg, key))
    curve = [rows[key] for key in sorted(rows)]
    logger.info(f"{scheme.value} n={n}: k*={k_star}, T={rows[k_star].t_avg:.6f}")
    return SweepResult(scheme, n, results[k_star], curve, t_uncoded, t_mds)
