"""
codedcomp Experiment Orchestrator

Turns an ExperimentConfig into result records: sweeps for the execution-time
tables, block-error curves, fixed-rate asymptotics, condition studies and
straggler simulation. Owns logging setup and the on-disk artifact cache.
"""

import math
import sys
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
from loguru import logger

from .analysis.runtime import (
    RuntimeModel,
    Scheme,
    SweepBudget,
    avg_time_brc_bound,
    avg_time_mds,
    gap_bound,
    mds_time,
    optimal_rate,
    scheme_time,
    sweep_k,
)
from .analysis.stability import (
    ConditionStudy,
    PayloadSpec,
    end_to_end_precision,
    per_eps_means,
    projection_condition_study,
    submatrix_condition_study,
)
from .codes.channel import ErasurePattern, block_error_curve
from .codes.constructions import (
    GeneratorMatrix,
    mds_real_generator,
    polar_generator,
    random_binary_generator,
    rm_generator,
    rm_subcode_generator,
    uncoded_generator,
)
from .config import CodedCompConfig, ExperimentConfig
from .decoders.base import ErasureDecoder
from .decoders.map_decoder import MapDecoder
from .decoders.polar_sc import ScDecoder
from .decoders.projective import ProjectiveDecoder
from .errors import BudgetExhausted, InputError
from .simulator import empirical_avg_time, run_matmul_job
from .utils.cache import ArtifactCache
from .utils.rng import keyed_rng

ASYMPTOTIC_LENGTHS = [1024, 2048, 4096, 8192]
PRECISION_PATTERNS = 200


def setup_logging(config: CodedCompConfig, level: Optional[str] = None) -> None:
    """Configure loguru sinks: coloured stderr plus a daily file under the workspace."""
    log_path = config.logs_dir
    log_path.mkdir(parents=True, exist_ok=True)

    logger.remove()
    logger.add(
        sys.stderr,
        level=(level or config.log_level).upper(),
        format="<green>{time:YYYY-MM-DD HH:mm:ss}</green> | <level>{level: <8}</level> | <cyan>{name}</cyan>:<cyan>{function}</cyan>:<cyan>{line}</cyan> - <level>{message}</level>",
    )
    logger.add(
        log_path / "codedcomp_{time:YYYY-MM-DD}.log",
        rotation="1 day",
        retention="30 days",
        level="DEBUG",
        format="{time:YYYY-MM-DD HH:mm:ss} | {level: <8} | {name}:{function}:{line} - {message}",
    )


@dataclass
class RunOutput:
    """Rows for the CSV body plus header entries and an optional JSON summary."""

    records: List[Dict[str, Any]]
    columns: List[str]
    header: Dict[str, Any] = field(default_factory=dict)
    summary: Dict[str, Any] = field(default_factory=dict)
    partial: bool = False


def _study_row(family: str, study: ConditionStudy) -> Dict[str, Any]:
    return {
        "family": family,
        "samples": study.samples,
        "kappa_max": study.kappa_max,
        "kappa_mean": study.kappa_mean,
        **study.kappa_quantiles,
        "singular_count": study.singular_count,
    }


class ExperimentOrchestrator:
    """Runs experiments against one CodedCompConfig."""

    def __init__(self, config: Optional[CodedCompConfig] = None, cache: Optional[ArtifactCache] = None):
        self.config = config or CodedCompConfig()
        self.cache = cache or ArtifactCache(self.config.cache_dir, enabled=self.config.cache_enabled)

    # -- shared plumbing ---------------------------------------------------

    def model(self, exp: ExperimentConfig) -> RuntimeModel:
        if exp.dist == "weibull":
            return RuntimeModel.weibull(exp.mu, exp.alpha)
        return RuntimeModel.exponential(exp.mu)

    def budget(self, exp: ExperimentConfig) -> SweepBudget:
        return SweepBudget(
            enum_limit=self.config.enum_limit,
            trials=exp.trials,
            seed=exp.seed,
            chunk_size=self.config.chunk_size,
            workers=self.config.workers,
            eps_design=exp.eps_design,
            n_max=exp.n_max,
            certify=self.config.certify_rank_deficiency,
            rejection_budget=self.config.rejection_budget,
            max_evaluations=exp.max_evaluations,
            quad_abs_tol=self.config.quad_abs_tol,
            quad_tail_tol=self.config.quad_tail_tol,
        )

    def _rm(self, m: int, r: int) -> GeneratorMatrix:
        return self.cache.generator(
            lambda m, r: rm_generator(m, r, self.config.max_kronecker_level), "rm", m=m, r=r
        )

    def _projective(self, G: GeneratorMatrix, exp: ExperimentConfig, trace: bool = False) -> ProjectiveDecoder:
        m, r = int(G.meta["m"]), int(G.meta["r"])
        n_max = exp.n_max if exp.n_max is not None else self.config.n_max_for(m, r)
        plans = self.cache.projection_plans(m, r, G)
        return ProjectiveDecoder(G, n_max=n_max, rtol=self.config.consistency_rtol, trace=trace, plans=plans)

    def code_for(self, exp: ExperimentConfig, scheme: str) -> Tuple[GeneratorMatrix, ErasureDecoder]:
        """Generator and decoder for a simulation scheme."""
        certify = self.config.certify_rank_deficiency
        level = self.config.max_kronecker_level
        n = exp.lengths[0] if exp.lengths else None
        if scheme in ("rm", "rm-map", "rm-projective") and exp.m is not None and exp.r is not None:
            G = self._rm(exp.m, exp.r)
            if scheme == "rm-projective":
                return G, self._projective(G, exp)
            return G, MapDecoder(G, certify=certify, tol=self.config.mds_pivot_tolerance)
        if n is None:
            raise InputError(f"scheme '{scheme}' needs --n or --m")
        k = exp.k if exp.k is not None else n
        if scheme == "uncoded":
            G = uncoded_generator(n)
            return G, MapDecoder(G, certify=certify)
        if scheme == "mds":
            G = mds_real_generator(n, k)
            return G, MapDecoder(G, tol=self.config.mds_pivot_tolerance)
        m = n.bit_length() - 1
        if scheme in ("rm", "rm-map"):
            if 2**m != n:
                raise InputError(f"RM codes need a power-of-two length, got {n}")
            G = self.cache.generator(lambda m, k: rm_subcode_generator(m, k, level), "rm-subcode", m=m, k=k)
            return G, MapDecoder(G, certify=certify)
        if scheme == "polar-sc":
            if 2**m != n:
                raise InputError(f"polar codes need a power-of-two length, got {n}")
            G = self.cache.generator(
                lambda m, k, eps: polar_generator(m, k, eps, level), "polar", m=m, k=k, eps=exp.eps_design
            )
            return G, ScDecoder(G)
        if scheme == "random":
            G = random_binary_generator(n, k, exp.seed, self.config.rejection_budget, certify)
            return G, MapDecoder(G, certify=certify)
        raise InputError(f"unknown simulation scheme: {scheme}")

    # -- commands ----------------------------------------------------------

    def run_analyze(self, exp: ExperimentConfig) -> RunOutput:
        """Optimal k and average time per requested length."""
        if not exp.scheme:
            raise InputError("analyze needs --scheme")
        try:
            scheme = Scheme(exp.scheme)
        except ValueError as e:
            raise InputError(f"unknown scheme '{exp.scheme}'; choose from {', '.join(s.value for s in Scheme)}") from e
        if not exp.lengths:
            raise InputError("analyze needs --n or --m")
        model = self.model(exp)
        budget = self.budget(exp)
        rows: List[Dict[str, Any]] = []
        curves: Dict[str, Any] = {}
        partial = False
        for n in exp.lengths:
            try:
                result = sweep_k(n, scheme, model, budget)
            except BudgetExhausted as e:
                logger.warning(f"analyze {scheme.value} n={n}: {e}")
                partial = True
                for row in e.partial:
                    rows.append({**row.__dict__, "k_star": None, "partial": True})
                break
            g_cod, g_opt = result.gains
            best = next(row for row in result.curve if row.k == result.k_star)
            rows.append(
                {
                    "n": n,
                    "scheme": scheme.value,
                    "k_star": result.k_star,
                    "t_avg": result.best.t_avg,
                    "method": result.best.method.value,
                    "ci_low": best.ci_low,
                    "ci_high": best.ci_high,
                    "g_opt": g_opt,
                    "g_cod": g_cod,
                    "partial": False,
                }
            )
            curves[str(n)] = [row.__dict__ for row in result.curve]
        columns = ["n", "scheme", "k_star", "t_avg", "method", "ci_low", "ci_high", "g_opt", "g_cod", "partial"]
        return RunOutput(rows, columns, {"partial": partial}, {"rows": rows, "curves": curves}, partial)

    def run_bler(self, exp: ExperimentConfig) -> RunOutput:
        """Block error rate of MAP and/or projective decoding of RM(m, r) on a BEC grid."""
        if exp.m is None or exp.r is None:
            raise InputError("bler needs --m and --r")
        if exp.decoder not in ("map", "projective", "both"):
            raise InputError(f"decoder must be map, projective or both, got '{exp.decoder}'")
        G = self._rm(exp.m, exp.r)
        decoders: List[ErasureDecoder] = []
        if exp.decoder in ("map", "both"):
            decoders.append(MapDecoder(G, certify=self.config.certify_rank_deficiency))
        if exp.decoder in ("projective", "both"):
            decoders.append(self._projective(G, exp))
        grid = exp.eps_grid()
        rows: List[Dict[str, Any]] = []
        for decoder in decoders:
            points = block_error_curve(
                decoder, grid, exp.trials, exp.seed, self.config.chunk_size, self.config.workers
            )
            for p in points:
                rows.append(
                    {
                        "code": f"RM({exp.m},{exp.r})",
                        "decoder": decoder.name,
                        "eps": p.eps,
                        "bler": p.bler,
                        "trials": p.trials,
                        "ci_low": p.ci_low,
                        "ci_high": p.ci_high,
                    }
                )
            logger.info(f"{decoder.name} BLER curve for RM({exp.m},{exp.r}) over {len(grid)} points")
        columns = ["code", "decoder", "eps", "bler", "trials", "ci_low", "ci_high"]
        header: Dict[str, Any] = {"k": G.k, "n": G.n}
        if isinstance(decoders[-1], ProjectiveDecoder):
            header["n_max"] = decoders[-1].n_max
        return RunOutput(rows, columns, header, {"points": rows})

    def run_asymptotic(self, exp: ExperimentConfig) -> RunOutput:
        """n * T_avg at the fixed rate R* for growing n."""
        model = self.model(exp)
        if not model.is_exponential:
            raise InputError("the fixed-rate study uses the shifted-exponential model")
        rate = optimal_rate(exp.mu)
        lengths = exp.n or ASYMPTOTIC_LENGTHS
        budget = self.budget(exp)
        polar_budget = replace(budget, eps_design=1.0 - rate)
        rows: List[Dict[str, Any]] = []
        partial = False
        evaluations = 0
        for n in lengths:
            k = math.ceil(rate * n)
            t_mds = avg_time_mds(n, k, exp.mu).t_avg
            t_brc = avg_time_brc_bound(n, k, exp.mu).t_avg
            entries = [("mds", t_mds, None), ("brc-bound", t_brc, gap_bound(n, k, exp.mu))]
            if 2 ** (n.bit_length() - 1) == n:
                t_polar = scheme_time(Scheme.POLAR_SC, n, k, model, polar_budget)[0].t_avg
                entries.append(("polar-sc", t_polar, None))
            if exp.rm_max_n and n <= exp.rm_max_n:
                if budget.max_evaluations is not None and evaluations >= budget.max_evaluations:
                    logger.warning(f"Monte-Carlo budget exhausted before rm-map at n={n}")
                    partial = True
                else:
                    entries.append(("rm-map", scheme_time(Scheme.RM_MAP, n, k, model, budget)[0].t_avg, None))
                    evaluations += 1
            for scheme, t, bound in entries:
                rows.append(
                    {
                        "n": n,
                        "k": k,
                        "scheme": scheme,
                        "n_t_avg": n * t,
                        "gap": n * (t - t_mds),
                        "gap_bound": bound,
                    }
                )
            logger.info(f"fixed rate {rate:.4f}: n={n} k={k} n*T_mds={n * t_mds:.5f}")
        columns = ["n", "k", "scheme", "n_t_avg", "gap", "gap_bound"]
        header = {"r_star": round(rate, 10), "eps_design": 1.0 - rate, "partial": partial}
        return RunOutput(rows, columns, header, {"r_star": rate, "rows": rows}, partial)

    def run_stability(self, exp: ExperimentConfig) -> RunOutput:
        """Condition-number study for the projective leaves or random generator submatrices."""
        code = (exp.code or "rm").lower()
        rng = keyed_rng(exp.seed, "stability")
        if code == "rm":
            if exp.m is None or exp.r is None:
                raise InputError("stability --code rm needs --m and --r")
            grid = exp.eps_grid("0.01:0.6:60")
            study = projection_condition_study(
                exp.m, exp.r, grid, exp.patterns_per_eps, rng, singular_floor=self.config.singular_floor
            )
            means = per_eps_means(study)
            digits = self._worst_precision(exp, rng)
            rows = [{"eps": eps, "kappa_mean": mean} for eps, mean in means.items()]
            summary = {**study.summary(), "per_eps_means": rows, "max_digits_lost": digits}
            header = {"kappa_max": study.kappa_max, "samples": study.samples, "max_digits_lost": digits}
            return RunOutput(rows, ["eps", "kappa_mean"], header, summary)

        G, _ = self.code_for(exp, {"polar": "polar-sc"}.get(code, code))
        sub_k = exp.sub_k or G.k
        study = submatrix_condition_study(G, sub_k, exp.trials, rng, singular_floor=self.config.singular_floor)
        rows = [_study_row(study.context["family"], study)]
        if study.baseline is not None:
            rows.append(_study_row("gaussian", study.baseline))
        columns = ["family", "samples", "kappa_max", "kappa_mean", "p50", "p90", "p99", "singular_count"]
        return RunOutput(rows, columns, {"sub_k": sub_k}, study.summary())

    def _worst_precision(self, exp: ExperimentConfig, rng: np.random.Generator) -> float:
        """Largest digits lost over random projectively decodable patterns."""
        G = self._rm(exp.m, exp.r)
        decoder = self._projective(G, exp)
        worst = 0.0
        tried = 0
        for _ in range(PRECISION_PATTERNS * 10):
            if tried >= PRECISION_PATTERNS:
                break
            eps = float(rng.uniform(0.01, 0.6))
            pattern = ErasurePattern.from_mask(rng.random(G.n) < eps)
            if not decoder.decodable(pattern.erased):
                continue
            tried += 1
            result = end_to_end_precision(G, decoder, PayloadSpec(), pattern, rng, self.config.singular_floor)
            worst = max(worst, result.digits_lost)
        logger.info(f"end-to-end precision over {tried} patterns: worst {worst:.2f} digits lost")
        return worst

    def run_simulate(self, exp: ExperimentConfig) -> RunOutput:
        """Straggler simulation: mean completion time, or end-to-end coded products with --payload."""
        if not exp.scheme:
            raise InputError("simulate needs --scheme")
        G, decoder = self.code_for(exp, exp.scheme)
        model = self.model(exp)
        shape = exp.payload_shape()

        if shape is not None:
            rows_a, inner, cols_b = shape
            data_rng = keyed_rng(exp.seed, "payload")
            A = data_rng.standard_normal((rows_a, inner))
            B = data_rng.standard_normal((inner, cols_b))
            records = []
            for job in range(exp.job_count()):
                result = run_matmul_job(A, B, G, decoder, model, keyed_rng(exp.seed, "matmul", job))
                records.append({"job": job, **result.to_record()})
            worst = max((r.get("max_rel_error", math.inf) for r in records), default=math.inf)
            columns = ["job", "completion_time", "success", "max_rel_error", "padding"]
            header = {"n": G.n, "k": G.k, "max_rel_error": worst}
            return RunOutput(records, columns, header, {"jobs": records, "max_rel_error": worst})

        stats = empirical_avg_time(
            G, decoder, model, exp.job_count(), exp.seed, self.config.chunk_size, self.config.workers
        )
        analytic = self._analytic_time(exp.scheme, G, model, exp)
        row = {
            "scheme": exp.scheme,
            "n": G.n,
            "k": G.k,
            "decoder": decoder.name,
            **stats.to_dict(),
            "analytic": analytic,
        }
        columns = ["scheme", "n", "k", "decoder", "mean", "ci_low", "ci_high", "jobs", "failures", "analytic"]
        return RunOutput([row], columns, {}, row)

    def _analytic_time(self, scheme: str, G: GeneratorMatrix, model: RuntimeModel, exp: ExperimentConfig) -> Optional[float]:
        if scheme == "uncoded":
            return mds_time(G.n, G.n, model).t_avg
        if scheme == "mds":
            return mds_time(G.n, G.k, model).t_avg
        if scheme in ("rm", "rm-map") and G.n <= 16:
            return scheme_time(Scheme.RM_MAP, G.n, G.k, model, self.budget(exp))[0].t_avg
        if scheme == "polar-sc":
            return scheme_time(Scheme.POLAR_SC, G.n, G.k, model, self.budget(exp))[0].t_avg
        return None

    def run(self, exp: ExperimentConfig) -> RunOutput:
        handlers = {
            "analyze": self.run_analyze,
            "bler": self.run_bler,
            "asymptotic": self.run_asymptotic,
            "stability": self.run_stability,
            "simulate": self.run_simulate,
        }
        logger.info(f"running {exp.command} (seed {exp.seed})")
        return handlers[exp.command](exp)
