"""
codedcomp Simulator

Straggler simulation in normalized time. Each worker's finishing time is
drawn from the runtime model; a job completes at the first arrival after
which the finished workers form a decodable set. Matrix-multiplication jobs
run the encoded computation end to end and check the decoded product.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
from loguru import logger

from .analysis.runtime import RuntimeModel
from .codes.channel import ErasurePattern
from .codes.constructions import GeneratorMatrix
from .decoders.base import DecodeReport, ErasureDecoder
from .decoders.map_decoder import recover_message
from .errors import InputError, MonotonicityError
from .utils.parallel import map_chunks
from .utils.rng import chunk_sizes, keyed_rng
from .utils.stats import mean_interval


@dataclass
class JobResult:
    completion_time: float
    workers_used: Tuple[int, ...]
    success: bool
    report: Optional[DecodeReport] = None
    metrics: Dict[str, Any] = field(default_factory=dict)
    payload: Optional[np.ndarray] = field(default=None, repr=False)

    def to_record(self) -> Dict[str, Any]:
        record = {
            "completion_time": self.completion_time,
            "workers_used": list(self.workers_used),
            "success": self.success,
        }
        record.update(self.metrics)
        return record


def sample_runtimes(n: int, k: int, model: RuntimeModel, rng: np.random.Generator, size: Optional[int] = None) -> np.ndarray:
    """Worker finishing times (1 + W/mu)/k with W ~ Weibull(alpha); shape (n,) or (size, n)."""
    if n < 1 or not 1 <= k <= n:
        raise InputError(f"need 1 <= k <= n, got n={n}, k={k}")
    shape = (n,) if size is None else (size, n)
    w = rng.weibull(model.alpha, size=shape)
    return (1.0 + w / model.mu) / k


def _check_monotone(decoder: ErasureDecoder, order: Sequence[int], j: int) -> None:
    n = decoder.generator.n
    for later in range(j + 1, n + 1):
        if not decoder.decodable(sorted(order[later:])):
            raise MonotonicityError(
                f"{decoder.name}: prefix of {j} arrivals decodes but prefix of {later} does not"
            )


def job_completion_time(
    G: GeneratorMatrix, decoder: ErasureDecoder, times: np.ndarray, verify_monotone: bool = False
) -> JobResult:
    """First arrival time at which the finished workers are decodable."""
    times = np.asarray(times, dtype=np.float64)
    if times.shape != (G.n,):
        raise InputError(f"expected {G.n} finishing times, got shape {times.shape}")
    order = [int(i) for i in np.argsort(times, kind="stable")]
    j = decoder.first_decodable_prefix(order)
    if j is None:
        logger.debug(f"{decoder.name}: no decodable prefix; job fails at the last arrival")
        return JobResult(float(times[order[-1]]), tuple(sorted(order)), False)
    if verify_monotone:
        _check_monotone(decoder, order, j)
    return JobResult(float(times[order[j - 1]]), tuple(sorted(order[:j])), True)


@dataclass(frozen=True)
class _JobChunk:
    generator: GeneratorMatrix
    decoder: ErasureDecoder
    model: RuntimeModel
    seed: int
    chunk: int
    size: int
    verify_monotone: bool


def _run_chunk(task: _JobChunk) -> List[Tuple[float, bool]]:
    rng = keyed_rng(task.seed, "jobs", task.chunk)
    times = sample_runtimes(task.generator.n, task.generator.k, task.model, rng, size=task.size)
    out = []
    for row in times:
        result = job_completion_time(task.generator, task.decoder, row, task.verify_monotone)
        out.append((result.completion_time, result.success))
    return out


@dataclass
class EmpiricalTime:
    mean: float
    ci_low: float
    ci_high: float
    jobs: int
    failures: int
    samples: np.ndarray = field(repr=False, default_factory=lambda: np.empty(0))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mean": self.mean,
            "ci_low": self.ci_low,
            "ci_high": self.ci_high,
            "jobs": self.jobs,
            "failures": self.failures,
        }


def empirical_avg_time(
    G: GeneratorMatrix,
    decoder: ErasureDecoder,
    model: RuntimeModel,
    jobs: int,
    seed: int = 2021,
    chunk_size: int = 1024,
    workers: int = 1,
    verify_monotone: bool = False,
) -> EmpiricalTime:
    """Monte-Carlo mean job completion time with a 95% interval."""
    if jobs < 1:
        raise InputError("jobs must be positive")
    tasks = [
        _JobChunk(G, decoder, model, seed, chunk, size, verify_monotone)
        for chunk, size in chunk_sizes(jobs, chunk_size)
    ]
    results = [item for chunk in map_chunks(_run_chunk, tasks, workers) for item in chunk]
    samples = np.array([t for t, _ in results])
    failures = sum(1 for _, ok in results if not ok)
    mean, low, high = mean_interval(samples)
    logger.info(f"{decoder.name} ({G.n},{G.k}): mean completion {mean:.5f} over {jobs} jobs")
    return EmpiricalTime(mean, low, high, jobs, failures, samples)


def encode_blocks(A: np.ndarray, G: GeneratorMatrix) -> Tuple[np.ndarray, int]:
    """Split A into k row blocks (zero padded) and return the n encoded blocks and the padding."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise InputError("A must be a matrix")
    k = G.k
    rows = A.shape[0]
    padding = (-rows) % k
    if padding:
        A = np.vstack([A, np.zeros((padding, A.shape[1]))])
    blocks = A.reshape(k, -1, A.shape[1])
    encoded = np.tensordot(G.entries.T.astype(np.float64), blocks, axes=(1, 0))
    return encoded, padding


def run_matmul_job(
    A: np.ndarray,
    B: np.ndarray,
    G: GeneratorMatrix,
    decoder: ErasureDecoder,
    model: RuntimeModel,
    rng: np.random.Generator,
    exact: bool = False,
) -> JobResult:
    """Coded A @ B: workers multiply encoded row blocks of A by B; the first decodable set is decoded."""
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    if A.ndim != 2 or B.ndim != 2 or A.shape[1] != B.shape[0]:
        raise InputError(f"cannot multiply shapes {A.shape} and {B.shape}")
    encoded, padding = encode_blocks(A, G)
    worker_outputs = np.einsum("nbc,cd->nbd", encoded, B)

    times = sample_runtimes(G.n, G.k, model, rng)
    job = job_completion_time(G, decoder, times)
    if not job.success:
        return job
    pattern = ErasurePattern(G.n, tuple(i for i in range(G.n) if i not in set(job.workers_used)))
    received = worker_outputs.copy()
    received[list(pattern.erased)] = 0.0

    report = decoder.recover(received, pattern)
    codeword = received.copy()
    if report.recovered:
        codeword[list(report.recovered)] = report.values
    blocks = recover_message(G, codeword, ErasurePattern(G.n, ()), exact=exact)
    product = blocks.reshape(-1, B.shape[1])[: A.shape[0]]

    expected = A @ B
    denom = float(np.max(np.abs(expected))) or 1.0
    error = float(np.max(np.abs(product - expected))) / denom
    job.report = report
    job.metrics = {"max_rel_error": error, "padding": padding, "product_shape": list(expected.shape)}
    job.payload = product
    return job
