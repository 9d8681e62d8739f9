"""Tests for straggler simulation and coded matrix multiplication."""

from typing import Sequence

import numpy as np
import pytest

from codedcomp.analysis.runtime import RuntimeModel, Scheme, scheme_time
from codedcomp.codes.channel import ErasurePattern
from codedcomp.codes.constructions import mds_real_generator, rm_generator, uncoded_generator
from codedcomp.decoders.base import DecodeReport, ErasureDecoder
from codedcomp.decoders.map_decoder import MapDecoder
from codedcomp.decoders.projective import ProjectiveDecoder
from codedcomp.errors import InputError, MonotonicityError
from codedcomp.simulator import (
    empirical_avg_time,
    encode_blocks,
    job_completion_time,
    run_matmul_job,
    sample_runtimes,
)

EXP = RuntimeModel.exponential(1.0)


class OnlySingleErasure(ErasureDecoder):
    """Decodes exactly one erasure; violates monotonicity on purpose."""

    name = "single"

    def decodable(self, erased: Sequence[int]) -> bool:
        return len(erased) == 1

    def recover(self, y: np.ndarray, pattern: ErasurePattern) -> DecodeReport:
        raise NotImplementedError


@pytest.mark.unit
class TestCompletionTime:
    def test_runtimes_respect_the_shift(self, rng):
        times = sample_runtimes(8, 4, EXP, rng, size=5)
        assert times.shape == (5, 8)
        assert np.all(times >= 0.25)

    def test_mds_waits_for_k(self, mds84):
        times = np.array([0.8, 0.1, 0.7, 0.2, 0.6, 0.3, 0.5, 0.4])
        job = job_completion_time(mds84, MapDecoder(mds84), times)
        assert job.success
        assert job.completion_time == 0.4
        assert job.workers_used == (1, 3, 5, 7)

    def test_rm31_waits_past_a_face(self, rm31, rm31_map):
        times = np.linspace(0.1, 0.8, 8)
        job = job_completion_time(rm31, rm31_map, times, verify_monotone=True)
        assert job.completion_time == pytest.approx(0.5)
        assert job.workers_used == (0, 1, 2, 3, 4)
        assert job.to_record()["workers_used"] == [0, 1, 2, 3, 4]

    def test_uncoded_waits_for_everyone(self):
        G = uncoded_generator(4)
        job = job_completion_time(G, MapDecoder(G), np.array([0.3, 0.9, 0.2, 0.4]))
        assert job.completion_time == 0.9

    def test_monotonicity_violation(self):
        G = rm_generator(2, 1)
        decoder = OnlySingleErasure(G)
        times = np.array([0.1, 0.2, 0.3, 0.4])
        assert job_completion_time(G, decoder, times).success
        with pytest.raises(MonotonicityError):
            job_completion_time(G, decoder, times, verify_monotone=True)

    def test_shape_checked(self, rm31, rm31_map):
        with pytest.raises(InputError):
            job_completion_time(rm31, rm31_map, np.ones(7))


@pytest.mark.integration
class TestEmpiricalTime:
    def test_mds_matches_closed_form(self):
        G = mds_real_generator(8, 6)
        result = empirical_avg_time(G, MapDecoder(G), EXP, jobs=5000, seed=1, chunk_size=1000)
        assert result.jobs == 5000
        assert result.failures == 0
        assert result.mean == pytest.approx(0.36964, abs=0.006)
        assert result.ci_low < result.mean < result.ci_high

    def test_uncoded_matches_closed_form(self):
        G = uncoded_generator(8)
        result = empirical_avg_time(G, MapDecoder(G), EXP, jobs=20000, seed=3, chunk_size=2000)
        assert result.failures == 0
        assert result.mean == pytest.approx(0.4647, abs=0.005)

    def test_rm42_map_matches_analytic(self, rm42):
        analytic = scheme_time(Scheme.RM_MAP, 16, 11, EXP)[0].t_avg
        result = empirical_avg_time(rm42, MapDecoder(rm42), EXP, jobs=5000, seed=8, chunk_size=1000)
        assert result.failures == 0
        assert result.mean == pytest.approx(analytic, abs=0.004)

    def test_worker_count_does_not_change_samples(self, rm31, rm31_map):
        serial = empirical_avg_time(rm31, rm31_map, EXP, jobs=200, seed=9, chunk_size=50)
        pooled = empirical_avg_time(rm31, rm31_map, EXP, jobs=200, seed=9, chunk_size=50, workers=2)
        np.testing.assert_array_equal(serial.samples, pooled.samples)

    def test_projective_is_never_faster_than_map(self, rm42):
        model = RuntimeModel.weibull(1.0, 2.0)
        mapd = empirical_avg_time(rm42, MapDecoder(rm42), model, jobs=300, seed=4, chunk_size=100)
        proj = empirical_avg_time(rm42, ProjectiveDecoder(rm42), model, jobs=300, seed=4, chunk_size=100)
        assert np.all(proj.samples >= mapd.samples)

    def test_jobs_must_be_positive(self, rm31, rm31_map):
        with pytest.raises(InputError):
            empirical_avg_time(rm31, rm31_map, EXP, jobs=0)


@pytest.mark.integration
class TestMatrixMultiplication:
    def test_encode_pads_rows(self, rm31):
        encoded, padding = encode_blocks(np.ones((10, 3)), rm31)
        assert padding == 2
        assert encoded.shape == (8, 3, 3)

    def test_integer_product(self, rm42, rng):
        A = rng.integers(-5, 6, size=(128, 32))
        B = rng.integers(-5, 6, size=(32, 16))
        job = run_matmul_job(A, B, rm42, MapDecoder(rm42), EXP, rng, exact=True)
        assert job.success
        assert job.metrics["product_shape"] == [128, 16]
        assert job.metrics["max_rel_error"] < 1e-12
        np.testing.assert_allclose(job.payload, A @ B, atol=1e-8)

    @pytest.mark.parametrize("decoder_cls", [MapDecoder, ProjectiveDecoder])
    def test_real_product(self, rm42, rng, decoder_cls):
        A = rng.standard_normal((64, 20))
        B = rng.standard_normal((20, 8))
        job = run_matmul_job(A, B, rm42, decoder_cls(rm42), EXP, rng)
        assert job.success
        assert job.metrics["max_rel_error"] < 1e-9

    def test_shape_mismatch(self, rm42, rng):
        with pytest.raises(InputError):
            run_matmul_job(np.ones((4, 3)), np.ones((2, 2)), rm42, MapDecoder(rm42), EXP, rng)
