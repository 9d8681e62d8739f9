"""Tests for the recursive projection decoder for Reed-Muller codes."""

import pickle
from itertools import combinations

import numpy as np
import pytest

from codedcomp.codes.channel import ErasurePattern
from codedcomp.codes.constructions import mds_real_generator, rm_generator, rm_subcode_generator
from codedcomp.decoders.map_decoder import MapDecoder
from codedcomp.decoders.projective import (
    ProjectiveDecoder,
    aggregate,
    build_projection_plan,
    decode,
    decode_leaf,
    default_n_max,
    plan_from_dict,
    plan_to_dict,
    project,
)
from codedcomp.errors import ConstructionError, InputError


def _codeword(G, rng):
    return G.entries.T.astype(np.float64) @ rng.standard_normal(G.k)


@pytest.mark.unit
class TestPlans:
    @pytest.mark.parametrize("m,r", [(3, 1), (3, 2), (4, 2), (4, 3), (5, 3), (6, 3)])
    def test_plan_count_and_rank(self, m, r):
        plans = build_projection_plan(m, r)
        assert len(plans) == len(list(combinations(range(m), r - 1)))
        for plan in plans:
            assert plan.rank == m - r + 2
            assert plan.num_cosets == 2 ** (m - r + 1)
            assert plan.normalizer == (2 if r > 1 else 1)

    @pytest.mark.slow
    @pytest.mark.parametrize("m,r", [(7, 3), (8, 4)])
    def test_larger_codes(self, m, r):
        assert all(p.rank == m - r + 2 for p in build_projection_plan(m, r))

    def test_cosets_of_rm32(self):
        plans = build_projection_plan(3, 2)
        assert [p.basis for p in plans] == [(1,), (2,), (3,)]
        assert plans[0].mask == 4
        assert plans[0].cosets == [(0, 4), (1, 5), (2, 6), (3, 7)]
        assert plans[1].cosets == [(0, 2), (1, 3), (4, 6), (5, 7)]
        assert plans[2].cosets == [(0, 1), (2, 3), (4, 5), (6, 7)]
        for plan in plans:
            assert set(np.unique(plan.gamma)) == {-1, 1}

    def test_invalid_order(self):
        with pytest.raises(InputError):
            build_projection_plan(3, 0)
        with pytest.raises(InputError):
            build_projection_plan(3, 4)

    def test_serialized_plans_rebuild(self):
        for plan in build_projection_plan(4, 2):
            again = plan_from_dict(plan_to_dict(plan))
            assert again.cosets == plan.cosets
            np.testing.assert_array_equal(again.gamma, plan.gamma)
            np.testing.assert_array_equal(again.reduced, plan.reduced)

    def test_corrupt_plan_rejected(self):
        data = plan_to_dict(build_projection_plan(4, 2)[0])
        data["reduced"] = data["reduced"][:-1]
        with pytest.raises(ConstructionError):
            plan_from_dict(data)

    def test_default_iterations(self):
        assert default_n_max(3, 2) == 1
        assert default_n_max(4, 2) == 2
        assert default_n_max(5, 3) == 2
        assert default_n_max(6, 3) == 3
        assert default_n_max(7, 2) == 3


@pytest.mark.unit
class TestSingleErasure:
    """RM(3,2) with coordinate 4 erased, followed plan by plan."""

    @pytest.fixture
    def received(self, rm32, rng):
        y = _codeword(rm32, rng)
        return y, ErasurePattern(8, (4,))

    @pytest.mark.parametrize("plan_index,coset", [(0, 0), (1, 2), (2, 2)])
    def test_each_plan_recovers_the_erasure(self, rm32, received, plan_index, coset):
        y, pattern = received
        plan = build_projection_plan(3, 2, rm32)[plan_index]
        known = ~pattern.mask
        vals = np.where(known, y, 0.0)

        pw = project(vals, known, plan)
        assert np.flatnonzero(~pw.known).tolist() == [coset]

        decoded, notes = decode_leaf(pw)
        assert decoded.known.all()
        assert notes == []

        filled = aggregate(vals, known, decoded)
        assert filled == [4]
        assert vals[4] == pytest.approx(y[4], abs=1e-10)

    def test_trace(self, rm32, received):
        y, pattern = received
        report = ProjectiveDecoder(rm32, trace=True).recover(y, pattern)
        assert report.success
        assert report.iterations == 1
        assert report.recovered == (4,)
        np.testing.assert_allclose(report.values, [y[4]], atol=1e-10)
        assert report.diagnostics == ["iter=1 plan=[1] unknown_cosets=[0] leaf_recovered=[0] filled=[4]"]


@pytest.mark.integration
class TestDecoding:
    def test_agrees_with_map_on_rm32(self, rm32):
        proj, mapd = ProjectiveDecoder(rm32), MapDecoder(rm32)
        for size in range(0, 4):
            for erased in combinations(range(8), size):
                assert proj.decodable(erased) == mapd.decodable(erased)

    def test_never_beats_map(self, rm42):
        proj, mapd = ProjectiveDecoder(rm42), MapDecoder(rm42)
        for size in range(1, 5):
            for erased in combinations(range(16), size):
                if proj.decodable(erased):
                    assert mapd.decodable(erased)

    def test_recovered_values(self, rm42, rng):
        decoder = ProjectiveDecoder(rm42)
        y = _codeword(rm42, rng)
        checked = 0
        for erased in combinations(range(16), 3):
            pattern = ErasurePattern(16, erased)
            report = decoder.recover(y, pattern)
            if report.success:
                np.testing.assert_allclose(report.values, y[list(erased)], atol=1e-9)
                checked += 1
        assert checked > 0

    def test_payload_columns(self, rm42, rng):
        x = rng.standard_normal((11, 5))
        y = rm42.entries.T.astype(np.float64) @ x
        report = decode(rm42, y, ErasurePattern(16, (2, 9)))
        assert report.success
        np.testing.assert_allclose(report.values, y[[2, 9]], atol=1e-9)

    def test_flags_inconsistent_observations(self, rm42, rng):
        y = _codeword(rm42, rng)
        pattern = ErasurePattern(16, (0,))
        clean = ProjectiveDecoder(rm42).recover(y, pattern)
        assert not any(note.startswith("inconsistent") for note in clean.diagnostics)

        noisy = y.copy()
        noisy[1:] += rng.standard_normal(15)
        report = ProjectiveDecoder(rm42).recover(noisy, pattern)
        assert any(note.startswith("inconsistent") for note in report.diagnostics)

    def test_iteration_cap(self, rm42):
        many = ProjectiveDecoder(rm42, n_max=4)
        one = ProjectiveDecoder(rm42, n_max=1)
        for erased in combinations(range(16), 3):
            if one.decodable(erased):
                assert many.decodable(erased)

    def test_no_erasures(self, rm42, rng):
        y = _codeword(rm42, rng)
        report = ProjectiveDecoder(rm42).recover(y, ErasurePattern(16, ()))
        assert report.success and report.recovered == ()
        assert report.iterations == 1

    def test_pickles(self, rm42):
        decoder = ProjectiveDecoder(rm42)
        restored = pickle.loads(pickle.dumps(decoder))
        assert restored.decodable((0, 5)) == decoder.decodable((0, 5))


@pytest.mark.unit
class TestRejections:
    def test_needs_full_rm(self):
        with pytest.raises(InputError):
            ProjectiveDecoder(rm_subcode_generator(3, 5))
        with pytest.raises(InputError):
            ProjectiveDecoder(mds_real_generator(8, 4))

    def test_needs_positive_order(self):
        with pytest.raises(InputError):
            ProjectiveDecoder(rm_generator(3, 0))

    def test_plans_must_match(self, rm42):
        with pytest.raises(InputError):
            ProjectiveDecoder(rm42, plans=build_projection_plan(3, 2))
