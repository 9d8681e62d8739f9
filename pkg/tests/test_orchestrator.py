"""Tests for the experiment orchestrator."""

import pytest

from codedcomp.config import CodedCompConfig, ExperimentConfig
from codedcomp.decoders.map_decoder import MapDecoder
from codedcomp.decoders.polar_sc import ScDecoder
from codedcomp.decoders.projective import ProjectiveDecoder
from codedcomp.errors import InputError
from codedcomp.orchestrator import ExperimentOrchestrator, setup_logging


@pytest.fixture
def orchestrator(tmp_path):
    return ExperimentOrchestrator(CodedCompConfig(workspace_path=str(tmp_path / "ws"), enum_limit=2000))


@pytest.mark.unit
class TestCodeSelection:
    def test_rm_from_order(self, orchestrator):
        exp = ExperimentConfig(command="simulate", scheme="rm-projective", m=3, r=2)
        G, decoder = orchestrator.code_for(exp, "rm-projective")
        assert (G.n, G.k) == (8, 7)
        assert isinstance(decoder, ProjectiveDecoder)
        assert decoder.n_max == 1

    def test_families_from_length(self, orchestrator):
        exp = ExperimentConfig(command="simulate", n=[8], k=5)
        assert isinstance(orchestrator.code_for(exp, "polar-sc")[1], ScDecoder)
        G, decoder = orchestrator.code_for(exp, "rm-map")
        assert G.k == 5 and isinstance(decoder, MapDecoder)
        assert orchestrator.code_for(exp, "uncoded")[0].k == 8

    def test_rejections(self, orchestrator):
        with pytest.raises(InputError):
            orchestrator.code_for(ExperimentConfig(command="simulate", n=[12], k=6), "rm")
        with pytest.raises(InputError):
            orchestrator.code_for(ExperimentConfig(command="simulate"), "mds")
        with pytest.raises(InputError):
            orchestrator.code_for(ExperimentConfig(command="simulate", n=[8]), "ldpc")

    def test_cache_is_used(self, orchestrator):
        exp = ExperimentConfig(command="bler", m=3, r=1)
        orchestrator.code_for(exp, "rm")
        orchestrator.code_for(exp, "rm")
        assert orchestrator.cache.hits == 1


@pytest.mark.integration
class TestRuns:
    def test_run_dispatch(self, orchestrator):
        output = orchestrator.run(ExperimentConfig(command="analyze", scheme="uncoded", n=[4, 8]))
        assert [row["k_star"] for row in output.records] == [4, 8]
        assert output.partial is False

    def test_bler_map_only(self, orchestrator):
        exp = ExperimentConfig(command="bler", m=3, r=1, decoder="map", eps="0:1:3", trials=100)
        output = orchestrator.run_bler(exp)
        blers = [row["bler"] for row in output.records]
        assert len(blers) == 3
        assert blers[0] == 0.0
        assert blers[2] == 1.0
        assert 0.0 < blers[1] < 1.0
        assert {row["decoder"] for row in output.records} == {"map"}
        assert "n_max" not in output.header

    def test_stability_needs_order(self, orchestrator):
        with pytest.raises(InputError):
            orchestrator.run_stability(ExperimentConfig(command="stability", code="rm"))

    def test_asymptotic_needs_exponential(self, orchestrator):
        exp = ExperimentConfig(command="asymptotic", n=[64], dist="weibull", alpha=2.0)
        with pytest.raises(InputError):
            orchestrator.run_asymptotic(exp)


@pytest.mark.unit
def test_setup_logging_creates_log_dir(tmp_path):
    config = CodedCompConfig(workspace_path=str(tmp_path / "ws"))
    setup_logging(config, level="WARNING")
    assert config.logs_dir.is_dir()


@pytest.mark.integration
class TestConfigWiring:
    def test_singular_floor_reaches_studies(self, tmp_path):
        config = CodedCompConfig(workspace_path=str(tmp_path / "ws"), singular_floor=1e300)
        exp = ExperimentConfig(command="stability", code="mds", n=[8], k=4, trials=10)
        output = ExperimentOrchestrator(config).run_stability(exp)
        assert [row["singular_count"] for row in output.records] == [10, 10]

    def test_default_floor_keeps_mds_regular(self, orchestrator):
        exp = ExperimentConfig(command="stability", code="mds", n=[8], k=4, trials=10)
        output = orchestrator.run_stability(exp)
        assert output.records[0]["singular_count"] == 0
