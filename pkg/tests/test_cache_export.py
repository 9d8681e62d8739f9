"""Tests for the artifact cache, result export and small helpers."""

import json

import numpy as np
import pytest

from codedcomp.codes.constructions import rm_generator
from codedcomp.utils.cache import ArtifactCache
from codedcomp.utils.export import (
    SCHEMA_VERSION,
    append_jsonl,
    read_csv,
    read_header,
    render_csv,
    render_json,
    write_text,
)
from codedcomp.utils.parallel import map_chunks
from codedcomp.utils.rng import chunk_sizes, keyed_rng
from codedcomp.utils.stats import mean_interval, wilson_interval


def _square(x):
    return x * x


@pytest.mark.unit
class TestArtifactCache:
    def test_generator_hit_after_miss(self, tmp_path):
        cache = ArtifactCache(tmp_path / "cache")
        first = cache.generator(rm_generator, "rm", m=3, r=1)
        second = cache.generator(rm_generator, "rm", m=3, r=1)
        assert (cache.hits, cache.misses) == (1, 1)
        np.testing.assert_array_equal(first.entries, second.entries)
        assert cache.path_for("generator-rm", {"m": 3, "r": 1}).exists()

    def test_corrupt_entry_is_rebuilt(self, tmp_path):
        cache = ArtifactCache(tmp_path / "cache")
        cache.path_for("generator-rm", {"m": 2, "r": 1}).write_text("{not json")
        G = cache.generator(rm_generator, "rm", m=2, r=1)
        assert G.k == 3
        assert cache.misses == 1
        json.loads(cache.path_for("generator-rm", {"m": 2, "r": 1}).read_text())

    def test_projection_plans(self, tmp_path):
        cache = ArtifactCache(tmp_path / "cache")
        built = cache.projection_plans(3, 2)
        loaded = cache.projection_plans(3, 2)
        assert cache.hits == 1
        assert [p.mask for p in loaded] == [p.mask for p in built]

    def test_disabled(self, tmp_path):
        cache = ArtifactCache(tmp_path / "off", enabled=False)
        cache.generator(rm_generator, "rm", m=2, r=1)
        assert not (tmp_path / "off").exists()
        assert cache.hits == cache.misses == 0

    def test_clear(self, tmp_path):
        cache = ArtifactCache(tmp_path / "cache")
        cache.generator(rm_generator, "rm", m=2, r=0)
        cache.generator(rm_generator, "rm", m=2, r=1)
        assert cache.clear() == 2
        assert cache.clear() == 0


@pytest.mark.unit
class TestExport:
    CONFIG = {"command": "bler", "seed": 3}

    def test_csv_header_and_body(self, tmp_path):
        records = [{"eps": 0.1, "bler": 0.25, "flags": ["a"]}, {"eps": 0.2, "bler": float("nan"), "flags": []}]
        text = render_csv(records, self.CONFIG, columns=["eps", "bler", "flags"], extra_header={"k": 7})
        lines = text.splitlines()
        assert lines[0] == '# schema_version: "1.0"'
        assert lines[1] == '# config: {"command": "bler", "seed": 3}'
        assert lines[2] == "# k: 7"
        assert lines[3] == "eps,bler,flags"

        path = write_text(tmp_path / "out" / "bler.csv", text)
        header = read_header(path)
        assert header["schema_version"] == SCHEMA_VERSION
        assert header["config"] == self.CONFIG
        assert header["k"] == 7
        frame = read_csv(path)
        assert list(frame["eps"]) == [0.1, 0.2]
        assert np.isnan(frame["bler"][1])

    def test_csv_is_deterministic(self):
        records = [{"x": 1.0 / 3.0}]
        assert render_csv(records, self.CONFIG) == render_csv(records, self.CONFIG)

    def test_json_document(self):
        text = render_json({"value": np.float64(0.5), "limit": float("inf"), "sizes": np.arange(2)}, self.CONFIG)
        document = json.loads(text)
        assert document["schema_version"] == SCHEMA_VERSION
        assert document["config"] == self.CONFIG
        assert document["value"] == 0.5
        assert document["limit"] == "inf"
        assert document["sizes"] == [0, 1]
        assert list(document) == sorted(document)

    def test_append_jsonl(self, tmp_path):
        path = tmp_path / "records.jsonl"
        assert append_jsonl(path, [{"a": 1}, {"a": np.int64(2)}]) == 2
        assert append_jsonl(path, [{"a": 3}]) == 1
        values = [json.loads(line)["a"] for line in path.read_text().splitlines()]
        assert values == [1, 2, 3]


@pytest.mark.unit
class TestHelpers:
    def test_keyed_streams(self):
        a = keyed_rng(1, "bler", 0).random(4)
        b = keyed_rng(1, "bler", 0).random(4)
        c = keyed_rng(1, "bler", 1).random(4)
        np.testing.assert_array_equal(a, b)
        assert not np.array_equal(a, c)
        with pytest.raises(ValueError):
            keyed_rng(1, -1)

    def test_long_string_keys_are_distinct(self):
        a = keyed_rng(5, "random-binary", 0).random(4)
        b = keyed_rng(5, "random-b", 0).random(4)
        c = keyed_rng(5, "conditional-x", 0).random(4)
        d = keyed_rng(5, "conditional-y", 0).random(4)
        assert not np.array_equal(a, b)
        assert not np.array_equal(c, d)

    def test_chunk_sizes(self):
        assert list(chunk_sizes(10, 4)) == [(0, 4), (1, 4), (2, 2)]
        assert list(chunk_sizes(0, 4)) == []
        with pytest.raises(ValueError):
            list(chunk_sizes(5, 0))

    def test_map_chunks_keeps_order(self):
        assert map_chunks(_square, range(6)) == [0, 1, 4, 9, 16, 25]
        assert map_chunks(_square, range(6), workers=2) == [0, 1, 4, 9, 16, 25]

    def test_wilson_interval(self):
        low, high = wilson_interval(0, 100)
        assert low == 0.0 and 0.0 < high < 0.05
        low, high = wilson_interval(50, 100)
        assert low < 0.5 < high
        assert wilson_interval(0, 0) == (0.0, 1.0)

    @pytest.mark.parametrize("trials", [1, 7, 100, 20000])
    def test_wilson_endpoints_are_exact(self, trials):
        assert wilson_interval(0, trials)[0] == 0.0
        assert wilson_interval(trials, trials)[1] == 1.0
        low, high = wilson_interval(1, trials)
        assert 0.0 <= low <= 1.0 / trials <= high

    def test_mean_interval(self):
        mean, low, high = mean_interval(np.array([1.0, 2.0, 3.0]))
        assert mean == 2.0
        assert low < 2.0 < high
        assert mean_interval(np.array([4.0])) == (4.0, 4.0, 4.0)
