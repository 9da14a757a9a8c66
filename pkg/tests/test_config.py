from pathlib import Path

import pytest
import yaml

from casecontext.errors import ConfigError
from casecontext.pipeline.config import dump_config, load_config, parse_config, validate_config

SYNTHETIC = {"corpus": {"synthetic": {"n_topics": 2}}}


class TestParseConfig:

    def test_defaults(self):
        config = parse_config(SYNTHETIC)
        assert config.training.temperature == 0.05
        assert config.k == 5
        assert config.encoding.budget == 2048
        assert config.similarity_kind == "cosine"
        assert config.gateway.backend == "mock"
        assert config.corpus.synthetic.n_topics == 2
        assert config.encoding.include_triplets and config.encoding.include_reasoning

    def test_zero_temperature_rejected(self):
        with pytest.raises(ConfigError, match="training.temperature"):
            parse_config({**SYNTHETIC, "training": {"temperature": 0}})

    def test_unknown_key_suggests_the_closest(self):
        with pytest.raises(ConfigError) as info:
            parse_config({**SYNTHETIC, "training": {"temprature": 0.1}})
        assert str(info.value) == "unknown key 'temprature' in training; did you mean 'temperature'?"

    def test_unknown_top_level_key(self):
        with pytest.raises(ConfigError, match="unknown key 'colour' in top level"):
            parse_config({**SYNTHETIC, "colour": "blue"})

    @pytest.mark.parametrize("corpus", [
        {},
        {"path": "cases", "synthetic": {}},
    ])
    def test_exactly_one_corpus_source(self, corpus):
        with pytest.raises(ConfigError, match="exactly one of 'path' and 'synthetic'"):
            parse_config({"corpus": corpus}, check_paths=False)

    def test_relative_paths_resolve_against_base(self, tmp_path):
        (tmp_path / "cases").mkdir()
        config = parse_config({"corpus": {"path": "cases"}}, base_dir=tmp_path)
        assert config.corpus.path == tmp_path / "cases"

    def test_missing_input_path(self, tmp_path):
        with pytest.raises(ConfigError, match="path does not exist"):
            parse_config({"corpus": {"path": "nowhere"}}, base_dir=tmp_path)
        config = parse_config({"corpus": {"path": "nowhere"}}, base_dir=tmp_path, check_paths=False)
        assert config.corpus.path == tmp_path / "nowhere"

    def test_pool_depth_covers_count(self):
        with pytest.raises(ConfigError, match="pool_depth"):
            parse_config({**SYNTHETIC, "mining": {"count": 5, "pool_depth": 3}})

    def test_judgement_headings_follow_conclusion_patterns(self):
        corpus = {**SYNTHETIC["corpus"], "segmentation": {"conclusion_patterns": ["disposition"]}}
        config = parse_config({**SYNTHETIC, "corpus": corpus})
        assert config.extraction.judgement_headings == ["disposition"]
        assert parse_config(SYNTHETIC).extraction.judgement_headings == ["judg(?:e)?ment", "order"]

    def test_judgement_headings_must_cover_conclusion_patterns(self):
        corpus = {**SYNTHETIC["corpus"], "segmentation": {"conclusion_patterns": ["disposition", "order"]}}
        with pytest.raises(ConfigError, match=r"judgement_headings lacks conclusion pattern\(s\) \['disposition'\]"):
            parse_config({**SYNTHETIC, "corpus": corpus, "extraction": {"judgement_headings": ["order", "judgment"]}})
        config = parse_config({
            **SYNTHETIC, "corpus": corpus, "extraction": {"judgement_headings": ["disposition", "order", "decision"]}
        })
        assert "decision" in config.extraction.judgement_headings

    def test_not_a_mapping(self):
        with pytest.raises(ConfigError, match="mapping"):
            parse_config(["corpus"])

    def test_section_hash_tracks_only_named_sections(self):
        a = parse_config(SYNTHETIC)
        b = parse_config({**SYNTHETIC, "training": {"steps": 7}})
        assert a.section_hash("bm25", "mining") == b.section_hash("bm25", "mining")
        assert a.section_hash("training") != b.section_hash("training")
        assert a.fingerprint() != b.fingerprint()


class TestLoadConfig:

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            load_config(tmp_path / "absent.yaml")

    def test_bad_yaml(self, tmp_path):
        path = tmp_path / "bad.yaml"
        path.write_text("corpus: [unclosed\n", encoding="utf-8")
        with pytest.raises(ConfigError, match="does not parse"):
            load_config(path)

    def test_dump_round_trips(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump({**SYNTHETIC, "seeds": [1, 2]}), encoding="utf-8")
        config = load_config(path)
        again = parse_config(yaml.safe_load(dump_config(config)), base_dir=Path(tmp_path))
        assert again == config
        assert again.seeds == [1, 2]

    def test_validate_config_fills_defaults(self, tmp_path):
        path = tmp_path / "config.yaml"
        path.write_text(yaml.safe_dump(SYNTHETIC), encoding="utf-8")
        config, normalized = validate_config(path)
        assert yaml.safe_load(normalized)["encoding"]["budget"] == 2048
        assert config.training.temperature == 0.05
