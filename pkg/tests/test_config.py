import pytest

from storyforest.config import ConfigError, RunConfig, config_from_dict, load_config


def write(tmp_path, text):
    path = tmp_path / "run.toml"
    path.write_text(text, encoding="utf-8")
    return path


class TestDefaults:
    def test_defaults_mirror_documented_constants(self):
        cfg = RunConfig()
        assert cfg.min_len == 20
        assert cfg.min_cooccur == 3
        assert cfg.min_cond_prob == 0.15
        assert cfg.title_n == 1
        assert cfg.compat_threshold == 0.15
        assert cfg.strength_threshold == 0.25
        assert cfg.delta_per_day == 1.0
        cfg.validate()

    def test_period_seconds(self):
        assert RunConfig().period_seconds == 86400
        assert RunConfig(period_days=0.5).period_seconds == 43200


class TestLoading:
    def test_round_trip_sections(self, tmp_path):
        path = write(
            tmp_path,
            """
            [corpus]
            min_len = 10
            period_days = 0.5

            [graph]
            min_cooccur = 2

            [forest]
            strength_threshold = 0.3

            [synth]
            num_stories = 2
            seed = 5
            """,
        )
        cfg = load_config(path)
        assert cfg.min_len == 10
        assert cfg.period_seconds == 43200
        assert cfg.min_cooccur == 2
        assert cfg.strength_threshold == 0.3
        assert cfg.synth.num_stories == 2
        assert cfg.synth.seed == 5

    def test_unknown_section_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown section"):
            load_config(write(tmp_path, "[nonsense]\nx = 1\n"))

    def test_unknown_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown key"):
            load_config(write(tmp_path, "[corpus]\nmin_length = 20\n"))

    def test_unknown_synth_key_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="synth"):
            load_config(write(tmp_path, "[synth]\nstories = 2\n"))

    def test_parse_error_is_config_error(self, tmp_path):
        with pytest.raises(ConfigError, match="cannot parse"):
            load_config(write(tmp_path, "not toml ["))

    @pytest.mark.parametrize(
        "section,key,value",
        [
            ("corpus", "min_len", -1),
            ("corpus", "period_days", 0),
            ("keywords", "window", 1),
            ("keywords", "damping", 1.5),
            ("graph", "min_cooccur", 0),
            ("graph", "min_cond_prob", 2.0),
            ("events", "min_sim", -0.5),
            ("events", "doc_max_size", 1),
            ("forest", "delta_per_day", 0),
            ("forest", "title_n", 0),
        ],
    )
    def test_range_checks(self, section, key, value):
        with pytest.raises(ConfigError):
            config_from_dict({section: {key: value}})

    def test_decider_weights_must_have_five(self):
        with pytest.raises(ConfigError):
            config_from_dict({"events": {"decider_weights": [1.0, 2.0]}})
