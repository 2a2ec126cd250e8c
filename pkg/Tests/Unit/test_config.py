"""
Tests for configuration management
"""

import json

import pytest
import yaml

from mlnn.utils.config import (
    ConfigManager,
    LoggingConfig,
    MlscConfig,
    ProblemConfig,
    RunConfig,
    load_run_config,
)
from mlnn.utils.exceptions import ConfigurationError, FileError


class TestConfigClasses:
    """Test configuration data classes."""

    def test_problem_config_defaults(self):
        """Test ProblemConfig default values."""
        config = ProblemConfig()
        assert config.kind == "advection-diffusion"
        assert config.bounds == [[1.0, 100.0]]
        assert config.n_coarse == 100
        assert config.synthetic_shape == [8, 8]

    def test_mlsc_config_defaults(self):
        """Test MlscConfig falls back to the multilevel level count."""
        config = MlscConfig()
        assert config.n_levels is None
        assert config.max_cc_level == 10

    def test_logging_config_defaults(self):
        """Test LoggingConfig default values."""
        config = LoggingConfig()
        assert config.level == "INFO"
        assert config.log_file is None

    def test_run_config_defaults(self):
        """Test RunConfig default values."""
        config = RunConfig()
        assert config.seed == 0
        assert config.jobs == 1
        assert config.training.transfer_learning is True
        assert len(config.search.lambdas) == 3

    def test_from_dict_partial(self):
        """Test missing sections fall back to defaults."""
        config = RunConfig.from_dict({"problem": {"kind": "burgers"}, "seed": 5})
        assert config.problem.kind == "burgers"
        assert config.problem.n_coarse == 100
        assert config.seed == 5

    def test_from_dict_unknown_section(self):
        """Test unknown top-level keys are rejected."""
        with pytest.raises(ConfigurationError, match="Unknown config sections"):
            RunConfig.from_dict({"optimiser": {}})

    def test_from_dict_unknown_key_in_section(self):
        """Test unknown keys inside a section are rejected."""
        with pytest.raises(ConfigurationError, match="problem"):
            RunConfig.from_dict({"problem": {"reynolds": 3}})

    def test_from_dict_section_not_mapping(self):
        """Test a section must be a mapping."""
        with pytest.raises(ConfigurationError, match="must be a mapping"):
            RunConfig.from_dict({"training": [1, 2]})

    def test_to_dict_round_trip(self, quick_config):
        """Test to_dict feeds back into from_dict unchanged."""
        assert RunConfig.from_dict(quick_config.to_dict()) == quick_config


class TestConfigValidation:
    """Test value range checks."""

    @pytest.mark.parametrize(
        "data, match",
        [
            ({"problem": {"kind": "heat"}}, "Unknown problem kind"),
            ({"problem": {"bounds": []}}, "at least one interval"),
            ({"problem": {"bounds": [[5.0, 1.0]]}}, "Invalid parameter interval"),
            ({"problem": {"n_coarse": 1}}, "n_coarse"),
            ({"training": {"learning_rate": 0.0}}, "positive"),
            ({"search": {"lambdas": [-1.0]}}, "search.lambdas"),
            ({"search": {"n_cnn": []}}, "search.n_cnn"),
            ({"search": {"width_factors": [0.0]}}, "search.width_factors"),
            ({"multilevel": {"max_levels": 0}}, "max_levels"),
            ({"multilevel": {"epsilon": 0.0}}, "thresholds"),
            ({"multilevel": {"max_rounds": 0}}, "max_rounds"),
            ({"mlsc": {"max_cc_level": -1}}, "mlsc"),
            ({"jobs": 0}, "jobs"),
            ({"seed": -1}, "seed must be a non-negative integer"),
            ({"seed": 2.5}, "seed must be a non-negative integer"),
            ({"problem": {"synthetic_shape": [64, 8]}}, "synthetic_shape"),
            ({"problem": {"synthetic_shape": [8]}}, "synthetic_shape"),
        ],
    )
    def test_invalid_values(self, data, match):
        """Test each out-of-range setting raises ConfigurationError."""
        with pytest.raises(ConfigurationError, match=match):
            RunConfig.from_dict(data)

    def test_content_hash_stable(self, quick_config_dict):
        """Test equal configs hash equal and any change alters the hash."""
        first = RunConfig.from_dict(quick_config_dict)
        second = RunConfig.from_dict(json.loads(json.dumps(quick_config_dict)))
        assert first.content_hash() == second.content_hash()
        assert len(first.content_hash()) == 40

        second.seed += 1
        assert first.content_hash() != second.content_hash()


class TestConfigManager:
    """Test ConfigManager functionality."""

    def test_load_without_file(self):
        """Test loading with no file gives defaults."""
        config = ConfigManager().load_config()
        assert config == RunConfig()

    def test_load_json_config(self, tmp_path, quick_config_dict):
        """Test loading a JSON config file."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps(quick_config_dict))

        config = ConfigManager(path).load_config()
        assert config.problem.kind == "diffusion"
        assert config.multilevel.max_levels == 3

    def test_load_yaml_config(self, tmp_path, quick_config_dict):
        """Test loading a YAML config file."""
        path = tmp_path / "run.yaml"
        path.write_text(yaml.safe_dump(quick_config_dict))

        config = ConfigManager(path).load_config()
        assert config.seed == 7
        assert config.search.width_factors == [1.0]

    def test_load_empty_yaml(self, tmp_path):
        """Test an empty YAML document means all defaults."""
        path = tmp_path / "empty.yml"
        path.write_text("")
        assert ConfigManager(path).load_config() == RunConfig()

    def test_missing_file(self, tmp_path):
        """Test a missing config file raises FileError."""
        with pytest.raises(FileError, match="Config file not found"):
            ConfigManager(tmp_path / "absent.json").load_config()

    def test_malformed_json_reports_line(self, tmp_path):
        """Test malformed JSON reports the line and column."""
        path = tmp_path / "bad.json"
        path.write_text('{\n  "seed": 3,\n  "jobs": \n}\n')

        with pytest.raises(ConfigurationError) as exc_info:
            ConfigManager(path).load_config()
        assert exc_info.value.details["line"] == 4
        assert "line 4" in str(exc_info.value)

    def test_malformed_yaml_reports_line(self, tmp_path):
        """Test malformed YAML reports the line."""
        path = tmp_path / "bad.yaml"
        path.write_text("seed: 3\nproblem:\n  kind: [burgers\n")

        with pytest.raises(ConfigurationError) as exc_info:
            ConfigManager(path).load_config()
        assert exc_info.value.details["line"] is not None

    def test_non_mapping_document(self, tmp_path):
        """Test a top-level list is rejected."""
        path = tmp_path / "list.json"
        path.write_text("[1, 2]")
        with pytest.raises(ConfigurationError, match="must contain a mapping"):
            ConfigManager(path).load_config()

    def test_unsupported_suffix(self, tmp_path):
        """Test unsupported file formats are rejected."""
        path = tmp_path / "run.toml"
        path.write_text("seed = 1")
        with pytest.raises(ConfigurationError, match="Unsupported"):
            ConfigManager(path).load_config()

    def test_env_overrides_file(self, tmp_path, monkeypatch, quick_config_dict):
        """Test MLNN_JOBS and MLNN_LOG_LEVEL override the file."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps({**quick_config_dict, "jobs": 2}))
        monkeypatch.setenv("MLNN_JOBS", "6")
        monkeypatch.setenv("MLNN_LOG_LEVEL", "DEBUG")

        config = ConfigManager(path).load_config()
        assert config.jobs == 6
        assert config.logging.level == "DEBUG"

    def test_env_jobs_not_integer(self, monkeypatch):
        """Test a non-integer MLNN_JOBS raises ConfigurationError."""
        monkeypatch.setenv("MLNN_JOBS", "many")
        with pytest.raises(ConfigurationError, match="MLNN_JOBS"):
            ConfigManager().load_config()

    def test_config_is_cached(self, tmp_path, quick_config_dict):
        """Test the loaded config is reused."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps(quick_config_dict))
        manager = ConfigManager(path)
        assert manager.get_config() is manager.load_config()

    @pytest.mark.parametrize("suffix", [".json", ".yaml"])
    def test_create_default_config(self, tmp_path, suffix):
        """Test writing and reloading the default config."""
        path = ConfigManager().create_default_config(tmp_path / "sub" / f"c{suffix}")
        assert path.exists()
        assert ConfigManager(path).load_config() == RunConfig()

    def test_load_run_config_seed_override(self, tmp_path, quick_config_dict):
        """Test --seed replaces the configured seed."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps(quick_config_dict))
        assert load_run_config(path).seed == 7
        assert load_run_config(path, seed=99).seed == 99

    def test_load_run_config_negative_seed(self, tmp_path, quick_config_dict):
        """Test a negative --seed is a configuration error."""
        path = tmp_path / "run.json"
        path.write_text(json.dumps(quick_config_dict))
        with pytest.raises(ConfigurationError, match="seed"):
            load_run_config(path, seed=-1)
