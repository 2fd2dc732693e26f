"""Tests for layered settings and the derived component configs."""

import pytest

from segcause.config.settings import Settings, reload_settings
from segcause.utils.exceptions import ConfigurationError


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    """Run each test away from any .env in the working tree."""
    monkeypatch.chdir(tmp_path)


class TestSettingsLayers:
    """Tests for the precedence of overrides, environment and file."""

    def test_defaults(self):
        """Test the defaults resolve without any input."""
        settings = reload_settings()
        assert settings.train_epochs == 50
        assert settings.seeds == [0, 1, 2, 3, 4]
        assert settings.mask_source == "ground_truth_scm"

    def test_file_then_env_then_override(self, tmp_path, monkeypatch):
        """Test overrides beat the environment, which beats the file."""
        config = tmp_path / "run.env"
        config.write_text("TRAIN_EPOCHS=7\nTRAIN_BATCH_SIZE=4\nRUN_SEED=3\n")
        monkeypatch.setenv("TRAIN_BATCH_SIZE", "8")
        settings = reload_settings(str(config), {"RUN_SEED": "9"})
        assert settings.train_epochs == 7
        assert settings.train_batch_size == 8
        assert settings.run_seed == 9

    def test_missing_file(self, tmp_path):
        """Test a missing config file is a configuration error."""
        with pytest.raises(ConfigurationError, match="not found"):
            reload_settings(str(tmp_path / "absent.env"))

    def test_invalid_value(self):
        """Test invalid values surface as configuration errors."""
        with pytest.raises(ConfigurationError, match="Invalid configuration"):
            reload_settings(overrides={"SEGMENTER_POOL_KERNEL": "0", "TRAIN_BATCH_SIZE": "0"})

    def test_empty_optional_is_none(self):
        """Test empty strings clear optional settings."""
        settings = reload_settings(overrides={"DATASET_PATH": " ", "SEGMENTER_T_MAX": ""})
        assert settings.dataset_path is None
        assert settings.segmenter_t_max is None

    @pytest.mark.parametrize(
        "key, value",
        [
            ("MASK_SOURCE", "oracle"),
            ("SPECTRAL_WAVELET", "sym4"),
            ("DATASET_FORMAT", "parquet"),
            ("EVAL_K_PERCENT", "100"),
            ("LOG_LEVEL", "LOUD"),
            ("LOSS_SEPARATION_MODE", "pull"),
        ],
    )
    def test_rejected_choices(self, key, value):
        """Test closed vocabularies reject unknown values."""
        with pytest.raises(ConfigurationError):
            reload_settings(overrides={key: value})


class TestSnapshot:
    """Tests for the resolved-settings snapshot."""

    def test_snapshot_reloads_unchanged(self, tmp_path):
        """Test a written snapshot loads back to the same settings."""
        settings = reload_settings(
            overrides={"SCM_ADJACENCY": "1,0;1,1", "SCM_N_VARIABLES": "2", "LOG_FILE": ""}
        )
        path = tmp_path / "snapshot.env"
        settings.write_snapshot(path)
        assert reload_settings(str(path)).snapshot() == settings.snapshot()

    def test_snapshot_keys_are_env_names(self):
        """Test the snapshot is keyed by environment variable names."""
        snapshot = Settings().snapshot()
        assert "TRAIN_EPOCHS" in snapshot
        assert list(snapshot) == sorted(snapshot)


class TestDerivedConfigs:
    """Tests for the component configs built from settings."""

    def test_model_config_widths_agree(self):
        """Test the fusion width follows the encoder d_z."""
        settings = reload_settings(overrides={"ENCODER_D_Z": "12", "SEGMENTER_L_MAX": "5"})
        config = settings.model_config_for(3, "classification")
        assert config.spectral.fusion_dim == 12
        assert config.decoder.max_segments == 4

    def test_scm_spec(self):
        """Test the generator spec picks up the adjacency and motif."""
        settings = reload_settings(
            overrides={
                "SCM_N_VARIABLES": "2",
                "SCM_ADJACENCY": "1,0;1,1",
                "SCM_MOTIF_VARIABLES": "0",
            }
        )
        spec = settings.scm_spec
        assert spec.adjacency == [[1, 0], [1, 1]]
        assert spec.motif.variables == [0]

    def test_schedule_disabled(self):
        """Test an empty schedule falls back to fixed weights."""
        settings = reload_settings(overrides={"LOSS_SCHEDULE": ""})
        assert settings.loss_weights.schedule is None

    def test_training_seed_override(self):
        """Test an explicit seed beats RUN_SEED."""
        settings = reload_settings(overrides={"RUN_SEED": "4"})
        assert settings.training_config().seed == 4
        assert settings.training_config(seed=11).seed == 11

    def test_masking_protocol(self):
        """Test the protocol carries k, fill and the requested target."""
        settings = reload_settings(overrides={"EVAL_K_PERCENT": "20", "EVAL_FILL": "zero"})
        protocol = settings.masking_protocol("bottom", seed=2)
        assert (protocol.k_percent, protocol.fill, protocol.target, protocol.seed) == (
            20.0,
            "zero",
            "bottom",
            2,
        )

    @pytest.mark.parametrize("mode", ["separation", "eq12_literal", "eq10_triplet"])
    def test_separation_modes_reach_loss_weights(self, mode):
        """Test every separation mode name is accepted and carried to the loss weights."""
        settings = reload_settings(overrides={"LOSS_SEPARATION_MODE": mode.upper()})
        assert settings.loss_weights.separation_mode == mode
