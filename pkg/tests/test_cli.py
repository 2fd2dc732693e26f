"""Tests for the command-line surface and its error handling."""

import json

import pytest
from pydantic import BaseModel, ValidationError

from segcause.cli.commands import parse_overrides
from segcause.cli.errors import cli_error_handler, resolve_exit_code
from segcause.data.io import load_dataset, load_mask
from segcause.main import main
from segcause.utils.constants import ExitCode
from segcause.utils.exceptions import (
    ArtifactIOError,
    ConfigurationError,
    DataFormatError,
    MetricUndefinedError,
    NumericDivergenceError,
    SegCauseError,
)

SMALL_SCM = [
    "SCM_N_VARIABLES=2",
    "SCM_LENGTH=32",
    "SCM_TRAIN_COUNT=8",
    "SCM_TEST_COUNT=4",
    "SCM_MOTIF_WINDOW_START=8",
    "SCM_MOTIF_WINDOW_END=16",
]
SMALL_MODEL = [
    "REFERENCE_EPOCHS=1",
    "REFERENCE_LSTM_HIDDEN=4",
    "REFERENCE_PROJECTION_DIM=4",
    "SEGMENTER_POOL_KERNEL=3",
    "SEGMENTER_L_MAX=4",
    "SPECTRAL_J_MAX=3",
    "SPECTRAL_T_PRIME=4",
    "SPECTRAL_TREND_DIM=4",
    "ENCODER_INPUT_PROJ_DIM=4",
    "ENCODER_CHANNELS=4",
    "ENCODER_KERNEL_SIZE=2",
    "ENCODER_DILATIONS=1,2",
    "ENCODER_D_Z=8",
    "DECODER_LSTM_HIDDEN=4",
    "TRAIN_EPOCHS=1",
    "TRAIN_BATCH_SIZE=4",
]


def _sets(pairs: list[str]) -> list[str]:
    return [arg for pair in pairs for arg in ("--set", pair)]


@pytest.fixture(autouse=True)
def isolated_cwd(tmp_path, monkeypatch):
    """Keep stray .env files and default output directories out of the tree."""
    monkeypatch.chdir(tmp_path)


class TestExitCodes:
    """Tests for exception to exit code mapping."""

    @pytest.mark.parametrize(
        "exc, code",
        [
            (ConfigurationError("x"), ExitCode.CONFIG),
            (DataFormatError("x", row=1), ExitCode.DATA),
            (ArtifactIOError("x"), ExitCode.DATA),
            (MetricUndefinedError("x"), ExitCode.DATA),
            (NumericDivergenceError("x", 3), ExitCode.DIVERGENCE),
            (SegCauseError("x"), ExitCode.UNEXPECTED),
            (RuntimeError("x"), ExitCode.UNEXPECTED),
        ],
    )
    def test_mapping(self, exc, code):
        """Test each failure class maps to its exit code."""
        assert resolve_exit_code(exc)[0] == code

    def test_validation_error_is_config(self):
        """Test pydantic validation errors are configuration failures."""

        class Strict(BaseModel):
            n: int

        with pytest.raises(ValidationError) as info:
            Strict(n="many")
        assert resolve_exit_code(info.value) == (ExitCode.CONFIG, "CONFIGURATION_ERROR")

    def test_handler_returns_codes(self):
        """Test the decorator turns results and exceptions into exit codes."""

        @cli_error_handler("testing")
        def fails():
            raise NumericDivergenceError("boom", 0)

        @cli_error_handler("testing")
        def succeeds():
            return None

        assert fails() == ExitCode.DIVERGENCE
        assert succeeds() == ExitCode.OK


class TestParseOverrides:
    """Tests for parse_overrides."""

    def test_upper_cases_keys(self):
        """Test keys are normalized and values keep inner '='."""
        assert parse_overrides(["train_epochs=3", "LOSS_SCHEDULE=a=b"]) == {
            "TRAIN_EPOCHS": "3",
            "LOSS_SCHEDULE": "a=b",
        }

    @pytest.mark.parametrize("pair", ["TRAIN_EPOCHS", "=3"])
    def test_malformed(self, pair):
        """Test entries without a key or '=' are refused."""
        with pytest.raises(ConfigurationError):
            parse_overrides([pair])


class TestCommands:
    """End-to-end runs of the subcommands on tiny data."""

    def test_gen_data(self, tmp_path):
        """Test gen-data writes both splits, the mask and a manifest."""
        out = tmp_path / "data"
        assert main(["gen-data", "--out", str(out), *_sets(SMALL_SCM)]) == ExitCode.OK
        assert len(load_dataset(out / "train.csv")) == 8
        assert len(load_dataset(out / "test.csv")) == 4
        assert load_mask(out / "mask.json").entries.shape == (2, 2)
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["command"] == "gen-data"
        assert (out / "config_snapshot.env").is_file()

    def test_gen_data_deterministic(self, tmp_path):
        """Test the same seed writes identical datasets."""
        for name in ("a", "b"):
            args = ["gen-data", "--out", str(tmp_path / name), "--seed", "5", *_sets(SMALL_SCM)]
            assert main(args) == ExitCode.OK
        first = (tmp_path / "a" / "train.csv").read_text()
        assert first == (tmp_path / "b" / "train.csv").read_text()

    def test_refuses_overwrite(self, tmp_path):
        """Test rerunning into the same directory needs --force."""
        args = ["gen-data", "--out", str(tmp_path / "data"), *_sets(SMALL_SCM)]
        assert main(args) == ExitCode.OK
        assert main(args) == ExitCode.DATA
        assert main([*args, "--force"]) == ExitCode.OK

    def test_invalid_setting(self, tmp_path):
        """Test a bad setting exits with the configuration code."""
        args = ["gen-data", "--out", str(tmp_path), "--set", "SCM_LENGTH=-1"]
        assert main(args) == ExitCode.CONFIG

    def test_train_without_dataset(self, tmp_path):
        """Test training without DATASET_PATH is a configuration error."""
        assert main(["train", "--out", str(tmp_path / "run")]) == ExitCode.CONFIG

    def test_explain_needs_checkpoint(self, tmp_path):
        """Test explain without --checkpoint is a configuration error."""
        out = tmp_path / "data"
        assert main(["gen-data", "--out", str(out), *_sets(SMALL_SCM)]) == ExitCode.OK
        args = ["explain", "--out", str(tmp_path / "x"), "--set", f"DATASET_PATH={out}/test.csv"]
        assert main(args) == ExitCode.CONFIG

    def test_train_then_explain(self, tmp_path):
        """Test a tiny train and explain run produces its artifacts."""
        data = tmp_path / "data"
        run = tmp_path / "run"
        assert main(["gen-data", "--out", str(data), *_sets(SMALL_SCM)]) == ExitCode.OK
        dataset = [f"DATASET_PATH={data}/train.csv", f"DATASET_TEST_PATH={data}/test.csv"]

        train_args = ["train", "--out", str(run), *_sets(SMALL_SCM + SMALL_MODEL + dataset)]
        assert main(train_args) == ExitCode.OK
        assert (run / "checkpoint.pt").is_file()
        assert (run / "loss_trace.csv").is_file()

        explain_args = [
            "explain",
            "--out",
            str(tmp_path / "explain"),
            "--checkpoint",
            str(run / "checkpoint.pt"),
            *_sets(dataset),
        ]
        assert main(explain_args) == ExitCode.OK
        segments = json.loads((tmp_path / "explain" / "segments.json").read_text())
        assert len(segments) == 4
        assert (tmp_path / "explain" / "embeddings.csv").is_file()

    def test_checkpoint_dimension_mismatch(self, tmp_path):
        """Test a checkpoint trained on N=2 refuses N=3 data with the config code."""
        data2, data3, run = tmp_path / "d2", tmp_path / "d3", tmp_path / "run"
        assert main(["gen-data", "--out", str(data2), *_sets(SMALL_SCM)]) == ExitCode.OK
        wider = [*SMALL_SCM, "SCM_N_VARIABLES=3"]
        assert main(["gen-data", "--out", str(data3), *_sets(wider)]) == ExitCode.OK
        train_args = [
            "train",
            "--out",
            str(run),
            *_sets(SMALL_MODEL + [f"DATASET_PATH={data2}/train.csv"]),
        ]
        assert main(train_args) == ExitCode.OK
        explain_args = [
            "explain",
            "--out",
            str(tmp_path / "x"),
            "--checkpoint",
            str(run / "checkpoint.pt"),
            "--set",
            f"DATASET_PATH={data3}/test.csv",
        ]
        assert main(explain_args) == ExitCode.CONFIG
