"""Tests for dataset, mask and report files."""

import json

import numpy as np
import pytest

from segcause.data.io import (
    load_dataset,
    load_mask,
    load_report,
    read_table,
    save_dataset,
    save_mask,
    save_report,
    write_table,
)
from segcause.data.types import (
    CausalMask,
    DegradationEntry,
    ExplanationReport,
    LipschitzSample,
    MaskSource,
    TimeSeries,
)
from segcause.utils.exceptions import (
    ArtifactIOError,
    DataFormatError,
    InvariantViolationError,
    NormalizationError,
)


def _series(count=3, label=True):
    rng = np.random.default_rng(0)
    return [
        TimeSeries(
            rng.standard_normal((2, 6)),
            sampling_rate_hz=2.0,
            label=i % 2 if label else None,
            targets=None if label else rng.standard_normal(2),
            id=f"s{i}",
        )
        for i in range(count)
    ]


class TestCsvDataset:
    """Tests for the CSV dataset format with its sidecar."""

    def test_save_and_load(self, tmp_path):
        """Test sequences survive a CSV write and read bit for bit."""
        series = _series()
        written = save_dataset(series, tmp_path / "train.csv")
        assert [p.name for p in written] == ["train.csv", "train.sidecar.json"]
        assert load_dataset(tmp_path / "train.csv") == series

    def test_targets_survive(self, tmp_path):
        """Test regression targets are kept in the sidecar."""
        series = _series(label=False)
        save_dataset(series, tmp_path / "train.csv")
        loaded = load_dataset(tmp_path / "train.csv")
        np.testing.assert_array_equal(loaded[1].targets, series[1].targets)

    def test_missing_sidecar_uses_default_rate(self, tmp_path):
        """Test sequences without a sidecar get the default f_s and no label."""
        path = tmp_path / "plain.csv"
        path.write_text("sequence_id,variable_index,t0,t1,t2\na,0,1,2,3\na,1,4,5,6\n")
        (loaded,) = load_dataset(path, default_sampling_rate_hz=8.0)
        assert loaded.sampling_rate_hz == 8.0
        assert loaded.label is None
        np.testing.assert_array_equal(loaded.values, [[1, 2, 3], [4, 5, 6]])

    def test_variable_rows_are_reordered(self, tmp_path):
        """Test rows are placed by variable index, not file order."""
        path = tmp_path / "shuffled.csv"
        path.write_text("sequence_id,variable_index,t0,t1\na,1,4,5\na,0,1,2\n")
        (loaded,) = load_dataset(path)
        np.testing.assert_array_equal(loaded.values, [[1, 2], [4, 5]])

    def test_unparsable_cell_located(self, tmp_path):
        """Test a bad cell is reported with its row and column."""
        path = tmp_path / "bad.csv"
        path.write_text("sequence_id,variable_index,t0,t1\na,0,1,2\na,1,x,5\n")
        with pytest.raises(DataFormatError, match="row 3, column 't0'") as info:
            load_dataset(path)
        assert info.value.row == 3

    def test_nan_cell_is_invariant_violation(self, tmp_path):
        """Test a NaN parses but fails the finiteness invariant."""
        path = tmp_path / "nan.csv"
        path.write_text("sequence_id,variable_index,t0,t1\na,0,nan,2\n")
        with pytest.raises(InvariantViolationError, match="sequence 'a'"):
            load_dataset(path)

    def test_gap_in_variable_indices(self, tmp_path):
        """Test variable indices must be contiguous."""
        path = tmp_path / "gap.csv"
        path.write_text("sequence_id,variable_index,t0,t1\na,0,1,2\na,2,3,4\n")
        with pytest.raises(InvariantViolationError, match="variable indices"):
            load_dataset(path)

    def test_bad_time_columns(self, tmp_path):
        """Test time columns must be t0..t(T-1)."""
        path = tmp_path / "cols.csv"
        path.write_text("sequence_id,variable_index,t0,t2\na,0,1,2\n")
        with pytest.raises(DataFormatError, match="time columns"):
            load_dataset(path)

    def test_missing_file(self, tmp_path):
        """Test a missing dataset is an artifact error."""
        with pytest.raises(ArtifactIOError, match="not found"):
            load_dataset(tmp_path / "absent.csv")

    def test_empty_file(self, tmp_path):
        """Test an empty dataset is rejected."""
        path = tmp_path / "empty.csv"
        path.write_text("")
        with pytest.raises(DataFormatError, match="no sequences"):
            load_dataset(path)


class TestJsonDataset:
    """Tests for the JSON dataset format."""

    def test_save_and_load(self, tmp_path):
        """Test the JSON format carries labels and rates."""
        series = _series()
        save_dataset(series, tmp_path / "train.json", format="json")
        assert load_dataset(tmp_path / "train.json", format="json") == series

    def test_invalid_item_row(self, tmp_path):
        """Test schema errors report the item index."""
        path = tmp_path / "bad.json"
        path.write_text(json.dumps([{"id": "a", "values": [[1, 2]]}, {"id": "b"}]))
        with pytest.raises(DataFormatError, match="row 1"):
            load_dataset(path, format="json")

    def test_unknown_format(self, tmp_path):
        """Test unsupported formats are rejected."""
        path = tmp_path / "x.parquet"
        path.write_text("")
        with pytest.raises(DataFormatError, match="Unsupported"):
            load_dataset(path, format="parquet")


class TestMaskFiles:
    """Tests for mask JSON files."""

    def test_save_and_load(self, tmp_path):
        """Test header, entries and source are written."""
        mask = CausalMask([[1, 0, 1], [0, 1, 1]], MaskSource.GROUND_TRUTH_SCM)
        save_mask(mask, tmp_path / "mask.json")
        raw = json.loads((tmp_path / "mask.json").read_text())
        assert raw["D"] == 2 and raw["N"] == 3
        assert load_mask(tmp_path / "mask.json") == mask

    def test_default_source(self, tmp_path):
        """Test masks without a source take the caller's default."""
        path = tmp_path / "mask.json"
        path.write_text(json.dumps({"D": 1, "N": 2, "entries": [[1, 1]]}))
        assert load_mask(path).source is MaskSource.INGESTED

    def test_header_disagrees(self, tmp_path):
        """Test a header that contradicts the entries is a format error."""
        path = tmp_path / "mask.json"
        path.write_text(json.dumps({"D": 2, "N": 2, "entries": [[1, 1]]}))
        with pytest.raises(DataFormatError, match="header says"):
            load_mask(path)

    def test_malformed_json(self, tmp_path):
        """Test JSON syntax errors carry a location."""
        path = tmp_path / "mask.json"
        path.write_text('{"D": 1,\n "N": }')
        with pytest.raises(DataFormatError, match="row 2"):
            load_mask(path)


class TestReportFiles:
    """Tests for report JSON files."""

    def test_save_and_load(self, tmp_path):
        """Test every report field is restored."""
        report = ExplanationReport(
            attribution=np.array([[0.1, 0.2], [0.3, 0.4]]),
            degradation={"auroc": DegradationEntry.from_scores(0.9, 0.6)},
            stability=0.14,
            lipschitz_samples=(LipschitzSample(0.01, 0.5, 0.1, 0.2),),
            runtime={128: 1.5, 256: 3.0},
        )
        save_report(report, tmp_path / "report.json")
        assert load_report(tmp_path / "report.json") == report

    def test_unnormalized_report_not_written(self, tmp_path):
        """Test a tampered attribution is refused before writing."""
        report = ExplanationReport(attribution=np.full((1, 2), 0.5))
        object.__setattr__(report, "attribution", np.ones((1, 2)))
        with pytest.raises(NormalizationError):
            save_report(report, tmp_path / "report.json")
        assert not (tmp_path / "report.json").exists()


class TestTables:
    """Tests for CSV result tables."""

    def test_float_precision(self, tmp_path):
        """Test floats are written with full precision."""
        write_table([{"method": "top", "auroc": 1 / 3}], tmp_path / "t.csv")
        frame = read_table(tmp_path / "t.csv")
        assert frame.loc[0, "auroc"] == 1 / 3
        assert frame.loc[0, "method"] == "top"
