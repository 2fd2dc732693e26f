"""Dataset, mask and report (de)serialization.

CSV datasets hold one row per (sequence_id, variable_index) with columns
``t0..t(T-1)``; labels and targets live in a sidecar JSON next to the CSV.
"""

import json
from pathlib import Path
from typing import Any, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError

from segcause.data.schemas import (
    CausalMaskDocument,
    ReportDocument,
    SidecarEntry,
    TimeSeriesDocument,
)
from segcause.data.types import CausalMask, ExplanationReport, MaskSource, TimeSeries
from segcause.utils.constants import SIDECAR_SUFFIX
from segcause.utils.exceptions import (
    ArtifactIOError,
    DataFormatError,
    InvariantViolationError,
)
from segcause.utils.logging_config import get_logger
from segcause.utils.path_utils import PathLike, sidecar_path

logger = get_logger(__name__)

ID_COLUMN = "sequence_id"
VARIABLE_COLUMN = "variable_index"


def load_dataset(
    path: PathLike, format: str = "csv", default_sampling_rate_hz: float = 1.0
) -> list[TimeSeries]:
    """Load every sequence of a dataset file.

    Args:
        path: Dataset file
        format: ``csv`` (with optional sidecar JSON) or ``json``
        default_sampling_rate_hz: f_s used when the file does not state one

    Returns:
        Validated sequences in file order

    Raises:
        ArtifactIOError: If the file cannot be read
        DataFormatError: If a cell cannot be parsed (with row/column location)
        InvariantViolationError: If a sequence violates the TimeSeries invariants
    """
    path = Path(path)
    if not path.is_file():
        raise ArtifactIOError(f"Dataset file not found: {path}")

    if format == "csv":
        series = _load_csv(path, default_sampling_rate_hz)
    elif format == "json":
        series = _load_json(path, default_sampling_rate_hz)
    else:
        raise DataFormatError(f"Unsupported dataset format: {format}")

    if not series:
        raise DataFormatError(f"{path}: no sequences")

    logger.info(
        f"Loaded {len(series)} sequences from {path.name} "
        f"(N={series[0].n_variables}, T={series[0].length})"
    )
    return series


def _load_csv(path: Path, default_sampling_rate_hz: float) -> list[TimeSeries]:
    try:
        frame = pd.read_csv(path, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        return []
    except pd.errors.ParserError as e:
        raise DataFormatError(str(e)) from e
    except OSError as e:
        raise ArtifactIOError(f"Cannot read {path}: {e}") from e

    if frame.empty:
        return []

    for required in (ID_COLUMN, VARIABLE_COLUMN):
        if required not in frame.columns:
            raise DataFormatError(f"missing required column '{required}'", row=1)

    time_columns = [c for c in frame.columns if c not in (ID_COLUMN, VARIABLE_COLUMN)]
    expected = [f"t{i}" for i in range(len(time_columns))]
    if time_columns != expected:
        raise DataFormatError(f"time columns must be t0..t{len(time_columns) - 1}", row=1)

    numeric = np.empty((len(frame), len(time_columns)), dtype=np.float64)
    for j, column in enumerate(time_columns):
        parsed = pd.to_numeric(frame[column].str.strip(), errors="coerce")
        unparsable = parsed.isna() & ~frame[column].str.strip().str.lower().isin(
            ("nan", "inf", "-inf")
        )
        if unparsable.any():
            i = int(np.flatnonzero(unparsable.to_numpy())[0])
            # +2: header line plus 1-based numbering
            raise DataFormatError(
                f"cannot parse value {frame[column].iloc[i]!r}", row=i + 2, column=column
            )
        numeric[:, j] = [float(v) for v in frame[column].str.strip()]

    try:
        variables = frame[VARIABLE_COLUMN].astype(int).to_numpy()
    except ValueError as e:
        raise DataFormatError(f"non-integer variable index: {e}", column=VARIABLE_COLUMN) from e

    sidecar = _load_sidecar(sidecar_path(path, SIDECAR_SUFFIX))

    series: list[TimeSeries] = []
    ids = list(dict.fromkeys(frame[ID_COLUMN].tolist()))
    for sequence_id in ids:
        rows = np.flatnonzero(frame[ID_COLUMN].to_numpy() == sequence_id)
        order = np.argsort(variables[rows], kind="stable")
        indices = variables[rows][order]
        if not np.array_equal(indices, np.arange(len(rows))):
            raise InvariantViolationError(
                f"variable indices must be 0..{len(rows) - 1}, got {indices.tolist()}", sequence_id
            )
        entry = sidecar.get(sequence_id, SidecarEntry())
        series.append(
            TimeSeries(
                values=numeric[rows][order],
                sampling_rate_hz=entry.sampling_rate_hz or default_sampling_rate_hz,
                label=entry.label,
                targets=None if entry.targets is None else np.asarray(entry.targets),
                id=sequence_id,
            )
        )
    return series


def _load_sidecar(path: Path) -> dict[str, SidecarEntry]:
    if not path.exists():
        return {}
    raw = _read_json(path)
    if not isinstance(raw, dict):
        raise DataFormatError(f"{path.name}: sidecar must be a JSON object keyed by sequence id")
    try:
        return {key: SidecarEntry.model_validate(value) for key, value in raw.items()}
    except ValidationError as e:
        raise DataFormatError(f"{path.name}: invalid sidecar entry: {e}") from e


def _load_json(path: Path, default_sampling_rate_hz: float) -> list[TimeSeries]:
    raw = _read_json(path)
    if not isinstance(raw, list):
        raise DataFormatError(f"{path.name}: JSON dataset must be a list of sequences")

    series = []
    for i, item in enumerate(raw):
        if isinstance(item, dict):
            item.setdefault("sampling_rate_hz", default_sampling_rate_hz)
        try:
            document = TimeSeriesDocument.model_validate(item)
        except ValidationError as e:
            raise DataFormatError(f"invalid sequence: {e}", row=i) from e
        series.append(document.to_domain())
    return series


def save_dataset(series: list[TimeSeries], path: PathLike, format: str = "csv") -> list[Path]:
    """Write sequences in the dataset format and return the files written.

    Raises:
        ArtifactIOError: If writing fails
    """
    path = Path(path)
    if format == "json":
        documents = [TimeSeriesDocument.from_domain(s).model_dump() for s in series]
        _write_json(documents, path)
        return [path]

    records = []
    for s in series:
        for variable in range(s.n_variables):
            records.append([s.id, variable, *s.values[variable].tolist()])
    length = series[0].length if series else 0
    frame = pd.DataFrame(
        records, columns=[ID_COLUMN, VARIABLE_COLUMN, *[f"t{i}" for i in range(length)]]
    )
    try:
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as e:
        raise ArtifactIOError(f"Cannot write {path}: {e}") from e

    sidecar = {
        s.id: SidecarEntry(
            label=s.label,
            targets=None if s.targets is None else s.targets.tolist(),
            sampling_rate_hz=s.sampling_rate_hz,
        ).model_dump()
        for s in series
    }
    side_path = sidecar_path(path, SIDECAR_SUFFIX)
    _write_json(sidecar, side_path)
    return [path, side_path]


def save_report(report: ExplanationReport, path: PathLike) -> None:
    """Write a report as JSON.

    The report type validates normalization on construction; this re-checks
    it so hand-built reports cannot reach disk unnormalized.

    Raises:
        NormalizationError: If the attribution map is not normalized
        ArtifactIOError: If the file cannot be written
    """
    ExplanationReport(
        attribution=report.attribution,
        degradation=report.degradation,
        stability=report.stability,
        lipschitz_samples=report.lipschitz_samples,
        runtime=report.runtime,
    )
    _write_json(ReportDocument.from_domain(report).model_dump(), Path(path))
    logger.info(f"Wrote report to {path}")


def load_report(path: PathLike) -> ExplanationReport:
    """Read a report written by :func:`save_report`."""
    return _validate(ReportDocument, _read_json(Path(path)), path).to_domain()


def save_mask(mask: CausalMask, path: PathLike) -> None:
    """Write a mask as ``{"D", "N", "entries", "source"}`` JSON."""
    _write_json(CausalMaskDocument.from_domain(mask).dump(), Path(path))


def load_mask(path: PathLike, source: MaskSource = MaskSource.INGESTED) -> CausalMask:
    """Read a mask JSON file.

    Raises:
        ArtifactIOError: If the file is missing
        DataFormatError: If the document is malformed
    """
    path = Path(path)
    if not path.is_file():
        raise ArtifactIOError(f"Mask file not found: {path}")
    document = _validate(CausalMaskDocument, _read_json(path), path)
    try:
        return document.to_domain(default_source=source)
    except ValueError as e:
        raise DataFormatError(f"{path.name}: {e}") from e


def write_document(document: BaseModel, path: PathLike) -> None:
    """Write any pydantic document as indented JSON."""
    _write_json(document.model_dump(by_alias=True), Path(path))


def write_json(payload: Any, path: PathLike) -> None:
    """Write plain JSON-serializable data."""
    _write_json(payload, Path(path))


def write_table(rows: list[dict[str, Any]], path: PathLike, columns: Optional[list[str]] = None):
    """Write result rows as CSV."""
    frame = pd.DataFrame(rows, columns=columns)
    try:
        frame.to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    except OSError as e:
        raise ArtifactIOError(f"Cannot write {path}: {e}") from e


def read_table(path: PathLike) -> pd.DataFrame:
    """Read a CSV table written by :func:`write_table`."""
    try:
        return pd.read_csv(path, float_precision="round_trip")
    except OSError as e:
        raise ArtifactIOError(f"Cannot read {path}: {e}") from e


def _validate(model: type[BaseModel], raw: Any, path: PathLike):
    try:
        return model.model_validate(raw)
    except ValidationError as e:
        raise DataFormatError(f"{Path(path).name}: {e}") from e


def _read_json(path: Path) -> Any:
    try:
        with open(path, encoding="utf-8") as f:
            return json.load(f)
    except json.JSONDecodeError as e:
        raise DataFormatError(f"{path.name}: {e.msg}", row=e.lineno, column=str(e.colno)) from e
    except OSError as e:
        raise ArtifactIOError(f"Cannot read {path}: {e}") from e


def _write_json(payload: Any, path: Path) -> None:
    try:
        with open(path, "w", encoding="utf-8") as f:
            json.dump(payload, f, indent=2, sort_keys=False)
            f.write("\n")
    except OSError as e:
        raise ArtifactIOError(f"Cannot write {path}: {e}") from e
