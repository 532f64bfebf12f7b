"""CSV and report writers for experiment output.

ExperimentCSVWriter writes result rows (dicts keyed by column name) to a CSV file or to
stdout. A file target is held under an exclusive portalocker lock from the first
write until close(), so two runs cannot interleave rows in one file.
"""

import csv
import json
import logging
import math
import os
import sys
import threading
from pathlib import Path
from typing import IO, Any, Dict, List, Optional, Sequence

import msgpack
import numpy as np
import portalocker

from .errors import CovertError

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "{:.12g}"

PROVENANCES = (
    "exact",
    "bound",
    "monte-carlo",
    "gaussian-plan",
    "envelope",
    "first-order",
)


def format_cell(value: Any) -> Any:
    """Render one cell: floats with 12 significant digits, bools as 0/1, None as ''."""
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return 1 if value else 0
    if isinstance(value, (float, np.floating)):
        if math.isnan(value):
            return "nan"
        return FLOAT_FORMAT.format(float(value))
    if isinstance(value, np.integer):
        return int(value)
    return value


class ExperimentCSVWriter:
    """Writer for experiment rows.

    Attributes:
        file_path: Path to the CSV file (None writes to stdout)
        columns: Column names, written once as the header row
        rows_written: Number of data rows written
        file_size: Current file size in bytes (0 for stdout)
    """

    def __init__(self, file_path: Optional[str], columns: Sequence[str]):
        """Initialize CSV writer.

        Args:
            file_path: Path to the CSV file, or None/"" / "-" for stdout
            columns: Column names; rows may omit columns (written empty)
        """
        self.file_path = Path(file_path) if file_path and file_path != "-" else None
        self.columns = list(columns)
        self.rows_written: int = 0
        self.file_size: int = 0
        self._file_handle: Optional[IO[str]] = None
        self._writer: Any = None
        self._lock = threading.Lock()

    def _open(self) -> None:
        if self.file_path is None:
            self._file_handle = sys.stdout
        else:
            self.file_path.parent.mkdir(parents=True, exist_ok=True)
            # truncate only once the lock is held
            handle = open(self.file_path, mode="a", newline="", encoding="utf-8")
            try:
                portalocker.lock(handle, portalocker.LOCK_EX | portalocker.LOCK_NB)
            except portalocker.LockException as e:
                handle.close()
                raise CovertError(f"output file {self.file_path} is locked by another run") from e
            handle.seek(0)
            handle.truncate()
            self._file_handle = handle
        self._writer = csv.writer(self._file_handle, lineterminator="\n")
        self._writer.writerow(self.columns)

    def write_rows(self, rows: Sequence[Dict[str, Any]]) -> int:
        """Write rows in column order.

        Args:
            rows: Dictionaries mapping column names to values

        Returns:
            Number of rows written
        """
        with self._lock:
            if self._writer is None:
                self._open()
            for row in rows:
                unknown = set(row) - set(self.columns)
                if unknown:
                    logger.warning("dropping unknown columns %s", sorted(unknown))
                self._writer.writerow([format_cell(row.get(c)) for c in self.columns])
                self.rows_written += 1
            if self._file_handle is not None:
                self._file_handle.flush()
            self._update_size()
            return len(rows)

    def write_row(self, row: Dict[str, Any]) -> int:
        return self.write_rows([row])

    def _update_size(self) -> None:
        if self.file_path is None:
            return
        try:
            self.file_size = os.path.getsize(self.file_path)
        except OSError:
            pass

    def flush(self) -> None:
        """Flush file buffer to disk."""
        with self._lock:
            if self._file_handle:
                self._file_handle.flush()

    def sync(self) -> None:
        """Force OS to write buffered data to disk."""
        with self._lock:
            if self._file_handle and self.file_path is not None:
                self._file_handle.flush()
                try:
                    os.fsync(self._file_handle.fileno())
                except (OSError, AttributeError):
                    pass

    def close(self) -> None:
        """Release the lock and close the file (stdout is only flushed)."""
        with self._lock:
            if self._file_handle is None:
                return
            self._file_handle.flush()
            if self.file_path is not None:
                try:
                    os.fsync(self._file_handle.fileno())
                except (OSError, AttributeError):
                    pass
                portalocker.unlock(self._file_handle)
                self._file_handle.close()
            self._file_handle = None
            self._writer = None
            self._update_size()

    def __enter__(self) -> "ExperimentCSVWriter":
        return self

    def __exit__(self, *exc_info) -> None:
        self.close()

    def get_statistics(self) -> Dict[str, Any]:
        """Get statistics about the CSV writer."""
        return {
            "rows_written": self.rows_written,
            "file_size": self.file_size,
            "file_path": str(self.file_path) if self.file_path else "<stdout>",
        }


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, (np.bool_,)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        value = float(value)
        return value if math.isfinite(value) else str(value)
    if isinstance(value, np.ndarray):
        return _jsonable(value.tolist())
    return value


def write_report(report: Dict[str, Any], path: Optional[str]) -> None:
    """Write a report dict as JSON (stdout or *.json) or msgpack (*.msgpack)."""
    payload = _jsonable(report)
    if not path or path == "-":
        json.dump(payload, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
        return
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    if target.suffix == ".msgpack":
        with open(target, "wb") as handle:
            portalocker.lock(handle, portalocker.LOCK_EX)
            handle.write(msgpack.packb(payload, use_bin_type=True))
            portalocker.unlock(handle)
    else:
        with open(target, "w", encoding="utf-8") as handle:
            portalocker.lock(handle, portalocker.LOCK_EX)
            json.dump(payload, handle, indent=2, sort_keys=True)
            handle.write("\n")
            portalocker.unlock(handle)


def read_report(path: str) -> Dict[str, Any]:
    """Load a report written by write_report."""
    target = Path(path)
    if target.suffix == ".msgpack":
        with open(target, "rb") as handle:
            return msgpack.unpackb(handle.read(), raw=False)
    with open(target, encoding="utf-8") as handle:
        return json.load(handle)


def rows_from_csv(path: str) -> List[Dict[str, str]]:
    """Read back rows written by ExperimentCSVWriter."""
    with open(path, newline="", encoding="utf-8") as handle:
        return list(csv.DictReader(handle))
