"""Tests for the experiment CSV and report writers."""

import json
import logging
import math

import numpy as np
import pytest

from covert_ppm.csv_writer import (
    ExperimentCSVWriter,
    format_cell,
    read_report,
    rows_from_csv,
    write_report,
)
from covert_ppm.errors import CovertError


class TestFormatCell:
    """Test rendering of single cells."""

    def test_none_is_empty(self):
        """Test that missing values are written empty."""
        assert format_cell(None) == ""

    def test_booleans_written_as_0_or_1(self):
        """Test Python and numpy booleans."""
        assert format_cell(True) == 1
        assert format_cell(False) == 0
        assert format_cell(np.bool_(True)) == 1

    def test_floats_use_twelve_digits(self):
        """Test the float format and NaN."""
        assert format_cell(1.0 / 3.0) == "0.333333333333"
        assert format_cell(np.float64(2.5)) == "2.5"
        assert format_cell(math.nan) == "nan"

    def test_integers_and_strings_pass_through(self):
        """Test that ints and strings are untouched."""
        assert format_cell(np.int64(7)) == 7
        assert type(format_cell(np.int64(7))) is int
        assert format_cell("kl") == "kl"


class TestExperimentCSVWriter:
    """Test ExperimentCSVWriter on files and stdout."""

    def test_header_written_once(self, tmp_path):
        """Test that the header precedes the rows and is not repeated."""
        path = tmp_path / "out.csv"
        with ExperimentCSVWriter(str(path), ["n", "metric", "value"]) as writer:
            writer.write_row({"n": 100, "metric": "kl", "value": 0.5})
            writer.write_rows([{"n": 1000, "metric": "tv", "value": None}])
        lines = path.read_text(encoding="utf-8").splitlines()
        assert lines == ["n,metric,value", "100,kl,0.5", "1000,tv,"]

    def test_rows_read_back(self, tmp_path):
        """Test reading rows back with rows_from_csv."""
        path = tmp_path / "out.csv"
        with ExperimentCSVWriter(str(path), ["n", "ok"]) as writer:
            writer.write_rows([{"n": 1, "ok": True}, {"n": 2, "ok": False}])
        rows = rows_from_csv(str(path))
        assert rows == [{"n": "1", "ok": "1"}, {"n": "2", "ok": "0"}]

    def test_unknown_columns_dropped(self, tmp_path, caplog):
        """Test that keys outside the header are dropped with a warning."""
        path = tmp_path / "out.csv"
        with caplog.at_level(logging.WARNING, logger="covert_ppm.csv_writer"):
            with ExperimentCSVWriter(str(path), ["n"]) as writer:
                writer.write_row({"n": 5, "extra": 1})
        assert "extra" in caplog.text
        assert rows_from_csv(str(path)) == [{"n": "5"}]

    def test_no_rows_no_file(self, tmp_path):
        """Test that the file is only created on the first write."""
        path = tmp_path / "out.csv"
        writer = ExperimentCSVWriter(str(path), ["n"])
        writer.close()
        assert not path.exists()

    def test_creates_parent_directories(self, tmp_path):
        """Test writing below a directory that does not exist yet."""
        path = tmp_path / "a" / "b" / "out.csv"
        with ExperimentCSVWriter(str(path), ["n"]) as writer:
            writer.write_row({"n": 1})
        assert path.exists()

    def test_overwrites_previous_contents(self, tmp_path):
        """Test that an existing file is truncated."""
        path = tmp_path / "out.csv"
        path.write_text("old,contents\n1,2\n3,4\n", encoding="utf-8")
        with ExperimentCSVWriter(str(path), ["n"]) as writer:
            writer.write_row({"n": 9})
        assert path.read_text(encoding="utf-8") == "n\n9\n"

    def test_locked_file(self, tmp_path):
        """Test that a second writer on a locked file fails without truncating it."""
        path = tmp_path / "out.csv"
        first = ExperimentCSVWriter(str(path), ["n"])
        first.write_row({"n": 1})
        second = ExperimentCSVWriter(str(path), ["n"])
        try:
            with pytest.raises(CovertError):
                second.write_row({"n": 2})
            first.write_row({"n": 3})
        finally:
            first.close()
            second.close()
        assert path.read_text(encoding="utf-8") == "n\n1\n3\n"

    def test_stdout(self, capsys):
        """Test that None and '-' write to stdout."""
        for target in (None, "-"):
            with ExperimentCSVWriter(target, ["n", "value"]) as writer:
                writer.write_row({"n": 10, "value": 0.25})
                assert writer.get_statistics()["file_path"] == "<stdout>"
        out = capsys.readouterr().out
        assert out == "n,value\n10,0.25\n" * 2

    def test_statistics(self, tmp_path):
        """Test the row count and file size."""
        path = tmp_path / "out.csv"
        writer = ExperimentCSVWriter(str(path), ["n"])
        writer.write_rows([{"n": i} for i in range(3)])
        writer.flush()
        writer.sync()
        writer.close()
        stats = writer.get_statistics()
        assert stats["rows_written"] == 3
        assert stats["file_size"] == path.stat().st_size
        assert stats["file_path"] == str(path)

    def test_close_twice(self, tmp_path):
        """Test that close is idempotent."""
        writer = ExperimentCSVWriter(str(tmp_path / "out.csv"), ["n"])
        writer.write_row({"n": 1})
        writer.close()
        writer.close()


class TestReports:
    """Test JSON and msgpack report files."""

    REPORT = {
        "suite": "ppm",
        "passed": np.bool_(True),
        "checks": [{"name": "kl", "value": np.float64(0.125), "n": np.int64(8)}],
        "residual": math.inf,
        "grid": np.array([1.0, 2.0]),
    }

    def test_json_file(self, tmp_path):
        """Test the JSON encoding of numpy and non-finite values."""
        path = tmp_path / "report.json"
        write_report(self.REPORT, str(path))
        loaded = read_report(str(path))
        assert loaded["passed"] is True
        assert loaded["checks"][0] == {"name": "kl", "value": 0.125, "n": 8}
        assert loaded["residual"] == "inf"
        assert loaded["grid"] == [1.0, 2.0]

    def test_msgpack_file(self, tmp_path):
        """Test that the msgpack suffix selects the binary format."""
        path = tmp_path / "report.msgpack"
        write_report(self.REPORT, str(path))
        assert read_report(str(path)) == read_report_json(tmp_path, self.REPORT)

    def test_stdout(self, capsys):
        """Test that a missing path prints indented JSON."""
        write_report({"b": 1, "a": 2}, None)
        out = capsys.readouterr().out
        assert json.loads(out) == {"a": 2, "b": 1}
        assert out.index('"a"') < out.index('"b"')


def read_report_json(tmp_path, report):
    path = tmp_path / "same.json"
    write_report(report, str(path))
    return read_report(str(path))
