"""File path generation for experiment output."""

from datetime import datetime
from pathlib import Path
from typing import Optional, Tuple

SUFFIXES = {"figure2": ".csv", "montecarlo": ".csv", "plan": ".csv", "constants": ".csv"}
REPORT_SUFFIX = ".json"


def get_timestamp_strings(now: Optional[datetime] = None) -> Tuple[str, str]:
    """Return (YYYYMMDD, HHMMSS) for now."""
    now = now or datetime.now()
    return now.strftime("%Y%m%d"), now.strftime("%H%M%S")


def generate_file_path(save_folder: str, verb: str, seed: int, date: str, time_str: str) -> str:
    """<save_folder>/<verb>-seed<seed>-<date>-<time><suffix>."""
    suffix = SUFFIXES.get(verb, REPORT_SUFFIX)
    return str(Path(save_folder) / f"{verb}-seed{seed}-{date}-{time_str}{suffix}")


def resolve_output_path(out: str, verb: str, seed: int) -> str:
    """Output target for a run: "" stays stdout, a directory gets a generated name."""
    if not out or out == "-":
        return ""
    if out.endswith(("/", "\\")) or Path(out).is_dir():
        date, time_str = get_timestamp_strings()
        return generate_file_path(out, verb, seed, date, time_str)
    return out
