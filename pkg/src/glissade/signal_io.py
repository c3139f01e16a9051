"""Reading and writing EOG study files.

The on-disk format is the comma separated layout used by two channel
electronystagmography exports: one row per sample, columns
``time_ms, horizontal_deg, stimulus_deg``, optional single header line,
ASCII or UTF-8. Time is ingested in milliseconds and stored in seconds.
"""
from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptyInput, MalformedRow, NonMonotonicTime

COLUMNS = ("time_ms", "horizontal_deg", "stimulus_deg")


@dataclass(frozen=True)
class IngestConfig:
    """How to interpret an incoming CSV stream.

    header: "auto" sniffs the first line (non-numeric first field means
    header), "yes" always skips one line, "no" never skips.
    """

    header: str = "auto"


@dataclass
class EogRecord:
    """One captured test: time base plus horizontal and stimulus channels."""

    sample_period_s: float
    time: np.ndarray            # seconds
    horizontal: np.ndarray      # degrees
    stimulus: np.ndarray        # degrees
    stimulus_amplitude_deg: float = 10.0
    subject_id: str = ""
    test_id: str = ""

    def __post_init__(self):
        self.time = np.asarray(self.time, dtype=float)
        self.horizontal = np.asarray(self.horizontal, dtype=float)
        self.stimulus = np.asarray(self.stimulus, dtype=float)

    def __len__(self) -> int:
        return len(self.time)


@dataclass
class Study:
    """A set of records captured from the same subject."""

    records: list[EogRecord]
    metadata: dict[str, str] = field(default_factory=dict)


def _is_number(tok: str) -> bool:
    try:
        float(tok)
        return True
    except ValueError:
        return False


def parse_record(text: str, config: IngestConfig | None = None,
                 subject_id: str = "", test_id: str = "") -> EogRecord:
    """Parse a CSV body into an :class:`EogRecord`.

    Parameters
    ----------
    text:
        The full character stream of one record file.
    config:
        Header handling; defaults to auto detection.

    Returns
    -------
    EogRecord
        Sample period is the median inter-sample gap of the timestamps.

    Raises
    ------
    EmptyInput
        No data rows.
    MalformedRow
        Wrong column count or a non-numeric field (reported with its
        0-based data row index).
    NonMonotonicTime
        Timestamps not strictly increasing.
    """
    config = config or IngestConfig()
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if config.header == "yes" and lines:
        lines = lines[1:]
    elif config.header == "auto" and lines:
        first = lines[0].split(",")[0].strip()
        if not _is_number(first):
            lines = lines[1:]
    if not lines:
        raise EmptyInput("no data rows")

    n = len(lines)
    time_ms = np.empty(n)
    horiz = np.empty(n)
    stim = np.empty(n)
    for i, ln in enumerate(lines):
        parts = ln.split(",")
        if len(parts) != 3:
            raise MalformedRow(i, f"expected 3 fields, got {len(parts)}")
        try:
            time_ms[i] = float(parts[0])
            horiz[i] = float(parts[1])
            stim[i] = float(parts[2])
        except ValueError as exc:
            raise MalformedRow(i, str(exc)) from None

    time_s = time_ms / 1000.0
    if n > 1:
        gaps = np.diff(time_s)
        if np.any(gaps <= 0):
            raise NonMonotonicTime("timestamps must be strictly increasing")
        period = float(np.median(gaps))
    else:
        period = 0.005  # single sample: assume the nominal 200 Hz step
    return EogRecord(sample_period_s=period, time=time_s, horizontal=horiz,
                     stimulus=stim, subject_id=subject_id, test_id=test_id)


def serialize_record(record: EogRecord) -> str:
    """Serialize a record to the three column CSV format.

    parse_record inverts this (numeric round-trip within 1e-9).
    """
    buf = io.StringIO()
    buf.write(",".join(COLUMNS) + "\n")
    for t, h, s in zip(record.time, record.horizontal, record.stimulus):
        # repr of a builtin float gives the shortest round-trip form
        buf.write(f"{float(t) * 1000.0!r},{float(h)!r},{float(s)!r}\n")
    return buf.getvalue()


def load_record(path: str, config: IngestConfig | None = None) -> EogRecord:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_record(fh.read(), config, test_id=path)
