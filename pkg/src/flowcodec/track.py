"""
Metrics track: per-epoch training series persisted as CSV.

Rows are buffered by ``append`` and written by ``flush``. Values are written
with ``repr`` for floats so two identical runs produce byte-identical files;
no wall-clock field is recorded.

Usage:
    track = MetricsTrack("out/metrics.csv")
    track.append(epoch=0, lr=5e-4, loss=0.12, psnr=21.3)
    track.flush()
    rows = track.read()
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from ._errors import FlowCodecError

DEFAULT_COLUMNS = ("epoch", "lr", "loss", "psnr")


class MetricsTrack:
    """
    Buffered CSV writer for one metrics series.

    Args:
        path: CSV file, or ``None`` for an in-memory track.
        columns: Column order. ``append`` rejects unknown keys.
    """

    def __init__(self, path: Optional[Union[str, Path]] = None,
                 columns: Sequence[str] = DEFAULT_COLUMNS):
        self.path = Path(path) if path is not None else None
        self.columns = tuple(columns)
        self._buffer: List[Dict[str, Any]] = []
        self._rows: List[Dict[str, Any]] = []
        self._header_written = False

    def append(self, **row: Any) -> "MetricsTrack":
        """Buffer one row (call ``flush()`` to persist). Returns self for chaining."""
        unknown = set(row) - set(self.columns)
        if unknown:
            raise FlowCodecError(
                f"metrics track: unknown column(s) {sorted(unknown)}; "
                f"columns are {list(self.columns)}"
            )
        self._buffer.append({c: row.get(c) for c in self.columns})
        return self

    def flush(self) -> int:
        """Write buffered rows. Returns the number of rows written."""
        n = len(self._buffer)
        if not n:
            return 0
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            mode = "a" if self._header_written else "w"
            with self.path.open(mode, newline="", encoding="utf-8") as f:
                w = csv.writer(f, lineterminator="\n")
                if not self._header_written:
                    w.writerow(self.columns)
                    self._header_written = True
                for row in self._buffer:
                    w.writerow([_cell(row[c]) for c in self.columns])
        self._rows.extend(self._buffer)
        self._buffer.clear()
        return n

    def read(self) -> List[Dict[str, Any]]:
        """All rows so far (auto-flushes). In-memory tracks return the raw values;
        file tracks return what is on disk, parsed back to numbers."""
        self.flush()
        if self.path is None:
            return [dict(r) for r in self._rows]
        return read_metrics_csv(self.path)

    def __len__(self) -> int:
        return len(self._rows) + len(self._buffer)


def _cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, float) or hasattr(v, "dtype"):
        return repr(float(v))
    return str(v)


def read_metrics_csv(path: Union[str, Path]) -> List[Dict[str, Any]]:
    out = []
    with Path(path).open(newline="", encoding="utf-8") as f:
        for row in csv.DictReader(f):
            parsed: Dict[str, Any] = {}
            for k, v in row.items():
                if v == "":
                    parsed[k] = None
                elif k == "epoch":
                    parsed[k] = int(v)
                else:
                    parsed[k] = float(v)
            out.append(parsed)
    return out
