"""
Run log for flowcodec.

Structured records go to a rich console (stderr, filtered by
``Runtime.log_level``) and, when the log is bound to a file, to a JSONL file
with one ``{"ts", "level", "message", "metadata"}`` object per line.

Usage:
    run_log = RunLog("out/run.jsonl")
    run_log.log("Training started", metadata={"preset": "tiny"})
    run_log.log(metadata={"epoch": 3}).info("epoch done", psnr=31.2)
"""

from __future__ import annotations

import json
import time
from enum import Enum
from pathlib import Path
from typing import Any, Dict, Optional, Union

from rich.console import Console
from rich.markup import escape


class LogLevel(Enum):
    """
    Standard log levels.

    Ordered by severity for console filtering: debug < info < warn < error < fatal.
    """
    INFO = "info"
    WARN = "warn"
    ERROR = "error"
    DEBUG = "debug"
    FATAL = "fatal"

    @classmethod
    def validate(cls, level: str) -> str:
        """
        Validate and normalize log level.

        Args:
            level: Log level string (case-insensitive)

        Returns:
            Normalized log level string (lowercase)

        Raises:
            ValueError: If level is not one of the 5 standard levels
        """
        try:
            return cls[level.upper()].value
        except KeyError:
            valid_levels = ", ".join([lv.value for lv in cls])
            raise ValueError(
                f"Invalid log level: '{level}'. "
                f"Must be one of: {valid_levels}"
            ) from None


_SEVERITY = {"debug": 0, "info": 1, "warn": 2, "error": 3, "fatal": 4}
_STYLE = {"debug": "dim", "info": "cyan", "warn": "yellow", "error": "red", "fatal": "bold red"}


class LogBuilder:
    """
    Fluent builder returned by ``RunLog.log()`` when no message is given.

    Example:
        run_log.log(metadata={"epoch": 1}).info("epoch done")
        run_log.log().warn("segment on a single layer", layers=1)
    """

    def __init__(self, run_log: "RunLog", metadata: Optional[Dict[str, Any]] = None):
        self._run_log = run_log
        self._metadata = metadata

    def info(self, message: str, **extra_metadata) -> None:
        self._write(LogLevel.INFO.value, message, extra_metadata)

    def warn(self, message: str, **extra_metadata) -> None:
        self._write(LogLevel.WARN.value, message, extra_metadata)

    def error(self, message: str, **extra_metadata) -> None:
        self._write(LogLevel.ERROR.value, message, extra_metadata)

    def debug(self, message: str, **extra_metadata) -> None:
        self._write(LogLevel.DEBUG.value, message, extra_metadata)

    def fatal(self, message: str, **extra_metadata) -> None:
        self._write(LogLevel.FATAL.value, message, extra_metadata)

    def _write(self, level: str, message: str, extra_metadata: Dict[str, Any]) -> None:
        # Level-method kwargs win over log(metadata=...)
        if self._metadata and extra_metadata:
            final_metadata = {**self._metadata, **extra_metadata}
        else:
            final_metadata = self._metadata or extra_metadata or None
        self._run_log._write_log(message=message, level=level, metadata=final_metadata)


class RunLog:
    """
    Sink for structured log records.

    Args:
        path: Optional JSONL file. Parent directories are created on first write.
        console: rich Console to print to (default: stderr console).
        level: Minimum level printed to the console. ``None`` reads
            ``Runtime.log_level``. The JSONL file always receives every record.
        clock: Timestamp source, injectable for tests.
    """

    def __init__(
        self,
        path: Optional[Union[str, Path]] = None,
        *,
        console: Optional[Console] = None,
        level: Optional[str] = None,
        clock=time.time,
    ):
        self.path = Path(path) if path is not None else None
        self.console = console if console is not None else Console(stderr=True)
        if level is None:
            from .config import Runtime
            level = str(Runtime.log_level)
        self.level = LogLevel.validate(level)
        self._clock = clock
        self.records: list[Dict[str, Any]] = []

    def log(
        self,
        message: Optional[str] = None,
        *,
        level: str = "info",
        metadata: Optional[Dict[str, Any]] = None,
    ) -> Optional[LogBuilder]:
        """Write a record now, or return a :class:`LogBuilder` when ``message``
        is omitted."""
        if message is None:
            return LogBuilder(self, metadata)
        self._write_log(message=message, level=LogLevel.validate(level), metadata=metadata)
        return None

    def _write_log(self, *, message: str, level: str, metadata: Optional[Dict[str, Any]]) -> None:
        record = {"ts": self._clock(), "level": level, "message": message,
                  "metadata": metadata}
        self.records.append(record)
        if _SEVERITY[level] >= _SEVERITY[self.level]:
            extra = ""
            if metadata:
                extra = " " + " ".join(f"[dim]{k}[/dim]={escape(_fmt(v))}" for k, v in metadata.items())
            style = _STYLE[level]
            self.console.print(f"[{style}]{level:>5}[/{style}] {escape(message)}{extra}", highlight=False)
        if self.path is not None:
            self.path.parent.mkdir(parents=True, exist_ok=True)
            with self.path.open("a", encoding="utf-8") as f:
                f.write(json.dumps(record, default=_json_default) + "\n")


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _json_default(v: Any) -> Any:
    # numpy scalars and paths
    if hasattr(v, "item"):
        return v.item()
    return str(v)
