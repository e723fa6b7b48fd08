"""Helpers shared by the subcommands."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple

import numpy as np

from .._errors import CodecError, ConfigError, VersionError
from ..model import MODEL_MAGIC, FlowModel, load_model
from ._style import CYAN, RED, RESET

BITSTREAM_MAGIC = b"CFV1"


def make_parser(command: str, description: str) -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog=f"flowcodec {command}",
        description=description,
        formatter_class=argparse.ArgumentDefaultsHelpFormatter,
    )
    p.add_argument("--json", action="store_true", help="print the result as one JSON object")
    return p


def error(message: str) -> int:
    print(f"{RED}error:{RESET} {message}", file=sys.stderr)
    return 1


def emit(result: Dict[str, Any], as_json: bool) -> None:
    if as_json:
        print(json.dumps(result, default=_json_default, sort_keys=True))
        return
    width = max((len(k) for k in result), default=0)
    for k, v in result.items():
        print(f"  {CYAN}{k:<{width}}{RESET}  {_fmt(v)}")


def _fmt(v: Any) -> str:
    if isinstance(v, float):
        return f"{v:.4f}"
    if isinstance(v, dict):
        return ", ".join(f"{k}={_fmt(x)}" for k, x in v.items())
    return str(v)


def _json_default(v: Any) -> Any:
    if isinstance(v, np.generic):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    return str(v)


def load_any_model(path: str) -> Tuple[FlowModel, str]:
    """A model from a ``.cfv`` bitstream or a raw ``.cfm`` model file,
    detected by magic. Returns the model and ``"bitstream"`` or ``"model"``."""
    p = Path(path)
    try:
        with p.open("rb") as f:
            magic = f.read(4)
    except OSError as e:
        raise CodecError(f"cannot read '{p}': {e}") from e
    if magic == BITSTREAM_MAGIC:
        from ..codec import read_bitstream, unpack

        return unpack(read_bitstream(p)), "bitstream"
    if magic == MODEL_MAGIC:
        return load_model(p), "model"
    raise VersionError(f"'{p}' is neither a flowcodec bitstream nor a model file (magic {magic!r})")


def parse_resolution(text: Optional[str]) -> Optional[Tuple[int, int]]:
    """``"WxH"`` → ``(W, H)``."""
    if text is None:
        return None
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError:
        raise ConfigError(f"resolution must look like WIDTHxHEIGHT, got {text!r}") from None
    if w < 1 or h < 1:
        raise ConfigError(f"resolution must be at least 1x1, got {text!r}")
    return w, h


def parse_times(text: Optional[str]) -> Optional[np.ndarray]:
    """Comma-separated normalized times."""
    if text is None:
        return None
    try:
        return np.array([float(v) for v in text.split(",") if v.strip()], dtype=np.float64)
    except ValueError:
        raise ConfigError(f"times must be comma-separated numbers, got {text!r}") from None


def add_render_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--resolution", default=None, help="output WIDTHxHEIGHT (default: training size)")
    p.add_argument("--times", default=None,
                   help="comma-separated normalized times in [-1, 1] (default: training frames)")
    p.add_argument("--fps", type=float, default=None, help="fps recorded with raw output (default: model fps)")


def written(paths: List[Path]) -> List[str]:
    return [str(p) for p in paths]
