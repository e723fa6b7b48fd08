"""flowcodec configuration.

Two layers:

* ``Runtime``: process-wide settings resolved env var → default through
  params-proto (``FLOWCODEC_THREADS``, ``FLOWCODEC_LOG_LEVEL``,
  ``FLOWCODEC_PROGRESS``). The CLI's ``--threads`` writes straight into it.
* Config files: JSON (nested objects allowed) or ``key=value`` text, flattened
  to dot-notation keys (``{"weights": {"bias": 0.5}}`` → ``weights.bias``) and
  validated against the bundled JSON Schema. CLI flags override file values.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Dict, List

from params_proto import EnvVar, proto

from ._errors import ConfigError

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off", ""}


@proto.prefix
class Runtime:
    threads: int = EnvVar @ "FLOWCODEC_THREADS" | 1
    log_level: str = EnvVar @ "FLOWCODEC_LOG_LEVEL" | "info"
    progress: bool = EnvVar @ "FLOWCODEC_PROGRESS" | True

    @classmethod
    def worker_count(cls) -> int:
        """Worker cap for frame-parallel work. Env values arrive as strings."""
        try:
            n = int(cls.threads)
        except (TypeError, ValueError):
            raise ConfigError(f"threads must be an integer, got {cls.threads!r}") from None
        if n < 1:
            raise ConfigError(f"threads must be >= 1, got {n}")
        return n

    @classmethod
    def show_progress(cls) -> bool:
        v = cls.progress
        if isinstance(v, str):
            v = v.strip().lower()
            if v in _TRUE:
                return True
            if v in _FALSE:
                return False
            raise ConfigError(f"FLOWCODEC_PROGRESS must be a boolean, got {cls.progress!r}")
        return bool(v)


# ─── dot-notation helpers ────────────────────────────────────────────


def flatten_dict(d: Dict[str, Any], parent_key: str = "", sep: str = ".") -> Dict[str, Any]:
    """``{"a": {"b": 1}, "c": 2}`` → ``{"a.b": 1, "c": 2}``."""
    items = []
    for k, v in d.items():
        new_key = f"{parent_key}{sep}{k}" if parent_key else k
        if isinstance(v, dict):
            items.extend(flatten_dict(v, new_key, sep=sep).items())
        else:
            items.append((new_key, v))
    return dict(items)


def unflatten_dict(d: Dict[str, Any], sep: str = ".") -> Dict[str, Any]:
    """Inverse of :func:`flatten_dict`."""
    result: Dict[str, Any] = {}
    for key, value in d.items():
        parts = key.split(sep)
        current = result
        for part in parts[:-1]:
            nxt = current.setdefault(part, {})
            if not isinstance(nxt, dict):
                raise ConfigError(f"config key '{key}' collides with scalar '{part}'")
            current = nxt
        current[parts[-1]] = value
    return result


# ─── config files ────────────────────────────────────────────────────


def _load_bundled_schema() -> dict:
    from importlib import resources

    ref = resources.files("flowcodec").joinpath("schemas/train-config.schema.json")
    return json.loads(ref.read_text(encoding="utf-8"))


def validate_config(nested: Dict[str, Any]) -> List[str]:
    """Validate a nested config against the bundled schema. Returns a list of
    ``path: message`` strings (empty = valid)."""
    import jsonschema

    validator = jsonschema.Draft202012Validator(_load_bundled_schema())
    errors = sorted(validator.iter_errors(nested), key=lambda e: list(e.absolute_path))
    return [
        f"{'/'.join(str(p) for p in e.absolute_path) or '<root>'}: {e.message}"
        for e in errors[:20]
    ]


def _parse_scalar(text: str) -> Any:
    text = text.strip()
    try:
        return json.loads(text)
    except ValueError:
        return text


def parse_key_value(text: str, *, source: str = "<config>") -> Dict[str, Any]:
    """``key = value`` lines; ``#`` starts a comment. Values are read as JSON
    literals when they parse (numbers, booleans), else kept as strings."""
    out: Dict[str, Any] = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {raw.strip()!r}")
        key, value = line.split("=", 1)
        key = key.strip()
        if not key:
            raise ConfigError(f"{source}:{lineno}: empty key")
        out[key] = _parse_scalar(value)
    return out


def load_config_file(path: str | Path) -> Dict[str, Any]:
    """Read a JSON or key=value config file into a flat dot-notation dict.

    Raises:
        ConfigError: unreadable file, malformed content, or schema violations.
    """
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as e:
        raise ConfigError(f"cannot read config file '{p}': {e}") from e

    if p.suffix.lower() == ".json" or text.lstrip().startswith("{"):
        try:
            data = json.loads(text)
        except ValueError as e:
            raise ConfigError(f"{p}: invalid JSON: {e}") from e
        if not isinstance(data, dict):
            raise ConfigError(f"{p}: top level must be an object")
        flat = flatten_dict(data)
    else:
        flat = parse_key_value(text, source=str(p))

    problems = validate_config(unflatten_dict(flat))
    if problems:
        raise ConfigError(f"{p}: invalid config\n  " + "\n  ".join(problems))
    return flat
