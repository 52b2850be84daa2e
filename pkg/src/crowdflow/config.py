"""``key = value`` run configuration files.

Keys mirror the long CLI flags with dashes or underscores, e.g.::

    # pipeline.cfg
    tau = 0.8
    merge-thresh = 30
    dump_intermediates = true
"""

from __future__ import annotations

from pathlib import Path

from .errors import ParseError

_TYPES = {
    "tau": float,
    "c1": float,
    "c2": float,
    "c3": float,
    "size_thresh": int,
    "merge_thresh": float,
    "dump_intermediates": "bool",
    "timings": "bool",
    "seed": int,
}
_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


def parse_config(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        key = key.replace("-", "_")
        kind = _TYPES.get(key)
        if kind is None:
            raise ParseError(f"unknown config key {key!r}", lineno)
        if kind == "bool":
            if value.lower() not in _TRUE | _FALSE:
                raise ParseError(f"{key} expects a boolean, got {value!r}", lineno)
            out[key] = value.lower() in _TRUE
        else:
            try:
                out[key] = kind(value)
            except ValueError:
                raise ParseError(f"{key} expects {kind.__name__}, got {value!r}", lineno) from None
    return out


def load_config(path) -> dict:
    return parse_config(Path(path).read_text())
