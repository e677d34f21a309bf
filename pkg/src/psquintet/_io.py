"""Small shared IO helpers: canonical float text and atomic file writes.

Every float that reaches disk goes through fmt17 (17 significant digits, the
shortest width that round-trips any double), and every file is written to a
temp path then renamed, so partially written outputs can never be observed and
identical inputs produce byte-identical files.
"""

from __future__ import annotations

import os
import tempfile

from .errors import IoError


def fmt17(x: float) -> str:
    return format(float(x), ".17g")


def atomic_write_text(path: str, text: str) -> int:
    """Write text to path via temp+rename; returns the byte count."""
    data = text.encode("utf-8")
    d = os.path.dirname(os.path.abspath(path))
    try:
        os.makedirs(d, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", suffix="~")
        try:
            with os.fdopen(fd, "wb") as fh:
                fh.write(data)
            os.replace(tmp, path)
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    return len(data)


def canonical_json(obj) -> str:
    """Deterministic JSON: sorted keys, floats as fmt17, no whitespace drift."""
    out: list[str] = []
    _dump(obj, out)
    return "".join(out) + "\n"


def _dump(obj, out: list[str]) -> None:
    if obj is None:
        out.append("null")
    elif obj is True:
        out.append("true")
    elif obj is False:
        out.append("false")
    elif isinstance(obj, int):
        out.append(str(obj))
    elif isinstance(obj, float):
        out.append(fmt17(obj))
    elif isinstance(obj, str):
        out.append('"' + obj.replace("\\", "\\\\").replace('"', '\\"') + '"')
    elif isinstance(obj, dict):
        out.append("{")
        for i, key in enumerate(sorted(obj)):
            if i:
                out.append(",")
            _dump(str(key), out)
            out.append(":")
            _dump(obj[key], out)
        out.append("}")
    elif isinstance(obj, (list, tuple)):
        out.append("[")
        for i, item in enumerate(obj):
            if i:
                out.append(",")
            _dump(item, out)
        out.append("]")
    else:
        raise TypeError(f"canonical_json cannot serialize {type(obj)!r}")
