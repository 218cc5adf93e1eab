"""Small text-file helpers shared by the table, series and report writers."""

import os
import tempfile
from pathlib import Path


def atomic_write(path, text: str) -> Path:
    """Write ``text`` to ``path`` through a temporary file and a rename."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def format_float(value: float) -> str:
    """Shortest text that reads back to the same double."""
    return repr(float(value))


def parse_metadata(line: str) -> dict:
    """Parse ``key=value`` pairs separated by whitespace."""
    out = {}
    for token in line.split():
        key, sep, value = token.partition("=")
        if not sep:
            raise ValueError(f"malformed metadata token {token!r}")
        out[key] = value
    return out


class FormatError(ValueError):
    """A cache or data file does not match its declared format."""
