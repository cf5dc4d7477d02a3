"""CSV emission with fixed schemas and 17-significant-digit floats."""
from __future__ import annotations

import os
import tempfile
from pathlib import Path


def fmt(value) -> str:
    """Render one cell; floats carry 17 significant digits."""
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return f"{value:.17g}"
    if value is None:
        return ""
    if isinstance(value, str):
        # keep the one-line-per-row framing intact
        return value.replace(",", ";").replace("\n", " ")
    return str(value)


def write_csv(path, header, rows):
    """Write a CSV atomically (temp file + rename), LF line endings."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as handle:
            handle.write(",".join(header) + "\n")
            for row in rows:
                handle.write(",".join(fmt(v) for v in row) + "\n")
        os.chmod(tmp, 0o644)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path
