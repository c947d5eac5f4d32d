import os
import tempfile
from pathlib import Path


def atomic_write_bytes(path, data: bytes) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def atomic_write_text(path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


def fmt(x: float) -> str:
    """Shortest repr that round-trips a float exactly."""
    return repr(float(x))


def write_rows(path, header, rows) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(r) for r in rows)
    atomic_write_text(path, "\n".join(lines) + "\n")
