import csv
import json
import os
import shutil
import tempfile
from pathlib import Path
from contextlib import contextmanager
from typing import Any, Iterable, Sequence


@contextmanager
def atomic_write(file_path, mode='w', encoding='utf-8', newline=None):
    """
    Context manager for atomic file writes.
    Writes to a temporary file and renames it to the target file on success.
    """
    path = Path(file_path)
    # Same directory so the final rename stays on one filesystem
    temp_dir = path.parent
    temp_dir.mkdir(parents=True, exist_ok=True)

    fd, temp_path = tempfile.mkstemp(dir=temp_dir, prefix=f".{path.name}.", text=True)
    os.close(fd)

    try:
        with open(temp_path, mode, encoding=encoding, newline=newline) as f:
            yield f
        shutil.move(temp_path, path)
    except Exception:
        if os.path.exists(temp_path):
            os.remove(temp_path)
        raise


def dump_json(payload: Any) -> str:
    """Canonical JSON text: sorted keys, 2-space indent, trailing newline."""
    return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False, allow_nan=False) + "\n"


def write_json(file_path, payload: Any) -> Path:
    path = Path(file_path)
    with atomic_write(path) as f:
        f.write(dump_json(payload))
    return path


def write_csv_rows(file_path, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    """Write a header plus rows as RFC 4180 CSV with '\\n' line endings."""
    path = Path(file_path)
    with atomic_write(path, newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(header)
        for row in rows:
            writer.writerow(row)
    return path
