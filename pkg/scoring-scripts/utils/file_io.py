"""
Low-level file helpers shared by the loaders and writers.
"""

import contextlib
import gzip
import json
import os
import re
import tempfile
from typing import Iterator, Tuple

import pandas as pd

from .errors import DataFormatError

GZIP_MAGIC = b'\x1f\x8b'


def open_text(path: str):
    """Open a plain or gzip-compressed text file for reading."""
    with open(path, 'rb') as f:
        compressed = f.read(2) == GZIP_MAGIC
    if compressed:
        return gzip.open(path, 'rt', encoding='utf-8')
    return open(path, 'r', encoding='utf-8')


def read_json_lines(path: str) -> Iterator[Tuple[int, dict]]:
    """
    Yield (line number, object) for every non-blank line of a JSON-lines file.

    Raises:
        DataFormatError: If the file cannot be read or a line is not a JSON object
    """
    try:
        f = open_text(path)
    except OSError as e:
        raise DataFormatError(f"Cannot read file: {e}", path) from e

    with f:
        line_num = 0
        try:
            for line_num, line in enumerate(f, 1):
                if not line.strip():
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as e:
                    raise DataFormatError(f"Malformed JSON: {e.msg}", path, line_num) from e
                if not isinstance(record, dict):
                    raise DataFormatError("Expected a JSON object", path, line_num)
                yield line_num, record
        except (OSError, EOFError, UnicodeDecodeError) as e:
            raise DataFormatError(f"Cannot read file: {e}", path, line_num + 1) from e


def read_csv(path: str) -> pd.DataFrame:
    """
    Read a CSV with every column as (non-NA) text.

    Raises:
        DataFormatError: With the line number when the parser reports one; empty
            or undecodable files carry only the path
    """
    try:
        return pd.read_csv(path, dtype=str, keep_default_na=False, skipinitialspace=True)
    except OSError as e:
        raise DataFormatError(f"Cannot read file: {e}", path) from e
    except pd.errors.ParserError as e:
        message = str(e).strip()
        match = re.search(r'line (\d+)', message)
        raise DataFormatError(f"Malformed CSV: {message}", path, int(match.group(1)) if match else None) from e
    except (pd.errors.EmptyDataError, UnicodeDecodeError) as e:
        raise DataFormatError(f"Malformed CSV: {e}", path) from e


def atomic_write_text(path: str, text: str):
    """Write `text` to a temporary file next to `path`, then rename it into place."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    fd, tmp_path = tempfile.mkstemp(dir=directory, prefix=f".{os.path.basename(path)}.", suffix='.tmp')
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as f:
            f.write(text)
        os.replace(tmp_path, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp_path)
        raise
