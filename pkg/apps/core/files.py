"""
File helpers for the JSON configs and CSV outputs used by the commands.

All failures (missing file, permission problem, malformed content) surface as
InputFileError so that commands can map them to a single exit code.
"""

import csv
import json
import logging
from pathlib import Path

import numpy as np

from .exceptions import InputFileError

logger = logging.getLogger(__name__)


def _jsonable(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


def read_json(path):
    """
    Load a JSON object from disk.

    Raises:
        InputFileError: If the file is missing, unreadable or not valid JSON.
    """
    path = Path(path)
    try:
        with path.open('r', encoding='utf-8') as handle:
            return json.load(handle)
    except FileNotFoundError as exc:
        raise InputFileError(f"File not found: {path}") from exc
    except json.JSONDecodeError as exc:
        raise InputFileError(f"Malformed JSON in {path}: {exc}") from exc
    except OSError as exc:
        raise InputFileError(f"Cannot read {path}: {exc}") from exc


def dumps_json(payload):
    """Indented JSON text, numpy values converted."""
    return json.dumps(payload, indent=2, default=_jsonable)


def write_json(path, payload):
    """Write payload as indented JSON, converting numpy values."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8') as handle:
            handle.write(dumps_json(payload))
            handle.write('\n')
    except OSError as exc:
        raise InputFileError(f"Cannot write {path}: {exc}") from exc
    logger.info("Wrote %s", path)
    return path


def read_csv_rows(path):
    """
    Read a CSV file with a header row.

    Returns:
        list[dict]: One dict per data row, keyed by header.
    """
    path = Path(path)
    try:
        with path.open('r', encoding='utf-8', newline='') as handle:
            return list(csv.DictReader(handle))
    except FileNotFoundError as exc:
        raise InputFileError(f"File not found: {path}") from exc
    except (OSError, csv.Error) as exc:
        raise InputFileError(f"Cannot read {path}: {exc}") from exc


def write_csv_rows(path, header, rows):
    """
    Write rows (sequences matching header) with a header line.

    Floats are written with repr precision so files round-trip exactly.
    """
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open('w', encoding='utf-8', newline='') as handle:
            writer = csv.writer(handle)
            writer.writerow(header)
            for row in rows:
                writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    except OSError as exc:
        raise InputFileError(f"Cannot write {path}: {exc}") from exc
    logger.info("Wrote %s (%d rows)", path, len(rows))
    return path
