import os
import logging
import json
import hashlib
from datetime import datetime, timezone

from . import __version__
from .config import LOG_DIR, LOG_FORMAT, LOG_LEVEL

FLOAT_FORMAT = '%.17g'


def setup_logging(name, log_to_file=True):
    """
    Set up logging configuration

    Args:
        name (str): Logger name
        log_to_file (bool): Whether to log to a file

    Returns:
        logging.Logger: Configured logger
    """
    # Create logger
    logger = logging.getLogger(name)
    logger.setLevel(getattr(logging, LOG_LEVEL.upper()))
    # handlers below are the only ones; do not repeat records through root
    logger.propagate = False

    # Repeated calls must not stack handlers
    if logger.handlers:
        return logger

    # Create formatter
    formatter = logging.Formatter(LOG_FORMAT)

    # Create console handler
    console_handler = logging.StreamHandler()
    console_handler.setFormatter(formatter)
    logger.addHandler(console_handler)

    # Create file handler if logging to file
    if log_to_file:
        os.makedirs(LOG_DIR, exist_ok=True)
        log_file = os.path.join(LOG_DIR, f"{name}_{datetime.now().strftime('%Y%m%d')}.log")
        file_handler = logging.FileHandler(log_file)
        file_handler.setFormatter(formatter)
        logger.addHandler(file_handler)

    return logger


def canonical_json(obj):
    """Key-sorted, whitespace-free JSON used for hashing."""
    return json.dumps(obj, sort_keys=True, separators=(',', ':'), allow_nan=False)


def manifest_hash(obj):
    """sha256 hex digest of the canonical JSON form of obj"""
    return hashlib.sha256(canonical_json(obj).encode('utf-8')).hexdigest()


def metadata_line(kind, digest, seed=None, **extra):
    """
    Build the JSON metadata header written as the first line of every CSV.

    The timestamp lives here and only here, so CSV bodies stay byte-identical
    across re-runs of the same manifest.
    """
    meta = {
        'kind': kind,
        'manifest_hash': digest,
        'seed': seed,
        'created': datetime.now(timezone.utc).strftime('%Y-%m-%dT%H:%M:%SZ'),
        'version': __version__,
    }
    meta.update(extra)
    return json.dumps(meta, sort_keys=True)


def write_table(path_or_buffer, frame, header):
    """
    Write a pandas DataFrame as CSV preceded by one JSON metadata line.

    Args:
        path_or_buffer: File path or open text stream
        frame (pandas.DataFrame): Table body
        header (str): Metadata line from metadata_line()
    """
    if hasattr(path_or_buffer, 'write'):
        path_or_buffer.write(header + '\n')
        frame.to_csv(path_or_buffer, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')
        return

    directory = os.path.dirname(os.path.abspath(path_or_buffer))
    os.makedirs(directory, exist_ok=True)
    with open(path_or_buffer, 'w', newline='') as f:
        f.write(header + '\n')
        frame.to_csv(f, index=False, float_format=FLOAT_FORMAT, lineterminator='\n')


def read_table(path):
    """Read a file written by write_table; returns (metadata dict, DataFrame)."""
    import pandas as pd

    with open(path) as f:
        meta = json.loads(f.readline())
        frame = pd.read_csv(f)
    return meta, frame


def csv_body(path):
    """Everything after the metadata line, for determinism checks."""
    with open(path) as f:
        f.readline()
        return f.read()


def save_json(path, payload):
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w') as f:
        json.dump(payload, f, indent=2, sort_keys=True)
        f.write('\n')


def write_json_lines(path, rows, header):
    """One JSON object per line after the metadata line."""
    directory = os.path.dirname(os.path.abspath(path))
    os.makedirs(directory, exist_ok=True)
    with open(path, 'w') as f:
        f.write(header + '\n')
        for row in rows:
            f.write(json.dumps(row, sort_keys=True) + '\n')


def save_error_record(record, output_dir=None):
    """
    Print an error record as one JSON line and, when an output
    directory is known, save it next to the other outputs.
    """
    line = json.dumps(record, sort_keys=True)
    print(line)
    if output_dir:
        save_json(os.path.join(output_dir, 'error.json'), record)
    return line
