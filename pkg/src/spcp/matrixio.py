"""Matrix file formats: headerless CSV and a binary container.

Binary layout: magic ``SLRM`` (4 bytes), version u32 LE, rows u64 LE,
cols u64 LE, then the row-major IEEE-754 f64 LE payload. Binary
round-trips are bit-exact. Writes are atomic (temp file + rename).
"""

import json
import os
import struct
import tempfile

import numpy as np

from .errors import (
    MalformedHeaderError,
    MatrixIOError,
    NonFiniteDataError,
    TruncatedPayloadError,
)
from .validation import as_matrix

__all__ = ["read_matrix", "write_matrix", "write_json_atomic"]

MAGIC = b"SLRM"
VERSION = 1
_HEADER = struct.Struct("<4sIQQ")

FORMATS = ("csv", "binary")


def _detect_format(path, fmt):
    if fmt is not None:
        if fmt not in FORMATS:
            raise ValueError(f"unknown matrix format {fmt!r}; expected one of {FORMATS}")
        return fmt
    return "csv" if str(path).endswith(".csv") else "binary"


def _atomic_write(path, payload_writer):
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, prefix=".tmp-", suffix=".part")
    try:
        with os.fdopen(fd, "wb") as fh:
            payload_writer(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_matrix(a, path, fmt=None):
    """Write a matrix as CSV or binary (inferred from the extension)."""
    a = as_matrix(a, "matrix")
    fmt = _detect_format(path, fmt)
    if fmt == "csv":

        def emit(fh):
            for row in a:
                fh.write((",".join("%.17g" % v for v in row) + "\n").encode("ascii"))

    else:

        def emit(fh):
            fh.write(_HEADER.pack(MAGIC, VERSION, a.shape[0], a.shape[1]))
            fh.write(np.ascontiguousarray(a, dtype="<f8").tobytes())

    _atomic_write(path, emit)


def _read_csv(path):
    rows = []
    width = None
    with open(path, "r", encoding="ascii") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise MatrixIOError(
                    f"{path}: line {line_no} has {len(fields)} fields, expected {width}"
                )
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise MatrixIOError(f"{path}: line {line_no}: {exc}") from exc
    if not rows:
        raise MatrixIOError(f"{path}: empty CSV matrix")
    return np.array(rows, dtype=np.float64)


def _read_binary(path):
    with open(path, "rb") as fh:
        header = fh.read(_HEADER.size)
        if len(header) < _HEADER.size:
            raise MalformedHeaderError(f"{path}: file shorter than header")
        magic, version, rows, cols = _HEADER.unpack(header)
        if magic != MAGIC:
            raise MalformedHeaderError(f"{path}: bad magic {magic!r}")
        if version != VERSION:
            raise MalformedHeaderError(f"{path}: unsupported version {version}")
        expect = rows * cols * 8
        payload = fh.read(expect)
        if len(payload) < expect:
            raise TruncatedPayloadError(
                f"{path}: payload has {len(payload)} bytes, expected {expect}"
            )
    a = np.frombuffer(payload, dtype="<f8").reshape(rows, cols)
    return np.ascontiguousarray(a, dtype=np.float64)


def read_matrix(path, fmt=None):
    """Read a matrix file; rejects NaN/Inf entries.

    Raises ``MalformedHeaderError``, ``TruncatedPayloadError``, or
    ``NonFiniteDataError`` (each with a distinct ``code``) on bad input.
    """
    fmt = _detect_format(path, fmt)
    a = _read_csv(path) if fmt == "csv" else _read_binary(path)
    if not np.isfinite(a).all():
        raise NonFiniteDataError(f"{path}: matrix contains NaN or Inf entries")
    return a


def write_json_atomic(obj, path):
    """Serialize ``obj`` to JSON at ``path`` via temp file + rename."""

    def emit(fh):
        fh.write(json.dumps(obj, indent=2, sort_keys=True).encode("utf-8"))
        fh.write(b"\n")

    _atomic_write(path, emit)
