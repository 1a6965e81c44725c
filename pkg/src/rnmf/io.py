"""On-disk formats: matrices, index lists, run manifests and config files.

Binary matrix layout (all little-endian)::

    b"RNMF1\\n"  uint64 rows  uint64 cols  float64[rows * cols] column-major

CSV matrices carry no header, one matrix row per line, 17 significant digits.
"""

import hashlib
import json
import math
import os
import struct
from pathlib import Path

import numpy as np

MAGIC = b"RNMF1\n"
_HEADER = struct.Struct("<QQ")
CONFIG_ENV = "RNMF_CONFIG"


class FormatError(ValueError):
    pass


def matrix_format(path):
    suffix = Path(path).suffix.lower()
    if suffix == ".csv":
        return "csv"
    if suffix == ".bin":
        return "bin"
    raise FormatError(f"cannot infer matrix format from {path!s}; use .bin or .csv")


def encode_bin(X):
    X = np.asarray(X, dtype="<f8")
    if X.ndim != 2:
        raise FormatError("only 2-D matrices can be written")
    return MAGIC + _HEADER.pack(*X.shape) + X.tobytes(order="F")


def decode_bin(data):
    if not data.startswith(MAGIC):
        raise FormatError("bad magic bytes")
    off = len(MAGIC)
    if len(data) < off + _HEADER.size:
        raise FormatError("truncated header")
    rows, cols = _HEADER.unpack_from(data, off)
    off += _HEADER.size
    if len(data) != off + 8 * rows * cols:
        raise FormatError(f"payload size does not match {rows}x{cols}")
    flat = np.frombuffer(data, dtype="<f8", offset=off, count=rows * cols)
    return flat.reshape((rows, cols), order="F").astype(np.float64)


def write_matrix(path, X, fmt=None):
    path = Path(path)
    fmt = fmt or matrix_format(path)
    if fmt == "bin":
        path.write_bytes(encode_bin(X))
    elif fmt == "csv":
        X = np.asarray(X, dtype=np.float64)
        lines = [",".join(format(v, ".17g") for v in row) for row in X]
        path.write_text("\n".join(lines) + "\n")
    else:
        raise FormatError(f"unknown format {fmt!r}")


def read_matrix(path, fmt=None):
    path = Path(path)
    fmt = fmt or matrix_format(path)
    if fmt == "bin":
        return decode_bin(path.read_bytes())
    if fmt == "csv":
        rows = [line for line in path.read_text().splitlines() if line.strip()]
        try:
            X = np.array([[float(v) for v in line.split(",")] for line in rows])
        except ValueError as exc:
            raise FormatError(f"{path}: {exc}") from None
        if X.ndim != 2:
            raise FormatError(f"{path}: ragged rows")
        return X
    raise FormatError(f"unknown format {fmt!r}")


def write_indices(path, indices):
    Path(path).write_text("".join(f"{int(i)}\n" for i in indices))


def read_indices(path):
    return [int(line) for line in Path(path).read_text().split()]


def file_digest(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        obj = float(obj)
        # JSON has no inf/nan literals
        return obj if math.isfinite(obj) else str(obj)
    if isinstance(obj, Path):
        return str(obj)
    return obj


def write_manifest(path, manifest):
    Path(path).write_text(json.dumps(_jsonable(manifest), indent=2, sort_keys=True) + "\n")


def read_manifest(path):
    return json.loads(Path(path).read_text())


def parse_config_text(text):
    """Parse ``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise FormatError(f"config line {lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key.replace("-", "_")] = value
    return out


def load_config(path=None):
    """Read the config file named by ``path`` or ``$RNMF_CONFIG`` (empty if neither)."""
    path = path or os.environ.get(CONFIG_ENV)
    if not path:
        return {}
    return parse_config_text(Path(path).read_text())
