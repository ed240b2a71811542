"""Binary containers and atomic file output.

Two on-disk formats are defined here:

* ``INFM`` matrix container: magic ``b"INFM"``, u32 rows, u32 cols, then
  row-major float64 payload. All integers little-endian.
* ``INFB`` model container: magic ``b"INFB"``, u32 format version, a
  length-prefixed ASCII model-type tag, a length-prefixed UTF-8 JSON blob of
  scalar parameters, and a sequence of named float64 arrays.

Writers go through :func:`atomic_write` (temp file + rename) so a crashed run
never leaves a truncated artifact behind.
"""

from __future__ import annotations

import json
import os
import struct
import tempfile
from pathlib import Path

import numpy as np

from .exceptions import ContainerError

MATRIX_MAGIC = b"INFM"
MODEL_MAGIC = b"INFB"
MODEL_FORMAT_VERSION = 1


def atomic_write(path: str | Path, data: bytes) -> None:
    """Write ``data`` to ``path`` atomically (same-directory temp + rename)."""
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=path.name + ".", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def save_matrix(path: str | Path, matrix: np.ndarray) -> None:
    """Persist a 2-D float array in the INFM container."""
    m = np.ascontiguousarray(matrix, dtype="<f8")
    if m.ndim != 2:
        raise ContainerError(f"matrix container stores 2-D arrays, got ndim={m.ndim}")
    header = MATRIX_MAGIC + struct.pack("<II", m.shape[0], m.shape[1])
    atomic_write(path, header + m.tobytes())


def load_matrix(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if len(raw) < 12 or raw[:4] != MATRIX_MAGIC:
        raise ContainerError(f"{path}: not an INFM matrix container")
    rows, cols = struct.unpack("<II", raw[4:12])
    expected = 12 + 8 * rows * cols
    if len(raw) != expected:
        raise ContainerError(f"{path}: payload length {len(raw)} != expected {expected}")
    data = np.frombuffer(raw, dtype="<f8", offset=12, count=rows * cols)
    return data.reshape(rows, cols).copy()


def _pack_str(s: str) -> bytes:
    b = s.encode("utf-8")
    return struct.pack("<I", len(b)) + b


def _unpack_str(raw: bytes, off: int) -> tuple[str, int]:
    (n,) = struct.unpack_from("<I", raw, off)
    off += 4
    return raw[off : off + n].decode("utf-8"), off + n


def save_model_blob(
    path: str | Path,
    type_tag: str,
    params: dict,
    arrays: dict[str, np.ndarray],
) -> None:
    """Persist a model as scalar params (JSON) plus named float64 arrays.

    ``params`` must be JSON-serializable; array insertion order is preserved
    so round trips are byte-stable for identical inputs.
    """
    out = [MODEL_MAGIC, struct.pack("<I", MODEL_FORMAT_VERSION), _pack_str(type_tag)]
    out.append(_pack_str(json.dumps(params, sort_keys=True)))
    out.append(struct.pack("<I", len(arrays)))
    for name, arr in arrays.items():
        a = np.ascontiguousarray(arr, dtype="<f8")
        out.append(_pack_str(name))
        out.append(struct.pack("<I", a.ndim))
        out.append(struct.pack(f"<{a.ndim}I", *a.shape) if a.ndim else b"")
        out.append(a.tobytes())
    atomic_write(path, b"".join(out))


def load_model_blob(path: str | Path, expect_tag: str | None = None):
    """Load an INFB container, returning ``(type_tag, params, arrays)``."""
    raw = Path(path).read_bytes()
    if len(raw) < 8 or raw[:4] != MODEL_MAGIC:
        raise ContainerError(f"{path}: not an INFB model container")
    (version,) = struct.unpack_from("<I", raw, 4)
    if version != MODEL_FORMAT_VERSION:
        raise ContainerError(f"{path}: unsupported container version {version}")
    tag, off = _unpack_str(raw, 8)
    if expect_tag is not None and tag != expect_tag:
        raise ContainerError(f"{path}: expected model type {expect_tag!r}, found {tag!r}")
    params_json, off = _unpack_str(raw, off)
    params = json.loads(params_json)
    (n_arrays,) = struct.unpack_from("<I", raw, off)
    off += 4
    arrays: dict[str, np.ndarray] = {}
    for _ in range(n_arrays):
        name, off = _unpack_str(raw, off)
        (ndim,) = struct.unpack_from("<I", raw, off)
        off += 4
        shape = struct.unpack_from(f"<{ndim}I", raw, off) if ndim else ()
        off += 4 * ndim
        count = int(np.prod(shape, dtype=np.int64)) if ndim else 1
        arrays[name] = (
            np.frombuffer(raw, dtype="<f8", offset=off, count=count).reshape(shape).copy()
        )
        off += 8 * count
    return tag, params, arrays


def write_text(path: str | Path, text: str) -> None:
    atomic_write(path, text.encode("utf-8"))


def write_csv(path: str | Path, header: list[str], rows) -> None:
    """Write rows of already-formatted cells as a comma-separated file."""
    lines = [",".join(header)]
    lines.extend(",".join(str(c) for c in row) for row in rows)
    write_text(path, "\n".join(lines) + "\n")
