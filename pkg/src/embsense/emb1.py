"""EMB1 binary interchange format for embedding matrices.

Layout (all integers little-endian):

    bytes 0-3   magic b"EMB1"
    u32         version (1)
    u32         rows
    u32         cols
    rows*cols   float32 payload, row-major
    u32         trailer length
    trailer     UTF-8 JSON: sample_ids, class_labels, condition, metadata

The float payload is exactly what the matrix holds (data is cast to
float32 on write), so a write/read round-trip of a float32 matrix is
bit-exact.
"""

from __future__ import annotations

import json
import struct

import numpy as np

from .embedding import Condition, EmbeddingMatrix
from .errors import (
    BadMagicError,
    DimensionOverflowError,
    TruncatedPayloadError,
    VersionMismatchError,
)

MAGIC = b"EMB1"
VERSION = 1

# Caps rows*cols at ~2^32 payload bytes; also rejects nonsense headers.
MAX_ELEMENTS = (1 << 32) // 4


def write_embeddings(matrix: EmbeddingMatrix, path) -> None:
    """Serialize a matrix to an EMB1 file."""
    data = np.ascontiguousarray(matrix.data, dtype=np.float32)
    rows, cols = data.shape
    trailer = json.dumps(
        {
            "sample_ids": list(matrix.sample_ids),
            "class_labels": list(matrix.class_labels),
            "condition": {"effect": matrix.condition.effect,
                          "param": matrix.condition.param},
            "metadata": matrix.metadata,
        },
        sort_keys=True,
    ).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<III", VERSION, rows, cols))
        fh.write(data.tobytes())
        fh.write(struct.pack("<I", len(trailer)))
        fh.write(trailer)


def read_embeddings(path) -> EmbeddingMatrix:
    """Parse an EMB1 file; raises a distinct error per failure mode."""
    with open(path, "rb") as fh:
        blob = fh.read()
    if len(blob) < 4 or blob[:4] != MAGIC:
        raise BadMagicError(f"{path}: not an EMB1 file")
    if len(blob) < 16:
        raise TruncatedPayloadError(f"{path}: header truncated")
    version, rows, cols = struct.unpack_from("<III", blob, 4)
    if version != VERSION:
        raise VersionMismatchError(f"{path}: unsupported version {version}")
    if rows < 1 or cols < 2 or rows * cols > MAX_ELEMENTS:
        raise DimensionOverflowError(f"{path}: implausible shape {rows}x{cols}")
    start = 16
    end = start + rows * cols * 4
    if end + 4 > len(blob):
        raise TruncatedPayloadError(f"{path}: payload shorter than {rows}x{cols} floats")
    data = np.frombuffer(blob[start:end], dtype="<f4").reshape(rows, cols)
    (trailer_len,) = struct.unpack_from("<I", blob, end)
    trailer_bytes = blob[end + 4:end + 4 + trailer_len]
    if len(trailer_bytes) != trailer_len:
        raise TruncatedPayloadError(f"{path}: trailer shorter than declared")
    try:
        trailer = json.loads(trailer_bytes.decode("utf-8"))
        sample_ids = list(trailer["sample_ids"])
        class_labels = list(trailer["class_labels"])
        cond = trailer["condition"]
        condition = Condition(effect=cond["effect"], param=cond["param"])
        metadata = trailer.get("metadata", {})
    except (ValueError, KeyError, TypeError) as exc:
        raise TruncatedPayloadError(f"{path}: malformed JSON trailer: {exc}") from exc
    return EmbeddingMatrix(
        data=data.copy(),
        sample_ids=sample_ids,
        class_labels=class_labels,
        condition=condition,
        metadata=metadata,
    )
