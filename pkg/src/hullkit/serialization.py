"""Small deterministic binary container for named numpy arrays plus a JSON blob.

Layout: magic (8 bytes) | version (1 byte) | header length (u32 LE) | header
JSON (sorted keys) | raw little-endian array bytes.  Identical inputs give
byte-identical output.
"""
from __future__ import annotations

import json
import os
import struct
import tempfile

import numpy as np


class SchemaError(ValueError):
    pass


def pack(magic: bytes, version: int, meta: dict, arrays: dict) -> bytes:
    if len(magic) != 8:
        raise ValueError("magic must be 8 bytes")
    entries, chunks, offset = [], [], 0
    for name in sorted(arrays):
        a = np.ascontiguousarray(arrays[name])
        a = a.astype(a.dtype.newbyteorder("<"), copy=False)
        raw = a.tobytes()
        entries.append({"name": name, "dtype": a.dtype.str, "shape": list(a.shape),
                        "offset": offset, "nbytes": len(raw)})
        chunks.append(raw)
        offset += len(raw)
    header = json.dumps({"meta": meta, "arrays": entries}, sort_keys=True,
                        separators=(",", ":")).encode()
    return magic + bytes([version]) + struct.pack("<I", len(header)) + header + b"".join(chunks)


def unpack(data: bytes, magic: bytes, version: int):
    if data[:8] != magic:
        raise SchemaError(f"bad magic {data[:8]!r}, expected {magic!r}")
    if data[8] != version:
        raise SchemaError(f"format version {data[8]} but this build reads version {version}")
    (hlen,) = struct.unpack("<I", data[9:13])
    header = json.loads(data[13:13 + hlen])
    base = 13 + hlen
    arrays = {}
    for e in header["arrays"]:
        start = base + e["offset"]
        arrays[e["name"]] = np.frombuffer(data[start:start + e["nbytes"]],
                                          dtype=np.dtype(e["dtype"])).reshape(e["shape"]).copy()
    return header["meta"], arrays


def write_atomic(path, data: bytes):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
