"""Versioned, checksummed binary container for datasets and models.

Layout (little-endian throughout)::

    magic "CWC\\0" | u32 format version | u64 header length | header JSON
    | raw array payload | sha256 of everything before the trailer

The header JSON is canonical (sorted keys, no whitespace) and carries a
``kind`` tag, free-form ``meta``, and an array manifest in payload order, so
a file written twice from identical inputs is byte-identical. Zip-based
formats were rejected: their embedded timestamps break that guarantee.
"""
from __future__ import annotations

import hashlib
import json
import struct
from pathlib import Path

import numpy as np

MAGIC = b"CWC\0"
FORMAT_VERSION = 1
SUPPORTED_VERSIONS = (1,)

_PREAMBLE = struct.Struct("<4sIQ")
_DIGEST_SIZE = hashlib.sha256().digest_size

# dtypes allowed in the payload; everything is stored little-endian.
_DTYPES = {"<i2", "<i4", "<i8", "<f8"}


class ContainerError(ValueError):
    """Base class for malformed container files."""


class BadMagicError(ContainerError):
    pass


class UnsupportedVersionError(ContainerError):
    def __init__(self, found: int):
        super().__init__(
            f"unsupported container format version {found}; "
            f"supported versions: {', '.join(str(v) for v in SUPPORTED_VERSIONS)}"
        )
        self.found = found


class ChecksumError(ContainerError):
    pass


class WrongKindError(ContainerError):
    pass


def _canonical_json(obj) -> bytes:
    return json.dumps(obj, sort_keys=True, separators=(",", ":")).encode("utf-8")


def pack(kind: str, meta: dict, arrays: dict[str, np.ndarray]) -> bytes:
    """Serialize ``meta`` plus named arrays into container bytes."""
    manifest = []
    blobs = []
    for name, arr in arrays.items():
        arr = np.ascontiguousarray(arr)
        dtype = arr.dtype.newbyteorder("<").str
        if dtype not in _DTYPES:
            raise ValueError(f"array {name!r} has unsupported dtype {arr.dtype}")
        arr = arr.astype(dtype, copy=False)
        manifest.append({"name": name, "dtype": dtype, "shape": list(arr.shape)})
        blobs.append(arr.tobytes())
    header = _canonical_json({"kind": kind, "meta": meta, "arrays": manifest})
    body = _PREAMBLE.pack(MAGIC, FORMAT_VERSION, len(header)) + header + b"".join(blobs)
    return body + hashlib.sha256(body).digest()


def unpack(data: bytes, expected_kind: str | None = None) -> tuple[dict, dict[str, np.ndarray]]:
    """Inverse of :func:`pack`; returns ``(meta, arrays)``.

    The version field is validated before the checksum so that a file of an
    unknown (possibly future) layout reports a version error, not a spurious
    corruption error.
    """
    if len(data) < _PREAMBLE.size + _DIGEST_SIZE:
        raise ContainerError("truncated container: too short for preamble and checksum")
    magic, version, header_len = _PREAMBLE.unpack_from(data)
    if magic != MAGIC:
        raise BadMagicError("not a carworth container (bad magic bytes)")
    if version not in SUPPORTED_VERSIONS:
        raise UnsupportedVersionError(version)
    body, digest = data[:-_DIGEST_SIZE], data[-_DIGEST_SIZE:]
    if hashlib.sha256(body).digest() != digest:
        raise ChecksumError("container checksum mismatch: file is corrupt or truncated")
    header_end = _PREAMBLE.size + header_len
    if header_end > len(body):
        raise ContainerError("truncated container: header extends past payload")
    header = json.loads(body[_PREAMBLE.size:header_end].decode("utf-8"))
    if expected_kind is not None and header.get("kind") != expected_kind:
        raise WrongKindError(
            f"expected a {expected_kind!r} container, found {header.get('kind')!r}"
        )
    arrays: dict[str, np.ndarray] = {}
    offset = header_end
    for entry in header["arrays"]:
        count = int(np.prod(entry["shape"], dtype=np.int64)) if entry["shape"] else 1
        nbytes = count * np.dtype(entry["dtype"]).itemsize
        if offset + nbytes > len(body):
            raise ContainerError(f"truncated container: array {entry['name']!r} incomplete")
        arr = np.frombuffer(body, dtype=entry["dtype"], count=count, offset=offset)
        arrays[entry["name"]] = arr.reshape(entry["shape"])
        offset += nbytes
    if offset != len(body):
        raise ContainerError("container payload has trailing bytes")
    return header["meta"], arrays


def write(path: str | Path, kind: str, meta: dict, arrays: dict[str, np.ndarray]) -> bytes:
    data = pack(kind, meta, arrays)
    Path(path).write_bytes(data)
    return data


def read(path: str | Path, expected_kind: str | None = None) -> tuple[dict, dict[str, np.ndarray]]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    return unpack(path.read_bytes(), expected_kind)
