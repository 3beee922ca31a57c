"""
Parameter checkpoint files.

Layout (all integers little-endian):

    magic      4 bytes  b"DSCK"
    version    uint32   1
    count      uint32   number of arrays
    count x header:
        name_len  uint16, name  utf-8 bytes
        ndim      uint8,  dims  uint32 x ndim
    payload    every array as float64, in header order, row-major
    checksum   32 bytes sha256 of everything above
"""

import hashlib
import logging
import os
import struct
from pathlib import Path
from typing import Union

import numpy as np

from errors import DataFormatError, StorageError

logger = logging.getLogger(__name__)

MAGIC = b"DSCK"
VERSION = 1
DIGEST_BYTES = 32


def encode_checkpoint(params: dict[str, np.ndarray]) -> bytes:
    header = [MAGIC, struct.pack("<II", VERSION, len(params))]
    payload = []
    for name, value in params.items():
        value = np.ascontiguousarray(value, dtype="<f8")
        encoded = name.encode("utf-8")
        header.append(struct.pack("<H", len(encoded)) + encoded)
        header.append(struct.pack(f"<B{value.ndim}I", value.ndim, *value.shape))
        payload.append(value.tobytes())
    body = b"".join(header + payload)
    return body + hashlib.sha256(body).digest()


def decode_checkpoint(raw: bytes) -> dict[str, np.ndarray]:
    if len(raw) < len(MAGIC) + 8 + DIGEST_BYTES:
        raise DataFormatError(f"checkpoint is only {len(raw)} bytes", offset=len(raw))
    if raw[:4] != MAGIC:
        raise DataFormatError(f"bad checkpoint magic {raw[:4]!r}", offset=0)

    body, digest = raw[:-DIGEST_BYTES], raw[-DIGEST_BYTES:]
    if hashlib.sha256(body).digest() != digest:
        raise DataFormatError("checkpoint checksum mismatch", offset=len(body))

    version, count = struct.unpack_from("<II", body, 4)
    if version != VERSION:
        raise DataFormatError(f"unsupported checkpoint version {version}", offset=4)

    offset = 12
    headers = []
    try:
        for _ in range(count):
            (name_len,) = struct.unpack_from("<H", body, offset)
            offset += 2
            name = body[offset : offset + name_len].decode("utf-8")
            offset += name_len
            (ndim,) = struct.unpack_from("<B", body, offset)
            offset += 1
            shape = struct.unpack_from(f"<{ndim}I", body, offset)
            offset += 4 * ndim
            headers.append((name, shape))
    except (struct.error, UnicodeDecodeError) as e:
        raise DataFormatError(f"truncated checkpoint header: {e}", offset=offset) from e

    params = {}
    for name, shape in headers:
        nbytes = int(np.prod(shape, dtype=np.int64)) * 8
        if offset + nbytes > len(body):
            raise DataFormatError(f"checkpoint payload for {name} is truncated", offset=offset)
        params[name] = np.frombuffer(body[offset : offset + nbytes], dtype="<f8").reshape(shape).astype(np.float64)
        offset += nbytes
    if offset != len(body):
        raise DataFormatError(f"{len(body) - offset} trailing bytes after checkpoint payload", offset=offset)
    return params


def save_checkpoint(path: Union[str, os.PathLike], params: dict[str, np.ndarray]) -> None:
    path = Path(path)
    try:
        path.write_bytes(encode_checkpoint(params))
    except OSError as e:
        raise StorageError(f"cannot write checkpoint {path}: {e}") from e
    logger.info(f"Saved {len(params)} parameter arrays to {path}")


def load_checkpoint(path: Union[str, os.PathLike]) -> dict[str, np.ndarray]:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except FileNotFoundError:
        raise StorageError(f"missing checkpoint {path}")
    except OSError as e:
        raise StorageError(f"cannot read checkpoint {path}: {e}") from e
    return decode_checkpoint(raw)
