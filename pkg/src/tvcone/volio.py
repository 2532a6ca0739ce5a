"""
Vol3 file format for volumes, spectra and masks, plus atomic text writers.

Layout (all little-endian):
    magic "VOL3" | version u16 | kind u16 | nx, ny, nz u32 | dx, dy, dz f64 | payload

Payload is x-fastest: real volumes as binary32, spectra as interleaved
(re, im) binary32, masks as one byte (0/1) per voxel.
"""

from enum import IntEnum
from pathlib import Path
from typing import Any, Dict, Tuple, Union
import json
import logging
import os
import struct
import tempfile

import numpy as np

from .errors import (
    BadMagicError,
    DimensionOverflowError,
    KindMismatchError,
    MissingInputError,
    ParameterError,
    TruncatedPayloadError,
    UnsupportedVersionError,
    VolumeFormatError,
)
from .types import GridSpec
from .volgrid import Spectrum3, SupportMask, Volume3

logger = logging.getLogger(__name__)

MAGIC = b"VOL3"
VERSION = 1
HEADER = struct.Struct("<4sHHIIIddd")
DEFAULT_ALLOCATION_CAP = 2 * 1024**3

PathLike = Union[str, Path]


class PayloadKind(IntEnum):
    REAL = 1
    COMPLEX = 2
    MASK = 3


_ITEM_BYTES = {PayloadKind.REAL: 4, PayloadKind.COMPLEX: 8, PayloadKind.MASK: 1}


def _atomic_write(path: PathLike, payload: bytes) -> None:
    """Write to a sibling temp file, then rename over the target."""
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=target.parent, prefix=f".{target.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, target)
    except BaseException:
        Path(tmp).unlink(missing_ok=True)
        raise


def _encode(grid: GridSpec, kind: PayloadKind, payload: bytes) -> bytes:
    header = HEADER.pack(MAGIC, VERSION, int(kind), *grid.shape, *grid.pitch)
    return header + payload


def _x_fastest(data: np.ndarray, dtype: str) -> bytes:
    return np.asarray(data).astype(dtype).ravel(order="F").tobytes()


def write_vol(vol: Volume3, path: PathLike) -> None:
    _atomic_write(path, _encode(vol.grid, PayloadKind.REAL, _x_fastest(vol.data, "<f4")))
    logger.debug(f"Wrote volume {vol.grid.shape} to {path}")


def write_spec(spec: Spectrum3, path: PathLike) -> None:
    flat = spec.data.ravel(order="F")
    pairs = np.empty((flat.size, 2), dtype="<f4")
    pairs[:, 0] = flat.real
    pairs[:, 1] = flat.imag
    payload = pairs.tobytes()
    _atomic_write(path, _encode(spec.grid, PayloadKind.COMPLEX, payload))
    logger.debug(f"Wrote spectrum {spec.grid.shape} to {path}")


def write_mask(mask: SupportMask, path: PathLike) -> None:
    _atomic_write(path, _encode(mask.grid, PayloadKind.MASK, _x_fastest(mask.data, "u1")))
    logger.debug(f"Wrote mask {mask.grid.shape} ({mask.count} voxels) to {path}")


def _read_header(fh, path: str) -> Tuple[PayloadKind, GridSpec]:
    raw = fh.read(HEADER.size)
    if len(raw) < len(MAGIC):
        raise TruncatedPayloadError(f"file is {len(raw)} bytes, shorter than the magic", path)
    if raw[:4] != MAGIC:
        raise BadMagicError(f"bad magic {raw[:4]!r}", path)
    if len(raw) < HEADER.size:
        raise TruncatedPayloadError("file ends inside the header", path)
    _, version, kind, nx, ny, nz, dx, dy, dz = HEADER.unpack(raw)
    if version != VERSION:
        raise UnsupportedVersionError(f"format version {version} is not supported", path)
    try:
        payload_kind = PayloadKind(kind)
    except ValueError:
        raise VolumeFormatError(f"unknown payload kind {kind}", path) from None
    try:
        grid = GridSpec(nx=nx, ny=ny, nz=nz, dx=dx, dy=dy, dz=dz)
    except ParameterError as e:
        raise VolumeFormatError(f"invalid header: {e}", path) from e
    return payload_kind, grid


def _open(path: PathLike):
    try:
        return open(path, "rb")
    except FileNotFoundError:
        raise MissingInputError("no such file", str(path)) from None


def read_kind(path: PathLike) -> PayloadKind:
    """Payload kind declared in the header of a Vol3 file."""
    with _open(path) as fh:
        kind, _ = _read_header(fh, str(path))
    return kind


def _read(
    path: PathLike, expected: PayloadKind, cap: int
) -> Tuple[GridSpec, np.ndarray]:
    with _open(path) as fh:
        kind, grid = _read_header(fh, str(path))
        if kind != expected:
            raise KindMismatchError(
                f"file holds a {kind.name.lower()} payload, expected {expected.name.lower()}",
                str(path),
            )
        need = grid.voxel_count * _ITEM_BYTES[kind]
        if need > cap:
            raise DimensionOverflowError(
                f"payload of {need} bytes for {grid.shape} exceeds the {cap}-byte cap", str(path)
            )
        have = os.fstat(fh.fileno()).st_size - HEADER.size
        if have != need:
            raise TruncatedPayloadError(
                f"payload is {have} bytes, header {grid.shape} requires {need}", str(path)
            )
        payload = fh.read(need)

    if kind == PayloadKind.COMPLEX:
        pairs = np.frombuffer(payload, dtype="<f4").reshape(-1, 2)
        flat = pairs[:, 0].astype(np.float64) + 1j * pairs[:, 1].astype(np.float64)
    elif kind == PayloadKind.REAL:
        flat = np.frombuffer(payload, dtype="<f4").astype(np.float64)
    else:
        flat = np.frombuffer(payload, dtype="u1")
        if flat.max(initial=0) > 1:
            raise VolumeFormatError("mask bytes must be 0 or 1", str(path))
        flat = flat.astype(bool)
    return grid, flat.reshape(grid.shape, order="F")


def read_vol(path: PathLike, cap: int = DEFAULT_ALLOCATION_CAP) -> Volume3:
    grid, data = _read(path, PayloadKind.REAL, cap)
    return Volume3(grid, data)


def read_spec(path: PathLike, cap: int = DEFAULT_ALLOCATION_CAP) -> Spectrum3:
    grid, data = _read(path, PayloadKind.COMPLEX, cap)
    return Spectrum3(grid, data)


def read_mask(path: PathLike, cap: int = DEFAULT_ALLOCATION_CAP) -> SupportMask:
    grid, data = _read(path, PayloadKind.MASK, cap)
    return SupportMask(grid, data)


def export_raw(vol: Volume3, path: PathLike) -> None:
    """Headerless little-endian binary32, x-fastest, for external viewers."""
    _atomic_write(path, _x_fastest(vol.data, "<f4"))


def write_csv(text: str, path: PathLike) -> None:
    _atomic_write(path, text.encode("utf-8"))


def write_json_report(report: Dict[str, Any], path: PathLike) -> None:
    _atomic_write(path, (json.dumps(report, indent=2, sort_keys=True) + "\n").encode("utf-8"))
