# -*- coding: utf-8 -*-
# (c) Couettelab Developers 2026

import os
import struct
from typing import Tuple, Union

import numpy as np

from .cl_types import Frame
from .constants import SNAPSHOT_MAGIC, SNAPSHOT_VERSION
from .exceptions import SnapshotFormatError
from .grid import AnyGrid, PlaneSpec, SpectralField

# magic, version, Nx, Ny, Nz
HEADER = struct.Struct("<4sIIII")
# frame tag, t, t_remap
STAMP = struct.Struct("<Bdd")


def _dims(grid: AnyGrid) -> Tuple[int, ...]:
    if isinstance(grid, PlaneSpec):
        return (1, grid.ny, grid.nz)
    return grid.shape


def write_snapshot(filename: Union[str, os.PathLike], field: SpectralField, t: float) -> None:
    nx, ny, nz = _dims(field.grid)
    with open(filename, "wb") as snap_file:
        snap_file.write(HEADER.pack(SNAPSHOT_MAGIC, SNAPSHOT_VERSION, nx, ny, nz))
        snap_file.write(STAMP.pack(field.frame.value, t, field.t_remap))
        snap_file.write(np.ascontiguousarray(field.coeffs, dtype="<c16").tobytes())


def read_snapshot(
    filename: Union[str, os.PathLike], grid: AnyGrid
) -> Tuple[SpectralField, float]:
    name = os.fspath(filename)
    with open(filename, "rb") as snap_file:
        data = snap_file.read()

    if len(data) < HEADER.size + STAMP.size:
        raise SnapshotFormatError(name, "truncated header")

    magic, version, nx, ny, nz = HEADER.unpack_from(data, 0)
    if magic != SNAPSHOT_MAGIC:
        raise SnapshotFormatError(name, f"bad magic {magic!r}")
    if version != SNAPSHOT_VERSION:
        raise SnapshotFormatError(name, f"unsupported version {version}")
    if (nx, ny, nz) != _dims(grid):
        raise SnapshotFormatError(name, f"shape {(nx, ny, nz)} does not match {_dims(grid)}")

    frame_tag, t, t_remap = STAMP.unpack_from(data, HEADER.size)
    try:
        frame = Frame(frame_tag)
    except ValueError as e:
        raise SnapshotFormatError(name, f"unknown frame tag {frame_tag}") from e

    offset = HEADER.size + STAMP.size
    expected = nx * ny * nz * 16
    if len(data) - offset != expected:
        raise SnapshotFormatError(name, f"expected {expected} coefficient bytes")

    coeffs = np.frombuffer(data, dtype="<c16", offset=offset).astype(complex)
    return SpectralField(coeffs.reshape(grid.shape), grid, frame, t_remap), t
