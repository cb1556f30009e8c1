"""Versioned binary snapshots for fields and particle ensembles.

Layout (all header integers and floats little-endian, payload float64
little-endian, C order):

    magic     8 bytes  b"LLGVMF01" (format name + version)
    flags     1 byte   bit 0: payload endianness (0 = little)
    kind      1 byte   1 scalar field, 2 vector field, 3 magnetization, 4 ensemble
    name     16 bytes  UTF-8, NUL padded
    time      f8
    dims      3 x u4   grid node counts (ensemble: particle count, 0, 0)
    box       3 x f8   box lengths
    count     u8       payload float64 count
    crc       u4       CRC-32 of the payload bytes

Magnetization payloads carry (h, alpha) as two leading doubles so the state
round-trips bitwise.  Ensemble payloads are a record stream of
(x, y, z, vx, vy, vz, w) per particle.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass

import numpy as np

from .errors import ContractViolation, SnapshotError
from .grid import PeriodicGrid, ScalarField, VectorField3
from .kinetic import ParticleEnsemble
from .magnetization import MagnetizationField

MAGIC = b"LLGVMF01"
_HEADER = struct.Struct("<8sBB16sd3I3dQI")

KIND_SCALAR = 1
KIND_VECTOR = 2
KIND_MAGNETIZATION = 3
KIND_ENSEMBLE = 4


@dataclass(frozen=True)
class Snapshot:
    name: str
    time: float
    payload: ScalarField | VectorField3 | MagnetizationField | ParticleEnsemble


def _payload_bytes(obj) -> tuple[int, tuple, tuple, bytes]:
    if isinstance(obj, MagnetizationField):
        head = np.array([obj.h_zeeman, obj.alpha])
        data = np.concatenate([head, obj.m.ravel(order="C")])
        return KIND_MAGNETIZATION, obj.grid.n_cells, obj.grid.box_length, data.astype("<f8").tobytes()
    if isinstance(obj, VectorField3):
        return (
            KIND_VECTOR,
            obj.grid.n_cells,
            obj.grid.box_length,
            obj.values.ravel(order="C").astype("<f8").tobytes(),
        )
    if isinstance(obj, ScalarField):
        return (
            KIND_SCALAR,
            obj.grid.n_cells,
            obj.grid.box_length,
            obj.values.ravel(order="C").astype("<f8").tobytes(),
        )
    if isinstance(obj, ParticleEnsemble):
        rec = np.concatenate(
            [obj.positions, obj.velocities, obj.weights[:, None]], axis=1
        )
        return KIND_ENSEMBLE, (obj.count, 0, 0), (0.0, 0.0, 0.0), rec.astype("<f8").tobytes()
    raise ContractViolation(f"cannot snapshot object of type {type(obj).__name__}")


def write_snapshot(obj, path, name: str = "", time: float = 0.0) -> None:
    kind, dims, box, payload = _payload_bytes(obj)
    name_bytes = name.encode("utf-8")[:16].ljust(16, b"\0")
    header = _HEADER.pack(
        MAGIC,
        0,
        kind,
        name_bytes,
        float(time),
        *[int(d) for d in dims],
        *[float(b) for b in box],
        len(payload) // 8,
        zlib.crc32(payload) & 0xFFFFFFFF,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(payload)


def read_snapshot(path) -> Snapshot:
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as err:
        raise SnapshotError(f"cannot read snapshot {path}: {err}") from err
    if len(raw) < _HEADER.size:
        raise SnapshotError(f"truncated snapshot {path}: no complete header")
    magic, flags, kind, name_b, time, d0, d1, d2, b0, b1, b2, count, crc = _HEADER.unpack(
        raw[: _HEADER.size]
    )
    if magic[:6] != MAGIC[:6]:
        raise SnapshotError(f"bad magic in {path}: {magic!r}")
    if magic != MAGIC:
        raise SnapshotError(
            f"version mismatch in {path}: file has {magic[6:].decode(errors='replace')},"
            f" reader expects {MAGIC[6:].decode()}"
        )
    if flags & 0x1:
        raise SnapshotError(f"unsupported payload endianness flag in {path}")
    payload = raw[_HEADER.size :]
    if len(payload) != 8 * count:
        raise SnapshotError(
            f"truncated snapshot {path}: expected {8 * count} payload bytes, found {len(payload)}"
        )
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise SnapshotError(f"checksum mismatch in {path}: payload is corrupted")
    data = np.frombuffer(payload, dtype="<f8").astype(np.float64)
    name = name_b.rstrip(b"\0").decode("utf-8", errors="replace")
    if kind == KIND_ENSEMBLE:
        rec = data.reshape(d0, 7) if d0 else data.reshape(0, 7)
        obj = ParticleEnsemble(rec[:, 0:3], rec[:, 3:6], rec[:, 6])
        return Snapshot(name, time, obj)
    grid = PeriodicGrid((d0, d1, d2), (b0, b1, b2))
    if kind == KIND_SCALAR:
        return Snapshot(name, time, ScalarField(grid, data.reshape(grid.shape)))
    if kind == KIND_VECTOR:
        return Snapshot(name, time, VectorField3(grid, data.reshape(3, *grid.shape)))
    if kind == KIND_MAGNETIZATION:
        h_zeeman, alpha = data[0], data[1]
        m = data[2:].reshape(3, *grid.shape)
        return Snapshot(name, time, MagnetizationField(grid, m, h_zeeman, alpha))
    raise SnapshotError(f"unknown payload kind {kind} in {path}")
