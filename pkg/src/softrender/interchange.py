"""One-way shared-memory transform table between a physics writer and a
render reader.

Region layout (all little-endian, sizes in bytes):

  offset 0   u32  magic 0x41564931
  offset 4   u32  layout version (1)
  offset 8   u32  node count
  offset 12  u32  reserved (zero)
  offset 16  u64  generation: even = stable, odd = write in progress
  offset 24  40B  reserved lock slot (zeroed; see below)
  offset 64  node records, 128 bytes each:
               64B zero-padded UTF-8 node name
               64B 4x4 float32 matrix, column-major

Total size is 64 + 128 * node_count.  The roster of names is fixed at
creation; only matrices and the generation change afterwards.

Cross-process exclusion uses fcntl.flock on the backing file instead of
a mutex inside the reserved slot (portable from pure Python; the slot
stays zeroed for layout compatibility).  Readers additionally validate
the generation seqlock-style: a snapshot only counts when the counter is
even and unchanged across the copy, retrying up to a budget before
raising ContentionError.  Data flows strictly writer to reader; a reader
never writes the region.
"""

from __future__ import annotations

import fcntl
import mmap
import os
import struct
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ContentionError, IncompatibleRegionError, RegionError, ValidationError
from .linalg import rotate_z, translate

MAGIC = 0x41564931
VERSION = 1
HEADER_SIZE = 64
RECORD_SIZE = 128
NAME_BYTES = 64
GENERATION_OFFSET = 16
LOCK_SLOT_OFFSET = 24
LOCK_SLOT_SIZE = 40
DEFAULT_READ_RETRIES = 1000

_HEADER = struct.Struct("<IIII Q")  # magic, version, node_count, reserved, generation


def region_size(node_count: int) -> int:
    return HEADER_SIZE + RECORD_SIZE * node_count


def region_path(name: str) -> Path:
    if not name or any(c not in "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ0123456789._-"
                       for c in name):
        raise RegionError(f"invalid region name '{name}'")
    base = Path("/dev/shm") if Path("/dev/shm").is_dir() else Path(tempfile.gettempdir())
    return base / f"softrender-{name}"


def unlink_region(name: str, missing_ok: bool = True) -> None:
    region_path(name).unlink(missing_ok=missing_ok)


def _encode_name(name: str) -> bytes:
    raw = name.encode("utf-8")
    if not raw or len(raw) > NAME_BYTES - 1:
        raise ValidationError(f"node name '{name}' must be 1..{NAME_BYTES - 1} UTF-8 bytes")
    return raw.ljust(NAME_BYTES, b"\x00")


def _encode_matrix(mat) -> bytes:
    m = np.asarray(mat, dtype=np.float64).reshape(4, 4)
    return m.flatten(order="F").astype("<f4").tobytes()


def _decode_records(buf: bytes, node_count: int):
    entries = []
    for i in range(node_count):
        rec = buf[i * RECORD_SIZE:(i + 1) * RECORD_SIZE]
        name = rec[:NAME_BYTES].rstrip(b"\x00").decode("utf-8")
        mat = np.frombuffer(rec[NAME_BYTES:], dtype="<f4", count=16)
        entries.append((name, mat.astype(np.float64).reshape((4, 4), order="F")))
    return entries


@dataclass
class TransformSnapshot:
    generation: int
    entries: list  # [(name, (4, 4) float64)]

    def mapping(self) -> dict:
        return dict(self.entries)


class TransformTableWriter:
    """Owns the region: creates it, publishes frames, unlinks on close."""

    def __init__(self, name: str, node_names):
        names = list(node_names)
        if len(set(names)) != len(names):
            raise ValidationError("duplicate node name in table roster")
        encoded = [_encode_name(n) for n in names]
        self.name = name
        self.node_names = names
        self.path = region_path(name)
        size = region_size(len(names))
        try:
            fd = os.open(self.path, os.O_RDWR | os.O_CREAT | os.O_EXCL, 0o600)
        except FileExistsError:
            raise RegionError(f"region '{name}' already exists at {self.path}") from None
        except OSError as e:
            raise RegionError(f"cannot create region '{name}': {e}") from None
        self._fd = fd
        os.ftruncate(fd, size)
        self._mm = mmap.mmap(fd, size)
        # born at generation 1 (write in progress): an attacher racing
        # creation sees magic 0 (attach fails, retry) or an odd
        # generation (read_frame spins) until the records are real
        self._mm[:HEADER_SIZE] = _HEADER.pack(MAGIC, VERSION, len(names), 0, 1) \
            + b"\x00" * (HEADER_SIZE - _HEADER.size)
        identity = _encode_matrix(np.eye(4))
        for i, raw in enumerate(encoded):
            base = HEADER_SIZE + i * RECORD_SIZE
            self._mm[base:base + NAME_BYTES] = raw
            self._mm[base + NAME_BYTES:base + RECORD_SIZE] = identity
        self._set_generation(0)

    @property
    def generation(self) -> int:
        return struct.unpack_from("<Q", self._mm, GENERATION_OFFSET)[0]

    def _set_generation(self, value: int) -> None:
        struct.pack_into("<Q", self._mm, GENERATION_OFFSET, value)

    def write_frame(self, transforms) -> int:
        """Publish one frame; returns the new (even) generation.

        transforms is a mapping or pair list covering the full roster.
        """
        table = dict(transforms)
        missing = [n for n in self.node_names if n not in table]
        if missing:
            raise ValidationError(f"write_frame missing transforms for {missing}")
        payload = [_encode_matrix(table[n]) for n in self.node_names]
        fcntl.flock(self._fd, fcntl.LOCK_EX)
        try:
            gen = self.generation
            self._set_generation(gen + 1)  # odd: write in progress
            for i, raw in enumerate(payload):
                base = HEADER_SIZE + i * RECORD_SIZE + NAME_BYTES
                self._mm[base:base + 64] = raw
            self._set_generation(gen + 2)
            return gen + 2
        finally:
            fcntl.flock(self._fd, fcntl.LOCK_UN)

    def close(self, unlink: bool = True) -> None:
        if self._mm is not None:
            self._mm.close()
            self._mm = None
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None
        if unlink:
            self.path.unlink(missing_ok=True)


def create_table(name: str, node_names) -> TransformTableWriter:
    return TransformTableWriter(name, node_names)


class TransformTableReader:
    """Attaches to an existing region; mapped read-write per the layout
    contract but never writes (flock carries the lock role instead)."""

    def __init__(self, name: str):
        self.name = name
        self.path = region_path(name)
        try:
            fd = os.open(self.path, os.O_RDWR)
        except FileNotFoundError:
            raise RegionError(f"region '{name}' does not exist") from None
        except OSError as e:
            raise RegionError(f"cannot attach region '{name}': {e}") from None
        self._fd = fd
        header = os.pread(fd, HEADER_SIZE, 0)
        if len(header) < HEADER_SIZE:
            os.close(fd)
            raise RegionError(f"region '{name}' is truncated")
        magic, version, node_count, _res, _gen = _HEADER.unpack_from(header)
        if magic != MAGIC:
            os.close(fd)
            raise IncompatibleRegionError(
                f"region '{name}' has magic 0x{magic:08X}, expected 0x{MAGIC:08X}")
        if version != VERSION:
            os.close(fd)
            raise IncompatibleRegionError(
                f"region '{name}' has layout version {version}, expected {VERSION}")
        size = region_size(node_count)
        if os.fstat(fd).st_size < size:
            os.close(fd)
            raise RegionError(f"region '{name}' smaller than its declared layout")
        self.node_count = node_count
        self._mm = mmap.mmap(fd, size)

    def read_frame(self, max_retries: int = DEFAULT_READ_RETRIES) -> TransformSnapshot:
        """Copy out one stable snapshot.

        The generation must be even and identical before and after the
        copy; an in-progress write (odd, or changed) costs one retry.
        """
        for _ in range(max_retries):
            fcntl.flock(self._fd, fcntl.LOCK_SH)
            try:
                g1 = struct.unpack_from("<Q", self._mm, GENERATION_OFFSET)[0]
                if g1 % 2 == 1:
                    continue
                raw = bytes(self._mm[HEADER_SIZE:HEADER_SIZE + RECORD_SIZE * self.node_count])
                g2 = struct.unpack_from("<Q", self._mm, GENERATION_OFFSET)[0]
            finally:
                fcntl.flock(self._fd, fcntl.LOCK_UN)
            if g1 == g2:
                return TransformSnapshot(generation=g1, entries=_decode_records(raw, self.node_count))
        raise ContentionError(f"no stable snapshot after {max_retries} attempts")

    def close(self) -> None:
        if self._mm is not None:
            self._mm.close()
            self._mm = None
        if self._fd is not None:
            os.close(self._fd)
            self._fd = None


def attach_table(name: str) -> TransformTableReader:
    return TransformTableReader(name)


# ---------------------------------------------------------------------------
# Deterministic physics stand-in.

def physics_stub_step(tick: int, node_names) -> list:
    """Node k orbits: translate k along +X after rotating 0.1*tick + k
    around Z.  Pure function of (tick, roster order)."""
    out = []
    for k, name in enumerate(node_names):
        out.append((name, translate(float(k), 0.0, 0.0) @ rotate_z(0.1 * tick + k)))
    return out


def stub_writer_loop(region_name: str, node_names, tick_hz: float, stop_event,
                     max_ticks: int | None = None,
                     crash_after_ticks: int | None = None) -> None:
    """Writer process body: publish stub poses at tick_hz until stopped.

    A clean stop unlinks the region (the writer owns its lifetime).
    crash_after_ticks instead simulates a physics crash by exiting hard
    with no cleanup, leaving the file behind at its last stable frame.
    """
    writer = create_table(region_name, node_names)
    period = 1.0 / tick_hz if tick_hz > 0 else 0.0
    tick = 0
    try:
        while not stop_event.is_set():
            writer.write_frame(physics_stub_step(tick, node_names))
            tick += 1
            if crash_after_ticks is not None and tick >= crash_after_ticks:
                os._exit(3)
            if max_ticks is not None and tick >= max_ticks:
                break
            if period > 0.0:
                stop_event.wait(period)
    finally:
        writer.close(unlink=True)
