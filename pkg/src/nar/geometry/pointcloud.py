"""Point cloud container and the NARPC binary container format.

A cloud is positions plus up to eight named attribute streams (colors,
velocities, scalars...). Streams are stored as (count, arity) arrays in
either uint8 or float32 and always move in lockstep with positions through
subsampling and reordering.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field

import numpy as np

from ..errors import CapacityError, CorruptError, FormatError

MAX_STREAMS = 8

NARPC_MAGIC = b"NARPC\0"
NARPC_VERSION = 1

_FORMAT_CODES = {"u8": 0, "f32": 1}
_FORMAT_DTYPES = {"u8": np.uint8, "f32": np.float32}


@dataclass(frozen=True)
class Aabb:
    """Axis-aligned bounding box; empty boxes use the +inf/-inf sentinel."""

    min: np.ndarray
    max: np.ndarray

    @staticmethod
    def empty() -> "Aabb":
        return Aabb(np.full(3, np.inf, np.float64), np.full(3, -np.inf, np.float64))

    @staticmethod
    def of_points(positions: np.ndarray) -> "Aabb":
        if len(positions) == 0:
            return Aabb.empty()
        return Aabb(
            positions.min(axis=0).astype(np.float64),
            positions.max(axis=0).astype(np.float64),
        )

    @property
    def is_empty(self) -> bool:
        return bool(np.any(self.min > self.max))

    @property
    def center(self) -> np.ndarray:
        return (self.min + self.max) / 2.0

    @property
    def diagonal(self) -> float:
        if self.is_empty:
            return 0.0
        return float(np.linalg.norm(self.max - self.min))

    def contains(self, p: np.ndarray, tol: float = 0.0) -> bool:
        return bool(np.all(p >= self.min - tol) and np.all(p <= self.max + tol))


@dataclass
class Stream:
    """One named attribute stream; data has shape (count, arity)."""

    name: str
    format: str  # "u8" | "f32"
    data: np.ndarray

    @property
    def arity(self) -> int:
        return self.data.shape[1]

    def __post_init__(self):
        if self.format not in _FORMAT_DTYPES:
            raise FormatError(f"unknown stream format {self.format!r}")
        self.data = np.ascontiguousarray(self.data, dtype=_FORMAT_DTYPES[self.format])
        if self.data.ndim != 2:
            raise ValueError("stream data must be (count, arity)")


class PointCloud:
    """Immutable-by-convention point set with attribute streams.

    Safe to share across threads: no method mutates positions or streams
    after construction.
    """

    def __init__(self, positions: np.ndarray, streams: list[Stream] | None = None):
        self.positions = np.ascontiguousarray(positions, dtype=np.float32).reshape(-1, 3)
        self.streams: list[Stream] = list(streams or [])
        if len(self.streams) > MAX_STREAMS:
            raise CapacityError(
                f"{len(self.streams)} streams exceed the limit of {MAX_STREAMS}"
            )
        for s in self.streams:
            if len(s.data) != self.count:
                raise ValueError(
                    f"stream {s.name!r} has {len(s.data)} rows for {self.count} points"
                )
        self.aabb = Aabb.of_points(self.positions)

    @property
    def count(self) -> int:
        return len(self.positions)

    def stream_names(self) -> list[str]:
        return [s.name for s in self.streams]

    def stream(self, name: str) -> Stream:
        for s in self.streams:
            if s.name == name:
                return s
        raise KeyError(f"no stream named {name!r}")

    def has_stream(self, name: str) -> bool:
        return any(s.name == name for s in self.streams)

    def take(self, indices: np.ndarray) -> "PointCloud":
        """New cloud keeping `indices`, all streams in lockstep."""
        return PointCloud(
            self.positions[indices],
            [Stream(s.name, s.format, s.data[indices]) for s in self.streams],
        )

    def __repr__(self):
        names = ", ".join(f"{s.name}:{s.format}x{s.arity}" for s in self.streams)
        return f"PointCloud(count={self.count}, streams=[{names}])"


def subsample(pc: PointCloud, factor: int) -> PointCloud:
    """Keep every `factor`-th point starting at index 0."""
    if factor < 1:
        raise ValueError(f"subsample factor must be >= 1, got {factor}")
    if factor == 1:
        return pc
    return pc.take(np.arange(0, pc.count, factor))


def save_pointcloud(pc: PointCloud, path) -> None:
    with open(path, "wb") as f:
        f.write(NARPC_MAGIC)
        f.write(struct.pack("<HQB", NARPC_VERSION, pc.count, len(pc.streams)))
        for s in pc.streams:
            name = s.name.encode("utf-8")
            if len(name) > 255:
                raise ValueError(f"stream name too long: {s.name!r}")
            f.write(struct.pack("<B", len(name)))
            f.write(name)
            f.write(struct.pack("<BB", _FORMAT_CODES[s.format], s.arity))
        f.write(np.ascontiguousarray(pc.positions, "<f4").tobytes())
        for s in pc.streams:
            dt = "<f4" if s.format == "f32" else "u1"
            f.write(np.ascontiguousarray(s.data, dt).tobytes())


def load_pointcloud(path) -> PointCloud:
    with open(path, "rb") as f:
        raw = f.read()
    off = 0

    def need(n: int) -> bytes:
        nonlocal off
        if off + n > len(raw):
            raise CorruptError(f"truncated file: wanted {n} bytes at offset {off}")
        chunk = raw[off : off + n]
        off += n
        return chunk

    if need(6) != NARPC_MAGIC:
        raise FormatError("bad magic, not a NARPC file")
    version, count, n_streams = struct.unpack("<HQB", need(11))
    if version != NARPC_VERSION:
        raise FormatError(f"unsupported NARPC version {version}")
    if n_streams > MAX_STREAMS:
        raise CapacityError(f"file declares {n_streams} streams (limit {MAX_STREAMS})")

    headers = []
    for _ in range(n_streams):
        (name_len,) = struct.unpack("<B", need(1))
        name = need(name_len).decode("utf-8")
        fmt_code, arity = struct.unpack("<BB", need(2))
        fmt = {v: k for k, v in _FORMAT_CODES.items()}.get(fmt_code)
        if fmt is None:
            raise FormatError(f"unknown stream format code {fmt_code}")
        headers.append((name, fmt, arity))

    positions = np.frombuffer(need(count * 12), "<f4").reshape(count, 3).copy()
    streams = []
    for name, fmt, arity in headers:
        itemsize = 4 if fmt == "f32" else 1
        data = np.frombuffer(need(count * arity * itemsize), "<f4" if fmt == "f32" else "u1")
        streams.append(Stream(name, fmt, data.reshape(count, arity).copy()))
    if off != len(raw):
        raise CorruptError(f"{len(raw) - off} trailing bytes after payload")
    return PointCloud(positions, streams)
