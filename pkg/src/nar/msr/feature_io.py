"""Feature dump container: named f32 planes for dataset storage."""

from __future__ import annotations

import struct

import numpy as np

from ..errors import CorruptError


def save_features(names: tuple[str, ...], data: np.ndarray, path) -> None:
    """data is (H, W, C) float32; planes are written channel-major, row-major."""
    h, w, c = data.shape
    assert c == len(names)
    with open(path, "wb") as f:
        f.write(struct.pack("<IIH", w, h, c))
        for name in names:
            nb = name.encode("utf-8")
            f.write(struct.pack("<B", len(nb)))
            f.write(nb)
        planes = np.ascontiguousarray(np.moveaxis(data, 2, 0), "<f4")
        f.write(planes.tobytes())


def load_features(path) -> tuple[tuple[str, ...], np.ndarray]:
    with open(path, "rb") as f:
        raw = f.read()
    if len(raw) < 10:
        raise CorruptError("feature dump too short for header")
    w, h, c = struct.unpack_from("<IIH", raw, 0)
    off = 10
    names = []
    for _ in range(c):
        (n,) = struct.unpack_from("<B", raw, off)
        off += 1
        names.append(raw[off : off + n].decode("utf-8"))
        off += n
    expected = off + w * h * c * 4
    if len(raw) != expected:
        raise CorruptError(f"feature dump payload is {len(raw) - off} bytes, wanted {expected - off}")
    planes = np.frombuffer(raw, "<f4", offset=off).reshape(c, h, w)
    return tuple(names), np.ascontiguousarray(np.moveaxis(planes, 0, 2))
