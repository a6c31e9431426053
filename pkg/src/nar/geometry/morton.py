"""Morton (z-order) reordering for cache-friendly point traversal."""

from __future__ import annotations

import numpy as np

from .pointcloud import PointCloud

BITS_PER_AXIS = 21  # 3 * 21 = 63 bits, fits an int64/uint64 key


def _spread_bits(v: np.ndarray) -> np.ndarray:
    """Insert two zero bits between each of the low 21 bits (magic-number spread)."""
    x = v.astype(np.uint64) & np.uint64(0x1FFFFF)
    x = (x | (x << np.uint64(32))) & np.uint64(0x1F00000000FFFF)
    x = (x | (x << np.uint64(16))) & np.uint64(0x1F0000FF0000FF)
    x = (x | (x << np.uint64(8))) & np.uint64(0x100F00F00F00F00F)
    x = (x | (x << np.uint64(4))) & np.uint64(0x10C30C30C30C30C3)
    x = (x | (x << np.uint64(2))) & np.uint64(0x1249249249249249)
    return x


def quantize(positions: np.ndarray, lo: np.ndarray, hi: np.ndarray) -> np.ndarray:
    """Map positions into the integer lattice [0, 2^21) per axis over [lo, hi]."""
    extent = np.where(hi > lo, hi - lo, 1.0)
    scaled = (positions.astype(np.float64) - lo) / extent * float(1 << BITS_PER_AXIS)
    q = np.floor(scaled).astype(np.int64)
    return np.clip(q, 0, (1 << BITS_PER_AXIS) - 1).astype(np.uint64)


def morton_keys(pc: PointCloud) -> np.ndarray:
    """63-bit interleaved keys, x in the lowest bit of each triplet."""
    q = quantize(pc.positions, pc.aabb.min, pc.aabb.max)
    return (
        _spread_bits(q[:, 0])
        | (_spread_bits(q[:, 1]) << np.uint64(1))
        | (_spread_bits(q[:, 2]) << np.uint64(2))
    )


def morton_reorder(pc: PointCloud) -> PointCloud:
    """Stable sort of the cloud (and all streams) by ascending Morton key."""
    if pc.count == 0:
        return pc
    order = np.argsort(morton_keys(pc), kind="stable")
    return pc.take(order)
