"""Exact k-nearest-neighbor radii via a uniform grid hash.

Cell size is diagonal/cbrt(count) so occupancy stays O(1) for roughly uniform
clouds; correctness does not depend on that choice because the ring search
keeps expanding until the k-th candidate distance is provably final. Ties are
broken by lower point index so results are deterministic.
"""

from __future__ import annotations

import numpy as np

from ..errors import InsufficientPointsError
from .pointcloud import PointCloud


class _UniformGrid:
    def __init__(self, positions: np.ndarray, cell_size: float):
        self.pos = positions.astype(np.float64)
        self.cell = float(cell_size)
        self.origin = self.pos.min(axis=0)
        idx3 = np.floor((self.pos - self.origin) / self.cell).astype(np.int64)
        self.dims = idx3.max(axis=0) + 1
        flat = (idx3[:, 0] * self.dims[1] + idx3[:, 1]) * self.dims[2] + idx3[:, 2]
        order = np.argsort(flat, kind="stable")
        self.sorted_indices = order
        self.sorted_cells = flat[order]
        self.cell_of_point = idx3

    def cell_points(self, cx: int, cy: int, cz: int) -> np.ndarray:
        """Point indices in one cell (empty for out-of-range cells)."""
        if not (0 <= cx < self.dims[0] and 0 <= cy < self.dims[1] and 0 <= cz < self.dims[2]):
            return _EMPTY
        flat = (cx * self.dims[1] + cy) * self.dims[2] + cz
        lo = np.searchsorted(self.sorted_cells, flat, "left")
        hi = np.searchsorted(self.sorted_cells, flat, "right")
        return self.sorted_indices[lo:hi]

    def ring_points(self, center: np.ndarray, ring: int) -> np.ndarray:
        """Point indices in cells at Chebyshev distance exactly `ring`."""
        cx, cy, cz = center
        if ring == 0:
            return self.cell_points(cx, cy, cz)
        chunks = []
        r = ring
        for dx in range(-r, r + 1):
            for dy in range(-r, r + 1):
                if max(abs(dx), abs(dy)) == r:
                    for dz in range(-r, r + 1):
                        chunks.append(self.cell_points(cx + dx, cy + dy, cz + dz))
                else:
                    chunks.append(self.cell_points(cx + dx, cy + dy, cz - r))
                    chunks.append(self.cell_points(cx + dx, cy + dy, cz + r))
        return np.concatenate(chunks) if chunks else _EMPTY


_EMPTY = np.empty(0, np.int64)


def knn_avg_distance(pc: PointCloud, k: int = 4) -> np.ndarray:
    """Per-point mean distance to its min(k, count-1) nearest neighbors."""
    if pc.count < 2:
        raise InsufficientPointsError("need at least 2 points for neighbor radii")
    if k < 1:
        raise ValueError("k must be >= 1")
    k_eff = min(k, pc.count - 1)

    diag = pc.aabb.diagonal
    if diag == 0.0:
        # All points coincide: every neighbor distance is zero.
        return np.zeros(pc.count, np.float32)
    cell = diag / max(np.cbrt(pc.count), 1.0)
    grid = _UniformGrid(pc.positions, cell)
    pos = grid.pos

    out = np.empty(pc.count, np.float32)
    max_ring = int(np.ceil(diag / cell)) + 1
    for i in range(pc.count):
        p = pos[i]
        cand: np.ndarray = _EMPTY
        dists: np.ndarray = _EMPTY.astype(np.float64)
        kth = np.inf
        for ring in range(max_ring + 1):
            fresh = grid.ring_points(grid.cell_of_point[i], ring)
            fresh = fresh[fresh != i]
            if len(fresh):
                d = np.linalg.norm(pos[fresh] - p, axis=1)
                cand = np.concatenate([cand, fresh])
                dists = np.concatenate([dists, d])
                if len(cand) >= k_eff:
                    # smallest k by (distance, index)
                    sel = np.lexsort((cand, dists))[:k_eff]
                    kth = dists[sel[-1]]
            # Points outside ring r are strictly farther than r*cell, so once
            # the k-th distance fits inside the searched shell we are done.
            if kth <= ring * cell:
                break
        sel = np.lexsort((cand, dists))[:k_eff]
        out[i] = dists[sel].mean()
    return out
