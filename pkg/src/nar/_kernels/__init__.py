"""Kernel backend selection.

The compiled extension is preferred when importable; the numpy fallback is
semantically identical and is selected automatically when the extension is
missing, or explicitly via NAR_KERNELS=python. Thread counts for the
parallel wrappers come from NAR_THREADS (capped at the CPU count).
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import python_impl

EMPTY_KEY = python_impl.EMPTY_KEY
MIN_TRANSMITTANCE = python_impl.MIN_TRANSMITTANCE

_native = None
if os.environ.get("NAR_KERNELS", "").lower() not in ("py", "python"):
    try:
        import importlib

        _native = importlib.import_module(__name__ + "._native")
    except ImportError:
        _native = None

BACKEND = "native" if _native is not None else "python"


def available_backends() -> list[str]:
    return ["native", "python"] if _native is not None else ["python"]


def default_threads() -> int:
    env = os.environ.get("NAR_THREADS")
    cpus = os.cpu_count() or 1
    if env:
        return max(1, min(int(env), cpus))
    return cpus


def _resolve(backend: str | None):
    name = backend or BACKEND
    if name == "native":
        if _native is None:
            raise RuntimeError("native kernels are not built")
        return _native, "native"
    if name == "python":
        return python_impl, "python"
    raise ValueError(f"unknown kernel backend {name!r}")


def zbuffer_render(
    positions: np.ndarray,
    R: np.ndarray,
    campos: np.ndarray,
    f: float,
    cx: float,
    cy: float,
    near: float,
    far: float,
    width: int,
    height: int,
    threads: int | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """Full render pass: returns the (H*W,) packed min-(depth, index) buffer.

    Points are split into contiguous chunks, one per worker, each folding
    into a private buffer; buffers merge by unsigned minimum, so the result
    is independent of the chunking and of the thread count.
    """
    impl, _ = _resolve(backend)
    n = len(positions)
    nt = threads or default_threads()
    nt = max(1, min(nt, max(n, 1)))

    def run_chunk(lo: int, hi: int) -> np.ndarray:
        buf = np.full(width * height, EMPTY_KEY, np.uint64)
        if hi > lo:
            impl.zbuffer_accumulate(
                buf, positions[lo:hi], lo, R, campos, f, cx, cy, near, far, width, height
            )
        return buf

    if nt == 1 or n == 0:
        return run_chunk(0, n)
    bounds = np.linspace(0, n, nt + 1).astype(np.int64)
    with ThreadPoolExecutor(max_workers=nt) as pool:
        bufs = list(pool.map(lambda se: run_chunk(se[0], se[1]), zip(bounds[:-1], bounds[1:])))
    return np.minimum.reduce(bufs)


def splat_blend_image(
    mu: np.ndarray,
    inv_abc: np.ndarray,
    boxes: np.ndarray,
    color: np.ndarray,
    opacity: np.ndarray,
    width: int,
    height: int,
    tile_size: int = 16,
    threads: int | None = None,
    backend: str | None = None,
) -> np.ndarray:
    """Alpha-blend depth-sorted splats into an (H, W, 3) float64 image.

    The native backend bins splats into tiles and parallelizes across tiles
    (per-tile blending stays in global sort order); the python backend walks
    splats sequentially. Both visit every (pixel, splat) pair in the same
    order, so outputs agree.
    """
    impl, name = _resolve(backend)
    if name == "python":
        rgb = np.zeros((height, width, 3), np.float64)
        trans = np.ones((height, width), np.float64)
        impl.splat_blend(rgb, trans, mu, inv_abc, boxes, color, opacity)
        return rgb

    tiles_x = (width + tile_size - 1) // tile_size
    tiles_y = (height + tile_size - 1) // tile_size
    n_tiles = tiles_x * tiles_y

    # CSR binning: splat s covers tile columns [x0//ts, x1//ts] etc. The pair
    # list is generated in ascending splat id (= depth order) and the stable
    # sort by tile preserves that order within each tile.
    tx0 = boxes[:, 0] // tile_size
    tx1 = boxes[:, 1] // tile_size
    ty0 = boxes[:, 2] // tile_size
    ty1 = boxes[:, 3] // tile_size
    spans_x = (tx1 - tx0 + 1).astype(np.int64)
    spans_y = (ty1 - ty0 + 1).astype(np.int64)
    counts = spans_x * spans_y
    splat_ids = np.repeat(np.arange(len(mu), dtype=np.int64), counts)
    # Per-pair tile coordinates via cumulative offsets within each splat span.
    offsets = np.arange(len(splat_ids)) - np.repeat(np.cumsum(counts) - counts, counts)
    pair_tx = tx0[splat_ids] + offsets % spans_x[splat_ids]
    pair_ty = ty0[splat_ids] + offsets // spans_x[splat_ids]
    pair_tile = pair_ty * tiles_x + pair_tx
    order = np.argsort(pair_tile, kind="stable")
    tile_splats = splat_ids[order]
    tile_sorted = pair_tile[order]
    tile_offsets = np.searchsorted(tile_sorted, np.arange(n_tiles + 1)).astype(np.int64)

    rgb = np.zeros((height * width, 3), np.float64)
    trans = np.ones(height * width, np.float64)
    nt = max(1, min(threads or default_threads(), n_tiles))
    boxes_i32 = np.ascontiguousarray(boxes, np.int32)

    def run_span(t0: int, t1: int) -> None:
        impl.splat_blend_tiles(
            rgb, trans, mu, inv_abc, boxes_i32, color, opacity,
            tile_offsets, tile_splats, width, height, tile_size, tiles_x,
            int(t0), int(t1),
        )

    if nt == 1:
        run_span(0, n_tiles)
    else:
        bounds = np.linspace(0, n_tiles, nt + 1).astype(np.int64)
        with ThreadPoolExecutor(max_workers=nt) as pool:
            list(pool.map(lambda se: run_span(se[0], se[1]), zip(bounds[:-1], bounds[1:])))
    return rgb.reshape(height, width, 3)
