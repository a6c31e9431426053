"""Pure-numpy implementations of the hot kernels.

These mirror the compiled versions operation-for-operation (same float64
intermediate math, same rounding, same per-pixel blend order) so either
backend produces identical rasters. They exist as the no-compiler fallback
and as a cross-check in the benchmark.
"""

from __future__ import annotations

import numpy as np

EMPTY_KEY = np.uint64(0xFFFFFFFFFFFFFFFF)
MIN_TRANSMITTANCE = 1.0 / 255.0


def zbuffer_accumulate(
    keybuf: np.ndarray,
    positions: np.ndarray,
    base_index: int,
    R: np.ndarray,
    campos: np.ndarray,
    f: float,
    cx: float,
    cy: float,
    near: float,
    far: float,
    width: int,
    height: int,
) -> None:
    """Project points and fold packed (depth, index) keys into `keybuf`.

    The key packs the float32 depth bits above the point index, so an
    unsigned min resolves nearest-depth with index tie-break in one op.
    """
    w0 = positions[:, 0].astype(np.float64) - campos[0]
    w1 = positions[:, 1].astype(np.float64) - campos[1]
    w2 = positions[:, 2].astype(np.float64) - campos[2]
    ux = w0 * R[0, 0] + w1 * R[0, 1] + w2 * R[0, 2]
    uy = w0 * R[1, 0] + w1 * R[1, 1] + w2 * R[1, 2]
    uz = w0 * R[2, 0] + w1 * R[2, 1] + w2 * R[2, 2]

    ok = (uz > near) & (uz < far)
    safe_z = np.where(ok, uz, 1.0)
    px = np.floor(cx + f * (ux / safe_z) + 0.5)
    py = np.floor(cy + f * (uy / safe_z) + 0.5)
    ok &= (px >= 0) & (px < width) & (py >= 0) & (py < height)

    pix = (py[ok] * width + px[ok]).astype(np.int64)
    depth_bits = uz[ok].astype(np.float32).view(np.uint32).astype(np.uint64)
    idx = (np.nonzero(ok)[0].astype(np.uint64) + np.uint64(base_index)) & np.uint64(0xFFFFFFFF)
    keys = (depth_bits << np.uint64(32)) | idx
    np.minimum.at(keybuf, pix, keys)


def splat_blend(
    rgb: np.ndarray,
    trans: np.ndarray,
    mu: np.ndarray,
    inv_abc: np.ndarray,
    boxes: np.ndarray,
    color: np.ndarray,
    opacity: np.ndarray,
) -> None:
    """Front-to-back alpha blending of pre-sorted 2D Gaussians.

    rgb (H, W, 3) and trans (H, W) are float64 accumulators updated in place.
    boxes holds per-splat (x0, x1, y0, y1) pixel bounds, already clipped to
    the image; pixels whose transmittance fell below 1/255 stop accumulating.
    """
    for i in range(len(mu)):
        x0, x1, y0, y1 = boxes[i]
        dx = np.arange(x0, x1 + 1, dtype=np.float64) - mu[i, 0]
        dy = np.arange(y0, y1 + 1, dtype=np.float64) - mu[i, 1]
        a, b, c = inv_abc[i]
        q = (
            a * dx[None, :] ** 2
            + 2.0 * b * dy[:, None] * dx[None, :]
            + c * dy[:, None] ** 2
        )
        alpha = opacity[i] * np.exp(-0.5 * q)
        t_box = trans[y0 : y1 + 1, x0 : x1 + 1]
        active = t_box >= MIN_TRANSMITTANCE
        contrib = np.where(active, alpha * t_box, 0.0)
        rgb[y0 : y1 + 1, x0 : x1 + 1] += contrib[:, :, None] * color[i]
        t_box *= np.where(active, 1.0 - alpha, 1.0)
