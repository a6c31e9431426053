# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loops: point z-buffer scatter and tiled Gaussian blending.

Each function is the operation-for-operation twin of python_impl; both
backends must produce identical buffers (the float math is kept in the same
order, and the build disables FP contraction).
"""

from libc.math cimport exp, floor

import numpy as np

cimport numpy as cnp

cnp.import_array()

cdef extern from *:
    """
    #include <stdint.h>
    static inline uint32_t f32_bits(float x) {
        union { float f; uint32_t u; } v;
        v.f = x;
        return v.u;
    }
    """
    unsigned int f32_bits(float x) nogil


DEF MIN_TRANSMITTANCE = 0.00392156862745098  # 1/255


def zbuffer_accumulate(
    unsigned long long[::1] keybuf,
    const float[:, ::1] positions,
    unsigned long long base_index,
    const double[:, ::1] R,
    const double[::1] campos,
    double f,
    double cx,
    double cy,
    double near,
    double far,
    int width,
    int height,
):
    cdef Py_ssize_t i, n = positions.shape[0]
    cdef double w0, w1, w2, ux, uy, uz, px, py
    cdef long long xi, yi
    cdef unsigned long long key
    cdef Py_ssize_t pix
    cdef double r00 = R[0, 0], r01 = R[0, 1], r02 = R[0, 2]
    cdef double r10 = R[1, 0], r11 = R[1, 1], r12 = R[1, 2]
    cdef double r20 = R[2, 0], r21 = R[2, 1], r22 = R[2, 2]
    cdef double c0 = campos[0], c1 = campos[1], c2 = campos[2]

    with nogil:
        for i in range(n):
            w0 = (<double> positions[i, 0]) - c0
            w1 = (<double> positions[i, 1]) - c1
            w2 = (<double> positions[i, 2]) - c2
            uz = w0 * r20 + w1 * r21 + w2 * r22
            if uz <= near or uz >= far:
                continue
            ux = w0 * r00 + w1 * r01 + w2 * r02
            uy = w0 * r10 + w1 * r11 + w2 * r12
            px = floor(cx + f * (ux / uz) + 0.5)
            py = floor(cy + f * (uy / uz) + 0.5)
            if px < 0 or px >= width or py < 0 or py >= height:
                continue
            xi = <long long> px
            yi = <long long> py
            pix = yi * width + xi
            key = ((<unsigned long long> f32_bits(<float> uz)) << 32) | (
                (base_index + <unsigned long long> i) & 0xFFFFFFFFULL
            )
            if key < keybuf[pix]:
                keybuf[pix] = key


def splat_blend_tiles(
    double[:, ::1] rgb,          # (H*W, 3) flattened accumulator
    double[::1] trans,           # (H*W,) transmittance
    const double[:, ::1] mu,
    const double[:, ::1] inv_abc,
    const int[:, ::1] boxes,     # per-splat (x0, x1, y0, y1), image-clipped
    const double[:, ::1] color,
    const double[::1] opacity,
    const long long[::1] tile_offsets,   # CSR over tiles, len n_tiles+1
    const long long[::1] tile_splats,    # splat ids, depth-ordered per tile
    int width,
    int height,
    int tile_size,
    int tiles_x,
    int tile_begin,
    int tile_end,
):
    """Blend the splats binned to tiles [tile_begin, tile_end)."""
    cdef int t, tx, ty, x0t, y0t, x1t, y1t, x, y
    cdef Py_ssize_t s, j, pix
    cdef long long lo, hi
    cdef int px0, px1, py0, py1
    cdef int done, tile_px
    cdef double mx, my, a, b, c, dx, dy, q, alpha, tr, contrib

    with nogil:
        for t in range(tile_begin, tile_end):
            tx = t % tiles_x
            ty = t // tiles_x
            x0t = tx * tile_size
            y0t = ty * tile_size
            x1t = x0t + tile_size
            y1t = y0t + tile_size
            if x1t > width:
                x1t = width
            if y1t > height:
                y1t = height
            tile_px = (x1t - x0t) * (y1t - y0t)
            done = 0
            lo = tile_offsets[t]
            hi = tile_offsets[t + 1]
            for j in range(lo, hi):
                if done == tile_px:
                    break
                s = <Py_ssize_t> tile_splats[j]
                mx = mu[s, 0]
                my = mu[s, 1]
                px0 = boxes[s, 0]
                px1 = boxes[s, 1]
                py0 = boxes[s, 2]
                py1 = boxes[s, 3]
                if px0 < x0t:
                    px0 = x0t
                if py0 < y0t:
                    py0 = y0t
                if px1 >= x1t:
                    px1 = x1t - 1
                if py1 >= y1t:
                    py1 = y1t - 1
                a = inv_abc[s, 0]
                b = inv_abc[s, 1]
                c = inv_abc[s, 2]
                for y in range(py0, py1 + 1):
                    dy = (<double> y) - my
                    for x in range(px0, px1 + 1):
                        pix = y * width + x
                        tr = trans[pix]
                        if tr < MIN_TRANSMITTANCE:
                            continue
                        dx = (<double> x) - mx
                        q = a * (dx * dx) + (2.0 * b * dy) * dx + c * (dy * dy)
                        alpha = opacity[s] * exp(-0.5 * q)
                        contrib = alpha * tr
                        rgb[pix, 0] += contrib * color[s, 0]
                        rgb[pix, 1] += contrib * color[s, 1]
                        rgb[pix, 2] += contrib * color[s, 2]
                        tr = tr * (1.0 - alpha)
                        trans[pix] = tr
                        if tr < MIN_TRANSMITTANCE:
                            done += 1
