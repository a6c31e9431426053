"""Reference renderer: depth-sorted alpha blending of projected 3D Gaussians.

Slow and pretty by design; its frames are the ground truth the neural
renderer trains against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .. import _kernels
from ..errors import ConfigurationError, InsufficientPointsError
from ..geometry import (
    CameraPose,
    PointCloud,
    knn_avg_distance,
    project_points,
    projection_jacobians,
    world_to_screen,
)
from .covariance import DEFAULT_STRETCH, covariance_from_vector, isotropic_covariance, rotation_from_dominant_axis

LOWPASS_PX2 = 0.3          # screen-space covariance floor, in px^2
MAX_CONDITION = 1e12       # 2D covariances worse than this are skipped
SIGMA_CUTOFF = 3.0
VECTOR_FIELD_OPACITY = 0.8
TERRAIN_OPACITY = 1.0

# Piecewise-linear flow colormap anchors (viridis-like), evenly spaced on [0, 1].
_FLOW_ANCHORS = np.array([
    (0.267004, 0.004874, 0.329415),
    (0.278826, 0.175490, 0.483397),
    (0.229739, 0.322361, 0.545706),
    (0.172719, 0.448791, 0.557885),
    (0.127568, 0.566949, 0.550556),
    (0.157851, 0.683765, 0.501686),
    (0.369214, 0.788888, 0.382914),
    (0.678489, 0.863742, 0.189503),
    (0.993248, 0.906157, 0.143936),
])


def flow_colormap(t: np.ndarray) -> np.ndarray:
    """Map values in [0, 1] to RGB via linear interpolation between anchors."""
    t = np.clip(np.asarray(t, np.float64), 0.0, 1.0)
    x = t * (len(_FLOW_ANCHORS) - 1)
    i0 = np.floor(x).astype(np.int64)
    i1 = np.minimum(i0 + 1, len(_FLOW_ANCHORS) - 1)
    frac = (x - i0)[:, None]
    return _FLOW_ANCHORS[i0] * (1.0 - frac) + _FLOW_ANCHORS[i1] * frac


@dataclass(eq=False)
class SplatSet:
    means: np.ndarray        # (n, 3) float32
    covariances: np.ndarray  # (n, 3, 3) float32, world units^2
    colors: np.ndarray       # (n, 3) float32 in [0, 1]
    opacities: np.ndarray    # (n,) float32 in (0, 1]

    def __post_init__(self):
        self.means = np.ascontiguousarray(self.means, np.float32).reshape(-1, 3)
        n = len(self.means)
        self.covariances = np.ascontiguousarray(self.covariances, np.float32).reshape(n, 3, 3)
        self.colors = np.ascontiguousarray(self.colors, np.float32).reshape(n, 3)
        self.opacities = np.ascontiguousarray(self.opacities, np.float32).reshape(n)

    @property
    def count(self) -> int:
        return len(self.means)

    def validate(self, sym_tol: float = 1e-6, psd_tol: float = -1e-9) -> None:
        """Symmetry and positive-semidefiniteness checks (test-time helper)."""
        cov = self.covariances.astype(np.float64)
        asym = np.abs(cov - np.transpose(cov, (0, 2, 1))).max() if self.count else 0.0
        if asym > sym_tol:
            raise ValueError(f"covariances asymmetric by {asym:.2e}")
        if self.count:
            eig = np.linalg.eigvalsh(cov)
            if eig.min() < psd_tol:
                raise ValueError(f"covariance not PSD (min eigenvalue {eig.min():.2e})")


def project_gaussian(cam: CameraPose, mean, cov3d):
    """Screen-space footprint of one Gaussian: (mu2d, cov2d, culled).

    cov2d = J cov3d J^T + lowpass, where J is the full world-to-pixel
    derivative at the mean (camera rotation is inside J).
    """
    x, y, _, culled = world_to_screen(cam, mean)
    if culled:
        return None, None, True
    J = projection_jacobians(cam, np.reshape(mean, (1, 3)))[0]
    cov2d = J @ np.asarray(cov3d, np.float64) @ J.T + LOWPASS_PX2 * np.eye(2)
    return np.array([x, y]), cov2d, False


def _prepare_splats(splats: SplatSet, cam: CameraPose):
    """Cull, depth-sort, project to 2D, and drop ill-conditioned footprints.

    Returns kernel-ready arrays plus a counter dict.
    """
    W, H = cam.intrinsics.width, cam.intrinsics.height
    xy, depth, culled = project_points(cam, splats.means)
    keep = np.nonzero(~culled)[0]
    order = keep[np.argsort(depth[keep], kind="stable")]

    counters = {"total": splats.count, "culled": int(culled.sum()), "skipped_singular": 0}
    if len(order) == 0:
        empty = np.empty((0,))
        return (np.empty((0, 2)), np.empty((0, 3)), np.empty((0, 4), np.int64),
                np.empty((0, 3)), empty, counters)

    J = projection_jacobians(cam, splats.means[order])
    cov3 = splats.covariances[order].astype(np.float64)
    cov2 = np.einsum("nij,njk,nlk->nil", J, cov3, J)
    a = cov2[:, 0, 0] + LOWPASS_PX2
    b = cov2[:, 0, 1]
    c = cov2[:, 1, 1] + LOWPASS_PX2

    half_tr = (a + c) / 2.0
    disc = np.sqrt(np.maximum((a - c) ** 2 / 4.0 + b * b, 0.0))
    lam_max = half_tr + disc
    lam_min = half_tr - disc
    det = a * c - b * b
    good = (lam_min > 0) & (det > 0) & (lam_max <= MAX_CONDITION * lam_min)
    counters["skipped_singular"] = int((~good).sum())

    mu = xy[order]
    radius = SIGMA_CUTOFF * np.sqrt(lam_max)
    x0 = np.floor(mu[:, 0] - radius)
    x1 = np.ceil(mu[:, 0] + radius)
    y0 = np.floor(mu[:, 1] - radius)
    y1 = np.ceil(mu[:, 1] + radius)
    visible = good & (x1 >= 0) & (x0 <= W - 1) & (y1 >= 0) & (y0 <= H - 1)

    sel = np.nonzero(visible)[0]
    boxes = np.stack([
        np.clip(x0[sel], 0, W - 1),
        np.clip(x1[sel], 0, W - 1),
        np.clip(y0[sel], 0, H - 1),
        np.clip(y1[sel], 0, H - 1),
    ], axis=1).astype(np.int64)
    inv_abc = np.stack([c[sel], -b[sel], a[sel]], axis=1) / det[sel, None]
    colors = splats.colors[order[sel]].astype(np.float64)
    opac = splats.opacities[order[sel]].astype(np.float64)
    return mu[sel], inv_abc, boxes, colors, opac, counters


def render_gsplat(
    splats: SplatSet,
    cam: CameraPose,
    threads: int | None = None,
    backend: str | None = None,
    return_counters: bool = False,
):
    """(H, W, 3) float32 image in [0, 1]; black background."""
    W, H = cam.intrinsics.width, cam.intrinsics.height
    mu, inv_abc, boxes, colors, opac, counters = _prepare_splats(splats, cam)
    rgb = _kernels.splat_blend_image(
        np.ascontiguousarray(mu), np.ascontiguousarray(inv_abc), boxes,
        np.ascontiguousarray(colors), np.ascontiguousarray(opac),
        W, H, threads=threads, backend=backend,
    )
    img = np.clip(rgb, 0.0, 1.0).astype(np.float32)
    return (img, counters) if return_counters else img


def build_splats(
    pc: PointCloud,
    style: str,
    stretch: float = DEFAULT_STRETCH,
    base_scale: float | None = None,
    square_scales: bool = False,
    opacity: float | None = None,
    neighbors: int = 4,
) -> SplatSet:
    """Per-point Gaussians from cloud attributes.

    vector_field: elongate along the velocity stream, color by magnitude.
    terrain: isotropic hole-filling radius from the k-nearest-neighbor
    distance, color from the RGB stream.
    """
    if style == "vector_field":
        if not pc.has_stream("velocity"):
            raise ConfigurationError("vector_field style needs a 'velocity' stream")
        vel = pc.stream("velocity").data[:, :3].astype(np.float64)
        mag = np.linalg.norm(vel, axis=1)
        if base_scale is None:
            if pc.count < 2:
                raise InsufficientPointsError("need >= 2 points to size splats")
            med = float(np.median(knn_avg_distance(pc, neighbors)))
            base_scale = (0.5 * med) ** 2
        # R diag(s,1,1) R^T == I + (s-1) vv^T for unit v, so the batch build
        # needs no explicit basis. Zero velocities degrade to isotropic.
        s_eff = stretch * stretch if square_scales else stretch
        if s_eff <= 0:
            raise ValueError("stretch factor must be positive")
        cov = np.tile(np.eye(3), (pc.count, 1, 1)) * base_scale
        nz = mag > 0
        u = vel[nz] / mag[nz, None]
        cov[nz] += (s_eff - 1.0) * base_scale * np.einsum("ni,nj->nij", u, u)
        vmax = np.percentile(mag, 99.0) if pc.count else 1.0
        colors = flow_colormap(mag / vmax if vmax > 0 else mag)
        op = VECTOR_FIELD_OPACITY if opacity is None else opacity
    elif style == "terrain":
        if not pc.has_stream("rgb"):
            raise ConfigurationError("terrain style needs an 'rgb' stream")
        radii = knn_avg_distance(pc, neighbors).astype(np.float64)
        radii = np.maximum(radii, 1e-12)
        cov = radii[:, None, None] ** 2 * np.eye(3)[None]
        s = pc.stream("rgb")
        colors = s.data[:, :3].astype(np.float64)
        if s.format == "u8":
            colors /= 255.0
        op = TERRAIN_OPACITY if opacity is None else opacity
    else:
        raise ValueError(f"unknown splat style {style!r}")

    return SplatSet(
        means=pc.positions,
        covariances=cov.astype(np.float32),
        colors=colors.astype(np.float32),
        opacities=np.full(pc.count, op, np.float32),
    )
