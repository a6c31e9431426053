"""Pinhole cameras: pose representation, projection, and its Jacobian.

Conventions (fixed for the whole toolkit):
  - camera space is x-right, y-down, z-forward; `orientation` is the
    world-to-camera rotation whose rows are those axes in world coordinates;
  - image origin is the top-left corner, +y down, square pixels;
  - the optical axis projects to (width/2, height/2);
  - view depth is the positive distance along the camera forward axis, and a
    point is culled when depth <= near or depth >= far.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

DEFAULT_FOV_DEG = 60.0
DEFAULT_NEAR = 0.1
DEFAULT_FAR = 2.0e5

ORTHONORMAL_TOL = 1e-6


@dataclass(frozen=True)
class Intrinsics:
    fov_y_deg: float = DEFAULT_FOV_DEG
    near: float = DEFAULT_NEAR
    far: float = DEFAULT_FAR
    width: int = 512
    height: int = 512

    def __post_init__(self):
        if not (0 < self.near < self.far):
            raise ValueError(f"need 0 < near < far, got {self.near}, {self.far}")
        if not (0 < self.fov_y_deg < 180):
            raise ValueError(f"bad vertical FOV {self.fov_y_deg}")

    @property
    def focal_px(self) -> float:
        return (self.height / 2.0) / math.tan(math.radians(self.fov_y_deg) / 2.0)

    @property
    def cx(self) -> float:
        return self.width / 2.0

    @property
    def cy(self) -> float:
        return self.height / 2.0


@dataclass(frozen=True, eq=False)
class CameraPose:
    position: np.ndarray
    orientation: np.ndarray  # 3x3 world-to-camera, rows = (right, down, forward)
    intrinsics: Intrinsics = field(default_factory=Intrinsics)

    def __post_init__(self):
        object.__setattr__(self, "position", np.asarray(self.position, np.float64).reshape(3))
        R = np.asarray(self.orientation, np.float64).reshape(3, 3)
        object.__setattr__(self, "orientation", R)
        err = np.abs(R.T @ R - np.eye(3)).max()
        if err > ORTHONORMAL_TOL:
            raise ValueError(f"orientation not orthonormal (|R^T R - I| = {err:.2e})")

    @property
    def forward(self) -> np.ndarray:
        return self.orientation[2]

    def with_intrinsics(self, intr: Intrinsics) -> "CameraPose":
        return replace(self, intrinsics=intr)


def _normalized(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("cannot normalize zero vector")
    return v / n


def look_at(position, target, intrinsics: Intrinsics | None = None) -> CameraPose:
    """Pose at `position` whose forward axis passes through `target`.

    World +z is treated as up; when the view direction is near-vertical the
    +y axis substitutes to keep the basis well conditioned.
    """
    position = np.asarray(position, np.float64)
    fwd = _normalized(np.asarray(target, np.float64) - position)
    up = np.array([0.0, 0.0, 1.0])
    if abs(float(fwd @ up)) > 0.999:
        up = np.array([0.0, 1.0, 0.0])
    right = _normalized(np.cross(fwd, up))
    down = np.cross(fwd, right)
    R = np.stack([right, down, fwd])
    return CameraPose(position, R, intrinsics or Intrinsics())


def pose_from_yaw_pitch(position, yaw_deg: float, pitch_deg: float,
                        intrinsics: Intrinsics | None = None) -> CameraPose:
    """Pose looking along yaw (about +z, from +x toward +y) and pitched
    `pitch_deg` below the horizontal plane."""
    yaw = math.radians(yaw_deg)
    pitch = math.radians(pitch_deg)
    fwd = np.array([
        math.cos(pitch) * math.cos(yaw),
        math.cos(pitch) * math.sin(yaw),
        -math.sin(pitch),
    ])
    position = np.asarray(position, np.float64)
    return look_at(position, position + fwd, intrinsics)


def project_points(cam: CameraPose, points: np.ndarray):
    """Vectorized perspective projection.

    Returns (xy, depth, culled): xy is (n, 2) pixel coordinates, depth is the
    (n,) camera-forward distance, culled marks points outside (near, far).
    The per-axis arithmetic is written out elementwise so the compiled kernel
    can reproduce it bit-for-bit.
    """
    intr = cam.intrinsics
    p = np.asarray(points, np.float64).reshape(-1, 3)
    R = cam.orientation
    w0 = p[:, 0] - cam.position[0]
    w1 = p[:, 1] - cam.position[1]
    w2 = p[:, 2] - cam.position[2]
    ux = w0 * R[0, 0] + w1 * R[0, 1] + w2 * R[0, 2]
    uy = w0 * R[1, 0] + w1 * R[1, 1] + w2 * R[1, 2]
    uz = w0 * R[2, 0] + w1 * R[2, 1] + w2 * R[2, 2]
    culled = (uz <= intr.near) | (uz >= intr.far)
    safe_z = np.where(uz == 0.0, 1.0, uz)
    f = intr.focal_px
    xy = np.empty((len(p), 2), np.float64)
    xy[:, 0] = intr.cx + f * (ux / safe_z)
    xy[:, 1] = intr.cy + f * (uy / safe_z)
    return xy, uz, culled


def world_to_screen(cam: CameraPose, point) -> tuple[float, float, float, bool]:
    """Single-point projection: (x_px, y_px, view_depth, culled)."""
    xy, depth, culled = project_points(cam, np.asarray(point, np.float64).reshape(1, 3))
    return float(xy[0, 0]), float(xy[0, 1]), float(depth[0]), bool(culled[0])


def projection_jacobian(cam: CameraPose, point) -> np.ndarray:
    """Analytic 2x3 derivative of pixel coordinates w.r.t. world position."""
    _, _, d, culled = world_to_screen(cam, point)
    if culled:
        raise ValueError("projection Jacobian undefined for a culled point")
    return projection_jacobians(cam, np.asarray(point, np.float64).reshape(1, 3))[0]


def projection_jacobians(cam: CameraPose, points: np.ndarray) -> np.ndarray:
    """Vectorized Jacobians, shape (n, 2, 3). Caller guarantees depth > 0."""
    p = np.asarray(points, np.float64).reshape(-1, 3)
    R = cam.orientation
    w = p - cam.position
    u = w @ R.T
    f = cam.intrinsics.focal_px
    uz = u[:, 2]
    # d(f*ux/uz)/dp = f * (uz*R0 - ux*R2) / uz^2, same for the y row
    J = np.empty((len(p), 2, 3), np.float64)
    J[:, 0, :] = (uz[:, None] * R[0] - u[:, 0:1] * R[2]) * (f / uz**2)[:, None]
    J[:, 1, :] = (uz[:, None] * R[1] - u[:, 1:2] * R[2]) * (f / uz**2)[:, None]
    return J
