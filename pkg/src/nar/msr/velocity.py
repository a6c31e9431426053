"""Velocity encodings attached to rasterized points.

The 3D form keeps raw components plus magnitude; the 2D form pushes the
vector through the projection Jacobian so the network sees screen-space
direction, inclination angle, and magnitude.
"""

from __future__ import annotations

import numpy as np

from ..geometry import CameraPose, projection_jacobians, world_to_screen

ZERO_VEL_EPS = 1e-9


def encode_vel3d(v: np.ndarray, velocity_scale: float = 1.0) -> np.ndarray:
    """(n, 3) velocities -> (n, 4) of scaled (vx, vy, vz, |v|)."""
    v = np.asarray(v, np.float64).reshape(-1, 3)
    out = np.empty((len(v), 4), np.float64)
    out[:, :3] = v
    out[:, 3] = np.linalg.norm(v, axis=1)
    return out / velocity_scale


def encode_vel2d_batch(
    cam: CameraPose,
    points: np.ndarray,
    velocities: np.ndarray,
    velocity_scale: float = 1.0,
) -> np.ndarray:
    """(n, 4) of (v'x, v'y, theta, |v'|) for screen-projected velocities.

    theta uses the conventional math orientation (counterclockwise positive)
    even though image +y points down, hence the sign flip; it is zeroed when
    the projected vector vanishes. Components and magnitude are divided by
    velocity_scale, the angle is not.
    """
    J = projection_jacobians(cam, points)
    vp = np.einsum("nij,nj->ni", J, np.asarray(velocities, np.float64).reshape(-1, 3))
    mag = np.hypot(vp[:, 0], vp[:, 1])
    theta = np.where(mag < ZERO_VEL_EPS, 0.0, np.arctan2(-vp[:, 1], vp[:, 0]))
    out = np.empty((len(vp), 4), np.float64)
    out[:, 0] = vp[:, 0] / velocity_scale
    out[:, 1] = vp[:, 1] / velocity_scale
    out[:, 2] = theta
    out[:, 3] = mag / velocity_scale
    return out


def encode_vel2d(cam: CameraPose, point, velocity, velocity_scale: float = 1.0) -> np.ndarray:
    """Single-point form; raises for a culled point."""
    _, _, _, culled = world_to_screen(cam, point)
    if culled:
        raise ValueError("cannot project velocity at a culled point")
    return encode_vel2d_batch(
        cam, np.reshape(point, (1, 3)), np.reshape(velocity, (1, 3)), velocity_scale
    )[0]
