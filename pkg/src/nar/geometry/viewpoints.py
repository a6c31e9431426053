"""Training-view sampling: an overhead yaw/pitch grid and a look-at hemisphere."""

from __future__ import annotations

import math

import numpy as np

from .camera import CameraPose, Intrinsics, look_at, pose_from_yaw_pitch
from .pointcloud import Aabb

GRID_PITCHES_DEG = (1.0, 30.0, 60.0)
GRID_HEIGHT_FRACTION = 0.25  # of the bounding-box diagonal, when height is not given


def grid_viewpoints(
    aabb: Aabb,
    grid_n: int,
    yaw_step_deg: float = 45.0,
    pitches_deg=GRID_PITCHES_DEG,
    height: float | None = None,
    intrinsics: Intrinsics | None = None,
) -> list[CameraPose]:
    """Cameras on an n x n lattice above the box, swept over yaw and pitch.

    Yaw runs over [0, 360) at `yaw_step_deg`; each pitch tilts the view below
    horizontal. Cameras sit at z = aabb.max.z + height.
    """
    if grid_n < 1:
        raise ValueError("grid_n must be >= 1")
    if yaw_step_deg <= 0:
        raise ValueError("yaw step must be positive")
    if height is None:
        height = GRID_HEIGHT_FRACTION * aabb.diagonal
    if height <= 0:
        raise ValueError("camera height must be positive")
    intr = intrinsics or Intrinsics()

    if grid_n == 1:
        xs = np.array([(aabb.min[0] + aabb.max[0]) / 2.0])
        ys = np.array([(aabb.min[1] + aabb.max[1]) / 2.0])
    else:
        xs = np.linspace(aabb.min[0], aabb.max[0], grid_n)
        ys = np.linspace(aabb.min[1], aabb.max[1], grid_n)
    z = aabb.max[2] + height

    yaws = np.arange(0.0, 360.0, yaw_step_deg)
    poses = []
    for x in xs:
        for y in ys:
            for yaw in yaws:
                for pitch in pitches_deg:
                    poses.append(pose_from_yaw_pitch((x, y, z), yaw, pitch, intr))
    return poses


def hemisphere_viewpoints(
    aabb: Aabb,
    radius_scale: float = 0.75,
    theta_step: float = math.pi / 8,
    phi_step: float = math.pi / 16,
    intrinsics: Intrinsics | None = None,
) -> list[CameraPose]:
    """Cameras on a hemisphere around the box center, all looking at it.

    phi is the polar angle from the top (+z); the phi=0 pole appears once
    instead of once per theta. Radius is radius_scale times the box diagonal.
    """
    if radius_scale <= 0 or theta_step <= 0 or phi_step <= 0:
        raise ValueError("radius scale and angle steps must be positive")
    diag = aabb.diagonal
    if diag == 0.0:
        raise ValueError("degenerate bounding box (zero diagonal)")
    intr = intrinsics or Intrinsics()
    center = aabb.center
    r = radius_scale * diag

    thetas = np.arange(0.0, 2 * math.pi - 1e-12, theta_step)
    n_phi = int(math.floor(math.pi / 2 / phi_step + 1e-9))
    phis = [phi_step * k for k in range(1, n_phi + 1)]  # pole handled separately

    poses = [look_at(center + np.array([0.0, 0.0, r]), center, intr)]
    for theta in thetas:
        for phi in phis:
            offset = r * np.array([
                math.sin(phi) * math.cos(theta),
                math.sin(phi) * math.sin(theta),
                math.cos(phi),
            ])
            poses.append(look_at(center + offset, center, intr))
    return poses
