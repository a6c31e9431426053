"""Anisotropic and isotropic covariance construction for point splats."""

from __future__ import annotations

import numpy as np

DEFAULT_STRETCH = 300.0


def rotation_from_dominant_axis(v) -> np.ndarray:
    """Right-handed orthonormal basis whose first column is v/|v|.

    The remaining columns come from cross products against +z (or +x when v
    is nearly vertical, to keep the basis well conditioned).
    """
    v = np.asarray(v, np.float64).reshape(3)
    n = np.linalg.norm(v)
    if n == 0:
        raise ValueError("dominant axis must be a nonzero vector")
    c1 = v / n
    helper = np.array([0.0, 0.0, 1.0])
    if abs(float(c1 @ helper)) > 0.999:
        helper = np.array([1.0, 0.0, 0.0])
    c2 = np.cross(helper, c1)
    c2 /= np.linalg.norm(c2)
    c3 = np.cross(c1, c2)
    return np.stack([c1, c2, c3], axis=1)


def covariance_from_vector(
    v,
    stretch: float = DEFAULT_STRETCH,
    base_scale: float = 1.0,
    square_scales: bool = False,
) -> np.ndarray:
    """Covariance elongated along v: base * R diag(stretch, 1, 1) R^T.

    The stretch enters the diagonal directly (variances); set square_scales
    to interpret it as a standard deviation instead (diag(stretch^2, 1, 1)).
    """
    if stretch <= 0:
        raise ValueError("stretch factor must be positive")
    R = rotation_from_dominant_axis(v)
    s = stretch * stretch if square_scales else stretch
    return base_scale * (R @ np.diag([s, 1.0, 1.0]) @ R.T)


def isotropic_covariance(radius: float) -> np.ndarray:
    """Sphere of standard deviation `radius`: radius^2 * I."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    return (radius * radius) * np.eye(3)
