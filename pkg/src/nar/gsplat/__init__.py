from .covariance import (
    DEFAULT_STRETCH,
    covariance_from_vector,
    isotropic_covariance,
    rotation_from_dominant_axis,
)
from .renderer import (
    LOWPASS_PX2,
    SplatSet,
    build_splats,
    flow_colormap,
    project_gaussian,
    render_gsplat,
)

__all__ = [
    "DEFAULT_STRETCH",
    "LOWPASS_PX2",
    "SplatSet",
    "build_splats",
    "covariance_from_vector",
    "flow_colormap",
    "isotropic_covariance",
    "project_gaussian",
    "render_gsplat",
    "rotation_from_dominant_axis",
]
