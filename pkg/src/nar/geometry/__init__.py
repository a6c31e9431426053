from .camera import (
    CameraPose,
    Intrinsics,
    look_at,
    pose_from_yaw_pitch,
    project_points,
    projection_jacobian,
    projection_jacobians,
    world_to_screen,
)
from .knn import knn_avg_distance
from .morton import morton_keys, morton_reorder
from .pointcloud import (
    MAX_STREAMS,
    Aabb,
    PointCloud,
    Stream,
    load_pointcloud,
    save_pointcloud,
    subsample,
)
from .viewpoints import grid_viewpoints, hemisphere_viewpoints

__all__ = [
    "Aabb",
    "CameraPose",
    "Intrinsics",
    "MAX_STREAMS",
    "PointCloud",
    "Stream",
    "grid_viewpoints",
    "hemisphere_viewpoints",
    "knn_avg_distance",
    "load_pointcloud",
    "look_at",
    "morton_keys",
    "morton_reorder",
    "pose_from_yaw_pitch",
    "project_points",
    "projection_jacobian",
    "projection_jacobians",
    "save_pointcloud",
    "subsample",
    "world_to_screen",
]
