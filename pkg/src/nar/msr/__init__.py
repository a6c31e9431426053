from .feature_io import load_features, save_features
from .rasterizer import MAX_CHANNELS, FeatureImage, StreamSelection, rasterize
from .velocity import encode_vel2d, encode_vel2d_batch, encode_vel3d

__all__ = [
    "FeatureImage",
    "MAX_CHANNELS",
    "StreamSelection",
    "encode_vel2d",
    "encode_vel2d_batch",
    "encode_vel3d",
    "load_features",
    "rasterize",
    "save_features",
]
