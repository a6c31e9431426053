"""Neural-accelerated point cloud rendering toolkit.

Pipeline: a multi-stream rasterizer turns large scientific point clouds into
feature images, a gated-convolution U-Net post-processes them, and a CPU
Gaussian-splat reference renderer supplies the training ground truth.
"""

from ._kernels import BACKEND as kernel_backend

__version__ = "0.1.0"
__all__ = ["kernel_backend", "__version__"]
