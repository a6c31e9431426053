from . import autodiff
from .autodiff import Tensor
from .checkpoint import (
    load_checkpoint,
    quantize_checkpoint,
    save_checkpoint,
    weight_payload_bytes,
)
from .losses import LossConfig, PerceptualExtractor, loss_total, mse, tv_loss
from .model import (
    ModelState,
    PYRAMID_LEVELS,
    UNetConfig,
    build_pyramid,
    conv1x1_head,
    forward,
    gated_conv,
    init_params,
    pad_to_multiple,
    unet_forward,
)
from .optim import adam_step, adam_update

__all__ = [
    "LossConfig",
    "ModelState",
    "PYRAMID_LEVELS",
    "PerceptualExtractor",
    "Tensor",
    "UNetConfig",
    "adam_step",
    "adam_update",
    "autodiff",
    "build_pyramid",
    "conv1x1_head",
    "forward",
    "gated_conv",
    "init_params",
    "load_checkpoint",
    "loss_total",
    "mse",
    "pad_to_multiple",
    "quantize_checkpoint",
    "save_checkpoint",
    "tv_loss",
    "unet_forward",
    "weight_payload_bytes",
]
