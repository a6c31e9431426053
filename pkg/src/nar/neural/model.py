"""The rendering network: 1x1 descriptor head, feature pyramid, gated U-Net.

The head is a per-pixel affine remap of the raster channels (a stand-in for
per-point learned descriptors, but sized by channel count instead of point
count). Its output is downscaled into a 5-level half-scale pyramid whose
levels feed the matching U-Net encoder stages; the decoder mirrors the
encoder with nearest-neighbor upsampling and skip concatenation, and a final
1x1 projection squashes to RGB through a logistic.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigurationError
from . import autodiff as ad
from .autodiff import Tensor

PYRAMID_LEVELS = 5


@dataclass(frozen=True)
class UNetConfig:
    input_channels: int
    channel_names: tuple[str, ...] = ()
    levels: int = PYRAMID_LEVELS
    base_channels: int = 16
    channel_multiplier: int = 2
    max_channels: int = 128
    output_channels: int = 3
    use_descriptor_head: bool = True
    init_seed: int = 0

    def width(self, level: int) -> int:
        return min(self.base_channels * self.channel_multiplier**level, self.max_channels)

    def to_dict(self) -> dict:
        return {
            "input_channels": self.input_channels,
            "channel_names": list(self.channel_names),
            "levels": self.levels,
            "base_channels": self.base_channels,
            "channel_multiplier": self.channel_multiplier,
            "max_channels": self.max_channels,
            "output_channels": self.output_channels,
            "use_descriptor_head": self.use_descriptor_head,
            "init_seed": self.init_seed,
        }

    @staticmethod
    def from_dict(d: dict) -> "UNetConfig":
        d = dict(d)
        d["channel_names"] = tuple(d.get("channel_names", ()))
        return UNetConfig(**d)

    def hash(self) -> str:
        payload = json.dumps(self.to_dict(), sort_keys=True).encode()
        return hashlib.sha256(payload).hexdigest()


def _kaiming_uniform(rng: np.random.Generator, shape, fan_in: int) -> np.ndarray:
    bound = np.sqrt(6.0 / fan_in)
    return rng.uniform(-bound, bound, shape).astype(np.float32)


def init_params(config: UNetConfig) -> dict[str, np.ndarray]:
    """Seeded parameter dict. Gate biases start at +1 (open gates); the
    descriptor head starts as the identity map."""
    rng = np.random.default_rng(config.init_seed)
    params: dict[str, np.ndarray] = {}
    cin = config.input_channels
    if config.use_descriptor_head:
        params["head.w"] = np.eye(cin, dtype=np.float32)
        params["head.b"] = np.zeros(cin, np.float32)

    def gated(name: str, c_in: int, c_out: int) -> None:
        fan = 9 * c_in
        params[f"{name}.f_w"] = _kaiming_uniform(rng, (3, 3, c_in, c_out), fan)
        params[f"{name}.f_b"] = np.zeros(c_out, np.float32)
        params[f"{name}.g_w"] = _kaiming_uniform(rng, (3, 3, c_in, c_out), fan)
        params[f"{name}.g_b"] = np.ones(c_out, np.float32)

    for k in range(config.levels):
        w = config.width(k)
        c_in = cin if k == 0 else config.width(k - 1) + cin
        gated(f"enc{k}a", c_in, w)
        gated(f"enc{k}b", w, w)
    for k in range(config.levels - 2, -1, -1):
        w = config.width(k)
        gated(f"dec{k}a", config.width(k + 1) + w, w)
        gated(f"dec{k}b", w, w)
    params["out.w"] = _kaiming_uniform(
        rng, (config.width(0), config.output_channels), config.width(0)
    )
    params["out.b"] = np.zeros(config.output_channels, np.float32)
    return params


@dataclass
class ModelState:
    """Learnable parameters plus optimizer moments and the step counter."""

    config: UNetConfig
    params: dict[str, np.ndarray]
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)
    step: int = 0

    @staticmethod
    def initialize(config: UNetConfig) -> "ModelState":
        params = init_params(config)
        zeros = {k: np.zeros_like(p) for k, p in params.items()}
        return ModelState(config, params, zeros, {k: z.copy() for k, z in zeros.items()})

    def as_tensors(self, dtype=np.float32) -> dict[str, Tensor]:
        return {
            k: Tensor(p.astype(dtype, copy=True), requires_grad=True)
            for k, p in self.params.items()
        }

    def copy(self) -> "ModelState":
        return ModelState(
            self.config,
            {k: p.copy() for k, p in self.params.items()},
            {k: p.copy() for k, p in self.m.items()},
            {k: p.copy() for k, p in self.v.items()},
            self.step,
        )


def conv1x1_head(x: Tensor, w: Tensor, b: Tensor) -> Tensor:
    """Per-pixel affine remap y = W x + b over the channel axis of (N,H,W,C)."""
    n, h, wd, c = x.data.shape
    if w.data.shape != (c, c):
        raise ConfigurationError(
            f"head expects {w.data.shape[0]} channels, features have {c}"
        )
    flat = x.reshape(n * h * wd, c)
    return ad.add(ad.matmul(flat, w), b).reshape(n, h, wd, c)


def build_pyramid(t: Tensor, levels: int = PYRAMID_LEVELS) -> list[Tensor]:
    """[t, pool(t), pool(pool(t)), ...] with `levels` entries."""
    _, h, w, _ = t.data.shape
    div = 2 ** (levels - 1)
    if h % div or w % div:
        raise ValueError(f"spatial dims {h}x{w} not divisible by {div}")
    out = [t]
    for _ in range(levels - 1):
        out.append(ad.avg_pool2(out[-1]))
    return out


def gated_conv(x: Tensor, f_w: Tensor, f_b: Tensor, g_w: Tensor, g_b: Tensor) -> Tensor:
    """elu(conv(x)) modulated by a learned sigmoid gate branch."""
    return ad.mul(
        ad.elu(ad.conv2d(x, f_w, f_b)),
        ad.sigmoid(ad.conv2d(x, g_w, g_b)),
    )


def _gated(params: dict[str, Tensor], name: str, x: Tensor) -> Tensor:
    return gated_conv(
        x,
        params[f"{name}.f_w"], params[f"{name}.f_b"],
        params[f"{name}.g_w"], params[f"{name}.g_b"],
    )


def unet_forward(pyramid: list[Tensor], params: dict[str, Tensor], config: UNetConfig) -> Tensor:
    """Pyramid levels in, (N, H, W, 3) logistic-squashed image out."""
    if len(pyramid) != config.levels:
        raise ConfigurationError(
            f"pyramid has {len(pyramid)} levels, config wants {config.levels}"
        )
    skips = []
    x = None
    for k in range(config.levels):
        inp = pyramid[k] if k == 0 else ad.concat([ad.avg_pool2(x), pyramid[k]])
        x = _gated(params, f"enc{k}b", _gated(params, f"enc{k}a", inp))
        skips.append(x)
    for k in range(config.levels - 2, -1, -1):
        up = ad.concat([ad.upsample_nearest2(x), skips[k]])
        x = _gated(params, f"dec{k}b", _gated(params, f"dec{k}a", up))
    n, h, w, c = x.data.shape
    logits = ad.add(ad.matmul(x.reshape(n * h * w, c), params["out.w"]), params["out.b"])
    return ad.sigmoid(logits).reshape(n, h, w, config.output_channels)


def forward(features: Tensor, params: dict[str, Tensor], config: UNetConfig) -> Tensor:
    """Full inference path: descriptor head (unless ablated), pyramid, U-Net."""
    if features.data.shape[-1] != config.input_channels:
        raise ConfigurationError(
            f"model expects {config.input_channels} channels, "
            f"features have {features.data.shape[-1]}"
        )
    x = features
    if config.use_descriptor_head:
        x = conv1x1_head(x, params["head.w"], params["head.b"])
    return unet_forward(build_pyramid(x, config.levels), params, config)


def pad_to_multiple(img: np.ndarray, multiple: int = 16) -> tuple[np.ndarray, tuple[int, int]]:
    """Zero-pad (H, W, C) on the bottom/right to a size multiple; returns the
    padded image and the original (H, W) for cropping the output back."""
    h, w = img.shape[:2]
    ph = (-h) % multiple
    pw = (-w) % multiple
    if ph or pw:
        img = np.pad(img, ((0, ph), (0, pw), (0, 0)))
    return img, (h, w)
