"""Training objective: perceptual + reconstruction + total-variation terms.

total = L_perc + alpha * L_reco + beta * L_tv, with alpha = 1e-3 and
beta = 1e4 by default. L_reco is plain MSE. L_tv is the anisotropic total
variation of the rendered image: the mean absolute difference over all
horizontally and vertically adjacent pixel pairs (one combined mean).

L_perc measures MSE in the feature space of a small frozen convolutional
extractor. Pretrained weights are deliberately not assumed: a fixed-seed
random extractor is a serviceable structure-sensitive distance and keeps the
package self-contained. Swap in any object with the same `features` method
to use learned weights instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import autodiff as ad
from .autodiff import Tensor

DEFAULT_ALPHA = 1e-3
DEFAULT_BETA = 1e4


@dataclass(frozen=True)
class LossConfig:
    alpha: float = DEFAULT_ALPHA
    beta: float = DEFAULT_BETA
    perceptual: bool = True
    perceptual_seed: int = 0
    perceptual_channels: tuple[int, ...] = (16, 32, 64)

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "beta": self.beta,
            "perceptual": self.perceptual,
            "perceptual_seed": self.perceptual_seed,
            "perceptual_channels": list(self.perceptual_channels),
        }

    @staticmethod
    def from_dict(d: dict) -> "LossConfig":
        d = dict(d)
        d["perceptual_channels"] = tuple(d.get("perceptual_channels", (16, 32, 64)))
        return LossConfig(**d)


class PerceptualExtractor:
    """Frozen 3-stage feature pyramid: 3x3 conv, elu, 2x2 average pool."""

    def __init__(self, config: LossConfig, in_channels: int = 3):
        rng = np.random.default_rng(config.perceptual_seed)
        self.weights: list[tuple[np.ndarray, np.ndarray]] = []
        c_prev = in_channels
        for c in config.perceptual_channels:
            std = np.sqrt(2.0 / (9 * c_prev))
            w = rng.normal(0.0, std, (3, 3, c_prev, c)).astype(np.float32)
            b = np.zeros(c, np.float32)
            self.weights.append((w, b))
            c_prev = c

    def features(self, x: Tensor) -> list[Tensor]:
        dt = x.data.dtype
        feats = []
        for w, b in self.weights:
            x = ad.avg_pool2(ad.elu(ad.conv2d(
                x, Tensor(w.astype(dt)), Tensor(b.astype(dt))
            )))
            feats.append(x)
        return feats


def mse(a: Tensor, b: Tensor) -> Tensor:
    d = a - b
    return ad.mul(d, d).mean()


def tv_loss(img: Tensor) -> Tensor:
    """Combined mean of |horizontal diffs| and |vertical diffs| of (N,H,W,C)."""
    n, h, w, c = img.data.shape
    n_pairs = n * c * ((w - 1) * h + (h - 1) * w)
    if n_pairs == 0:
        return Tensor(np.zeros((), img.data.dtype))
    dh = img[:, :, 1:, :] - img[:, :, :-1, :]
    dv = img[:, 1:, :, :] - img[:, :-1, :, :]
    total = ad.absolute(dh).sum() + ad.absolute(dv).sum()
    return total * (1.0 / n_pairs)


def loss_total(
    rendered: Tensor,
    reference: Tensor,
    config: LossConfig = LossConfig(),
    extractor: PerceptualExtractor | None = None,
) -> tuple[Tensor, dict[str, float]]:
    """Scalar objective plus the individual term values.

    Gradients w.r.t. `rendered` (and anything upstream of it) flow through
    the returned tensor's backward(). `reference` is treated as constant.
    """
    if rendered.data.shape != reference.data.shape:
        raise ValueError(
            f"shape mismatch: {rendered.data.shape} vs {reference.data.shape}"
        )
    l_reco = mse(rendered, reference)
    l_tv = tv_loss(rendered)
    if config.perceptual:
        if extractor is None:
            extractor = PerceptualExtractor(config, rendered.data.shape[-1])
        ref_const = Tensor(reference.data)
        feats_r = extractor.features(rendered)
        feats_o = extractor.features(ref_const)
        terms = [mse(fr, fo) for fr, fo in zip(feats_r, feats_o)]
        l_perc = terms[0]
        for t in terms[1:]:
            l_perc = l_perc + t
        l_perc = l_perc * (1.0 / len(terms))
    else:
        l_perc = Tensor(np.zeros((), rendered.data.dtype))

    total = l_perc + l_reco * config.alpha + l_tv * config.beta
    parts = {
        "perceptual": l_perc.item(),
        "reconstruction": l_reco.item(),
        "tv": l_tv.item(),
        "total": total.item(),
    }
    return total, parts
