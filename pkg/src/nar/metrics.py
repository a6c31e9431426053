"""Image quality metrics: PSNR and single-scale SSIM.

SSIM uses the classic settings: 11x11 Gaussian window with sigma 1.5,
K1 = 0.01, K2 = 0.03, dynamic range 1, evaluated on luma over valid
(unpadded) window positions only.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np

PSNR_CAP_DB = 100.0

SSIM_WINDOW = 11
SSIM_SIGMA = 1.5
SSIM_K1 = 0.01
SSIM_K2 = 0.03

_LUMA = np.array([0.299, 0.587, 0.114])


def psnr(a: np.ndarray, b: np.ndarray) -> float:
    """10*log10(1/MSE) for images in [0, 1]; identical images cap at 100 dB."""
    a = np.asarray(a, np.float64)
    b = np.asarray(b, np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    m = float(np.mean((a - b) ** 2))
    if m == 0.0:
        return PSNR_CAP_DB
    return min(10.0 * math.log10(1.0 / m), PSNR_CAP_DB)


def _gaussian_window(size: int, sigma: float) -> np.ndarray:
    r = np.arange(size, dtype=np.float64) - (size - 1) / 2.0
    g = np.exp(-(r**2) / (2.0 * sigma**2))
    w = np.outer(g, g)
    return w / w.sum()


def _to_luma(img: np.ndarray) -> np.ndarray:
    img = np.asarray(img, np.float64)
    if img.ndim == 3:
        return img @ _LUMA
    return img


def _windowed_mean(img: np.ndarray, window: np.ndarray) -> np.ndarray:
    k = window.shape[0]
    view = np.lib.stride_tricks.sliding_window_view(img, (k, k))
    return np.einsum("hwij,ij->hw", view, window)


def ssim(a: np.ndarray, b: np.ndarray) -> float:
    a_l = _to_luma(a)
    b_l = _to_luma(b)
    if a_l.shape != b_l.shape:
        raise ValueError(f"shape mismatch: {a_l.shape} vs {b_l.shape}")
    if min(a_l.shape) < SSIM_WINDOW:
        raise ValueError(f"image smaller than the {SSIM_WINDOW}px SSIM window")

    w = _gaussian_window(SSIM_WINDOW, SSIM_SIGMA)
    mu_a = _windowed_mean(a_l, w)
    mu_b = _windowed_mean(b_l, w)
    s_aa = _windowed_mean(a_l * a_l, w) - mu_a**2
    s_bb = _windowed_mean(b_l * b_l, w) - mu_b**2
    s_ab = _windowed_mean(a_l * b_l, w) - mu_a * mu_b

    c1 = SSIM_K1**2
    c2 = SSIM_K2**2
    num = (2 * mu_a * mu_b + c1) * (2 * s_ab + c2)
    den = (mu_a**2 + mu_b**2 + c1) * (s_aa + s_bb + c2)
    return float(np.mean(num / den))


@dataclass
class MetricReport:
    """Per-view quality numbers plus aggregate means."""

    view_ids: list[str] = field(default_factory=list)
    psnr_db: list[float] = field(default_factory=list)
    ssim: list[float] = field(default_factory=list)

    def add(self, view_id: str, psnr_value: float, ssim_value: float) -> None:
        self.view_ids.append(view_id)
        self.psnr_db.append(psnr_value)
        self.ssim.append(ssim_value)

    @property
    def count(self) -> int:
        return len(self.view_ids)

    @property
    def mean_psnr(self) -> float:
        return float(np.mean(self.psnr_db)) if self.psnr_db else float("nan")

    @property
    def mean_ssim(self) -> float:
        return float(np.mean(self.ssim)) if self.ssim else float("nan")

    def to_json(self, path) -> None:
        payload = {
            "count": self.count,
            "mean_psnr_db": self.mean_psnr,
            "mean_ssim": self.mean_ssim,
            "per_view": [
                {"view_id": v, "psnr_db": p, "ssim": s}
                for v, p, s in zip(self.view_ids, self.psnr_db, self.ssim)
            ],
        }
        with open(path, "w") as f:
            json.dump(payload, f, indent=2)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as f:
            writer = csv.writer(f)
            writer.writerow(["view_id", "psnr_db", "ssim"])
            for v, p, s in zip(self.view_ids, self.psnr_db, self.ssim):
                writer.writerow([v, f"{p:.6f}", f"{s:.6f}"])
