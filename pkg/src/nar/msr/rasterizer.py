"""Multi-stream rasterizer: nearest-depth point visibility, then channel fill.

The render stage projects every point to a single pixel and keeps the
(min depth, min index) winner via packed 64-bit keys; the resolve stage
expands the winning indices into the selected feature channels. No blending
happens between points, so the output is exactly reproducible regardless of
point order or thread count.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import _kernels
from ..errors import ConfigurationError
from ..geometry import CameraPose, PointCloud
from .velocity import encode_vel2d_batch, encode_vel3d

MAX_CHANNELS = 16

VEL2D_CHANNELS = ("v2x", "v2y", "v2t", "v2m")
VEL3D_CHANNELS = ("v3x", "v3y", "v3z", "v3m")


@dataclass(frozen=True)
class StreamSelection:
    """Which point attributes become raster channels."""

    rgb: bool = True
    depth: bool = False
    vel2d: bool = False
    vel3d: bool = False
    scalars: tuple[str, ...] = ()
    coverage_channel: bool = False
    velocity_scale: float = 1.0
    rgb_stream: str = "rgb"
    velocity_stream: str = "velocity"

    def channel_names(self, pc: PointCloud | None = None) -> tuple[str, ...]:
        """Channel layout; a pure function of the selection."""
        names: list[str] = []
        if self.rgb:
            names += ["r", "g", "b"]
        if self.depth:
            names.append("d")
        if self.vel2d:
            names += VEL2D_CHANNELS
        if self.vel3d:
            names += VEL3D_CHANNELS
        for s in self.scalars:
            if pc is not None and pc.has_stream(s):
                arity = pc.stream(s).arity
            else:
                arity = 1
            names += [s] if arity == 1 else [f"{s}{i}" for i in range(arity)]
        if self.coverage_channel:
            names.append("coverage")
        return tuple(names)

    def validate(self, pc: PointCloud) -> None:
        if self.rgb and not pc.has_stream(self.rgb_stream):
            raise ConfigurationError(f"selection needs stream {self.rgb_stream!r}")
        if (self.vel2d or self.vel3d) and not pc.has_stream(self.velocity_stream):
            raise ConfigurationError(f"selection needs stream {self.velocity_stream!r}")
        for s in self.scalars:
            if not pc.has_stream(s):
                raise ConfigurationError(f"selection needs stream {s!r}")
        n = len(self.channel_names(pc))
        if n > MAX_CHANNELS:
            raise ConfigurationError(f"{n} channels exceed the limit of {MAX_CHANNELS}")

    def to_dict(self) -> dict:
        return {
            "rgb": self.rgb,
            "depth": self.depth,
            "vel2d": self.vel2d,
            "vel3d": self.vel3d,
            "scalars": list(self.scalars),
            "coverage_channel": self.coverage_channel,
            "velocity_scale": self.velocity_scale,
            "rgb_stream": self.rgb_stream,
            "velocity_stream": self.velocity_stream,
        }

    @staticmethod
    def from_dict(d: dict) -> "StreamSelection":
        d = dict(d)
        d["scalars"] = tuple(d.get("scalars", ()))
        return StreamSelection(**d)


@dataclass(eq=False)
class FeatureImage:
    """Raster output: named f32 planes plus coverage/index/depth bookkeeping."""

    width: int
    height: int
    channel_names: tuple[str, ...]
    data: np.ndarray            # (H, W, C) float32
    coverage: np.ndarray        # (H, W) uint8
    index_plane: np.ndarray     # (H, W) int64, -1 for background
    depth: np.ndarray = field(default=None)  # (H, W) float32 view depth, 0 for background

    def plane(self, name: str) -> np.ndarray:
        return self.data[:, :, self.channel_names.index(name)]

    def rgb(self) -> np.ndarray:
        """(H, W, 3) color image; requires r/g/b channels."""
        if not {"r", "g", "b"} <= set(self.channel_names):
            raise ConfigurationError("feature image has no RGB channels")
        return np.stack([self.plane("r"), self.plane("g"), self.plane("b")], axis=-1)


def _stream_as_float(pc: PointCloud, name: str) -> np.ndarray:
    s = pc.stream(name)
    if s.format == "u8":
        return s.data.astype(np.float32) / 255.0
    return s.data.astype(np.float32)


def rasterize(
    pc: PointCloud,
    cam: CameraPose,
    sel: StreamSelection,
    threads: int | None = None,
    backend: str | None = None,
) -> FeatureImage:
    sel.validate(pc)
    intr = cam.intrinsics
    W, H = intr.width, intr.height

    keybuf = _kernels.zbuffer_render(
        pc.positions, cam.orientation, cam.position,
        intr.focal_px, intr.cx, intr.cy, intr.near, intr.far,
        W, H, threads=threads, backend=backend,
    )

    covered = keybuf != _kernels.EMPTY_KEY
    coverage = covered.reshape(H, W).astype(np.uint8)
    index_plane = np.full(H * W, -1, np.int64)
    win = (keybuf[covered] & np.uint64(0xFFFFFFFF)).astype(np.int64)
    index_plane[covered] = win
    depth = np.zeros(H * W, np.float32)
    depth[covered] = (keybuf[covered] >> np.uint64(32)).astype(np.uint32).view(np.float32)

    names = sel.channel_names(pc)
    data = np.zeros((H * W, len(names)), np.float32)
    col = 0
    if sel.rgb:
        rgbs = _stream_as_float(pc, sel.rgb_stream)
        data[covered, col : col + 3] = rgbs[win, :3]
        col += 3
    if sel.depth:
        data[covered, col] = np.float32(intr.near) / depth[covered]
        np.clip(data[:, col], 0.0, 1.0, out=data[:, col])
        col += 1
    if sel.vel2d or sel.vel3d:
        vel = _stream_as_float(pc, sel.velocity_stream)[:, :3].astype(np.float64)
    if sel.vel2d:
        # Winners are never culled, so the Jacobian is defined everywhere.
        data[covered, col : col + 4] = encode_vel2d_batch(
            cam, pc.positions[win], vel[win], sel.velocity_scale
        ).astype(np.float32)
        col += 4
    if sel.vel3d:
        data[covered, col : col + 4] = encode_vel3d(vel[win], sel.velocity_scale).astype(
            np.float32
        )
        col += 4
    for s in sel.scalars:
        arity = pc.stream(s).arity
        data[covered, col : col + arity] = _stream_as_float(pc, s)[win]
        col += arity
    if sel.coverage_channel:
        data[:, col] = covered.astype(np.float32)
        col += 1

    return FeatureImage(
        width=W,
        height=H,
        channel_names=names,
        data=data.reshape(H, W, len(names)),
        coverage=coverage,
        index_plane=index_plane.reshape(H, W),
        depth=depth.reshape(H, W),
    )
