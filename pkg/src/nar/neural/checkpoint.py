"""Checkpoint container: named tensors behind an integrity hash.

Layout (little-endian): magic "NARCK", u16 version, u8 precision
(0 = float32, 1 = float16 weights), u64 step, 32-byte SHA-256 of everything
that follows, then tensors as (u8 name_len, name, u8 ndim, u32 dims...,
payload). The model config rides along as a JSON-bytes tensor, so the hash
covers both config and weights; loading verifies the hash and, when asked,
config compatibility.
"""

from __future__ import annotations

import hashlib
import io
import json
import struct
import warnings

import numpy as np

from ..errors import CheckpointError
from .model import ModelState, UNetConfig

MAGIC = b"NARCK"
VERSION = 1

F16_MAX = 65504.0

_CONFIG_KEY = "__config__"


def _write_tensor(buf: io.BytesIO, name: str, arr: np.ndarray) -> None:
    nb = name.encode("utf-8")
    buf.write(struct.pack("<B", len(nb)))
    buf.write(nb)
    buf.write(struct.pack("<B", arr.ndim))
    for d in arr.shape:
        buf.write(struct.pack("<I", d))
    buf.write(arr.tobytes())


def _tensor_section(state: ModelState, precision: str) -> tuple[bytes, int]:
    """Serialized tensors plus the count of fp16-saturated weight values."""
    buf = io.BytesIO()
    cfg = json.dumps(state.config.to_dict(), sort_keys=True).encode()
    _write_tensor(buf, _CONFIG_KEY, np.frombuffer(cfg, np.uint8))
    saturated = 0
    for name, p in state.params.items():
        if precision == "f16":
            over = int((np.abs(p) > F16_MAX).sum())
            saturated += over
            arr = np.clip(p, -F16_MAX, F16_MAX).astype("<f2")
        else:
            arr = p.astype("<f4")
        _write_tensor(buf, f"param/{name}", arr)
    if precision == "f32":
        # Moments only make sense at full precision (training resume).
        for name, p in state.m.items():
            _write_tensor(buf, f"adam_m/{name}", p.astype("<f4"))
        for name, p in state.v.items():
            _write_tensor(buf, f"adam_v/{name}", p.astype("<f4"))
    return buf.getvalue(), saturated


def save_checkpoint(state: ModelState, path, precision: str = "f32") -> int:
    """Write a checkpoint; returns the number of fp16-saturated values."""
    if precision not in ("f32", "f16"):
        raise ValueError(f"precision must be f32 or f16, got {precision!r}")
    section, saturated = _tensor_section(state, precision)
    if saturated:
        warnings.warn(f"{saturated} weight values saturated to the fp16 range")
    with open(path, "wb") as f:
        f.write(MAGIC)
        f.write(struct.pack("<HBQ", VERSION, 1 if precision == "f16" else 0, state.step))
        f.write(hashlib.sha256(section).digest())
        f.write(section)
    return saturated


def quantize_checkpoint(state: ModelState, path) -> int:
    """Half-precision weight checkpoint for deployment (moments dropped)."""
    return save_checkpoint(state, path, precision="f16")


def load_checkpoint(path, expected_config: UNetConfig | None = None) -> ModelState:
    with open(path, "rb") as f:
        raw = f.read()
    if raw[:5] != MAGIC:
        raise CheckpointError("not a checkpoint file (bad magic)")
    version, precision, step = struct.unpack_from("<HBQ", raw, 5)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    stored_hash = raw[16:48]
    section = raw[48:]
    if hashlib.sha256(section).digest() != stored_hash:
        raise CheckpointError("integrity hash mismatch (corrupt or tampered file)")

    tensors: dict[str, np.ndarray] = {}
    off = 0
    while off < len(section):
        (name_len,) = struct.unpack_from("<B", section, off)
        off += 1
        name = section[off : off + name_len].decode("utf-8")
        off += name_len
        (ndim,) = struct.unpack_from("<B", section, off)
        off += 1
        shape = struct.unpack_from(f"<{ndim}I", section, off)
        off += 4 * ndim
        count = int(np.prod(shape)) if ndim else 1
        if name == _CONFIG_KEY:
            dt = np.dtype("u1")
        elif precision == 1 and name.startswith("param/"):
            dt = np.dtype("<f2")
        else:
            dt = np.dtype("<f4")
        tensors[name] = np.frombuffer(
            section, dt, count=count, offset=off
        ).reshape(shape)
        off += count * dt.itemsize

    if _CONFIG_KEY not in tensors:
        raise CheckpointError("checkpoint carries no config")
    config = UNetConfig.from_dict(json.loads(tensors[_CONFIG_KEY].tobytes().decode()))
    if expected_config is not None and config.to_dict() != expected_config.to_dict():
        raise CheckpointError(
            f"incompatible checkpoint: config hash {config.hash()[:12]} "
            f"!= expected {expected_config.hash()[:12]}"
        )

    params = {
        k[len("param/") :]: v.astype(np.float32)
        for k, v in tensors.items()
        if k.startswith("param/")
    }
    m = {
        k[len("adam_m/") :]: v.astype(np.float32)
        for k, v in tensors.items()
        if k.startswith("adam_m/")
    }
    v_ = {
        k[len("adam_v/") :]: v.astype(np.float32)
        for k, v in tensors.items()
        if k.startswith("adam_v/")
    }
    if not m:
        m = {k: np.zeros_like(p) for k, p in params.items()}
        v_ = {k: np.zeros_like(p) for k, p in params.items()}
    return ModelState(config, params, m, v_, step)


def weight_payload_bytes(path) -> int:
    """Total bytes of the param/ tensor payloads (excludes names and dims)."""
    with open(path, "rb") as f:
        raw = f.read()
    precision = raw[7]
    section = raw[48:]
    total = 0
    off = 0
    while off < len(section):
        (name_len,) = struct.unpack_from("<B", section, off)
        off += 1
        name = section[off : off + name_len].decode("utf-8")
        off += name_len
        (ndim,) = struct.unpack_from("<B", section, off)
        off += 1
        shape = struct.unpack_from(f"<{ndim}I", section, off)
        off += 4 * ndim
        count = int(np.prod(shape)) if ndim else 1
        if name == _CONFIG_KEY:
            item = 1
        elif precision == 1 and name.startswith("param/"):
            item = 2
        else:
            item = 4
        nbytes = count * item
        if name.startswith("param/"):
            total += nbytes
        off += nbytes
    return total
