"""Image file codecs: PNG (8/16-bit), PGM/PPM and little-endian PFM.

Decoded rasters are float64 in [0, 1] with RGB(A) channel order. Encoding
clamps to [0, 1] and rounds half up. All writers go through a temporary
file in the destination directory followed by a rename, so a failed run
never leaves a partial output behind.
"""

from __future__ import annotations

import os
import re
import tempfile
from pathlib import Path

import cv2
import numpy as np

from .imgcore import luma

RASTER_SUFFIXES = {".png", ".pgm", ".ppm", ".pnm"}


class ImageIOError(OSError):
    """Raised when a file cannot be read, decoded or written."""


def atomic_write_bytes(path, payload: bytes) -> None:
    path = Path(path)
    directory = path.parent if str(path.parent) else Path(".")
    fd, tmp = tempfile.mkstemp(prefix=f".{path.name}.", suffix=".tmp", dir=directory)
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _to_opencv_order(arr: np.ndarray) -> np.ndarray:
    if arr.ndim == 3 and arr.shape[2] == 3:
        return arr[..., ::-1]
    if arr.ndim == 3 and arr.shape[2] == 4:
        return arr[..., [2, 1, 0, 3]]
    return arr


def encode_raster(img, suffix: str, bit_depth: int = 8) -> bytes:
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim == 3 and arr.shape[2] == 1:
        arr = arr[..., 0]
    if bit_depth not in (8, 16):
        raise ValueError("bit_depth must be 8 or 16")
    maxval = 255.0 if bit_depth == 8 else 65535.0
    dtype = np.uint8 if bit_depth == 8 else np.uint16
    q = np.floor(np.clip(arr, 0.0, 1.0) * maxval + 0.5).astype(dtype)
    suffix = suffix.lower()
    if suffix == ".pnm":
        suffix = ".ppm" if q.ndim == 3 else ".pgm"
    if suffix == ".pgm" and q.ndim == 3:
        raise ValueError("PGM holds a single channel; write .ppm or .png for colour")
    ok, buf = cv2.imencode(suffix, np.ascontiguousarray(_to_opencv_order(q)))
    if not ok:
        raise ImageIOError(f"could not encode {suffix} image")
    return buf.tobytes()


def decode_raster(payload: bytes) -> np.ndarray:
    raw = cv2.imdecode(np.frombuffer(payload, dtype=np.uint8), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise ImageIOError("unrecognised or corrupt image data")
    if raw.dtype == np.uint8:
        arr = raw.astype(np.float64) / 255.0
    elif raw.dtype == np.uint16:
        arr = raw.astype(np.float64) / 65535.0
    else:
        raise ImageIOError(f"unsupported sample type {raw.dtype}")
    return np.ascontiguousarray(_to_opencv_order(arr))


def write_pfm(path, field) -> None:
    arr = np.asarray(field, dtype=np.float64)
    if not np.all(np.isfinite(arr)):
        raise ValueError("PFM output must be finite")
    if arr.ndim == 2:
        header = "Pf"
    elif arr.ndim == 3 and arr.shape[2] == 3:
        header = "PF"
    else:
        raise ValueError(f"PFM stores 1 or 3 channels, got shape {arr.shape}")
    h, w = arr.shape[:2]
    body = np.flipud(arr).astype("<f4").tobytes()
    atomic_write_bytes(path, f"{header}\n{w} {h}\n-1.0\n".encode("ascii") + body)


_PFM_HEADER = re.compile(rb"^(PF|Pf)\s+(\d+)\s+(\d+)\s+([-+0-9.eE]+)\s")


def read_pfm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    m = _PFM_HEADER.match(data)
    if m is None:
        raise ImageIOError(f"{path}: not a PFM file")
    channels = 3 if m.group(1) == b"PF" else 1
    w, h = int(m.group(2)), int(m.group(3))
    scale = float(m.group(4))
    dtype = "<f4" if scale < 0 else ">f4"
    count = w * h * channels
    if len(data) - m.end() < 4 * count:
        raise ImageIOError(f"{path}: truncated PFM data")
    body = np.frombuffer(data, dtype=dtype, count=count, offset=m.end())
    shape = (h, w, 3) if channels == 3 else (h, w)
    return np.flipud(body.reshape(shape)).astype(np.float64)


def read_image(path) -> np.ndarray:
    path = Path(path)
    try:
        if path.suffix.lower() == ".pfm":
            return read_pfm(path)
        return decode_raster(path.read_bytes())
    except ImageIOError as exc:
        raise ImageIOError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ImageIOError(f"{path}: {exc.strerror or exc}") from exc


def read_scalar_field(path) -> np.ndarray:
    """Read a mask, depth map or kappa map as a single float plane."""
    arr = read_image(path)
    if arr.ndim == 3:
        arr = arr[..., :3] if arr.shape[2] >= 3 else arr[..., :1]
        arr = luma(arr) if arr.shape[2] == 3 else arr[..., 0]
    return arr


def write_image(path, img, bit_depth: int = 8) -> None:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".pfm":
        write_pfm(path, img)
        return
    if suffix not in RASTER_SUFFIXES:
        raise ValueError(f"unsupported output format {suffix!r}")
    payload = encode_raster(img, suffix, bit_depth)
    try:
        atomic_write_bytes(path, payload)
    except OSError as exc:
        raise ImageIOError(f"{path}: {exc.strerror or exc}") from exc
