"""Frame-series ingestion: image sequences or precomputed histogram caches.

Video decoding stays out of process.  The engine consumes either a directory
of already-sampled grayscale-convertible images, or a binary histogram cache
(LMHC format below) produced by an external extractor.

LMHC cache layout, all little-endian:

    magic       4 bytes  b"LMHC"
    version     u16      currently 1
    reserved    u16      0
    frame_count u32
    bin_count   u32
    frames      frame_count records of:
        t_ms          i64
        edge_density  f64
        histogram     f64[bin_count]
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import NoFrames, SchemaViolation

LMHC_MAGIC = b"LMHC"
LMHC_VERSION = 1
_HEADER = struct.Struct("<4sHHII")
_FRAME_HEAD = struct.Struct("<qd")

# largest possible forward-difference gradient magnitude on 8-bit pixels
MAX_GRADIENT = 255.0 * math.sqrt(2.0)

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".gif", ".tif", ".tiff")


@dataclass(frozen=True)
class Frame:
    t_ms: int
    histogram: np.ndarray
    edge_density: float
    source_ref: str


@dataclass(frozen=True)
class IngestWarning:
    source_ref: str
    reason: str


@dataclass(frozen=True)
class FrameSeries:
    frames: tuple[Frame, ...]
    warnings: tuple[IngestWarning, ...] = ()

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def times_ms(self) -> tuple[int, ...]:
        return tuple(f.t_ms for f in self.frames)

    def histogram_matrix(self) -> np.ndarray:
        return np.stack([f.histogram for f in self.frames])


def _freeze(arr: np.ndarray) -> np.ndarray:
    arr = np.ascontiguousarray(arr, dtype=np.float64)
    arr.flags.writeable = False
    return arr


def grayscale_histogram(pixels: np.ndarray, bins: int = 256) -> np.ndarray:
    """Normalized luminance histogram of a uint8 image."""
    counts = np.bincount(pixels.ravel() >> _shift_for(bins), minlength=bins)
    return counts.astype(np.float64) / pixels.size


def _shift_for(bins: int) -> int:
    if bins <= 0 or bins > 256 or 256 % bins:
        raise ValueError(f"bins must divide 256, got {bins}")
    return (256 // bins).bit_length() - 1


def edge_density(pixels: np.ndarray, threshold: float = 0.1) -> float:
    """Fraction of pixels whose forward-difference gradient magnitude
    exceeds ``threshold`` of the maximum possible magnitude."""
    img = pixels.astype(np.float64)
    gx = np.zeros_like(img)
    gy = np.zeros_like(img)
    gx[:, :-1] = img[:, 1:] - img[:, :-1]
    gy[:-1, :] = img[1:, :] - img[:-1, :]
    mag = np.hypot(gx, gy)
    return float(np.count_nonzero(mag > threshold * MAX_GRADIENT) / img.size)


def frame_from_image(path: Path, t_ms: int, bins: int,
                     edge_threshold: float) -> Frame:
    from PIL import Image

    with Image.open(path) as im:
        pixels = np.asarray(im.convert("L"), dtype=np.uint8)
    return Frame(
        t_ms=t_ms,
        histogram=_freeze(grayscale_histogram(pixels, bins)),
        edge_density=edge_density(pixels, edge_threshold),
        source_ref=str(path),
    )


def load_frames(asset_path: str | Path, sample_interval_ms: int,
                bins: int = 256, edge_threshold: float = 0.1) -> FrameSeries:
    """Load frames from an image directory or an LMHC histogram cache."""
    path = Path(asset_path)
    if path.is_file():
        return read_histogram_cache(path)
    if not path.is_dir():
        raise NoFrames(f"no such file or directory: {path}")
    cache = sorted(path.glob("*.lmhc"))
    if cache:
        return read_histogram_cache(cache[0])

    frames: list[Frame] = []
    warnings: list[IngestWarning] = []
    images = sorted(p for p in path.iterdir()
                    if p.suffix.lower() in _IMAGE_SUFFIXES)
    for index, image_path in enumerate(images):
        t_ms = index * sample_interval_ms
        try:
            frames.append(frame_from_image(image_path, t_ms, bins, edge_threshold))
        except OSError as exc:
            warnings.append(IngestWarning(str(image_path), f"corrupt image: {exc}"))
    if not frames:
        raise NoFrames(f"no decodable frames under {path}")
    # closing gaps left by skipped frames keeps spacing == sample interval
    frames = [Frame(i * sample_interval_ms, f.histogram, f.edge_density, f.source_ref)
              for i, f in enumerate(frames)]
    return FrameSeries(tuple(frames), tuple(warnings))


def read_histogram_cache(path: str | Path) -> FrameSeries:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise SchemaViolation(str(path), "truncated LMHC header")
    magic, version, _, frame_count, bin_count = _HEADER.unpack_from(data, 0)
    if magic != LMHC_MAGIC:
        raise SchemaViolation(f"{path}/magic", f"bad magic {magic!r}")
    if version != LMHC_VERSION:
        raise SchemaViolation(f"{path}/version", f"unsupported version {version}")
    if bin_count == 0:
        raise SchemaViolation(f"{path}/bin_count", "zero bins")
    record = _FRAME_HEAD.size + 8 * bin_count
    if len(data) != _HEADER.size + record * frame_count:
        raise SchemaViolation(str(path), "file size does not match header counts")
    if frame_count == 0:
        raise NoFrames(f"{path} holds zero frames")

    frames: list[Frame] = []
    offset = _HEADER.size
    prev_t = None
    for i in range(frame_count):
        t_ms, density = _FRAME_HEAD.unpack_from(data, offset)
        offset += _FRAME_HEAD.size
        hist = np.frombuffer(data, dtype="<f8", count=bin_count, offset=offset).copy()
        offset += 8 * bin_count
        if prev_t is not None and t_ms <= prev_t:
            raise SchemaViolation(f"{path}/frames/{i}/t_ms",
                                  f"t_ms {t_ms} not increasing")
        if not 0.0 <= density <= 1.0:
            raise SchemaViolation(f"{path}/frames/{i}/edge_density",
                                  f"{density} outside [0, 1]")
        total = hist.sum()
        if total <= 0 or np.any(hist < 0):
            raise SchemaViolation(f"{path}/frames/{i}/histogram",
                                  "not a nonnegative distribution")
        frames.append(Frame(int(t_ms), _freeze(hist / total), float(density),
                            f"{path}#{i}"))
        prev_t = t_ms
    return FrameSeries(tuple(frames))


def write_histogram_cache(series: FrameSeries, path: str | Path) -> None:
    chunks = [_HEADER.pack(LMHC_MAGIC, LMHC_VERSION, 0, len(series.frames),
                           len(series.frames[0].histogram))]
    for frame in series.frames:
        chunks.append(_FRAME_HEAD.pack(frame.t_ms, frame.edge_density))
        chunks.append(np.asarray(frame.histogram, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(chunks))
