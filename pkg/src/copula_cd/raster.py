"""Loading, validation, and saving of 8-bit image grids and binary masks.

Two on-disk formats are supported, routed by file extension:

* ``.png`` -- lossless 8-bit PNG (grayscale or RGB) via Pillow.
* ``.txt`` -- plain-text matrix: first line ``width height bands``, then
  whitespace-separated integers in row-major, band-interleaved order.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

# modes Pillow may report for depths we do not accept
_DEEP_MODES = {"I", "I;16", "I;16B", "I;16L", "I;16N", "F"}

_MAX_PIXELS = 2**31  # width * height * bands guard


class RasterError(ValueError):
    """Raised for unreadable, malformed, or out-of-contract image data."""


@dataclass(frozen=True)
class RasterImage:
    """An 8-bit intensity grid.

    ``data`` has shape (height, width, bands), dtype uint8.
    """

    width: int
    height: int
    bands: int
    data: np.ndarray

    def __post_init__(self):
        if self.width < 1 or self.height < 1 or self.bands < 1:
            raise RasterError("raster dimensions must be positive")
        if self.width * self.height * self.bands > _MAX_PIXELS:
            raise RasterError("raster dimensions overflow supported size")
        if self.data.shape != (self.height, self.width, self.bands):
            raise RasterError(
                f"data shape {self.data.shape} does not match "
                f"(height={self.height}, width={self.width}, bands={self.bands})"
            )
        if self.data.dtype != np.uint8:
            raise RasterError(f"raster data must be uint8, got {self.data.dtype}")

    @classmethod
    def from_array(cls, arr: np.ndarray) -> "RasterImage":
        """Build from a (H, W) or (H, W, bands) array of values in [0, 255]."""
        arr = np.asarray(arr)
        if arr.ndim == 2:
            arr = arr[:, :, None]
        if arr.ndim != 3:
            raise RasterError(f"expected 2-D or 3-D array, got ndim={arr.ndim}")
        if arr.dtype != np.uint8:
            if np.any((arr < 0) | (arr > 255)):
                raise RasterError("raster values must lie in [0, 255]")
            arr = arr.astype(np.uint8)
        h, w, b = arr.shape
        return cls(width=w, height=h, bands=b, data=np.ascontiguousarray(arr))

    def band(self, i: int) -> np.ndarray:
        return self.data[:, :, i]


@dataclass(frozen=True)
class BiTemporalPair:
    """A co-registered pre/post image pair. Heights and widths must match."""

    pre: RasterImage
    post: RasterImage

    def __post_init__(self):
        if (self.pre.width, self.pre.height) != (self.post.width, self.post.height):
            raise RasterError(
                f"pre {self.pre.width}x{self.pre.height} and "
                f"post {self.post.width}x{self.post.height} dimensions differ"
            )

    @property
    def width(self) -> int:
        return self.pre.width

    @property
    def height(self) -> int:
        return self.pre.height


@dataclass(frozen=True)
class ChangeMap:
    """Binary per-pixel change labels: 0 = unchanged, 1 = changed."""

    width: int
    height: int
    labels: np.ndarray

    def __post_init__(self):
        if self.labels.shape != (self.height, self.width):
            raise RasterError("label grid does not match stated dimensions")
        values = np.unique(self.labels)
        if not np.all(np.isin(values, (0, 1))):
            raise RasterError(f"change map labels must be 0/1, got {values}")

    @property
    def changed_count(self) -> int:
        return int(self.labels.sum())


def load_raster(path: str | Path) -> RasterImage:
    """Load an 8-bit raster from a PNG or text-matrix file.

    Raises RasterError for missing files, non-8-bit depths, or unsupported
    modes.
    """
    path = Path(path)
    if not path.exists():
        raise RasterError(f"no such file: {path}")
    if path.suffix.lower() == ".txt":
        return _load_text(path)
    with Image.open(path) as img:
        if img.mode in _DEEP_MODES:
            raise RasterError(f"unsupported bit depth (mode {img.mode}) in {path}")
        if img.mode not in ("L", "RGB"):
            raise RasterError(f"unsupported image mode {img.mode} in {path}")
        arr = np.asarray(img, dtype=np.uint8)
    return RasterImage.from_array(arr)


def save_raster(img: RasterImage, path: str | Path) -> None:
    """Write a RasterImage as PNG (1 or 3 bands) or text matrix."""
    path = Path(path)
    if path.suffix.lower() == ".txt":
        _save_text(img, path)
        return
    if img.bands == 1:
        Image.fromarray(img.data[:, :, 0], mode="L").save(path)
    elif img.bands == 3:
        Image.fromarray(img.data, mode="RGB").save(path)
    else:
        raise RasterError(f"PNG output supports 1 or 3 bands, got {img.bands}")


def to_intensity(img: RasterImage) -> RasterImage:
    """Collapse a multi-band image to one band: floor of the per-pixel band mean.

    Single-band input is returned unchanged.
    """
    if img.bands == 1:
        return img
    sums = img.data.astype(np.int64).sum(axis=2)
    mean_floor = (sums // img.bands).astype(np.uint8)
    return RasterImage.from_array(mean_floor)


def save_change_map(cmap: ChangeMap, path: str | Path) -> None:
    """Write a change map as an 8-bit image: changed = 255, unchanged = 0."""
    img = RasterImage.from_array((cmap.labels.astype(np.uint8)) * 255)
    save_raster(img, path)


def load_change_map(path: str | Path) -> ChangeMap:
    """Read a change map written by :func:`save_change_map`.

    Any nonzero pixel counts as changed.
    """
    img = to_intensity(load_raster(path))
    labels = (img.data[:, :, 0] > 0).astype(np.uint8)
    return ChangeMap(width=img.width, height=img.height, labels=labels)


def _load_text(path: Path) -> RasterImage:
    with open(path) as fh:
        header = fh.readline().split()
        if len(header) != 3:
            raise RasterError(f"bad text raster header in {path}")
        w, h, b = (int(x) for x in header)
        values = np.loadtxt(fh, dtype=np.int64).ravel()
    if values.size != w * h * b:
        raise RasterError(
            f"text raster {path}: expected {w * h * b} values, found {values.size}"
        )
    if values.min() < 0 or values.max() > 255:
        raise RasterError(f"unsupported bit depth: values outside [0, 255] in {path}")
    return RasterImage.from_array(values.reshape(h, w, b).astype(np.uint8))


def _save_text(img: RasterImage, path: Path) -> None:
    with open(path, "w") as fh:
        fh.write(f"{img.width} {img.height} {img.bands}\n")
        flat = img.data.reshape(img.height, img.width * img.bands)
        np.savetxt(fh, flat, fmt="%d")
