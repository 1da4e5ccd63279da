"""Joint superpixel segmentation of a co-registered image pair.

One shared label grid is produced for both images by a SLIC-style
clustering whose color term is the mean of the two per-image normalized
absolute intensity differences. Pixel/superpixel bookkeeping for training
sample selection and integer mean-feature extraction lives here too.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import BiTemporalPair, RasterImage, to_intensity

_SLIC_ITERATIONS = 10


@dataclass(frozen=True)
class SuperpixelMap:
    """Shared superpixel partition: ``label[y, x]`` in [0, count)."""

    width: int
    height: int
    label: np.ndarray
    count: int

    def __post_init__(self):
        if self.label.shape != (self.height, self.width):
            raise ValueError("label grid does not match stated dimensions")
        present = np.unique(self.label)
        if present[0] != 0 or present[-1] != self.count - 1 or len(present) != self.count:
            raise ValueError("superpixel ids must cover [0, count) with no gaps")

    def sizes(self) -> np.ndarray:
        return np.bincount(self.label.ravel(), minlength=self.count)


@dataclass(frozen=True)
class TrainingRegion:
    """Inclusive-exclusive pixel rectangle [x0, x1) x [y0, y1)."""

    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if not (0 <= self.x0 < self.x1 and 0 <= self.y0 < self.y1):
            raise ValueError(f"degenerate training region {self}")

    def check_bounds(self, width: int, height: int) -> None:
        if self.x1 > width or self.y1 > height:
            raise ValueError(
                f"training region {self} exceeds image bounds {width}x{height}"
            )

    @property
    def area(self) -> int:
        return (self.x1 - self.x0) * (self.y1 - self.y0)


@dataclass(frozen=True)
class FeatureSet:
    """Per-superpixel integer mean intensities, aligned with ``ids``."""

    values: np.ndarray
    ids: np.ndarray

    def __post_init__(self):
        if len(self.values) != len(self.ids):
            raise ValueError("values and ids length mismatch")
        if len(self.values) and (self.values.min() < 0 or self.values.max() > 255):
            raise ValueError("feature values must lie in [0, 255]")

    def __len__(self) -> int:
        return len(self.values)


def co_slic(
    pair: BiTemporalPair,
    n_target: int,
    compactness: float = 10.0,
    seed: int = 0,
) -> SuperpixelMap:
    """Segment both images of a pair into one shared superpixel partition.

    The clustering distance per pixel p and cluster center k is

        D^2 = d_color^2 + (compactness / 255)^2 * (d_xy / S)^2

    with d_color the mean of the two per-image |intensity - center| / 255
    terms and S the expected superpixel spacing. Seeds start on a regular
    grid, 10 assignment/update rounds are run in 2S windows, and orphaned
    fragments are merged into the adjacent superpixel they share the
    longest border with, so every output superpixel is 4-connected.

    The procedure is fully deterministic; ``seed`` is accepted for
    interface stability but unused.

    Raises ValueError when n_target < 2 or exceeds the pixel count.
    """
    del seed
    w, h = pair.width, pair.height
    if n_target < 2:
        raise ValueError("n_target must be at least 2")
    if n_target > w * h:
        raise ValueError(f"n_target {n_target} exceeds pixel count {w * h}")

    img1 = to_intensity(pair.pre).band(0).astype(np.float64) / 255.0
    img2 = to_intensity(pair.post).band(0).astype(np.float64) / 255.0

    spacing = np.sqrt(w * h / n_target)
    nx, ny = _grid_shape(w, h, n_target, spacing)
    cx, cy = np.meshgrid(
        (np.arange(nx) + 0.5) * (w / nx),
        (np.arange(ny) + 0.5) * (h / ny),
    )
    cx = cx.ravel()
    cy = cy.ravel()
    c1 = img1[np.minimum(cy.astype(int), h - 1), np.minimum(cx.astype(int), w - 1)]
    c2 = img2[np.minimum(cy.astype(int), h - 1), np.minimum(cx.astype(int), w - 1)]

    k = len(cx)
    reach = int(np.ceil(spacing)) + 1
    spatial_w = (compactness / 255.0) ** 2 / spacing**2
    ygrid, xgrid = np.mgrid[0:h, 0:w]
    label = np.full((h, w), -1, dtype=np.int32)

    for _ in range(_SLIC_ITERATIONS):
        best = np.full((h, w), np.inf)
        label.fill(-1)
        for j in range(k):
            x_lo, x_hi = max(0, int(cx[j]) - reach), min(w, int(cx[j]) + reach + 1)
            y_lo, y_hi = max(0, int(cy[j]) - reach), min(h, int(cy[j]) + reach + 1)
            d_color = 0.5 * (
                np.abs(img1[y_lo:y_hi, x_lo:x_hi] - c1[j])
                + np.abs(img2[y_lo:y_hi, x_lo:x_hi] - c2[j])
            )
            d2 = d_color**2 + spatial_w * (
                (xgrid[y_lo:y_hi, x_lo:x_hi] - cx[j]) ** 2
                + (ygrid[y_lo:y_hi, x_lo:x_hi] - cy[j]) ** 2
            )
            win_best = best[y_lo:y_hi, x_lo:x_hi]
            better = d2 < win_best
            win_best[better] = d2[better]
            label[y_lo:y_hi, x_lo:x_hi][better] = j

        assigned = label >= 0
        lab = label[assigned]
        counts = np.bincount(lab, minlength=k).astype(np.float64)
        nonempty = counts > 0
        cx[nonempty] = np.bincount(lab, weights=xgrid[assigned], minlength=k)[nonempty] / counts[nonempty]
        cy[nonempty] = np.bincount(lab, weights=ygrid[assigned], minlength=k)[nonempty] / counts[nonempty]
        c1[nonempty] = np.bincount(lab, weights=img1[assigned], minlength=k)[nonempty] / counts[nonempty]
        c2[nonempty] = np.bincount(lab, weights=img2[assigned], minlength=k)[nonempty] / counts[nonempty]

    label = _enforce_connectivity(label)
    _, compact = np.unique(label, return_inverse=True)
    label = compact.reshape(h, w).astype(np.int32)
    return SuperpixelMap(width=w, height=h, label=label, count=int(label.max()) + 1)


def _grid_shape(w: int, h: int, n_target: int, spacing: float) -> tuple[int, int]:
    # pick the seed grid whose product is closest to n_target
    options = []
    for nx in {max(1, int(np.floor(w / spacing))), max(1, int(np.ceil(w / spacing)))}:
        for ny in {max(1, int(np.floor(h / spacing))), max(1, int(np.ceil(h / spacing)))}:
            options.append((abs(nx * ny - n_target), nx, ny))
    _, nx, ny = min(options)
    return min(nx, w), min(ny, h)


def _enforce_connectivity(label: np.ndarray) -> np.ndarray:
    """Keep each label's largest 4-connected component; everything else
    (smaller fragments and unassigned pixels) is erased and regrown from
    the surviving regions, so every final label is 4-connected.

    Regrowth runs in deterministic rounds: each hole pixel adopts the
    first available neighbor label in up, left, down, right priority.
    """
    h, w = label.shape
    structure = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])
    kept = np.full((h, w), -1, dtype=np.int32)
    for val in np.unique(label):
        if val < 0:
            continue
        comp, n_comp = ndimage.label(label == val, structure=structure)
        if n_comp == 1:
            kept[comp == 1] = val
        else:
            sizes = np.bincount(comp.ravel())[1:]
            kept[comp == int(np.argmax(sizes)) + 1] = val

    while np.any(kept < 0):
        cand = np.full((h, w), -1, dtype=np.int32)
        for shifted in (
            np.vstack([kept[:1] * 0 - 1, kept[:-1]]),   # from above
            np.hstack([kept[:, :1] * 0 - 1, kept[:, :-1]]),  # from the left
            np.vstack([kept[1:], kept[:1] * 0 - 1]),    # from below
            np.hstack([kept[:, 1:], kept[:, :1] * 0 - 1]),   # from the right
        ):
            cand = np.where((cand < 0) & (shifted >= 0), shifted, cand)
        grow = (kept < 0) & (cand >= 0)
        if not np.any(grow):
            raise RuntimeError("connectivity regrowth stalled")
        kept[grow] = cand[grow]
    return kept


def select_training_superpixels(
    spmap: SuperpixelMap, region: TrainingRegion
) -> np.ndarray:
    """Ids of superpixels with strictly more than half their pixels inside
    the region, ascending.

    Raises ValueError when the region is out of bounds or selects nothing.
    """
    region.check_bounds(spmap.width, spmap.height)
    inside = spmap.label[region.y0 : region.y1, region.x0 : region.x1]
    in_counts = np.bincount(inside.ravel(), minlength=spmap.count)
    totals = spmap.sizes()
    selected = np.flatnonzero(2 * in_counts > totals)  # exact integer ">0.5"
    if len(selected) == 0:
        raise ValueError("no superpixel lies mostly inside the training region")
    return selected


def extract_features(
    img: RasterImage, spmap: SuperpixelMap, ids: np.ndarray | None = None
) -> FeatureSet:
    """Floor of the mean intensity of each requested superpixel.

    ``img`` must be single-band and match the map's dimensions; ``ids``
    defaults to all superpixels in order.
    """
    if img.bands != 1:
        raise ValueError("extract_features expects a single-band image")
    if (img.width, img.height) != (spmap.width, spmap.height):
        raise ValueError("image and superpixel map dimensions differ")
    if ids is None:
        ids = np.arange(spmap.count)
    else:
        ids = np.asarray(ids, dtype=int)
        if len(ids) and (ids.min() < 0 or ids.max() >= spmap.count):
            raise ValueError("superpixel id out of range")

    flat_label = spmap.label.ravel()
    sums = np.bincount(
        flat_label, weights=img.band(0).ravel().astype(np.float64), minlength=spmap.count
    ).astype(np.int64)
    counts = spmap.sizes()
    means = sums[ids] // counts[ids]  # exact integer floor(mean)
    return FeatureSet(values=means.astype(np.int64), ids=ids.copy())


def save_label_map_txt(spmap: SuperpixelMap, path) -> None:
    """Debug export: header ``width height count`` then the label rows."""
    with open(path, "w") as fh:
        fh.write(f"{spmap.width} {spmap.height} {spmap.count}\n")
        np.savetxt(fh, spmap.label, fmt="%d")
