"""Synthetic heterogeneous bi-temporal scenes with known ground truth.

Unchanged pixels are dependent (u, v) draws from a chosen copula pushed
through each image's marginal; pixels inside the change rectangles get an
independent post-image draw instead. Both images then receive the same
3x3 box blur so superpixels have something spatially coherent to find.

For normal marginals the pre-blur spread is widened by the blur's
variance reduction factor (3 for a 3x3 box over i.i.d. draws), so the
blurred image matches the requested marginal and, for Gaussian
dependence, preserves the requested correlation. Non-normal marginals
and non-Gaussian dependence survive the blur only approximately.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage, stats

from .classical import CopulaFamily, sample
from .raster import BiTemporalPair, ChangeMap, RasterImage

_BLUR_STD_FACTOR = 3.0  # sqrt(9) for a 3x3 box over independent pixels


@dataclass(frozen=True)
class MarginalSpec:
    """``normal(mu, sigma)`` or ``uniform(lo, hi)``, clipped to [0, 255]."""

    kind: str
    a: float
    b: float

    def __post_init__(self):
        if self.kind not in ("normal", "uniform"):
            raise ValueError(f"unknown marginal {self.kind!r}")
        if self.kind == "normal" and self.b <= 0:
            raise ValueError("normal marginal needs positive sigma")
        if self.kind == "uniform" and self.b <= self.a:
            raise ValueError("uniform marginal needs lo < hi")

    @classmethod
    def parse(cls, text: str) -> "MarginalSpec":
        m = re.fullmatch(
            r"\s*(normal|uniform)\s*\(\s*([-\d.eE+]+)\s*,\s*([-\d.eE+]+)\s*\)\s*", text
        )
        if not m:
            raise ValueError(f"cannot parse marginal spec {text!r}")
        return cls(kind=m.group(1), a=float(m.group(2)), b=float(m.group(3)))

    def quantile(self, u: np.ndarray, widen: float = 1.0) -> np.ndarray:
        if self.kind == "normal":
            return self.a + widen * self.b * stats.norm.ppf(u)
        return self.a + u * (self.b - self.a)


@dataclass(frozen=True)
class SynthSpec:
    width: int
    height: int
    dependence: CopulaFamily
    change_regions: tuple[tuple[int, int, int, int], ...] = ()
    noise_sigma: float = 0.0
    marginal_pre: MarginalSpec = field(
        default_factory=lambda: MarginalSpec("normal", 128.0, 30.0)
    )
    marginal_post: MarginalSpec = field(
        default_factory=lambda: MarginalSpec("normal", 128.0, 30.0)
    )
    seed: int = 0

    def __post_init__(self):
        if self.width < 3 or self.height < 3:
            raise ValueError("scene must be at least 3x3")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")
        for x0, y0, x1, y1 in self.change_regions:
            if not (0 <= x0 < x1 <= self.width and 0 <= y0 < y1 <= self.height):
                raise ValueError(
                    f"change region ({x0},{y0},{x1},{y1}) outside "
                    f"{self.width}x{self.height} scene"
                )


def generate(spec: SynthSpec) -> tuple[BiTemporalPair, ChangeMap]:
    """Deterministic scene + ground truth for the given spec."""
    rng = np.random.default_rng(spec.seed)
    h, w = spec.height, spec.width

    uv = sample(spec.dependence, h * w, rng)
    u = uv[:, 0].reshape(h, w)
    v_dep = uv[:, 1].reshape(h, w)
    v_ind = rng.uniform(size=(h, w))

    mask = np.zeros((h, w), dtype=np.uint8)
    for x0, y0, x1, y1 in spec.change_regions:
        mask[y0:y1, x0:x1] = 1
    v = np.where(mask.astype(bool), v_ind, v_dep)

    # keep copula samples off exact 0/1 before the quantile transform
    eps = 1e-12
    u = np.clip(u, eps, 1.0 - eps)
    v = np.clip(v, eps, 1.0 - eps)

    widen_pre = _BLUR_STD_FACTOR if spec.marginal_pre.kind == "normal" else 1.0
    widen_post = _BLUR_STD_FACTOR if spec.marginal_post.kind == "normal" else 1.0
    pre = spec.marginal_pre.quantile(u, widen=widen_pre)
    post = spec.marginal_post.quantile(v, widen=widen_post)
    if spec.noise_sigma > 0:
        pre = pre + _BLUR_STD_FACTOR * spec.noise_sigma * rng.standard_normal((h, w))
        post = post + _BLUR_STD_FACTOR * spec.noise_sigma * rng.standard_normal((h, w))

    pre = ndimage.uniform_filter(pre, size=3, mode="nearest")
    post = ndimage.uniform_filter(post, size=3, mode="nearest")
    pre = np.clip(pre, 0.0, 255.0).astype(np.uint8)
    post = np.clip(post, 0.0, 255.0).astype(np.uint8)

    pair = BiTemporalPair(
        pre=RasterImage.from_array(pre), post=RasterImage.from_array(post)
    )
    return pair, ChangeMap(width=w, height=h, labels=mask)
