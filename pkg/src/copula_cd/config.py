"""INI-style configuration for the detection pipeline.

One file drives every subcommand. All training defaults are pre-filled,
so a minimal config only needs [paths] and [region]::

    [paths]
    pre = pre.png
    post = post.png
    truth = truth.png          ; optional, enables eval
    out = results

    [segmentation]
    n1 = 6000                  ; training superpixels
    n7 = 3000                  ; inference superpixels
    compactness = 10

    [region]
    x0 = 0
    y0 = 0
    x1 = 600
    y1 = 260

    [train]
    learning_rate = 0.001
    epochs = 25000
    ...                        ; n3..n6, eta, rho, w_* (see TrainConfig)

    [pipeline]
    backend = neural           ; or gaussian | student_t | clayton | frank
    seed = 0
    hidden_width = 20
    hidden_layers = 5

    [synth]
    width = 256
    height = 256
    dependence = gaussian(0.85)
    change_regions = 140,140,236,236 ; semicolon-separated rectangles
    marginal_pre = normal(128,30)
    marginal_post = normal(96,40)
    noise_sigma = 0
    seed = 7
"""

from __future__ import annotations

import configparser
import re
from dataclasses import dataclass
from pathlib import Path

from . import classical
from .losses import LossWeights
from .segmentation import TrainingRegion
from .synth import MarginalSpec, SynthSpec
from .training import TrainConfig

BACKENDS = ("neural", "gaussian", "student_t", "clayton", "frank")


@dataclass(frozen=True)
class PipelineConfig:
    pre_path: Path
    post_path: Path
    truth_path: Path | None
    out_dir: Path
    region: TrainingRegion
    n1: int
    n7: int
    compactness: float
    train: TrainConfig
    backend: str
    seed: int
    hidden_width: int
    hidden_layers: int
    synth: SynthSpec | None

    def __post_init__(self):
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.n1 < 2 or self.n7 < 2:
            raise ValueError("superpixel counts must be at least 2")
        if self.hidden_width < 1 or self.hidden_layers < 1:
            raise ValueError("network shape must be positive")

    @property
    def layer_sizes(self) -> tuple[int, ...]:
        return (2, *([self.hidden_width] * self.hidden_layers), 1)


def parse_dependence(text: str) -> classical.CopulaFamily:
    """e.g. ``gaussian(0.85)``, ``student_t(0.5, 4)``, ``clayton(2)``."""
    m = re.fullmatch(r"\s*(\w+)\s*\(([^)]*)\)\s*", text)
    if not m:
        raise ValueError(f"cannot parse dependence spec {text!r}")
    family = m.group(1)
    args = [float(a) for a in m.group(2).split(",") if a.strip()]
    if family == "gaussian" and len(args) == 1:
        return classical.gaussian(args[0])
    if family == "student_t" and len(args) == 2:
        return classical.student_t(args[0], args[1])
    if family in ("clayton", "frank") and len(args) == 1:
        return classical.CopulaFamily(family, theta=args[0])
    raise ValueError(f"bad dependence spec {text!r}")


def _parse_regions(text: str) -> tuple[tuple[int, int, int, int], ...]:
    regions = []
    for chunk in text.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        parts = [int(p) for p in chunk.split(",")]
        if len(parts) != 4:
            raise ValueError(f"change region needs x0,y0,x1,y1: {chunk!r}")
        regions.append(tuple(parts))
    return tuple(regions)


def _train_config(sec) -> TrainConfig:
    weights = LossWeights(
        boundary=sec.getfloat("w_boundary", 2.0),
        integration=sec.getfloat("w_integration", 0.3),
        nonneg=sec.getfloat("w_nonneg", 1.0),
        ml=sec.getfloat("w_ml", 0.1),
        observation=sec.getfloat("w_observation", 5.0),
    )
    return TrainConfig(
        learning_rate=sec.getfloat("learning_rate", 0.001),
        epochs=sec.getint("epochs", 25000),
        seed=sec.getint("seed", 0),
        n3=sec.getint("n3", 400),
        n4=sec.getint("n4", 256),
        n5=sec.getint("n5", 256),
        n6=sec.getint("n6", 100),
        eta=sec.getfloat("eta", 10.0),
        rho=sec.getfloat("rho", 1e-9),
        weights=weights,
    )


def _synth_spec(sec) -> SynthSpec:
    return SynthSpec(
        width=sec.getint("width", 256),
        height=sec.getint("height", 256),
        dependence=parse_dependence(sec.get("dependence", "gaussian(0.85)")),
        change_regions=_parse_regions(sec.get("change_regions", "")),
        noise_sigma=sec.getfloat("noise_sigma", 0.0),
        marginal_pre=MarginalSpec.parse(sec.get("marginal_pre", "normal(128,30)")),
        marginal_post=MarginalSpec.parse(sec.get("marginal_post", "normal(128,30)")),
        seed=sec.getint("seed", 0),
    )


def load_config(path: str | Path) -> PipelineConfig:
    """Parse a pipeline config file; raises ValueError on malformed input."""
    path = Path(path)
    if not path.exists():
        raise ValueError(f"no such config file: {path}")
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    try:
        parser.read(path)
    except configparser.Error as exc:
        raise ValueError(f"malformed config {path}: {exc}") from exc

    base = path.parent

    def _path(raw: str | None) -> Path | None:
        if raw is None:
            return None
        p = Path(raw)
        return p if p.is_absolute() else base / p

    paths = parser["paths"] if parser.has_section("paths") else {}
    pre = _path(paths.get("pre")) or base / "pre.png"
    post = _path(paths.get("post")) or base / "post.png"
    truth = _path(paths.get("truth"))
    out = _path(paths.get("out")) or base / "out"

    seg = parser["segmentation"] if parser.has_section("segmentation") else _empty(parser)
    region_sec = parser["region"] if parser.has_section("region") else None
    if region_sec is None:
        region = TrainingRegion(0, 0, 1, 1)  # placeholder; train will reject
    else:
        region = TrainingRegion(
            x0=region_sec.getint("x0"),
            y0=region_sec.getint("y0"),
            x1=region_sec.getint("x1"),
            y1=region_sec.getint("y1"),
        )
    pipe = parser["pipeline"] if parser.has_section("pipeline") else _empty(parser)
    train_sec = parser["train"] if parser.has_section("train") else _empty(parser)
    synth = _synth_spec(parser["synth"]) if parser.has_section("synth") else None

    return PipelineConfig(
        pre_path=pre,
        post_path=post,
        truth_path=truth,
        out_dir=out,
        region=region,
        n1=seg.getint("n1", 6000),
        n7=seg.getint("n7", 3000),
        compactness=seg.getfloat("compactness", 10.0),
        train=_train_config(train_sec),
        backend=pipe.get("backend", "neural"),
        seed=pipe.getint("seed", 0),
        hidden_width=pipe.getint("hidden_width", 20),
        hidden_layers=pipe.getint("hidden_layers", 5),
        synth=synth,
    )


def _empty(parser: configparser.ConfigParser):
    if not parser.has_section("_defaults"):
        parser.add_section("_defaults")
    return parser["_defaults"]
