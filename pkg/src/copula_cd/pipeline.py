"""Orchestration of the train / infer / eval flow behind the CLI.

Training: co-segment with n1 superpixels, select the training rectangle,
extract paired mean features, freeze KDE marginal tables, train the
copula network, and write the checkpoint plus loss CSV and figures.

Inference: co-segment with n7 superpixels, extract features, transform
them through the *checkpoint's* tables (never refit on test data), score
each superpixel pair with the density backend, cluster the -log10 scores,
and write the mask, score CSV, and figures.

All outputs land in the config's out directory.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import classical, report
from .checkpoint import Checkpoint, load_checkpoint, save_checkpoint
from .clustering import fcm_two_class, labels_to_mask, negative_log_scores
from .config import PipelineConfig
from .marginals import CdfTable, fit_kde_cdf, pit
from .metrics import MetricsReport, compute_metrics, confusion, save_report
from .network import forward_with_derivs, init_net
from .raster import (
    BiTemporalPair,
    ChangeMap,
    load_change_map,
    load_raster,
    save_change_map,
    save_raster,
    to_intensity,
)
from .segmentation import (
    SuperpixelMap,
    TrainingRegion,
    co_slic,
    extract_features,
    select_training_superpixels,
)
from .synth import generate
from .training import LOSS_COLUMNS, train


@dataclass(frozen=True)
class TrainResult:
    checkpoint_path: Path
    history_path: Path
    history: np.ndarray
    n_training_pairs: int


@dataclass(frozen=True)
class InferResult:
    mask: ChangeMap
    mask_path: Path
    scores_path: Path
    superpixels: SuperpixelMap
    u: np.ndarray
    v: np.ndarray
    pdf: np.ndarray
    scores: np.ndarray
    labels: np.ndarray
    backend: dict


def load_pair(cfg: PipelineConfig) -> BiTemporalPair:
    pre = to_intensity(load_raster(cfg.pre_path))
    post = to_intensity(load_raster(cfg.post_path))
    return BiTemporalPair(pre=pre, post=post)


def run_synth(cfg: PipelineConfig) -> dict[str, Path]:
    """Generate the configured scene; writes pre/post/truth image files."""
    if cfg.synth is None:
        raise ValueError("config has no [synth] section")
    pair, truth = generate(cfg.synth)
    truth_path = cfg.truth_path or cfg.out_dir / "truth.png"
    for p in (cfg.pre_path, cfg.post_path, truth_path):
        p.parent.mkdir(parents=True, exist_ok=True)
    save_raster(pair.pre, cfg.pre_path)
    save_raster(pair.post, cfg.post_path)
    save_change_map(truth, truth_path)
    return {"pre": cfg.pre_path, "post": cfg.post_path, "truth": truth_path}


def _train_core(cfg: PipelineConfig, pair: BiTemporalPair, spmap: SuperpixelMap):
    ids = select_training_superpixels(spmap, cfg.region)
    g1 = extract_features(pair.pre, spmap, ids)
    g2 = extract_features(pair.post, spmap, ids)
    table1 = fit_kde_cdf(g1)
    table2 = fit_kde_cdf(g2)
    net = init_net(cfg.layer_sizes, cfg.train.seed)
    net, history = train(net, g1, g2, table1, table2, cfg.train)
    return net, table1, table2, g1, g2, history


def _write_history(history: np.ndarray, path: Path) -> None:
    with open(path, "w") as fh:
        fh.write("epoch," + ",".join(LOSS_COLUMNS) + "\n")
        for epoch, row in enumerate(history):
            fh.write(f"{epoch}," + ",".join(format(x, ".17g") for x in row) + "\n")


def run_train(
    cfg: PipelineConfig, checkpoint_path: Path | None = None
) -> TrainResult:
    pair = load_pair(cfg)
    cfg.region.check_bounds(pair.width, pair.height)
    spmap = co_slic(pair, cfg.n1, cfg.compactness, cfg.seed)
    net, table1, table2, g1, g2, history = _train_core(cfg, pair, spmap)

    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    ckpt_path = checkpoint_path or out / "model.ckpt"
    meta = {
        "n1": cfg.n1,
        "compactness": cfg.compactness,
        "region": [cfg.region.x0, cfg.region.y0, cfg.region.x1, cfg.region.y1],
        "seed": cfg.seed,
        "n_training_pairs": len(g1),
    }
    save_checkpoint(net, table1, table2, cfg.train, ckpt_path, meta=meta)
    history_path = out / "loss_history.csv"
    _write_history(history, history_path)
    if len(history):
        report.save_loss_curves(history, out / "loss_curves.png")
    report.save_net_surface(net, out / "copula_surface.png", rho=cfg.train.rho)
    return TrainResult(
        checkpoint_path=ckpt_path,
        history_path=history_path,
        history=history,
        n_training_pairs=len(g1),
    )


def _density_backend(
    cfg: PipelineConfig,
    ckpt: Checkpoint,
    pair: BiTemporalPair,
    spmap_infer: SuperpixelMap,
):
    """Return (density function over PIT pairs, backend description)."""
    if cfg.backend == "neural":
        rho = ckpt.config.rho

        def density(u, v):
            return forward_with_derivs(ckpt.net, u, v, rho=rho).pdf

        return density, {"backend": "neural", "layer_sizes": list(ckpt.net.layer_sizes)}

    # classical: refit the family on the training pairs recorded in the
    # checkpoint meta, transformed through the checkpoint tables
    meta = ckpt.meta
    region_vals = meta.get("region")
    if region_vals is None:
        raise ValueError("checkpoint lacks training metadata for classical refit")
    region = TrainingRegion(*region_vals)
    spmap_train = (
        spmap_infer
        if meta["n1"] == cfg.n7
        else co_slic(pair, meta["n1"], meta.get("compactness", 10.0), meta.get("seed", 0))
    )
    ids = select_training_superpixels(spmap_train, region)
    g1 = extract_features(pair.pre, spmap_train, ids)
    g2 = extract_features(pair.post, spmap_train, ids)
    fam = classical.fit(cfg.backend, pit(g1, ckpt.table1), pit(g2, ckpt.table2))
    rho_floor = ckpt.config.rho

    def density(u, v):
        return np.maximum(classical.pdf(fam, u, v), rho_floor)

    return density, {"backend": cfg.backend, **fam.describe()}


def _infer_core(
    cfg: PipelineConfig,
    ckpt: Checkpoint,
    pair: BiTemporalPair,
    spmap: SuperpixelMap,
):
    z1 = extract_features(pair.pre, spmap)
    z2 = extract_features(pair.post, spmap)
    u = pit(z1, ckpt.table1)
    v = pit(z2, ckpt.table2)
    density, backend_desc = _density_backend(cfg, ckpt, pair, spmap)
    pdf = np.asarray(density(u, v))
    scores = negative_log_scores(pdf)
    fcm = fcm_two_class(scores, seed=cfg.seed)
    mask = labels_to_mask(spmap, fcm.labels)
    return u, v, pdf, scores, fcm.labels, mask, backend_desc


def _write_infer_outputs(
    cfg: PipelineConfig, spmap, u, v, pdf, scores, labels, mask, backend_desc
) -> InferResult:
    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    mask_path = out / "change_map.png"
    save_change_map(mask, mask_path)
    scores_path = out / "scores.csv"
    with open(scores_path, "w") as fh:
        fh.write("superpixel_id,u,v,pdf,score,label\n")
        for i in range(len(u)):
            fh.write(
                f"{i},{u[i]:.17g},{v[i]:.17g},{pdf[i]:.17g},"
                f"{scores[i]:.17g},{labels[i]}\n"
            )
    (out / "infer_meta.json").write_text(json.dumps(backend_desc, indent=2) + "\n")
    report.save_score_figure(u, v, scores, labels, out / "score_split.png")
    truth = None
    if cfg.truth_path is not None and Path(cfg.truth_path).exists():
        truth = load_change_map(cfg.truth_path)
    report.save_mask_figure(mask, out / "change_map_figure.png", truth=truth)
    return InferResult(
        mask=mask,
        mask_path=mask_path,
        scores_path=scores_path,
        superpixels=spmap,
        u=u,
        v=v,
        pdf=pdf,
        scores=scores,
        labels=labels,
        backend=backend_desc,
    )


def run_infer(cfg: PipelineConfig, checkpoint_path: Path | str) -> InferResult:
    ckpt = load_checkpoint(checkpoint_path)
    pair = load_pair(cfg)
    spmap = co_slic(pair, cfg.n7, cfg.compactness, cfg.seed)
    u, v, pdf, scores, labels, mask, backend_desc = _infer_core(cfg, ckpt, pair, spmap)
    return _write_infer_outputs(cfg, spmap, u, v, pdf, scores, labels, mask, backend_desc)


def run_eval(
    pred_path: Path | str, truth_path: Path | str, out_dir: Path | str
) -> MetricsReport:
    pred = load_change_map(pred_path)
    truth = load_change_map(truth_path)
    rep = compute_metrics(confusion(pred, truth))
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_report(rep, out / "metrics.json")
    return rep


def run_all(cfg: PipelineConfig) -> tuple[TrainResult, InferResult, MetricsReport | None]:
    """train -> infer -> eval (eval only when a truth path is configured).

    When n1 == n7 the shared segmentation is computed once and reused.
    """
    pair = load_pair(cfg)
    cfg.region.check_bounds(pair.width, pair.height)
    spmap1 = co_slic(pair, cfg.n1, cfg.compactness, cfg.seed)
    net, table1, table2, g1, g2, history = _train_core(cfg, pair, spmap1)

    out = cfg.out_dir
    out.mkdir(parents=True, exist_ok=True)
    ckpt_path = out / "model.ckpt"
    meta = {
        "n1": cfg.n1,
        "compactness": cfg.compactness,
        "region": [cfg.region.x0, cfg.region.y0, cfg.region.x1, cfg.region.y1],
        "seed": cfg.seed,
        "n_training_pairs": len(g1),
    }
    save_checkpoint(net, table1, table2, cfg.train, ckpt_path, meta=meta)
    history_path = out / "loss_history.csv"
    _write_history(history, history_path)
    if len(history):
        report.save_loss_curves(history, out / "loss_curves.png")
    report.save_net_surface(net, out / "copula_surface.png", rho=cfg.train.rho)
    train_result = TrainResult(
        checkpoint_path=ckpt_path,
        history_path=history_path,
        history=history,
        n_training_pairs=len(g1),
    )

    ckpt = load_checkpoint(ckpt_path)
    spmap7 = spmap1 if cfg.n7 == cfg.n1 else co_slic(pair, cfg.n7, cfg.compactness, cfg.seed)
    u, v, pdf, scores, labels, mask, backend_desc = _infer_core(cfg, ckpt, pair, spmap7)
    infer_result = _write_infer_outputs(
        cfg, spmap7, u, v, pdf, scores, labels, mask, backend_desc
    )

    rep = None
    if cfg.truth_path is not None and Path(cfg.truth_path).exists():
        rep = run_eval(infer_result.mask_path, cfg.truth_path, out)
    return train_result, infer_result, rep
