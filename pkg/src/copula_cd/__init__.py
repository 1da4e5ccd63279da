"""Heterogeneous change detection via a copula-constrained neural density.

A small fully connected network is trained, under five copula-theoretic
losses, to act as the joint CDF of unchanged superpixel feature pairs;
its mixed second derivative scores how "unchanged" each superpixel pair
looks, and a two-class fuzzy clustering of the scores yields the change
map. Classical copula families are available as drop-in density backends.
"""

from .checkpoint import Checkpoint, CheckpointError, load_checkpoint, save_checkpoint
from .clustering import FcmResult, fcm_two_class, labels_to_mask, negative_log_scores
from .config import PipelineConfig, load_config
from .losses import (
    LossWeights,
    TrainingData,
    loss_boundary,
    loss_integration,
    loss_ml,
    loss_nonneg,
    loss_observation,
    total_loss,
)
from .marginals import CdfTable, empirical_joint_cdf, fit_kde_cdf, pit
from .metrics import ConfusionCounts, MetricsReport, compute_metrics, confusion
from .network import CopulaEval, CopulaNet, forward_with_derivs, init_net
from .raster import (
    BiTemporalPair,
    ChangeMap,
    RasterImage,
    load_change_map,
    load_raster,
    save_change_map,
    save_raster,
    to_intensity,
)
from .segmentation import (
    FeatureSet,
    SuperpixelMap,
    TrainingRegion,
    co_slic,
    extract_features,
    select_training_superpixels,
)
from .synth import MarginalSpec, SynthSpec, generate
from .training import DivergenceError, TrainConfig, train

__version__ = "0.1.0"
