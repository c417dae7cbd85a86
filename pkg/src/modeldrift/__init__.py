"""Streaming model-drift detection that names the features responsible.

A model trained on a reference window is tested against each new window:
for every feature, the change in how much that feature lowers the model's
masked risk is compared across windows, and a resampling null decides
whether the change is significant.
"""

from .core import (
    ConfigurationError,
    DataError,
    DetectorConfig,
    DimensionError,
    DriftError,
    InsufficientDataError,
    LabeledSample,
    LossKind,
    ProtocolError,
    SampleWindow,
    Standardizer,
    TaskKind,
    mask,
)
from .model import ModelSpec, TrainedModel, fit, predict, subset_risk
from .statistic import FeatureTestResult, SubsetPlan, build_subset_plan, d_hat, delta_term, test_statistic
from .bootstrap import ThresholdSet, bootstrap_thresholds
from .detector import DetectionTrace, DriftEvent, check_window, run_detector
from .baselines import DdmLevel, DdmState, ddm_update, marginal_ks, run_ddm, run_marginal
from .datagen import Generator, GroundTruth, StreamSpec, generate, generate_arrays, load_csv
from .evaluation import average_performance, detection_pr, occlusion_mean, occlusion_score, power_curve

__version__ = "0.1.0"
