"""Confidence calibration analysis for classifiers evaluated across languages."""

__version__ = "0.1.0"

from .core import (
    AggregateReport,
    BinningScheme,
    BinningSpec,
    BinStats,
    CalibrationReport,
    LabeledPrediction,
    PredictionSet,
    accuracy,
    aggregate,
    assign_bins,
    calibration_report,
    ece,
    nll,
    predict,
    reliability,
    softmax_with_temperature,
)
from .langfeatures import (
    LanguageProfile,
    Vocabulary,
    build_vocab,
    correlate_factors,
    pearson,
    subword_overlap,
    syntactic_similarity,
)
from .smoothing import (
    FeatureDataset,
    LinearSoftmaxModel,
    SmoothingSpec,
    TrainConfig,
    continue_finetune,
    ls_cross_entropy,
    ls_gradient,
    smooth_labels,
    train,
)
from .synthetic import generate_synthetic
from .temperature import TemperatureModel, apply_temperature, fit_temperature, nll_grad_T
