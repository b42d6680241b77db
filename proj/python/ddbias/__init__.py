"""Double-descent shape/texture bias analysis: Python bindings.

The heavy lifting (training, probing, stylization) lives in the C++ CLI;
this package exposes the analysis core: time-series segmentation, Pearson
statistics, bias-fraction estimation, label-noise injection, the
procedural probe generator, and read access to run stores.
"""

from ._core import (
    ActivationMatrix,
    BaselineMode,
    BiasEstimate,
    BiasFactor,
    CorrelationVector,
    EpochRange,
    GrayImage,
    NoisyLabelSet,
    PhaseConfig,
    PhaseCorrelation,
    PhaseCorrelationReport,
    PhaseSegmentation,
    RunStore,
    TimeSeries,
    bias_fractions,
    fill_histogram_features,
    inject_label_noise,
    mask_downsample_features,
    moving_average,
    neuron_pair_correlation,
    pearson,
    phase_correlations,
    render_synthetic_image,
    segment_phases,
    sync_score,
)

__all__ = [
    "ActivationMatrix",
    "BaselineMode",
    "BiasEstimate",
    "BiasFactor",
    "CorrelationVector",
    "EpochRange",
    "GrayImage",
    "NoisyLabelSet",
    "PhaseConfig",
    "PhaseCorrelation",
    "PhaseCorrelationReport",
    "PhaseSegmentation",
    "RunStore",
    "TimeSeries",
    "bias_fractions",
    "fill_histogram_features",
    "inject_label_noise",
    "mask_downsample_features",
    "moving_average",
    "neuron_pair_correlation",
    "pearson",
    "phase_correlations",
    "render_synthetic_image",
    "segment_phases",
    "sync_score",
]
