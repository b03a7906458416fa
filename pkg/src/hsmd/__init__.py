"""Hybrid motion detection: background subtraction feeding a 3-layer LIF
spiking network, plus a CDnet-style benchmark harness."""

from .background import BsConfig, bg_apply, bg_init, frame_diff, lsbp_descriptor
from .cdnet import discover_dataset, frame_confusion, run_video
from .config import ConfigError, PipelineConfig, load_config
from .frames import load_frame, to_grayscale, write_mask
from .metrics import (
    Confusion,
    MetricSet,
    accumulate,
    compute_metrics,
    rank_across_categories,
    rank_methods,
)
from .pipeline import Pipeline, RunReport, run
from .postfilter import AveragingKernel, average_filter, binarise, normalise
from .snn import (
    Network,
    NeuronParams,
    NeuronState,
    SynapseWeights,
    encode_currents,
    lif_step,
    network_build,
    network_step,
    run_frame,
)

__version__ = "0.1.0"
