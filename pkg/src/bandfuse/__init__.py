"""Multi-band heterodyne encoding and fusion for full-spectrum audio.

Wide-band recordings (e.g. ultrasonic bat calls at 250 kHz) carry most of
their information above the 8 kHz ceiling of typical 16 kHz audio encoders.
This package splits the full spectrum into encoder-compatible basebands via
heterodyne down-mixing, encodes each band into a fixed-length functional,
and fuses the band functionals with one of five trainable strategies. It
also ships the baseband and time-expansion baselines, representation
similarity analyses, and an experiment harness with a CLI.
"""

from bandfuse.signal_io import AudioClip, DatasetManifest, load_clip, load_manifest
from bandfuse.bands import (
    BandPlan,
    BandSignal,
    compute_band_plan,
    decompose,
    extract_band,
    heterodyne_to_baseband,
    resample_to_model,
    time_expand,
    to_baseband,
)
from bandfuse.encoder import (
    EncoderHandle,
    FrameEmbeddings,
    Functional,
    HandcraftedFeatures,
    LogMelEncoder,
    encode,
    handcrafted,
    pool_functional,
)
from bandfuse.fusion import (
    BandFeatureSet,
    FusionConfig,
    FusionModel,
    load_model,
    predict,
    save_model,
    train,
)
from bandfuse.analysis import band_similarity, class_separation, cosine
from bandfuse.bridge import ExternalEncoder
from bandfuse.harness import ExperimentSpec, ResultRow, gain_over_baseband, run_experiment

__version__ = "0.1.0"

__all__ = [
    "AudioClip",
    "BandFeatureSet",
    "BandPlan",
    "BandSignal",
    "DatasetManifest",
    "EncoderHandle",
    "ExperimentSpec",
    "ExternalEncoder",
    "FrameEmbeddings",
    "Functional",
    "FusionConfig",
    "FusionModel",
    "HandcraftedFeatures",
    "LogMelEncoder",
    "ResultRow",
    "band_similarity",
    "class_separation",
    "compute_band_plan",
    "cosine",
    "decompose",
    "encode",
    "extract_band",
    "gain_over_baseband",
    "handcrafted",
    "heterodyne_to_baseband",
    "load_clip",
    "load_manifest",
    "load_model",
    "pool_functional",
    "predict",
    "resample_to_model",
    "run_experiment",
    "save_model",
    "time_expand",
    "to_baseband",
    "train",
]
