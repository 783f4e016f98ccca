"""Monaural two-speaker source separation on complex spectrograms.

A small dense network is trained to map windows of a mixture's magnitude and
phase spectrograms to the corresponding windows of the two source
spectrograms.  Audio is rebuilt by sliding the network over every window
position, averaging the overlapping magnitude predictions and taking the
circular mean of the overlapping phase predictions, then inverting the STFT.
Separation quality is scored with an SDR/SIR/SAR decomposition, and an ideal
binary mask provides the oracle reference.
"""

from specsep.audio_io import (
    AudioClip,
    EmptyAudioError,
    SampleRateMismatchError,
    SilentSignalError,
    UnsupportedWavError,
    decimate,
    equalize_and_mix,
    read_wav,
    write_wav,
)
from specsep.stft import (
    ComplexSpectrogram,
    StftConfig,
    hann_window,
    istft_overlap_add,
    stft_forward,
)
from specsep.dataset import (
    MagPhaseGrid,
    TrainingPair,
    WindowGeometry,
    extract_windows,
    pack_input,
    pack_target,
    split_normalize,
    unpack_output,
)
from specsep.mlp import (
    Mlp,
    ModelFormatError,
    TrainConfig,
    TrainingDivergedError,
    load_model,
    save_model,
    train_sgd,
)
from specsep.resynth import (
    AggregatedSpectra,
    PredictionStack,
    SeparationParams,
    adapt_output_gain,
    aggregate_magnitude,
    circular_mean_phase,
    recombine,
    separate,
    sliding_infer,
)
from specsep.bss_eval import (
    DegenerateReferencesError,
    SeparationMetrics,
    SourceMetrics,
    decompose,
    evaluate_separation,
    metrics,
)
from specsep.oracle import apply_mask, ideal_binary_mask
from specsep.config import RunConfig

__version__ = "0.1.0"
