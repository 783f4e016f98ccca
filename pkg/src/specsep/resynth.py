"""Sliding-window inference and probabilistic re-synthesis.

The trained network predicts one normalized magnitude/phase window per source
for every hop-1 position of the analysis window.  Overlap means each
spectrogram column collects up to `width` independent predictions; those are
reduced to a single complex spectrogram per source by averaging magnitudes
arithmetically and phases circularly, then denormalizing and inverting the
STFT.

Optionally the raw network outputs are gain-adapted first: each output unit's
mean over all windows is subtracted, which removes the standing positive
offset a sigmoid output develops.  Magnitudes are floored at zero afterwards,
and phases shifted out of range simply wrap when converted to angles.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from specsep.audio_io import AudioClip
from specsep.dataset import (
    TWO_PI,
    MagPhaseGrid,
    WindowGeometry,
    pack_input,
    split_normalize,
)
from specsep.mlp import Mlp
from specsep.stft import ComplexSpectrogram, StftConfig, istft_overlap_add, stft_forward

log = logging.getLogger(__name__)

DEGENERATE_EPS = 1e-9


@dataclass
class PredictionStack:
    """All per-window predictions for one source, lined up by absolute frame.

    mag and phase are (frames, bins, width) arrays: slot [t, :, k] holds the
    prediction for frame t made by the window that sees t at offset k.  Slots
    with no covering window are zero and flagged false in valid, which is
    (frames, width).  phase is in radians, wrapped to [0, 2*pi).
    """

    mag: np.ndarray
    phase: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        if self.mag.ndim != 3 or self.mag.shape != self.phase.shape:
            raise ValueError(
                f"mag {self.mag.shape} and phase {self.phase.shape} must be "
                "matching 3-D arrays"
            )
        frames, _, width = self.mag.shape
        if self.valid.shape != (frames, width) or self.valid.dtype != np.bool_:
            raise ValueError(
                f"valid must be boolean of shape {(frames, width)}, "
                f"got {self.valid.dtype} {self.valid.shape}"
            )
        if not (np.all(np.isfinite(self.mag)) and np.all(np.isfinite(self.phase))):
            raise ValueError("stack contains non-finite values")
        if np.any(self.mag < 0.0):
            raise ValueError("stack magnitudes must be nonnegative")
        if np.any(self.phase < 0.0) or np.any(self.phase >= TWO_PI):
            raise ValueError("stack phases must lie in [0, 2*pi)")
        if frames and np.any(self.count < 1):
            raise ValueError("every frame needs at least one prediction")

    @property
    def frames(self) -> int:
        return self.mag.shape[0]

    @property
    def bins(self) -> int:
        return self.mag.shape[1]

    @property
    def width(self) -> int:
        return self.mag.shape[2]

    @property
    def count(self) -> np.ndarray:
        """Number of covering windows per frame, in [1, width]."""
        return self.valid.sum(axis=1)


@dataclass
class AggregatedSpectra:
    """Per-cell reduction of a PredictionStack, in spectrogram orientation.

    mag is the per-cell mean magnitude (still normalized), phase the circular
    mean angle in (-pi, pi], both bins x frames.  resultant_len in [0, 1] is
    the mean resultant vector length of the contributing phases: 1 when all
    windows agreed on the angle, near 0 when they scattered.
    """

    mag: np.ndarray
    phase: np.ndarray
    resultant_len: np.ndarray

    def __post_init__(self):
        if not (self.mag.shape == self.phase.shape == self.resultant_len.shape):
            raise ValueError("aggregated grids must share one shape")
        if self.mag.ndim != 2:
            raise ValueError("aggregated grids must be 2-D (bins x frames)")
        if np.any(self.mag < 0.0):
            raise ValueError("aggregated magnitude must be nonnegative")
        if np.any(self.phase <= -np.pi) or np.any(self.phase > np.pi):
            raise ValueError("aggregated phase must lie in (-pi, pi]")
        if np.any(self.resultant_len < 0.0) or np.any(self.resultant_len > 1.0):
            raise ValueError("resultant_len must lie in [0, 1]")


@dataclass(frozen=True)
class SeparationParams:
    """Everything separate() needs besides the model and the mixture.

    The three scales are the normalization constants fitted at training time;
    the mixture is normalized with mixture_scale and each source's output is
    denormalized with its own scale.
    """

    stft: StftConfig
    geometry: WindowGeometry
    mixture_scale: float
    source1_scale: float
    source2_scale: float
    adapt: bool = True

    def __post_init__(self):
        for name in ("mixture_scale", "source1_scale", "source2_scale"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a positive finite number, got {value}")


def adapt_output_gain(raw: np.ndarray) -> np.ndarray:
    """Subtract each output unit's mean over all windows.

    raw is (windows, output_size).  Returns a new array whose columns all have
    zero mean; no flooring or wrapping happens here.
    """
    raw = np.asarray(raw, dtype=np.float64)
    if raw.ndim != 2 or raw.shape[0] < 1:
        raise ValueError(f"expected a (windows, units) array, got shape {raw.shape}")
    return raw - raw.mean(axis=0)


def sliding_infer(
    model: Mlp,
    mixture: MagPhaseGrid,
    geom: WindowGeometry,
    adapt: bool = True,
    block: int = 4096,
) -> tuple[PredictionStack, PredictionStack]:
    """Run the model over every hop-1 window and stack the predictions.

    Returns one PredictionStack per source.  With adapt set, raw outputs are
    mean-centered per unit and the magnitude halves floored at zero before
    stacking; otherwise the network outputs are used as-is.

    Raises:
        ValueError: too few frames, or model geometry does not match the
            grid and window shape.
    """
    bins, frames = mixture.bins, mixture.frames
    width = geom.width
    if frames < width:
        raise ValueError(f"grid has {frames} frames, need at least {width}")
    d = bins * width
    if model.geometry[0] != 2 * d or model.geometry[-1] != 4 * d:
        raise ValueError(
            f"model geometry {model.geometry} does not fit {bins} bins x "
            f"{width} frame windows (need {2 * d} -> {4 * d})"
        )

    n_windows = frames - width + 1
    raw = np.empty((n_windows, 4 * d))
    for lo in range(0, n_windows, block):
        hi = min(lo + block, n_windows)
        batch = np.empty((hi - lo, 2 * d))
        for row, start in enumerate(range(lo, hi)):
            batch[row] = pack_input(
                mixture.mag[:, start : start + width],
                mixture.phase[:, start : start + width],
            )
        raw[lo:hi] = model.forward_batch(batch)

    if adapt:
        raw = adapt_output_gain(raw)
        np.maximum(raw[:, :d], 0.0, out=raw[:, :d])
        np.maximum(raw[:, 2 * d : 3 * d], 0.0, out=raw[:, 2 * d : 3 * d])

    stacks = []
    valid = np.zeros((frames, width), dtype=bool)
    for k in range(width):
        valid[k : k + n_windows, k] = True
    for mag_cols, phase_cols in ((raw[:, :d], raw[:, d : 2 * d]),
                                 (raw[:, 2 * d : 3 * d], raw[:, 3 * d :])):
        # Column blocks are packed frame-major, so a (width, bins) reshape
        # puts the in-window frame offset first.
        mags = mag_cols.reshape(n_windows, width, bins)
        theta = np.mod(phase_cols.reshape(n_windows, width, bins) * TWO_PI, TWO_PI)
        theta[theta >= TWO_PI] = 0.0
        stack_mag = np.zeros((frames, bins, width))
        stack_phase = np.zeros((frames, bins, width))
        for k in range(width):
            stack_mag[k : k + n_windows, :, k] = mags[:, k, :]
            stack_phase[k : k + n_windows, :, k] = theta[:, k, :]
        stacks.append(PredictionStack(stack_mag, stack_phase, valid.copy()))
    return stacks[0], stacks[1]


def aggregate_magnitude(stack: PredictionStack) -> np.ndarray:
    """Mean magnitude per cell over however many windows actually covered it.

    Returns a (bins, frames) array.
    """
    total = (stack.mag * stack.valid[:, None, :]).sum(axis=2)
    return (total / stack.count[:, None]).T


def circular_mean_phase(
    stack: PredictionStack,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Circular mean of the stacked phase angles, per cell.

    Each angle becomes a unit vector; the vectors are summed and the mean
    direction taken with atan2.  Returns (phase, resultant_len, degenerate):
    phase (bins, frames) in (-pi, pi], resultant_len (bins, frames) in [0, 1],
    and the number of cells whose vector sum nearly cancelled (those get
    phase 0).
    """
    mask = stack.valid[:, None, :]
    x = (np.cos(stack.phase) * mask).sum(axis=2)
    y = (np.sin(stack.phase) * mask).sum(axis=2)
    length = np.hypot(x, y)
    degenerate = length < DEGENERATE_EPS
    phase = np.arctan2(y, x)
    phase[degenerate] = 0.0
    phase[phase == -np.pi] = np.pi
    resultant = np.minimum(length / stack.count[:, None], 1.0)
    return phase.T, resultant.T, int(degenerate.sum())


def recombine(
    mag: np.ndarray,
    phase: np.ndarray,
    mag_scale: float,
    config: StftConfig,
    sample_rate: int,
) -> ComplexSpectrogram:
    """Rebuild a complex spectrogram from averaged magnitude and phase.

    mag is in normalized units and is scaled back to spectral units by
    mag_scale; phase is in radians.
    """
    mag = np.asarray(mag, dtype=np.float64)
    phase = np.asarray(phase, dtype=np.float64)
    if mag.shape != phase.shape:
        raise ValueError(f"shape mismatch: mag {mag.shape} vs phase {phase.shape}")
    data = mag_scale * mag * np.exp(1j * phase)
    return ComplexSpectrogram(data, config, sample_rate)


def separate(
    model: Mlp, mixture: AudioClip, params: SeparationParams
) -> tuple[AudioClip, AudioClip, AggregatedSpectra, AggregatedSpectra]:
    """Split a mixture into two estimated sources.

    Runs the full chain: STFT, normalization with the training-time mixture
    scale, sliding-window inference (with optional gain adaptation),
    magnitude and circular-phase aggregation, denormalized recombination,
    and inverse STFT.  Deterministic for a given model and input.

    Returns (source1, source2, spectra1, spectra2); the AggregatedSpectra
    are kept around for diagnostics and plotting.
    """
    needed = params.stft.window_size + (params.geometry.width - 1) * params.stft.hop
    if len(mixture) < needed:
        raise ValueError(
            f"mixture has {len(mixture)} samples, need at least {needed} for "
            f"one {params.geometry.width}-frame window"
        )
    spec = stft_forward(mixture, params.stft)
    grid = split_normalize(spec, scale=params.mixture_scale)
    stack1, stack2 = sliding_infer(model, grid, params.geometry, adapt=params.adapt)
    log.info(
        "separating %d frames via %d windows (adaptation %s)",
        grid.frames,
        grid.frames - params.geometry.width + 1,
        "on" if params.adapt else "off",
    )

    clips = []
    spectra = []
    for stack, scale in ((stack1, params.source1_scale), (stack2, params.source2_scale)):
        mag = aggregate_magnitude(stack)
        phase, resultant, degenerate = circular_mean_phase(stack)
        if degenerate:
            log.info("%d cells had fully cancelling phases", degenerate)
        spec_out = recombine(mag, phase, scale, params.stft, mixture.sample_rate)
        clips.append(istft_overlap_add(spec_out))
        spectra.append(AggregatedSpectra(mag, phase, resultant))
    return clips[0], clips[1], spectra[0], spectra[1]
