"""Short-time Fourier transform and overlap-add inverse.

Analysis frames are Hann-windowed and exist only where a full window fits,
so a clip of length L yields floor((L - window) / hop) + 1 frames and the
65-bin grid for the default 128-sample window.  Synthesis inverse-transforms
each frame, overlap-adds at the frame offsets, and divides every sample by
the accumulated analysis-window sum there, which reconstructs the covered
span exactly for unmodified spectrograms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from specsep.audio_io import AudioClip

# Frames per block when streaming large hop-1 spectrograms through the FFT.
_BLOCK_FRAMES = 32768

WINDOW_SUM_EPS = 1e-8


def hann_window(window_size: int) -> np.ndarray:
    """Periodic Hann window: w[n] = 0.5 * (1 - cos(2 pi n / N))."""
    if window_size < 2:
        raise ValueError(f"window_size must be >= 2, got {window_size}")
    n = np.arange(window_size)
    return 0.5 * (1.0 - np.cos(2.0 * np.pi * n / window_size))


_WINDOWS = {"hann": hann_window}


@dataclass(frozen=True)
class StftConfig:
    window_size: int = 128
    hop: int = 1
    window: str = "hann"

    def __post_init__(self):
        if self.window_size < 2 or self.window_size % 2 != 0:
            raise ValueError(f"window_size must be even and >= 2, got {self.window_size}")
        if not 1 <= self.hop <= self.window_size:
            raise ValueError(f"hop must be in [1, window_size], got {self.hop}")
        if self.window not in _WINDOWS:
            raise ValueError(f"unknown window {self.window!r}")

    @property
    def bins(self) -> int:
        return self.window_size // 2 + 1

    def window_values(self) -> np.ndarray:
        return _WINDOWS[self.window](self.window_size)

    def frame_count(self, num_samples: int) -> int:
        if num_samples < self.window_size:
            return 0
        return (num_samples - self.window_size) // self.hop + 1


@dataclass
class ComplexSpectrogram:
    """bins x frames grid of complex STFT values plus its analysis geometry."""

    data: np.ndarray
    config: StftConfig
    sample_rate: int

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.complex128)
        if self.data.ndim != 2:
            raise ValueError(f"data must be 2-D, got shape {self.data.shape}")
        if self.data.shape[0] != self.config.bins:
            raise ValueError(
                f"expected {self.config.bins} bins for window_size "
                f"{self.config.window_size}, got {self.data.shape[0]}"
            )
        if not np.all(np.isfinite(self.data)):
            raise ValueError("spectrogram contains non-finite values")

    @property
    def bins(self) -> int:
        return self.data.shape[0]

    @property
    def frames(self) -> int:
        return self.data.shape[1]


def stft_forward(clip: AudioClip, config: StftConfig = StftConfig()) -> ComplexSpectrogram:
    """Forward STFT of a clip.

    Frame t covers samples [t * hop, t * hop + window_size); each frame is
    Hann-windowed and transformed, keeping bins 0 .. window_size / 2.

    Raises:
        ValueError: the clip is shorter than one window.
    """
    x = clip.samples
    win = config.window_size
    hop = config.hop
    n_frames = config.frame_count(len(x))
    if n_frames == 0:
        raise ValueError(
            f"clip of {len(x)} samples is shorter than one {win}-sample window"
        )

    w = config.window_values()
    out = np.empty((config.bins, n_frames), dtype=np.complex128)
    frames_view = np.lib.stride_tricks.sliding_window_view(x, win)[::hop]
    for start in range(0, n_frames, _BLOCK_FRAMES):
        stop = min(start + _BLOCK_FRAMES, n_frames)
        block = frames_view[start:stop] * w
        out[:, start:stop] = np.fft.rfft(block, axis=1).T
    return ComplexSpectrogram(data=out, config=config, sample_rate=clip.sample_rate)


def istft_overlap_add(spec: ComplexSpectrogram) -> AudioClip:
    """Inverse STFT via overlap-add with window-sum normalization.

    Each frame is inverse-transformed (Hermitian extension of the retained
    bins, imaginary residue of the DC and Nyquist cells discarded) and added
    at its offset; every output sample is then divided by the accumulated
    analysis-window sum there.  Samples whose window sum falls below 1e-8
    are set to 0.
    """
    cfg = spec.config
    win = cfg.window_size
    hop = cfg.hop
    n_frames = spec.frames
    length = (n_frames - 1) * hop + win

    w = cfg.window_values()
    acc = np.zeros(length, dtype=np.float64)
    wsum = np.zeros(length, dtype=np.float64)
    for start in range(0, n_frames, _BLOCK_FRAMES):
        stop = min(start + _BLOCK_FRAMES, n_frames)
        block = np.fft.irfft(spec.data[:, start:stop].T, n=win, axis=1)
        for n in range(win):
            lo = start * hop + n
            sl = slice(lo, lo + (stop - start) * hop, hop)
            acc[sl] += block[:, n]
            wsum[sl] += w[n]

    covered = wsum >= WINDOW_SUM_EPS
    out = np.zeros(length, dtype=np.float64)
    out[covered] = acc[covered] / wsum[covered]
    return AudioClip(samples=out, sample_rate=spec.sample_rate)
