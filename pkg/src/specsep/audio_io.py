"""Mono WAV input/output, sample-rate decimation, and mixture synthesis.

All audio is handled as float64 in [-1, 1].  Files are read with
scipy.io.wavfile (16-bit PCM and 32-bit float accepted) and always written
back as 16-bit PCM mono.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from math import gcd
from pathlib import Path

import numpy as np
from scipy.io import wavfile
from scipy.signal import fftconvolve

log = logging.getLogger(__name__)

ANTIALIAS_TAPS = 127
# Cutoff as a fraction of the target sample rate: 0.45 * fs puts the -6 dB
# point at 0.9 of the new Nyquist with the transition band ending just above it.
ANTIALIAS_CUTOFF = 0.45

PCM16_SCALE = 32768.0


class UnsupportedWavError(ValueError):
    """WAV file uses an encoding other than 16-bit PCM or 32-bit float."""


class EmptyAudioError(ValueError):
    """Audio data is zero-length."""


class SilentSignalError(ValueError):
    """A signal required to have nonzero RMS is all zeros."""


class SampleRateMismatchError(ValueError):
    """Two clips that must share a sample rate do not."""


@dataclass
class AudioClip:
    """Mono time-domain signal.

    samples: 1-D float64 array of amplitudes, nominally in [-1, 1].
    sample_rate: sampling frequency in Hz, > 0.
    """

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1:
            raise ValueError(f"samples must be 1-D, got shape {self.samples.shape}")
        if self.sample_rate <= 0:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")

    def __len__(self) -> int:
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate

    def rms(self) -> float:
        if len(self.samples) == 0:
            return 0.0
        return float(np.sqrt(np.mean(self.samples**2)))


def read_wav(path: str | Path) -> AudioClip:
    """Read a WAV file as a mono clip scaled to [-1, 1].

    Accepts 16-bit integer PCM and 32-bit (or 64-bit) float encodings.
    Multichannel audio is averaged down to mono.

    Raises:
        FileNotFoundError: the path does not exist.
        UnsupportedWavError: not a readable WAV, or an unsupported encoding.
        EmptyAudioError: the file holds no samples.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"no such audio file: {path}")
    try:
        rate, data = wavfile.read(str(path))
    except ValueError as exc:
        raise UnsupportedWavError(f"cannot read {path}: {exc}") from exc

    if data.dtype == np.int16:
        samples = data.astype(np.float64) / PCM16_SCALE
    elif data.dtype in (np.float32, np.float64):
        samples = data.astype(np.float64)
    else:
        raise UnsupportedWavError(
            f"{path}: unsupported sample encoding {data.dtype}; "
            "expected 16-bit PCM or 32-bit float"
        )

    if samples.ndim == 2:
        samples = samples.mean(axis=1)
    if samples.size == 0:
        raise EmptyAudioError(f"{path}: WAV data chunk is empty")
    return AudioClip(samples=samples, sample_rate=int(rate))


def write_wav(clip: AudioClip, path: str | Path) -> int:
    """Write a clip as 16-bit PCM mono WAV.

    Samples outside [-1, 1] are clipped; the number of clipped samples is
    logged as a warning and returned so callers can surface it.
    """
    if len(clip.samples) == 0:
        raise EmptyAudioError("refusing to write a zero-length clip")
    if not np.all(np.isfinite(clip.samples)):
        raise ValueError("clip contains non-finite samples")

    scaled = np.round(clip.samples * PCM16_SCALE)
    clipped = int(np.count_nonzero((scaled < -32768) | (scaled > 32767)))
    if clipped:
        log.warning("write_wav: clipped %d out-of-range samples for %s", clipped, path)
    pcm = np.clip(scaled, -32768, 32767).astype(np.int16)
    wavfile.write(str(path), clip.sample_rate, pcm)
    return clipped


def _lowpass_taps(num_taps: int, cutoff_hz: float, rate: float) -> np.ndarray:
    """Linear-phase windowed-sinc low-pass, Hann window, unit DC gain."""
    n = np.arange(num_taps) - (num_taps - 1) / 2
    fc = cutoff_hz / rate
    taps = 2 * fc * np.sinc(2 * fc * n)
    window = 0.5 * (1 - np.cos(2 * np.pi * np.arange(num_taps) / (num_taps - 1)))
    taps = taps * window
    return taps / taps.sum()


def decimate(clip: AudioClip, target_rate: int) -> AudioClip:
    """Resample a clip down to target_rate with anti-alias filtering.

    The rate change must be rational (it always is for integer rates).  A
    127-tap Hann-windowed-sinc FIR with cutoff 0.45 * target_rate runs at the
    upsampled rate before the final downsampling step.  A clip already at the
    target rate is returned unchanged.

    Raises:
        ValueError: target_rate exceeds the clip's rate or is not positive.
    """
    if target_rate <= 0:
        raise ValueError(f"target_rate must be positive, got {target_rate}")
    if target_rate > clip.sample_rate:
        raise ValueError(
            f"cannot decimate upward: clip at {clip.sample_rate} Hz, "
            f"target {target_rate} Hz"
        )
    if target_rate == clip.sample_rate:
        return clip

    g = gcd(clip.sample_rate, target_rate)
    up = target_rate // g
    down = clip.sample_rate // g

    x = clip.samples
    if up > 1:
        stuffed = np.zeros(len(x) * up, dtype=np.float64)
        stuffed[::up] = x
        x = stuffed
    taps = _lowpass_taps(
        ANTIALIAS_TAPS, ANTIALIAS_CUTOFF * target_rate, clip.sample_rate * up
    )
    filtered = fftconvolve(x, taps * up, mode="same")
    return AudioClip(samples=filtered[::down], sample_rate=target_rate)


def equalize_and_mix(
    a: AudioClip, b: AudioClip
) -> tuple[AudioClip, AudioClip, AudioClip]:
    """Equalize two clips in intensity and sum them into a mixture.

    Both clips are trimmed to the shorter length, then each is scaled so its
    RMS equals the smaller of the two input RMS values (attenuation only, so
    the mixture cannot be pushed further into clipping than the louder input
    would allow).  Returns (mixture, a_scaled, b_scaled); the scaled clips are
    the references separation quality is measured against.

    Raises:
        SampleRateMismatchError: the clips disagree on sample rate.
        SilentSignalError: either clip has zero RMS.
    """
    if a.sample_rate != b.sample_rate:
        raise SampleRateMismatchError(
            f"sample rates differ: {a.sample_rate} vs {b.sample_rate}"
        )
    n = min(len(a), len(b))
    xa = a.samples[:n]
    xb = b.samples[:n]

    rms_a = float(np.sqrt(np.mean(xa**2))) if n else 0.0
    rms_b = float(np.sqrt(np.mean(xb**2))) if n else 0.0
    if rms_a == 0.0 or rms_b == 0.0:
        raise SilentSignalError("cannot equalize a silent (zero-RMS) signal")

    target = min(rms_a, rms_b)
    xa = xa * (target / rms_a)
    xb = xb * (target / rms_b)

    rate = a.sample_rate
    a_scaled = AudioClip(samples=xa, sample_rate=rate)
    b_scaled = AudioClip(samples=xb, sample_rate=rate)
    mixture = AudioClip(samples=xa + xb, sample_rate=rate)
    return mixture, a_scaled, b_scaled
