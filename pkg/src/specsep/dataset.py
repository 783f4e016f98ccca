"""Normalized magnitude/phase grids and the network's vector packing.

A complex spectrogram is split into a magnitude plane scaled into [0, 1] and
a phase plane mapped from angle to [0, 1).  Fixed-width windows of frames are
cut from the grids and flattened frame-by-frame into the input and target
vectors the network trains on.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from specsep.stft import ComplexSpectrogram

TWO_PI = 2.0 * np.pi


@dataclass
class MagPhaseGrid:
    """Magnitude and phase planes of one spectrogram, both in unit scale.

    mag is |S| / mag_scale (clamped to [0, 1] when a scale was supplied),
    phase is angle(S) mapped to [0, 1), and mag_scale is the factor that
    restores spectral units.
    """

    mag: np.ndarray
    phase: np.ndarray
    mag_scale: float

    def __post_init__(self):
        if self.mag.shape != self.phase.shape:
            raise ValueError(
                f"mag and phase shapes differ: {self.mag.shape} vs {self.phase.shape}"
            )
        if self.mag_scale <= 0:
            raise ValueError(f"mag_scale must be positive, got {self.mag_scale}")

    @property
    def bins(self) -> int:
        return self.mag.shape[0]

    @property
    def frames(self) -> int:
        return self.mag.shape[1]


@dataclass(frozen=True)
class WindowGeometry:
    """Time-window geometry for training and inference.

    width frames per window; training windows advance by train_hop frames,
    inference windows always advance by one frame.
    """

    width: int = 20
    train_hop: int = 10
    test_hop: int = 1

    def __post_init__(self):
        if self.width < 1:
            raise ValueError(f"width must be >= 1, got {self.width}")
        if not 1 <= self.train_hop <= self.width:
            raise ValueError(
                f"train_hop must be in [1, width], got {self.train_hop} with width {self.width}"
            )
        if self.test_hop != 1:
            raise ValueError("inference windows advance one frame at a time")


@dataclass
class TrainingPair:
    """One packed training example: mixture window in, source windows out."""

    input: np.ndarray
    target: np.ndarray

    def __post_init__(self):
        if self.input.ndim != 1 or self.target.ndim != 1:
            raise ValueError("packed vectors must be 1-D")
        if self.target.shape[0] != 2 * self.input.shape[0]:
            raise ValueError(
                f"target length {self.target.shape[0]} should be twice the "
                f"input length {self.input.shape[0]}"
            )
        for name, vec in (("input", self.input), ("target", self.target)):
            if np.any(vec < 0.0) or np.any(vec > 1.0):
                raise ValueError(f"{name} entries must lie in [0, 1]")


def split_normalize(
    spec: ComplexSpectrogram, scale: float | None = None
) -> MagPhaseGrid:
    """Split a complex spectrogram into unit-scale magnitude and phase planes.

    With no scale given the magnitude plane is divided by its own maximum
    (1.0 for an all-zero grid).  When a scale is supplied, e.g. reusing the
    training scale on test data, the scaled magnitudes are clamped to [0, 1].
    Phase is angle(S) wrapped to [0, 2 pi) and divided by 2 pi; zero cells
    get phase 0.
    """
    mag = np.abs(spec.data)
    if scale is not None:
        if scale <= 0:
            raise ValueError(f"scale must be positive, got {scale}")
        mag_scale = float(scale)
        mag = np.clip(mag / mag_scale, 0.0, 1.0)
    else:
        peak = float(mag.max()) if mag.size else 0.0
        mag_scale = peak if peak > 0 else 1.0
        mag = mag / mag_scale

    phase = np.mod(np.angle(spec.data), TWO_PI) / TWO_PI
    # Tiny negative angles can round up to exactly 2 pi under np.mod.
    phase[phase >= 1.0] = 0.0
    return MagPhaseGrid(mag=mag, phase=phase, mag_scale=mag_scale)


def window_count(frames: int, width: int, hop: int) -> int:
    """Number of full windows starting at frames 0, hop, 2*hop, ..."""
    if frames < width:
        return 0
    return (frames - width) // hop + 1


def pack_input(mag_window: np.ndarray, phase_window: np.ndarray) -> np.ndarray:
    """Flatten one mixture window into the network input vector.

    Each bins x width window is unpacked frame by frame (ascending frequency
    within each frame); the magnitude block is followed by the phase block,
    giving a vector of length 2 * bins * width.
    """
    if mag_window.shape != phase_window.shape:
        raise ValueError(
            f"window shapes differ: {mag_window.shape} vs {phase_window.shape}"
        )
    return np.concatenate(
        [mag_window.ravel(order="F"), phase_window.ravel(order="F")]
    )


def pack_target(
    mag1: np.ndarray, phase1: np.ndarray, mag2: np.ndarray, phase2: np.ndarray
) -> np.ndarray:
    """Pack both sources' windows into the target vector [m1 | p1 | m2 | p2]."""
    for arr in (phase1, mag2, phase2):
        if arr.shape != mag1.shape:
            raise ValueError("all four windows must share one shape")
    return np.concatenate(
        [
            mag1.ravel(order="F"),
            phase1.ravel(order="F"),
            mag2.ravel(order="F"),
            phase2.ravel(order="F"),
        ]
    )


def unpack_output(
    vector: np.ndarray, bins: int, width: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Inverse of pack_target: four bins x width grids from one vector."""
    block = bins * width
    if vector.shape != (4 * block,):
        raise ValueError(
            f"expected vector of length {4 * block}, got shape {vector.shape}"
        )
    return tuple(
        vector[i * block : (i + 1) * block].reshape((bins, width), order="F")
        for i in range(4)
    )


def extract_windows(
    mixture: MagPhaseGrid,
    sources: tuple[MagPhaseGrid, MagPhaseGrid],
    geom: WindowGeometry,
    hop: int | None = None,
) -> list[TrainingPair]:
    """Cut aligned windows from mixture and source grids into training pairs.

    Windows start at frames 0, hop, 2*hop, ... while a full width fits.
    hop defaults to the geometry's train_hop.

    Raises:
        ValueError: grids disagree in shape, or fewer frames than one window.
    """
    s1, s2 = sources
    if not (mixture.mag.shape == s1.mag.shape == s2.mag.shape):
        raise ValueError("mixture and source grids must share bins and frames")
    if hop is None:
        hop = geom.train_hop
    frames = mixture.frames
    count = window_count(frames, geom.width, hop)
    if count == 0:
        raise ValueError(
            f"{frames} frames cannot fit one {geom.width}-frame window"
        )

    pairs = []
    for k in range(count):
        lo = k * hop
        hi = lo + geom.width
        pairs.append(
            TrainingPair(
                input=pack_input(
                    mixture.mag[:, lo:hi], mixture.phase[:, lo:hi]
                ),
                target=pack_target(
                    s1.mag[:, lo:hi],
                    s1.phase[:, lo:hi],
                    s2.mag[:, lo:hi],
                    s2.phase[:, lo:hi],
                ),
            )
        )
    return pairs
