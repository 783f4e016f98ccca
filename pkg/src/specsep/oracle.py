"""Ideal-binary-mask baseline.

With the true source spectrograms in hand, each time-frequency cell of the
mixture is handed entirely to whichever source is louder there.  This is the
classic oracle upper reference for mask-based separation; it needs ground
truth, so it only exists to put model results in context.
"""

from __future__ import annotations

import numpy as np

from specsep.stft import ComplexSpectrogram


def ideal_binary_mask(
    s1: ComplexSpectrogram, s2: ComplexSpectrogram
) -> tuple[np.ndarray, np.ndarray]:
    """Boolean masks picking the dominant source per cell.

    mask1 is true where source 1 is at least as loud as source 2 (ties go to
    source 1); mask2 is its complement, so the two always partition the grid.

    Raises:
        ValueError: spectrogram shapes differ.
    """
    if s1.data.shape != s2.data.shape:
        raise ValueError(
            f"spectrogram shapes differ: {s1.data.shape} vs {s2.data.shape}"
        )
    mask1 = np.abs(s1.data) >= np.abs(s2.data)
    return mask1, ~mask1


def apply_mask(mixture: ComplexSpectrogram, mask: np.ndarray) -> ComplexSpectrogram:
    """Zero out the mixture cells not selected by the mask.

    The mixture's complex values (hence phases) are kept unchanged where the
    mask is set.

    Raises:
        ValueError: mask shape does not match the spectrogram.
    """
    if mask.shape != mixture.data.shape:
        raise ValueError(
            f"mask shape {mask.shape} does not match spectrogram "
            f"{mixture.data.shape}"
        )
    return ComplexSpectrogram(
        mixture.data * mask, mixture.config, mixture.sample_rate
    )
