"""Separation quality metrics: SDR, SIR, SAR.

Each estimated source is decomposed into three orthogonal parts: the piece
explained by its own reference (s_target), the piece explained by the other
reference (e_interf), and whatever is left (e_artif).  Projections are plain
gain-only least squares over the whole signal; no allowed-distortion filter
is applied, so figures from filtered-projection implementations will differ
by a method margin.

Ratios are reported in dB and capped at +/-120; a vanished numerator floors
the metric at -120 dB and a vanished denominator caps it at +120 dB.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from specsep.audio_io import AudioClip, SampleRateMismatchError

DB_CAP = 120.0
COLLINEAR_EPS = 1e-12


class DegenerateReferencesError(ValueError):
    """References are zero or (nearly) collinear, so projections are undefined."""


@dataclass(frozen=True)
class SourceMetrics:
    """SDR/SIR/SAR triple for one estimated source, in dB."""

    sdr: float
    sir: float
    sar: float

    def as_dict(self) -> dict:
        return {"sdr": self.sdr, "sir": self.sir, "sar": self.sar}


@dataclass(frozen=True)
class SeparationMetrics:
    """Per-source metrics plus their voice average."""

    source1: SourceMetrics
    source2: SourceMetrics
    average: SourceMetrics

    def as_dict(self) -> dict:
        return {
            "source1": self.source1.as_dict(),
            "source2": self.source2.as_dict(),
            "average": self.average.as_dict(),
        }


def _as_samples(signal) -> np.ndarray:
    if isinstance(signal, AudioClip):
        return signal.samples
    arr = np.asarray(signal, dtype=np.float64)
    if arr.ndim != 1:
        raise ValueError(f"expected a 1-D signal, got shape {arr.shape}")
    return arr


def decompose(
    estimate, references, target_index: int
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Split an estimate into target, interference, and artifact components.

    references is a pair of signals; target_index (0 or 1) picks which one the
    estimate is supposed to be.  Accepts AudioClips or plain arrays; all
    signals must have equal length (and, for clips, equal sample rate).

    Returns (s_target, e_interf, e_artif), which sum back to the estimate.

    Raises:
        DegenerateReferencesError: a zero reference or a collinear pair.
    """
    if target_index not in (0, 1):
        raise ValueError(f"target_index must be 0 or 1, got {target_index}")
    if len(references) != 2:
        raise ValueError(f"need exactly two references, got {len(references)}")
    clips = [s for s in (estimate, *references) if isinstance(s, AudioClip)]
    rates = {c.sample_rate for c in clips}
    if len(rates) > 1:
        raise SampleRateMismatchError(f"mixed sample rates {sorted(rates)}")
    est = _as_samples(estimate)
    refs = [_as_samples(r) for r in references]
    if any(r.shape != est.shape for r in refs):
        raise ValueError(
            f"length mismatch: estimate {est.shape[0]}, references "
            f"{[r.shape[0] for r in refs]}"
        )

    r1, r2 = refs
    e11 = float(r1 @ r1)
    e22 = float(r2 @ r2)
    e12 = float(r1 @ r2)
    if e11 == 0.0 or e22 == 0.0:
        raise DegenerateReferencesError("a reference signal is identically zero")
    if e11 * e22 - e12 * e12 <= COLLINEAR_EPS * e11 * e22:
        raise DegenerateReferencesError("reference signals are collinear")

    target = refs[target_index]
    s_target = (float(target @ est) / float(target @ target)) * target

    gram = np.array([[e11, e12], [e12, e22]])
    coeffs = np.linalg.solve(gram, np.array([r1 @ est, r2 @ est]))
    span_proj = coeffs[0] * r1 + coeffs[1] * r2
    e_interf = span_proj - s_target
    e_artif = est - span_proj
    return s_target, e_interf, e_artif


def _ratio_db(num: float, den: float) -> float:
    if num == 0.0:
        return -DB_CAP
    if den == 0.0:
        return DB_CAP
    return float(np.clip(10.0 * np.log10(num / den), -DB_CAP, DB_CAP))


def metrics(decomposition) -> SourceMetrics:
    """SDR, SIR, SAR from a (s_target, e_interf, e_artif) triple."""
    s_target, e_interf, e_artif = (np.asarray(c, dtype=np.float64) for c in decomposition)
    target_pow = float(s_target @ s_target)
    error = e_interf + e_artif
    sdr = _ratio_db(target_pow, float(error @ error))
    sir = _ratio_db(target_pow, float(e_interf @ e_interf))
    wanted = s_target + e_interf
    sar = _ratio_db(float(wanted @ wanted), float(e_artif @ e_artif))
    return SourceMetrics(sdr=sdr, sir=sir, sar=sar)


def evaluate_separation(
    estimate1, estimate2, reference1, reference2
) -> SeparationMetrics:
    """Score both estimated sources against their references.

    Source identity is positional: estimate1 is scored against reference1 and
    estimate2 against reference2, with the other reference counted as
    interference.  The average entry is the arithmetic mean of the two
    sources' dB values.
    """
    refs = (reference1, reference2)
    m1 = metrics(decompose(estimate1, refs, 0))
    m2 = metrics(decompose(estimate2, refs, 1))
    avg = SourceMetrics(
        sdr=(m1.sdr + m2.sdr) / 2.0,
        sir=(m1.sir + m2.sir) / 2.0,
        sar=(m1.sar + m2.sar) / 2.0,
    )
    return SeparationMetrics(source1=m1, source2=m2, average=avg)
