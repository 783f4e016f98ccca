"""Tests for grid normalization, window extraction, and vector packing."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from specsep.dataset import (
    MagPhaseGrid,
    TrainingPair,
    WindowGeometry,
    extract_windows,
    pack_input,
    pack_target,
    split_normalize,
    unpack_output,
    window_count,
)
from specsep.stft import ComplexSpectrogram, StftConfig


def spec_from(data):
    data = np.atleast_2d(np.asarray(data, dtype=complex))
    if data.shape[0] < 2:  # a valid grid needs at least 2 bins
        data = np.vstack([data, np.zeros_like(data)])
    cfg = StftConfig(window_size=2 * (data.shape[0] - 1))
    return ComplexSpectrogram(data, cfg, 4000)


class TestMagPhaseGrid:
    def test_shape_mismatch_rejected(self):
        with pytest.raises(ValueError):
            MagPhaseGrid(np.zeros((3, 4)), np.zeros((3, 5)), 1.0)

    def test_nonpositive_scale_rejected(self):
        with pytest.raises(ValueError):
            MagPhaseGrid(np.zeros((3, 4)), np.zeros((3, 4)), 0.0)

    def test_dimensions(self):
        g = MagPhaseGrid(np.zeros((5, 9)), np.zeros((5, 9)), 2.0)
        assert g.bins == 5
        assert g.frames == 9


class TestWindowGeometry:
    def test_defaults(self):
        geom = WindowGeometry()
        assert geom.width == 20
        assert geom.train_hop == 10
        assert geom.test_hop == 1

    def test_invalid_width(self):
        with pytest.raises(ValueError):
            WindowGeometry(width=0)

    def test_train_hop_bounds(self):
        with pytest.raises(ValueError):
            WindowGeometry(width=5, train_hop=6)
        with pytest.raises(ValueError):
            WindowGeometry(width=5, train_hop=0)
        WindowGeometry(width=5, train_hop=5)  # boundary is fine

    def test_inference_hop_fixed(self):
        with pytest.raises(ValueError):
            WindowGeometry(test_hop=2)


class TestTrainingPair:
    def test_valid(self):
        TrainingPair(np.full(4, 0.5), np.full(8, 0.5))

    def test_requires_1d(self):
        with pytest.raises(ValueError):
            TrainingPair(np.zeros((2, 2)), np.zeros(8))

    def test_target_twice_input(self):
        with pytest.raises(ValueError):
            TrainingPair(np.zeros(4), np.zeros(9))

    def test_unit_range_enforced(self):
        with pytest.raises(ValueError):
            TrainingPair(np.array([1.5, 0.0]), np.zeros(4))
        with pytest.raises(ValueError):
            TrainingPair(np.zeros(2), np.array([0.0, -0.1, 0.0, 0.0]))


class TestSplitNormalize:
    def test_all_zero_grid(self):
        g = split_normalize(spec_from(np.zeros((3, 4))))
        assert g.mag_scale == 1.0
        assert np.all(g.mag == 0.0)
        assert np.all(g.phase == 0.0)

    def test_negative_real_entry(self):
        # S = -3: magnitude 3 normalizes to 1, angle pi maps to 0.5
        g = split_normalize(spec_from([[-3.0]]))
        assert g.mag_scale == 3.0
        assert g.mag[0, 0] == 1.0
        assert g.phase[0, 0] == pytest.approx(0.5)

    def test_fixed_scale(self):
        g = split_normalize(spec_from([[2j]]), scale=4.0)
        assert g.mag_scale == 4.0
        assert g.mag[0, 0] == pytest.approx(0.5)
        assert g.phase[0, 0] == pytest.approx(0.25)

    def test_fixed_scale_clamps(self):
        g = split_normalize(spec_from([[5.0]]), scale=2.0)
        assert g.mag[0, 0] == 1.0

    def test_bad_scale_rejected(self):
        with pytest.raises(ValueError):
            split_normalize(spec_from([[1.0]]), scale=0.0)

    def test_self_scale_peaks_at_one(self):
        rng = np.random.default_rng(2)
        data = rng.normal(size=(5, 8)) + 1j * rng.normal(size=(5, 8))
        g = split_normalize(spec_from(data))
        assert g.mag.max() == 1.0
        assert np.all(g.mag >= 0.0)

    def test_phase_never_reaches_one(self):
        # an angle of -epsilon wraps to just under 2 pi, which can round to
        # exactly 2 pi; the plane must stay inside [0, 1)
        data = np.array([[1.0 - 1e-18j, 1.0, -1.0, 1j]])
        g = split_normalize(spec_from(data))
        assert np.all(g.phase < 1.0)
        assert np.all(g.phase >= 0.0)
        assert g.phase[0, 0] == 0.0

    def test_denormalize_round_trip(self):
        rng = np.random.default_rng(4)
        data = rng.normal(size=(4, 6)) + 1j * rng.normal(size=(4, 6))
        spec = spec_from(data)
        g = split_normalize(spec)
        rebuilt = g.mag_scale * g.mag * np.exp(2j * np.pi * g.phase)
        assert np.max(np.abs(rebuilt - data)) < 1e-12


class TestWindowCount:
    def test_examples(self):
        assert window_count(479_873, 20, 10) == 47_986
        assert window_count(39_873, 20, 1) == 39_854
        assert window_count(20, 20, 10) == 1
        assert window_count(19, 20, 10) == 0
        assert window_count(29_969, 10, 10) == 2_996

    @given(
        frames=st.integers(1, 300),
        width=st.integers(1, 50),
        hop=st.integers(1, 50),
    )
    @settings(max_examples=200)
    def test_matches_enumeration(self, frames, width, hop):
        starts = [s for s in range(0, frames + 1, hop) if s + width <= frames]
        assert window_count(frames, width, hop) == len(starts)


class TestPacking:
    def test_input_layout(self):
        mag = np.array([[1.0, 3.0], [2.0, 4.0]])
        phase = np.array([[5.0, 7.0], [6.0, 8.0]])
        packed = pack_input(mag, phase)
        assert np.array_equal(packed, [1, 2, 3, 4, 5, 6, 7, 8])

    def test_input_shape_mismatch(self):
        with pytest.raises(ValueError):
            pack_input(np.zeros((2, 2)), np.zeros((2, 3)))

    def test_default_sizes(self):
        z = np.zeros((65, 20))
        assert pack_input(z, z).shape == (2600,)
        assert pack_target(z, z, z, z).shape == (5200,)

    def test_target_shape_mismatch(self):
        with pytest.raises(ValueError):
            pack_target(np.zeros((2, 2)), np.zeros((2, 2)), np.zeros((3, 2)), np.zeros((2, 2)))

    def test_unpack_wrong_length(self):
        with pytest.raises(ValueError):
            unpack_output(np.zeros(99), 5, 5)
        with pytest.raises(ValueError):
            unpack_output(np.zeros(101), 5, 5)

    @given(
        bins=st.integers(1, 12),
        width=st.integers(1, 8),
        seed=st.integers(0, 2**31),
    )
    @settings(max_examples=100)
    def test_pack_unpack_round_trip(self, bins, width, seed):
        rng = np.random.default_rng(seed)
        grids = [rng.uniform(size=(bins, width)) for _ in range(4)]
        vec = pack_target(*grids)
        back = unpack_output(vec, bins, width)
        for original, recovered in zip(grids, back):
            assert np.array_equal(original, recovered)

    def test_target_concatenates_blocks(self):
        rng = np.random.default_rng(8)
        m1, p1, m2, p2 = (rng.uniform(size=(3, 2)) for _ in range(4))
        vec = pack_target(m1, p1, m2, p2)
        assert np.array_equal(vec[:6], pack_input(m1, p1)[:6])
        assert np.array_equal(vec[12:], pack_input(m2, p2))


class TestExtractWindows:
    def _grids(self, bins, frames, seed=0):
        rng = np.random.default_rng(seed)
        out = []
        for _ in range(3):
            out.append(
                MagPhaseGrid(
                    rng.uniform(size=(bins, frames)),
                    rng.uniform(0.0, 0.999, size=(bins, frames)),
                    1.0,
                )
            )
        return out

    def test_pair_count_and_sizes(self):
        mix, s1, s2 = self._grids(4, 35)
        geom = WindowGeometry(width=10, train_hop=5)
        pairs = extract_windows(mix, (s1, s2), geom)
        assert len(pairs) == 6
        assert pairs[0].input.shape == (80,)
        assert pairs[0].target.shape == (160,)

    def test_single_window(self):
        mix, s1, s2 = self._grids(3, 10)
        pairs = extract_windows(mix, (s1, s2), WindowGeometry(width=10, train_hop=10))
        assert len(pairs) == 1

    def test_window_contents(self):
        mix, s1, s2 = self._grids(5, 27, seed=3)
        geom = WindowGeometry(width=8, train_hop=4)
        pairs = extract_windows(mix, (s1, s2), geom)
        for k, pair in enumerate(pairs):
            lo = k * 4
            expected_in = pack_input(mix.mag[:, lo : lo + 8], mix.phase[:, lo : lo + 8])
            expected_tg = pack_target(
                s1.mag[:, lo : lo + 8],
                s1.phase[:, lo : lo + 8],
                s2.mag[:, lo : lo + 8],
                s2.phase[:, lo : lo + 8],
            )
            assert np.array_equal(pair.input, expected_in)
            assert np.array_equal(pair.target, expected_tg)

    def test_hop_override(self):
        mix, s1, s2 = self._grids(3, 20)
        geom = WindowGeometry(width=10, train_hop=10)
        pairs = extract_windows(mix, (s1, s2), geom, hop=1)
        assert len(pairs) == 11

    def test_grid_mismatch(self):
        mix, s1, _ = self._grids(3, 20)
        (other,) = [self._grids(3, 21)[0]]
        with pytest.raises(ValueError):
            extract_windows(mix, (s1, other), WindowGeometry(width=5, train_hop=5))

    def test_too_few_frames(self):
        mix, s1, s2 = self._grids(3, 6)
        with pytest.raises(ValueError):
            extract_windows(mix, (s1, s2), WindowGeometry(width=10, train_hop=10))
