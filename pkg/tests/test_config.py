"""Tests for the run configuration object and its JSON round trip."""

import json

import pytest

from specsep.config import RunConfig


class TestDefaults:
    def test_reference_setup(self):
        cfg = RunConfig()
        assert cfg.sample_rate == 4000
        assert cfg.stft_window_size == 128
        assert cfg.stft_hop == 1
        assert cfg.bins == 65
        assert cfg.window_width == 20
        assert cfg.train_window_hop == 10
        assert cfg.mlp_geometry == [2600, 2600, 5200]
        assert cfg.learning_rate == 0.05
        assert cfg.epochs == 500
        assert cfg.shuffle is True
        assert cfg.gain_adaptation is True

    def test_derived_objects(self):
        cfg = RunConfig()
        assert cfg.stft_config.bins == 65
        assert cfg.window_geometry.width == 20
        assert cfg.window_geometry.train_hop == 10
        assert cfg.train_config.learning_rate == 0.05
        assert cfg.train_config.epochs == 500


class TestValidation:
    def test_geometry_input_must_match_grid(self):
        # 65 bins x 20 frames x 2 planes = 2600, anything else is rejected
        with pytest.raises(ValueError, match="2600"):
            RunConfig(mlp_geometry=[2500, 2600, 5200])

    def test_geometry_output_must_be_double_input(self):
        with pytest.raises(ValueError, match="twice"):
            RunConfig(mlp_geometry=[2600, 2600, 5000])

    def test_geometry_tracks_window_width(self):
        cfg = RunConfig(window_width=10, train_window_hop=5,
                        mlp_geometry=[1300, 64, 2600])
        assert cfg.mlp_geometry[0] == 2 * cfg.bins * 10

    def test_geometry_needs_two_layers(self):
        with pytest.raises(ValueError):
            RunConfig(mlp_geometry=[2600])

    def test_geometry_sizes_positive(self):
        with pytest.raises(ValueError):
            RunConfig(mlp_geometry=[2600, 0, 5200])

    def test_bad_sample_rate(self):
        with pytest.raises(ValueError):
            RunConfig(sample_rate=0)

    def test_bad_stft_hop(self):
        with pytest.raises(ValueError):
            RunConfig(stft_hop=0)

    def test_bad_window_hop(self):
        with pytest.raises(ValueError):
            RunConfig(train_window_hop=21)

    def test_bad_eval_every(self):
        with pytest.raises(ValueError):
            RunConfig(eval_every=0)

    def test_bad_durations(self):
        with pytest.raises(ValueError):
            RunConfig(train_duration_s=0.0)
        with pytest.raises(ValueError):
            RunConfig(test_duration_s=-1.0)
        with pytest.raises(ValueError):
            RunConfig(train_start_s=-0.5)

    def test_bad_learning_rate(self):
        with pytest.raises(ValueError):
            RunConfig(learning_rate=0.0)


class TestSerialization:
    def test_from_dict_rejects_unknown_keys(self):
        with pytest.raises(ValueError, match="learning_rte"):
            RunConfig.from_dict({"learning_rte": 0.1})

    def test_from_dict_partial(self):
        cfg = RunConfig.from_dict({"epochs": 30, "seed": 7})
        assert cfg.epochs == 30
        assert cfg.seed == 7
        assert cfg.sample_rate == 4000

    def test_round_trip(self, tmp_path):
        cfg = RunConfig(window_width=10, train_window_hop=10,
                        mlp_geometry=[1300, 256, 2600], epochs=30,
                        seed=7, eval_every=5, train_duration_s=30.0,
                        test_duration_s=5.0)
        path = tmp_path / "run.json"
        cfg.dump(path)
        again = RunConfig.load(path)
        assert again == cfg

    def test_dump_is_plain_json(self, tmp_path):
        path = tmp_path / "run.json"
        RunConfig().dump(path)
        data = json.loads(path.read_text())
        assert data["mlp_geometry"] == [2600, 2600, 5200]
        assert data["stft_window_size"] == 128

    def test_load_rejects_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        with pytest.raises(ValueError, match="not valid JSON"):
            RunConfig.load(path)

    def test_load_rejects_non_object(self, tmp_path):
        path = tmp_path / "list.json"
        path.write_text("[1, 2, 3]")
        with pytest.raises(ValueError, match="JSON object"):
            RunConfig.load(path)

    def test_load_rejects_invalid_values(self, tmp_path):
        path = tmp_path / "bad.json"
        path.write_text(json.dumps({"stft_window_size": 127}))
        with pytest.raises(ValueError):
            RunConfig.load(path)
