"""Run configuration: one flat JSON object covering the whole pipeline.

Defaults reproduce the reference setup: 4 kHz audio, 128-sample Hann windows
at hop 1 (65 bins), 20-frame training windows overlapped by 10, a
2600x2600x5200 network, and 500 epochs of SGD at rate 0.05 with gain
adaptation on.  Unknown keys in a config file are rejected rather than
ignored so typos fail loudly.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

from specsep.dataset import WindowGeometry
from specsep.mlp import TrainConfig
from specsep.stft import StftConfig


@dataclass
class RunConfig:
    sample_rate: int = 4000
    stft_window_size: int = 128
    stft_hop: int = 1
    window_width: int = 20
    train_window_hop: int = 10
    mlp_geometry: list[int] = field(default_factory=lambda: [2600, 2600, 5200])
    learning_rate: float = 0.05
    epochs: int = 500
    seed: int = 0
    shuffle: bool = True
    gain_adaptation: bool = True
    eval_every: int = 1
    train_start_s: float = 0.0
    train_duration_s: float = 120.0
    test_duration_s: float = 10.0

    def __post_init__(self):
        if self.sample_rate < 1:
            raise ValueError(f"sample_rate must be positive, got {self.sample_rate}")
        # These constructors carry their own validation.
        self.stft_config
        self.window_geometry
        self.train_config
        self.mlp_geometry = [int(n) for n in self.mlp_geometry]
        if len(self.mlp_geometry) < 2:
            raise ValueError("mlp_geometry needs at least input and output sizes")
        if any(n < 1 for n in self.mlp_geometry):
            raise ValueError(f"mlp_geometry sizes must be >= 1: {self.mlp_geometry}")
        expected_in = 2 * self.bins * self.window_width
        if self.mlp_geometry[0] != expected_in:
            raise ValueError(
                f"mlp_geometry input is {self.mlp_geometry[0]} but "
                f"{self.bins} bins x {self.window_width} frames needs {expected_in}"
            )
        if self.mlp_geometry[-1] != 2 * self.mlp_geometry[0]:
            raise ValueError(
                f"mlp_geometry output is {self.mlp_geometry[-1]}, expected twice "
                f"the input size ({2 * self.mlp_geometry[0]})"
            )
        if self.eval_every < 1:
            raise ValueError(f"eval_every must be >= 1, got {self.eval_every}")
        if self.train_start_s < 0:
            raise ValueError(f"train_start_s must be >= 0, got {self.train_start_s}")
        for name in ("train_duration_s", "test_duration_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)}")

    @property
    def bins(self) -> int:
        return self.stft_window_size // 2 + 1

    @property
    def stft_config(self) -> StftConfig:
        return StftConfig(window_size=self.stft_window_size, hop=self.stft_hop)

    @property
    def window_geometry(self) -> WindowGeometry:
        return WindowGeometry(width=self.window_width, train_hop=self.train_window_hop)

    @property
    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            seed=self.seed,
            shuffle=self.shuffle,
        )

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def load(cls, path: str | Path) -> "RunConfig":
        with open(path) as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: not valid JSON: {exc}") from exc
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["mlp_geometry"] = list(self.mlp_geometry)
        return out

    def dump(self, path: str | Path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
