"""Pipeline configuration with the paper-derived defaults."""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path

ADAPTER_CMD_ENV = "DUBPAIR_ADAPTER_CMD"


class ConfigError(ValueError):
    """Raised when a configuration value violates an invariant."""


@dataclass(frozen=True)
class PipelineConfig:
    input_root: Path
    output_root: Path
    sample_rate_hz: int = 16000
    merge_gap_ms: int = 1000
    min_duration_s: float = 3.0
    max_duration_s: float = 15.0
    wer_max: float = 0.6
    keep_fraction: float = 0.8
    pair_iou_min: float = 0.5
    pair_sim_max: float = 0.5
    min_segments_per_speaker: int = 5
    k_units: int = 1000
    frame_hop_ms: int = 20
    cluster_tau: float = 0.75
    adapter_cmd: str | None = None
    seed: int = 0
    parallelism: int = 1

    def __post_init__(self) -> None:
        object.__setattr__(self, "input_root", Path(self.input_root))
        object.__setattr__(self, "output_root", Path(self.output_root))

    def validate(self) -> None:
        if not 0 < self.min_duration_s < self.max_duration_s:
            raise ConfigError(
                f"need 0 < min_duration_s < max_duration_s, got "
                f"{self.min_duration_s} and {self.max_duration_s}"
            )
        if not 0 < self.keep_fraction <= 1:
            raise ConfigError(f"keep_fraction must be in (0, 1], got {self.keep_fraction}")
        if self.wer_max < 0:
            raise ConfigError(f"wer_max must be >= 0, got {self.wer_max}")
        if not 0 <= self.pair_iou_min <= 1:
            raise ConfigError(f"pair_iou_min must be in [0, 1], got {self.pair_iou_min}")
        if not -1 <= self.pair_sim_max <= 1:
            raise ConfigError(f"pair_sim_max must be in [-1, 1], got {self.pair_sim_max}")
        if not 8000 <= self.sample_rate_hz <= 48000:
            raise ConfigError(f"sample_rate_hz out of range: {self.sample_rate_hz}")
        if self.merge_gap_ms < 0:
            raise ConfigError(f"merge_gap_ms must be >= 0, got {self.merge_gap_ms}")
        if self.min_segments_per_speaker < 1:
            raise ConfigError("min_segments_per_speaker must be >= 1")
        if self.k_units < 1:
            raise ConfigError("k_units must be >= 1")
        if self.frame_hop_ms < 1:
            raise ConfigError("frame_hop_ms must be >= 1")
        if not -1 <= self.cluster_tau <= 1.0001:
            # tau > 1 is allowed in the library (one cluster per utterance)
            # but is almost certainly a config mistake, so reject it here.
            raise ConfigError(f"cluster_tau must be in [-1, 1], got {self.cluster_tau}")
        if self.parallelism < 1:
            raise ConfigError("parallelism must be >= 1")


_FIELD_NAMES = {f.name for f in dataclasses.fields(PipelineConfig)}


def load_config(path: str | Path) -> PipelineConfig:
    """Load a JSON config holding exactly the PipelineConfig keys."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(raw) - _FIELD_NAMES
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    for required in ("input_root", "output_root"):
        if required not in raw:
            raise ConfigError(f"{path}: missing required key {required!r}")
    try:
        config = PipelineConfig(**raw)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    config.validate()
    return config


def config_fingerprint(config: PipelineConfig) -> dict:
    """The config keys that influence pipeline outputs, for cache hashing."""
    data = dataclasses.asdict(config)
    data["input_root"] = str(data["input_root"])
    del data["output_root"]  # where outputs land does not change their content
    del data["parallelism"]  # execution detail; results are identical by contract
    return data
