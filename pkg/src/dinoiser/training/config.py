"""Training configuration."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields

from ..errors import InvalidArgumentError


@dataclass(frozen=True)
class AugmentationFlags:
    random_scale_crop: bool = True
    flip: bool = True
    photometric: bool = True


@dataclass(frozen=True)
class TrainConfig:
    """Recipe defaults: 20 epochs, batch 32, correlation head stopped at 5,
    objectness lr decayed x0.1 after 15."""

    epochs: int = 20
    batch_size: int = 32
    lr: float = 5e-4
    lr_decay_epoch: int = 15
    lr_decay_factor: float = 0.1
    affinity_head_stop_epoch: int = 5
    gamma: float = 0.2
    seed: int = 0
    augmentations: AugmentationFlags = field(default_factory=AugmentationFlags)
    crop_size: int = 448
    proj_channels: int = 256  # affinity head output width
    teacher_embedding: str = "value"
    delta_default: float = 0.98  # recorded in checkpoints as the inference default

    def __post_init__(self):
        if self.affinity_head_stop_epoch > self.epochs:
            raise InvalidArgumentError(
                f"affinity_head_stop_epoch {self.affinity_head_stop_epoch} "
                f"exceeds epochs {self.epochs}"
            )
        if not 0.0 < self.lr_decay_factor <= 1.0:
            raise InvalidArgumentError(
                f"lr_decay_factor must be in (0, 1], got {self.lr_decay_factor}"
            )
        if self.epochs < 1 or self.batch_size < 1:
            raise InvalidArgumentError("epochs and batch_size must be positive")

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TrainConfig":
        data = dict(data)
        known = {f.name for f in fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidArgumentError(f"unknown training config fields: {sorted(unknown)}")
        if isinstance(data.get("augmentations"), dict):
            data["augmentations"] = AugmentationFlags(**data["augmentations"])
        return cls(**data)
