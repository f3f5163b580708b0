"""Head training: objectives, gradients, loop, checkpoints."""

from .augment import augment_sample
from .checkpoint import (
    CHECKPOINT_VERSION,
    Checkpoint,
    load_checkpoint,
    save_checkpoint,
    validate_checkpoint,
)
from .config import AugmentationFlags, TrainConfig
from .gradients import affinity_head_gradients, objectness_head_gradients
from .loop import train
from .losses import CLAMP_EPS, correlation_loss, objectness_loss
from .optim import Adam

__all__ = [
    "Adam",
    "AugmentationFlags",
    "CHECKPOINT_VERSION",
    "CLAMP_EPS",
    "Checkpoint",
    "TrainConfig",
    "affinity_head_gradients",
    "augment_sample",
    "correlation_loss",
    "load_checkpoint",
    "objectness_head_gradients",
    "objectness_loss",
    "save_checkpoint",
    "train",
    "validate_checkpoint",
]
