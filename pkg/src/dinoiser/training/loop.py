"""Joint head training against teacher targets."""

from __future__ import annotations

import json
import os

import numpy as np
from PIL import Image

from ..denoiser.affinity import compute_affinity
from ..denoiser.heads import AffinityHead, ObjectnessHead
from ..errors import InvalidArgumentError, NotFoundError
from ..featurizer.backbone import BackboneHandle
from ..featurizer.maskclip import encode_image_dense
from ..featurizer.preprocess import to_float_rgb
from ..teachers.dino import teacher_features
from ..teachers.targets import binarize_target, resample_mask_to_grid
from ..denoiser.heads import ObjectnessMap
from .augment import augment_sample
from .checkpoint import Checkpoint
from .config import TrainConfig
from .gradients import affinity_head_gradients, objectness_head_gradients
from .optim import Adam


def _load_image(sample):
    image_id, image = sample
    if isinstance(image, (str, os.PathLike)):
        image = Image.open(image)
    return image_id, to_float_rgb(image)


def _init_params(rng, d_in: int, d_g: int):
    return {
        "affinity.kernel": rng.normal(0.0, 0.02, (3, 3, d_in, d_g)),
        "affinity.bias": np.full(d_g, 0.01),  # nonzero: keeps zero-input rows non-degenerate
        "objectness.kernel": rng.normal(0.0, 0.02, (1, 1, d_in, 1)),
        "objectness.bias": np.zeros(()),
    }


def train(
    samples,
    backbone: BackboneHandle,
    teacher_backbone: BackboneHandle,
    objectness_source,
    config: TrainConfig | None = None,
    metrics_path=None,
    log=None,
) -> Checkpoint:
    """Optimize both heads jointly under the configured recipe.

    ``samples`` is a list of ``(image_id, image-or-path)``.  The affinity
    head stops updating after its stop epoch; the objectness head's
    learning rate decays at the decay epoch.  Backbones are frozen
    throughout.  With a fixed seed the run is fully deterministic.
    """
    config = config or TrainConfig()
    if not samples:
        raise InvalidArgumentError("training dataset is empty")
    d_in = backbone.proj_dim
    d_g = config.proj_channels
    if d_g >= d_in:
        raise InvalidArgumentError(
            f"proj_channels {d_g} must be smaller than the backbone feature dim {d_in}"
        )

    rng = np.random.default_rng(config.seed)
    params = _init_params(rng, d_in, d_g)
    opt_affinity = Adam({k: v for k, v in params.items() if k.startswith("affinity.")}, config.lr)
    opt_objectness = Adam(
        {k: v for k, v in params.items() if k.startswith("objectness.")}, config.lr
    )

    metrics_file = open(metrics_path, "w") if metrics_path else None
    history = []
    try:
        for epoch in range(1, config.epochs + 1):
            if epoch == config.lr_decay_epoch + 1:
                opt_objectness.lr *= config.lr_decay_factor
            train_affinity = epoch <= config.affinity_head_stop_epoch

            order = rng.permutation(len(samples))
            epoch_loss_c, epoch_loss_m, n_seen = 0.0, 0.0, 0
            for start in range(0, len(order), config.batch_size):
                batch = order[start : start + config.batch_size]
                grads_c = {k: np.zeros_like(v) for k, v in opt_affinity.params.items()}
                grads_m = {k: np.zeros_like(v) for k, v in opt_objectness.params.items()}
                for idx in batch:
                    image_id, image = _load_image(samples[idx])
                    try:
                        pixel_mask = np.asarray(objectness_source(image_id)) > 0
                    except NotFoundError:
                        raise
                    except FileNotFoundError as exc:
                        raise NotFoundError(
                            f"objectness target unavailable for image {image_id!r}: {exc}"
                        ) from exc
                    image, pixel_mask = augment_sample(
                        image, pixel_mask, config.augmentations, config.crop_size, rng
                    )

                    encoding = encode_image_dense(image, backbone)
                    teacher_map = teacher_features(
                        image, teacher_backbone, config.teacher_embedding
                    )
                    if teacher_map.grid != encoding.grid:
                        raise InvalidArgumentError(
                            f"teacher grid {teacher_map.grid} != student grid {encoding.grid} "
                            f"for image {image_id!r}"
                        )
                    target_affinity = binarize_target(compute_affinity(teacher_map), config.gamma)
                    target_mask = ObjectnessMap.from_binary(
                        encoding.grid, resample_mask_to_grid(pixel_mask, encoding.grid)
                    )

                    affinity_head = AffinityHead(
                        kernel=params["affinity.kernel"],
                        bias=params["affinity.bias"],
                        input_tap=backbone.tap_layer,
                    )
                    objectness_head = ObjectnessHead(
                        kernel=params["objectness.kernel"],
                        bias=float(params["objectness.bias"]),
                    )
                    loss_c, dk_c, db_c = affinity_head_gradients(
                        encoding.intermediate, affinity_head, target_affinity
                    )
                    loss_m, dk_m, db_m = objectness_head_gradients(
                        encoding.intermediate, objectness_head, target_mask
                    )
                    grads_c["affinity.kernel"] += dk_c
                    grads_c["affinity.bias"] += db_c
                    grads_m["objectness.kernel"] += dk_m
                    grads_m["objectness.bias"] += db_m
                    epoch_loss_c += loss_c
                    epoch_loss_m += loss_m
                    n_seen += 1

                scale = 1.0 / len(batch)
                if train_affinity:
                    opt_affinity.step({k: v * scale for k, v in grads_c.items()})
                opt_objectness.step({k: v * scale for k, v in grads_m.items()})

            record = {
                "epoch": epoch,
                "loss_c": epoch_loss_c / n_seen,
                "loss_m": epoch_loss_m / n_seen,
                "lr": opt_objectness.lr,
            }
            history.append(record)
            if metrics_file:
                metrics_file.write(json.dumps(record) + "\n")
                metrics_file.flush()
            if log:
                log(
                    f"epoch {epoch:3d}/{config.epochs}  "
                    f"loss_c {record['loss_c']:.4f}  loss_m {record['loss_m']:.4f}  "
                    f"lr {record['lr']:.2e}"
                )
    finally:
        if metrics_file:
            metrics_file.close()

    return Checkpoint(
        affinity_head=AffinityHead(
            kernel=params["affinity.kernel"],
            bias=params["affinity.bias"],
            input_tap=backbone.tap_layer,
        ),
        objectness_head=ObjectnessHead(
            kernel=params["objectness.kernel"], bias=float(params["objectness.bias"])
        ),
        backbone_id=backbone.backbone_id,
        gamma_default=config.gamma,
        delta_default=config.delta_default,
        train_config=config.to_dict(),
        metrics=tuple(history),
    )
