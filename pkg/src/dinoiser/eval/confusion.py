"""Confusion-matrix accumulation and mean IoU."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError, UndefinedMetricError


@dataclass
class ConfusionMatrix:
    """C x C counts, rows = ground truth, columns = prediction."""

    counts: np.ndarray

    @classmethod
    def zeros(cls, n_classes: int) -> "ConfusionMatrix":
        return cls(counts=np.zeros((n_classes, n_classes), dtype=np.int64))

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        return ConfusionMatrix(counts=self.counts + other.counts)

    def total(self) -> int:
        return int(self.counts.sum())


def accumulate_confusion(pred, gt, n_classes: int, ignore_index: int = 255) -> ConfusionMatrix:
    """Per-pixel confusion counts; ``ignore_index`` pixels are skipped."""
    pred = np.asarray(pred)
    gt = np.asarray(gt)
    if pred.shape != gt.shape:
        raise InvalidArgumentError(f"shape mismatch: pred {pred.shape} vs gt {gt.shape}")
    valid = gt != ignore_index
    pred_v = pred[valid].astype(np.int64)
    gt_v = gt[valid].astype(np.int64)
    if pred_v.size:
        if pred_v.min() < 0 or pred_v.max() >= n_classes:
            raise InvalidArgumentError(
                f"prediction labels outside 0..{n_classes - 1}: "
                f"[{pred_v.min()}, {pred_v.max()}]"
            )
        if gt_v.min() < 0 or gt_v.max() >= n_classes:
            raise InvalidArgumentError(
                f"ground-truth labels outside 0..{n_classes - 1}: "
                f"[{gt_v.min()}, {gt_v.max()}]"
            )
    counts = np.bincount(gt_v * n_classes + pred_v, minlength=n_classes * n_classes)
    return ConfusionMatrix(counts=counts.reshape(n_classes, n_classes))


def miou(confusion: ConfusionMatrix) -> dict:
    """Per-class IoU and their mean; zero-union classes are excluded.

    IoU_c = TP / (TP + FP + FN).  Excluded classes appear as NaN in the
    per-class list.  Raises if every class has empty union.
    """
    c = confusion.counts
    if c.size == 0:
        raise UndefinedMetricError("empty confusion matrix")
    tp = np.diag(c).astype(np.float64)
    fp = c.sum(axis=0) - tp
    fn = c.sum(axis=1) - tp
    union = tp + fp + fn
    defined = union > 0
    if not defined.any():
        raise UndefinedMetricError("no class has a non-empty union; mIoU undefined")
    iou = np.full(confusion.n_classes, math.nan)
    iou[defined] = tp[defined] / union[defined]
    return {
        "per_class_iou": iou.tolist(),
        "mean": float(iou[defined].mean()),
    }
