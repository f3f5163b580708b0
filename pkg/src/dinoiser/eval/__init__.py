"""Evaluation harness: adapters, sliding window, confusion mIoU, reports."""

from .confusion import ConfusionMatrix, accumulate_confusion, miou
from .datasets import (
    ADAPTER_SPECS,
    DatasetAdapter,
    builtin_prompts,
    generic_dataset,
    load_prompt_file,
    make_adapter,
    voc_layout_dataset,
)
from .runner import evaluate_dataset, format_report, queries_for_adapter, save_report
from .window import WindowedScores, sliding_window_segment

__all__ = [
    "ADAPTER_SPECS",
    "ConfusionMatrix",
    "DatasetAdapter",
    "WindowedScores",
    "accumulate_confusion",
    "builtin_prompts",
    "evaluate_dataset",
    "format_report",
    "generic_dataset",
    "load_prompt_file",
    "make_adapter",
    "miou",
    "queries_for_adapter",
    "save_report",
    "sliding_window_segment",
    "voc_layout_dataset",
]
