"""Text query embedding with prompt-template ensembling."""

from __future__ import annotations

import numpy as np

from ..errors import InvalidArgumentError
from ..types import TextQuerySet
from .backbone import BackboneHandle
from .templates import TEMPLATE_SETS

BACKGROUND_PROMPT = "background"


def _embed_sentence(backbone: BackboneHandle, sentence: str) -> np.ndarray:
    tok = backbone.tokenizer
    ids = [tok.bos_id] + tok.encode(sentence) + [tok.eos_id]
    context = backbone.text.context_length
    if len(ids) > context:
        ids = ids[: context - 1] + [tok.eos_id]
    return backbone.text.encode(ids, eot_position=len(ids) - 1)


def encode_text_queries(
    prompts,
    template_set: str = "imagenet80",
    backbone: BackboneHandle | None = None,
    background: bool | None = None,
) -> TextQuerySet:
    """Embed prompts with template ensembling.

    Every prompt is expanded into every template of the set; expansions
    are embedded, unit-normalized, averaged, and the mean normalized
    again.  Expansions are averaged in sorted order so the result is
    independent of template-list order, bit for bit.

    ``background`` marks which prompt collects unmatched patches; by
    default any prompt literally equal to "background" is flagged.
    """
    prompts = list(prompts)
    if not prompts:
        raise InvalidArgumentError("need at least one prompt")
    if any(not isinstance(p, str) or not p.strip() for p in prompts):
        raise InvalidArgumentError("prompts must be non-empty strings")
    if backbone is None or backbone.text is None:
        raise InvalidArgumentError("backbone has no text tower")
    if template_set not in TEMPLATE_SETS:
        raise InvalidArgumentError(
            f"unknown template set {template_set!r}; choose from {sorted(TEMPLATE_SETS)}"
        )
    templates = TEMPLATE_SETS[template_set]

    rows = []
    for prompt in prompts:
        expansions = sorted(t.format(prompt) for t in templates)
        embedded = np.stack([_embed_sentence(backbone, e) for e in expansions])
        norms = np.linalg.norm(embedded, axis=1, keepdims=True)
        if np.any(norms == 0):
            raise InvalidArgumentError(f"degenerate text embedding for prompt {prompt!r}")
        mean = (embedded / norms).mean(axis=0)
        rows.append(mean / np.linalg.norm(mean))
    embeddings = np.stack(rows)

    bg_index = None
    lowered = [p.strip().lower() for p in prompts]
    if background is None:
        background = BACKGROUND_PROMPT in lowered
    if background:
        if BACKGROUND_PROMPT not in lowered:
            raise InvalidArgumentError('background requested but no "background" prompt given')
        bg_index = lowered.index(BACKGROUND_PROMPT)
    return TextQuerySet(
        prompts=tuple(prompts),
        embeddings=embeddings,
        has_background=bool(background),
        template_set=template_set,
        background_index=bg_index,
    )
