"""Text tokenizers for the text tower.

Two interchangeable tokenizers:

* ``HashTokenizer`` -- deterministic keyword hashing into the vocabulary.
  Used with synthetic weight containers (tests, demos) where no learned
  vocabulary exists.
* ``BpeTokenizer`` -- byte-level BPE compatible with the merges files
  shipped alongside real vision-language checkpoints.  The merges text is
  embedded in the weight container (key ``text.bpe_merges``).
"""

from __future__ import annotations

import hashlib
import re
from functools import lru_cache

from ..errors import InvalidArgumentError

_WORD_RE = re.compile(r"[a-z0-9]+")

# matches the pre-tokenization pattern used by byte-level BPE vocabularies
_BPE_SPLIT_RE = re.compile(
    r"<\|startoftext\|>|<\|endoftext\|>|'s|'t|'re|'ve|'m|'ll|'d|[a-z]+|[0-9]|[^\sa-z0-9]+",
    re.IGNORECASE,
)


class HashTokenizer:
    """Maps lowercase alphanumeric words to stable ids via blake2b."""

    def __init__(self, vocab_size: int, bos_id: int, eos_id: int):
        self.vocab_size = vocab_size
        self.bos_id = bos_id
        self.eos_id = eos_id
        self._n_reserved = max(bos_id, eos_id) + 1
        if vocab_size <= self._n_reserved:
            raise InvalidArgumentError("vocab too small for reserved tokens")

    def encode(self, text: str) -> list:
        span = self.vocab_size - self._n_reserved
        ids = []
        for word in _WORD_RE.findall(text.lower()):
            digest = hashlib.blake2b(word.encode("utf-8"), digest_size=8).digest()
            ids.append(int.from_bytes(digest, "big") % span + self._n_reserved)
        return ids


@lru_cache()
def _bytes_to_unicode():
    """Reversible byte <-> printable-unicode map used by byte-level BPE."""
    bs = (
        list(range(ord("!"), ord("~") + 1))
        + list(range(ord("\xa1"), ord("\xac") + 1))
        + list(range(ord("\xae"), ord("\xff") + 1))
    )
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, [chr(c) for c in cs]))


def _pairs(word):
    return {(word[i], word[i + 1]) for i in range(len(word) - 1)}


class BpeTokenizer:
    """Byte-level BPE over a merges list.

    Vocabulary layout follows the common convention: 256 byte symbols,
    their ``</w>`` variants, one entry per merge, then the two special
    start/end tokens.
    """

    def __init__(self, merges_text: str):
        lines = [ln for ln in merges_text.strip().split("\n") if ln and not ln.startswith("#")]
        merges = [tuple(ln.split()) for ln in lines]
        if any(len(m) != 2 for m in merges):
            raise InvalidArgumentError("malformed BPE merges line")
        self._ranks = {pair: i for i, pair in enumerate(merges)}
        self._byte_encoder = _bytes_to_unicode()
        symbols = list(self._byte_encoder.values())
        vocab = symbols + [s + "</w>" for s in symbols] + ["".join(m) for m in merges]
        vocab += ["<|startoftext|>", "<|endoftext|>"]
        self._encoder = {tok: i for i, tok in enumerate(vocab)}
        self.vocab_size = len(vocab)
        self.bos_id = self._encoder["<|startoftext|>"]
        self.eos_id = self._encoder["<|endoftext|>"]
        self._cache: dict = {}

    def _bpe(self, token: str):
        if token in self._cache:
            return self._cache[token]
        word = tuple(token[:-1]) + (token[-1] + "</w>",)
        while len(word) > 1:
            pairs = _pairs(word)
            best = min(pairs, key=lambda p: self._ranks.get(p, float("inf")))
            if best not in self._ranks:
                break
            first, second = best
            merged = []
            i = 0
            while i < len(word):
                if i < len(word) - 1 and word[i] == first and word[i + 1] == second:
                    merged.append(first + second)
                    i += 2
                else:
                    merged.append(word[i])
                    i += 1
            word = tuple(merged)
        self._cache[token] = word
        return word

    def encode(self, text: str) -> list:
        ids = []
        for chunk in _BPE_SPLIT_RE.findall(" ".join(text.lower().strip().split())):
            encoded = "".join(self._byte_encoder[b] for b in chunk.encode("utf-8"))
            ids.extend(self._encoder[part] for part in self._bpe(encoded))
        return ids
