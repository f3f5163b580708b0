"""Plain ViT encoders (vision and text) as pure numpy forward passes.

Backbones here are frozen inputs: there is no training path through them,
so a deterministic numpy implementation keeps the whole inference stack
free of framework state.  Weight arrays come from the flat container
format (see ``dinoiser.container``).
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage
from scipy.special import erf, expit

from ..errors import WeightLoadError

LN_EPS = 1e-5


def layer_norm(x, weight, bias, eps=LN_EPS):
    mu = x.mean(axis=-1, keepdims=True)
    var = x.var(axis=-1, keepdims=True)
    return (x - mu) / np.sqrt(var + eps) * weight + bias


def gelu(x):
    return 0.5 * x * (1.0 + erf(x / np.sqrt(2.0)))


def quick_gelu(x):
    return x * expit(1.702 * x)


_ACTIVATIONS = {"gelu": gelu, "quick_gelu": quick_gelu}


def softmax(x, axis=-1):
    z = x - x.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


class _Params:
    """Prefix view over the flat key->array dict."""

    def __init__(self, arrays: dict, prefix: str):
        self._arrays = arrays
        self._prefix = prefix

    def __call__(self, key: str) -> np.ndarray:
        full = self._prefix + key
        try:
            return self._arrays[full]
        except KeyError:
            raise WeightLoadError(f"weight container is missing key {full!r}") from None

    def has(self, key: str) -> bool:
        return (self._prefix + key) in self._arrays


def _split_heads(x, n_heads):
    t, width = x.shape
    return x.reshape(t, n_heads, width // n_heads).transpose(1, 0, 2)


def _merge_heads(x):
    n_heads, t, hd = x.shape
    return x.transpose(1, 0, 2).reshape(t, n_heads * hd)


def _attention(p, block, x_norm, n_heads, causal=False):
    """Standard multi-head self-attention; returns (out, q, k, v merged)."""
    qkv = x_norm @ p(f"blocks.{block}.attn.qkv.weight").T + p(f"blocks.{block}.attn.qkv.bias")
    width = x_norm.shape[-1]
    q, k, v = qkv[:, :width], qkv[:, width : 2 * width], qkv[:, 2 * width :]
    qh, kh, vh = (_split_heads(a, n_heads) for a in (q, k, v))
    scale = (width // n_heads) ** -0.5
    logits = (qh * scale) @ kh.transpose(0, 2, 1)
    if causal:
        t = x_norm.shape[0]
        logits = logits + np.triu(np.full((t, t), -np.inf), k=1)
    ctx = _merge_heads(softmax(logits, axis=-1) @ vh)
    out = ctx @ p(f"blocks.{block}.attn.proj.weight").T + p(f"blocks.{block}.attn.proj.bias")
    return out, q, k, v


def _mlp(p, block, x, act):
    h = act(x @ p(f"blocks.{block}.mlp.fc1.weight").T + p(f"blocks.{block}.mlp.fc1.bias"))
    return h @ p(f"blocks.{block}.mlp.fc2.weight").T + p(f"blocks.{block}.mlp.fc2.bias")


class VisionTransformer:
    """ViT image tower with dense and intermediate feature taps.

    The dense "text-aligned" features replace the last attention layer's
    token mixing with its per-token value pathway (query/key discarded,
    value projection + attention output projection applied per patch),
    then run the usual final norm + projection.  Intermediate taps are
    token streams after an earlier block passed through the same final
    norm + projection so every tap lives in the shared embedding space.
    """

    def __init__(self, arrays: dict, meta: dict):
        self.p = _Params(arrays, "visual.")
        self.patch_size = int(meta["patch_size"])
        self.width = int(meta["width"])
        self.n_blocks = int(meta["n_blocks"])
        self.n_heads = int(meta["n_heads"])
        self.pre_norm = bool(meta.get("pre_norm", False))
        self.act = _ACTIVATIONS[meta.get("activation", "gelu")]
        self.pos_grid = int(meta["pos_grid"])
        self.has_proj = self.p.has("proj")
        self.proj_dim = int(arrays["visual.proj"].shape[1]) if self.has_proj else self.width
        self._validate(meta)

    def _validate(self, meta):
        if self.width % self.n_heads != 0:
            raise WeightLoadError("transformer width must divide by head count")
        pe = self.p("patch_embed.weight")
        if pe.shape != (self.width, 3, self.patch_size, self.patch_size):
            raise WeightLoadError(f"patch embed shape {pe.shape} inconsistent with metadata")
        pos = self.p("pos_embed")
        if pos.shape != (1 + self.pos_grid**2, self.width):
            raise WeightLoadError(f"positional embedding shape {pos.shape} inconsistent")
        # touch the last block so truncated containers fail at load time
        self.p(f"blocks.{self.n_blocks - 1}.mlp.fc2.bias")

    def _pos_embed(self, n_rows, n_cols):
        pos = self.p("pos_embed")
        cls_pos, grid_pos = pos[:1], pos[1:]
        g = self.pos_grid
        if (n_rows, n_cols) != (g, g):
            # bicubic interpolation of the 2D positional grid
            src = grid_pos.reshape(g, g, self.width)
            ys = (np.arange(n_rows) + 0.5) * g / n_rows - 0.5
            xs = (np.arange(n_cols) + 0.5) * g / n_cols - 0.5
            yy, xx = np.meshgrid(ys, xs, indexing="ij")
            out = np.empty((n_rows, n_cols, self.width))
            for c in range(self.width):
                out[:, :, c] = ndimage.map_coordinates(
                    src[:, :, c], [yy, xx], order=3, mode="nearest"
                )
            grid_pos = out.reshape(n_rows * n_cols, self.width)
        return cls_pos, grid_pos

    def _embed(self, image_chw):
        c, h, w = image_chw.shape
        ps = self.patch_size
        if c != 3 or h % ps or w % ps:
            raise WeightLoadError(f"image {image_chw.shape} not padded to patch multiples")
        n_rows, n_cols = h // ps, w // ps
        patches = image_chw.reshape(3, n_rows, ps, n_cols, ps)
        patches = patches.transpose(1, 3, 0, 2, 4).reshape(n_rows * n_cols, 3 * ps * ps)
        w_flat = self.p("patch_embed.weight").reshape(self.width, 3 * ps * ps)
        tokens = patches @ w_flat.T + self.p("patch_embed.bias")
        cls_pos, grid_pos = self._pos_embed(n_rows, n_cols)
        cls_tok = self.p("cls_token").reshape(1, self.width) + cls_pos
        x = np.concatenate([cls_tok, tokens + grid_pos], axis=0)
        if self.pre_norm:
            x = layer_norm(x, self.p("ln_pre.weight"), self.p("ln_pre.bias"))
        return x, (n_rows, n_cols)

    def _final(self, x):
        out = layer_norm(x, self.p("norm.weight"), self.p("norm.bias"))
        if self.has_proj:
            out = out @ self.p("proj")
        return out

    def forward(self, image_chw, tap_layer: int):
        """Run the tower once; returns per-token feature dict (class token kept).

        Keys: ``dense`` (value-pathway text-aligned features), ``tap``
        (projected block-``tap_layer`` output), and the last attention
        layer's merged ``query``/``key``/``value`` embeddings.
        """
        p = self.p
        x, (n_rows, n_cols) = self._embed(np.asarray(image_chw, dtype=np.float64))
        x_tap = x if tap_layer == 0 else None
        out = {}
        for b in range(self.n_blocks):
            h = layer_norm(x, p(f"blocks.{b}.norm1.weight"), p(f"blocks.{b}.norm1.bias"))
            attn_out, q, k, v = _attention(p, b, h, self.n_heads)
            if b == self.n_blocks - 1:
                out["query"], out["key"], out["value"] = q, k, v
                # dense branch: token mixing dropped, value pathway kept
                vo = v @ p(f"blocks.{b}.attn.proj.weight").T + p(f"blocks.{b}.attn.proj.bias")
                xd = x + vo
                hd = layer_norm(xd, p(f"blocks.{b}.norm2.weight"), p(f"blocks.{b}.norm2.bias"))
                xd = xd + _mlp(p, b, hd, self.act)
                out["dense"] = self._final(xd)
            x = x + attn_out
            h2 = layer_norm(x, p(f"blocks.{b}.norm2.weight"), p(f"blocks.{b}.norm2.bias"))
            x = x + _mlp(p, b, h2, self.act)
            if b + 1 == tap_layer:
                x_tap = x
        if x_tap is None:
            raise WeightLoadError(f"tap layer {tap_layer} outside 1..{self.n_blocks}")
        out["tap"] = self._final(x_tap)
        out["grid_shape"] = (n_rows, n_cols)
        return out


class TextTransformer:
    """Causal text tower producing one embedding per token sequence."""

    def __init__(self, arrays: dict, meta: dict):
        self.p = _Params(arrays, "text.")
        self.width = int(meta["width"])
        self.n_blocks = int(meta["n_blocks"])
        self.n_heads = int(meta["n_heads"])
        self.context_length = int(meta["context_length"])
        self.vocab_size = int(meta["vocab_size"])
        self.act = _ACTIVATIONS[meta.get("activation", "gelu")]
        self.p(f"blocks.{self.n_blocks - 1}.mlp.fc2.bias")

    def encode(self, token_ids, eot_position: int) -> np.ndarray:
        """Embed one padded token sequence; feature read at ``eot_position``."""
        p = self.p
        ids = np.asarray(token_ids, dtype=np.int64)
        x = p("token_embed")[ids] + p("pos_embed")[: len(ids)]
        for b in range(self.n_blocks):
            h = layer_norm(x, p(f"blocks.{b}.norm1.weight"), p(f"blocks.{b}.norm1.bias"))
            attn_out, *_ = _attention(p, b, h, self.n_heads, causal=True)
            x = x + attn_out
            h2 = layer_norm(x, p(f"blocks.{b}.norm2.weight"), p(f"blocks.{b}.norm2.bias"))
            x = x + _mlp(p, b, h2, self.act)
        x = layer_norm(x, p("norm.weight"), p("norm.bias"))
        return x[eot_position] @ p("proj")
