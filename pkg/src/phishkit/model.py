"""Desk-scale differentiable text classifier.

Embedding lookup -> mean pooling over non-PAD positions -> linear head ->
softmax, with exact analytic gradients. The perturbable tensor is the
per-example token_embeds matrix (L x d); adversarial deltas are added there.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .tokenize import PAD_ID, TokenSequence, Vocabulary, encode, normalize

CHECKPOINT_FORMAT_VERSION = 1


@dataclass(eq=False)
class ModelParams:
    embeddings: np.ndarray  # V x d
    head_w: np.ndarray      # d x 2
    head_b: np.ndarray      # 2
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.embeddings.ndim != 2:
            raise ValueError("embeddings must be V x d")
        v, d = self.embeddings.shape
        if v < 2:
            raise ValueError("vocab must include at least UNK and PAD")
        if self.head_w.shape != (d, 2) or self.head_b.shape != (2,):
            raise ValueError("head shapes must be (d, 2) and (2,)")
        for arr in (self.embeddings, self.head_w, self.head_b):
            if not np.all(np.isfinite(arr)):
                raise ValueError("parameters must be finite")
        if np.any(self.embeddings[PAD_ID] != 0.0):
            raise ValueError("PAD embedding row must stay all-zero")

    @property
    def vocab_size(self) -> int:
        return self.embeddings.shape[0]

    @property
    def d(self) -> int:
        return self.embeddings.shape[1]

    def copy(self) -> "ModelParams":
        return ModelParams(
            self.embeddings.copy(), self.head_w.copy(), self.head_b.copy(), self.seed
        )


@dataclass(frozen=True)
class ForwardTrace:
    token_embeds: np.ndarray  # L x d, the tensor FGM perturbs
    pooled: np.ndarray        # d
    logits: np.ndarray        # 2
    probs: np.ndarray         # 2


@dataclass(frozen=True)
class LossBreakdown:
    l_clean: float
    l_adv: float
    l_total: float


@dataclass(frozen=True)
class Gradients:
    """Analytic gradients of one example's loss, plus the values they came from."""

    emb_rows: dict[int, np.ndarray]   # embedding row id -> d
    d_head_w: np.ndarray              # d x 2
    d_head_b: np.ndarray              # 2
    d_token_embeds: np.ndarray        # L x d, what fgm_delta consumes
    loss: float
    trace: ForwardTrace


def init_params(vocab_size: int, d: int = 32, seed: int = 0) -> ModelParams:
    if vocab_size < 2 or d < 1:
        raise ValueError("need vocab_size >= 2 and d >= 1")
    rng = np.random.default_rng(seed)
    embeddings = rng.uniform(-0.05, 0.05, size=(vocab_size, d))
    head_w = rng.uniform(-0.05, 0.05, size=(d, 2))
    head_b = np.zeros(2)
    embeddings[PAD_ID] = 0.0
    return ModelParams(embeddings, head_w, head_b, seed)


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - np.max(logits)
    exp = np.exp(shifted)
    return exp / np.sum(exp)


def _nonpad_positions(seq: TokenSequence) -> np.ndarray:
    return np.array([i for i, t in enumerate(seq.ids) if t != PAD_ID], dtype=np.intp)


def forward(
    p: ModelParams, seq: TokenSequence, delta: np.ndarray | None = None
) -> ForwardTrace:
    ids = np.asarray(seq.ids, dtype=np.intp)
    if ids.size and (ids.min() < 0 or ids.max() >= p.vocab_size):
        raise ValueError("token id out of range for this vocabulary")
    token_embeds = p.embeddings[ids]
    if delta is not None:
        if delta.shape != token_embeds.shape:
            raise ValueError("delta shape must match token_embeds")
        token_embeds = token_embeds + delta
    keep = _nonpad_positions(seq)
    if keep.size == 0:
        raise ValueError("no non-PAD positions to pool")
    pooled = token_embeds[keep].mean(axis=0)
    logits = pooled @ p.head_w + p.head_b
    return ForwardTrace(token_embeds, pooled, logits, softmax(logits))


def loss(probs: np.ndarray, label: int) -> float:
    if label not in (0, 1):
        raise ValueError("label must be 0 or 1")
    return float(-np.log(max(float(probs[label]), 1e-12)))


def backward(
    p: ModelParams,
    seq: TokenSequence,
    label: int,
    delta: np.ndarray | None = None,
) -> Gradients:
    trace = forward(p, seq, delta)
    l = loss(trace.probs, label)

    # softmax + cross-entropy: dL/dlogits = probs - onehot(label)
    dlogits = trace.probs.copy()
    dlogits[label] -= 1.0
    d_head_b = dlogits
    d_head_w = np.outer(trace.pooled, dlogits)
    d_pooled = p.head_w @ dlogits

    keep = _nonpad_positions(seq)
    d_token_embeds = np.zeros_like(trace.token_embeds)
    d_token_embeds[keep] = d_pooled / keep.size

    emb_rows: dict[int, np.ndarray] = {}
    for i in keep:
        row = seq.ids[i]
        if row in emb_rows:
            emb_rows[row] = emb_rows[row] + d_token_embeds[i]
        else:
            emb_rows[row] = d_token_embeds[i].copy()
    return Gradients(emb_rows, d_head_w, d_head_b, d_token_embeds, l, trace)


def save_checkpoint(p: ModelParams, path: str | Path) -> None:
    header = {
        "vocab_size": p.vocab_size,
        "d": p.d,
        "seed": p.seed,
        "format_version": CHECKPOINT_FORMAT_VERSION,
    }
    np.savez(
        Path(path),
        header=np.frombuffer(json.dumps(header).encode("utf-8"), dtype=np.uint8),
        embeddings=p.embeddings,
        head_w=p.head_w,
        head_b=p.head_b,
    )


def load_checkpoint(path: str | Path) -> ModelParams:
    with np.load(Path(path)) as data:
        header = json.loads(bytes(data["header"]).decode("utf-8"))
        if header.get("format_version") != CHECKPOINT_FORMAT_VERSION:
            raise ValueError(f"unsupported checkpoint format: {header.get('format_version')}")
        p = ModelParams(
            data["embeddings"].copy(),
            data["head_w"].copy(),
            data["head_b"].copy(),
            header.get("seed"),
        )
    if p.vocab_size != header["vocab_size"] or p.d != header["d"]:
        raise ValueError("checkpoint header disagrees with array shapes")
    return p


class TextClassifier:
    """Inference facade: raw text in, class probabilities out.

    Total on arbitrary token subsets: empty text pools nothing, so the head
    bias alone decides (softmax(head_b)), keeping LIME's mask renderings safe.
    """

    def __init__(self, params: ModelParams, vocab: Vocabulary, max_len: int = 256):
        if params.vocab_size != len(vocab):
            raise ValueError("params and vocabulary disagree on vocab size")
        self.params = params
        self.vocab = vocab
        self.max_len = max_len

    def encode(self, text: str) -> TokenSequence:
        return encode(normalize(text), self.vocab, self.max_len)

    def predict_proba(self, text: str) -> np.ndarray:
        seq = self.encode(text)
        if len(seq) == 0 or all(t == PAD_ID for t in seq.ids):
            return softmax(self.params.head_b)
        return forward(self.params, seq).probs

    def predict(self, text: str) -> tuple[int, float]:
        probs = self.predict_proba(text)
        label = int(np.argmax(probs))
        return label, float(probs[label])
