"""FGM adversarial training: clean pass, one-step embedding perturbation,
adversarial pass, combined objective L_total = L_clean + lambda * L_adv."""

from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .corpus import Dataset
from .model import Gradients, LossBreakdown, ModelParams, backward, forward
from .tokenize import TokenSequence, Vocabulary, encode, normalize

Example = tuple[TokenSequence, int]


@dataclass(frozen=True)
class FgmConfig:
    epsilon: float = 0.001
    lam: float = 0.5

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ValueError("epsilon must be > 0")
        if self.lam < 0:
            raise ValueError("lambda must be >= 0")


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 0.1
    epochs: int = 5
    batch_size: int = 4
    grad_accum: int = 8
    seed: int = 0
    fgm: FgmConfig | None = None
    max_len: int = 256

    def __post_init__(self) -> None:
        if not self.lr > 0:
            raise ValueError("lr must be > 0")
        if self.epochs < 1 or self.batch_size < 1 or self.grad_accum < 1:
            raise ValueError("epochs, batch_size, grad_accum must be >= 1")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    l_clean: float
    l_adv: float
    l_total: float
    val_accuracy: float
    seconds: float


def fgm_delta(g: np.ndarray, epsilon: float) -> np.ndarray:
    """epsilon * g / ||g||_2 with the Frobenius norm over the whole tensor."""
    norm = float(np.linalg.norm(g))
    if norm < 1e-12:
        return np.zeros_like(g)
    return g * (epsilon / norm)


class GradAccumulator:
    """Dense gradient sums over a window of examples, deterministic order."""

    def __init__(self, vocab_size: int, d: int):
        self.d_emb = np.zeros((vocab_size, d))
        self.d_head_w = np.zeros((d, 2))
        self.d_head_b = np.zeros(2)
        self.examples = 0

    def add(self, g: Gradients, scale: float = 1.0) -> None:
        for row, vec in g.emb_rows.items():
            self.d_emb[row] += scale * vec
        self.d_head_w += scale * g.d_head_w
        self.d_head_b += scale * g.d_head_b

    def merge(self, other: "GradAccumulator") -> None:
        self.d_emb += other.d_emb
        self.d_head_w += other.d_head_w
        self.d_head_b += other.d_head_b
        self.examples += other.examples


def adversarial_step(
    p: ModelParams, batch: Sequence[Example], cfg: FgmConfig | None
) -> tuple[LossBreakdown, GradAccumulator]:
    """One micro-batch: per example, clean forward/backward, FGM delta from the
    clean embedding gradient, adversarial forward/backward, and accumulation of
    grad(l_clean) + lambda * grad(l_adv). cfg None means baseline (clean only)."""
    if not batch:
        raise ValueError("batch must be non-empty")
    acc = GradAccumulator(p.vocab_size, p.d)
    clean_sum = 0.0
    adv_sum = 0.0
    for seq, label in batch:
        g_clean = backward(p, seq, label)
        clean_sum += g_clean.loss
        acc.add(g_clean)
        if cfg is not None:
            delta = fgm_delta(g_clean.d_token_embeds, cfg.epsilon)
            g_adv = backward(p, seq, label, delta)
            adv_sum += g_adv.loss
            # lambda == 0 contributes nothing; skipping keeps the update
            # bitwise equal to the baseline step.
            if cfg.lam:
                acc.add(g_adv, scale=cfg.lam)
        acc.examples += 1
    n = len(batch)
    l_clean = clean_sum / n
    l_adv = adv_sum / n
    lam = cfg.lam if cfg is not None else 0.0
    return LossBreakdown(l_clean, l_adv, l_clean + lam * l_adv), acc


def _apply_update(p: ModelParams, acc: GradAccumulator, lr: float) -> None:
    scale = lr / acc.examples
    p.embeddings -= scale * acc.d_emb
    p.head_w -= scale * acc.d_head_w
    p.head_b -= scale * acc.d_head_b


def _encode_dataset(ds: Dataset, vocab: Vocabulary, max_len: int) -> list[Example]:
    return [(encode(normalize(r.text), vocab, max_len), r.label) for r in ds]


def _accuracy(p: ModelParams, examples: Sequence[Example]) -> float:
    correct = 0
    for seq, label in examples:
        probs = forward(p, seq).probs
        correct += int(np.argmax(probs)) == label
    return correct / len(examples)


def train(
    p: ModelParams,
    train_ds: Dataset,
    val_ds: Dataset,
    vocab: Vocabulary,
    cfg: TrainConfig,
    on_step: Callable[[LossBreakdown], None] | None = None,
) -> tuple[ModelParams, list[EpochStats]]:
    """SGD with gradient accumulation; update every grad_accum micro-batches
    from mean accumulated gradients (a trailing partial window also updates).
    Returns the params snapshot from the best-val-accuracy epoch (ties go to
    the later epoch). The input params are not mutated."""
    if len(train_ds) == 0:
        raise ValueError("train split is empty")
    if len(val_ds) == 0:
        raise ValueError("val split is empty")
    params = p.copy()
    train_ex = _encode_dataset(train_ds, vocab, cfg.max_len)
    val_ex = _encode_dataset(val_ds, vocab, cfg.max_len)
    rng = np.random.default_rng(cfg.seed)

    history: list[EpochStats] = []
    best_acc = -1.0
    best_params = params.copy()
    for epoch in range(cfg.epochs):
        t0 = time.perf_counter()
        order = rng.permutation(len(train_ex))
        window = GradAccumulator(params.vocab_size, params.d)
        micro = 0
        sums = {"clean": 0.0, "adv": 0.0, "total": 0.0}
        for start in range(0, len(order), cfg.batch_size):
            batch = [train_ex[i] for i in order[start : start + cfg.batch_size]]
            lb, acc = adversarial_step(params, batch, cfg.fgm)
            if on_step is not None:
                on_step(lb)
            window.merge(acc)
            sums["clean"] += lb.l_clean * len(batch)
            sums["adv"] += lb.l_adv * len(batch)
            sums["total"] += lb.l_total * len(batch)
            micro += 1
            if micro == cfg.grad_accum:
                _apply_update(params, window, cfg.lr)
                window = GradAccumulator(params.vocab_size, params.d)
                micro = 0
        if window.examples:
            _apply_update(params, window, cfg.lr)
        val_acc = _accuracy(params, val_ex)
        n = len(train_ex)
        history.append(
            EpochStats(
                epoch,
                sums["clean"] / n,
                sums["adv"] / n,
                sums["total"] / n,
                val_acc,
                time.perf_counter() - t0,
            )
        )
        if val_acc >= best_acc:
            best_acc = val_acc
            best_params = params.copy()
    return best_params, history
