"""Binary-classification metrics, Mann-Whitney AUC, and robustness reports.

Phishing is the positive class (1). Zero-denominator precision/recall/f1
return 0 carrying a degenerate flag instead of NaN.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Callable, Mapping, Sequence

import numpy as np

from .corpus import Dataset

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        if min(self.tp, self.tn, self.fp, self.fn) < 0:
            raise ValueError("counts must be non-negative")

    @property
    def n_total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


class MetricValue(float):
    """A float plus a flag marking zero-denominator degenerate cases."""

    degenerate: bool

    def __new__(cls, value: float, degenerate: bool = False) -> "MetricValue":
        obj = super().__new__(cls, value)
        obj.degenerate = degenerate
        return obj


def confusion(preds: Sequence[int], labels: Sequence[int]) -> ConfusionMatrix:
    if len(preds) != len(labels):
        raise ValueError("preds and labels must have equal length")
    if len(preds) == 0:
        raise ValueError("no samples to count")
    tp = tn = fp = fn = 0
    for p, y in zip(preds, labels):
        if p not in (0, 1) or y not in (0, 1):
            raise ValueError("classes must be 0 or 1")
        if p == 1 and y == 1:
            tp += 1
        elif p == 0 and y == 0:
            tn += 1
        elif p == 1 and y == 0:
            fp += 1
        else:
            fn += 1
    return ConfusionMatrix(tp, tn, fp, fn)


def accuracy(cm: ConfusionMatrix) -> MetricValue:
    if cm.n_total == 0:
        raise ValueError("empty confusion matrix")
    return MetricValue((cm.tp + cm.tn) / cm.n_total)


def precision(cm: ConfusionMatrix) -> MetricValue:
    if cm.n_total == 0:
        raise ValueError("empty confusion matrix")
    denom = cm.tp + cm.fp
    if denom == 0:
        return MetricValue(0.0, degenerate=True)
    return MetricValue(cm.tp / denom)


def recall(cm: ConfusionMatrix) -> MetricValue:
    if cm.n_total == 0:
        raise ValueError("empty confusion matrix")
    denom = cm.tp + cm.fn
    if denom == 0:
        return MetricValue(0.0, degenerate=True)
    return MetricValue(cm.tp / denom)


def f1(cm: ConfusionMatrix) -> MetricValue:
    p = precision(cm)
    r = recall(cm)
    if p + r == 0:
        return MetricValue(0.0, degenerate=p.degenerate or r.degenerate)
    value = 2 * p * r / (p + r)
    if __debug__:
        alt = 2 * cm.tp / (2 * cm.tp + cm.fp + cm.fn)
        assert abs(value - alt) < 1e-12, "harmonic-mean and count forms disagree"
    return MetricValue(value)


def auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney statistic via midranks: fraction of (positive, negative)
    pairs ranked correctly, ties counting one half."""
    s = np.asarray(scores, dtype=float)
    y = np.asarray(labels)
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if n_pos == 0 or n_neg == 0:
        raise ValueError("auc needs both classes present")
    order = np.argsort(s, kind="stable")
    ranks = np.empty(len(s))
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[order[j + 1]] == s[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = (i + j) / 2 + 1  # 1-based midrank
        i = j + 1
    rank_sum = float(np.sum(ranks[y == 1]))
    return (rank_sum - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg)


@dataclass(frozen=True)
class EvalReport:
    clean: dict[str, dict[str, float]]          # model -> metric -> value
    noise: dict[str, dict[float, float]]        # model -> level -> accuracy
    monotonic: dict[str, bool]                  # model -> non-increasing in noise
    threshold: float
    metadata: dict

    def __post_init__(self) -> None:
        for metrics_by_name in self.clean.values():
            for v in metrics_by_name.values():
                if not -1e-9 <= v <= 1 + 1e-9:
                    raise ValueError("metric values must lie in [0, 1]")
        for accs in self.noise.values():
            for v in accs.values():
                if not -1e-9 <= v <= 1 + 1e-9:
                    raise ValueError("metric values must lie in [0, 1]")

    def to_json(self) -> str:
        payload = {
            "schema_version": REPORT_SCHEMA_VERSION,
            "threshold": self.threshold,
            "clean": self.clean,
            "noise": {
                m: {f"{lvl:g}": acc for lvl, acc in by_level.items()}
                for m, by_level in self.noise.items()
            },
            "monotonic": self.monotonic,
            "metadata": self.metadata,
        }
        return json.dumps(payload, indent=2, sort_keys=True)

    def to_text(self) -> str:
        levels = sorted({lvl for by_level in self.noise.values() for lvl in by_level})
        names = list(self.clean.keys())
        name_w = max(len("model"), *(len(n) for n in names))

        lines = ["== clean metrics =="]
        metric_cols = ["accuracy", "precision", "recall", "f1", "auc"]
        header = "model".ljust(name_w) + "  " + "  ".join(c.ljust(9) for c in metric_cols)
        lines.append(header)
        for n in names:
            row = n.ljust(name_w) + "  " + "  ".join(
                f"{self.clean[n][c]:.4f}".ljust(9) for c in metric_cols
            )
            lines.append(row)

        lines.append("")
        lines.append("== accuracy under noise ==")
        noise_cols = ["clean"] + [f"{lvl:g}" for lvl in levels]
        lines.append(
            "model".ljust(name_w)
            + "  "
            + "  ".join(c.ljust(9) for c in noise_cols)
            + "monotone"
        )
        for n in names:
            cells = [f"{self.clean[n]['accuracy']:.4f}"] + [
                f"{self.noise[n][lvl]:.4f}" for lvl in levels
            ]
            lines.append(
                n.ljust(name_w)
                + "  "
                + "  ".join(c.ljust(9) for c in cells)
                + ("yes" if self.monotonic[n] else "no")
            )
        return "\n".join(lines) + "\n"


def robustness_report(
    models: Mapping[str, Callable[[str], np.ndarray]],
    clean_test: Dataset,
    noisy_sets: Mapping[float, Dataset],
    *,
    threshold: float = 0.5,
    metadata: dict | None = None,
) -> EvalReport:
    """Clean metrics plus per-noise-level accuracy for each named predictor.

    Predictors map text to class probabilities; probs[1] >= threshold counts
    as a phishing prediction.
    """
    clean_ids = sorted(r.id for r in clean_test)
    for level, ds in noisy_sets.items():
        if sorted(r.id for r in ds) != clean_ids:
            raise ValueError(f"noisy set at level {level:g} has mismatched record ids")

    def evaluate(predictor: Callable[[str], np.ndarray], ds: Dataset):
        scores = [float(predictor(r.text)[1]) for r in ds]
        preds = [1 if s >= threshold else 0 for s in scores]
        labels = [r.label for r in ds]
        return scores, preds, labels

    clean: dict[str, dict[str, float]] = {}
    noise: dict[str, dict[float, float]] = {}
    monotonic: dict[str, bool] = {}
    for name, predictor in models.items():
        scores, preds, labels = evaluate(predictor, clean_test)
        cm = confusion(preds, labels)
        clean[name] = {
            "accuracy": float(accuracy(cm)),
            "precision": float(precision(cm)),
            "recall": float(recall(cm)),
            "f1": float(f1(cm)),
            "auc": auc(scores, labels),
        }
        noise[name] = {}
        for level in sorted(noisy_sets):
            _, n_preds, n_labels = evaluate(predictor, noisy_sets[level])
            noise[name][level] = float(accuracy(confusion(n_preds, n_labels)))
        seq = [clean[name]["accuracy"]] + [noise[name][lvl] for lvl in sorted(noisy_sets)]
        monotonic[name] = all(b <= a + 1e-12 for a, b in zip(seq, seq[1:]))
    return EvalReport(clean, noise, monotonic, threshold, metadata or {})
