"""From-scratch LIME attribution over the classifier plus grounded narratives.

Feature semantics: duplicate surface words share one feature (presence), so a
mask bit drops every occurrence of its word. Distances count word positions,
not features. When 2^F fits inside n_samples the mask space is enumerated
exhaustively (the sampling estimator's exact limit); otherwise the all-ones
mask is always drawn first and the rest are random with keep-probability 0.5.
"""

from __future__ import annotations

import json
import urllib.error
import urllib.request
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Callable

import numpy as np

from .tokenize import TOKEN_RE, normalize

CLASS_NAMES = ("LEGITIMATE", "PHISHING")
CUE_CATEGORIES = ("urgency", "credential", "financial", "link")

CUE_CLAUSES = {
    "urgency": "It pressures the reader with urgent, time-limited language.",
    "credential": "It asks the reader to verify or reset account credentials.",
    "financial": "It invokes sensitive financial terms to suggest money is at risk.",
    "link": "It pushes the reader to click a link or open an attachment.",
}
ROUTINE_CLAUSE = (
    "The message appears routine and contains no social-engineering cues "
    "or suspicious tokens."
)
ROUTINE_WITH_MATCHES_CLAUSE = (
    "The message appears routine despite matching isolated keywords."
)

Predictor = Callable[[str], np.ndarray]


@dataclass(frozen=True)
class LimeConfig:
    n_samples: int = 500
    kernel_width: float = 0.75
    top_k: int = 8
    ridge: float = 1e-3
    seed: int = 0

    def __post_init__(self) -> None:
        if self.n_samples < 10:
            raise ValueError("n_samples must be >= 10")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.ridge < 0:
            raise ValueError("ridge must be >= 0")
        if not self.kernel_width > 0:
            raise ValueError("kernel_width must be > 0")


@dataclass(frozen=True)
class Explanation:
    label: int
    confidence: float
    features: tuple[tuple[str, float], ...]
    coverage: float

    def __post_init__(self) -> None:
        if not -1e-9 <= self.confidence <= 1 + 1e-9:
            raise ValueError("confidence must be a probability")
        mags = [abs(w) for _, w in self.features]
        if mags != sorted(mags, reverse=True):
            raise ValueError("features must be sorted by |weight| descending")


@dataclass(frozen=True)
class Narrative:
    text: str
    cues: tuple[str, ...]
    grounding_tokens: tuple[str, ...]
    fallback: bool = False


def _word_tokens(text: str) -> list[str]:
    """Word and placeholder tokens of the normalized text; punctuation is not
    a feature but survives every rendering."""
    return TOKEN_RE.findall(normalize(text))


def _is_word(token: str) -> bool:
    return token[0].isalnum() or token[0] == "_" or token.startswith("[")


def _draw_masks(n_features: int, cfg: LimeConfig) -> np.ndarray:
    if 2**n_features <= cfg.n_samples:
        grid = np.zeros((2**n_features, n_features), dtype=np.int8)
        for i in range(2**n_features):
            for j in range(n_features):
                grid[i, j] = (i >> j) & 1
        # all-ones first, rest in binary-counting order
        full = 2**n_features - 1
        rest = list(range(full))
        return grid[[full] + rest]
    rng = np.random.default_rng(cfg.seed)
    masks = np.ones((cfg.n_samples, n_features), dtype=np.int8)
    masks[1:] = (rng.random((cfg.n_samples - 1, n_features)) < 0.5).astype(np.int8)
    return masks


def _weighted_ridge(
    masks: np.ndarray, y: np.ndarray, weights: np.ndarray, ridge: float
) -> tuple[np.ndarray, float]:
    """Intercept-augmented normal equations; ridge does not penalize the
    intercept. Returns (coefficients, intercept)."""
    n, f = masks.shape
    x = np.hstack([np.ones((n, 1)), masks.astype(float)])
    xtw = x.T * weights
    a = xtw @ x
    a[1:, 1:] += ridge * np.eye(f)
    b = xtw @ y
    try:
        beta = np.linalg.solve(a, b)
    except np.linalg.LinAlgError:
        beta, *_ = np.linalg.lstsq(a, b, rcond=None)
    return beta[1:], float(beta[0])


def lime_explain(predictor: Predictor, text: str, cfg: LimeConfig) -> Explanation:
    tokens = _word_tokens(text)
    word_positions = [i for i, t in enumerate(tokens) if _is_word(t)]
    if not word_positions:
        raise ValueError("text must tokenize to at least one word token")

    features: list[str] = []
    positions_of: dict[str, list[int]] = {}
    for i in word_positions:
        t = tokens[i]
        if t not in positions_of:
            positions_of[t] = []
            features.append(t)
        positions_of[t].append(i)
    n_positions = len(word_positions)

    full_probs = np.asarray(predictor(" ".join(tokens)))
    label = int(np.argmax(full_probs))
    confidence = float(full_probs[label])

    masks = _draw_masks(len(features), cfg)
    y = np.empty(len(masks))
    dist = np.empty(len(masks))
    for s, mask in enumerate(masks):
        dropped = {t for t, keep in zip(features, mask) if not keep}
        rendered = " ".join(
            t for i, t in enumerate(tokens) if not (_is_word(t) and t in dropped)
        )
        y[s] = float(np.asarray(predictor(rendered))[label])
        removed = sum(len(positions_of[t]) for t in dropped)
        dist[s] = removed / n_positions
    weights = np.exp(-(dist**2) / cfg.kernel_width**2)

    coef, intercept = _weighted_ridge(masks, y, weights, cfg.ridge)

    yhat = masks.astype(float) @ coef + intercept
    ss_res = float(np.sum(weights * (y - yhat) ** 2))
    ybar = float(np.sum(weights * y) / np.sum(weights))
    ss_tot = float(np.sum(weights * (y - ybar) ** 2))
    if ss_tot < 1e-18:
        coverage = 1.0 if ss_res < 1e-12 else 0.0
    else:
        coverage = 1.0 - ss_res / ss_tot

    ranked = sorted(zip(features, coef), key=lambda fw: (-abs(fw[1]), fw[0]))
    top = tuple((t, float(w)) for t, w in ranked[: cfg.top_k])
    return Explanation(label, confidence, top, coverage)


_CUE_CACHE: dict[str, frozenset[str]] | None = None


def load_cue_lexicons(path: str | Path | None = None) -> dict[str, frozenset[str]]:
    """One lexicon file per cue category; bundled defaults unless a directory
    of <category>.txt files is given."""
    lexicons: dict[str, frozenset[str]] = {}
    for cat in CUE_CATEGORIES:
        if path is None:
            text = (
                resources.files("phishkit.data.cues")
                .joinpath(f"{cat}.txt")
                .read_text(encoding="utf-8")
            )
        else:
            text = Path(path).joinpath(f"{cat}.txt").read_text(encoding="utf-8")
        lexicons[cat] = frozenset(
            w.strip().lower() for w in text.splitlines() if w.strip()
        )
    return lexicons


def _default_lexicons() -> dict[str, frozenset[str]]:
    global _CUE_CACHE
    if _CUE_CACHE is None:
        _CUE_CACHE = load_cue_lexicons()
    return _CUE_CACHE


def match_cues(
    tokens: tuple[str, ...], lexicons: dict[str, frozenset[str]]
) -> tuple[str, ...]:
    return tuple(
        cat
        for cat in CUE_CATEGORIES
        if cat in lexicons and any(t in lexicons[cat] for t in tokens)
    )


def _template_text(label: int, confidence: float, cues: tuple[str, ...],
                   tokens: tuple[str, ...]) -> str:
    parts = [
        f"The email was classified as {CLASS_NAMES[label]} "
        f"with confidence {confidence:.2f}."
    ]
    if label == 1:
        parts.extend(CUE_CLAUSES[c] for c in cues)
    elif cues:
        parts.append(ROUTINE_WITH_MATCHES_CLAUSE)
    else:
        parts.append(ROUTINE_CLAUSE)
    parts.append(f"Key tokens: {', '.join(tokens)}")
    return " ".join(parts)


def _remote_text(prompt: str, endpoint: str, timeout: float) -> str:
    body = json.dumps(
        {"prompt": prompt, "max_tokens": 128, "temperature": 0}
    ).encode("utf-8")
    req = urllib.request.Request(
        endpoint, data=body, headers={"Content-Type": "application/json"}
    )
    with urllib.request.urlopen(req, timeout=timeout) as resp:
        payload = json.loads(resp.read().decode("utf-8"))
    return str(payload["text"])


def generate_narrative(
    e: Explanation,
    mode: str = "template",
    *,
    endpoint: str | None = None,
    timeout: float = 5.0,
    lexicons: dict[str, frozenset[str]] | None = None,
) -> Narrative:
    """Template mode is byte-deterministic. Remote mode posts a structured
    prompt and appends the grounded key-token list regardless of the reply;
    an unreachable endpoint falls back to template with the fallback flag."""
    if mode not in ("template", "remote"):
        raise ValueError(f"unknown narrative mode: {mode!r}")
    if not e.features:
        raise ValueError("explanation has no features to ground on")
    lex = lexicons if lexicons is not None else _default_lexicons()
    tokens = tuple(t for t, _ in e.features)
    cues = match_cues(tokens, lex)
    template = _template_text(e.label, e.confidence, cues, tokens)
    if mode == "template":
        return Narrative(template, cues, tokens)
    if endpoint is None:
        raise ValueError("remote mode requires an endpoint")
    prompt = (
        f"Verdict: {CLASS_NAMES[e.label]}. Confidence: {e.confidence:.2f}. "
        f"Cues: {', '.join(cues) if cues else 'none'}. "
        f"Influential tokens: {', '.join(tokens)}. "
        "Explain this email classification to a non-technical reader in "
        "two short sentences."
    )
    try:
        remote = _remote_text(prompt, endpoint, timeout)
    except (urllib.error.URLError, OSError, ValueError, KeyError):
        return Narrative(template, cues, tokens, fallback=True)
    text = f"{remote.strip()} Key tokens: {', '.join(tokens)}"
    return Narrative(text, cues, tokens)


def explanation_to_json(e: Explanation, n: Narrative | None = None) -> dict:
    out: dict = {
        "label": CLASS_NAMES[e.label],
        "confidence": round(e.confidence, 4),
        "coverage": round(e.coverage, 4),
        "features": [{"token": t, "weight": w} for t, w in e.features],
    }
    if n is not None:
        out["narrative"] = n.text
        out["cues"] = list(n.cues)
        out["fallback"] = n.fallback
    return out
