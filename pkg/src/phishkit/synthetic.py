"""Seeded synthetic email corpus: cue-word phishing templates vs. benign
office templates, with deliberate overlap so the class boundary is not a
single-keyword lookup.

Singleton nonsense tokens appear exactly once corpus-wide; building the
vocabulary with min_freq >= 2 maps them to UNK, so UNK is trained on both
classes instead of staying at its random initialization.
"""

from __future__ import annotations

import numpy as np

from .corpus import Dataset, EmailRecord, PHISHING, SAFE

PHISH_OPENERS = (
    "urgent warning",
    "final notice",
    "security alert",
    "action required",
    "account warning",
)
URGENCY = ("urgent", "immediately", "now", "final", "warning", "deadline", "expires", "today")
CRED = ("verify", "password", "login", "reset", "confirm", "security", "credentials")
FIN = ("account", "payment", "bank", "card", "invoice", "refund", "suspended", "funds")
LINK = ("click", "link", "website", "visit", "follow")
BENIGN = (
    "team", "project", "report", "quarterly", "update", "schedule", "review",
    "draft", "feedback", "progress", "notes", "agenda", "meeting", "discussed",
    "sprint", "roadmap", "budget", "interview", "lunch", "office", "summary",
    "slides", "metrics", "dashboard", "planning", "session", "milestone", "goals",
)
NEUTRAL = (
    "please", "the", "your", "our", "for", "this", "week", "regards", "thanks",
    "hello", "see", "below", "details", "attached", "when", "you", "can",
)


def _sample(rng: np.random.Generator, pool: tuple[str, ...], lo: int, hi: int) -> list[str]:
    k = int(rng.integers(lo, hi + 1))
    if k == 0:
        return []
    idx = rng.choice(len(pool), size=min(k, len(pool)), replace=False)
    return [pool[int(i)] for i in idx]


class _Singletons:
    """Unique-per-corpus nonsense tokens."""

    def __init__(self) -> None:
        self.counter = 0

    def next(self) -> str:
        self.counter += 1
        return f"zx{self.counter:04d}q"


def _phishing_text(rng: np.random.Generator, singles: _Singletons,
                   benign_rate: float, singleton_rate: float) -> str:
    words: list[str] = []
    if rng.random() < 0.4:
        words.append("hello [name] ,")
    words.append(PHISH_OPENERS[int(rng.integers(len(PHISH_OPENERS)))])
    body = (
        _sample(rng, URGENCY, 1, 3)
        + _sample(rng, CRED, 1, 3)
        + _sample(rng, FIN, 1, 3)
        + _sample(rng, LINK, 0, 2)
        + _sample(rng, NEUTRAL, 2, 5)
    )
    if rng.random() < benign_rate:
        body += _sample(rng, BENIGN, 1, 2)
    if rng.random() < singleton_rate:
        body.append(singles.next())
    rng.shuffle(body)
    words.extend(body)
    if rng.random() < 0.3:
        words.append("your [account] is on hold")
    return " ".join(words)


def _benign_text(rng: np.random.Generator, singles: _Singletons,
                 cue_rate: float, singleton_rate: float) -> str:
    words: list[str] = []
    if rng.random() < 0.4:
        words.append("hi [name] ,")
    body = _sample(rng, BENIGN, 5, 10) + _sample(rng, NEUTRAL, 3, 6)
    if rng.random() < cue_rate:
        # one stray cue word keeps the boundary honest
        pool = (URGENCY, CRED, FIN)[int(rng.integers(3))]
        body += _sample(rng, pool, 1, 1)
    if rng.random() < singleton_rate:
        body.append(singles.next())
    rng.shuffle(body)
    words.extend(body)
    return " ".join(words)


def generate_corpus(
    n: int = 2000,
    phishing_frac: float = 0.4,
    seed: int = 0,
    *,
    safe_cue_rate: float = 0.15,
    phish_benign_rate: float = 0.5,
    singleton_rate: float = 0.5,
) -> Dataset:
    if n < 2:
        raise ValueError("need at least one record per class")
    if not 0.0 < phishing_frac < 1.0:
        raise ValueError("phishing_frac must be in (0, 1)")
    n_phish = round(n * phishing_frac)
    n_safe = n - n_phish
    if n_phish == 0 or n_safe == 0:
        raise ValueError("need at least one record per class")
    rng = np.random.default_rng(seed)
    singles = _Singletons()
    records: list[EmailRecord] = []
    for i in range(n_safe):
        text = _benign_text(rng, singles, safe_cue_rate, singleton_rate)
        records.append(EmailRecord(f"syn{i:05d}", text, SAFE))
    for i in range(n_safe, n_safe + n_phish):
        text = _phishing_text(rng, singles, phish_benign_rate, singleton_rate)
        records.append(EmailRecord(f"syn{i:05d}", text, PHISHING))
    return Dataset(records)
