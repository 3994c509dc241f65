"""Text normalization and word-level tokenization over a corpus-built vocabulary."""

from __future__ import annotations

import json
import re
from collections import Counter
from dataclasses import dataclass
from pathlib import Path

UNK_ID = 0
UNK_TOKEN = "<unk>"
PAD_ID = 1
PAD_TOKEN = "<pad>"

# Bracketed placeholders stay atomic; otherwise word runs and single
# punctuation marks are the tokens.
TOKEN_RE = re.compile(r"\[[a-z]+\]|\w+|[^\w\s]")


def normalize(text: str) -> str:
    """Lowercase and collapse whitespace runs to single spaces."""
    return " ".join(text.lower().split())


@dataclass(frozen=True)
class TokenSequence:
    """Encoded text: ids, surface tokens, and (start, end) offsets into the source."""

    ids: tuple[int, ...]
    tokens: tuple[str, ...]
    spans: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if not (len(self.ids) == len(self.tokens) == len(self.spans)):
            raise ValueError("ids, tokens, spans must have equal length")
        prev_end = -1
        for start, end in self.spans:
            if start < prev_end:
                raise ValueError("spans must be ordered and non-overlapping")
            prev_end = end

    def __len__(self) -> int:
        return len(self.ids)


class Vocabulary:
    """Immutable token <-> id mapping with reserved UNK (0) and PAD (1) slots."""

    def __init__(
        self,
        token_to_id: dict[str, int],
        *,
        min_freq: int = 1,
        max_size: int | None = None,
    ):
        if token_to_id.get(UNK_TOKEN) != UNK_ID or token_to_id.get(PAD_TOKEN) != PAD_ID:
            raise ValueError(
                f"{UNK_TOKEN!r} and {PAD_TOKEN!r} must map to ids {UNK_ID} and {PAD_ID}"
            )
        if sorted(token_to_id.values()) != list(range(len(token_to_id))):
            raise ValueError("token ids must be contiguous from 0")
        self._token_to_id = dict(token_to_id)
        self._id_to_token = {i: t for t, i in token_to_id.items()}
        self.min_freq = min_freq
        self.max_size = max_size

    def __len__(self) -> int:
        return len(self._token_to_id)

    def __contains__(self, token: str) -> bool:
        return token in self._token_to_id

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Vocabulary):
            return NotImplemented
        return self._token_to_id == other._token_to_id

    def id_for(self, token: str) -> int:
        return self._token_to_id.get(token, UNK_ID)

    def token_for(self, idx: int) -> str:
        return self._id_to_token[idx]

    def items(self):
        return self._token_to_id.items()

    def save(self, path: str | Path) -> None:
        payload = {
            "format_version": 1,
            "min_freq": self.min_freq,
            "max_size": self.max_size,
            "token_to_id": self._token_to_id,
        }
        Path(path).write_text(
            json.dumps(payload, ensure_ascii=False, indent=0, sort_keys=True),
            encoding="utf-8",
        )

    @classmethod
    def load(cls, path: str | Path) -> "Vocabulary":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        return cls(
            payload["token_to_id"],
            min_freq=payload.get("min_freq", 1),
            max_size=payload.get("max_size"),
        )


def build_vocab(
    corpus: list[str],
    min_freq: int = 1,
    max_size: int | None = None,
) -> Vocabulary:
    """Build a vocabulary from the train split only.

    Tokens with frequency >= min_freq enter most-frequent-first; ties break
    lexicographically. max_size caps the total vocabulary size including the
    two reserved slots.
    """
    if not corpus:
        raise ValueError("cannot build a vocabulary from an empty corpus")
    if max_size is not None and max_size < 2:
        raise ValueError("max_size must leave room for UNK and PAD")
    counts: Counter[str] = Counter()
    for doc in corpus:
        counts.update(TOKEN_RE.findall(normalize(doc)))
    kept = sorted(
        (t for t, c in counts.items() if c >= min_freq and t not in (UNK_TOKEN, PAD_TOKEN)),
        key=lambda t: (-counts[t], t),
    )
    if max_size is not None:
        kept = kept[: max_size - 2]
    token_to_id = {UNK_TOKEN: UNK_ID, PAD_TOKEN: PAD_ID}
    for t in kept:
        token_to_id[t] = len(token_to_id)
    return Vocabulary(token_to_id, min_freq=min_freq, max_size=max_size)


def encode(text: str, v: Vocabulary, max_len: int = 256) -> TokenSequence:
    """Map normalized text to a TokenSequence, OOV -> UNK, truncated to max_len."""
    ids: list[int] = []
    tokens: list[str] = []
    spans: list[tuple[int, int]] = []
    for m in TOKEN_RE.finditer(text):
        if len(ids) >= max_len:
            break
        tokens.append(m.group())
        ids.append(v.id_for(m.group()))
        spans.append(m.span())
    return TokenSequence(tuple(ids), tuple(tokens), tuple(spans))
