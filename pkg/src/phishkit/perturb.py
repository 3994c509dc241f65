"""Character-level adversarial noise for robustness test sets.

Edits target letter/digit positions only, never whitespace, punctuation, or
anything inside bracketed placeholders like [email]. The edit budget is
k = round(level * eligible_char_count), rounding half away from zero, where
eligible_char_count counts exactly the editable positions.
"""

from __future__ import annotations

import hashlib
import math
import re
import string
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .corpus import Dataset, EmailRecord

DELETE = "delete"
HOMOGLYPH = "homoglyph"
INSERT = "insert"
SWAP = "swap"
DEFAULT_OPS = (DELETE, HOMOGLYPH, INSERT, SWAP)

DEFAULT_HOMOGLYPHS = {
    "o": "0",
    "l": "1",
    "i": "1",
    "e": "3",
    "a": "@",
    "s": "5",
    "t": "7",
}

PLACEHOLDER_SPAN_RE = re.compile(r"\[[A-Za-z]+\]")
ALPHABET = string.ascii_lowercase


@dataclass(frozen=True)
class NoiseSpec:
    level: float
    ops: tuple[str, ...] = DEFAULT_OPS
    homoglyphs: dict[str, str] | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.level <= 1.0:
            raise ValueError("level must be in [0, 1]")
        if not self.ops:
            raise ValueError("ops must be non-empty")
        unknown = set(self.ops) - set(DEFAULT_OPS)
        if unknown:
            raise ValueError(f"unknown ops: {sorted(unknown)}")
        table = self.homoglyphs if self.homoglyphs is not None else DEFAULT_HOMOGLYPHS
        for src, dst in table.items():
            if len(src) != 1 or len(dst) != 1:
                raise ValueError("homoglyph table must map single chars to single chars")

    @property
    def table(self) -> dict[str, str]:
        return self.homoglyphs if self.homoglyphs is not None else DEFAULT_HOMOGLYPHS


@dataclass(frozen=True)
class Edit:
    position: int
    op: str
    before: str
    after: str


def _round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5))


def _protected(text: str) -> set[int]:
    spans: set[int] = set()
    for m in PLACEHOLDER_SPAN_RE.finditer(text):
        spans.update(range(m.start(), m.end()))
    return spans


def eligible_positions(text: str) -> list[int]:
    blocked = _protected(text)
    return [i for i, ch in enumerate(text) if ch.isalnum() and i not in blocked]


def _random_letter(rng: np.random.Generator, exclude: str | None = None) -> str:
    pool = ALPHABET if exclude is None else ALPHABET.replace(exclude, "")
    return pool[int(rng.integers(len(pool)))]


def inject_noise(text: str, spec: NoiseSpec) -> tuple[str, list[Edit]]:
    """Apply exactly round(level * eligible_count) single-position edits.

    Positions are drawn uniformly without replacement; each position gets one
    enabled op drawn uniformly. Randomness is consumed in ascending position
    order, then edits apply back-to-front so recorded positions stay in the
    original string's coordinates.
    """
    if not text:
        raise ValueError("text must be non-empty")
    eligible = eligible_positions(text)
    k = _round_half_away(spec.level * len(eligible))
    if k == 0:
        return text, []
    rng = np.random.default_rng(spec.seed)
    picked = rng.choice(len(eligible), size=k, replace=False)
    positions = sorted(eligible[int(i)] for i in picked)

    plan: list[tuple[int, str, str]] = []  # (position, op, aux char)
    for pos in positions:
        op = spec.ops[int(rng.integers(len(spec.ops)))]
        aux = ""
        if op == HOMOGLYPH:
            ch = text[pos]
            sub = spec.table.get(ch, spec.table.get(ch.lower()))
            aux = sub if sub is not None else _random_letter(rng, exclude=ch.lower())
        elif op == INSERT:
            aux = _random_letter(rng)
        plan.append((pos, op, aux))

    chars = list(text)
    edits: list[Edit] = []
    for pos, op, aux in reversed(plan):
        ch = chars[pos]
        if op == DELETE:
            del chars[pos]
            edits.append(Edit(pos, DELETE, ch, ""))
        elif op == HOMOGLYPH:
            chars[pos] = aux
            edits.append(Edit(pos, HOMOGLYPH, ch, aux))
        elif op == INSERT:
            chars.insert(pos + 1, aux)
            edits.append(Edit(pos, INSERT, ch, ch + aux))
        else:  # SWAP with the following char; fall back to the preceding one
            # earlier edits may have shifted placeholders, so re-derive
            # protection from the current string state
            blocked = _protected("".join(chars))
            if pos + 1 < len(chars) and pos + 1 not in blocked:
                a, b = chars[pos], chars[pos + 1]
                chars[pos], chars[pos + 1] = b, a
                edits.append(Edit(pos, SWAP, a + b, b + a))
            elif pos > 0 and pos - 1 not in blocked:
                a, b = chars[pos - 1], chars[pos]
                chars[pos - 1], chars[pos] = b, a
                edits.append(Edit(pos - 1, SWAP, a + b, b + a))
            else:
                edits.append(Edit(pos, SWAP, ch, ch))  # nothing to swap with
    edits.reverse()
    return "".join(chars), edits


def record_subseed(seed: int, record_id: str, level: float) -> int:
    digest = hashlib.sha256(f"{seed}|{record_id}|{level:.6g}".encode("utf-8")).digest()
    return int.from_bytes(digest, "big")


def perturb_testset(
    test: Dataset, level: float, seed: int, *, spec: NoiseSpec | None = None
) -> tuple[Dataset, dict[str, list[Edit]]]:
    """Perturb every record at one level; labels and ids are preserved and the
    clean dataset is never mutated. Per-record sub-seeds derive from
    (seed, record id, level) so each set reproduces independently."""
    base = spec if spec is not None else NoiseSpec(level=level, seed=seed)
    records: list[EmailRecord] = []
    edits_by_id: dict[str, list[Edit]] = {}
    for r in test:
        sub = replace(base, level=level, seed=record_subseed(seed, r.id, level))
        noisy, edits = inject_noise(r.text, sub)
        records.append(EmailRecord(r.id, noisy, r.label))
        edits_by_id[r.id] = edits
    return Dataset(records), edits_by_id


def make_noisy_testsets(
    test: Dataset, levels: list[float], seed: int, *, spec: NoiseSpec | None = None
) -> dict[float, Dataset]:
    if len(test) == 0:
        raise ValueError("test split is empty")
    out: dict[float, Dataset] = {}
    for level in levels:
        out[level], _ = perturb_testset(test, level, seed, spec=spec)
    return out


def load_homoglyphs(path: str | Path) -> dict[str, str]:
    """Two tab-separated columns per line: from<TAB>to."""
    table: dict[str, str] = {}
    for n, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != 2 or len(parts[0]) != 1 or len(parts[1]) != 1:
            raise ValueError(f"line {n}: expected single-char from<TAB>to, got {line!r}")
        table[parts[0]] = parts[1]
    if not table:
        raise ValueError("homoglyph table is empty")
    return table
