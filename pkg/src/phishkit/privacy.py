"""PII masking: replace emails, phones, account numbers, and names with placeholders.

The regexes below are the normative matching contract:

* ``EMAIL``   -- RFC-lite ``local@domain.tld`` (tld of 2+ letters).
* ``PHONE``   -- ``+`` international numbers with optional separators, North
  American ``(xxx) xxx-xxxx`` / ``xxx-xxx-xxxx`` forms, and 7-digit
  ``xxx-xxxx`` locals. A bare unformatted digit run is *not* a phone.
* ``ACCOUNT`` -- standalone digit runs of length >= 6 that survived the
  PHONE pass.
* ``NAME``    -- heuristic: a title-case token right after a greeting word
  (Hi/Hello/Dear/Hey), plus a gazetteer of given names matched title-case.

Rules are always applied in the order EMAIL, PHONE, ACCOUNT, NAME so that
structured patterns win before heuristics. Spans already holding a
placeholder are never rescanned, which makes masking idempotent and keeps
placeholders from nesting.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

MASK_ORDER = ("EMAIL", "PHONE", "ACCOUNT", "NAME")

PLACEHOLDER_RE = re.compile(r"\[(?:EMAIL|PHONE|ACCOUNT|NAME)\]")

EMAIL_RE = re.compile(r"[A-Za-z0-9._%+-]+@[A-Za-z0-9.-]+\.[A-Za-z]{2,}")

PHONE_RE = re.compile(
    r"(?<![\w.])(?:"
    r"\+\d[\d()\-. ]{5,}\d"                         # +international, separators allowed
    r"|(?:\(\d{3}\)\s?|\d{3}[-. ])\d{3}[-. ]\d{4}"  # (xxx) xxx-xxxx / xxx-xxx-xxxx
    r"|\d{3}[-.]\d{4}"                              # 7-digit local: xxx-xxxx
    r")(?!\d)"
)

ACCOUNT_RE = re.compile(r"\b\d{6,}\b")

GREETING_NAME_RE = re.compile(
    r"\b((?:[Hh]i|[Hh]ello|[Dd]ear|[Hh]ey)[ \t]*,?[ \t]+)([A-Z][a-z]+)\b"
)

TITLE_WORD_RE = re.compile(r"\b[A-Z][a-z]+\b")


@dataclass(frozen=True)
class MaskRule:
    """One masking rule: what to find and the placeholder that replaces it."""

    kind: str
    placeholder: str
    matcher: str  # "email", "phone", "account", or "greeting+gazetteer"

    def __post_init__(self):
        if self.kind not in MASK_ORDER:
            raise ValueError(f"unknown mask kind {self.kind!r}")
        if self.placeholder != f"[{self.kind}]":
            raise ValueError(f"placeholder for {self.kind} must be [{self.kind}], "
                             f"got {self.placeholder!r}")


def load_gazetteer(path: str | Path | None = None) -> frozenset[str]:
    """Load given names (one per line, lowercased) from a file or the bundled list."""
    if path is None:
        text = resources.files("phishkit.data").joinpath("names.txt").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    return frozenset(line.strip().lower() for line in text.splitlines() if line.strip())


_default_gazetteer: frozenset[str] | None = None


def default_rules() -> list[MaskRule]:
    return [
        MaskRule("EMAIL", "[EMAIL]", "email"),
        MaskRule("PHONE", "[PHONE]", "phone"),
        MaskRule("ACCOUNT", "[ACCOUNT]", "account"),
        MaskRule("NAME", "[NAME]", "greeting+gazetteer"),
    ]


def _mask_segment(text: str, kinds: set[str], gazetteer: frozenset[str]) -> str:
    if "EMAIL" in kinds:
        text = EMAIL_RE.sub("[EMAIL]", text)
    if "PHONE" in kinds:
        text = PHONE_RE.sub("[PHONE]", text)
    if "ACCOUNT" in kinds:
        text = ACCOUNT_RE.sub("[ACCOUNT]", text)
    if "NAME" in kinds:
        text = GREETING_NAME_RE.sub(r"\1[NAME]", text)
        text = TITLE_WORD_RE.sub(
            lambda m: "[NAME]" if m.group(0).lower() in gazetteer else m.group(0), text)
    return text


def mask_pii(text: str, rules: list[MaskRule] | None = None, *,
             gazetteer: frozenset[str] | None = None) -> str:
    """Replace every matched PII span with its placeholder.

    Application order is fixed (EMAIL, PHONE, ACCOUNT, NAME) regardless of
    the order rules are given in; None means all four default rules. Total
    on valid UTF-8 and idempotent.
    """
    if rules is None:
        rules = default_rules()
    if not rules:
        raise ValueError("mask_pii requires at least one rule")
    kinds = {r.kind for r in rules}
    if gazetteer is None:
        global _default_gazetteer
        if _default_gazetteer is None:
            _default_gazetteer = load_gazetteer()
        gazetteer = _default_gazetteer

    # Existing placeholders are copied through untouched; only the text
    # between them is scanned.
    parts: list[str] = []
    last = 0
    for m in PLACEHOLDER_RE.finditer(text):
        parts.append(_mask_segment(text[last:m.start()], kinds, gazetteer))
        parts.append(m.group(0))
        last = m.end()
    parts.append(_mask_segment(text[last:], kinds, gazetteer))
    return "".join(parts)
