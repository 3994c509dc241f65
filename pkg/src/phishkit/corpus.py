"""Email corpus loading, label encoding, and stratified splitting."""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

logger = logging.getLogger(__name__)

SAFE = 0
PHISHING = 1

# Accepted spellings for the two classes, matched case-insensitively.
LABEL_ALIASES = {
    "safe email": SAFE,
    "phishing email": PHISHING,
    "safe": SAFE,
    "phishing": PHISHING,
    "legitimate": SAFE,
    "ham": SAFE,
    "0": SAFE,
    "1": PHISHING,
}


def coerce_label(raw) -> int | None:
    """Map a raw label value to 0/1, or None if it is not recognized."""
    if isinstance(raw, bool):
        return int(raw)
    if isinstance(raw, (int, float)) and raw in (0, 1):
        return int(raw)
    if isinstance(raw, str):
        return LABEL_ALIASES.get(raw.strip().lower())
    return None


@dataclass(frozen=True)
class EmailRecord:
    """One labeled email: the atom of every pipeline stage."""

    id: str
    text: str
    label: int

    def __post_init__(self):
        if self.label not in (SAFE, PHISHING):
            raise ValueError(f"record {self.id!r}: label must be 0 or 1, got {self.label!r}")
        if not self.text.strip():
            raise ValueError(f"record {self.id!r}: text is empty")


@dataclass
class Dataset:
    """Ordered collection of EmailRecords with unique ids.

    ``skipped_rows`` counts input rows rejected during loading (empty text
    or unrecognized label); it is 0 for datasets built in memory.
    """

    records: list[EmailRecord] = field(default_factory=list)
    skipped_rows: int = 0

    def __post_init__(self):
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            seen, dup = set(), None
            for i in ids:
                if i in seen:
                    dup = i
                    break
                seen.add(i)
            raise ValueError(f"duplicate record id {dup!r}")

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    @property
    def class_counts(self) -> dict[int, int]:
        counts = {SAFE: 0, PHISHING: 0}
        for r in self.records:
            counts[r.label] += 1
        return counts


@dataclass(frozen=True)
class SplitSpec:
    """Train/val/test fractions plus the shuffle seed."""

    train_frac: float = 0.70
    val_frac: float = 0.15
    test_frac: float = 0.15
    seed: int = 0

    def __post_init__(self):
        for name, frac in (("train_frac", self.train_frac),
                           ("val_frac", self.val_frac),
                           ("test_frac", self.test_frac)):
            if not 0.0 < frac < 1.0:
                raise ValueError(f"{name} must be in (0, 1), got {frac}")
        total = self.train_frac + self.val_frac + self.test_frac
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {total}")


def load_dataset(path: str | Path, format: str = "csv", *,
                 text_col: str = "text", label_col: str = "label",
                 id_col: str = "id") -> Dataset:
    """Load a labeled email file into a Dataset.

    Labels are encoded 0 (safe) / 1 (phishing). Rows with empty text or an
    unrecognized label are skipped and counted in ``Dataset.skipped_rows``;
    structurally unparseable rows raise with their row number.
    """
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(f"dataset file not found: {path}")
    if format == "csv":
        rows = _read_csv(path, text_col, label_col, id_col)
    elif format == "jsonl":
        rows = _read_jsonl(path, text_col, label_col, id_col)
    else:
        raise ValueError(f"unknown format {format!r}; expected 'csv' or 'jsonl'")

    records: list[EmailRecord] = []
    skipped = 0
    for row_no, rec_id, text, raw_label in rows:
        label = coerce_label(raw_label)
        if label is None or not isinstance(text, str) or not text.strip():
            skipped += 1
            continue
        records.append(EmailRecord(id=rec_id, text=text, label=label))
    if skipped:
        logger.info("load_dataset: skipped %d row(s) with empty text or unknown label", skipped)
    return Dataset(records=records, skipped_rows=skipped)


def _read_csv(path: Path, text_col: str, label_col: str, id_col: str):
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            return
        for col in (text_col, label_col):
            if col not in reader.fieldnames:
                raise ValueError(f"{path}: missing required column {col!r} "
                                 f"(have {reader.fieldnames})")
        for row_no, row in enumerate(reader, start=2):  # header is line 1
            if row.get(text_col) is None or row.get(label_col) is None:
                raise ValueError(f"{path}: row {row_no} is malformed")
            rec_id = row.get(id_col) or f"row{row_no - 1:06d}"
            yield row_no, rec_id, row[text_col], row[label_col]


def _read_jsonl(path: Path, text_col: str, label_col: str, id_col: str):
    with open(path, encoding="utf-8") as fh:
        for row_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: row {row_no} is not valid JSON: {exc}") from exc
            if not isinstance(obj, dict) or text_col not in obj or label_col not in obj:
                raise ValueError(f"{path}: row {row_no} lacks {text_col!r}/{label_col!r} keys")
            rec_id = str(obj.get(id_col) or f"row{row_no:06d}")
            yield row_no, rec_id, obj[text_col], obj[label_col]


def stratified_split(d: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    """Split into (train, val, test) preserving per-class proportions.

    Records are canonically sorted by id before the seeded shuffle, so the
    split is independent of input row order. Within each class the val and
    test sizes use floor rounding and the remainder goes to train.
    """
    by_class: dict[int, list[EmailRecord]] = {SAFE: [], PHISHING: []}
    for r in d.records:
        by_class[r.label].append(r)
    if not by_class[SAFE] or not by_class[PHISHING]:
        raise ValueError("stratified_split requires both classes to be present")

    parts: dict[str, list[EmailRecord]] = {"train": [], "val": [], "test": []}
    for cls in (SAFE, PHISHING):
        recs = sorted(by_class[cls], key=lambda r: r.id)
        rng = np.random.default_rng([spec.seed, cls])
        order = rng.permutation(len(recs))
        recs = [recs[i] for i in order]

        n = len(recs)
        n_val = int(np.floor(spec.val_frac * n))
        n_test = int(np.floor(spec.test_frac * n))
        n_train = n - n_val - n_test
        if min(n_train, n_val, n_test) < 1:
            raise ValueError(f"class {cls} has too few records ({n}) to appear in every split")
        parts["train"].extend(recs[:n_train])
        parts["val"].extend(recs[n_train:n_train + n_val])
        parts["test"].extend(recs[n_train + n_val:])

    def finish(rs: list[EmailRecord]) -> Dataset:
        return Dataset(records=sorted(rs, key=lambda r: r.id))

    return finish(parts["train"]), finish(parts["val"]), finish(parts["test"])


def save_jsonl(d: Dataset, path: str | Path) -> None:
    """Write records as one JSON object per line (keys: id, text, label)."""
    with open(path, "w", encoding="utf-8") as fh:
        for r in d.records:
            fh.write(json.dumps({"id": r.id, "text": r.text, "label": r.label},
                                ensure_ascii=False) + "\n")
