"""Generate a synthetic email corpus, mask PII, and split it stratified.

Shows the full data-preparation path: raw text -> placeholder masking ->
normalized records -> 70/15/15 splits that keep the 60/40 class ratio.
"""

from phishkit.corpus import Dataset, EmailRecord, SplitSpec, stratified_split
from phishkit.privacy import mask_pii
from phishkit.synthetic import generate_corpus
from phishkit.tokenize import normalize

SAMPLES = [
    "Hi Alexis, your bank account 1234567890 has been suspended. "
    "Submit your PIN immediately to renew your access.",
    "reach me at a.b@mail.example or 555-0100",
    "see you at the meeting",
]


def show_masking():
    print("== PII masking ==")
    for s in SAMPLES:
        print(f"  in : {s}")
        print(f"  out: {mask_pii(s)}")
        print()


def show_split():
    print("== stratified split on a 2000-email synthetic corpus ==")
    ds = generate_corpus(n=2000, phishing_frac=0.4, seed=0)
    masked = Dataset(
        [EmailRecord(r.id, normalize(mask_pii(r.text)), r.label) for r in ds]
    )
    splits = stratified_split(masked, SplitSpec(0.70, 0.15, 0.15, seed=0))
    for name, split in zip(("train", "val", "test"), splits):
        counts = split.class_counts
        total = len(split)
        print(
            f"  {name:<6} {total:>5} records  "
            f"safe {counts[0]:>4} ({100 * counts[0] / total:.1f}%)  "
            f"phishing {counts[1]:>4} ({100 * counts[1] / total:.1f}%)"
        )
    print("\n  sample record:", splits[0].records[0].text[:70], "...")


if __name__ == "__main__":
    show_masking()
    show_split()
