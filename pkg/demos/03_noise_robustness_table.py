"""Character-noise robustness: baseline vs FGM accuracy as typos pile up.

Perturbs the held-out test set at 5/10/20% edit budgets (deletes, homoglyph
swaps like o->0, insertions, transpositions) and prints the report table.
"""

from phishkit.advtrain import FgmConfig, TrainConfig, train
from phishkit.corpus import SplitSpec, stratified_split
from phishkit.metrics import robustness_report
from phishkit.model import TextClassifier, init_params
from phishkit.perturb import NoiseSpec, inject_noise, make_noisy_testsets
from phishkit.synthetic import generate_corpus
from phishkit.tokenize import build_vocab

SEED = 2
LEVELS = [0.05, 0.10, 0.20]


def show_single_string():
    print("== what the noise looks like ==")
    text = "Urgent: Verify Your Account Immediately!"
    for level in LEVELS:
        noisy, edits = inject_noise(text, NoiseSpec(level, seed=4))
        print(f"  {level:>4.0%} ({len(edits)} edits): {noisy}")
    print()


def fit(fgm, tr, va, vocab):
    cfg = TrainConfig(lr=5.0, epochs=6, batch_size=4, grad_accum=8,
                      seed=SEED, fgm=fgm)
    best, _ = train(init_params(len(vocab), d=32, seed=SEED), tr, va, vocab, cfg)
    return TextClassifier(best, vocab)


if __name__ == "__main__":
    show_single_string()

    ds = generate_corpus(n=2000, phishing_frac=0.4, seed=SEED)
    tr, va, te = stratified_split(ds, SplitSpec(0.70, 0.15, 0.15, SEED))
    vocab = build_vocab([r.text for r in tr], min_freq=2)
    noisy = make_noisy_testsets(te, LEVELS, SEED)

    models = {
        "baseline": fit(None, tr, va, vocab).predict_proba,
        "fgm": fit(FgmConfig(0.9, 0.6), tr, va, vocab).predict_proba,
    }
    report = robustness_report(models, te, noisy, metadata={"seed": SEED})
    print(report.to_text())
