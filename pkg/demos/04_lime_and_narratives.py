"""Explain individual verdicts: LIME token weights plus plain-language text.

Trains a small model, then asks which tokens drove two predictions and turns
each explanation into a grounded narrative (template mode, deterministic).
"""

from phishkit.advtrain import FgmConfig, TrainConfig, train
from phishkit.corpus import SplitSpec, stratified_split
from phishkit.explain import LimeConfig, generate_narrative, lime_explain
from phishkit.model import TextClassifier, init_params
from phishkit.synthetic import generate_corpus
from phishkit.tokenize import build_vocab

SEED = 0

EMAILS = [
    "urgent warning verify your password now your [account] is on hold",
    "meeting notes and sprint agenda attached see you this week",
]


def explain(clf, text):
    e = lime_explain(clf.predict_proba, text, LimeConfig(n_samples=500, top_k=6))
    n = generate_narrative(e)
    print(f"  email    : {text}")
    print(f"  verdict  : {'PHISHING' if e.label else 'LEGITIMATE'} "
          f"(confidence {e.confidence:.2f}, surrogate R^2 {e.coverage:.2f})")
    print("  weights  :")
    for token, w in e.features:
        bar = "#" * max(1, int(abs(w) * 40))
        print(f"    {token:<12} {w:+.3f} {bar}")
    print(f"  narrative: {n.text}")
    print()


if __name__ == "__main__":
    ds = generate_corpus(n=2000, phishing_frac=0.4, seed=SEED)
    tr, va, _ = stratified_split(ds, SplitSpec(0.70, 0.15, 0.15, SEED))
    vocab = build_vocab([r.text for r in tr], min_freq=2)
    cfg = TrainConfig(lr=5.0, epochs=6, batch_size=4, grad_accum=8, seed=SEED,
                      fgm=FgmConfig(0.9, 0.6))
    best, _ = train(init_params(len(vocab), d=32, seed=SEED), tr, va, vocab, cfg)
    clf = TextClassifier(best, vocab)

    print("== token attributions and narratives ==\n")
    for text in EMAILS:
        explain(clf, text)
