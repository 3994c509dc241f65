"""Metric plumbing on hand-built scenarios: confusion counts, PRF1, AUC.

Includes the zero-denominator cases (degenerate flags instead of NaN) and a
tie-heavy AUC where the midrank treatment matters.
"""

from phishkit.metrics import (
    ConfusionMatrix,
    accuracy,
    auc,
    confusion,
    f1,
    precision,
    recall,
)


def show(cm, title):
    print(f"== {title} ==")
    print(f"  tp {cm.tp}  tn {cm.tn}  fp {cm.fp}  fn {cm.fn}")
    for name, fn in (("accuracy", accuracy), ("precision", precision),
                     ("recall", recall), ("f1", f1)):
        v = fn(cm)
        flag = "  (degenerate: zero denominator)" if v.degenerate else ""
        print(f"  {name:<9} {float(v):.4f}{flag}")
    print()


if __name__ == "__main__":
    preds = [1] * 40 + [0] * 45 + [1] * 5 + [0] * 10
    labels = [1] * 40 + [0] * 45 + [0] * 5 + [1] * 10
    show(confusion(preds, labels), "balanced scenario")

    show(ConfusionMatrix(tp=0, tn=10, fp=0, fn=5),
         "model that never says phishing")

    print("== AUC with heavy ties ==")
    scores = [0.2, 0.5, 0.5, 0.5, 0.9, 0.5]
    labels = [0, 0, 1, 1, 1, 0]
    print(f"  scores {scores}")
    print(f"  labels {labels}")
    print(f"  auc = {auc(scores, labels):.4f}  "
          "(tied positive/negative pairs count one half)")
