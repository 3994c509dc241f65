"""Explainable, adversarially trained phishing email classification toolkit."""

from .advtrain import EpochStats, FgmConfig, GradAccumulator, TrainConfig, adversarial_step, fgm_delta, train
from .corpus import (
    Dataset,
    EmailRecord,
    PHISHING,
    SAFE,
    SplitSpec,
    coerce_label,
    load_dataset,
    save_jsonl,
    stratified_split,
)
from .explain import (
    CLASS_NAMES,
    Explanation,
    LimeConfig,
    Narrative,
    explanation_to_json,
    generate_narrative,
    lime_explain,
    load_cue_lexicons,
)
from .metrics import (
    ConfusionMatrix,
    EvalReport,
    MetricValue,
    accuracy,
    auc,
    confusion,
    f1,
    precision,
    recall,
    robustness_report,
)
from .model import (
    ForwardTrace,
    Gradients,
    LossBreakdown,
    ModelParams,
    TextClassifier,
    backward,
    forward,
    init_params,
    load_checkpoint,
    loss,
    save_checkpoint,
)
from .perturb import (
    DEFAULT_HOMOGLYPHS,
    DEFAULT_OPS,
    Edit,
    NoiseSpec,
    inject_noise,
    load_homoglyphs,
    make_noisy_testsets,
    perturb_testset,
)
from .privacy import MaskRule, default_rules, load_gazetteer, mask_pii
from .synthetic import generate_corpus
from .tokenize import (
    PAD_ID,
    PAD_TOKEN,
    TokenSequence,
    UNK_ID,
    UNK_TOKEN,
    Vocabulary,
    build_vocab,
    encode,
    normalize,
)

__version__ = "0.1.0"

__all__ = [
    "CLASS_NAMES",
    "ConfusionMatrix",
    "DEFAULT_HOMOGLYPHS",
    "DEFAULT_OPS",
    "Dataset",
    "Edit",
    "EmailRecord",
    "EpochStats",
    "EvalReport",
    "Explanation",
    "FgmConfig",
    "ForwardTrace",
    "GradAccumulator",
    "Gradients",
    "LimeConfig",
    "LossBreakdown",
    "MaskRule",
    "MetricValue",
    "ModelParams",
    "Narrative",
    "NoiseSpec",
    "PAD_ID",
    "PAD_TOKEN",
    "PHISHING",
    "SAFE",
    "SplitSpec",
    "TextClassifier",
    "TokenSequence",
    "TrainConfig",
    "UNK_ID",
    "UNK_TOKEN",
    "Vocabulary",
    "accuracy",
    "adversarial_step",
    "auc",
    "backward",
    "build_vocab",
    "coerce_label",
    "confusion",
    "default_rules",
    "encode",
    "explanation_to_json",
    "f1",
    "fgm_delta",
    "forward",
    "generate_corpus",
    "generate_narrative",
    "init_params",
    "lime_explain",
    "load_checkpoint",
    "load_cue_lexicons",
    "load_dataset",
    "load_gazetteer",
    "load_homoglyphs",
    "loss",
    "make_noisy_testsets",
    "mask_pii",
    "normalize",
    "perturb_testset",
    "precision",
    "recall",
    "robustness_report",
    "save_checkpoint",
    "save_jsonl",
    "stratified_split",
    "train",
]
