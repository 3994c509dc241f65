"""Command-line pipeline: prepare, train, eval, perturb, explain, report.

Every run is config-bound: a TOML/JSON config file supplies defaults, flags
override it, and all randomness comes from explicit seeds. Usage errors exit
with status 64; an explain verdict of PHISHING exits with status 2.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    try:
        import tomli as tomllib
    except ModuleNotFoundError:
        tomllib = None

from . import advtrain, corpus, explain, metrics, model, perturb, privacy
from .tokenize import Vocabulary, build_vocab, normalize

EX_USAGE = 64


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # keep exit code 2 reserved for verdicts
        self.print_usage(sys.stderr)
        self.exit(EX_USAGE, f"{self.prog}: error: {message}\n")


def _load_config(path: str) -> dict:
    p = Path(path)
    if p.suffix == ".toml":
        if tomllib is None:
            raise SystemExit("TOML support unavailable on this interpreter; use a JSON config")
        cfg = tomllib.loads(p.read_text(encoding="utf-8"))
    elif p.suffix == ".json":
        cfg = json.loads(p.read_text(encoding="utf-8"))
    else:
        raise SystemExit(f"config must be .toml or .json, got {p.suffix!r}")
    if "lambda" in cfg:
        cfg["lam"] = cfg.pop("lambda")
    return cfg


def _apply_config(parser: argparse.ArgumentParser, cfg: dict) -> None:
    known = {a.dest for a in parser._actions}
    parser.set_defaults(**{k: v for k, v in cfg.items() if k in known})


def _parse_levels(raw: str) -> list[float]:
    try:
        levels = [float(x) for x in raw.split(",") if x.strip()]
    except ValueError:
        raise SystemExit(f"bad --noise-levels value: {raw!r}")
    if not levels:
        raise SystemExit("--noise-levels must name at least one level")
    return levels


def _read_split(outdir: Path, name: str) -> corpus.Dataset:
    path = outdir / f"{name}.jsonl"
    if not path.exists():
        raise SystemExit(f"missing artifact {path}; run `prepare` first")
    return corpus.load_dataset(path, format="jsonl")


def _read_vocab(outdir: Path) -> Vocabulary:
    path = outdir / "vocab.json"
    if not path.exists():
        raise SystemExit(f"missing artifact {path}; run `prepare` first")
    return Vocabulary.load(path)


def _noise_spec_kwargs(args) -> dict:
    table = perturb.load_homoglyphs(args.homoglyphs) if args.homoglyphs else None
    return {"spec": perturb.NoiseSpec(level=0.0, homoglyphs=table)} if table else {}


# ---------------------------------------------------------------- commands


def cmd_prepare(args) -> int:
    ds = corpus.load_dataset(
        args.dataset,
        format=args.format,
        text_col=args.text_col,
        label_col=args.label_col,
        id_col=args.id_col,
    )
    gazetteer = privacy.load_gazetteer(args.names_file) if args.names_file else None
    records = []
    for r in ds:
        try:
            text = privacy.mask_pii(r.text, gazetteer=gazetteer) if args.mask else r.text
            records.append(corpus.EmailRecord(r.id, normalize(text), r.label))
        except Exception as e:
            raise SystemExit(f"privacy: record {r.id}: {e}")
    masked = corpus.Dataset(records, skipped_rows=ds.skipped_rows)

    spec = corpus.SplitSpec(args.train_frac, args.val_frac, args.test_frac, args.seed)
    train_split, val_split, test_split = corpus.stratified_split(masked, spec)
    splits = {"train": train_split, "val": val_split, "test": test_split}
    outdir = Path(args.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    for name, split in splits.items():
        corpus.save_jsonl(split, outdir / f"{name}.jsonl")
    vocab = build_vocab(
        [r.text for r in train_split], min_freq=args.min_freq, max_size=args.max_size
    )
    vocab.save(outdir / "vocab.json")

    print(f"loaded {len(ds)} records ({ds.skipped_rows} skipped); vocab {len(vocab)} tokens")
    print(f"{'split':<7}{'total':>7}{'safe':>7}{'phishing':>10}{'safe%':>9}{'phishing%':>11}")
    for name, split in splits.items():
        counts = split.class_counts
        total = len(split)
        print(
            f"{name:<7}{total:>7}{counts[corpus.SAFE]:>7}{counts[corpus.PHISHING]:>10}"
            f"{100 * counts[corpus.SAFE] / total:>9.2f}"
            f"{100 * counts[corpus.PHISHING] / total:>11.2f}"
        )
    return 0


def cmd_train(args) -> int:
    outdir = Path(args.outdir)
    train_ds = _read_split(outdir, "train")
    val_ds = _read_split(outdir, "val")
    vocab = _read_vocab(outdir)
    fgm = advtrain.FgmConfig(args.epsilon, args.lam) if args.fgm else None
    cfg = advtrain.TrainConfig(
        lr=args.lr,
        epochs=args.epochs,
        batch_size=args.batch_size,
        grad_accum=args.grad_accum,
        seed=args.seed,
        fgm=fgm,
        max_len=args.max_len,
    )
    params = model.init_params(len(vocab), d=args.d, seed=args.seed)
    best, history = advtrain.train(params, train_ds, val_ds, vocab, cfg)

    variant = "fgm" if args.fgm else "baseline"
    ckpt = Path(args.checkpoint) if args.checkpoint else outdir / f"model_{variant}.npz"
    model.save_checkpoint(best, ckpt)
    hist_path = outdir / f"history_{variant}.jsonl"
    with open(hist_path, "w", encoding="utf-8") as fh:
        for ep in history:
            fh.write(json.dumps(asdict(ep)) + "\n")
    for ep in history:
        print(
            f"epoch {ep.epoch}: l_clean {ep.l_clean:.4f}  l_adv {ep.l_adv:.4f}  "
            f"l_total {ep.l_total:.4f}  val_acc {ep.val_accuracy:.4f}  "
            f"{ep.seconds:.2f}s"
        )
    print(f"checkpoint -> {ckpt}")
    print(f"history -> {hist_path}")
    return 0


def cmd_eval(args) -> int:
    outdir = Path(args.outdir)
    test_ds = _read_split(outdir, "test")
    vocab = _read_vocab(outdir)
    levels = _parse_levels(args.noise_levels)
    noisy = perturb.make_noisy_testsets(test_ds, levels, args.seed, **_noise_spec_kwargs(args))

    models = {}
    for ckpt in args.checkpoints:
        params = model.load_checkpoint(ckpt)
        clf = model.TextClassifier(params, vocab, max_len=args.max_len)
        models[Path(ckpt).stem] = clf.predict_proba
    report = metrics.robustness_report(
        models,
        test_ds,
        noisy,
        threshold=args.threshold,
        metadata={"seed": args.seed, "levels": levels, "checkpoints": list(args.checkpoints)},
    )
    (outdir / "report.json").write_text(report.to_json(), encoding="utf-8")
    (outdir / "report.txt").write_text(report.to_text(), encoding="utf-8")
    print(report.to_text(), end="")
    print(f"report -> {outdir / 'report.json'}")
    return 0


def cmd_perturb(args) -> int:
    outdir = Path(args.outdir)
    test_ds = (
        corpus.load_dataset(args.input, format="jsonl")
        if args.input
        else _read_split(outdir, "test")
    )
    levels = _parse_levels(args.noise_levels)
    outdir.mkdir(parents=True, exist_ok=True)
    for level in levels:
        noisy, edits = perturb.perturb_testset(
            test_ds, level, args.seed, **_noise_spec_kwargs(args)
        )
        path = outdir / f"noisy_{level:g}.jsonl"
        with open(path, "w", encoding="utf-8") as fh:
            for r in noisy:
                row = {
                    "id": r.id,
                    "text": r.text,
                    "label": r.label,
                    "edits": [asdict(e) for e in edits[r.id]],
                }
                fh.write(json.dumps(row, ensure_ascii=False) + "\n")
        n_edits = sum(len(v) for v in edits.values())
        print(f"level {level:g}: {len(noisy)} records, {n_edits} edits -> {path}")
    return 0


def cmd_explain(args) -> int:
    if bool(args.text) == bool(args.input):
        raise SystemExit("provide exactly one of --text or --input")
    text = args.text if args.text else Path(args.input).read_text(encoding="utf-8")
    if not text.strip():
        raise SystemExit("input text is empty")
    outdir = Path(args.outdir)
    vocab = _read_vocab(outdir)
    params = model.load_checkpoint(args.checkpoint)
    clf = model.TextClassifier(params, vocab, max_len=args.max_len)

    cfg = explain.LimeConfig(
        n_samples=args.n_samples,
        kernel_width=args.kernel_width,
        top_k=args.top_k,
        ridge=args.ridge,
        seed=args.seed,
    )
    expl = explain.lime_explain(clf.predict_proba, text, cfg)
    lexicons = explain.load_cue_lexicons(args.cues_dir) if args.cues_dir else None
    narrative = explain.generate_narrative(
        expl,
        mode="remote" if args.gen_endpoint else "template",
        endpoint=args.gen_endpoint,
        lexicons=lexicons,
    )
    print(f"verdict: {explain.CLASS_NAMES[expl.label]}")
    print(f"confidence: {expl.confidence:.4f}")
    print(f"coverage: {expl.coverage:.4f}")
    print("top tokens: " + ", ".join(t for t, _ in expl.features))
    print(f"narrative: {narrative.text}")
    if narrative.fallback:
        print("warning: generation endpoint unreachable, used template narrative")
    print(json.dumps(explain.explanation_to_json(expl, narrative), sort_keys=True))
    return 2 if expl.label == 1 else 0


def cmd_report(args) -> int:
    path = Path(args.report) if args.report else Path(args.outdir) / "report.json"
    if not path.exists():
        raise SystemExit(f"no report at {path}; run `eval` first")
    payload = json.loads(path.read_text(encoding="utf-8"))
    report = metrics.EvalReport(
        clean=payload["clean"],
        noise={
            m: {float(lvl): acc for lvl, acc in by_level.items()}
            for m, by_level in payload["noise"].items()
        },
        monotonic=payload["monotonic"],
        threshold=payload["threshold"],
        metadata=payload.get("metadata", {}),
    )
    print(report.to_text(), end="")
    return 0


# ---------------------------------------------------------------- parser


def build_parser() -> _Parser:
    parser = _Parser(prog="phishkit", description=__doc__)
    parser.add_argument("--config", help="TOML or JSON config supplying flag defaults")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help=argparse.SUPPRESS)
        p.add_argument("--outdir", default="artifacts")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--max-len", type=int, default=256)

    p = sub.add_parser("prepare", help="load, mask, split, and build the vocabulary")
    common(p)
    p.add_argument("--dataset", required=True)
    p.add_argument("--format", choices=("csv", "jsonl"), default="csv")
    p.add_argument("--text-col", default="text")
    p.add_argument("--label-col", default="label")
    p.add_argument("--id-col", default="id")
    p.add_argument("--mask", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--names-file", help="gazetteer of given names, one per line")
    p.add_argument("--train-frac", type=float, default=0.70)
    p.add_argument("--val-frac", type=float, default=0.15)
    p.add_argument("--test-frac", type=float, default=0.15)
    p.add_argument("--min-freq", type=int, default=1)
    p.add_argument("--max-size", type=int, default=None)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("train", help="train baseline or FGM variant")
    common(p)
    p.add_argument("--fgm", action=argparse.BooleanOptionalAction, default=False)
    p.add_argument("--epsilon", type=float, default=0.001)
    p.add_argument("--lambda", dest="lam", type=float, default=0.5)
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--batch-size", type=int, default=4)
    p.add_argument("--grad-accum", type=int, default=8)
    p.add_argument("--d", type=int, default=32)
    p.add_argument("--checkpoint", help="override checkpoint output path")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="clean + noisy evaluation of checkpoints")
    common(p)
    p.add_argument("checkpoints", nargs="+")
    p.add_argument("--noise-levels", default="0.05,0.10,0.20")
    p.add_argument("--threshold", type=float, default=0.5)
    p.add_argument("--homoglyphs", help="from<TAB>to homoglyph table file")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("perturb", help="export noisy test sets with edit logs")
    common(p)
    p.add_argument("--input", help="JSONL dataset; defaults to outdir/test.jsonl")
    p.add_argument("--noise-levels", default="0.05,0.10,0.20")
    p.add_argument("--homoglyphs", help="from<TAB>to homoglyph table file")
    p.set_defaults(func=cmd_perturb)

    p = sub.add_parser("explain", help="LIME attribution + grounded narrative")
    common(p)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--text")
    p.add_argument("--input", help="file containing the email text")
    p.add_argument("--n-samples", type=int, default=500)
    p.add_argument("--kernel-width", type=float, default=0.75)
    p.add_argument("--top-k", type=int, default=8)
    p.add_argument("--ridge", type=float, default=1e-3)
    p.add_argument("--gen-endpoint", help="remote narrative generation URL")
    p.add_argument("--cues-dir", help="directory of <category>.txt cue lexicons")
    p.set_defaults(func=cmd_explain)

    p = sub.add_parser("report", help="re-render a saved eval report")
    common(p)
    p.add_argument("--report", help="path to report.json")
    p.set_defaults(func=cmd_report)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()

    config_path = None
    for i, a in enumerate(argv):
        if a == "--config" and i + 1 < len(argv):
            config_path = argv[i + 1]
        elif a.startswith("--config="):
            config_path = a.split("=", 1)[1]
    if config_path:
        cfg = _load_config(config_path)
        for action in parser._subparsers._group_actions:
            for sp in action.choices.values():
                _apply_config(sp, cfg)

    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
