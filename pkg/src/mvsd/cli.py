"""Command-line entry point.

One binary, many subcommands. Option precedence for training-style commands
is CLI flag > --config JSON file > built-in default, and every report echoes
the values that were actually used. Failures print a single stderr line of
the form `error: <code>: <message>` and exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from . import corpus as corpus_mod
from . import debias as debias_mod
from .annotate import AnnotationStore, cohen_kappa, create_app, load_gold
from .errors import ArgumentError, ConfigurationError, MvsdError
from .model import FusionModel, ModelConfig, ToyProvider, FileProvider, model_from_checkpoint, save_checkpoint
from .model.fusion import joint_loss
from .numeric import gradient_check
from .train import (
    TrainConfig,
    ablate,
    evaluate_model,
    export_attention,
    freeze_sweep,
    labeled_split,
    low_resource_sweep,
    metrics_table_text,
    train,
)

DEFAULT_PORT = 8000


def _write_json(payload, path=None):
    text = json.dumps(payload, indent=2, sort_keys=True)
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    else:
        print(text)


def _load_config_file(path):
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        try:
            config = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigurationError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ConfigurationError("config file must hold a JSON object")
    return config


def _resolve(args, config, name, default):
    value = getattr(args, name, None)
    if value is not None:
        return value
    if name in config:
        return config[name]
    return default


def _parse_views(raw):
    views = tuple(v.strip() for v in str(raw).replace(",", " ").split() if v.strip())
    return views


def _train_config(args) -> TrainConfig:
    config = _load_config_file(getattr(args, "config", None))
    views = _parse_views(_resolve(args, config, "views", "t,v,f"))
    return TrainConfig(
        batch_size=int(_resolve(args, config, "batch_size", 32)),
        epochs=int(_resolve(args, config, "epochs", 10)),
        lr_backbone=float(_resolve(args, config, "lr_backbone", 1e-6)),
        lr_head=float(_resolve(args, config, "lr_head", 5e-4)),
        weight_decay=float(_resolve(args, config, "weight_decay", 0.0)),
        seed=int(_resolve(args, config, "seed", 0)),
        view_losses_enabled=views,
        freeze=str(_resolve(args, config, "freeze", "none")),
        interaction_kind=str(_resolve(args, config, "interaction_kind", "transformer")),
        provider=str(_resolve(args, config, "provider", "toy")),
    )


def _provider(args, train_cfg: TrainConfig):
    config = _load_config_file(getattr(args, "config", None))
    if train_cfg.provider == "toy":
        return ToyProvider(
            d=int(_resolve(args, config, "d", 16)),
            m=int(_resolve(args, config, "patches", 4)),
            vocab=int(_resolve(args, config, "vocab", 256)),
            seed=int(_resolve(args, config, "provider_seed", 0)),
        )
    if train_cfg.provider == "file":
        path = _resolve(args, config, "embeddings", None)
        if not path:
            raise ConfigurationError("file provider needs --embeddings")
        return FileProvider(path)
    raise ConfigurationError(f"unknown provider {train_cfg.provider!r}")


# subcommand handlers ------------------------------------------------------

def cmd_stats(args):
    corpus = corpus_mod.load_corpus(args.corpus)
    report = corpus_mod.corpus_stats(corpus, allow_pending=args.allow_pending)
    if args.json or args.output:
        _write_json(report.to_dict(), args.output)
    if not args.output:
        print(report.render())
    return 0


def cmd_debias(args):
    corpus = corpus_mod.load_corpus(args.corpus)
    lexicon = debias_mod.load_lexicon(args.emoji_lexicon) if args.emoji_lexicon else None
    cleaned, before, after = debias_mod.debias_corpus(corpus, lexicon=lexicon)
    corpus_mod.save_corpus(cleaned, args.output)
    if args.report:
        debias_mod.write_report(before, after, args.report)
    print(f"wrote {len(cleaned.samples)} samples to {args.output}")
    return 0


def cmd_annotate_serve(args):
    import uvicorn

    corpus = corpus_mod.load_corpus(args.corpus)
    gold = load_gold(args.gold_onboarding)
    store = AnnotationStore(args.log)
    created = store.select_candidates(corpus)
    port = args.port if args.port is not None else int(os.environ.get("PORT", DEFAULT_PORT))
    app = create_app(store, corpus, gold, images_dir=args.images_dir, ui_dir=args.ui_dir)
    print(f"queued {len(created)} new candidate tasks; serving on {args.host}:{port}")
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def _read_label_lines(path):
    with open(path, "r", encoding="utf-8") as fh:
        return [line.strip() for line in fh if line.strip()]


def cmd_kappa(args):
    labels_a = _read_label_lines(args.labels_a)
    labels_b = _read_label_lines(args.labels_b)
    report = cohen_kappa(labels_a, labels_b)
    _write_json(report.to_dict(), args.output)
    return 0


def cmd_train(args):
    train_cfg = _train_config(args)
    provider = _provider(args, train_cfg)
    corpus = corpus_mod.load_corpus(args.corpus)
    model, history = train(corpus, provider, train_cfg)
    if args.checkpoint:
        extra = {"best_epoch": history.best_epoch}
        if history.test_metrics:
            extra["test_metrics"] = history.test_metrics.to_dict()
        save_checkpoint(args.checkpoint, model.store, model.config, extra=extra)
    _write_json(history.to_dict(), args.report)
    return 0


def cmd_evaluate(args):
    model = model_from_checkpoint(args.checkpoint, embeddings_path=args.embeddings)
    corpus = corpus_mod.load_corpus(args.corpus)
    samples = labeled_split(corpus, args.split)
    if not samples:
        raise ArgumentError(f"split {args.split!r} has no labeled samples")
    metrics = evaluate_model(model, samples)
    payload = {
        "split": args.split,
        "metrics": metrics.to_dict(),
        "config": model.config.to_dict(),
    }
    _write_json(payload, args.report)
    return 0


def cmd_ablate(args):
    train_cfg = _train_config(args)
    provider = _provider(args, train_cfg)
    corpus = corpus_mod.load_corpus(args.corpus)
    report = ablate(corpus, provider, train_cfg, strict_fusion=args.strict_fusion)
    if args.report:
        _write_json(report, args.report)
    print(metrics_table_text(report))
    return 0


def cmd_freeze_sweep(args):
    train_cfg = _train_config(args)
    provider = _provider(args, train_cfg)
    corpus = corpus_mod.load_corpus(args.corpus)
    report = freeze_sweep(corpus, provider, train_cfg)
    if args.report:
        _write_json(report, args.report)
    print(metrics_table_text(report))
    return 0


def cmd_low_resource(args):
    train_cfg = _train_config(args)
    provider = _provider(args, train_cfg)
    corpus = corpus_mod.load_corpus(args.corpus)
    fractions = [float(f) for f in str(args.fractions).split(",") if f.strip()]
    report = low_resource_sweep(corpus, provider, train_cfg, fractions=fractions)
    if args.report:
        _write_json(report, args.report)
    print(metrics_table_text(report))
    return 0


def cmd_viz_attention(args):
    model = model_from_checkpoint(args.checkpoint, embeddings_path=args.embeddings)
    corpus = corpus_mod.load_corpus(args.corpus)
    sample = None
    if args.sample_id:
        for s in corpus.samples:
            if s.id == args.sample_id:
                sample = s
                break
        if sample is None:
            raise ArgumentError(f"sample {args.sample_id!r} not found in corpus")
    else:
        test = corpus.split_samples("test")
        if not test:
            raise ArgumentError("corpus has no test samples; pass --sample-id")
        sample = test[0]
    payload = export_attention(model, sample, args.output)
    print(f"wrote attention map for {sample.id} ({payload['patch_count']} patches) to {args.output}")
    return 0


GRADCHECK_PRESETS = {"toy": {"d": 16, "tokens": 5, "patches": 4, "heads": 4}}


def cmd_gradcheck(args):
    if args.dims in GRADCHECK_PRESETS:
        dims = dict(GRADCHECK_PRESETS[args.dims])
    else:
        try:
            dims = {}
            for part in args.dims.split(","):
                key, value = part.split("=")
                dims[key.strip()] = int(value)
        except ValueError as exc:
            raise ArgumentError(
                f"--dims must be a preset {tuple(GRADCHECK_PRESETS)} or d=..,tokens=..,patches=..,heads=.."
            ) from exc
    provider = ToyProvider(d=dims["d"], m=dims["patches"], seed=args.seed)
    config = ModelConfig(
        d=dims["d"], heads=dims["heads"], patches=dims["patches"],
        interaction_kind=args.interaction_kind, param_seed=args.seed,
        provider_seed=args.seed,
    )
    model = FusionModel(provider, config)
    words = [f"tok{i}" for i in range(dims["tokens"])]
    sample = corpus_mod.Sample(
        id="gradcheck", text=" ".join(words), image_ref="gradcheck.jpg",
        label=1, split="train",
    )

    def forward():
        return joint_loss(model.forward(sample), sample.label)

    # the attention key bias shifts every key equally and cancels in the row
    # softmax, so its true gradient is zero; finite differences on it would
    # only measure rounding noise
    dead_params = {
        "transformer": ("inter.bk",),
        "cross_attention": ("cross.bk",),
        "mlp": (),
    }[args.interaction_kind]
    report = gradient_check(forward, model.store, seed=args.seed, skip=dead_params)
    status = "PASS" if report.passed else "FAIL"
    total_entries = sum(report.entries_checked.values())
    print(
        f"{status} gradcheck dims={dims} max_rel_error={report.max_rel_error:.3e} "
        f"tol={report.tol:.1e} entries={total_entries}"
    )
    if args.report:
        _write_json(report.to_dict(), args.report)
    return 0 if report.passed else 1


# parser -------------------------------------------------------------------

def _add_train_flags(p):
    p.add_argument("--corpus", required=True, help="corpus JSONL path")
    p.add_argument("--config", help="JSON file with defaults for these flags")
    p.add_argument("--seed", type=int, help="run seed (default 0)")
    p.add_argument("--epochs", type=int, help="training epochs (default 10)")
    p.add_argument("--batch-size", dest="batch_size", type=int, help="batch size (default 32)")
    p.add_argument("--lr-head", dest="lr_head", type=float, help="head learning rate (default 5e-4)")
    p.add_argument("--lr-backbone", dest="lr_backbone", type=float, help="backbone learning rate (default 1e-6)")
    p.add_argument("--weight-decay", dest="weight_decay", type=float, help="decoupled weight decay (default 0)")
    p.add_argument("--views", help="comma-separated view losses to keep, from t,v,f (default all)")
    p.add_argument("--freeze", choices=["none", "text_encoder", "visual_encoder", "all"], help="backbone freezing (default none)")
    p.add_argument("--interaction-kind", dest="interaction_kind", choices=["transformer", "cross_attention", "mlp"], help="interaction view variant")
    p.add_argument("--provider", choices=["toy", "file"], help="embedding provider (default toy)")
    p.add_argument("--embeddings", help="embedding file for the file provider")
    p.add_argument("--d", type=int, help="toy provider width (default 16)")
    p.add_argument("--patches", type=int, help="toy provider patch count (default 4)")
    p.add_argument("--vocab", type=int, help="toy provider hash vocabulary (default 256)")
    p.add_argument("--provider-seed", dest="provider_seed", type=int, help="toy provider seed (default 0)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mvsd", description="multi-view sarcasm detection toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("stats", help="per-split class counts for a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--json", action="store_true", help="also print the JSON report")
    p.add_argument("--output", help="write the JSON report here instead of stdout")
    p.add_argument("--allow-pending", action="store_true", help="tolerate unlabeled samples")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("debias", help="strip hashtag and emoji cue tokens from a corpus")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True, help="cleaned corpus JSONL path")
    p.add_argument("--report", help="write before/after cue statistics JSON here")
    p.add_argument("--emoji-lexicon", dest="emoji_lexicon", help="extra emoji words, one per line")
    p.set_defaults(func=cmd_debias)

    p = sub.add_parser("annotate-serve", help="run the annotation HTTP service")
    p.add_argument("--corpus", required=True)
    p.add_argument("--gold-onboarding", dest="gold_onboarding", required=True, help="labeled onboarding corpus JSONL")
    p.add_argument("--log", default="annotation-log.jsonl", help="append-only event log path")
    p.add_argument("--port", type=int, help=f"listen port (default $PORT or {DEFAULT_PORT})")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--images-dir", dest="images_dir", help="directory served under /images")
    p.add_argument("--ui-dir", dest="ui_dir", help="static front-end bundle to serve at /")
    p.set_defaults(func=cmd_annotate_serve)

    p = sub.add_parser("kappa", help="Cohen's kappa between two label files (one label per line)")
    p.add_argument("labels_a")
    p.add_argument("labels_b")
    p.add_argument("--output", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_kappa)

    p = sub.add_parser("train", help="train the fusion model")
    _add_train_flags(p)
    p.add_argument("--checkpoint", help="write best-validation checkpoint here")
    p.add_argument("--report", help="write the run history JSON here instead of stdout")
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("evaluate", help="score a checkpoint on a corpus split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--split", default="test", choices=["train", "validation", "test"])
    p.add_argument("--embeddings", help="embedding file when the checkpoint used one")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ablate", help="leave-one-view-loss-out study")
    _add_train_flags(p)
    p.add_argument("--strict-fusion", dest="strict_fusion", action="store_true",
                   help="also drop the ablated view from the fused prediction")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("freeze-sweep", help="train under the four backbone-freezing regimes")
    _add_train_flags(p)
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_freeze_sweep)

    p = sub.add_parser("low-resource", help="train on stratified train-split fractions")
    _add_train_flags(p)
    p.add_argument("--fractions", default="0.1,0.2,0.5,1.0", help="comma-separated fractions")
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_low_resource)

    p = sub.add_parser("viz-attention", help="export interaction attention over image patches")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--corpus", required=True)
    p.add_argument("--sample-id", dest="sample_id", help="sample to visualize (default: first test sample)")
    p.add_argument("--embeddings", help="embedding file when the checkpoint used one")
    p.add_argument("--output", required=True, help="JSON heatmap path")
    p.set_defaults(func=cmd_viz_attention)

    p = sub.add_parser("gradcheck", help="finite-difference check of the full model gradient")
    p.add_argument("--dims", default="toy", help="preset name or d=..,tokens=..,patches=..,heads=..")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--interaction-kind", dest="interaction_kind", default="transformer",
                   choices=["transformer", "cross_attention", "mlp"])
    p.add_argument("--report", help="write the JSON report here")
    p.set_defaults(func=cmd_gradcheck)

    return parser


def run(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args) or 0
    except MvsdError as exc:
        print(f"error: {exc.code}: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: io: {exc}", file=sys.stderr)
        return 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
