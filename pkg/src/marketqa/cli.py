"""Command-line interface.

Subcommands: mine | synth | split | pretrain | train | eval | serve |
score. Exit codes: 0 success, 1 usage error, 2 data/validation error.
The eval and train report paths also render figures next to their
line-delimited outputs.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from marketqa import datapipe, evalkit, figures, service, textproc, trainer
from marketqa.checkpoint import (
    CheckpointFormatError,
    CheckpointValidationError,
    load_checkpoint,
    save_checkpoint,
)
from marketqa.ranker import ModelConfig, input_from_example

FLAG_FIELDS = {"lstm": "use_answer_lstm", "attention": "use_attention",
               "context": "use_conv_context"}


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on usage errors; the contract here is 1."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


class DataError(Exception):
    """Anything wrong with inputs that parsed fine as a command line."""


def _coerce(field: dataclasses.Field, raw: str):
    text = raw.strip()
    if field.type in ("int", int):
        return int(text)
    if field.type in ("float", float):
        return float(text)
    if field.type in ("bool", bool):
        if text.lower() in ("1", "true", "yes", "on"):
            return True
        if text.lower() in ("0", "false", "no", "off"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if text.lower() in ("none", "null", ""):
        return None
    try:
        return float(text) if "." in text else int(text)
    except ValueError:
        return text


def read_config_file(path) -> dict:
    """Flat `key = value` lines; # starts a comment."""
    values = {}
    for lineno, line in enumerate(Path(path).read_text("utf-8").splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataError(f"{path}:{lineno}: expected 'key = value'")
        key, _, raw = line.partition("=")
        values[key.strip()] = raw.strip()
    return values


def _build_configs(raw: dict, flags: set[str], phase: str):
    model_fields = {f.name: f for f in dataclasses.fields(ModelConfig)}
    train_fields = {f.name: f for f in dataclasses.fields(trainer.TrainConfig)}
    model_kwargs, train_kwargs = {}, {}
    for key, value in raw.items():
        if key in model_fields:
            model_kwargs[key] = _coerce(model_fields[key], value)
        elif key in train_fields:
            train_kwargs[key] = _coerce(train_fields[key], value)
        else:
            raise DataError(f"unknown config key {key!r}")
    for flag in flags:
        model_kwargs[FLAG_FIELDS[flag]] = True
    if "ff_size" not in model_kwargs:
        # Wider towers for the plain feed-forward model, narrower once
        # extra encoder layers are in play.
        model_kwargs["ff_size"] = 500 if (phase == "pretrain" or not flags) else 128
    train_kwargs["phase"] = phase
    return ModelConfig(**model_kwargs), trainer.TrainConfig(**train_kwargs)


def _parse_flags(raw: str | None) -> set[str]:
    if not raw:
        return set()
    flags = {part.strip() for part in raw.split(",") if part.strip()}
    unknown = flags - set(FLAG_FIELDS)
    if unknown:
        raise DataError(f"unknown variant flags: {sorted(unknown)} "
                        f"(choose from {sorted(FLAG_FIELDS)})")
    return flags


# ---------------------------------------------------------------------------
# Handlers


def _cmd_mine(args):
    chats = datapipe.read_chats(args.chats)
    listings = {li.listing_id: li for li in datapipe.read_listings(args.listings)}
    examples = []
    skipped = 0
    for chat in chats:
        listing = listings.get(chat.listing_id)
        if listing is None:
            skipped += 1
            continue
        examples.extend(datapipe.mine_examples(chat, listing,
                                               max_history=args.max_history))
    datapipe.write_dataset(args.out, examples)
    print(f"mined {len(examples)} examples from {len(chats)} chats "
          f"({skipped} without a listing) -> {args.out}")


def _cmd_synth(args):
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    chats, listings, truths = datapipe.generate_synthetic(
        seed=args.seed, n_listings=args.listings,
        questions_per_listing=args.questions,
        negative_frac=args.negative_frac, follow_up_frac=args.follow_up_frac)
    datapipe.write_chats(out / "chats.jsonl", chats)
    datapipe.write_listings(out / "listings.jsonl", listings)
    datapipe.write_truths(out / "truth.jsonl", truths)
    datapipe.write_pairs(out / "pairs.jsonl", datapipe.reply_pairs_from_chats(chats))
    print(f"wrote {len(chats)} chats / {len(listings)} listings / "
          f"{len(truths)} labelled questions -> {out}")


def _cmd_split(args):
    examples = datapipe.read_dataset(args.input)
    train, test = datapipe.split(examples, train_frac=args.frac, seed=args.seed)
    datapipe.write_dataset(args.train, train)
    datapipe.write_dataset(args.test, test)
    print(f"split {len(examples)} examples into {len(train)} train / "
          f"{len(test)} test")


def _cmd_pretrain(args):
    raw = read_config_file(args.config) if args.config else {}
    model_config, train_config = _build_configs(raw, set(), phase="pretrain")
    pairs = [trainer.ReplyPair(c, r) for c, r in datapipe.read_pairs(args.pairs)]
    model, history = trainer.pretrain(pairs, model_config, train_config)
    save_checkpoint(args.out, model)
    final = history[-1]["train_loss"] if history else float("nan")
    print(f"pretrained on {len(pairs)} pairs, final loss {final:.4f} -> {args.out}")


def _cmd_train(args):
    flags = _parse_flags(args.flags)
    raw = read_config_file(args.config) if args.config else {}
    model_config, train_config = _build_configs(raw, flags, phase="finetune")
    train_set = datapipe.read_dataset(args.data)
    dev_set = datapipe.read_dataset(args.dev) if args.dev else []
    init = load_checkpoint(args.init) if args.init else None
    model, history = trainer.finetune(train_set, dev_set, model_config,
                                      train_config, init=init)
    save_checkpoint(args.out, model)
    if args.vocab_out:
        textproc.save_vocab(model.vocab, args.vocab_out)
    if args.history:
        hist_path = Path(args.history)
        with open(hist_path, "w", encoding="utf-8") as fh:
            for entry in history:
                fh.write(json.dumps(entry) + "\n")
        figures.save_training_curves(history, hist_path.with_suffix(".png"))
    last = history[-1] if history else {}
    print(f"trained {model.config.variant_name()} for {len(history)} epochs "
          f"(dev acc {last.get('dev_overall_acc')}) -> {args.out}")


def _cmd_eval(args):
    model = load_checkpoint(args.model)
    examples = datapipe.read_dataset(args.data)
    report = evalkit.evaluate(model, examples)
    print(evalkit.format_report(report))
    if args.report:
        report_path = Path(args.report)
        evalkit.write_report(report_path, report)
        figures_dir = Path(args.figures) if args.figures else report_path.parent
        figures_dir.mkdir(parents=True, exist_ok=True)
        fig = figures.save_metrics_figure(report, figures_dir / "metrics.png")
        print(f"report -> {report_path}; figure -> {fig}")


def _cmd_serve(args):
    service.serve(args.model, port=args.port, fixtures_dir=args.fixtures_dir,
                  cors_origin=args.cors_origin, ui_dir=args.ui_dir, host=args.host)


def _cmd_score(args):
    model = load_checkpoint(args.model)
    if args.description_file:
        sentences = textproc.split_sentences(Path(args.description_file).read_text("utf-8"))
    elif args.description:
        sentences = textproc.split_sentences(args.description)
    else:
        sentences = [line.strip() for line in
                     Path(args.candidates_file).read_text("utf-8").splitlines()
                     if line.strip()]
    history = []
    if args.history:
        for lineno, line in enumerate(Path(args.history).read_text("utf-8").splitlines(), 1):
            if not line.strip():
                continue
            obj = json.loads(line)
            history.append((obj["speaker"], obj["text"]))
    inp = input_from_example(history, args.question, sentences, model.config)
    result = model.score_prepared(model.prepare(inp))
    rows = sorted(range(len(result.probs)), key=lambda i: (-result.probs[i], i))
    print(f"variant: {model.config.variant_name()}")
    print(f"{'rank':>4}  {'prob':>7}  {'score':>8}  sentence")
    for rank, i in enumerate(rows, start=1):
        text = "(no answer)" if i == 0 else sentences[i - 1]
        print(f"{rank:>4}  {result.probs[i]:7.4f}  {result.scores[i]:8.3f}  {text}")


# ---------------------------------------------------------------------------
# Parser


def build_parser() -> _Parser:
    parser = _Parser(prog="marketqa",
                     description="Answer-sentence selection for marketplace chat.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mine", help="mine weakly supervised examples from chats")
    p.add_argument("--chats", required=True)
    p.add_argument("--listings", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--max-history", type=int, default=10)
    p.set_defaults(func=_cmd_mine)

    p = sub.add_parser("synth", help="generate a synthetic chat corpus")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--listings", type=int, required=True)
    p.add_argument("--questions", type=int, default=4)
    p.add_argument("--negative-frac", type=float, default=0.37)
    p.add_argument("--follow-up-frac", type=float, default=0.25)
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("split", help="listing-level train/test split")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--train", required=True)
    p.add_argument("--test", required=True)
    p.add_argument("--frac", type=float, default=0.9)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_split)

    p = sub.add_parser("pretrain", help="reply-ranking pre-training")
    p.add_argument("--pairs", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_pretrain)

    p = sub.add_parser("train", help="supervised fine-tuning")
    p.add_argument("--data", required=True)
    p.add_argument("--dev")
    p.add_argument("--init", help="checkpoint to transfer compatible tensors from")
    p.add_argument("--flags", help="comma list of lstm,attention,context")
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--history", help="write per-epoch history (+ curves figure)")
    p.add_argument("--vocab-out", help="also export the vocabulary file")
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--report", help="write line-delimited report (+ metrics figure)")
    p.add_argument("--figures", help="directory for figures (default: report dir)")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("serve", help="run the HTTP scoring service")
    p.add_argument("--model", default=service.env_default("model"), required=False)
    p.add_argument("--port", type=int, default=int(service.env_default("port", 8080)))
    p.add_argument("--host", default=service.env_default("host", "127.0.0.1"))
    p.add_argument("--fixtures-dir", default=service.env_default("fixtures_dir"))
    p.add_argument("--cors-origin", default=service.env_default("cors_origin"))
    p.add_argument("--ui-dir", default=service.env_default("ui_dir"))
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("score", help="score one question against one description")
    p.add_argument("--model", required=True)
    p.add_argument("--question", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--description-file")
    group.add_argument("--description")
    group.add_argument("--candidates-file")
    p.add_argument("--history", help="JSONL of {speaker, text} lines")
    p.set_defaults(func=_cmd_score)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "serve" and not args.model:
        parser.error("serve requires --model (or MQA_MODEL)")
    try:
        args.func(args)
    except (datapipe.DatasetError, CheckpointFormatError, CheckpointValidationError,
            DataError, trainer.ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"marketqa: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
