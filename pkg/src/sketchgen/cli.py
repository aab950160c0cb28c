"""Command-line front end: ingest, train, sample, eval, export-latent.

Every command is a pure function of its inputs, configuration, and seed;
re-running reproduces the same outputs. A YAML config file (flag
--config, or the SKETCHGEN_CONFIG environment variable) supplies defaults
that individual flags override. Exit codes: 0 success, 1 user error,
2 internal error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import time

import numpy as np
import yaml

from . import model as M
from .api import ApiDatabaseError, load_api_database
from .concretize import WalkConfig
from .labels import Label
from .lang import print_program
from .metrics import PathExplosionError
from .parser import AmlSyntaxError
from .pipeline import (UserError, build_dataset, evaluate, load_dataset,
                       load_vocab, sample_programs, unseen_subset)
from .sketch import sketch_to_record
from .typecheck import TypeCheckError

logger = logging.getLogger("sketchgen")

CONFIG_ENV_VAR = "SKETCHGEN_CONFIG"

# keys a config file may set; flags always win
_CONFIG_KEYS = ("seed", "epochs", "batch", "lr", "variant", "beta", "d",
                "h_calls", "h_types", "h_keys", "h_dec", "max_nodes",
                "samples", "top_k", "max_steps", "max_restarts",
                "simplicity_bias", "fractions", "walks_per_sketch")


def _load_config(path):
    if not path:
        return {}
    try:
        with open(path, "r", encoding="utf-8") as fh:
            doc = yaml.safe_load(fh) or {}
    except FileNotFoundError:
        raise UserError(f"config file not found: {path}")
    except yaml.YAMLError as exc:
        raise UserError(f"cannot parse config {path}: {exc}")
    if not isinstance(doc, dict):
        raise UserError(f"config {path} must be a mapping")
    unknown = set(doc) - set(_CONFIG_KEYS)
    if unknown:
        raise UserError(f"unknown config keys: {', '.join(sorted(unknown))}")
    return doc


def _setting(args, config, key, default):
    value = getattr(args, key, None)
    if value is not None:
        return value
    if key in config:
        return config[key]
    return default


def _hyper(args, config, vocab_unused=None) -> M.Hyperparams:
    base = M.Hyperparams()
    fields = {}
    for key in ("d", "h_calls", "h_types", "h_keys", "h_dec", "batch",
                "epochs", "seed", "variant", "max_nodes"):
        fields[key] = _setting(args, config, key, getattr(base, key))
    fields["lr"] = _setting(args, config, "lr", base.lr)
    fields["beta"] = _setting(args, config, "beta", base.beta)
    try:
        return M.Hyperparams(**fields)
    except ValueError as exc:
        raise UserError(str(exc))


def _walk_config(args, config) -> WalkConfig:
    try:
        return WalkConfig(
            max_steps=_setting(args, config, "max_steps", None),
            max_restarts=_setting(args, config, "max_restarts", 50),
            simplicity_bias=_setting(args, config, "simplicity_bias", 0.5),
        )
    except ValueError as exc:
        raise UserError(str(exc))


def _load_db(path):
    try:
        return load_api_database(path)
    except FileNotFoundError:
        raise UserError(f"API database not found: {path}")
    except ApiDatabaseError as exc:
        raise UserError(str(exc))


def _load_checkpoint(path):
    try:
        params, meta = M.load_checkpoint(path)
    except FileNotFoundError:
        raise UserError(f"checkpoint not found: {path}")
    except M.CheckpointError as exc:
        raise UserError(str(exc))
    return params, meta


# -- commands ---------------------------------------------------------------

def cmd_ingest(args, config):
    db = _load_db(args.api_db)
    records, vocab, skipped = build_dataset(args.corpus, db, args.out)
    print(f"ingested {len(records)} records ({skipped} skipped) -> {args.out}")
    return 0


def cmd_train(args, config):
    records = load_dataset(args.dataset)
    if not records:
        raise UserError("dataset is empty")
    vocab = load_vocab(args.dataset)
    hyper = _hyper(args, config)
    pairs = [(r.label, r.sketch) for r in records]
    rng = np.random.default_rng(hyper.seed)
    params = None
    done_epochs = 0
    if args.resume:
        params, meta = _load_checkpoint(args.resume)
        if params.vocab.to_json() != vocab.to_json():
            raise UserError("resume checkpoint was trained with a different "
                            "vocabulary (shape mismatch)")
        # shape-bearing settings come from the checkpoint; the training
        # budget may be extended from the command line
        stored = params.hyper.to_json()
        for key in ("epochs", "lr", "batch"):
            stored[key] = _setting(args, config, key, stored[key])
        hyper = M.Hyperparams(**stored)
        params.hyper = hyper
        done_epochs = int(meta.get("epoch", 0))
        state = meta.get("rng_state")
        if state:
            rng.bit_generator.state = state
    remaining = max(0, hyper.epochs - done_epochs)
    start = time.perf_counter()
    if remaining == 0 and params is None:
        params = M.init_params(vocab, hyper, rng)
        curve = []
    else:
        params, curve = M.train(pairs, vocab, hyper, params=params, rng=rng,
                                epochs=remaining)
    elapsed = time.perf_counter() - start
    M.save_checkpoint(params, args.checkpoint, extra_meta={
        "epoch": done_epochs + len(curve),
        "seed": hyper.seed,
        "rng_state": rng.bit_generator.state,
    })
    if args.loss_csv:
        with open(args.loss_csv, "w", encoding="utf-8") as fh:
            fh.write(f"# seed={hyper.seed}\n")
            fh.write("epoch,loss\n")
            for i, value in enumerate(curve, start=done_epochs + 1):
                fh.write(f"{i},{value:.6f}\n")
    logger.info("trained %d epochs in %.1fs", len(curve), elapsed)
    print(f"checkpoint -> {args.checkpoint} "
          f"({done_epochs + len(curve)} epochs, final loss "
          f"{curve[-1]:.4f})" if curve else
          f"checkpoint -> {args.checkpoint} (initial weights)")
    return 0


def _parse_label(args) -> Label:
    if args.label_file:
        with open(args.label_file, "r", encoding="utf-8") as fh:
            doc = json.load(fh)
    else:
        try:
            doc = json.loads(args.label)
        except json.JSONDecodeError as exc:
            raise UserError(f"--label is not valid JSON: {exc}")
    if not isinstance(doc, dict):
        raise UserError("label must be an object with calls/types/keys lists")
    return Label.from_json(doc)


def cmd_sample(args, config):
    params, meta = _load_checkpoint(args.checkpoint)
    db = _load_db(args.api_db)
    label = _parse_label(args)
    seed = _setting(args, config, "seed", 0)
    k = _setting(args, config, "top_k", 10)
    n_samples = _setting(args, config, "samples", 100)
    walks = _setting(args, config, "walks_per_sketch", 20)
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    programs, sketches, failures = sample_programs(
        params, db, label, k, n_samples, _walk_config(args, config), rng,
        walks_per_sketch=walks)
    elapsed = time.perf_counter() - start
    logger.info("sampled %d sketches (%d failed), %d programs in %.2fs",
                len(sketches), failures, len(programs), elapsed)
    if not programs:
        print("no sketch could be concretized; sampled sketches were:",
              file=sys.stderr)
        seen = set()
        for y in sketches:
            text = json.dumps(sketch_to_record(y))
            if text not in seen:
                seen.add(text)
                print(f"  {text}", file=sys.stderr)
        return 1
    print(f"# seed={seed}")
    for rank, program in enumerate(programs, start=1):
        print(f"{rank:2d}. {print_program(program)}")
    return 0


def _fractions(args, config):
    raw = _setting(args, config, "fractions", [1.0, 0.75, 0.5, 0.25])
    if isinstance(raw, str):
        try:
            raw = [float(x) for x in raw.split(",") if x.strip()]
        except ValueError:
            raise UserError(f"bad fractions list: {raw!r}")
    for f in raw:
        if not 0.0 <= f <= 1.0:
            raise UserError("fractions must lie in [0, 1]")
    return raw


def cmd_eval(args, config):
    params, _ = _load_checkpoint(args.checkpoint)
    db = _load_db(args.api_db)
    records = load_dataset(args.dataset)
    if not records:
        raise UserError("dataset is empty")
    seed = _setting(args, config, "seed", 0)
    report = evaluate(
        records, params, db, _walk_config(args, config), _fractions(args, config),
        seed=seed,
        n_samples=_setting(args, config, "samples", 50),
        k=_setting(args, config, "top_k", 10),
        walks_per_sketch=_setting(args, config, "walks_per_sketch", 20))
    print(report.to_text())
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(report.to_csv())
        print(f"report -> {args.out}")
    if args.train_dataset:
        unseen = unseen_subset(records, load_dataset(args.train_dataset))
        print(f"\nunseen (label, sketch) pairs: {len(unseen)} of {len(records)}")
        if unseen:
            sub = evaluate(
                unseen, params, db, _walk_config(args, config),
                _fractions(args, config), seed=seed,
                n_samples=_setting(args, config, "samples", 50),
                k=_setting(args, config, "top_k", 10),
                walks_per_sketch=_setting(args, config, "walks_per_sketch", 20))
            print(sub.to_text())
            if args.out:
                unseen_path = args.out + ".unseen.csv"
                with open(unseen_path, "w", encoding="utf-8") as fh:
                    fh.write(sub.to_csv())
                print(f"unseen report -> {unseen_path}")
    return 0


def cmd_export_latent(args, config):
    params, _ = _load_checkpoint(args.checkpoint)
    db = _load_db(args.api_db)
    records = load_dataset(args.dataset)
    seed = _setting(args, config, "seed", 0)
    rng = np.random.default_rng(seed)
    pairs = [(r.label, r.sketch) for r in records]
    count = M.export_latent(params, pairs, db, args.out, rng)
    print(f"wrote {count} latent rows -> {args.out}")
    return 0


# -- argument parsing -----------------------------------------------------------

def _add_hyper_flags(p):
    p.add_argument("--seed", type=int)
    p.add_argument("--epochs", type=int)
    p.add_argument("--batch", type=int)
    p.add_argument("--lr", type=float)
    p.add_argument("--variant", choices=("ged", "gsnn"))
    p.add_argument("--beta", type=float)
    p.add_argument("--d", type=int, help="latent dimension")
    p.add_argument("--h-calls", dest="h_calls", type=int)
    p.add_argument("--h-types", dest="h_types", type=int)
    p.add_argument("--h-keys", dest="h_keys", type=int)
    p.add_argument("--h-dec", dest="h_dec", type=int)
    p.add_argument("--max-nodes", dest="max_nodes", type=int)


def _add_walk_flags(p):
    p.add_argument("--max-steps", dest="max_steps", type=int)
    p.add_argument("--max-restarts", dest="max_restarts", type=int)
    p.add_argument("--simplicity-bias", dest="simplicity_bias", type=float)
    p.add_argument("--walks-per-sketch", dest="walks_per_sketch", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sketchgen",
        description="Label-conditioned program generation over sketches")
    parser.add_argument("--config", default=os.environ.get(CONFIG_ENV_VAR),
                        help="YAML config file (default: $SKETCHGEN_CONFIG)")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="corpus -> dataset + vocabularies")
    p.add_argument("--corpus", required=True)
    p.add_argument("--api-db", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train", help="dataset -> checkpoint")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--resume", help="continue from an existing checkpoint")
    p.add_argument("--loss-csv", dest="loss_csv")
    _add_hyper_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("sample", help="label -> ranked programs")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--api-db", required=True)
    p.add_argument("--label", help='inline JSON, e.g. {"calls": ["readLine"]}')
    p.add_argument("--label-file")
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    _add_walk_flags(p)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("eval", help="score a dataset at several observabilities")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--api-db", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--train-dataset", dest="train_dataset",
                   help="training dataset, to score unseen pairs separately")
    p.add_argument("--fractions")
    p.add_argument("--out")
    p.add_argument("--top-k", dest="top_k", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--seed", type=int)
    _add_walk_flags(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("export-latent", help="dataset -> latent vectors CSV")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--api-db", required=True)
    p.add_argument("--dataset", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_export_latent)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        config = _load_config(args.config)
        if args.command == "sample" and not (args.label or args.label_file):
            raise UserError("sample needs --label or --label-file")
        return args.func(args, config)
    except UserError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (AmlSyntaxError, TypeCheckError, PathExplosionError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except Exception:  # internal error
        import traceback
        traceback.print_exc()
        return 2


if __name__ == "__main__":
    sys.exit(main())
