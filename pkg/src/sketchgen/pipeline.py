"""End-to-end plumbing: corpus ingestion, datasets, evaluation at several
observability fractions, and report rendering. The command-line front end
in cli.py is a thin wrapper over these functions."""

from __future__ import annotations

import json
import logging
import os
from dataclasses import dataclass, field

import numpy as np

from .api import ApiDatabase
from .concretize import WalkConfig, concretize_top_k
from .labels import Label, Vocabularies, label_of_sketch, subsample_label
from .lang import Program
from .metrics import EvalRecord
from .model import (GedParams, SketchBudgetError, posterior, sample_sketch,
                    sample_z)
from .parser import AmlSyntaxError, parse_program
from .sketch import (Sketch, abstract_typed, production_paths,
                     record_to_sketch, sketch_to_record)
from .typecheck import TypeCheckError, type_check

logger = logging.getLogger(__name__)


class UserError(Exception):
    """Bad input or configuration; reported without a traceback."""


@dataclass
class DatasetRecord:
    program_text: str
    label: Label
    sketch: Sketch

    _program: Program | None = field(default=None, repr=False)

    def program(self) -> Program:
        if self._program is None:
            self._program = parse_program(self.program_text)
        return self._program

    def pair_key(self) -> str:
        """Identity of the (label, sketch) pair, for the unseen-data report."""
        return json.dumps([self.label.to_json(), sketch_to_record(self.sketch)],
                          sort_keys=True)


def _serialize_paths(y: Sketch):
    return [[[sym, edge] for sym, edge in path] for path in production_paths(y)]


def ingest_corpus(corpus_path, db: ApiDatabase):
    """Parse, type-check, and abstract every corpus record.

    Records that fail to parse or type-check are skipped with a logged
    count; more than a 50% skip rate aborts. Labels present in the corpus
    are kept, missing ones are extracted from the program.
    """
    records: list[DatasetRecord] = []
    skipped = 0
    total = 0
    with open(corpus_path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            total += 1
            try:
                row = json.loads(line)
                program = parse_program(row["program"])
                tp = type_check(program, db)
            except (json.JSONDecodeError, KeyError) as exc:
                raise UserError(f"{corpus_path}:{lineno}: bad corpus record: {exc}")
            except (AmlSyntaxError, TypeCheckError) as exc:
                skipped += 1
                logger.warning("skipping record %d: %s", lineno, exc)
                continue
            sketch = abstract_typed(tp)
            if "label" in row:
                label = Label.from_json(row["label"])
            else:
                label = label_of_sketch(sketch)
            if label.is_empty():
                skipped += 1
                logger.warning("skipping record %d: empty label", lineno)
                continue
            records.append(DatasetRecord(row["program"], label, sketch, program))
    if total == 0:
        raise UserError(f"{corpus_path} contains no records")
    if skipped > total / 2:
        raise UserError(
            f"{skipped}/{total} corpus records were skipped; aborting "
            "(is the API database the right one for this corpus?)")
    if skipped:
        logger.info("ingested %d records, skipped %d", len(records), skipped)
    return records, skipped


def build_dataset(corpus_path, db: ApiDatabase, out_dir):
    """Ingest a corpus and write dataset + vocabulary files into out_dir."""
    records, skipped = ingest_corpus(corpus_path, db)
    vocab = Vocabularies.build([r.label for r in records],
                               [r.sketch for r in records])
    os.makedirs(out_dir, exist_ok=True)
    dataset_path = os.path.join(out_dir, "dataset.jsonl")
    with open(dataset_path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({
                "program": r.program_text,
                "label": r.label.to_json(),
                "sketch": sketch_to_record(r.sketch),
                "paths": _serialize_paths(r.sketch),
            }) + "\n")
    vocab_path = os.path.join(out_dir, "vocab.json")
    with open(vocab_path, "w", encoding="utf-8") as fh:
        json.dump(vocab.to_json(), fh, indent=1)
    return records, vocab, skipped


def load_dataset(path) -> list[DatasetRecord]:
    """Read a dataset file (or the dataset.jsonl inside a dataset dir)."""
    if os.path.isdir(path):
        path = os.path.join(path, "dataset.jsonl")
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            row = json.loads(line)
            records.append(DatasetRecord(row["program"],
                                         Label.from_json(row["label"]),
                                         record_to_sketch(row["sketch"])))
    return records


def load_vocab(dataset_dir) -> Vocabularies:
    with open(os.path.join(dataset_dir, "vocab.json"), "r", encoding="utf-8") as fh:
        return Vocabularies.from_json(json.load(fh))


# -- sampling ---------------------------------------------------------------------

def sample_programs(params: GedParams, db: ApiDatabase, label: Label,
                    k: int, n_samples: int, walk_cfg: WalkConfig,
                    rng: np.random.Generator,
                    walks_per_sketch: int = 20):
    """Sample sketches from the posterior for the label, concretize them,
    and return (ranked programs, sampled sketches, failed sketch count)."""
    post = posterior(params, label)
    cond = post.mean if params.hyper.variant == "gsnn" else None
    sketches = []
    failures = 0
    for _ in range(n_samples):
        z = sample_z(post, rng)
        try:
            sketches.append(sample_sketch(params, z, rng, cond_mean=cond))
        except SketchBudgetError:
            failures += 1
    programs = concretize_top_k(sketches, db, walk_cfg, k, rng,
                                walks_per_sketch=walks_per_sketch)
    return programs, sketches, failures


# -- evaluation ---------------------------------------------------------------------

@dataclass
class EvalReport:
    fractions: list[float]
    # metric name -> one mean per fraction
    means: dict[str, list[float]]
    record_count: int
    seed: int

    METRICS = ("m1", "m2", "m3", "m4", "m5")

    def to_csv(self) -> str:
        lines = [f"# seed={self.seed} records={self.record_count}"]
        lines.append("metric," + ",".join(f"{f:g}" for f in self.fractions))
        for name in self.METRICS:
            lines.append(name + "," + ",".join(f"{v:.4f}" for v in self.means[name]))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        width = 8
        header = "metric".ljust(8) + "".join(
            f"{f:>{width}.0%}" for f in self.fractions)
        rows = [header]
        for name in self.METRICS:
            rows.append(name.ljust(8) + "".join(
                f"{v:>{width}.3f}" for v in self.means[name]))
        return "\n".join(rows)


def evaluate(records, params: GedParams, db: ApiDatabase,
             walk_cfg: WalkConfig, fractions, seed: int,
             n_samples: int = 50, k: int = 10,
             walks_per_sketch: int = 60, unroll: int = 1) -> EvalReport:
    """Average the five metrics over the records at each observability
    fraction.

    Per-record randomness is seeded by (seed, record index) and shared
    across fractions, so a fraction that leaves a label unchanged scores
    identically to full observability.
    """
    fractions = list(fractions)
    sums = {name: [0.0] * len(fractions) for name in EvalReport.METRICS}
    for ri, record in enumerate(records):
        expected = record.program()
        for fi, fraction in enumerate(fractions):
            sub_rng = np.random.default_rng([seed, ri, fi, 0xFACE])
            label = subsample_label(record.label, fraction, sub_rng)
            rng = np.random.default_rng([seed, ri])
            predicted, _, _ = sample_programs(
                params, db, label, k, n_samples, walk_cfg, rng,
                walks_per_sketch=walks_per_sketch)
            scores = EvalRecord.score(expected, predicted, db, unroll)
            for name in EvalReport.METRICS:
                sums[name][fi] += getattr(scores, name)
    n = max(1, len(records))
    means = {name: [s / n for s in sums[name]] for name in sums}
    return EvalReport(fractions, means, len(records), seed)


def unseen_subset(test_records, train_records):
    """Records whose (label, sketch) pair never occurs in training."""
    train_keys = {r.pair_key() for r in train_records}
    return [r for r in test_records if r.pair_key() not in train_keys]
