"""End-to-end acceptance gates.

Each test prints one PASS/FAIL line (run with -s to see them live). The
slow fixtures (a fully trained toy model) are shared across criteria.
"""

import contextlib
import json
import math
import time

import numpy as np
import pytest

from sketchgen import model as M
from sketchgen.cli import main
from sketchgen.concretize import BudgetExhaustedError, WalkConfig, random_walk
from sketchgen.datasets import write_toy_corpus, write_toy_database
from sketchgen.labels import Label
from sketchgen.lang import print_program
from sketchgen.metrics import (EvalRecord, alpha_equal, canonical_rename,
                               jaccard_distance)
from sketchgen.parser import parse_program
from sketchgen.pipeline import evaluate
from sketchgen.sketch import (Cexp, SkCall, SkIf, SkSeq, SkSkip, SkTry,
                              SkWhile, abstract)
from sketchgen.typecheck import type_check

from .oracles import enumerate_concretizations
from .test_model import TINY_LABEL, TINY_SKETCH, _gradcheck, tiny_params


@contextlib.contextmanager
def criterion(number, title):
    try:
        yield
    except BaseException:
        print(f"[criterion {number:02d}] FAIL  {title}")
        raise
    print(f"[criterion {number:02d}] PASS  {title}")


from .conftest import TRAIN_SEED

EVAL_SEED = 11


@pytest.fixture(scope="module")
def toy_checkpoint(trained, tmp_path_factory):
    root = tmp_path_factory.mktemp("acceptance")
    ckpt = root / "toy.npz"
    db_path = root / "api.yaml"
    M.save_checkpoint(trained[0], ckpt, extra_meta={"seed": TRAIN_SEED})
    write_toy_database(db_path)
    return {"checkpoint": ckpt, "db": db_path, "root": root}


def _prior_walks(params, toy_db, count, seed, on_program):
    """Sample sketches from the prior and concretize until `count` walks
    succeed; sketches the walker rejects entirely are skipped."""
    rng = np.random.default_rng(seed)
    cfg = WalkConfig()
    done = 0
    attempts = 0
    while done < count:
        attempts += 1
        assert attempts < count * 5, "too many rejected sketches"
        z = rng.standard_normal(params.hyper.d)
        try:
            sketch = M.sample_sketch(params, z, rng)
        except M.SketchBudgetError:
            continue
        try:
            program = random_walk(sketch, toy_db, cfg, rng)
        except BudgetExhaustedError:
            continue
        on_program(sketch, program)
        done += 1


def test_criterion_01_type_safety_of_generation(trained, toy_db):
    with criterion(1, "1000/1000 generated programs parse and type-check"):
        start = time.perf_counter()
        checked = []

        def check(sketch, program):
            text = print_program(program)
            reparsed = parse_program(text)
            assert reparsed == program
            type_check(reparsed, toy_db)
            checked.append(1)

        _prior_walks(trained[0], toy_db, 1000, seed=100, on_program=check)
        elapsed = time.perf_counter() - start
        assert len(checked) == 1000
        assert elapsed < 120.0, f"took {elapsed:.0f}s"


def test_criterion_02_abstraction_fixpoint(trained, toy_db):
    with criterion(2, "1000 successful walks abstract back to their sketch"):
        def check(sketch, program):
            assert abstract(program, toy_db) == sketch

        _prior_walks(trained[0], toy_db, 1000, seed=200, on_program=check)


def _completeness_sketches():
    fr_new = Cexp("FileReader", "new", ("String",))
    br_new = Cexp("BufferedReader", "new", ("FileReader",))
    read = Cexp("BufferedReader", "readLine", ())
    ready = Cexp("BufferedReader", "ready", ())
    close = Cexp("BufferedReader", "close", ())
    fw_new = Cexp("FileWriter", "new", ("String",))
    bw_new = Cexp("BufferedWriter", "new", ("FileWriter",))
    write = Cexp("BufferedWriter", "write", ("String",))
    fl_new = Cexp("File", "new", ("String",))
    exists = Cexp("File", "exists", ())
    delete = Cexp("File", "delete", ())
    name = Cexp("File", "getName", ())
    trim = Cexp("String", "trim", ())
    pst = Cexp("IOException", "printStackTrace", ())
    msg = Cexp("IOException", "getMessage", ())
    return [
        SkSkip(),
        SkCall(read),
        SkCall(close),
        SkSeq((SkCall(fr_new), SkCall(read))),
        SkSeq((SkCall(fr_new), SkCall(br_new), SkCall(read))),
        SkSeq((SkCall(read), SkCall(trim))),
        SkWhile((read,), SkSkip()),
        SkWhile((ready,), SkCall(read)),
        SkWhile((exists,), SkCall(delete)),
        SkIf((ready,), SkCall(read), SkSkip()),
        SkIf((exists,), SkCall(delete), SkCall(name)),
        SkIf((ready, read), SkSkip(), SkSkip()),  # two-element condition
        SkTry(SkCall(read), (("IOException", SkSkip()),)),
        SkTry(SkCall(close), (("IOException", SkCall(pst)),)),
        SkTry(SkSeq((SkCall(fr_new), SkCall(read))),
              (("FileNotFoundException", SkSkip()), ("IOException", SkSkip()))),
        SkTry(SkSkip(), (("IOException", SkCall(msg)),)),
        SkSeq((SkCall(fw_new), SkCall(bw_new), SkCall(write))),
        SkSeq((SkCall(fl_new), SkCall(exists))),
        SkSeq((SkCall(fl_new), SkIf((exists,), SkCall(delete), SkSkip()))),
        SkSeq((SkCall(fr_new), SkWhile((read,), SkSkip()), SkCall(close))),
    ]


def test_criterion_03_concretizer_completeness(toy_db):
    with criterion(3, "200 seeded walks reach every type-safe concretization"
                      " (20 sketches)"):
        start = time.perf_counter()
        sketches = _completeness_sketches()
        assert len(sketches) == 20
        cfg = WalkConfig(simplicity_bias=0.0)
        for i, y in enumerate(sketches):
            oracle = enumerate_concretizations(y, toy_db)
            assert 1 <= len(oracle) <= 500
            rng = np.random.default_rng(300 + i)
            walked = set()
            for _ in range(200):
                program = random_walk(y, toy_db, cfg, rng)
                walked.add(print_program(canonical_rename(program)))
            assert walked == set(oracle), (i, len(walked), len(oracle))
        assert time.perf_counter() - start < 300.0


def test_criterion_04_posterior_formula():
    from .test_model import _log_density, _log_unnormalized
    with criterion(4, "posterior matches the grid oracle; empty label is "
                      "the prior"):
        rng = np.random.default_rng(400)
        params = tiny_params()
        for t in params.tensor_list():
            t.data[...] = rng.standard_normal(t.data.shape) * 0.6
        elements = {"calls": ["a", "b"], "types": ["T"], "keys": ["k"]}
        for _ in range(20):
            label = Label.of(*[
                [e for e in elements[kind] if rng.random() < 0.7]
                for kind in ("calls", "types", "keys")])
            post = M.posterior(params, label)
            zs = rng.standard_normal((100, params.hyper.d)) * 2.0
            ratios = [_log_unnormalized(params, label, z) - _log_density(post, z)
                      for z in zs]
            spread = max(ratios) - min(ratios)
            scale = max(1.0, abs(np.median(ratios)))
            assert spread / scale < 1e-6, spread
        empty = M.posterior(params, Label.of())
        assert np.array_equal(empty.mean, np.zeros(params.hyper.d))
        assert empty.variance == 1.0


def test_criterion_05_gradient_correctness():
    with criterion(5, "analytic gradients match central differences "
                      "(rel err <= 1e-4)"):
        batch = [(TINY_LABEL, TINY_SKETCH),
                 (Label.of(["a"], ["T"], ["k"]), SkSkip())]
        worst_ged = _gradcheck(tiny_params(), batch)
        gsnn = M.to_variant(tiny_params(), "gsnn")
        gsnn.hyper.beta = 0.5
        gsnn["dec.Wlx"].data[...] = np.random.default_rng(5).standard_normal(
            (2, 3)) * 0.4
        worst_gsnn = _gradcheck(gsnn, batch)
        assert worst_ged <= 1e-4 and worst_gsnn <= 1e-4


def test_criterion_06_overfit_reproduction(trained, toy_db, toy_records):
    with criterion(6, "M1@10 at full observability >= 0.9 after 50 epochs"):
        start = time.perf_counter()
        report = evaluate(toy_records, trained[0], toy_db, WalkConfig(),
                          [1.0], seed=EVAL_SEED, n_samples=50, k=10)
        m1 = report.means["m1"][0]
        elapsed = time.perf_counter() - start
        assert m1 >= 0.9, m1
        assert elapsed < 300.0
        print(f"    (M1@10 = {m1:.2f})")


def test_criterion_07_observability_monotonicity(trained, toy_db, toy_records):
    with criterion(7, "mean M1 non-increasing from 100% down to 25% "
                      "observability"):
        fractions = [1.0, 0.75, 0.5, 0.25]
        rows = []
        for seed in (EVAL_SEED, EVAL_SEED + 1, EVAL_SEED + 2):
            report = evaluate(toy_records, trained[0], toy_db, WalkConfig(),
                              fractions, seed=seed, n_samples=50, k=10)
            rows.append(report.means["m1"])
        avg = [sum(r[i] for r in rows) / len(rows) for i in range(len(fractions))]
        assert all(avg[i] >= avg[i + 1] - 1e-12 for i in range(len(avg) - 1)), avg
        print(f"    (mean M1 by fraction: {[round(v, 3) for v in avg]})")


def test_criterion_08_gsnn_reduction():
    with criterion(8, "GSNN with beta=0 and zero conditioning equals the "
                      "plain loss bit-for-bit"):
        ged = tiny_params()
        gsnn = M.to_variant(ged, "gsnn")
        gsnn.hyper.beta = 0.0
        batches = [
            [(TINY_LABEL, TINY_SKETCH)],
            [(Label.of(["b"], ["T"]), SkSkip()), (TINY_LABEL, TINY_SKETCH)],
        ]
        for seed, batch in enumerate(batches):
            lg = M.loss(ged, batch, np.random.default_rng(seed))
            ls = M.loss(gsnn, batch, np.random.default_rng(seed))
            assert lg == ls


def test_criterion_09_metric_unit_suite(toy_db, toy_records):
    with criterion(9, "Jaccard fixed points, M1-implies-zero, renaming "
                      "invariance"):
        assert jaccard_distance(frozenset("a"), frozenset("ab")) == 0.5
        assert jaccard_distance(frozenset("ab"), frozenset("ab")) == 0.0
        assert jaccard_distance(frozenset("a"), frozenset("b")) == 1.0
        for record in toy_records[:8]:
            renamed = canonical_rename(record.program())
            scores = EvalRecord.score(record.program(), [renamed], toy_db)
            assert scores.m1 == 1
            assert scores.m2 == scores.m3 == scores.m4 == scores.m5 == 0
        expected = toy_records[0].program()
        others = [toy_records[5].program(), toy_records[9].program()]
        direct = EvalRecord.score(expected, others, toy_db)
        renamed = EvalRecord.score(expected,
                                   [canonical_rename(p) for p in others], toy_db)
        assert (direct.m2, direct.m3, direct.m4, direct.m5) == (
            renamed.m2, renamed.m3, renamed.m4, renamed.m5)


def test_criterion_10_sampling_latency(toy_checkpoint, capsys):
    with criterion(10, "ranked top-10 generation completes in under 10s"):
        start = time.perf_counter()
        code = main(["sample", "--checkpoint", str(toy_checkpoint["checkpoint"]),
                     "--api-db", str(toy_checkpoint["db"]),
                     "--label", json.dumps({"calls": ["readLine"]}),
                     "--top-k", "10", "--samples", "100", "--seed", "2"])
        elapsed = time.perf_counter() - start
        out = capsys.readouterr().out
        assert code == 0
        assert elapsed < 10.0, f"took {elapsed:.1f}s"
        ranked = [l for l in out.splitlines() if l and not l.startswith("#")]
        assert 1 <= len(ranked) <= 10
        print(f"    ({elapsed:.1f}s for {len(ranked)} programs)")


def test_criterion_11_determinism(toy_checkpoint, capsys):
    with criterion(11, "same seed: identical checkpoints and identical "
                       "ranked lists"):
        root = toy_checkpoint["root"]
        corpus = root / "corpus.jsonl"
        write_toy_corpus(corpus)
        dataset = root / "dataset"
        assert main(["ingest", "--corpus", str(corpus),
                     "--api-db", str(toy_checkpoint["db"]),
                     "--out", str(dataset)]) == 0
        capsys.readouterr()
        outputs = []
        checkpoints = []
        for run in (1, 2):
            ckpt = root / f"det{run}.npz"
            assert main(["train", "--dataset", str(dataset),
                         "--checkpoint", str(ckpt),
                         "--epochs", "6", "--seed", "33"]) == 0
            capsys.readouterr()
            assert main(["sample", "--checkpoint", str(ckpt),
                         "--api-db", str(toy_checkpoint["db"]),
                         "--label", json.dumps({"calls": ["write", "flush"]}),
                         "--top-k", "10", "--samples", "40",
                         "--seed", "33"]) == 0
            outputs.append(capsys.readouterr().out)
            checkpoints.append(ckpt)
        assert outputs[0] == outputs[1]
        first, _ = M.load_checkpoint(checkpoints[0])
        second, _ = M.load_checkpoint(checkpoints[1])
        assert set(first.tensors) == set(second.tensors)
        for tensor_name in first.tensors:
            assert np.array_equal(first[tensor_name].data,
                                  second[tensor_name].data)
