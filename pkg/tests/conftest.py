import numpy as np
import pytest

from sketchgen.datasets import TOY_PROGRAMS, toy_database
from sketchgen.labels import Vocabularies, label_of_sketch
from sketchgen.parser import parse_program
from sketchgen.pipeline import DatasetRecord
from sketchgen.sketch import abstract


@pytest.fixture(scope="session")
def toy_db():
    return toy_database()


@pytest.fixture(scope="session")
def toy_records(toy_db):
    records = []
    for text in TOY_PROGRAMS:
        program = parse_program(text)
        sketch = abstract(program, toy_db)
        records.append(DatasetRecord(text, label_of_sketch(sketch), sketch, program))
    return records


@pytest.fixture(scope="session")
def toy_vocab(toy_records):
    return Vocabularies.build([r.label for r in toy_records],
                              [r.sketch for r in toy_records])


@pytest.fixture()
def rng():
    return np.random.default_rng(0)


TRAIN_SEED = 7


@pytest.fixture(scope="session")
def trained(toy_records, toy_vocab):
    """Toy model trained at the full desk-scale defaults; shared by the
    end-to-end tests and the acceptance gates."""
    from sketchgen import model as M
    pairs = [(r.label, r.sketch) for r in toy_records]
    params, curve = M.train(pairs, toy_vocab, M.Hyperparams(seed=TRAIN_SEED))
    return params, curve
