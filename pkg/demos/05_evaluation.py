"""The five equivalence-proxy metrics under partial observability: score
the trained model when it sees 100%, 75%, 50%, and 25% of each test
label. M1 (exact match up to renaming) degrades as evidence is hidden;
M2-M5 are distances, so they grow.

Run:  python3 demos/05_evaluation.py     (a few minutes on CPU)
"""

from sketchgen import Hyperparams, abstract, parse_program, train
from sketchgen.concretize import WalkConfig
from sketchgen.datasets import TOY_PROGRAMS, toy_database
from sketchgen.labels import Vocabularies, label_of_sketch
from sketchgen.pipeline import DatasetRecord, evaluate

db = toy_database()
records = []
for text in TOY_PROGRAMS:
    program = parse_program(text)
    sketch = abstract(program, db)
    records.append(DatasetRecord(text, label_of_sketch(sketch), sketch, program))

print("training ...")
pairs = [(r.label, r.sketch) for r in records]
vocab = Vocabularies.build([lab for lab, _ in pairs], [y for _, y in pairs])
params, _ = train(pairs, vocab, Hyperparams(seed=7))

print("evaluating at four observability fractions ...")
report = evaluate(records, params, db, WalkConfig(),
                  fractions=[1.0, 0.75, 0.5, 0.25], seed=11,
                  n_samples=50, k=10)
print()
print(report.to_text())
print()
print("(M1 is a hit rate, higher is better; M2-M5 are distances, lower is better)")
