"""End to end: train the latent-variable sketch model on the toy corpus,
then generate ranked type-safe programs from sparse evidence.

Run:  python3 demos/03_train_and_generate.py     (about a minute on CPU)
"""

import numpy as np

from sketchgen import Hyperparams, abstract, parse_program, print_program, train
from sketchgen.concretize import WalkConfig
from sketchgen.datasets import TOY_PROGRAMS, toy_database
from sketchgen.labels import Label, Vocabularies, label_of_sketch
from sketchgen.pipeline import sample_programs

db = toy_database()
pairs = []
for text in TOY_PROGRAMS:
    sketch = abstract(parse_program(text), db)
    pairs.append((label_of_sketch(sketch), sketch))
vocab = Vocabularies.build([lab for lab, _ in pairs], [y for _, y in pairs])

print(f"training on {len(pairs)} (label, sketch) pairs ...")
params, curve = train(pairs, vocab, Hyperparams(seed=7))
print(f"loss: {curve[0]:.2f} (epoch 1) -> {curve[-1]:.2f} (epoch {len(curve)})")
print()

queries = [
    Label.of(calls=["readLine", "close"]),
    Label.of(calls=["write"], types=["FileWriter"]),
    Label.of(keys=["exists", "delete"]),
]
rng = np.random.default_rng(0)
for label in queries:
    print(f"label: {label.to_json()}")
    programs, _, _ = sample_programs(params, db, label, k=3, n_samples=60,
                                     walk_cfg=WalkConfig(), rng=rng)
    for rank, program in enumerate(programs, 1):
        print(f"  {rank}. {print_program(program)}")
    print()
