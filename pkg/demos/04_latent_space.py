"""The latent space clusters by API family: export one latent draw per
corpus record and measure how well the io.read / io.write / fs families
separate. Feed the CSV to any 2-D projection tool to see it.

Run:  python3 demos/04_latent_space.py
"""

import numpy as np

from sketchgen import Hyperparams, abstract, parse_program, train
from sketchgen.datasets import TOY_PROGRAMS, toy_database
from sketchgen.labels import Vocabularies, label_of_sketch
from sketchgen.model import export_latent

db = toy_database()
pairs = []
for text in TOY_PROGRAMS:
    sketch = abstract(parse_program(text), db)
    pairs.append((label_of_sketch(sketch), sketch))
vocab = Vocabularies.build([lab for lab, _ in pairs], [y for _, y in pairs])

print("training ...")
params, _ = train(pairs, vocab, Hyperparams(seed=7))

out = "latent.csv"
count = export_latent(params, pairs, db, out, np.random.default_rng(0))
print(f"wrote {count} rows to {out} (columns z_0..z_15, api_label)")

rows = open(out).read().strip().splitlines()[2:]
by_family = {}
for row in rows:
    parts = row.split(",")
    by_family.setdefault(parts[-1], []).append([float(x) for x in parts[:-1]])

print("\nper-family centroid distances (bigger off-diagonal = cleaner clusters):")
families = sorted(by_family, key=lambda f: -len(by_family[f]))[:4]
centroids = {f: np.mean(by_family[f], axis=0) for f in families}
print("  " + "".join(f"{f:>10}" for f in families))
for f in families:
    cells = "".join(
        f"{np.linalg.norm(centroids[f] - centroids[g]):>10.2f}" for g in families)
    print(f"  {f:<10}{cells}")
