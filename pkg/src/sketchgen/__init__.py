"""Label-conditioned program generation.

Learn a latent-variable model mapping sparse evidence (API calls, types,
keywords) to program sketches, then concretize sampled sketches into
type-safe programs by type-directed search.
"""

from .api import ApiDatabase, ApiDatabaseError, MethodSignature, load_api_database
from .labels import Label, Vocabularies, extract_label, split_camel_case, subsample_label
from .lang import Program, print_program
from .parser import AmlSyntaxError, parse_program
from .sketch import (Cexp, Sketch, abstract, production_paths,
                     record_to_sketch, sketch_to_record)
from .typecheck import TypeCheckError, type_check
from .model import (GedParams, Hyperparams, Posterior, load_checkpoint,
                    posterior, sample_sketch, sample_z, save_checkpoint, train)
from .concretize import (BudgetExhaustedError, WalkConfig, concretize_top_k,
                         neighbors, random_walk, step_distribution)
from .metrics import (EvalRecord, alpha_equal, call_sequences, jaccard_distance,
                      m1, m2, m3, m4, m5)

__version__ = "0.1.0"
