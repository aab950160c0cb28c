"""Latent-variable encoder-decoder over sketches.

Evidence elements are encoded one at a time into the latent space; the
posterior over the latent vector has a closed form (a spherical Normal
whose mean averages the encoded evidence, shrunk toward the standard
Normal prior). A two-edge recurrent tree decoder scores and samples
production paths. Training maximizes a single-sample Monte-Carlo estimate
of the reconstruction bound with the reparameterization trick; the
"gsnn" variant additionally conditions the decoder's initial state on the
evidence encoding and regularizes with a weighted KL term.
"""

from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass

import numpy as np

from .autodiff import Adam, Tensor, as_tensor
from .labels import Label, Vocabularies
from .sketch import (CATCH, CHILD, DO, ELSE, IF, NOCALL, ROOT, SIBLING, SKIP,
                     STOP, TRY, WHILE, Sketch, TreeNode, sketch_from_tree,
                     training_paths)

logger = logging.getLogger(__name__)

KINDS = ("calls", "types", "keys")
EDGES = (CHILD, SIBLING)

CHECKPOINT_VERSION = 1


class ModelError(Exception):
    pass


class OutOfVocabularyError(ModelError):
    pass


class SketchBudgetError(ModelError):
    """Sampling exceeded the node budget before the tree closed."""


class CheckpointError(ModelError):
    pass


@dataclass
class Hyperparams:
    """Model and training knobs. The defaults are desk-scale; larger
    settings (d=32, units 64/32/64, 128 decoder units, batch 50,
    lr 0.0006) can be set through the run configuration."""
    d: int = 16
    h_calls: int = 32
    h_types: int = 16
    h_keys: int = 32
    h_dec: int = 64
    batch: int = 4
    lr: float = 0.015
    epochs: int = 50
    seed: int = 0
    variant: str = "ged"
    beta: float = 0.001
    max_nodes: int = 100

    def __post_init__(self):
        if self.variant not in ("ged", "gsnn"):
            raise ValueError(f"unknown variant {self.variant!r}")
        for name in ("d", "h_calls", "h_types", "h_keys", "h_dec", "batch",
                     "max_nodes"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if self.beta < 0 or self.lr < 0 or self.epochs < 0:
            raise ValueError("beta, lr, and epochs must be nonnegative")

    def units_for(self, kind: str) -> int:
        return {"calls": self.h_calls, "types": self.h_types,
                "keys": self.h_keys}[kind]

    def to_json(self) -> dict:
        return asdict(self)

    @staticmethod
    def from_json(doc: dict) -> "Hyperparams":
        return Hyperparams(**doc)


@dataclass(frozen=True)
class Posterior:
    """Spherical Normal over the latent space: mean and scalar variance."""
    mean: np.ndarray
    variance: float


def _param_specs(vocab: Vocabularies, hyper: Hyperparams):
    """Canonical (name, shape) listing; fixes initialization draw order."""
    d, h = hyper.d, hyper.h_dec
    g = len(vocab.grammar)
    specs = []
    for kind in KINDS:
        hk = hyper.units_for(kind)
        vk = len(vocab.kind(kind))
        specs += [
            (f"enc.{kind}.Wh", (vk, hk)),
            (f"enc.{kind}.bh", (hk,)),
            (f"enc.{kind}.Wd", (hk, d)),
            (f"enc.{kind}.bd", (d,)),
            (f"enc.{kind}.log_sigma", ()),
        ]
    specs += [("dec.Wl", (d, h)), ("dec.bl", (h,))]
    if hyper.variant == "gsnn":
        specs += [("dec.Wlx", (d, h))]
    for edge in EDGES:
        specs += [
            (f"dec.{edge}.Wh", (h, h)),
            (f"dec.{edge}.bh", (h,)),
            (f"dec.{edge}.Wv", (g, h)),
            (f"dec.{edge}.bv", (h,)),
            (f"dec.{edge}.Wy", (h, g)),
            (f"dec.{edge}.by", (g,)),
        ]
    return specs


class GedParams:
    """Every weight matrix, the per-kind sigma values (stored as log sigma
    to keep them positive), vocabularies, and hyperparameters."""

    def __init__(self, hyper: Hyperparams, vocab: Vocabularies,
                 tensors: dict[str, Tensor]):
        self.hyper = hyper
        self.vocab = vocab
        self.tensors = tensors
        self._masks = None

    def __getitem__(self, name: str) -> Tensor:
        return self.tensors[name]

    def tensor_list(self) -> list[Tensor]:
        return [self.tensors[name] for name, _ in _param_specs(self.vocab, self.hyper)]

    def sigma(self, kind: str) -> float:
        return float(np.exp(self[f"enc.{kind}.log_sigma"].data))

    def clone(self) -> "GedParams":
        tensors = {k: Tensor(v.data.copy()) for k, v in self.tensors.items()}
        return GedParams(self.hyper, self.vocab, tensors)


def init_params(vocab: Vocabularies, hyper: Hyperparams,
                rng: np.random.Generator) -> GedParams:
    """Uniform Glorot weights, zero biases, sigma = 1 for every kind."""
    tensors = {}
    for name, shape in _param_specs(vocab, hyper):
        if len(shape) == 2:
            limit = np.sqrt(6.0 / (shape[0] + shape[1]))
            data = rng.uniform(-limit, limit, size=shape)
        else:
            data = np.zeros(shape)
        tensors[name] = Tensor(data)
    return GedParams(hyper, vocab, tensors)


def to_variant(params: GedParams, variant: str) -> GedParams:
    """Same weights under another variant; a fresh zero conditioning matrix
    is added when switching to "gsnn"."""
    hyper = Hyperparams(**{**params.hyper.to_json(), "variant": variant})
    tensors = {k: Tensor(v.data.copy()) for k, v in params.tensors.items()}
    if variant == "gsnn" and "dec.Wlx" not in tensors:
        tensors["dec.Wlx"] = Tensor(np.zeros((hyper.d, hyper.h_dec)))
    if variant == "ged":
        tensors.pop("dec.Wlx", None)
    return GedParams(hyper, params.vocab, tensors)


# -- encoder and posterior ---------------------------------------------------

def encode_element(params: GedParams, kind: str, index: int) -> np.ndarray:
    """f(x) = tanh((Wh . onehot(x) + bh) . Wd + bd); every component lies
    strictly inside (-1, 1)."""
    vocab_size = len(params.vocab.kind(kind))
    if not 0 <= index < vocab_size:
        raise OutOfVocabularyError(f"{kind} index {index} out of range {vocab_size}")
    Wh = params[f"enc.{kind}.Wh"].data
    bh = params[f"enc.{kind}.bh"].data
    Wd = params[f"enc.{kind}.Wd"].data
    bd = params[f"enc.{kind}.bd"].data
    return np.tanh((Wh[index] + bh) @ Wd + bd)


def label_indices(vocab: Vocabularies, label: Label) -> dict[str, list[int]]:
    """Vocabulary indices per kind, in sorted element order. Elements not
    seen during training are dropped with a warning."""
    out = {}
    dropped = []
    for kind in KINDS:
        table = vocab.kind(kind)
        idx = []
        for element in sorted(label.kind(kind)):
            if element in table:
                idx.append(table[element])
            else:
                dropped.append(f"{kind}:{element}")
        out[kind] = idx
    if dropped:
        logger.warning("dropping %d out-of-vocabulary label element(s): %s",
                       len(dropped), ", ".join(dropped))
    return out


def posterior(params: GedParams, label: Label) -> Posterior:
    """Closed-form posterior over the latent vector.

    mean = xbar / (1 + n) and variance = 1 / (1 + n), where xbar is the
    precision-weighted sum of encoded evidence elements and n the
    precision-weighted element count. An empty label yields the standard
    Normal prior exactly.
    """
    d = params.hyper.d
    xbar = np.zeros(d)
    n = 0.0
    for kind, idx in label_indices(params.vocab, label).items():
        if not idx:
            continue
        s2inv = float(np.exp(-2.0 * params[f"enc.{kind}.log_sigma"].data))
        total = np.zeros(d)
        for i in idx:
            total = total + encode_element(params, kind, i)
        xbar = xbar + s2inv * total
        n += len(idx) * s2inv
    denom = 1.0 + n
    return Posterior(mean=xbar / denom, variance=1.0 / denom)


def sample_z(post: Posterior, rng: np.random.Generator) -> np.ndarray:
    """Reparameterized draw: mean + sqrt(variance) * eps."""
    eps = rng.standard_normal(post.mean.shape[0])
    return post.mean + np.sqrt(post.variance) * eps


# -- decoder -----------------------------------------------------------------

def _softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    e = np.exp(shifted)
    return e / e.sum()


def _log_softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max()
    return shifted - np.log(np.exp(shifted).sum())


def initial_state(params: GedParams, z: np.ndarray,
                  cond_mean: np.ndarray | None = None) -> np.ndarray:
    h0 = z @ params["dec.Wl"].data + params["dec.bl"].data
    if params.hyper.variant == "gsnn":
        if cond_mean is None:
            cond_mean = np.zeros(params.hyper.d)
        h0 = h0 + cond_mean @ params["dec.Wlx"].data
    return h0


def decoder_step(params: GedParams, h_prev: np.ndarray, node_index: int,
                 edge: str) -> tuple[np.ndarray, np.ndarray]:
    """One recurrence: consume (node, edge), return the new hidden state
    and the output distribution over the grammar vocabulary."""
    g = len(params.vocab.grammar)
    if not 0 <= node_index < g:
        raise OutOfVocabularyError(f"grammar index {node_index} out of range {g}")
    Wh = params[f"dec.{edge}.Wh"].data
    bh = params[f"dec.{edge}.bh"].data
    Wv = params[f"dec.{edge}.Wv"].data
    bv = params[f"dec.{edge}.bv"].data
    h = np.tanh(h_prev @ Wh + bh + Wv[node_index] + bv)
    y = _softmax(h @ params[f"dec.{edge}.Wy"].data + params[f"dec.{edge}.by"].data)
    return h, y


def _grammar_index(params: GedParams, symbol: str) -> int:
    try:
        return params.vocab.grammar[symbol]
    except KeyError:
        raise OutOfVocabularyError(f"symbol not in decoder vocabulary: {symbol!r}") from None


def path_log_prob(params: GedParams, paths, z: np.ndarray,
                  cond_mean: np.ndarray | None = None) -> float:
    """Sum of log-probabilities of every step on every given path. Each
    path is scored independently from the lifted latent state, so left
    siblings condition the prediction of their right siblings."""
    total = 0.0
    h0 = initial_state(params, z, cond_mean)
    for path in paths:
        h = h0
        for (sym, edge), (nxt, _) in zip(path, path[1:]):
            i = _grammar_index(params, sym)
            t = _grammar_index(params, nxt)
            Wh = params[f"dec.{edge}.Wh"].data
            bh = params[f"dec.{edge}.bh"].data
            Wv = params[f"dec.{edge}.Wv"].data
            bv = params[f"dec.{edge}.bv"].data
            h = np.tanh(h @ Wh + bh + Wv[i] + bv)
            logits = h @ params[f"dec.{edge}.Wy"].data + params[f"dec.{edge}.by"].data
            total += _log_softmax(logits)[t]
    return float(total)


# -- grammar-guided sampling ---------------------------------------------------

class _Masks:
    """Index sets of grammatically admissible successors per position.

    Control symbols missing from a (hand-built) vocabulary simply never
    appear in any mask; corpus-built vocabularies always carry all of them.
    """

    def __init__(self, vocab: Vocabularies):
        g = vocab.grammar
        if STOP not in g:
            raise ModelError("decoder vocabulary lacks the chain terminator")
        calls = sorted(g[t] for t in vocab.call_tokens)
        types = sorted(g[t] for t in vocab.type_tokens)
        stmt_first = list(calls)
        if SKIP in g:
            stmt_first.append(g[SKIP])
        if IF in g and ELSE in g and DO in g:
            stmt_first.append(g[IF])
        if WHILE in g and DO in g:
            stmt_first.append(g[WHILE])
        if TRY in g and CATCH in g and types:
            stmt_first.append(g[TRY])
        self.stmt_first = np.array(sorted(stmt_first), dtype=int)
        self.stmt_next = np.array(sorted(stmt_first + [g[STOP]]), dtype=int)
        if DO in g:
            cond_first = calls + ([g[NOCALL]] if NOCALL in g else [])
            self.cond_first = np.array(sorted(cond_first), dtype=int)
            self.cond_next = np.array(sorted(calls + [g[DO]]), dtype=int)
            self.after_nocall = np.array([g[DO]], dtype=int)
        if CATCH in g:
            self.catch_first = np.array([g[CATCH]], dtype=int)
            self.catch_next = np.array(sorted(stmt_first + [g[CATCH], g[STOP]]),
                                       dtype=int)
        self.exc_types = np.array(types, dtype=int)
        if ELSE in g:
            self.else_only = np.array([g[ELSE]], dtype=int)


def _masks_for(params: GedParams) -> _Masks:
    if params._masks is None:
        params._masks = _Masks(params.vocab)
    return params._masks


class _Sampler:
    def __init__(self, params: GedParams, rng: np.random.Generator,
                 max_nodes: int):
        self.params = params
        self.rng = rng
        self.masks = _masks_for(params)
        self.symbols = [s for s, _ in sorted(params.vocab.grammar.items(),
                                             key=lambda kv: kv[1])]
        self.budget = max_nodes

    def draw(self, h_prev, sym: str, edge: str, mask: np.ndarray):
        """Advance the state over (sym, edge) and sample an admissible
        successor from the renormalized output distribution."""
        if self.budget <= 0:
            raise SketchBudgetError("sketch node budget exceeded")
        self.budget -= 1
        params = self.params
        i = _grammar_index(params, sym)
        Wh = params[f"dec.{edge}.Wh"].data
        bh = params[f"dec.{edge}.bh"].data
        Wv = params[f"dec.{edge}.Wv"].data
        bv = params[f"dec.{edge}.bv"].data
        h = np.tanh(h_prev @ Wh + bh + Wv[i] + bv)
        logits = h @ params[f"dec.{edge}.Wy"].data + params[f"dec.{edge}.by"].data
        sub = logits[mask]
        sub = sub - sub.max()
        probs = np.exp(sub)
        probs /= probs.sum()
        choice = int(mask[self.rng.choice(len(mask), p=probs)])
        return self.symbols[choice], h

    def chain(self, h_prev, sym: str, edge: str, first: bool) -> TreeNode:
        mask = self.masks.stmt_first if first else self.masks.stmt_next
        nxt, h = self.draw(h_prev, sym, edge, mask)
        node = TreeNode(nxt)
        if nxt != STOP:
            self.expand(node, h)
        return node

    def expand(self, node: TreeNode, h) -> None:
        """Fill in the sampled statement's structure (child before sibling)
        and continue its chain."""
        sym = node.symbol
        if sym in (WHILE, IF):
            node.child = self.cond(h, sym)
            if sym == WHILE:
                node.sibling = self.chain(h, sym, SIBLING, first=False)
            else:
                esym, he = self.draw(h, sym, SIBLING, self.masks.else_only)
                els = TreeNode(esym)
                els.child = self.chain(he, ELSE, CHILD, first=True)
                els.sibling = self.chain(he, ELSE, SIBLING, first=False)
                node.sibling = els
        elif sym == TRY:
            node.child = self.chain(h, sym, CHILD, first=True)
            prev_node, prev_h, prev_sym = node, h, TRY
            mask = self.masks.catch_first
            while True:
                csym, ch = self.draw(prev_h, prev_sym, SIBLING, mask)
                cnode = TreeNode(csym)
                prev_node.sibling = cnode
                if csym == STOP:
                    break
                if csym == CATCH:
                    tsym, th = self.draw(ch, CATCH, CHILD, self.masks.exc_types)
                    tnode = TreeNode(tsym)
                    tnode.child = self.chain(th, tsym, CHILD, first=True)
                    cnode.child = tnode
                    prev_node, prev_h, prev_sym = cnode, ch, CATCH
                    mask = self.masks.catch_next
                else:
                    self.expand(cnode, ch)
                    break
        else:
            # skip and abstract calls are leaves
            node.sibling = self.chain(h, sym, SIBLING, first=False)

    def cond(self, h_prev, owner_sym: str) -> TreeNode:
        sym, h = self.draw(h_prev, owner_sym, CHILD, self.masks.cond_first)
        head = TreeNode(sym)
        cur = head
        while sym != DO:
            mask = self.masks.after_nocall if sym == NOCALL else self.masks.cond_next
            sym, h = self.draw(h, sym, SIBLING, mask)
            nxt = TreeNode(sym)
            cur.sibling = nxt
            cur = nxt
        cur.child = self.chain(h, DO, CHILD, first=True)
        return head


def sample_sketch(params: GedParams, z: np.ndarray, rng: np.random.Generator,
                  max_nodes: int | None = None,
                  cond_mean: np.ndarray | None = None) -> Sketch:
    """Grow a generation tree depth-first from the lifted latent state,
    sampling each node from the decoder restricted to grammatically valid
    successors; the result is well formed by construction. Raises
    SketchBudgetError if the tree does not close within max_nodes."""
    budget = max_nodes if max_nodes is not None else params.hyper.max_nodes
    sampler = _Sampler(params, rng, budget)
    root = TreeNode(ROOT)
    h0 = initial_state(params, z, cond_mean)
    root.child = sampler.chain(h0, ROOT, CHILD, first=True)
    return sketch_from_tree(root)


# -- training ------------------------------------------------------------------

def _encode_element_t(params: GedParams, kind: str, index: int) -> Tensor:
    Wh = params[f"enc.{kind}.Wh"]
    bh = params[f"enc.{kind}.bh"]
    Wd = params[f"enc.{kind}.Wd"]
    bd = params[f"enc.{kind}.bd"]
    return ((Wh.row(index) + bh) @ Wd + bd).tanh()


def _posterior_t(params: GedParams, label: Label) -> tuple[Tensor, Tensor]:
    """Differentiable posterior (mean, variance); mirrors posterior()."""
    d = params.hyper.d
    xbar: Tensor | None = None
    n: Tensor | None = None
    for kind, idx in label_indices(params.vocab, label).items():
        if not idx:
            continue
        log_sigma = params[f"enc.{kind}.log_sigma"]
        s2inv = (as_tensor(-2.0) * log_sigma).exp()
        total: Tensor | None = None
        for i in idx:
            f = _encode_element_t(params, kind, i)
            total = f if total is None else total + f
        term = s2inv * total
        xbar = term if xbar is None else xbar + term
        count = s2inv * as_tensor(float(len(idx)))
        n = count if n is None else n + count
    if xbar is None:
        return as_tensor(np.zeros(d)), as_tensor(1.0)
    v = (as_tensor(1.0) + n).reciprocal()
    return xbar * v, v


def _record_loss_t(params: GedParams, label: Label, y: Sketch,
                   eps: np.ndarray) -> Tensor:
    mean, v = _posterior_t(params, label)
    z = mean + v.sqrt() * as_tensor(eps)
    h0 = z @ params["dec.Wl"] + params["dec.bl"]
    if params.hyper.variant == "gsnn":
        h0 = h0 + mean @ params["dec.Wlx"]
    ll: Tensor | None = None
    for path in training_paths(y):
        h = h0
        for (sym, edge), (nxt, _) in zip(path, path[1:]):
            i = _grammar_index(params, sym)
            t = _grammar_index(params, nxt)
            h = (h @ params[f"dec.{edge}.Wh"] + params[f"dec.{edge}.bh"]
                 + params[f"dec.{edge}.Wv"].row(i) + params[f"dec.{edge}.bv"]).tanh()
            logits = h @ params[f"dec.{edge}.Wy"] + params[f"dec.{edge}.by"]
            term = logits.log_softmax().pick(t)
            ll = term if ll is None else ll + term
    loss = -ll
    if params.hyper.variant == "gsnn" and params.hyper.beta != 0.0:
        d = float(params.hyper.d)
        kl = as_tensor(0.5) * (as_tensor(d) * v + (mean * mean).sum()
                               - as_tensor(d) - as_tensor(d) * v.log())
        loss = loss + as_tensor(params.hyper.beta) * kl
    return loss


def loss_graph(params: GedParams, batch, eps_list) -> Tensor:
    """Mean negated reconstruction bound over the batch, as a graph node
    ready for backward()."""
    assert len(batch) > 0, "loss over an empty batch"
    total: Tensor | None = None
    for (label, y), eps in zip(batch, eps_list):
        term = _record_loss_t(params, label, y, eps)
        total = term if total is None else total + term
    return total * as_tensor(1.0 / len(batch))


def loss(params: GedParams, batch, rng: np.random.Generator) -> float:
    """Single-sample Monte-Carlo training loss for one batch (negated, so
    lower is better)."""
    eps_list = [rng.standard_normal(params.hyper.d) for _ in batch]
    return float(loss_graph(params, batch, eps_list).data)


def train(records, vocab: Vocabularies, hyper: Hyperparams,
          params: GedParams | None = None,
          rng: np.random.Generator | None = None,
          epochs: int | None = None,
          log_every: int = 10):
    """Stochastic gradient ascent on the reconstruction bound with Adam.

    records: list of (Label, Sketch) pairs. Returns (params, loss_curve),
    one mean loss per epoch. Bit-reproducible for a fixed (seed, corpus,
    hyperparams); pass params/rng to continue a previous run (the
    optimizer's moment estimates start fresh on resume).
    """
    if not records:
        raise ModelError("cannot train on an empty corpus")
    if rng is None:
        rng = np.random.default_rng(hyper.seed)
    if params is None:
        params = init_params(vocab, hyper, rng)
    n_epochs = hyper.epochs if epochs is None else epochs
    opt = Adam(params.tensor_list(), lr=hyper.lr)
    curve: list[float] = []
    for epoch in range(n_epochs):
        # linear decay to a fifth of the base rate; settles the last epochs
        opt.lr = hyper.lr * (1.0 - 0.8 * epoch / max(1, n_epochs))
        order = rng.permutation(len(records))
        epoch_loss = 0.0
        for start in range(0, len(records), hyper.batch):
            chunk = order[start:start + hyper.batch]
            batch = [records[i] for i in chunk]
            eps_list = [rng.standard_normal(hyper.d) for _ in batch]
            opt.zero_grad()
            value = loss_graph(params, batch, eps_list)
            value.backward()
            opt.step()
            epoch_loss += float(value.data) * len(batch)
        curve.append(epoch_loss / len(records))
        if log_every and (epoch + 1) % log_every == 0:
            logger.info("epoch %d/%d  loss %.4f", epoch + 1, n_epochs, curve[-1])
    return params, curve


# -- latent export ---------------------------------------------------------------

def dominant_package(y: Sketch, db) -> str:
    """Most frequent API package among the sketch's call receivers; the
    receiver type name stands in when no package is declared."""
    from collections import Counter
    from .sketch import sketch_calls
    counts = Counter()
    for cexp in sketch_calls(y):
        counts[db.package_of(cexp.receiver) or cexp.receiver] += 1
    if not counts:
        return "none"
    return sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))[0][0]


def export_latent(params: GedParams, records, db, path,
                  rng: np.random.Generator) -> int:
    """Write one CSV row per (label, sketch) record: a latent draw from the
    posterior and the sketch's dominant API package. Returns the row count."""
    d = params.hyper.d
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("# seed recorded by caller; rows are (z, api_label)\n")
        fh.write(",".join([f"z_{i}" for i in range(d)] + ["api_label"]) + "\n")
        count = 0
        for label, y in records:
            z = sample_z(posterior(params, label), rng)
            fh.write(",".join(f"{x:.8f}" for x in z)
                     + f",{dominant_package(y, db)}\n")
            count += 1
    return count


# -- checkpoints -------------------------------------------------------------------

def save_checkpoint(params: GedParams, path, extra_meta: dict | None = None) -> None:
    meta = {
        "format_version": CHECKPOINT_VERSION,
        "hyper": params.hyper.to_json(),
        "vocab": params.vocab.to_json(),
    }
    if extra_meta:
        meta.update(extra_meta)
    arrays = {name: t.data for name, t in params.tensors.items()}
    np.savez(path, _meta=np.array(json.dumps(meta)), **arrays)


def load_checkpoint(path) -> tuple[GedParams, dict]:
    """Load a checkpoint, validating every array shape against the stored
    hyperparameters and vocabularies."""
    with np.load(path, allow_pickle=False) as npz:
        if "_meta" not in npz:
            raise CheckpointError("missing checkpoint metadata")
        meta = json.loads(str(npz["_meta"][()]))
        if meta.get("format_version") != CHECKPOINT_VERSION:
            raise CheckpointError(
                f"unsupported checkpoint version {meta.get('format_version')!r}")
        hyper = Hyperparams.from_json(meta["hyper"])
        vocab = Vocabularies.from_json(meta["vocab"])
        tensors = {}
        for name, shape in _param_specs(vocab, hyper):
            if name not in npz:
                raise CheckpointError(f"checkpoint missing parameter {name!r}")
            data = npz[name]
            if data.shape != shape:
                raise CheckpointError(
                    f"shape mismatch for {name!r}: stored {data.shape}, expected {shape}")
            tensors[name] = Tensor(data)
    return GedParams(hyper, vocab, tensors), meta
