"""Negative sampling, logistic loss, analytic gradients, Adam and the epoch loop."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.special import expit, log_expit

from . import weights as wl
from .kg_store import KgDataset, Triple
from .scoring import Model, normalize_rows

log = logging.getLogger(__name__)

LOSS_FORMS = ("softplus", "cross_entropy")


class TrainingDiverged(FloatingPointError):
    pass


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 2 ** 12
    l2_lambda: float = 1e-3
    negatives_per_positive: int = 1
    max_epochs: int = 1000
    eval_every: int = 50
    patience_epochs: int = 100
    loss_form: str = "softplus"
    seed: int = 0
    valid_split: str | None = "valid"  # None: no validation, keep the last state

    def __post_init__(self):
        if self.loss_form not in LOSS_FORMS:
            raise ValueError(f"loss_form must be one of {LOSS_FORMS}, got {self.loss_form!r}")
        if self.batch_size < 1 or self.negatives_per_positive < 1 or self.eval_every < 1:
            raise ValueError("batch_size, negatives_per_positive and eval_every must be >= 1")
        if self.learning_rate <= 0 or self.l2_lambda < 0 or self.max_epochs < 0:
            raise ValueError("need learning_rate > 0, l2_lambda >= 0, max_epochs >= 0")


# -- negative sampling -------------------------------------------------------

def corrupt(triples: np.ndarray, num_entities: int, rng: np.random.Generator) -> np.ndarray:
    """Replace head or tail (fair coin) by a uniformly drawn different entity."""
    if num_entities < 2:
        raise ValueError("negative sampling needs at least 2 entities")
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    n = len(triples)
    head_side = rng.random(n) < 0.5
    draw = rng.integers(0, num_entities - 1, n)
    col = np.where(head_side, 0, 1)
    orig = triples[np.arange(n), col]
    draw += draw >= orig  # skip the original entity
    out = triples.copy()
    out[np.arange(n), col] = draw
    return out


def sample_negative(t, num_entities: int, rng: np.random.Generator) -> Triple:
    return Triple(*corrupt(np.array([tuple(t)]), num_entities, rng)[0].tolist())


# -- loss --------------------------------------------------------------------

def loss_values(scores, labels, loss_form: str = "softplus") -> np.ndarray:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if loss_form == "softplus":
        return np.logaddexp(0.0, -labels * scores)
    if loss_form == "cross_entropy":
        # -log sigma(s) for positives, -log(1 - sigma(s)) = -log sigma(-s) for negatives
        return np.where(labels > 0, -log_expit(scores), -log_expit(-scores))
    raise ValueError(f"unknown loss form {loss_form!r}")


def loss_derivative(scores, labels, loss_form: str = "softplus") -> np.ndarray:
    """d loss / d score."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.float64)
    if loss_form == "softplus":
        return -labels * expit(-labels * scores)
    if loss_form == "cross_entropy":
        p = expit(scores)
        return np.where(labels > 0, p - 1.0, p)
    raise ValueError(f"unknown loss form {loss_form!r}")


def loss_triple(score: float, label: int, loss_form: str = "softplus") -> float:
    return float(loss_values(score, label, loss_form))


# -- gradients ---------------------------------------------------------------

@dataclass
class Gradients:
    entity: np.ndarray
    relation: np.ndarray
    omega: np.ndarray | None  # w.r.t. the restricted omega
    raw: np.ndarray | None  # w.r.t. raw params, after the restriction
    loss: float
    data_loss: float


def batch_loss_and_grad(model: Model, triples, labels, l2_lambda: float,
                        loss_form: str = "softplus",
                        dirichlet: wl.DirichletRegConfig | None = None) -> Gradients:
    """Total loss of a labelled batch and its gradient for every parameter.

    Loss = sum over triples of logistic loss + lambda/(n D) * ||theta||^2 where
    theta are the vectors of that triple (n = n_e for entities, n_r for
    relations), plus the Dirichlet/L1 penalty once per batch when enabled.
    Gradients come back dense, shaped like the tables.
    """
    table, w = model.table, model.weights
    triples = np.asarray(triples, dtype=np.int64).reshape(-1, 3)
    labels = np.asarray(labels, dtype=np.float64)
    hi, ti, ri = triples[:, 0], triples[:, 1], triples[:, 2]
    h, t, r = table.entity[hi], table.entity[ti], table.relation[ri]
    D = table.dim

    omega = w.tensor()
    if w.learnable:
        # every term, including exact zeros, carries gradient to omega
        inter = np.einsum("bid,bjd,bkd->bijk", h, t, r)
        scores = np.einsum("bijk,ijk->b", inter, omega)
    else:
        inter = None
        scores = np.zeros(len(triples))
        for i, j, k, wt in w.terms():
            scores += wt * np.einsum("bd,bd,bd->b", h[:, i], t[:, j], r[:, k])

    data_loss = float(np.sum(loss_values(scores, labels, loss_form)))
    g = loss_derivative(scores, labels, loss_form)[:, None]

    gh, gt, gr = np.zeros_like(h), np.zeros_like(t), np.zeros_like(r)
    for i, j, k, wt in w.terms():
        gh[:, i] += wt * t[:, j] * r[:, k]
        gt[:, j] += wt * h[:, i] * r[:, k]
        gr[:, k] += wt * h[:, i] * t[:, j]
    gh *= g[:, :, None]
    gt *= g[:, :, None]
    gr *= g[:, :, None]

    ce = l2_lambda / (table.n_e * D)
    cr = l2_lambda / (table.n_r * D)
    reg = 0.0
    if l2_lambda:
        reg = ce * (np.sum(h * h) + np.sum(t * t)) + cr * np.sum(r * r)
        gh += 2 * ce * h
        gt += 2 * ce * t
        gr += 2 * cr * r

    grad_e = np.zeros_like(table.entity)
    grad_r = np.zeros_like(table.relation)
    np.add.at(grad_e, hi, gh)
    np.add.at(grad_e, ti, gt)
    np.add.at(grad_r, ri, gr)

    total = data_loss + float(reg)
    grad_w = grad_raw = None
    if w.learnable:
        grad_w = np.einsum("b,bijk->ijk", g[:, 0], inter).ravel()
        if dirichlet is not None:
            if dirichlet.enabled:
                pen, pg = wl.dirichlet_reg(w.omega, dirichlet)
                total += pen
                grad_w = grad_w + pg
            if dirichlet.lambda_l1:
                pen, pg = wl.l1_reg(w.omega, dirichlet.lambda_l1)
                total += pen
                grad_w = grad_w + pg
        grad_raw = wl.restrict_vjp(w.raw, w.restriction, grad_w)
    return Gradients(grad_e, grad_r, grad_w, grad_raw, total, data_loss)


def grad_batch(model: Model, batch, l2_lambda: float, loss_form: str = "softplus",
               dirichlet: wl.DirichletRegConfig | None = None) -> Gradients:
    """Gradients for a list of ``(triple, label)`` pairs."""
    if len(batch) == 0:
        raise ValueError("empty batch")
    triples = np.array([tuple(t) for t, _ in batch], dtype=np.int64)
    labels = np.array([y for _, y in batch], dtype=np.float64)
    return batch_loss_and_grad(model, triples, labels, l2_lambda, loss_form, dirichlet)


# -- optimiser ---------------------------------------------------------------

@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    step: int = 0
    m: dict[str, np.ndarray] = field(default_factory=dict)
    v: dict[str, np.ndarray] = field(default_factory=dict)


def adam_step(params: dict[str, np.ndarray], grads: dict[str, np.ndarray],
              state: AdamState, lr: float) -> tuple[dict[str, np.ndarray], AdamState]:
    """Bias-corrected Adam update, applied to ``params`` in place."""
    state.step += 1
    bc1 = 1.0 - state.beta1 ** state.step
    bc2 = 1.0 - state.beta2 ** state.step
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ValueError(f"gradient shape {g.shape} != parameter shape {p.shape} for {name}")
        if name not in state.m:
            state.m[name] = np.zeros_like(p)
            state.v[name] = np.zeros_like(p)
        m, v = state.m[name], state.v[name]
        m *= state.beta1
        m += (1.0 - state.beta1) * g
        v *= state.beta2
        v += (1.0 - state.beta2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + state.eps)
    return params, state


def project_unit_norm(table):
    """Rescale every entity vector to unit L2 norm; relations are left alone."""
    normalize_rows(table.entity)
    return table


# -- training loop -----------------------------------------------------------

@dataclass
class LogEntry:
    epoch: int
    train_loss: float
    valid_mrr: float | None


@dataclass
class TrainResult:
    model: Model  # best by validation MRR
    final_model: Model
    log: list[LogEntry]
    best_epoch: int
    best_mrr: float | None


def _params(model: Model) -> dict[str, np.ndarray]:
    params = {"entity": model.table.entity, "relation": model.table.relation}
    if model.weights.learnable:
        params["omega_raw"] = model.weights.values
    return params


def train_step(model: Model, state: AdamState, triples, labels, cfg: TrainConfig,
               dirichlet: wl.DirichletRegConfig | None = None) -> float:
    """One update: gradient, Adam, then unit-norm projection. Returns the loss."""
    grads = batch_loss_and_grad(model, triples, labels, cfg.l2_lambda, cfg.loss_form, dirichlet)
    gd = {"entity": grads.entity, "relation": grads.relation}
    if model.weights.learnable:
        gd["omega_raw"] = grads.raw
    adam_step(_params(model), gd, state, cfg.learning_rate)
    project_unit_norm(model.table)
    return grads.loss


def train(dataset: KgDataset, model: Model, cfg: TrainConfig,
          dirichlet: wl.DirichletRegConfig | None = None,
          evaluate_fn: Callable[[Model], float] | None = None,
          on_log: Callable[[LogEntry], None] | None = None) -> TrainResult:
    """Train ``model`` in place; return the best-by-validation-MRR snapshot.

    ``evaluate_fn`` defaults to filtered MRR on ``cfg.valid_split``. It runs
    every ``eval_every`` epochs and after the last epoch. Training stops once
    ``patience_epochs`` epochs pass without improvement. With no validation
    (empty split or ``valid_split=None``) the final state is returned.
    """
    if dirichlet is None:
        dirichlet = wl.DirichletRegConfig(enabled=model.config.sparse)
    if evaluate_fn is None and cfg.valid_split is not None:
        from .evaluator import evaluate

        if len(dataset.split(cfg.valid_split)):
            def evaluate_fn(m):
                return evaluate(m, dataset, cfg.valid_split).mrr

    positives = dataset.train
    if len(positives) == 0:
        raise ValueError("no training triples")
    n_pos, k = len(positives), cfg.negatives_per_positive
    shuffle_rng = np.random.default_rng([cfg.seed, 0])
    state = AdamState()
    history: list[LogEntry] = []
    best, best_mrr, best_epoch = model.copy(), None, model.epoch
    labels_pos = np.ones(n_pos)

    for epoch in range(1, cfg.max_epochs + 1):
        neg_rng = np.random.default_rng([cfg.seed, 1, epoch])
        order = shuffle_rng.permutation(n_pos)
        total, count = 0.0, 0
        for b, start in enumerate(range(0, n_pos, cfg.batch_size)):
            pos = positives[order[start:start + cfg.batch_size]]
            neg = corrupt(np.repeat(pos, k, axis=0), dataset.num_entities, neg_rng)
            triples = np.concatenate([pos, neg])
            labels = np.concatenate([labels_pos[:len(pos)], -np.ones(len(neg))])
            loss = train_step(model, state, triples, labels, cfg, dirichlet)
            if not math.isfinite(loss):
                raise TrainingDiverged(f"non-finite loss {loss} at epoch {epoch}, batch {b}")
            total += loss
            count += len(triples)
        model.epoch += 1
        mean_loss = total / count

        mrr = None
        if evaluate_fn is not None and (epoch % cfg.eval_every == 0 or epoch == cfg.max_epochs):
            mrr = float(evaluate_fn(model))
            if best_mrr is None or mrr > best_mrr:
                best, best_mrr, best_epoch = model.copy(), mrr, model.epoch
        entry = LogEntry(epoch, mean_loss, mrr)
        history.append(entry)
        if on_log is not None:
            on_log(entry)
        if mrr is not None:
            log.info("epoch %d loss %.6f valid MRR %.4f", epoch, mean_loss, mrr)
            if model.epoch - best_epoch >= cfg.patience_epochs:
                log.info("early stop at epoch %d (best %d)", epoch, best_epoch)
                break

    final = model.copy()
    if evaluate_fn is None:
        best = final
    return TrainResult(best, final, history, best_epoch if best_mrr is not None else model.epoch, best_mrr)


def write_log(path, entries: list[LogEntry]) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("epoch\ttrain_loss\tvalid_mrr\n")
        for e in entries:
            mrr = "" if e.valid_mrr is None else f"{e.valid_mrr:.6f}"
            fh.write(f"{e.epoch}\t{e.train_loss:.8f}\t{mrr}\n")
